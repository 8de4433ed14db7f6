use mmsa::alignment::{dtw_align, pivot_align, CollapseFn};
use mmsa::fusion::{cab, cab_weights, AttentionWeights};
use mmsa::numkernel::{concat_cols, layer_norm, matmul, softmax_rows, Matrix};
use mmsa::sequences::{
    aggregate_annotations, parse_corpus, render_corpus, synth_generate, AnnotationSet, FeatureSequence,
    Label, Modality, SynthConfig,
};
use mmsa::training::{accuracy, f1, mae};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-4.0f64..4.0, rows * cols).prop_map(move |d| Matrix::new(rows, cols, d).unwrap())
}

fn sized_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| matrix(r, c))
}

fn label() -> impl Strategy<Value = Label> {
    prop::sample::select(Label::ALL.to_vec())
}

fn label_pairs() -> impl Strategy<Value = (Vec<Label>, Vec<Label>)> {
    (1usize..40).prop_flat_map(|n| (prop::collection::vec(label(), n), prop::collection::vec(label(), n)))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn softmax_rows_are_distributions(m in sized_matrix()) {
        let s = softmax_rows(&m).unwrap();
        for row in s.iter_rows() {
            prop_assert!(row.iter().all(|&p| p > 0.0 && p <= 1.0));
            prop_assert!(close(row.iter().sum::<f64>(), 1.0, 1e-12));
        }
    }

    #[test]
    fn matmul_is_associative((a, b, c) in (1usize..5, 1usize..5, 1usize..5, 1usize..5)
        .prop_flat_map(|(p, q, r, s)| (matrix(p, q), matrix(q, r), matrix(r, s))))
    {
        let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
        let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
        for (x, y) in left.data().iter().zip(right.data()) {
            prop_assert!(close(*x, *y, 1e-10));
        }
    }

    #[test]
    fn layer_norm_standardizes_rows(m in (1usize..5, 2usize..8).prop_flat_map(|(r, c)| matrix(r, c))) {
        let c = m.cols();
        let y = layer_norm(&m, &vec![1.0; c], &vec![0.0; c], 1e-5).unwrap();
        for (row, orig) in y.iter_rows().zip(m.iter_rows()) {
            let mean = row.iter().sum::<f64>() / c as f64;
            prop_assert!(mean.abs() < 1e-9);
            let mu = orig.iter().sum::<f64>() / c as f64;
            let var_in = orig.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / c as f64;
            let var = row.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / c as f64;
            prop_assert!(close(var, var_in / (var_in + 1e-5), 1e-9));
        }
    }

    #[test]
    fn concat_then_slice_recovers_parts((a, b) in (1usize..5, 1usize..5, 1usize..5)
        .prop_flat_map(|(r, p, q)| (matrix(r, p), matrix(r, q))))
    {
        let ab = concat_cols(&[&a, &b]).unwrap();
        prop_assert_eq!(ab.slice_cols(0, a.cols()).unwrap(), a.clone());
        prop_assert_eq!(ab.slice_cols(a.cols(), ab.cols()).unwrap(), b);
    }

    #[test]
    fn synthetic_corpus_round_trips(seed in 0u64..1000, segments in 1usize..12) {
        let c = synth_generate(&SynthConfig { segments, ..SynthConfig::default() }, seed).unwrap();
        let text = render_corpus(&c).unwrap();
        let back = parse_corpus(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(render_corpus(&back).unwrap(), text);
    }

    #[test]
    fn aggregation_ignores_annotator_order(labels in prop::collection::vec(label(), 5), perm in Just(()).prop_perturb(|_, mut rng| {
        let mut p: Vec<usize> = (0..5).collect();
        for i in (1..5).rev() { p.swap(i, rng.random_range(0..=i)); }
        p
    })) {
        let a = aggregate_annotations(&AnnotationSet { segment_id: "s".into(), labels: labels.clone() }).unwrap();
        let shuffled = perm.iter().map(|&i| labels[i]).collect();
        let b = aggregate_annotations(&AnnotationSet { segment_id: "s".into(), labels: shuffled }).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.agreement >= 0.0 && a.agreement <= 1.0);
    }

    #[test]
    fn pivot_alignment_follows_pivot_length(
        pivot_n in 1usize..8,
        other_n in 0usize..30,
        dim in 1usize..4,
        mean in any::<bool>(),
    ) {
        let span = |n: usize| -> Vec<(f64, f64)> {
            (0..n).map(|k| (k as f64 * 4.0 / n as f64, (k + 1) as f64 * 4.0 / n as f64)).collect()
        };
        let pivot = FeatureSequence::new(Modality::Text, span(pivot_n), Matrix::zeros(pivot_n, 2)).unwrap();
        let data = (0..other_n * dim).map(|k| k as f64).collect();
        let other = FeatureSequence::new(Modality::Audio, span(other_n), Matrix::new(other_n, dim, data).unwrap()).unwrap();
        let collapse = if mean { CollapseFn::Mean } else { CollapseFn::Max };
        let out = pivot_align(&pivot, &other, collapse).unwrap();
        prop_assert_eq!(out.len(), pivot_n);
        prop_assert_eq!(out.dim(), dim);
        prop_assert_eq!(out.timestamps(), pivot.timestamps());
    }

    #[test]
    fn dtw_cost_is_symmetric(
        a in prop::collection::vec(-5.0f64..5.0, 1..10),
        b in prop::collection::vec(-5.0f64..5.0, 1..10),
    ) {
        let d = |x: &f64, y: &f64| (x - y).abs();
        let ab = dtw_align(&a, &b, d).unwrap();
        let ba = dtw_align(&b, &a, d).unwrap();
        prop_assert!(close(ab.total_cost, ba.total_cost, 1e-12));
        prop_assert!(ab.is_valid(a.len(), b.len()));
        prop_assert_eq!(dtw_align(&a, &a, d).unwrap().total_cost, 0.0);
    }

    #[test]
    fn metric_invariants((y, p) in label_pairs(), seed in any::<u64>()) {
        let acc = accuracy(&y, &p).unwrap();
        let m = mae(&y, &p).unwrap();
        let f = f1(&y, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc) && (0.0..=1.0).contains(&f) && (0.0..=2.0).contains(&m));
        prop_assert_eq!(acc == 1.0, m == 0.0);
        prop_assert_eq!(acc == 1.0, f == 1.0);
        // Jointly permuting examples changes nothing.
        let mut idx: Vec<usize> = (0..y.len()).collect();
        idx.rotate_left((seed as usize) % y.len());
        let (y2, p2): (Vec<_>, Vec<_>) = idx.iter().map(|&i| (y[i], p[i])).unzip();
        prop_assert_eq!(accuracy(&y2, &p2).unwrap(), acc);
        prop_assert_eq!(mae(&y2, &p2).unwrap(), m);
        prop_assert!(close(f1(&y2, &p2).unwrap(), f, 1e-12));
    }

    #[test]
    fn cab_weights_are_row_stochastic_and_follow_query_length(
        (x, y, wq, wk, wv) in (1usize..6, 1usize..6, 1usize..4, 1usize..4, 1usize..4)
            .prop_flat_map(|(lx, ly, d, dk, dv)| (matrix(lx, d), matrix(ly, d), matrix(d, dk), matrix(d, dk), matrix(d, dv)))
    ) {
        let w = AttentionWeights { wq, wk, wv };
        let (a, _) = cab_weights(&x, &y, &w).unwrap();
        prop_assert_eq!(a.shape(), (x.rows(), y.rows()));
        for row in a.iter_rows() {
            prop_assert!(close(row.iter().sum::<f64>(), 1.0, 1e-12));
        }
        let z = cab(&x, &y, &w).unwrap();
        prop_assert_eq!(z.shape(), (x.rows(), w.wv.cols()));
    }
}
