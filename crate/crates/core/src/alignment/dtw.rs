use crate::error::{Error, Result};
use crate::numkernel::Matrix;

/// Monotone correspondence between two sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentPath {
    /// Index pairs from `(0, 0)` to `(len_a - 1, len_b - 1)`.
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

impl AlignmentPath {
    /// Checks endpoints and that every step advances `i`, `j` or both by one.
    pub fn is_valid(&self, len_a: usize, len_b: usize) -> bool {
        let (Some(&first), Some(&last)) = (self.pairs.first(), self.pairs.last()) else {
            return false;
        };
        first == (0, 0)
            && last == (len_a - 1, len_b - 1)
            && self.pairs.windows(2).all(|w| {
                let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
                matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
            })
    }
}

/// Classic dynamic time warping with the three moves (1,0), (0,1), (1,1).
///
/// Ties during backtracking prefer the diagonal, then a step in `a`, then a
/// step in `b`.
pub fn dtw_align<T, F>(a: &[T], b: &[T], dist: F) -> Result<AlignmentPath>
where
    F: Fn(&T, &T) -> f64,
{
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid(format!(
            "dtw needs non-empty sequences, got lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (n, m) = (a.len(), b.len());
    let mut cost = vec![f64::INFINITY; n * m];
    let at = |i: usize, j: usize| i * m + j;
    for i in 0..n {
        for j in 0..m {
            let d = dist(&a[i], &b[j]);
            if !d.is_finite() {
                return Err(Error::Numeric(format!("non-finite distance at ({i}, {j})")));
            }
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { cost[at(i - 1, j - 1)] } else { f64::INFINITY };
                let up = if i > 0 { cost[at(i - 1, j)] } else { f64::INFINITY };
                let left = if j > 0 { cost[at(i, j - 1)] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            cost[at(i, j)] = d + best;
        }
    }

    let mut pairs = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        let diag = if i > 0 && j > 0 { cost[at(i - 1, j - 1)] } else { f64::INFINITY };
        let up = if i > 0 { cost[at(i - 1, j)] } else { f64::INFINITY };
        let left = if j > 0 { cost[at(i, j - 1)] } else { f64::INFINITY };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        pairs.push((i, j));
    }
    pairs.reverse();
    Ok(AlignmentPath { pairs, total_cost: cost[at(n - 1, m - 1)] })
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// DTW between the rows of two feature matrices under Euclidean distance.
pub fn dtw_align_rows(a: &Matrix, b: &Matrix) -> Result<AlignmentPath> {
    if a.cols() != b.cols() {
        return Err(Error::dim(format!(
            "dtw over rows of width {} and {}",
            a.cols(),
            b.cols()
        )));
    }
    let ra: Vec<&[f64]> = a.iter_rows().collect();
    let rb: Vec<&[f64]> = b.iter_rows().collect();
    dtw_align(&ra, &rb, |x, y| euclidean(x, y))
}
