use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mmsa::alignment::CollapseFn;
use mmsa::fusion::{FusionMode, LfLstmConfig, ModelSpec, MultConfig};
use mmsa::pipeline::{run_align, run_eval, run_report, run_synth, run_train};
use mmsa::sequences::{Dims, ModalitySet, Split, SynthConfig, SynthMode};
use mmsa::training::{MetricsReport, TrainConfig};
use mmsa::{Error, Exec};

/// Multimodal sentiment pipeline: synth -> align -> train -> eval -> report.
#[derive(Parser)]
#[command(name = "mmsa", version)]
struct Cli {
    /// Run every data-parallel stage on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Pivot-align audio and video onto the text timeline.
    Align(AlignArgs),
    /// Train one model variant and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on one split.
    Eval(EvalArgs),
    /// Compare metrics reports.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Unimodal,
    Crossmodal,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "crossmodal")]
    mode: ModeArg,
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    segments: u64,
    #[arg(long, env = "MMSA_SEED", default_value_t = 7)]
    seed: u64,
    /// Feature widths as text,audio,video.
    #[arg(long, default_value = "16,12,10", value_parser = parse_dims)]
    dims: Dims,
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "mean", value_parser = ["mean", "max"])]
    collapse: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Mult,
    LfLstm,
}

#[derive(Args)]
struct TrainArgs {
    /// Aligned corpus file.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value = "mult")]
    model: ModelArg,
    /// Any non-empty combination of t, a, v.
    #[arg(long, default_value = "tva")]
    modalities: String,
    #[arg(long, default_value = "concat", value_parser = ["concat", "sum"])]
    fusion: String,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    batch_size: u64,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, env = "MMSA_SEED", default_value_t = 7)]
    seed: u64,
    /// Attention key width (mult).
    #[arg(long, default_value_t = 32)]
    d_k: usize,
    /// Cross-attention layers per direction (mult).
    #[arg(long, default_value_t = 1)]
    layers: usize,
    /// Residual connection around each cross-attention block (mult).
    #[arg(long)]
    residual: bool,
    /// LSTM hidden units (lf-lstm).
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    /// Classifier hidden units (lf-lstm).
    #[arg(long, default_value_t = 32)]
    head_hidden: usize,
    /// Classifier dropout rate during training (lf-lstm).
    #[arg(long, default_value_t = 0.1)]
    dropout: f64,
    /// Checkpoint path; the loss history goes to <out>.loss.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "test", value_parser = ["train", "valid", "test"])]
    split: String,
    /// Row label in reports (default: modalities and architecture, e.g. TVA-Mult).
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Metrics report files written by `eval`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Machine-readable comparison; the text table also goes to <out>.txt.
    #[arg(long)]
    out: PathBuf,
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad dimension \"{p}\"")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [t, a, v] if t > 0 && a > 0 && v > 0 => Ok(Dims::new(t, a, v)),
        _ => Err("expected three positive widths: text,audio,video".into()),
    }
}

fn run(cli: Cli) -> mmsa::Result<()> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match cli.command {
        Command::Synth(a) => {
            let config = SynthConfig {
                mode: match a.mode {
                    ModeArg::Unimodal => SynthMode::Unimodal,
                    ModeArg::Crossmodal => SynthMode::Crossmodal,
                },
                segments: a.segments as usize,
                dims: a.dims,
                noise: a.noise,
                ..SynthConfig::default()
            };
            run_synth(&config, a.seed, &a.out)?;
            eprintln!("wrote {}", a.out.display());
        }
        Command::Align(a) => {
            let collapse: CollapseFn = a.collapse.parse()?;
            run_align(&a.input, collapse, &a.out, exec)?;
            eprintln!("wrote {}", a.out.display());
        }
        Command::Train(a) => {
            let modalities: ModalitySet = a.modalities.parse()?;
            let model = match a.model {
                ModelArg::Mult => ModelSpec::Mult(MultConfig {
                    modalities,
                    d_k: a.d_k,
                    layers: a.layers,
                    fusion: a.fusion.parse::<FusionMode>()?,
                    residual: a.residual,
                }),
                ModelArg::LfLstm => {
                    if a.fusion != "concat" {
                        return Err(Error::Validation("lf-lstm supports only concat fusion".into()));
                    }
                    ModelSpec::LfLstm(LfLstmConfig {
                        modalities,
                        hidden: a.hidden,
                        head_hidden: a.head_hidden,
                        dropout: a.dropout,
                    })
                }
            };
            let config = TrainConfig {
                epochs: a.epochs as usize,
                batch_size: a.batch_size as usize,
                lr: a.lr,
                seed: a.seed,
                model,
            };
            let manifest = run_train(&a.corpus, &config, &a.out, exec)?;
            eprintln!("wrote {} ({})", a.out.display(), manifest.summary);
        }
        Command::Eval(a) => {
            let split: Split = a.split.parse()?;
            let (report, _) = run_eval(&a.checkpoint, &a.corpus, split, a.label.as_deref(), &a.out, exec)?;
            println!("{}", report.to_json());
            println!("{}", MetricsReport::table_header());
            println!("{}", report.table_row());
        }
        Command::Report(a) => {
            let (cmp, _) = run_report(&a.reports, &a.out)?;
            print!("{}", cmp.render_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
