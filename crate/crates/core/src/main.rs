use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use assess_core::run::{self, RunConfig, RunError};

// Output goes to a pipe that may close early (`| head`); that is not an error.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! put {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "assess", version, about = "Game telemetry, level tooling and suitability modeling")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration; unset keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; every stage derives its own stream from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cross-validation folds for both phases.
    #[arg(long, global = true)]
    k_folds: Option<usize>,
    /// Minority oversampling of training folds.
    #[arg(long, global = true, value_enum)]
    oversample: Option<Oversample>,
    /// Absolute correlation cutoff for feature selection and `correlations`.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Level-pack directory.
    #[arg(long, global = true)]
    levels: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oversample {
    Off,
    On,
    /// Phase 2 runs every cell with and without it; phase 1 without.
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Telemetry HTTP server.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        /// Session store directory; in-memory when omitted.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Solve every puzzle level and check its move limit.
    ValidateLevels,
    /// Generate a synthetic cohort.
    Simulate,
    /// Build the feature table from a cohort directory.
    Extract {
        #[arg(long)]
        cohort: PathBuf,
    },
    /// Fit the preprocessing on a feature table and write the cleaned copy.
    Preprocess {
        #[arg(long)]
        features: PathBuf,
    },
    /// Questionnaire models; completes the missing labels.
    Phase1 {
        #[arg(long)]
        features: PathBuf,
    },
    /// Behavioral models over the selection and reduction grid.
    Phase2 {
        #[arg(long)]
        features: PathBuf,
        /// `completed_labels.csv` from phase 1.
        #[arg(long)]
        labels: PathBuf,
    },
    /// Pearson correlation of each behavioral feature with the label.
    Correlations {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Re-render tables from saved results.
    Report {
        #[arg(long)]
        phase1: Option<PathBuf>,
        #[arg(long)]
        phase2: Option<PathBuf>,
    },
    /// simulate through report in one go.
    E2e,
}

fn config(g: &Global) -> Result<RunConfig, RunError> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = &g.out {
        cfg.out = o.clone();
    }
    if let Some(k) = g.k_folds {
        cfg.phase1.cv.k = k;
        cfg.phase2.cv.k = k;
    }
    if let Some(o) = g.oversample {
        cfg.phase1.oversample = matches!(o, Oversample::On);
        cfg.phase2.oversample = match o {
            Oversample::Off => vec![false],
            Oversample::On => vec![true],
            Oversample::Both => vec![false, true],
        };
    }
    if let Some(t) = g.threshold {
        if !(0.0..1.0).contains(&t) {
            return Err(RunError::Config(format!("threshold {t} is outside [0,1)")));
        }
        cfg.correlation_threshold = t;
        cfg.phase2.correlation_threshold = t;
    }
    if let Some(l) = &g.levels {
        cfg.levels = Some(l.clone());
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let mut cfg = config(&cli.global)?;
    let out = cfg.out.clone();
    match cli.command {
        Command::Serve { bind, store } => {
            if let Some(b) = bind {
                cfg.bind = b;
            }
            if store.is_some() {
                cfg.store = store;
            }
            run::serve(&cfg)
        }
        Command::ValidateLevels => {
            let report = run::validate_levels(&cfg, &out)?;
            put!("{}", report.to_text());
            Ok(())
        }
        Command::Simulate => {
            let cohort = run::simulate(&cfg, &out)?;
            say!("simulated {} sessions into {}", cohort.logs.len(), out.display());
            Ok(())
        }
        Command::Extract { cohort } => {
            let ds = run::extract(&cfg, &cohort, &out)?;
            say!("{} rows x {} features", ds.rows.len(), ds.feature_names.len());
            Ok(())
        }
        Command::Preprocess { features } => {
            let ds = run::preprocess(&cfg, &features, &out)?;
            say!("{} features kept", ds.feature_names.len());
            Ok(())
        }
        Command::Phase1 { features } => {
            let (outcome, _) = run::phase1(&cfg, &features, &out)?;
            put!("{}", assess_core::ml::report::phase1_table(&outcome.results).to_text());
            Ok(())
        }
        Command::Phase2 { features, labels } => {
            let outcome = run::phase2(&cfg, &features, &labels, &out)?;
            put!("{}", assess_core::ml::report::selection_table(&outcome.results).to_text());
            say!("");
            put!("{}", assess_core::ml::report::reduction_table(&outcome.results).to_text());
            Ok(())
        }
        Command::Correlations { features, labels } => {
            for c in run::correlations(&cfg, &features, labels.as_deref(), &out)? {
                say!("{:+.3}  {}", c.r, c.feature);
            }
            Ok(())
        }
        Command::Report { phase1, phase2 } => run::report(&cfg, phase1.as_deref(), phase2.as_deref(), &out),
        Command::E2e => {
            let o = run::e2e(&cfg, &out)?;
            let best = o.phase1_best();
            say!(
                "phase 1 best: {} accuracy {:.3}; inferred labels agree with truth {:.3}",
                best.algorithm, best.metrics.accuracy, o.inferred_truth_accuracy
            );
            for label in ["LDA", "PCA"] {
                if let Some(r) = o.best_with_transform(label) {
                    say!(
                        "phase 2 best {label}: {} accuracy {:.3} precision {:.3}",
                        r.algorithm, r.metrics.accuracy, r.metrics.precision
                    );
                }
            }
            say!("outputs in {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            put!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error kind=usage message={}", serde_json::to_string(first).expect("string"));
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::FAILURE
        }
    }
}
