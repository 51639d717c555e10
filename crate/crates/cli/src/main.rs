mod error;
mod record;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use corrdep::audio_io::{load_manifest, CorpusManifest};
use corrdep::eval_harness::{
    baseline_text, best_by_accuracy, load_dataset, parse_grid, plot_tsv, random_baseline, repetitions_tsv, report_tsv,
    run_approach, sweep_l, timing_report, ApproachId, Dataset, Pooling, ProtocolConfig, RunConfig,
};
use corrdep::marker_analysis::{bar_data_tsv, group_compare, scores_tsv, stability_scores, summary_tsv};
use corrdep::synth_corpus::{generate_corpus, SynthMode, SynthParams};

use error::{Category, CliError};
use record::RunRecord;

/// The only environment variable read: a default feature-cache directory.
const CACHE_ENV: &str = "CORRDEP_CACHE_DIR";

#[derive(Parser)]
#[command(name = "corrdep", version, about = "Correlation-based depression detection experiments")]
struct Cli {
    /// Flat `key = value` config file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// Corpus manifest CSV.
    #[arg(long)]
    manifest: PathBuf,
    /// Feature cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    voicing_threshold: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// SVM soft-margin constant.
    #[arg(long = "svm-c")]
    c: Option<f64>,
    #[arg(long, value_enum, default_value_t = PoolingArg::Rep)]
    pooling: PoolingArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolingArg {
    /// One metric set per repetition from all pooled test predictions.
    Rep,
    /// Metrics per fold, macro-averaged.
    Fold,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Features,
    Wave,
}

fn parse_approach(s: &str) -> Result<ApproachId, String> {
    s.parse()
}

#[derive(Subcommand)]
enum Command {
    /// Extract and cache 32-dimensional features for every recording.
    Extract {
        #[command(flatten)]
        data: DataArgs,
        /// Output directory for `<id>.andrf` caches.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the repeated k-fold protocol for one approach.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_parser = parse_approach)]
        approach: ApproachId,
        /// Window length in frames (app1 and app2).
        #[arg(long = "L")]
        l: Option<usize>,
        #[command(flatten)]
        train: TrainArgs,
        /// Summary table path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate an approach over a grid of window lengths.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_parser = parse_approach)]
        approach: ApproachId,
        /// Comma-separated window lengths.
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        train: TrainArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Random-guess metrics from the manifest's class priors.
    Baseline {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Consecutive-matrix stability per recording and group tests.
    Marker {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        grid: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus with a known stability difference.
    Synth {
        #[arg(long, default_value_t = 20)]
        per_class: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Features)]
        mode: ModeArg,
        /// Drift rate of the unstable class.
        #[arg(long)]
        drift: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-fold training wall-clock of one approach.
    Timing {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_parser = parse_approach)]
        approach: ApproachId,
        #[arg(long = "L")]
        l: Option<usize>,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str, rec: &mut RunRecord) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))?;
    rec.output(path);
    Ok(())
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Path next to `out` with its extension replaced.
fn sibling(out: &Path, ext: &str) -> PathBuf {
    out.with_extension(ext)
}

struct Context {
    config: RunConfig,
    record: RunRecord,
}

impl Context {
    fn train(&mut self, t: &TrainArgs) {
        let c = &mut self.config;
        c.reps = t.reps.unwrap_or(c.reps);
        c.epochs = t.epochs.unwrap_or(c.epochs);
        c.lr = t.lr.unwrap_or(c.lr);
        c.batch_size = t.batch_size.unwrap_or(c.batch_size);
        c.c = t.c.unwrap_or(c.c);
    }

    fn protocol(&self, t: &TrainArgs) -> Result<ProtocolConfig, CliError> {
        let p = ProtocolConfig {
            pooling: match t.pooling {
                PoolingArg::Rep => Pooling::PerRepetition,
                PoolingArg::Fold => Pooling::PerFoldMacro,
            },
            ..self.config.protocol()
        };
        if p.reps == 0 {
            return Err(CliError::usage("reps must be at least 1"));
        }
        p.train.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(p)
    }

    fn grid(&mut self, grid: &Option<String>) -> Result<Vec<usize>, CliError> {
        if let Some(g) = grid {
            self.config.grid = parse_grid(g).map_err(CliError::usage)?;
        }
        Ok(self.config.grid.clone())
    }

    fn manifest(&mut self, path: &Path) -> Result<CorpusManifest, CliError> {
        let m = load_manifest(path, true)?;
        self.record.input(path)?;
        for e in &m.entries {
            self.record.input(&e.audio_path)?;
        }
        Ok(m)
    }

    fn dataset(&mut self, d: &DataArgs, cache_override: Option<&Path>) -> Result<Dataset, CliError> {
        if let Some(v) = d.voicing_threshold {
            self.config.voicing_threshold = v;
        }
        let manifest = self.manifest(&d.manifest)?;
        let env_cache = std::env::var_os(CACHE_ENV).map(PathBuf::from);
        let cache = cache_override.or(d.cache.as_deref()).or(env_cache.as_deref());
        log::info!("loading {} recordings", manifest.entries.len());
        Ok(load_dataset(manifest, cache, &self.config.features())?)
    }
}

fn require_l(approach: ApproachId, l: Option<usize>) -> Result<Option<usize>, CliError> {
    match (approach.uses_l(), l) {
        (true, None) => Err(CliError::usage(format!("{approach} needs --L"))),
        (false, Some(_)) => Err(CliError::usage(format!("{approach} does not take --L"))),
        (_, l) => Ok(l),
    }
}

fn run(cli: Cli, argv: &[String]) -> Result<(), CliError> {
    let mut config = RunConfig::default();
    let config_path = cli.config.clone();
    if let Some(path) = &config_path {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        config.merge(&text)?;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    let mut ctx = Context {
        record: RunRecord::start(argv, config.seed),
        config,
    };
    if let Some(path) = &config_path {
        ctx.record.input(path)?;
    }

    let record_path = match cli.command {
        Command::Extract { data, out } => {
            create_dir(&out)?;
            let ds = ctx.dataset(&data, Some(&out))?;
            for e in &ds.manifest.entries {
                ctx.record.output(&corrdep::eval_harness::cache_path(&out, &e.id));
            }
            println!("extracted {} recordings into {}", ds.len(), out.display());
            out.join("run.record")
        }
        Command::Eval { data, approach, l, train, out } => {
            let l = require_l(approach, l)?;
            ctx.train(&train);
            let cfg = ctx.protocol(&train)?;
            let ds = ctx.dataset(&data, None)?;
            let report = run_approach(approach, l, &ds, &cfg)?;
            let reports = [report];
            write(&out, &report_tsv(&reports), &mut ctx.record)?;
            write(&sibling(&out, "reps.tsv"), &repetitions_tsv(&reports), &mut ctx.record)?;
            let acc = reports[0].accuracy();
            println!("{approach} accuracy {:.1} ± {:.1} over {} repetitions", acc.mean, acc.std, acc.n);
            sibling(&out, "run")
        }
        Command::Sweep { data, approach, grid, train, out } => {
            if !approach.uses_l() {
                return Err(CliError::usage(format!("{approach} has no window length to sweep")));
            }
            let grid = ctx.grid(&grid)?;
            ctx.train(&train);
            let cfg = ctx.protocol(&train)?;
            let ds = ctx.dataset(&data, None)?;
            let reports = sweep_l(approach, &ds, &grid, &cfg)?;
            create_dir(&out)?;
            write(&out.join("report.tsv"), &report_tsv(&reports), &mut ctx.record)?;
            write(&out.join("repetitions.tsv"), &repetitions_tsv(&reports), &mut ctx.record)?;
            write(&out.join("plot.tsv"), &plot_tsv(&reports), &mut ctx.record)?;
            if let Some(best) = best_by_accuracy(&reports) {
                let acc = reports.iter().find(|r| r.l == Some(best)).map_or(f64::NAN, |r| r.accuracy().mean);
                let text = format!("approach\tbest_L\taccuracy_mean\n{approach}\t{best}\t{acc:.4}\n");
                write(&out.join("best.tsv"), &text, &mut ctx.record)?;
                println!("best_L={best}");
            }
            out.join("run.record")
        }
        Command::Baseline { manifest, out } => {
            let m = load_manifest(&manifest, false)?;
            let text = baseline_text(&random_baseline(m.priors)?);
            print!("{text}");
            match out {
                Some(out) => {
                    ctx.record.input(&manifest)?;
                    write(&out, &text, &mut ctx.record)?;
                    sibling(&out, "run")
                }
                None => return Ok(()),
            }
        }
        Command::Marker { data, grid, out } => {
            let grid = ctx.grid(&grid)?;
            let ds = ctx.dataset(&data, None)?;
            let scores = stability_scores(&ds, &grid)?;
            let rows = group_compare(&scores, &grid)?;
            create_dir(&out)?;
            write(&out.join("scores.tsv"), &scores_tsv(&scores), &mut ctx.record)?;
            write(&out.join("summary.tsv"), &summary_tsv(&rows), &mut ctx.record)?;
            for &l in &grid {
                write(&out.join(format!("bars_L{l}.tsv")), &bar_data_tsv(&scores, l), &mut ctx.record)?;
            }
            print!("{}", summary_tsv(&rows));
            out.join("run.record")
        }
        Command::Synth { per_class, k, mode, drift, out } => {
            let defaults = SynthParams::default();
            let p = SynthParams {
                n_per_class: per_class,
                k,
                drift_rate: drift.unwrap_or(defaults.drift_rate),
                seed: ctx.config.seed,
                ..defaults
            };
            let mode = match mode {
                ModeArg::Features => SynthMode::Features,
                ModeArg::Wave => SynthMode::Wave,
            };
            create_dir(&out)?;
            let m = generate_corpus(&p, mode, &out)?;
            ctx.record.output(&out.join("manifest.csv"));
            for e in &m.entries {
                ctx.record.output(&e.audio_path);
            }
            println!("wrote {} recordings to {}", m.entries.len(), out.display());
            out.join("run.record")
        }
        Command::Timing { data, approach, l, train, out } => {
            let l = require_l(approach, l)?;
            ctx.train(&train);
            let cfg = ctx.protocol(&train)?;
            let ds = ctx.dataset(&data, None)?;
            let t = timing_report(approach, l, &ds, &cfg)?;
            write(&out, &t.to_tsv(), &mut ctx.record)?;
            println!("{approach} mean training time {:.3} s per fold", t.mean_seconds());
            sibling(&out, "run")
        }
    };
    ctx.record.config(&ctx.config);
    ctx.record.write(&record_path)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", CliError::usage(first));
            eprint!("{rendered}");
            return Category::Usage.exit_code();
        }
    };
    let level = if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.category.exit_code()
        }
    }
}
