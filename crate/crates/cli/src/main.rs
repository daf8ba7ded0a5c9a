use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::Value;

use screenkit::data::{SimConfig, Study};
use screenkit::harness::{emit_report, load_report, run_benchmark, BenchmarkOptions, BenchmarkReport};
use screenkit::ingest::{align, emit_real_study, parse_clinical, parse_profile, run_real_study, Impute};
use screenkit::measures::{DistanceTransform, MeasureKind, MeasureOptions, WdPreprocess};
use screenkit::selftest;
use screenkit::transport::OtSolver;

const THREADS_ENV: &str = "SCREENKIT_THREADS";

/// Dependence-measure feature screening: simulation benchmarks, real-data
/// screening and report regeneration.
#[derive(Debug, Parser)]
#[command(name = "screenkit", version)]
struct Cli {
    /// Worker threads [default: $SCREENKIT_THREADS, else available cores].
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// JSON configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo benchmark and write criteria, model sizes and plots.
    Simulate(SimulateArgs),
    /// Screen aligned cBioPortal profiles against TMB and intersect the top-k sets.
    Screen(ScreenArgs),
    /// Regenerate CSV and SVG outputs from a report.json.
    Report(ReportArgs),
    /// Compare every measure and solver with brute-force references.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args, Default)]
struct MeasureArgs {
    /// Comma-separated methods, or `all`.
    #[arg(long)]
    methods: Option<String>,

    /// WD-Screen transport solver.
    #[arg(long, value_parser = ["auto", "exact", "sinkhorn"])]
    wd_solver: Option<String>,

    /// WD-Screen preprocessing.
    #[arg(long, value_parser = ["standardize", "rank"])]
    wd_preprocess: Option<String>,

    /// WD-Screen Sinkhorn epsilon as a fraction of the mean ground cost.
    #[arg(long)]
    wd_epsilon: Option<f64>,

    /// SC-SIS distance transform.
    #[arg(long, value_parser = ["negexp", "negexp-raw", "identity"])]
    sc_transform: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Simulation design [default: S1]
    #[arg(long, value_parser = ["S1", "S2", "S3", "S4"], ignore_case = true)]
    study: Option<String>,

    /// Monte Carlo replicates
    #[arg(long)]
    replicates: Option<usize>,

    /// Base seed; replicate r uses stream r
    #[arg(long)]
    seed: Option<u64>,

    /// Subjects per replicate.
    #[arg(long)]
    n: Option<usize>,

    /// Features per replicate.
    #[arg(long)]
    p: Option<usize>,

    /// Screening cutoff instead of floor(n / ln n).
    #[arg(long)]
    cutoff_override: Option<usize>,

    #[command(flatten)]
    measures: MeasureArgs,
}

#[derive(Debug, Args)]
struct ScreenArgs {
    /// Genomic profile file; repeat once per platform.
    #[arg(long = "profile")]
    profiles: Vec<PathBuf>,

    /// Clinical-sample file.
    #[arg(long)]
    clinical: Option<PathBuf>,

    /// Clinical column holding TMB [default: TMB_NONSYNONYMOUS].
    #[arg(long)]
    tmb_column: Option<String>,

    /// Genes kept per method [default: floor(n / ln n)].
    #[arg(long)]
    k: Option<usize>,

    /// Missing values: drop affected samples, or fill with the per-gene median [default: drop]
    #[arg(long, value_parser = ["drop", "median"])]
    impute: Option<String>,

    #[command(flatten)]
    measures: MeasureArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// report.json written by `simulate`.
    input: PathBuf,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Random instances per measure.
    #[arg(long, default_value_t = 100)]
    seeds: u64,

    /// Random cost matrices for the assignment check.
    #[arg(long, default_value_t = 1000)]
    assignment_cases: u64,

    /// Base seed for the random instances.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Settings readable from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    threads: Option<usize>,
    out: Option<PathBuf>,
    methods: Option<MethodList>,
    measures: Option<Value>,
    study: Option<Study>,
    replicates: Option<usize>,
    seed: Option<u64>,
    cutoff_override: Option<usize>,
    /// Field overrides applied on top of the study's default design.
    simulation: Option<Value>,
    profiles: Vec<PathBuf>,
    clinical: Option<PathBuf>,
    tmb_column: Option<String>,
    k: Option<usize>,
    impute: Option<Impute>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MethodList {
    Joined(String),
    List(Vec<String>),
}

impl MethodList {
    fn parse(&self) -> Result<Vec<MeasureKind>> {
        Ok(match self {
            MethodList::Joined(s) => MeasureKind::parse_list(s)?,
            MethodList::List(v) => MeasureKind::parse_list(&v.join(","))?,
        })
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Shallow-merges the keys of `overrides` into the serialized `base`.
fn merge<T: serde::Serialize + serde::de::DeserializeOwned>(base: &T, overrides: Option<&Value>) -> Result<T> {
    let mut v = serde_json::to_value(base)?;
    if let Some(o) = overrides {
        let Value::Object(o) = o else { bail!("expected a JSON object, got {o}") };
        let Value::Object(target) = &mut v else { unreachable!("structs serialize to objects") };
        for (k, val) in o {
            if !target.contains_key(k) {
                bail!("unknown field '{k}'; expected one of {:?}", target.keys().collect::<Vec<_>>());
            }
            target.insert(k.clone(), val.clone());
        }
    }
    Ok(serde_json::from_value(v)?)
}

fn measure_options(args: &MeasureArgs, file: &FileConfig) -> Result<MeasureOptions> {
    let mut opts: MeasureOptions = merge(&MeasureOptions::default(), file.measures.as_ref()).context("config 'measures'")?;
    if let Some(s) = &args.wd_solver {
        opts.wd.solver = s.parse::<OtSolver>()?;
    }
    if let Some(s) = &args.wd_preprocess {
        opts.wd.preprocess = s.parse::<WdPreprocess>()?;
    }
    if let Some(e) = args.wd_epsilon {
        opts.wd.epsilon_scale = e;
    }
    if let Some(s) = &args.sc_transform {
        opts.sc_transform = s.parse::<DistanceTransform>()?;
    }
    opts.wd.validate()?;
    Ok(opts)
}

fn methods(args: &MeasureArgs, file: &FileConfig, default: &[MeasureKind]) -> Result<Vec<MeasureKind>> {
    match (&args.methods, &file.methods) {
        (Some(s), _) => Ok(MeasureKind::parse_list(s)?),
        (None, Some(list)) => list.parse(),
        (None, None) => Ok(default.to_vec()),
    }
}

fn thread_count(flag: Option<usize>, file: &FileConfig) -> Result<usize> {
    let n = match flag.or(file.threads) {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(s) if !s.trim().is_empty() => s
                .trim()
                .parse::<usize>()
                .with_context(|| format!("{THREADS_ENV}='{s}' is not a thread count"))?,
            _ => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        bail!("thread count must be positive");
    }
    Ok(n)
}

fn out_dir(cli: &Cli, file: &FileConfig, default: &str) -> PathBuf {
    cli.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from(default))
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs, file: &FileConfig) -> Result<()> {
    let study = match &args.study {
        Some(s) => s.parse::<Study>()?,
        None => file.study.unwrap_or(Study::S1),
    };
    let mut cfg: SimConfig = merge(&SimConfig::for_study(study), file.simulation.as_ref()).context("config 'simulation'")?;
    cfg.study = study;
    if let Some(r) = args.replicates.or(file.replicates) {
        cfg.replicates = r;
    }
    if let Some(s) = args.seed.or(file.seed) {
        cfg.base_seed = s;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    let default_methods = if study.is_multivariate() {
        MeasureKind::multivariate()
    } else {
        MeasureKind::ALL.to_vec()
    };
    let methods = methods(&args.measures, file, &default_methods)?;
    let opts = BenchmarkOptions {
        measures: measure_options(&args.measures, file)?,
        cutoff_override: args.cutoff_override.or(file.cutoff_override),
    };
    let report = run_benchmark(&cfg, &methods, &opts)?;
    let dir = out_dir(cli, file, "out");
    emit_report(&report, &dir)?;
    print_criteria(&report);
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn print_criteria(r: &BenchmarkReport) {
    println!(
        "study {} n={} p={} replicates={} cutoff={}",
        r.config.study, r.config.n, r.config.p, r.config.replicates, r.cutoff
    );
    for m in &r.results {
        let ps: Vec<String> = m.criteria.p_s.iter().map(|p| format!("{p:.3}")).collect();
        println!(
            "{:<10} P_s [{}]  P_a {:.3}  median S {}",
            m.method.name(),
            ps.join(", "),
            m.criteria.p_a,
            m.model_size_summary.median
        );
    }
}

fn cmd_screen(cli: &Cli, args: &ScreenArgs, file: &FileConfig) -> Result<()> {
    let profiles = if args.profiles.is_empty() { &file.profiles } else { &args.profiles };
    if profiles.is_empty() {
        bail!("no --profile files given");
    }
    let clinical = args
        .clinical
        .as_ref()
        .or(file.clinical.as_ref())
        .context("no --clinical file given")?;
    let tmb = args
        .tmb_column
        .clone()
        .or_else(|| file.tmb_column.clone())
        .unwrap_or_else(|| "TMB_NONSYNONYMOUS".into());
    let impute = match &args.impute {
        Some(s) => s.parse::<Impute>()?,
        None => file.impute.unwrap_or_default(),
    };
    let methods = methods(
        &args.measures,
        file,
        &[MeasureKind::DcSis, MeasureKind::PcScreen, MeasureKind::WdScreen],
    )?;
    let opts = measure_options(&args.measures, file)?;

    let clin = parse_clinical(clinical, &tmb)?;
    let mats = profiles.iter().map(|p| parse_profile(p)).collect::<screenkit::Result<Vec<_>>>()?;
    let ds = align(&mats, &clin, impute)?;
    for m in &methods {
        m.check_dims(ds.x.platforms(), 1)?;
    }
    eprintln!(
        "aligned {} platforms x {} subjects x {} genes",
        ds.x.platforms(),
        ds.x.subjects(),
        ds.x.features()
    );
    let report = run_real_study(&ds, &methods, &opts, args.k.or(file.k))?;
    let dir = out_dir(cli, file, "out");
    emit_real_study(&report, &dir)?;
    println!("top {} intersection ({} genes): {}", report.k, report.intersection.len(), report.intersection.join(", "));
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn cmd_report(cli: &Cli, args: &ReportArgs, file: &FileConfig) -> Result<()> {
    let report = load_report(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let default = args.input.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    let dir = cli.out.clone().or_else(|| file.out.clone()).unwrap_or(default);
    emit_report(&report, &dir)?;
    print_criteria(&report);
    Ok(())
}

fn cmd_selftest(args: &SelftestArgs) -> Result<()> {
    let checks = selftest::run(args.seeds, args.assignment_cases, args.seed)?;
    let mut failed = 0;
    for c in &checks {
        println!(
            "{} {:<12} cases={:<5} max|err|={:.2e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.max_abs_error
        );
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        bail!("{failed} of {} checks exceeded tolerance {:e}", checks.len(), selftest::ORACLE_TOL);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let file = load_config(cli.config.as_deref())?;
    let threads = thread_count(cli.threads, &file)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("building thread pool")?;
    log::info!("using {threads} threads");
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(cli, a, &file),
        Command::Screen(a) => cmd_screen(cli, a, &file),
        Command::Report(a) => cmd_report(cli, a, &file),
        Command::Selftest(a) => cmd_selftest(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
