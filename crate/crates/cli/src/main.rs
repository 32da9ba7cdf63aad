use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mubell_core::estimator::{
    estimate, grid_scan, nonviolating_instances, EstimateSummary, Mode, StateSpec, TrialConfig,
};
use mubell_core::golden::{table, verify_table, EntryCheck};
use mubell_core::polytope::Search;
use mubell_core::Error;

use mubell_cli::output::{self, CampaignFile};

const EXIT_MISMATCH: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_LP_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "mubell", version, about = "Bell violations with randomly rotated mutually unbiased bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a violation probability
    Estimate(EstimateArgs),
    /// Scan the partially entangled qutrit family on an (alpha, beta) grid
    Gridscan(GridArgs),
    /// Run a campaign file and emit probability curves
    Curves(CurvesArgs),
    /// Replicate a published table at reduced sample size
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Exact,
    Decision,
}

impl From<SearchArg> for Search {
    fn from(s: SearchArg) -> Search {
        match s {
            SearchArg::Exact => Search::Exact,
            SearchArg::Decision => Search::Decision,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Output directory
    #[arg(long, env = "MUBELL_OUT_DIR", default_value = "mubell-out")]
    out: PathBuf,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    d: usize,
    /// mes or partial:ALPHA,BETA
    #[arg(long, default_value = "mes")]
    state: String,
    #[arg(long)]
    mu: usize,
    #[arg(long)]
    nu: usize,
    #[arg(long)]
    ntot: u64,
    /// cglmp, lp2 or lpfull:M
    #[arg(long, default_value = "lp2")]
    mode: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 2.5e-3)]
    bin_width: f64,
    /// exact records every minimum visibility; decision stops at the verdict
    #[arg(long, value_enum, default_value = "exact")]
    search: SearchArg,
    /// Largest number of local correlations written for re-testing
    #[arg(long, default_value_t = 16)]
    dump_limit: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 4)]
    mu: usize,
    #[arg(long, default_value_t = 4)]
    nu: usize,
    #[arg(long, default_value_t = 1000)]
    ntot_per_cell: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Grid points per axis
    #[arg(long, default_value_t = 31)]
    points: usize,
    #[arg(long, value_enum, default_value = "decision")]
    search: SearchArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CurvesArgs {
    /// JSON campaign file
    #[arg(long)]
    campaign: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// qubit, qutrit, ququart, ququint, d6 or d7
    #[arg(long)]
    table: String,
    #[arg(long)]
    ntot: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, hide = true)]
    debug_collapse_seed_stream: bool,
}

/// Failure of a command, mapped to an exit code.
enum Failure {
    Config(String),
    Runtime(String),
    LpBudget(String),
    Mismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Lp(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure>
where
    T: Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(pool.install(f))
}

fn ensure_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("output directory {}: {e}", dir.display())))
}

fn check_budget(summary: &EstimateSummary) -> Outcome {
    if summary.failure_budget_exceeded() {
        return Err(Failure::LpBudget(format!(
            "{} LP failures in {} trials exceed the budget",
            summary.lp_failures,
            summary.n_tot + summary.lp_failures
        )));
    }
    Ok(())
}

fn describe(s: &EstimateSummary) -> String {
    let c = &s.config;
    format!(
        "d={} mu={} nu={} mode={}: {}/{} = {:.4}% CPI ({:.4}, {:.4})%",
        c.d,
        c.mu,
        c.nu,
        c.mode,
        s.n_viol,
        s.n_tot,
        100.0 * s.fraction,
        100.0 * s.ci_low,
        100.0 * s.ci_high
    )
}

fn cmd_estimate(a: EstimateArgs) -> Outcome {
    let state: StateSpec = a.state.parse()?;
    let mode: Mode = a.mode.parse()?;
    let config = TrialConfig {
        state,
        alpha_level: a.alpha,
        histogram_bin: a.bin_width,
        ..TrialConfig::new(a.d, a.mu, a.nu, a.ntot, mode, a.seed).with_search(a.search.into())
    };
    config.validate()?;
    let dir = a.common.out;
    ensure_dir(&dir)?;
    let est = with_threads(a.common.threads, || estimate(&config))??;
    output::write_summary(&dir, &est.summary)?;
    output::write_records(&dir, &est.records)?;
    output::write_histogram(&dir, &est.histogram()?)?;
    if config.mode != Mode::Cglmp {
        let dumps = nonviolating_instances(&config, &est.records, a.dump_limit)?;
        output::write_dumps(&dir, &dumps)?;
    }
    eprintln!("{}", describe(&est.summary));
    check_budget(&est.summary)
}

fn cmd_gridscan(a: GridArgs) -> Outcome {
    let base = TrialConfig::new(a.d, a.mu, a.nu, a.ntot_per_cell, Mode::Lp2, a.seed).with_search(a.search.into());
    if a.d != 3 {
        return Err(Failure::Config(format!("the grid scan needs --d 3 (got {})", a.d)));
    }
    base.validate()?;
    let dir = a.common.out;
    ensure_dir(&dir)?;
    let cells = with_threads(a.common.threads, || grid_scan(&base, a.points))??;
    output::write_heatmap(&dir, &cells)?;
    eprintln!("{} cells written to {}", cells.len(), dir.join(output::HEATMAP_FILE).display());
    for c in &cells {
        check_budget(&c.summary)?;
    }
    Ok(())
}

fn print_checks(checks: &[EntryCheck]) {
    for c in checks {
        let e = &c.entry;
        let (lo, hi) = e.interval();
        println!(
            "{} d={} mu={} nu={} mode={} run {:.3}% ({:.3}, {:.3}) reference {}% ({:.4}, {:.4})",
            if c.overlap { "PASS" } else { "FAIL" },
            e.d,
            e.mu,
            e.nu,
            e.mode,
            100.0 * c.summary.fraction,
            100.0 * c.summary.ci_low,
            100.0 * c.summary.ci_high,
            e.percent,
            100.0 * lo,
            100.0 * hi
        );
    }
}

fn cmd_curves(a: CurvesArgs) -> Outcome {
    let text = fs::read_to_string(&a.campaign)
        .map_err(|e| Failure::Config(format!("campaign {}: {e}", a.campaign.display())))?;
    let campaign: CampaignFile =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("campaign {}: {e}", a.campaign.display())))?;
    if campaign.configs.is_empty() {
        return Err(Failure::Config("the campaign lists no configurations".into()));
    }
    for c in &campaign.configs {
        c.validate()?;
    }
    for name in &campaign.compare {
        table(name)?;
    }
    let dir = a
        .out
        .or(campaign.output.clone())
        .or_else(|| std::env::var_os("MUBELL_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("mubell-out"));
    ensure_dir(&dir)?;
    let summaries = with_threads(a.threads, || {
        campaign
            .configs
            .iter()
            .map(|c| estimate(c).map(|e| e.summary))
            .collect::<mubell_core::Result<Vec<_>>>()
    })??;
    output::write_curves(&dir, &summaries)?;
    for s in &summaries {
        eprintln!("{}", describe(s));
        check_budget(s)?;
    }
    let mut all = true;
    for name in &campaign.compare {
        let checks = with_threads(a.threads, || {
            let first = &campaign.configs[0];
            verify_table(name, first.n_tot, first.master_seed, false)
        })??;
        print_checks(&checks);
        all &= checks.iter().all(|c| c.overlap);
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    table(&a.table)?;
    if a.ntot == 0 {
        return Err(Failure::Config("--ntot must be at least 1".into()));
    }
    let checks = with_threads(a.threads, || {
        verify_table(&a.table, a.ntot, a.seed, a.debug_collapse_seed_stream)
    })??;
    print_checks(&checks);
    for c in &checks {
        check_budget(&c.summary)?;
    }
    if checks.iter().all(|c| c.overlap) {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Gridscan(a) => cmd_gridscan(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(Failure::LpBudget(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_LP_BUDGET)
        }
        Err(Failure::Mismatch) => {
            eprintln!("some entries do not overlap the reference intervals");
            ExitCode::from(EXIT_MISMATCH)
        }
    }
}
