//! `redent` command-line runner.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use redent::checks::{CheckId, CheckReport};
use redent::matrix::CMatrix;
use redent::suite::{regenerate_instance, run_suite, ReportFormat, SuiteConfig, SuiteReport};

const OUT_DIR_ENV: &str = "REDENT_OUT_DIR";

#[derive(Parser)]
#[command(name = "redent", version, about = "Randomized verification of reduced relative entropy inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and write a report.
    Run(RunArgs),
    /// Re-run a single trial from its fingerprint.
    Regen(RegenArgs),
    /// List the available checks.
    ListChecks,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Ci,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Base profile; a config file and flags override it.
    #[arg(long, value_enum, default_value = "ci")]
    profile: Profile,
    /// TOML file with SuiteConfig fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Trials per cell.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long = "q-grid", value_delimiter = ',', allow_negative_numbers = true)]
    q_grid: Option<Vec<f64>>,
    #[arg(long = "p-grid", value_delimiter = ',', allow_negative_numbers = true)]
    p_grid: Option<Vec<f64>>,
    #[arg(long = "lambda-grid", value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Margin tolerance relative to each check's scale.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated check ids, or `all`.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Report path. Defaults to `$REDENT_OUT_DIR/redent-report.<ext>`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include every trial report in the output.
    #[arg(long = "verbose-trials")]
    verbose_trials: bool,
}

#[derive(Args)]
struct RegenArgs {
    fingerprint: String,
    /// Significant digits for printed matrix entries.
    #[arg(long, default_value_t = 17)]
    precision: usize,
    /// Print the check report as JSON instead of text.
    #[arg(long)]
    json: bool,
}

fn load_config(args: &RunArgs) -> Result<SuiteConfig> {
    let base = match args.profile {
        Profile::Ci => SuiteConfig::ci(),
        Profile::Full => SuiteConfig::full(),
    };
    let mut cfg = match &args.config {
        None => base,
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let overrides: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let mut table = toml::Table::try_from(&base)?;
            table.extend(overrides);
            table.try_into().with_context(|| format!("invalid config {}", path.display()))?
        }
    };
    if let Some(v) = &args.dims {
        cfg.dims = v.clone();
    }
    if let Some(v) = args.trials {
        cfg.trials_per_cell = v;
    }
    if let Some(v) = &args.q_grid {
        cfg.q_grid = v.clone();
    }
    if let Some(v) = &args.p_grid {
        cfg.p_grid = v.clone();
    }
    if let Some(v) = &args.lambda_grid {
        cfg.lambda_grid = v.clone();
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.tol {
        cfg.margin_tol = v;
    }
    if let Some(v) = &args.checks {
        cfg.checks = v.clone();
    }
    if let Some(v) = args.format {
        cfg.format = v.into();
    }
    if let Some(v) = &args.out {
        cfg.output_path = Some(v.clone());
    }
    if args.verbose_trials {
        cfg.verbose_trials = true;
    }
    if cfg.output_path.is_none() {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            let ext = match cfg.format {
                ReportFormat::Json => "json",
                ReportFormat::Csv => "csv",
            };
            cfg.output_path = Some(Path::new(&dir).join(format!("redent-report.{ext}")));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn summarize(report: &SuiteReport) {
    for c in &report.checks {
        let worst = c
            .worst
            .as_ref()
            .map(|w| format!("worst normalized margin {:.3e} at {}", w.normalized_margin, w.fingerprint))
            .unwrap_or_default();
        eprintln!("{:<32} {:>7}/{:<7} {}", c.check_id, c.passes, c.trials, worst);
    }
    eprintln!(
        "{} trials, {} failures, {:.1}s",
        report.total_trials, report.total_failures, report.timing.wall_clock_seconds
    );
}

fn run(args: RunArgs) -> Result<bool> {
    let cfg = load_config(&args)?;
    let report = run_suite(&cfg)?;
    let text = report.render(cfg.format)?;
    match &cfg.output_path {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("report written to {}", path.display());
        }
        None if text.ends_with('\n') => print!("{text}"),
        None => println!("{text}"),
    }
    summarize(&report);
    if !report.all_pass() {
        eprintln!("FAILED: {} failing trials", report.total_failures);
    }
    Ok(report.all_pass())
}

fn print_matrix(name: &str, m: &CMatrix, precision: usize) {
    let digits = precision.saturating_sub(1);
    println!("{name} ({}x{}):", m.nrows(), m.ncols());
    let real = m.iter().all(|z| z.im == 0.0);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| {
                let z = m[(i, j)];
                if real {
                    format!("{:>w$.digits$e}", z.re, w = digits + 8)
                } else {
                    format!("{:>w$.digits$e}{:+.digits$e}i", z.re, z.im, w = digits + 8)
                }
            })
            .collect();
        println!("  {}", row.join("  "));
    }
}

fn print_report(r: &CheckReport, depth: usize) {
    let pad = "  ".repeat(depth);
    println!("{pad}check:     {} ({:?})", r.check_id, r.relation);
    println!("{pad}lhs:       {:?}", r.lhs);
    println!("{pad}rhs:       {:?}", r.rhs);
    println!("{pad}margin:    {:?}", r.margin);
    println!("{pad}scale:     {:?}", r.scale);
    println!("{pad}tolerance: {:?}", r.tolerance);
    println!("{pad}holds:     {}", r.holds);
    if let Some(n) = &r.notes {
        println!("{pad}notes:     {n}");
    }
    for s in &r.sub_reports {
        print_report(s, depth + 1);
    }
}

fn regen(args: RegenArgs) -> Result<bool> {
    let (report, instance) = regenerate_instance(&args.fingerprint)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(report.all_hold());
    }
    println!("fingerprint: {}", args.fingerprint);
    if let Some(f) = instance.field {
        println!("field:       {f:?}");
    }
    for (name, v) in &instance.scalars {
        println!("{name} = {v:?}");
    }
    for (name, m) in &instance.matrices {
        print_matrix(name, m, args.precision.max(1));
    }
    print_report(&report, 0);
    Ok(report.all_hold())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Regen(args) => regen(args),
        Command::ListChecks => {
            for id in CheckId::ALL {
                println!("{:<32} {}", id.as_str(), id.statement());
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
