use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loopbundle_core::harness::{run_atlas_check, run_suite, RunConfig, Suite};
use loopbundle_core::loop_core::product;
use loopbundle_core::reconstruct::reconstruct_product;
use loopbundle_core::{loop_by_name, Error, VerificationReport};

mod config;

use config::{split_tolerances, ConfigFile};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "loopbundle", version, about = "Verification harness for smooth loops and principal loop bundles")]
#[command(after_help = "Tolerances are set per check with --tol.<name>=<value> (for example --tol.jacobi=1e-7).")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one verification suite, or all of them
    Verify {
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct products from the tangent structure
    Reconstruct {
        /// First factor, comma separated coordinates
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        /// Second factor
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Bundle checks; with --atlas, the cocycle sweep on that atlas only
    BundleCheck {
        #[arg(long)]
        atlas: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Connection, curvature and gauge checks
    GaugeCheck {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long = "loop")]
    loop_name: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// RK4 steps for reconstruction
    #[arg(long)]
    steps: Option<usize>,
    /// Write the JSON report here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Flat key = value file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the JSON report instead of the summary
    #[arg(long)]
    json: bool,
}

/// Defaults, then LOOPBUNDLE_SEED, then the config file, then flags.
fn resolve(common: &Common, tols: &[(String, f64)]) -> Result<(RunConfig, ConfigFile), Error> {
    let mut cfg = RunConfig::default();
    if let Ok(s) = std::env::var("LOOPBUNDLE_SEED") {
        cfg.seed = s.trim().parse().map_err(|_| Error::InvalidConfig(format!("LOOPBUNDLE_SEED = `{s}` is not an integer")))?;
    }
    let file = match &common.config {
        Some(p) => ConfigFile::read(p)?,
        None => ConfigFile::default(),
    };
    file.apply(&mut cfg)?;
    if let Some(l) = &common.loop_name {
        cfg.loop_name = l.clone();
    }
    if let Some(n) = common.samples {
        cfg.samples = n;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(s) = common.steps {
        cfg.steps = s;
    }
    if let Some(r) = &common.report {
        cfg.report_path = Some(r.clone());
    }
    for (k, v) in tols {
        config::set_tolerance(&mut cfg, k, *v)?;
    }
    cfg.validate()?;
    Ok((cfg, file))
}

fn parse_point(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidConfig(format!("`{s}` is not a comma separated point"))))
        .collect()
}

fn print_report(report: &VerificationReport, json: bool) {
    if json {
        println!("{}", report.to_json_string());
        return;
    }
    for c in &report.cases {
        println!(
            "{} {:<40} {:>12.3e}  tol {:.1e}  n = {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.max_residual,
            c.tolerance,
            c.samples
        );
    }
    for d in &report.diagnostics {
        println!("     {:<40} {:>12.3e}  (diagnostic)", d.name, d.value);
    }
    let failed = report.failures().len();
    println!("{}: {} cases, {} failed, {:.2} s", report.suite, report.cases.len(), failed, report.wall_time);
}

fn run(cli: Cli, tols: &[(String, f64)]) -> Result<bool, Error> {
    let (report, json) = match cli.command {
        Command::Verify { suite, common } => {
            let (cfg, file) = resolve(&common, tols)?;
            let suite: Suite = suite.or(file.suite).unwrap_or_else(|| "all".into()).parse()?;
            (run_suite(&cfg, suite)?, common.json)
        }
        Command::Reconstruct { a, b, common } => {
            let (cfg, _) = resolve(&common, tols)?;
            match (a, b) {
                (Some(a), Some(b)) => {
                    let l = loop_by_name(&cfg.loop_name)?;
                    let (a, b) = (parse_point(&a)?, parse_point(&b)?);
                    let got = reconstruct_product(&l, &a, &b, cfg.steps)?;
                    let want = product(&l, &a, &b)?;
                    let err = got.iter().zip(want.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                    println!("reconstructed {:?}", got.0);
                    println!("product       {:?}", want.0);
                    println!("error         {err:.3e} ({} steps)", cfg.steps);
                    return Ok(err <= cfg.tol("reconstruct"));
                }
                (None, None) => (run_suite(&cfg, Suite::Reconstruct)?, common.json),
                _ => return Err(Error::InvalidConfig("--a and --b go together".into())),
            }
        }
        Command::BundleCheck { atlas, common } => {
            let (cfg, file) = resolve(&common, tols)?;
            match atlas.or(file.atlas) {
                Some(name) => (run_atlas_check(&cfg, &name)?, common.json),
                None => (run_suite(&cfg, Suite::Bundle)?, common.json),
            }
        }
        Command::GaugeCheck { common } => {
            let (cfg, _) = resolve(&common, tols)?;
            (run_suite(&cfg, Suite::Gauge)?, common.json)
        }
    };
    print_report(&report, json);
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (args, tols) = match split_tolerances(std::env::args().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli, &tols) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
