use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wienerlab::harness::commands::{self, ROTATION_FILE, VERIFY_FILE};
use wienerlab::harness::{run_verify, write_atomic, Overrides, RunConfig};
use wienerlab::rotations::AngleSpec;
use wienerlab::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "wienerlab", version, about = "Exact Malliavin calculus on a discretized Wiener space")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by all subcommands; flags override `--config`.
#[derive(Args)]
struct Common {
    /// JSON config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Grid dimension
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Largest number of components in randomized suites
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Refinement factors, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    refine: Option<Vec<usize>>,
    #[arg(long, global = true)]
    degree_cap: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long = "N", global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Output directory
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact-identity suites
    Verify,
    /// Clark integrand, refinement table and energy comparison of a functional
    Represent {
        /// Expression, or a file containing one
        #[arg(long)]
        functional: String,
    },
    /// Build an adapted isometry and run the rotation batteries
    Rotate {
        /// identity, sign, constant or arctan[:degree]
        #[arg(long, default_value = "arctan:2")]
        construction: String,
        /// Planted defect: scale:<col>:<factor> or copy:<from>:<to>
        #[arg(long)]
        plant: Option<String>,
    },
    /// Time the algebra kernels
    Bench {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Syntax { .. } | Error::Semantic { .. } => EXIT_USAGE,
        Error::DegreeCap { .. } | Error::DimensionCap { .. } | Error::IndexOutOfRange { .. } => EXIT_USAGE,
        _ => EXIT_INTERNAL,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let c = cli.common;
    let flags = Overrides {
        n: c.n,
        d: c.d,
        refine: c.refine,
        degree_cap: c.degree_cap,
        seed: c.seed,
        samples: c.samples,
        tolerance: c.tolerance,
        output: c.output,
    };
    let config = RunConfig::resolve(c.config.as_deref(), flags)?;
    match cli.command {
        Command::Verify => {
            let report = run_verify(&config);
            write_atomic(&config.output.join(VERIFY_FILE), report.to_json().as_bytes())?;
            for s in &report.suites {
                println!("{:<30} {:?} cases={} max_residual={:e}", s.name, s.status, s.cases, s.max_residual);
            }
            println!("verify: {}", if report.passed { "PASS" } else { "FAIL" });
            Ok(if report.passed { 0 } else { EXIT_FAIL })
        }
        Command::Represent { functional } => {
            let source = commands::functional_source(&functional)?;
            let out = commands::represent(&config, &source)?;
            commands::write_represent(&config.output, &out)?;
            println!("residual_l2 = {:e}", out.residual_l2);
            print!("{}", out.refinement_csv);
            Ok(0)
        }
        Command::Rotate { construction, plant } => {
            let spec: AngleSpec = construction.parse()?;
            let plant = plant.as_deref().map(commands::parse_defect).transpose()?;
            let report = commands::rotate(&config, spec, plant)?;
            let mut json = report.to_json();
            json.push('\n');
            write_atomic(&config.output.join(ROTATION_FILE), json.as_bytes())?;
            for t in report.tests.iter().filter(|t| !t.pass) {
                println!("FAIL {} statistic={:e} threshold={:e}", t.name, t.statistic, t.threshold);
            }
            println!("rotate: {} ({} tests)", if report.passed() { "PASS" } else { "FAIL" }, report.tests.len());
            Ok(if report.passed() { 0 } else { EXIT_FAIL })
        }
        Command::Bench { suite } => {
            let rows = commands::bench(&suite, config.seed)?;
            println!("{}", serde_json::to_string_pretty(&rows).expect("json"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
