//! Command-line front end: allocation, K-vs-P comparison, average-case
//! ratio estimation, convergence sweeps, and truthfulness probes, all
//! reproducible from an explicit seed.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use mechsched::cli::{
    cmd_allocate, cmd_compare_instance, cmd_compare_random, cmd_ratio, cmd_sweep,
    cmd_truthfulness, parse_inline_costs, parse_kv_integers, OutputEnvelope,
    DEFAULT_DEVIATION_FACTORS,
};
use mechsched::{CostMatrix, DistributionSpec, Error, MechanismId, Result};

const DIST_GRAMMAR: &str = "Distribution spec grammar (repeat --dist once per task):
  pareto:tmin=<f>,alpha=<f>     Pareto on [tmin, inf), tail index alpha
  exp:tmin=<f>,lambda=<f>       shifted exponential on [tmin, inf), rate lambda
  uniform:tmin=<f>,tmax=<f>     uniform on [tmin, tmax]
The kind token is case-insensitive and parameters may appear in any order.

Exit codes: 0 success (warnings allowed), 2 input parse error,
3 domain validation error, 4 I/O error.

MECHSCHED_THREADS caps worker parallelism; results are identical for
any value.";

#[derive(Parser)]
#[command(name = "mechsched", version, about = "Truthful scheduling mechanisms without money: allocations, comparisons, and average-case ratio estimation", after_help = DIST_GRAMMAR)]
struct Cli {
    /// Suppress the JSON envelope on stdout (for scripting)
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute allocation probabilities and social costs for a cost matrix
    Allocate {
        /// Mechanism: k, p, or opt
        #[arg(long)]
        mechanism: String,
        /// CSV file: one row per task, one column per machine
        #[arg(long)]
        costs: Option<PathBuf>,
        /// Inline costs: ',' within a task, ';' between tasks
        #[arg(long)]
        inline: Option<String>,
        /// Skip a header line in the CSV file
        #[arg(long)]
        header: bool,
    },
    /// Compare mechanisms K and P on given or random instances
    Compare {
        #[arg(long)]
        costs: Option<PathBuf>,
        #[arg(long)]
        inline: Option<String>,
        /// Random mode: n=<int>,trials=<int>,seed=<int>
        #[arg(long)]
        random: Option<String>,
        #[arg(long)]
        header: bool,
    },
    /// Estimate the average-case approximation ratio by Monte Carlo
    Ratio {
        /// Mechanism: k or p
        #[arg(long)]
        mechanism: String,
        /// Per-task distribution spec (repeatable)
        #[arg(long = "dist", required = true)]
        dist: Vec<String>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sweep machine counts and write a convergence CSV for both mechanisms
    Sweep {
        #[arg(long = "dist", required = true)]
        dist: Vec<String>,
        /// Comma-separated machine counts, e.g. 10,100,1000
        #[arg(long = "n-list")]
        n_list: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Probe truthfulness with multiplicative deviations of one agent's report
    Truthfulness {
        /// Mechanism: k or p
        #[arg(long)]
        mechanism: String,
        /// Random mode: n=<int>,m=<int>,trials=<int>,seed=<int>
        #[arg(long)]
        random: String,
        /// Comma-separated deviation factors (default 0.5,0.8,0.9,1.1,1.25,2)
        #[arg(long)]
        factors: Option<String>,
    },
}

fn load_costs(
    costs: &Option<PathBuf>,
    inline: &Option<String>,
    header: bool,
) -> Result<(CostMatrix, String)> {
    match (costs, inline) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            Ok((
                CostMatrix::from_csv_str(&text, header)?,
                path.display().to_string(),
            ))
        }
        (None, Some(text)) => Ok((parse_inline_costs(text)?, text.clone())),
        _ => Err(Error::parse(
            "provide exactly one of --costs or --inline".to_string(),
        )),
    }
}

fn parse_specs(dist: &[String]) -> Result<Vec<DistributionSpec>> {
    dist.iter().map(|d| d.parse()).collect()
}

fn parse_factors(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(format!("bad deviation factor {f:?}")))
        })
        .collect()
}

fn run(command: &Command) -> Result<OutputEnvelope> {
    match command {
        Command::Allocate {
            mechanism,
            costs,
            inline,
            header,
        } => {
            let mech: MechanismId = mechanism.parse()?;
            let (matrix, source) = load_costs(costs, inline, *header)?;
            cmd_allocate(mech, &matrix, &source)
        }
        Command::Compare {
            costs,
            inline,
            random,
            header,
        } => {
            if let Some(spec) = random {
                if costs.is_some() || inline.is_some() {
                    return Err(Error::parse(
                        "--random cannot be combined with --costs/--inline".to_string(),
                    ));
                }
                let kv = parse_kv_integers(
                    spec,
                    &[("n", None), ("trials", Some(1000)), ("seed", Some(0))],
                )?;
                cmd_compare_random(kv[0] as usize, kv[1] as usize, kv[2])
            } else {
                let (matrix, source) = load_costs(costs, inline, *header)?;
                cmd_compare_instance(&matrix, &source)
            }
        }
        Command::Ratio {
            mechanism,
            dist,
            n,
            trials,
            seed,
        } => cmd_ratio(mechanism.parse()?, parse_specs(dist)?, *n, *trials, *seed),
        Command::Sweep {
            dist,
            n_list,
            trials,
            seed,
            out,
        } => {
            let n_values: Vec<usize> = n_list
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|_| Error::parse(format!("bad machine count {v:?} in --n-list")))
                })
                .collect::<Result<_>>()?;
            cmd_sweep(parse_specs(dist)?, &n_values, *trials, *seed, out)
        }
        Command::Truthfulness {
            mechanism,
            random,
            factors,
        } => {
            let kv = parse_kv_integers(
                random,
                &[
                    ("n", None),
                    ("m", Some(1)),
                    ("trials", Some(1000)),
                    ("seed", Some(0)),
                ],
            )?;
            let factors = match factors {
                Some(text) => parse_factors(text)?,
                None => DEFAULT_DEVIATION_FACTORS.to_vec(),
            };
            cmd_truthfulness(
                mechanism.parse()?,
                kv[0] as usize,
                kv[1] as usize,
                kv[2] as usize,
                kv[3],
                &factors,
            )
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) => 2,
        Error::Domain(_) => 3,
        Error::Io(_) => 4,
    }
}

fn main() {
    if let Ok(threads) = std::env::var("MECHSCHED_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .expect("rayon pool is only configured once");
            }
            _ => {
                eprintln!("error: MECHSCHED_THREADS must be a positive integer, got {threads:?}");
                std::process::exit(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(envelope) => {
            if !cli.quiet {
                println!("{}", envelope.to_json());
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}
