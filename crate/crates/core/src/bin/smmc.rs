use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smmc::benchmarks;
use smmc::harness::{export_ccdf, run_experiment, run_once, sweep, write_trace, Method, RunConfig};
use smmc::rng::substream;
use smmc::{Error, Result};

#[derive(Parser)]
#[command(name = "smmc", version, about = "Rare-event probability estimation with subset multicanonical Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Reference failure probability for problems without a built-in oracle.
    #[arg(long)]
    ref_pf: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Run chains and repetitions on all cores.
    #[arg(long)]
    parallel: bool,
}

impl Overrides {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::from_file(&self.config)?;
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(p) = &self.problem {
            cfg.problem = p.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(l) = self.repetitions {
            cfg.repetitions = l;
        }
        if self.ref_pf.is_some() {
            cfg.ref_pf = self.ref_pf;
        }
        if self.output_dir.is_some() {
            cfg.output_dir = self.output_dir.clone();
        }
        cfg.parallel |= self.parallel;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// L independent repetitions; prints the report JSON.
    Run(Overrides),
    /// One experiment per evaluation budget.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated budgets, e.g. 2e4,1e5,3e5.
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<f64>,
    },
    /// Single run exporting the estimated output distribution as CSV.
    Ccdf {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-subset trace (smmc only) as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Prints the reference failure probability of a built-in problem.
    Oracle {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        threshold: Option<f64>,
    },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(o) => {
            let report = run_experiment(&o.load()?)?;
            println!("{}", report.to_json()?);
        }
        Command::Sweep { overrides, budgets } => {
            let reports = sweep(&overrides.load()?, &budgets)?;
            println!("{}", serde_json::to_string_pretty(&reports)?);
        }
        Command::Ccdf { overrides, out, trace } => {
            let cfg = overrides.load()?.resolved()?;
            let run = run_once(&cfg, &mut substream(cfg.seed, 0))?;
            let est = run
                .distribution
                .ok_or_else(|| Error::Config(format!("method `{}` does not estimate a distribution", cfg.method)))?;
            export_ccdf(&est, &out)?;
            if let (Some(path), Some(records)) = (trace, run.trace.as_deref()) {
                write_trace(records, &path)?;
            }
            println!("p_f = {:e} ({} evaluations), wrote {}", run.p_f, run.evals, out.display());
        }
        Command::Oracle { problem, threshold } => {
            let bench = benchmarks::builtin(&problem)?;
            let t = threshold.unwrap_or(bench.problem.threshold());
            match benchmarks::reference_pf(&problem, t)? {
                Some(p) => println!("{p:.6e}"),
                None => return Err(Error::Config(format!("no analytic reference for `{problem}`"))),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
