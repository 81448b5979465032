use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypo_harness::report::{error_record, write_report};
use hypo_harness::{run_experiment, sweep, Axis, Config, Experiment, ExperimentResult, HarnessError, Profile, RunOptions};

#[derive(Parser)]
#[command(name = "hypo", about = "Witten and hypoelliptic Laplacian experiments on the circle")]
struct Cli {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Full)]
    profile: Profile,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the assembled operators in Matrix Market format.
    #[arg(long, global = true)]
    dump_matrices: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    Barcode,
    Witten,
    Bismut,
    Identity,
    Grushin,
    Compare,
    Semigroup,
    Scaling,
    Regions,
    All,
    /// Repeats an experiment over values of one parameter.
    Sweep {
        #[arg(value_enum)]
        experiment: Experiment,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
}

fn run(cli: &Cli) -> Result<Vec<ExperimentResult>, HarnessError> {
    let path = cli.config.as_ref().ok_or_else(|| HarnessError::ConfigInvalid("--config is required".into()))?;
    let mut cfg = Config::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let opts = RunOptions { profile: cli.profile, out_dir: Some(cli.out_dir.clone()), dump_matrices: cli.dump_matrices };
    let exp = match &cli.cmd {
        Cmd::Barcode => Experiment::Barcode,
        Cmd::Witten => Experiment::Witten,
        Cmd::Bismut => Experiment::Bismut,
        Cmd::Identity => Experiment::Identity,
        Cmd::Grushin => Experiment::Grushin,
        Cmd::Compare => Experiment::Compare,
        Cmd::Semigroup => Experiment::Semigroup,
        Cmd::Scaling => Experiment::Scaling,
        Cmd::Regions => Experiment::Regions,
        Cmd::All => Experiment::All,
        Cmd::Sweep { experiment, axis, values } => return Ok(vec![sweep(&cfg, *experiment, *axis, values, &opts)?]),
    };
    run_experiment(&cfg, exp, &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    let outcome = run(&cli).and_then(|mut results| {
        std::fs::create_dir_all(&cli.out_dir)?;
        for r in &mut results {
            r.write_tables(&cli.out_dir)?;
        }
        write_report(&cli.out_dir, &results)?;
        Ok(results)
    });
    match outcome {
        Ok(results) => {
            for r in &results {
                let status = if r.passed() { "PASS" } else { "FAIL" };
                println!("{status} {} ({:.1}s)", r.experiment, r.runtime_s);
                for a in r.assertions.iter().filter(|a| !a.pass) {
                    println!("  failed {}: {:e} vs {:e}", a.name, a.value, a.threshold);
                }
            }
            if results.iter().all(|r| r.passed()) { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
        Err(e) => {
            let rec = error_record(&e);
            let text = serde_json::to_string_pretty(&rec).unwrap_or_default();
            if std::fs::create_dir_all(&cli.out_dir).is_ok() {
                let _ = std::fs::write(cli.out_dir.join("error.json"), &text);
            }
            println!("{text}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
