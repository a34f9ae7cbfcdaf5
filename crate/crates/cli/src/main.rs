use std::path::PathBuf;
use std::process::ExitCode;

use ccopt::benchmarks::{BenchmarkConfig, BenchmarkId, BenchmarkSpec, DEFAULT_DIMENSION, DEFAULT_GROUP_SIZE};
use ccopt::cc::{CcConfig, Variant, DEFAULT_MAX_FES};
use ccopt::harness::{self, ExperimentConfig, ResultTable};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ccopt", version, about = "Cooperative coevolution experiments on the F1-F13 suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full battery described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a single (function, variant, seed) cell and print its result.
    RunOne {
        #[arg(long)]
        function: BenchmarkId,
        #[arg(long)]
        variant: Variant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_FES)]
        budget: u64,
        #[arg(long, default_value_t = DEFAULT_DIMENSION)]
        dimension: usize,
        #[arg(long, default_value_t = DEFAULT_GROUP_SIZE)]
        group_size: usize,
        #[arg(long, default_value_t = 0)]
        benchmark_seed: u64,
        /// Algorithm parameters as JSON (a CcConfig); --budget still applies.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Write the full run result JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include the final solution vector in the result.
        #[arg(long)]
        keep_solution: bool,
    },
    /// Re-aggregate a battery directory from its finals.csv.
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        reference: Option<Variant>,
    },
    /// Print the structure of a benchmark instance.
    BenchInfo {
        #[arg(long)]
        function: BenchmarkId,
        #[arg(long, default_value_t = DEFAULT_DIMENSION)]
        dimension: usize,
        #[arg(long, default_value_t = DEFAULT_GROUP_SIZE)]
        group_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print JSON including every group's indices.
        #[arg(long)]
        json: bool,
    },
}

fn print_table(table: &ResultTable) {
    println!(
        "{:<8} {:<9} {:>13} {:>13} {:>9} {:>4} {:>6}",
        "function", "variant", "mean", "std", "d", "mark", "rank"
    );
    for r in &table.rows {
        let d = r.d.map_or("-".to_string(), |d| format!("{d:.3}"));
        let rank = r.rank.map_or("-".to_string(), |x| format!("{x:.3}"));
        println!(
            "{:<8} {:<9} {:>13.4e} {:>13.4e} {:>9} {:>4} {:>6}",
            r.function, r.variant, r.mean, r.std, d, r.mark, rank
        );
    }
}

fn run(cli: Cli) -> ccopt::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let outcome = harness::run_experiment(&cfg)?;
            print_table(&outcome.table);
            let failures = outcome.failures();
            if failures > 0 {
                eprintln!("{failures} of {} cells failed; see finals.csv", outcome.cells.len());
                return Ok(ExitCode::FAILURE);
            }
            println!("results written to {}", cfg.output_dir.display());
        }
        Command::RunOne {
            function,
            variant,
            seed,
            budget,
            dimension,
            group_size,
            benchmark_seed,
            params,
            out,
            keep_solution,
        } => {
            let mut algorithm = match params {
                Some(p) => serde_json::from_str::<CcConfig>(&std::fs::read_to_string(p)?)?,
                None => CcConfig::default(),
            };
            algorithm.max_fes = budget;
            algorithm.keep_solution |= keep_solution;
            let r = harness::run_one(function, variant, seed, dimension, group_size, benchmark_seed, &algorithm)?;
            println!("function  {function}");
            println!("variant   {variant}");
            println!("seed      {seed}");
            println!("f*        {:e}", r.f_star);
            println!("FEs       {} / {}", r.fes_used, budget);
            for (phase, n) in &r.charge_log {
                println!("  {:<16} {n}", serde_json::to_value(phase)?.as_str().unwrap_or("?"));
            }
            if let Some(path) = out {
                std::fs::write(&path, r.to_json()?)?;
                println!("result written to {}", path.display());
            }
        }
        Command::Report { dir, reference } => {
            let (cells, table) = harness::report(&dir, reference)?;
            print_table(&table);
            let failures = cells.iter().filter(|c| c.failed()).count();
            if failures > 0 {
                eprintln!("{failures} of {} cells failed", cells.len());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::BenchInfo {
            function,
            dimension,
            group_size,
            seed,
            json,
        } => {
            let spec = BenchmarkSpec::generate(&BenchmarkConfig::new(function, dimension, group_size, seed))?;
            let info = spec.info();
            if json {
                println!("{}", serde_json::to_string_pretty(&info)?);
            } else {
                println!("function        {}", info.id);
                println!("structure       {}", serde_json::to_value(info.structure)?.as_str().unwrap_or("?"));
                println!("dimension       {}", info.dimension);
                println!("box             [{}, {}]", info.bounds.lower, info.bounds.upper);
                println!("separable       {} variables, {}", info.separable_count, info.separable_base.tag());
                match info.group_base {
                    Some(base) => {
                        println!(
                            "groups          {} of size {}, {}{}",
                            info.groups.len(),
                            info.group_size,
                            if info.rotated { "rotated " } else { "" },
                            base.tag()
                        );
                        println!("group weight    {:e}", info.group_weight.unwrap_or(1.0));
                    }
                    None => println!("groups          none"),
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
