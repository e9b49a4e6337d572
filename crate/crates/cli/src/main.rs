use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use hbd_core::benders::hbd_solve;
use hbd_core::harness::{
    compute_metrics, oracle_solve, run_benchmark, write_csv, BenchOptions, OracleResult, Variant,
};
use hbd_core::model::{
    generate_instance, load_instance, save_instance, Backend, BendersConfig, Conversion,
    GeneratorConfig, ManualPenalties, MilpInstance, MulticutConfig, PenaltyMode,
};

#[derive(Parser)]
#[command(
    name = "hbd",
    version,
    about = "Hybrid Benders decomposition with a QUBO master problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random instances as instance_<seed>.json
    Generate {
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Largest number of binary variables.
        #[arg(long, default_value_t = 5)]
        max_n: usize,
        /// Keep only instances on which some feasibility cut can arise.
        #[arg(long)]
        require_feasibility_cut: bool,
    },
    /// Solve one instance
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = ConversionArg::Slack)]
        conversion: ConversionArg,
        #[arg(long, value_enum, default_value_t = PenaltyArg::Constructive)]
        penalties: PenaltyArg,
        /// Manual penalty values obj_x,obj_phi,obj_cut,cons_mp.
        #[arg(long, value_parser = parse_manual, default_value = "1,1,1,1")]
        manual: ManualPenalties,
        /// k,M: keep k candidates, add at most M cuts per iteration.
        #[arg(long, value_parser = parse_multicut)]
        multicut: Option<MulticutConfig>,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        max_iterations: usize,
        #[arg(long, default_value_t = 2000)]
        sweeps: usize,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Brute-force optimum of one instance
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Run variants over a directory of instances
    Bench {
        #[arg(long)]
        instances: PathBuf,
        /// Comma-separated labels, e.g. HBD_S_C,HBD_E_C,SA.
        #[arg(long, default_value = "HBD_S_C,HBD_E_C")]
        variants: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Record wall-clock times (output is then not reproducible).
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConversionArg {
    Slack,
    Exp,
}

#[derive(Clone, Copy, ValueEnum)]
enum PenaltyArg {
    Constructive,
    Manual,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Sa,
}

fn parse_numbers(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(format!("expected {count} comma-separated values"));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        })
        .collect()
}

fn parse_manual(s: &str) -> Result<ManualPenalties, String> {
    let v = parse_numbers(s, 4)?;
    Ok(ManualPenalties {
        obj_x: v[0],
        obj_phi: v[1],
        obj_cut: v[2],
        cons_mp: v[3],
    })
}

fn parse_multicut(s: &str) -> Result<MulticutConfig, String> {
    let v = parse_numbers(s, 2)?;
    if v.iter().any(|x| x.fract() != 0.0 || *x < 0.0) {
        return Err("k and M must be non-negative integers".into());
    }
    Ok(MulticutConfig {
        k: v[0] as usize,
        m: v[1] as usize,
    })
}

/// Errors the user caused by how they invoked the tool (exit code 1).
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn read_instance(path: &Path) -> anyhow::Result<MilpInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `instance_<seed>.json` files in `dir`, ordered by seed; other JSON files
/// follow in name order with seeds counting on from the largest seen.
fn read_instance_dir(dir: &Path) -> anyhow::Result<Vec<(u64, MilpInstance)>> {
    let mut named = Vec::new();
    let mut other = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default();
        match stem
            .strip_prefix("instance_")
            .and_then(|s| s.parse::<u64>().ok())
        {
            Some(seed) => named.push((seed, path)),
            None => other.push(path),
        }
    }
    named.sort();
    other.sort();
    let mut next = named.last().map_or(0, |(s, _)| s + 1);
    for path in other {
        named.push((next, path));
        next += 1;
    }
    named
        .into_iter()
        .map(|(seed, path)| Ok((seed, read_instance(&path)?)))
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate {
            count,
            seed,
            out,
            max_n,
            require_feasibility_cut,
        } => {
            let mut cfg = GeneratorConfig::default().with_max_n(max_n);
            cfg.n.0 = cfg.n.0.min(max_n.max(1));
            cfg.require_feasibility_cut = require_feasibility_cut;
            fs::create_dir_all(&out)?;
            for s in seed..seed + count {
                let inst = generate_instance(s, &cfg)?;
                let path = out.join(format!("instance_{s}.json"));
                fs::write(&path, save_instance(&inst))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            println!("wrote {count} instances to {}", out.display());
        }
        Command::Solve {
            instance,
            conversion,
            penalties,
            manual,
            multicut,
            backend,
            epsilon,
            seed,
            max_iterations,
            sweeps,
            report,
        } => {
            let inst = read_instance(&instance)?;
            let config = BendersConfig {
                conversion: match conversion {
                    ConversionArg::Slack => Conversion::Slack,
                    ConversionArg::Exp => Conversion::Exponential,
                },
                penalties: match penalties {
                    PenaltyArg::Constructive => PenaltyMode::Constructive,
                    PenaltyArg::Manual => PenaltyMode::Manual(manual),
                },
                multicut,
                epsilon,
                max_iterations,
                backend: match backend {
                    BackendArg::Exact => Backend::Exact,
                    BackendArg::Sa => Backend::Annealing,
                },
                rng_seed: seed,
                sa_sweeps: sweeps,
                ..BendersConfig::default()
            };
            config.validate().map_err(|e| UsageError(e.to_string()))?;
            let r = hbd_solve(&inst, &config)?;
            println!("status: {}", r.status.as_str());
            println!("termination: {:?}", r.termination);
            match r.objective {
                Some(obj) => {
                    println!("objective: {obj}");
                    println!("x: {:?}", r.x_best);
                    println!("y: {:?}", r.y_best);
                }
                None => println!("objective: none"),
            }
            println!("iterations: {}", r.iterations);
            println!("qubits per iteration: {:?}", r.qubit_counts);
            if let Some(path) = report {
                fs::write(&path, r.to_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Oracle { instance } => {
            let inst = read_instance(&instance)?;
            match oracle_solve(&inst)? {
                r @ OracleResult::Optimal { .. } => {
                    println!("{}", serde_json::to_string_pretty(&r)?)
                }
                OracleResult::Infeasible => println!("\"Infeasible\""),
            }
        }
        Command::Bench {
            instances,
            variants,
            out,
            seed,
            timings,
        } => {
            let base = BendersConfig {
                rng_seed: seed,
                ..BendersConfig::default()
            };
            let variants =
                Variant::parse_list(&variants, &base).map_err(|e| UsageError(e.to_string()))?;
            if variants.is_empty() {
                bail!(UsageError("no variants given".into()));
            }
            let insts = read_instance_dir(&instances)?;
            let records = run_benchmark(&insts, &variants, BenchOptions { timings })?;
            fs::create_dir_all(&out)?;
            let mut csv = Vec::new();
            write_csv(&records, &mut csv)?;
            fs::write(out.join("results.csv"), csv)?;
            let summary = compute_metrics(&records);
            fs::write(
                out.join("summary.json"),
                serde_json::to_string_pretty(&summary)?,
            )?;
            fs::write(
                out.join("records.json"),
                serde_json::to_string_pretty(&records)?,
            )?;
            for (label, m) in &summary {
                println!(
                    "{label}: feasibility {:.1}% optimality {:.1}% median iterations {}",
                    100.0 * m.feasibility_rate,
                    100.0 * m.optimality_rate,
                    m.iterations.map_or(0.0, |q| q.median)
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
