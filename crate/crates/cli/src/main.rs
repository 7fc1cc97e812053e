//! `rqaoa`: batch experiments for QAOA and recursive QAOA on MAX-CUT.

mod input;
mod output;
mod verify;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rqaoa_core::qaoa::optimize_schedule;
use rqaoa_core::{
    run_rqaoa, CompleteParams, CorrelationSource, IsingModel, OptimizerConfig, RqaoaConfig,
    TieBreak,
};

use input::GraphSource;
use output::{num, write_csv, ExperimentRow};
use verify::Check;

/// Vertex count up to which optimums are brute-forced for ratios.
const OPTIMUM_CAP: usize = 22;

#[derive(Debug, Parser)]
#[command(
    name = "rqaoa",
    version,
    about = "QAOA and recursive QAOA experiments on MAX-CUT"
)]
struct Cli {
    /// Worker threads for the simulator and brute force (default: all cores).
    #[arg(long, global = true, value_name = "K", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Print per-round RQAOA traces.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exhaustive MAX-CUT optimum and a maximizing assignment.
    Brute {
        #[command(flatten)]
        source: GraphSource,
    },
    /// Optimize a level-p QAOA schedule and report its expected cut.
    Qaoa {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 1, value_name = "P")]
        level: usize,
        /// Level-1 start grid resolution (R × R over γ, β).
        #[arg(long, default_value_t = 64, value_name = "R")]
        grid: usize,
        #[command(flatten)]
        common: RunOutput,
    },
    /// Recursive QAOA down to a brute-forced residual.
    Rqaoa {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 1, value_name = "P")]
        level: usize,
        /// Brute-force once at most this many vertices carry couplings.
        #[arg(long, default_value_t = 8, value_name = "N")]
        nc: usize,
        #[arg(long, value_enum, default_value_t = Correlations::Auto)]
        correlations: Correlations,
        #[arg(long, value_enum, default_value_t = TieMode::Lexicographic)]
        tie_break: TieMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: RunOutput,
    },
    /// Check the K_2n results over a range of n.
    Verify {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        /// Seed for the random γ draws of beta-stationarity.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// QAOA_1 and RQAOA_1 ratios on K_2n next to 1 - 1/(8n²).
    Sweep {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
struct RunOutput {
    /// Write the result row as CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Add a wall_time_s column (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Correlations {
    Statevector,
    Analytic,
    Auto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieMode {
    Lexicographic,
    Random,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k as usize)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

/// `Ok(false)` means a check failed.
fn run(cli: &Cli) -> Result<bool> {
    let mut out = io::stdout().lock();
    match &cli.command {
        Command::Brute { source } => {
            let inst = source.load()?;
            let (x, value) = inst.model.brute_force_max()?;
            writeln!(out, "vertices  {}", inst.model.vertex_count())?;
            writeln!(out, "optimum   {}", num(value))?;
            writeln!(out, "cut       {x}")?;
            Ok(true)
        }
        Command::Qaoa {
            source,
            level,
            grid,
            common,
        } => {
            if *level == 0 {
                bail!("--level must be at least 1");
            }
            if *grid < 2 {
                bail!("--grid must be at least 2");
            }
            let inst = source.load()?;
            let config = OptimizerConfig {
                gamma_steps: *grid,
                beta_steps: *grid,
                ..OptimizerConfig::default()
            };
            let start = Instant::now();
            let report = optimize_schedule(&inst.model, *level, &config)?;
            let elapsed = start.elapsed().as_secs_f64();
            let optimum = inst.optimum(OPTIMUM_CAP);
            let row = ExperimentRow {
                n: inst.half,
                vertices: inst.model.vertex_count(),
                algorithm: "qaoa",
                level: *level,
                value: report.best_value,
                optimum,
                ratio: optimum.map(|o| report.best_value / o),
                bound: inst.bound(),
                wall_time: common.timing.then_some(elapsed),
            };
            row.print(&mut out)?;
            let s = &report.best_schedule;
            let list = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",");
            writeln!(out, "{:<26}{}", "gammas", list(s.gammas()))?;
            writeln!(out, "{:<26}{}", "betas", list(s.betas()))?;
            if let Some(path) = &common.out {
                row.write_csv(path)?;
            }
            Ok(true)
        }
        Command::Rqaoa {
            source,
            level,
            nc,
            correlations,
            tie_break,
            seed,
            common,
        } => {
            let inst = source.load()?;
            let config = RqaoaConfig {
                level: *level,
                threshold: *nc,
                correlation_source: match correlations {
                    Correlations::Statevector => CorrelationSource::Statevector,
                    Correlations::Analytic => CorrelationSource::Analytic,
                    Correlations::Auto => CorrelationSource::Auto,
                },
                tie_break: match tie_break {
                    TieMode::Lexicographic => TieBreak::Lexicographic,
                    TieMode::Random => TieBreak::SeededRandom,
                },
                seed: *seed,
                optimum_cap: OPTIMUM_CAP,
                ..RqaoaConfig::default()
            };
            let start = Instant::now();
            let mut sol = run_rqaoa(&inst.model, &config)?;
            let elapsed = start.elapsed().as_secs_f64();
            if let Some(o) = inst.known_optimum {
                sol = sol.with_optimum(o);
            }
            if cli.verbose > 0 {
                for t in &sol.traces {
                    writeln!(
                        out,
                        "round {:>3}  x{} = {} x{}  M = {}  active {} -> {}  via {:?}",
                        t.round,
                        t.eliminated,
                        t.sign,
                        t.surviving,
                        num(t.correlation),
                        t.active_before,
                        t.active_after,
                        t.provider,
                    )?;
                }
            }
            let row = ExperimentRow {
                n: inst.half,
                vertices: inst.model.vertex_count(),
                algorithm: "rqaoa",
                level: *level,
                value: sol.value,
                optimum: sol.optimum,
                ratio: sol.ratio,
                bound: inst.bound(),
                wall_time: common.timing.then_some(elapsed),
            };
            row.print(&mut out)?;
            writeln!(out, "{:<26}{}", "rounds", sol.traces.len())?;
            writeln!(out, "{:<26}{}", "cut", sol.assignment)?;
            if let Some(path) = &common.out {
                row.write_csv(path)?;
            }
            Ok(true)
        }
        Command::Verify {
            check,
            n_min,
            n_max,
            seed,
            out: path,
        } => {
            let (lo, hi) = check.default_range();
            let rows = verify::run(*check, n_min.unwrap_or(lo), n_max.unwrap_or(hi), *seed)?;
            let header = ["check", "n", "metric", "value", "limit", "status"];
            let table: Vec<[String; 6]> = rows
                .iter()
                .map(|r| {
                    [
                        r.check.to_string(),
                        r.n.to_string(),
                        r.metric.to_string(),
                        num(r.value),
                        num(r.limit),
                        if r.passed { "PASS" } else { "FAIL" }.to_string(),
                    ]
                })
                .collect();
            for row in &table {
                writeln!(
                    out,
                    "{:<18} n={:<4} {:<26} {:>24} {:>24}  {}",
                    row[0], row[1], row[2], row[3], row[4], row[5]
                )?;
            }
            let failed = rows.iter().filter(|r| !r.passed).count();
            writeln!(out, "{} of {} rows passed", rows.len() - failed, rows.len())?;
            if let Some(path) = path {
                write_csv(path, &header, &table)?;
            }
            Ok(failed == 0)
        }
        Command::Sweep {
            n_min,
            n_max,
            out: path,
        } => {
            let rows = sweep(*n_min, *n_max)?;
            let header = [
                "n",
                "vertices",
                "qaoa1_ratio",
                "rqaoa1_ratio",
                "bound_1_minus_1_over_8n2",
            ];
            let table: Vec<[String; 5]> = rows
                .iter()
                .map(|r| {
                    [
                        r.n.to_string(),
                        (2 * r.n).to_string(),
                        num(r.qaoa1),
                        num(r.rqaoa1),
                        num(r.bound),
                    ]
                })
                .collect();
            match path {
                Some(path) => write_csv(path, &header, &table)?,
                None => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(header)?;
                    for row in &table {
                        w.write_record(row)?;
                    }
                    w.flush()?;
                }
            }
            Ok(rows.iter().all(|r| r.holds()))
        }
    }
}

struct SweepRow {
    n: usize,
    qaoa1: f64,
    rqaoa1: f64,
    bound: f64,
}

impl SweepRow {
    fn holds(&self) -> bool {
        (self.rqaoa1 - 1.0).abs() <= 1e-9 && (self.n < 4 || self.qaoa1 < self.bound)
    }
}

fn sweep(n_min: usize, n_max: usize) -> Result<Vec<SweepRow>> {
    if n_min < 2 || n_min > n_max {
        bail!("need 2 <= n-min <= n-max, got {n_min}..{n_max}");
    }
    let config = RqaoaConfig {
        threshold: 4,
        optimum_cap: 0,
        ..RqaoaConfig::default()
    };
    (n_min..=n_max)
        .map(|n| {
            let p = CompleteParams::new(n)?;
            let sol = run_rqaoa(&IsingModel::complete(2 * n)?, &config)?.with_optimum(p.max_cut());
            Ok(SweepRow {
                n,
                qaoa1: p.qaoa1_ratio(),
                rqaoa1: sol.ratio.expect("optimum attached"),
                bound: p.ratio_bound(),
            })
        })
        .collect()
}
