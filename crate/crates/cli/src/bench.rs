//! Benchmark clusters of random games and report CSV.
//!
//! For every size `n` and every `i` in `1..=10`, `--per-pair` games with
//! `k = n*i/10` priorities are generated. Game seeds are drawn in that order
//! from a `ChaCha8Rng` seeded with `--seed`. Each game is solved by every
//! selected solver; one row is written per run, followed after each cluster
//! by one `AVG:<solver>` row per solver. Failed runs have `time_ns = -1`,
//! zero counters and `timeout`, `guard` or `error` in `result_hash`;
//! averages only cover completed runs.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::Args;
use pgame::generators::{random_game, RandomSpec};
use pgame::{solve_with, SolveError, SolveOptions, Solver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{result_hash, Failure};

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated game sizes
    #[arg(long, value_delimiter = ',', default_values_t = [1000usize, 2000])]
    sizes: Vec<usize>,
    /// Games per (n, k) pair
    #[arg(long, default_value_t = 10)]
    per_pair: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [Solver::PpPlus, Solver::Dp, Solver::Zielonka])]
    solvers: Vec<Solver>,
    /// Per-run timeout in seconds
    #[arg(long, default_value_t = 180.0)]
    timeout: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    outdeg: usize,
    /// Worker threads (0 uses all cores)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output file; CSV goes to stdout if omitted
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Serialize, Clone, Debug)]
struct BenchRow {
    game_id: String,
    n: usize,
    k: usize,
    d: usize,
    seed: u64,
    solver: String,
    time_ns: i64,
    queries: u64,
    promotions: u64,
    delayed: u64,
    flushes: u64,
    resets: u64,
    result_hash: String,
}

struct Cluster {
    n: usize,
    k: usize,
    games: Vec<(String, u64)>,
}

fn clusters(args: &BenchArgs) -> Vec<Cluster> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = Vec::new();
    for &n in &args.sizes {
        for i in 1..=10 {
            let k = (n * i / 10).max(1);
            let games = (0..args.per_pair).map(|j| (format!("n{n}-k{k}-{j}"), rng.gen())).collect();
            out.push(Cluster { n, k, games });
        }
    }
    out
}

fn run_game(args: &BenchArgs, n: usize, k: usize, id: &str, seed: u64) -> Vec<BenchRow> {
    let game = random_game(&RandomSpec {
        n,
        k,
        d: args.outdeg,
        seed,
    })
    .expect("bench specs are validated up front");
    args.solvers
        .iter()
        .map(|&solver| {
            let opts = SolveOptions::default().with_timeout(Some(Duration::from_secs_f64(args.timeout)));
            let mut row = BenchRow {
                game_id: id.to_string(),
                n,
                k,
                d: args.outdeg,
                seed,
                solver: solver.to_string(),
                time_ns: -1,
                queries: 0,
                promotions: 0,
                delayed: 0,
                flushes: 0,
                resets: 0,
                result_hash: String::new(),
            };
            match solve_with(&game, solver, &opts) {
                Ok(s) => {
                    row.time_ns = i64::try_from(s.stats.wall_time.as_nanos()).unwrap_or(i64::MAX);
                    row.queries = s.stats.queries;
                    row.promotions = s.stats.promotions;
                    row.delayed = s.stats.delayed;
                    row.flushes = s.stats.flushes;
                    row.resets = s.stats.resets;
                    row.result_hash = result_hash(s.winning[0].iter());
                }
                Err(SolveError::Timeout) => row.result_hash = "timeout".into(),
                Err(e) if e.is_guard() => row.result_hash = "guard".into(),
                Err(_) => row.result_hash = "error".into(),
            }
            row
        })
        .collect()
}

fn averages(args: &BenchArgs, cluster: &Cluster, rows: &[BenchRow]) -> Vec<BenchRow> {
    args.solvers
        .iter()
        .map(|solver| {
            let name = solver.to_string();
            let done: Vec<&BenchRow> = rows.iter().filter(|r| r.solver == name && r.time_ns >= 0).collect();
            let mean = |f: fn(&BenchRow) -> u64| {
                if done.is_empty() {
                    0
                } else {
                    (done.iter().map(|r| f(r) as f64).sum::<f64>() / done.len() as f64).round() as u64
                }
            };
            let time_ns = if done.is_empty() {
                -1
            } else {
                (done.iter().map(|r| r.time_ns as f64).sum::<f64>() / done.len() as f64).round() as i64
            };
            BenchRow {
                game_id: format!("n{}-k{}", cluster.n, cluster.k),
                n: cluster.n,
                k: cluster.k,
                d: args.outdeg,
                seed: args.seed,
                solver: format!("AVG:{name}"),
                time_ns,
                queries: mean(|r| r.queries),
                promotions: mean(|r| r.promotions),
                delayed: mean(|r| r.delayed),
                flushes: mean(|r| r.flushes),
                resets: mean(|r| r.resets),
                result_hash: String::new(),
            }
        })
        .collect()
}

pub fn run(args: &BenchArgs) -> Result<u8, Failure> {
    if args.solvers.is_empty() {
        return Err(Failure::usage("no solvers selected"));
    }
    if !(args.timeout.is_finite() && args.timeout > 0.0) {
        return Err(Failure::usage(format!("invalid timeout {}", args.timeout)));
    }
    for &n in &args.sizes {
        RandomSpec {
            n,
            k: 1,
            d: args.outdeg,
            seed: 0,
        }
        .validate()
        .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;

    let sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(File::create(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    let io_err = |e: csv::Error| Failure::usage(e.to_string());

    for cluster in clusters(args) {
        let rows: Vec<BenchRow> = pool.install(|| {
            cluster
                .games
                .par_iter()
                .flat_map_iter(|(id, seed)| run_game(args, cluster.n, cluster.k, id, *seed))
                .collect()
        });
        for row in rows.iter().chain(averages(args, &cluster, &rows).iter()) {
            writer.serialize(row).map_err(io_err)?;
        }
        writer.flush().map_err(|e| Failure::usage(e.to_string()))?;
    }
    Ok(0)
}
