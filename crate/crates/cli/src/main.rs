mod bench;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use pgame::arena::{parse_pgsolver, write_pgsolver};
use pgame::generators::{random_game, try_worstcase_ppplus, RandomSpec};
use pgame::searcher::SearchStats;
use pgame::{solve_with, Game, SolveError, SolveOptions, Solver};
use sha2::{Digest, Sha256};

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;

#[derive(Parser)]
#[command(name = "pgame", version, about = "Priority promotion parity game solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a game in PGSolver format
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Solve a game and print the winning regions
    Solve {
        #[arg(long, default_value = "dp")]
        solver: Solver,
        /// Give up after this many seconds
        #[arg(long)]
        timeout: Option<f64>,
        /// Print a single key=value line
        #[arg(long)]
        machine: bool,
        file: PathBuf,
    },
    /// Run several solvers and compare their winning regions
    Verify {
        #[arg(long, value_delimiter = ',', required = true)]
        solvers: Vec<Solver>,
        #[arg(long)]
        timeout: Option<f64>,
        file: PathBuf,
    },
    /// Benchmark solvers on clusters of random games, writing CSV
    Bench(bench::BenchArgs),
}

#[derive(Subcommand)]
enum GenKind {
    /// Random game with fixed out-degree
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        outdeg: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// The PP+ worst-case family with h chains
    Worstcase {
        #[arg(long)]
        h: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Output {
    /// Output file; the game goes to stdout if omitted
    #[arg(short = 'o', long = "output")]
    path: Option<PathBuf>,
}

/// A command failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn solve(solver: Solver, e: SolveError) -> Self {
        let code = match &e {
            SolveError::Timeout => EXIT_TIMEOUT,
            e if e.is_guard() => EXIT_GUARD,
            SolveError::IllFormed(_) => EXIT_USAGE,
            _ => 1,
        };
        Self {
            code,
            message: format!("{solver}: {e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { kind } => gen(kind),
        Command::Solve {
            solver,
            timeout,
            machine,
            file,
        } => solve_cmd(solver, timeout, machine, &file),
        Command::Verify { solvers, timeout, file } => verify(&solvers, timeout, &file),
        Command::Bench(args) => bench::run(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("pgame: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn gen(kind: GenKind) -> Result<u8, Failure> {
    let (game, out, manifest) = match kind {
        GenKind::Random { n, k, outdeg, seed, out } => {
            let g = random_game(&RandomSpec { n, k, d: outdeg, seed }).map_err(|e| Failure::usage(e.to_string()))?;
            (g, out, format!("random n={n} k={k} d={outdeg} seed={seed}"))
        }
        GenKind::Worstcase { h, out } => {
            let g = try_worstcase_ppplus(h).map_err(|e| Failure::usage(e.to_string()))?;
            (g, out, format!("worstcase h={h}"))
        }
    };
    let text = write_pgsolver(&game);
    match &out.path {
        Some(path) => {
            fs::write(path, text + "\n").map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            println!("{manifest} positions={} moves={} file={}", game.len(), game.num_moves(), path.display());
        }
        None => {
            println!("{text}");
            eprintln!("{manifest} positions={} moves={}", game.len(), game.num_moves());
        }
    }
    Ok(0)
}

fn load(path: &Path) -> Result<Game, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_pgsolver(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn options(timeout: Option<f64>) -> Result<SolveOptions, Failure> {
    let timeout = match timeout {
        Some(t) if !(t.is_finite() && t >= 0.0) => return Err(Failure::usage(format!("invalid timeout {t}"))),
        t => t.map(Duration::from_secs_f64),
    };
    Ok(SolveOptions::default().with_timeout(timeout))
}

/// First eight bytes of SHA-256 over the little-endian indices of W0, in hex.
pub(crate) fn result_hash(w0: impl Iterator<Item = usize>) -> String {
    let mut hasher = Sha256::new();
    for v in w0 {
        hasher.update((v as u64).to_le_bytes());
    }
    hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn stats_fields(s: &SearchStats) -> String {
    format!(
        "queries={} promotions={} delayed={} flushes={} resets={}",
        s.queries, s.promotions, s.delayed, s.flushes, s.resets
    )
}

fn join(v: impl Iterator<Item = usize>, sep: &str) -> String {
    v.map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn solve_cmd(solver: Solver, timeout: Option<f64>, machine: bool, file: &Path) -> Result<u8, Failure> {
    let game = load(file)?;
    let opts = options(timeout)?;
    let s = solve_with(&game, solver, &opts).map_err(|e| Failure::solve(solver, e))?;
    let [w0, w1] = &s.winning;
    let hash = result_hash(w0.iter());
    let time_ns = s.stats.wall_time.as_nanos();
    let mut out = io::stdout().lock();
    let written = if machine {
        writeln!(
            out,
            "solver={solver} n={} W0={} W1={} searches={} {} time_ns={time_ns} result_hash={hash}",
            game.len(),
            join(w0.iter(), ","),
            join(w1.iter(), ","),
            s.searches.len(),
            stats_fields(&s.stats),
        )
    } else {
        let first = s.searches.first().copied().unwrap_or_default();
        writeln!(out, "W0: {}", join(w0.iter(), " "))
            .and_then(|_| writeln!(out, "W1: {}", join(w1.iter(), " ")))
            .and_then(|_| writeln!(out, "first search: {}", stats_fields(&first)))
            .and_then(|_| writeln!(out, "total ({} searches): {}", s.searches.len(), stats_fields(&s.stats)))
            .and_then(|_| writeln!(out, "solver={solver} time_ns={time_ns} result_hash={hash}"))
    };
    written.map_err(|e| Failure::usage(e.to_string()))?;
    Ok(0)
}

fn verify(solvers: &[Solver], timeout: Option<f64>, file: &Path) -> Result<u8, Failure> {
    if solvers.len() < 2 {
        return Err(Failure::usage("verify needs at least two solvers"));
    }
    let game = load(file)?;
    let mut reference: Option<(Solver, pgame::baseline::Partition)> = None;
    for &solver in solvers {
        let s = solve_with(&game, solver, &options(timeout)?).map_err(|e| Failure::solve(solver, e))?;
        println!("{solver}: result_hash={} W0={} W1={}", result_hash(s.winning[0].iter()), s.winning[0].len(), s.winning[1].len());
        match &reference {
            None => reference = Some((solver, s.winning)),
            Some((first, w)) if *w != s.winning => {
                let v = game
                    .positions()
                    .find(|&v| w[0].contains(v) != s.winning[0].contains(v))
                    .expect("partitions differ somewhere");
                let side = |w0: bool| if w0 { "W0" } else { "W1" };
                println!(
                    "mismatch: position {v} is in {} for {first} but in {} for {solver}",
                    side(w[0].contains(v)),
                    side(s.winning[0].contains(v))
                );
                return Ok(EXIT_MISMATCH);
            }
            Some(_) => {}
        }
    }
    println!("all {} solvers agree", solvers.len());
    Ok(0)
}
