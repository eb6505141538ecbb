//! `collatz-lab`: forward/backward Collatz processes and the claims harness
//! from the command line.

mod render;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use collatz_lab::{
    backward_chain, classify_generator, log_sum_partial, order_index_memo, order_index_with,
    relative_speed, scan, sophie_germain_pairs, trajectory, translated_chain, BackwardPolicy,
    Budget, Error, Limits, MemoTable, Nat, Runner, ScanRange,
};

use crate::render::Format;

#[derive(Debug, Parser)]
#[command(
    name = "collatz-lab",
    version,
    about = "Collatz processes, backward chains and claim checks"
)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Forward step cap for trajectories and order/index.
    #[arg(long, global = true, default_value_t = 100_000)]
    max_steps: u64,

    /// Backward chain depth.
    #[arg(long, global = true, default_value_t = 64)]
    depth: usize,

    /// Forward window length for claims that search a process.
    #[arg(long, global = true, default_value_t = 10_000)]
    window: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Memo table file; loaded if present and saved after scans.
    #[arg(long, global = true, env = "COLLATZ_LAB_CACHE")]
    cache: Option<PathBuf>,

    /// Exit with status 1 when any claim reports counterexamples.
    #[arg(long, global = true)]
    strict: bool,

    /// Do not truncate long sequences in human output.
    #[arg(long, global = true)]
    full: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Even,
    Greedy,
    Level,
}

impl From<PolicyArg> for BackwardPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Even => BackwardPolicy::EvenDoubling,
            PolicyArg::Greedy => BackwardPolicy::GreedyMin,
            PolicyArg::Level => BackwardPolicy::LevelMin,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Forward trajectory f(n), f^2(n), ... up to the first 1.
    Traj { n: Nat },
    /// Order tau and index Ind: least m >= 0 with f^m(n) = 2^Ind.
    Order { n: Nat },
    /// Relative speed |f^k(n) - f^j(n)| / |k - j|.
    Speed { n: Nat, j: u64, k: u64 },
    /// Backward chain under a preimage policy.
    Backward {
        n: Nat,
        #[arg(long, value_enum, default_value_t = PolicyArg::Greedy)]
        policy: PolicyArg,
    },
    /// Decide whether n generates an all-even backward chain.
    Generator {
        n: Nat,
        #[arg(long, value_enum, default_value_t = PolicyArg::Greedy)]
        policy: PolicyArg,
    },
    /// Backward chain shifted down by one, with primality of each element.
    Translate {
        n: Nat,
        #[arg(long, value_enum, default_value_t = PolicyArg::Even)]
        policy: PolicyArg,
    },
    /// Partial sums of ln f^s(n).
    Sumlog {
        n: Nat,
        #[arg(long, default_value_t = 64)]
        terms: u64,
    },
    /// List or run registered claims.
    Claims {
        #[command(subcommand)]
        action: ClaimsAction,
    },
    /// Order/index for every n in a range, using the memo table.
    Scan {
        #[arg(long, value_parser = parse_range)]
        range: ScanRange,
    },
}

#[derive(Debug, Subcommand)]
enum ClaimsAction {
    List,
    /// Run one claim id, or `all`.
    Run {
        id: String,
        #[arg(long, value_parser = parse_range)]
        range: ScanRange,
    },
}

fn parse_range(s: &str) -> Result<ScanRange, String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<u64>()
            .map_err(|e| format!("bad range bound {v:?}: {e}"))
    };
    ScanRange::new(parse(lo)?, parse(hi)?).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NodeBudgetExceeded { .. }
            | Error::FactorBudgetExceeded { .. }
            | Error::Io { .. }
            | Error::CorruptMemo(_)
            | Error::MemoVersion { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_cache(path: &Option<PathBuf>) -> Result<Option<Arc<MemoTable>>, Failure> {
    match path {
        Some(p) if p.exists() => Ok(Some(Arc::new(MemoTable::load(p)?))),
        Some(_) => Ok(Some(Arc::new(MemoTable::default()))),
        None => Ok(None),
    }
}

fn save_cache(path: &Option<PathBuf>, memo: &Option<Arc<MemoTable>>) -> Result<(), Failure> {
    if let (Some(p), Some(m)) = (path, memo) {
        m.save(p)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let g = cli.global;
    if g.threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let threads = g
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Resource(format!("cannot start worker pool: {e}")))?;
    let limits = Limits {
        max_steps: g.max_steps,
        ..Limits::default()
    };
    limits.validate()?;
    let out = render::Out {
        format: g.format,
        full: g.full,
    };

    match cli.command {
        Command::Traj { n } => out.trajectory(&trajectory(&n, g.max_steps)?),
        Command::Order { n } => {
            let memo = load_cache(&g.cache)?;
            let r = match &memo {
                Some(m) => order_index_memo(&n, &limits, m)?,
                None => order_index_with(&n, &limits)?,
            };
            save_cache(&g.cache, &memo)?;
            out.order(&n, &r);
        }
        Command::Speed { n, j, k } => out.speed(&n, j, k, &relative_speed(&n, j, k)?),
        Command::Backward { n, policy } => {
            out.backward(&backward_chain(&n, g.depth, policy.into())?)
        }
        Command::Generator { n, policy } => {
            let policy = policy.into();
            out.generator(
                &n,
                policy,
                g.depth,
                &classify_generator(&n, g.depth, policy)?,
            )
        }
        Command::Translate { n, policy } => {
            let policy: BackwardPolicy = policy.into();
            let chain = translated_chain(&n, g.depth, policy)?;
            let pairs = if policy == BackwardPolicy::EvenDoubling {
                sophie_germain_pairs(&n, g.depth)?
            } else {
                Vec::new()
            };
            out.translate(&n, policy, &chain, &pairs)
        }
        Command::Sumlog { n, terms } => out.sumlog(&n, &log_sum_partial(&n, terms)?),
        Command::Claims {
            action: ClaimsAction::List,
        } => out.claim_list(collatz_lab::list_claims()),
        Command::Claims {
            action: ClaimsAction::Run { id, range },
        } => {
            let budget = Budget {
                max_steps: g.max_steps,
                depth: g.depth,
                window: g.window,
            };
            let memo = load_cache(&g.cache)?;
            let mut runner = Runner::new(budget);
            runner.memo = memo.clone();
            let reports = pool.install(|| {
                if id == "all" {
                    runner.run_all(range)
                } else {
                    runner.run_claim(&id, range).map(|r| vec![r])
                }
            })?;
            save_cache(&g.cache, &memo)?;
            out.reports(&reports);
            let found = reports
                .iter()
                .any(|r| r.verdict == collatz_lab::Verdict::CounterexamplesFound);
            if g.strict && found {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Scan { range } => {
            let memo = load_cache(&g.cache)?.unwrap_or_default();
            let results = pool.install(|| scan(range.lo..=range.hi, &limits, &memo))?;
            save_cache(&g.cache, &Some(memo))?;
            out.scan(range, &results);
        }
    }
    Ok(ExitCode::SUCCESS)
}
