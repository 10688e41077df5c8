use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cbrank::independence::{first_empty_cell, is_independent};
use cbrank::lab::{self, Status};
use cbrank::rank_tree::{rank_naive, FamilyFile, NAIVE_MAX_MEMBERS, NAIVE_MAX_UNIVERSE};
use cbrank::{FamilySequence, Ordinal, Space};
use clap::{Parser, Subcommand};
use serde_json::json;

/// Cantor-Bendixson levels, independent families and independence-tree ranks.
#[derive(Parser)]
#[command(name = "cbrank", version)]
struct Cli {
    /// Print a single JSON document instead of plain lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Height and cardinal sequence of [0, λ].
    Cb {
        #[arg(long)]
        lambda: String,
    },
    /// Rank of the independence tree of a family file.
    Rank {
        #[arg(long)]
        input: PathBuf,
        /// Use the unmemoized reference search (small inputs only).
        #[arg(long)]
        naive: bool,
        /// Evaluate sibling subtrees in parallel.
        #[arg(long, conflicts_with = "naive")]
        parallel: bool,
        /// Write the explored tree in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Minimum rank over increasing subsequences of m families.
    Mrank {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        m: usize,
    },
    /// Whether all members of all families, in file order, form an independent sequence.
    Indep {
        #[arg(long)]
        input: PathBuf,
    },
    /// Special-node chain experiment in [0, ω^k].
    Lemma4 {
        #[arg(long)]
        k: u32,
        /// Sample points per level (the upper bound of the search with --sweep).
        #[arg(long)]
        per_level: Option<u64>,
        /// Report the smallest passing per-level value.
        #[arg(long)]
        sweep: bool,
    },
    /// Compare interval ranks with ranks of traces onto random witness sets.
    TraceCheck {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        per_level: u64,
    },
    /// Rank statistics of uniformly random families.
    RandomExp {
        #[arg(long)]
        universe: usize,
        #[arg(long)]
        gamma: usize,
        #[arg(long)]
        members: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Directory receiving one family file per trial.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Domain(String),
}

type Outcome = Result<(), Failure>;

fn input(e: impl ToString) -> Failure {
    Failure::Input(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            if !msg.is_empty() {
                eprintln!("cbrank: {msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("cbrank: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_families(path: &Path) -> Result<FamilySequence, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let file: FamilyFile =
        serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    FamilySequence::from_file(&file).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn emit(json: bool, value: serde_json::Value, text: String) {
    let body = if json {
        serde_json::to_string_pretty(&value).expect("serializable") + "\n"
    } else {
        text
    };
    let _ = std::io::stdout().write_all(body.as_bytes());
}

fn run(cli: Cli) -> Outcome {
    let json = cli.json;
    match cli.command {
        Command::Cb { lambda } => {
            let lambda: Ordinal = lambda.parse().map_err(input)?;
            let space = Space::new(lambda).map_err(input)?;
            let seq = space.cardinal_sequence();
            let mut text = format!("height: {}\n", space.height());
            for (level, card) in seq.iter().enumerate() {
                text.push_str(&format!("{level} {card}\n"));
            }
            emit(
                json,
                json!({ "lambda": space.lambda(), "height": space.height(), "levels": seq }),
                text,
            );
        }
        Command::Rank {
            input: path,
            naive,
            parallel,
            dot,
        } => {
            let fs = read_families(&path)?;
            let rank = if naive {
                if fs.universe_size() > NAIVE_MAX_UNIVERSE || fs.total_members() > NAIVE_MAX_MEMBERS
                {
                    return Err(input(format!(
                        "--naive accepts at most {NAIVE_MAX_UNIVERSE} universe points and {NAIVE_MAX_MEMBERS} members in total (got {} and {})",
                        fs.universe_size(),
                        fs.total_members()
                    )));
                }
                rank_naive(&fs)
            } else if parallel {
                fs.rank_parallel()
            } else {
                fs.rank()
            };
            if let Some(dot) = dot {
                fs::write(&dot, fs.dot()).map_err(|e| input(format!("{}: {e}", dot.display())))?;
            }
            emit(json, json!({ "rank": rank }), format!("rank: {rank}\n"));
        }
        Command::Mrank { input: path, m } => {
            let fs = read_families(&path)?;
            let mrank = fs.mrank(m).map_err(input)?;
            emit(
                json,
                json!({ "m": m, "mrank": mrank }),
                format!("mrank: {mrank}\n"),
            );
        }
        Command::Indep { input: path } => {
            let fs = read_families(&path)?;
            let members: Vec<_> = fs.families().iter().flatten().cloned().collect();
            let independent = is_independent(fs.universe(), &members);
            let empty = first_empty_cell(fs.universe(), &members).map(|p| p.to_string());
            let mut text = format!("independent: {independent}\n");
            if let Some(cell) = &empty {
                text.push_str(&format!("empty_cell: {cell}\n"));
            }
            emit(
                json,
                json!({ "independent": independent, "length": members.len(), "empty_cell": empty }),
                text,
            );
        }
        Command::Lemma4 {
            k,
            per_level,
            sweep,
        } => {
            if sweep {
                let max = per_level.unwrap_or_else(|| cbrank::space::default_per_level(k));
                let found = lab::sweep_per_level(k, max).map_err(input)?;
                let shown = found.map_or_else(|| "none".to_string(), |p| p.to_string());
                emit(
                    json,
                    json!({ "k": k, "searched_up_to": max, "smallest_passing_per_level": found }),
                    format!("k: {k}\nsearched_up_to: {max}\nsmallest_passing_per_level: {shown}\n"),
                );
                if found.is_none() {
                    return Err(Failure::Domain(String::new()));
                }
            } else {
                let per_level = per_level.unwrap_or_else(|| cbrank::space::default_per_level(k));
                let report = lab::run_bigrank_experiment(k, per_level).map_err(input)?;
                emit(
                    json,
                    serde_json::to_value(&report).expect("serializable"),
                    report.to_string(),
                );
                if report.status == Status::Fail {
                    return Err(Failure::Domain(String::new()));
                }
            }
        }
        Command::TraceCheck {
            k,
            trials,
            seed,
            per_level,
        } => {
            let report = lab::run_trace_experiment(k, per_level, trials, seed).map_err(input)?;
            emit(
                json,
                serde_json::to_value(&report).expect("serializable"),
                report.to_string(),
            );
            if report.status == Status::Fail {
                return Err(Failure::Domain(String::new()));
            }
        }
        Command::RandomExp {
            universe,
            gamma,
            members,
            trials,
            seed,
            dump,
        } => {
            let instances = lab::random_family_sequences(universe, gamma, members, trials, seed)
                .map_err(input)?;
            if let Some(dir) = dump {
                fs::create_dir_all(&dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
                for (i, fs) in instances.iter().enumerate() {
                    let path = dir.join(format!("trial_{i:04}.json"));
                    let body = serde_json::to_string_pretty(&fs.to_file()).expect("serializable");
                    fs::write(&path, body + "\n")
                        .map_err(|e| input(format!("{}: {e}", path.display())))?;
                }
            }
            let report = lab::summarize_random(&instances, universe, gamma, members, seed);
            emit(
                json,
                serde_json::to_value(&report).expect("serializable"),
                report.to_string(),
            );
        }
    }
    Ok(())
}
