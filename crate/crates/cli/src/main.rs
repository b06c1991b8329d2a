use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chainball::agent::{AgentConfig, Flags, TeamDecision};
use chainball::ga::{candidate_config, evolve, history_csv, GaConfig};
use chainball::harness::{extract_dataset, run_tournament, verify_weights, Tournament};
use chainball::planner::dump_tree;
use chainball::world::{run_match_with, MatchObserver, WorldState, DEFAULT_MATCH_CYCLES};
use chainball::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chainball", version, about = "Desk-scale 2D soccer simulator and tuning harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one match and print the result as JSON.
    Match {
        /// Config of the left team.
        left: PathBuf,
        /// Config of the right team.
        right: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MATCH_CYCLES)]
        cycles: u64,
        /// Write every cycle's world state as one JSON line.
        #[arg(long)]
        state_log: Option<PathBuf>,
        /// Write every planner search tree, one node per line.
        #[arg(long)]
        tree_log: Option<PathBuf>,
    },
    /// Run a tournament manifest and write the statistics table.
    Bench {
        manifest: PathBuf,
        /// Output table (tab separated).
        output: PathBuf,
    },
    /// Tune the penalty table with the genetic algorithm.
    Ga {
        config: PathBuf,
        /// Per-generation `gen,best,mean` history.
        #[arg(long, default_value = "ga_history.csv")]
        history: PathBuf,
        /// Agent config carrying the best table found.
        #[arg(long, default_value = "ga_best.json")]
        best: PathBuf,
    },
    /// Record pass decisions into train/test CSV files.
    Extract {
        config: PathBuf,
        #[arg(long)]
        matches: usize,
        #[arg(long)]
        out: PathBuf,
        /// Opponent configs played in rotation; defaults to the all-off baseline.
        #[arg(long = "opponent")]
        opponents: Vec<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MATCH_CYCLES)]
        cycles: u64,
    },
    /// Check a weights file and print the probe checksum.
    VerifyWeights { path: PathBuf },
}

/// The first write error is kept and reported after the match.
struct Logs {
    states: Option<BufWriter<File>>,
    trees: Option<BufWriter<File>>,
    failure: Option<Error>,
}

impl Logs {
    fn write(&mut self, label: &'static str, f: impl FnOnce(&mut Self) -> std::io::Result<()>) {
        if self.failure.is_none() {
            if let Err(e) = f(self) {
                self.failure = Some(Error::io(label, e));
            }
        }
    }
}

impl MatchObserver for Logs {
    fn on_cycle(&mut self, state: &WorldState, decisions: &[TeamDecision; 2]) {
        self.write(
            "state log",
            |l| match &mut l.states {
                Some(w) => {
                    serde_json::to_writer(&mut *w, state).map_err(std::io::Error::from)?;
                    w.write_all(b"\n")
                }
                None => Ok(()),
            },
        );
        self.write(
            "tree log",
            |l| match &mut l.trees {
                Some(w) => {
                    for (d, side) in decisions.iter().zip(["left", "right"]) {
                        if let Some(plan) = &d.plan {
                            writeln!(w, "# cycle {} {side}", state.cycle)?;
                            w.write_all(dump_tree(plan).as_bytes())?;
                        }
                    }
                    Ok(())
                }
                None => Ok(()),
            },
        );
    }
}

fn create(path: &Path) -> chainball::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("reports serialize")
}

fn run(command: Command) -> chainball::Result<()> {
    match command {
        Command::Match { left, right, seed, cycles, state_log, tree_log } => {
            let a = AgentConfig::load(&left)?;
            let b = AgentConfig::load(&right)?;
            let mut logs = Logs {
                states: state_log.as_deref().map(create).transpose()?,
                trees: tree_log.as_deref().map(create).transpose()?,
                failure: None,
            };
            let result = run_match_with(&a, &b, seed, cycles, &mut logs)?;
            if let Some(e) = logs.failure {
                return Err(e);
            }
            for (w, path) in [(logs.states, state_log), (logs.trees, tree_log)] {
                if let (Some(mut w), Some(path)) = (w, path) {
                    w.flush().map_err(|e| Error::io(path, e))?;
                }
            }
            println!("{}", json_line(&result));
        }
        Command::Bench { manifest, output } => {
            let t = Tournament::load(&manifest)?;
            let report = run_tournament(&t)?;
            let table = report.to_table();
            std::fs::write(&output, &table).map_err(|e| Error::io(&output, e))?;
            print!("{table}");
        }
        Command::Ga { config, history, best } => {
            let cfg = GaConfig::load(&config)?;
            let outcome = evolve(&cfg)?;
            std::fs::write(&history, history_csv(&outcome.history)).map_err(|e| Error::io(&history, e))?;
            candidate_config(&outcome.best, &cfg).save(&best)?;
            println!("{}", json_line(&outcome.best));
        }
        Command::Extract { config, matches, out, opponents, seed, cycles } => {
            let cfg = AgentConfig::load(&config)?;
            let opponents = if opponents.is_empty() {
                vec![AgentConfig::with_flags("baseline", Flags::ALL_OFF)]
            } else {
                opponents.iter().map(|p| AgentConfig::load(p)).collect::<chainball::Result<_>>()?
            };
            let report = extract_dataset(&cfg, &opponents, matches, cycles, seed, &out)?;
            println!("{}", json_line(&report));
        }
        Command::VerifyWeights { path } => {
            let report = verify_weights(&path)?;
            println!("{}", json_line(&report));
        }
    }
    Ok(())
}

fn fail(kind: &str, msg: &str) -> ExitCode {
    eprintln!("error kind={kind} msg={}", json_line(&msg));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail("usage", first);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
