//! Tournaments between configs, dataset extraction and the statistics table.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, TeamDecision};
use crate::error::{Error, Result};
use crate::passnet::{make_sample, DatasetWriter, Sample};
use crate::world::{run_match, run_match_with, win_rate, MatchObserver, MatchResult, Side, WinRate, WorldState};

pub use crate::passnet::{verify_weights, WeightsReport};

/// Mixes `parts` into one seed (splitmix64 finalizer over a running state).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243F_6A88_85A3_08D3;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

/// Seed and side of config A for match `m` of pair `pair`. Matches come in
/// couples sharing a seed with A switching sides.
pub fn match_schedule(base_seed: u64, pair: usize, m: usize) -> (u64, Side) {
    let seed = derive_seed(&[base_seed, pair as u64, (m / 2) as u64]);
    (seed, if m.is_multiple_of(2) { Side::Left } else { Side::Right })
}

fn default_cycles() -> u64 {
    crate::world::DEFAULT_MATCH_CYCLES
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub a: PathBuf,
    pub b: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tournament {
    pub pairs: Vec<Pair>,
    pub matches_per_pair: usize,
    pub base_seed: u64,
    #[serde(default = "default_cycles")]
    pub max_cycles: u64,
}

impl Tournament {
    /// Reads a JSON manifest; config paths are relative to its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut t: Tournament =
            serde_json::from_str(&text).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for pair in &mut t.pairs {
            for p in [&mut pair.a, &mut pair.b] {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.matches_per_pair == 0 {
            return Err(Error::InvalidConfig("matches_per_pair must be at least 1".into()));
        }
        if self.max_cycles == 0 {
            return Err(Error::InvalidConfig("max_cycles must be positive".into()));
        }
        Ok(())
    }
}

/// Results of one pair, all from config A's point of view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub games: usize,
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
    pub win_rate: WinRate,
    pub goals_scored: f64,
    pub goals_conceded: f64,
    pub results: Vec<MatchResult>,
    /// Side config A played in each match.
    pub a_sides: Vec<Side>,
}

impl PairStats {
    pub fn from_results(results: Vec<MatchResult>, a_sides: Vec<Side>) -> Result<Self> {
        // Re-express every result as if A played left.
        let as_left: Vec<MatchResult> = results
            .iter()
            .zip(&a_sides)
            .map(|(r, &side)| MatchResult { goals_left: r.goals(side), goals_right: r.goals(side.opposite()), ..*r })
            .collect();
        let games = as_left.len();
        let wins = as_left.iter().filter(|r| r.goals_left > r.goals_right).count();
        let draws = as_left.iter().filter(|r| r.goals_left == r.goals_right).count();
        let n = games.max(1) as f64;
        Ok(Self {
            games,
            wins,
            draws,
            losses: games - wins - draws,
            win_rate: win_rate(&as_left, Side::Left)?,
            goals_scored: as_left.iter().map(|r| f64::from(r.goals_left)).sum::<f64>() / n,
            goals_conceded: as_left.iter().map(|r| f64::from(r.goals_right)).sum::<f64>() / n,
            results,
            a_sides,
        })
    }

    pub fn goals_cell(&self) -> String {
        format_goals_cell(self.goals_scored, self.goals_conceded)
    }
}

/// `scored(conceded)` with one decimal each, e.g. `4.4(0.2)`.
pub fn format_goals_cell(scored: f64, conceded: f64) -> String {
    format!("{scored:.1}({conceded:.1})")
}

pub fn parse_goals_cell(cell: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidConfig(format!("bad goals cell {cell:?}"));
    let (scored, rest) = cell.trim().split_once('(').ok_or_else(bad)?;
    let conceded = rest.strip_suffix(')').ok_or_else(bad)?;
    Ok((scored.parse().map_err(|_| bad())?, conceded.parse().map_err(|_| bad())?))
}

/// Plays `matches` games between `a` and `b` in parallel. Deterministic for a
/// fixed base seed regardless of scheduling.
pub fn play_pair(
    a: &AgentConfig,
    b: &AgentConfig,
    pair: usize,
    matches: usize,
    base_seed: u64,
    max_cycles: u64,
) -> Result<PairStats> {
    if matches == 0 {
        return Err(Error::Precondition("a pair needs at least one match".into()));
    }
    let played: Vec<(MatchResult, Side)> = (0..matches)
        .into_par_iter()
        .map(|m| {
            let (seed, side) = match_schedule(base_seed, pair, m);
            let result = match side {
                Side::Left => run_match(a, b, seed, max_cycles),
                Side::Right => run_match(b, a, seed, max_cycles),
            };
            result.map(|r| (r, side))
        })
        .collect::<Result<_>>()?;
    let (results, sides) = played.into_iter().unzip();
    PairStats::from_results(results, sides)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub pair: usize,
    pub a: String,
    pub b: String,
    pub stats: Option<PairStats>,
    /// Load or match failure for this pair; other pairs still run.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentReport {
    pub rows: Vec<PairRow>,
}

pub fn run_tournament(t: &Tournament) -> Result<TournamentReport> {
    t.validate()?;
    let rows = t
        .pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let outcome = AgentConfig::load(&pair.a)
                .and_then(|a| AgentConfig::load(&pair.b).map(|b| (a, b)))
                .and_then(|(a, b)| {
                    let stats = play_pair(&a, &b, i, t.matches_per_pair, t.base_seed, t.max_cycles)?;
                    Ok((a.name, b.name, stats))
                });
            match outcome {
                Ok((a, b, stats)) => PairRow { pair: i, a, b, stats: Some(stats), error: None },
                Err(e) => PairRow {
                    pair: i,
                    a: pair.a.display().to_string(),
                    b: pair.b.display().to_string(),
                    stats: None,
                    error: Some(format!("{}: {e}", e.kind())),
                },
            }
        })
        .collect();
    Ok(TournamentReport { rows })
}

impl TournamentReport {
    /// Tab-separated table, one row per pair.
    pub fn to_table(&self) -> String {
        let mut out = String::from("pair\ta\tb\tgames\twins\tdraws\tlosses\twin_rate\tgoals\n");
        for r in &self.rows {
            match (&r.stats, &r.error) {
                (Some(s), _) => out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.pair,
                    r.a,
                    r.b,
                    s.games,
                    s.wins,
                    s.draws,
                    s.losses,
                    s.win_rate,
                    s.goals_cell()
                )),
                (None, e) => out.push_str(&format!(
                    "{}\t{}\t{}\terror\t{}\n",
                    r.pair,
                    r.a,
                    r.b,
                    e.as_deref().unwrap_or("unknown")
                )),
            }
        }
        out
    }
}

/// Records a sample each time `side`'s holder decides to pass.
pub struct PassRecorder {
    pub side: Side,
    pub params: crate::Params,
    pub samples: Vec<Sample>,
}

impl MatchObserver for PassRecorder {
    fn on_cycle(&mut self, state: &WorldState, decisions: &[TeamDecision; 2]) {
        let Some(action) = decisions[self.side.index()].holder_action else { return };
        if let (true, Some(receiver)) = (action.kind.is_pass(), action.receiver) {
            self.samples.push(make_sample(state, self.side, receiver, &self.params));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_path: PathBuf,
    pub test_path: PathBuf,
}

/// Rows going to the test file: the 15% of indices with the smallest hash.
pub fn test_split(rows: usize, base_seed: u64) -> Vec<bool> {
    let n_test = (rows as f64 * 0.15).round() as usize;
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by_key(|&i| (derive_seed(&[base_seed, 0x5A17, i as u64]), i));
    let mut is_test = vec![false; rows];
    for &i in &order[..n_test] {
        is_test[i] = true;
    }
    is_test
}

/// Plays `matches` games of `config` against the opponents in rotation,
/// records its pass decisions and writes `train.csv` / `test.csv` into
/// `out_dir` with an 85/15 split.
pub fn extract_dataset(
    config: &AgentConfig,
    opponents: &[AgentConfig],
    matches: usize,
    max_cycles: u64,
    base_seed: u64,
    out_dir: &Path,
) -> Result<ExtractReport> {
    if matches == 0 {
        return Err(Error::Precondition("extraction needs at least one match".into()));
    }
    if opponents.is_empty() {
        return Err(Error::Precondition("extraction needs at least one opponent".into()));
    }
    let per_match: Vec<Vec<Sample>> = (0..matches)
        .into_par_iter()
        .map(|m| {
            let opponent = &opponents[m % opponents.len()];
            let (seed, side) = match_schedule(base_seed, 0, m);
            let mut rec = PassRecorder { side, params: config.params(), samples: Vec::new() };
            match side {
                Side::Left => run_match_with(config, opponent, seed, max_cycles, &mut rec)?,
                Side::Right => run_match_with(opponent, config, seed, max_cycles, &mut rec)?,
            };
            Ok(rec.samples)
        })
        .collect::<Result<_>>()?;
    let samples: Vec<Sample> = per_match.into_iter().flatten().collect();
    write_split(&samples, base_seed, out_dir)
}

fn write_split(samples: &[Sample], base_seed: u64, out_dir: &Path) -> Result<ExtractReport> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let train_path = out_dir.join("train.csv");
    let test_path = out_dir.join("test.csv");
    let is_test = test_split(samples.len(), base_seed);
    let write = || -> Result<(usize, usize)> {
        let mut train = DatasetWriter::create(&train_path)?;
        let mut test = DatasetWriter::create(&test_path)?;
        for (s, &t) in samples.iter().zip(&is_test) {
            let (sink, path) = if t { (&mut test, &test_path) } else { (&mut train, &train_path) };
            sink.write_sample(s).map_err(|e| Error::io(path, e))?;
        }
        let counts = (train.rows(), test.rows());
        train.finish().map_err(|e| Error::io(&train_path, e))?;
        test.finish().map_err(|e| Error::io(&test_path, e))?;
        Ok(counts)
    };
    match write() {
        Ok((train_rows, test_rows)) => {
            Ok(ExtractReport { rows: samples.len(), train_rows, test_rows, train_path, test_path })
        }
        Err(e) => {
            let _ = std::fs::remove_file(&train_path);
            let _ = std::fs::remove_file(&test_path);
            Err(e)
        }
    }
}
