//! The match loop and result statistics.

use serde::{Deserialize, Serialize};

use super::{step, Side, WorldState};
use crate::agent::{decide_all, Agent, AgentConfig, TeamDecision};
use crate::error::{Error, Result};

/// Standard game length in cycles.
pub const DEFAULT_MATCH_CYCLES: u64 = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchResult {
    pub goals_left: u32,
    pub goals_right: u32,
    pub cycles_played: u64,
    pub seed: u64,
    pub illegal_kicks: u32,
}

impl MatchResult {
    pub fn goals(&self, side: Side) -> u32 {
        match side {
            Side::Left => self.goals_left,
            Side::Right => self.goals_right,
        }
    }

    pub fn goal_difference(&self, side: Side) -> i64 {
        i64::from(self.goals(side)) - i64::from(self.goals(side.opposite()))
    }
}

/// Hooks into the match loop. Called once per cycle before the step, with the
/// state both teams decided on, and once with the final state.
pub trait MatchObserver {
    fn on_cycle(&mut self, _state: &WorldState, _decisions: &[TeamDecision; 2]) {}
    fn on_end(&mut self, _state: &WorldState) {}
}

impl MatchObserver for () {}

/// Plays `max_cycles` cycles from `initial`. `seed` feeds kickoff jitter.
pub fn play_match(
    left: &mut Agent,
    right: &mut Agent,
    initial: WorldState,
    seed: u64,
    max_cycles: u64,
    observer: &mut dyn MatchObserver,
) -> Result<MatchResult> {
    if max_cycles == 0 {
        return Err(Error::Precondition("max_cycles must be positive".into()));
    }
    if left.side != Side::Left || right.side != Side::Right {
        return Err(Error::Precondition("agents must play their own sides".into()));
    }
    if left.params().physics != right.params().physics {
        return Err(Error::InvalidConfig("the two configs disagree on physics".into()));
    }
    let phys = left.params().physics.clone();
    initial.validate(&phys)?;
    let mut state = initial;
    let mut illegal_kicks = 0;
    let start = state.cycle;
    for _ in 0..max_cycles {
        let (commands, decisions) = decide_all(left, right, &state);
        observer.on_cycle(&state, &decisions);
        let (next, report) = step(&state, &commands, &phys, seed);
        illegal_kicks += report.illegal_kicks;
        state = next;
    }
    observer.on_end(&state);
    Ok(MatchResult {
        goals_left: state.score_left,
        goals_right: state.score_right,
        cycles_played: state.cycle - start,
        seed,
        illegal_kicks,
    })
}

/// Seeds `2k` and `2k + 1` differ only in which team kicks off, so with
/// identical configs they are exact mirror images of each other.
pub fn run_match(config_left: &AgentConfig, config_right: &AgentConfig, seed: u64, max_cycles: u64) -> Result<MatchResult> {
    run_match_with(config_left, config_right, seed, max_cycles, &mut ())
}

pub fn run_match_with(
    config_left: &AgentConfig,
    config_right: &AgentConfig,
    seed: u64,
    max_cycles: u64,
    observer: &mut dyn MatchObserver,
) -> Result<MatchResult> {
    if max_cycles == 0 {
        return Err(Error::Precondition("max_cycles must be positive".into()));
    }
    let mut left = Agent::new(Side::Left, config_left.clone())?;
    let mut right = Agent::new(Side::Right, config_right.clone())?;
    let kicking = if seed & 1 == 0 { Side::Left } else { Side::Right };
    let jitter_seed = seed >> 1;
    let initial = WorldState::kickoff(&config_left.physics, kicking, jitter_seed);
    let mut result = play_match(&mut left, &mut right, initial, jitter_seed, max_cycles, observer)?;
    result.seed = seed;
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum WinRate {
    Defined(f64),
    /// Every game was drawn.
    Undefined,
}

impl WinRate {
    pub fn value(self) -> Option<f64> {
        match self {
            WinRate::Defined(v) => Some(v),
            WinRate::Undefined => None,
        }
    }
}

impl std::fmt::Display for WinRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WinRate::Defined(v) => write!(f, "{v:.3}"),
            WinRate::Undefined => f.write_str("undefined"),
        }
    }
}

/// Wins over decided games for `side`.
pub fn win_rate(results: &[MatchResult], side: Side) -> Result<WinRate> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let wins = results.iter().filter(|r| r.goal_difference(side) > 0).count();
    let draws = results.iter().filter(|r| r.goal_difference(side) == 0).count();
    let decided = results.len() - draws;
    Ok(if decided == 0 { WinRate::Undefined } else { WinRate::Defined(wins as f64 / decided as f64) })
}
