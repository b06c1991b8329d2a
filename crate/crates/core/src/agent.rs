//! Team decision pipeline: turns a world state into one command per player
//! according to an [`AgentConfig`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Params, Physics, Tactics};
use crate::defense::{dribble_curve, elect_blocker, marking_targets, opponent_owns_ball};
use crate::error::{Error, Result};
use crate::evaluator::OreTable;
use crate::geom::{normalize_angle, Vec2};
use crate::passnet::{build_pass_tree, load_weights, select_passer_v11, MlpWeights, PassTree};
use crate::planner::{chain_search_tree, pass_kick_speed, ActionDescriptor, ActionKind, SearchBudget, SoccerTree};
use crate::unmark::{choose_unmark_target, select_passer_v10, GRID_DISTANCES};
use crate::world::{
    ball_trajectory, cycles_to_trajectory, BallState, Command, Commands, PlayerId, PlayerState, Side, WorldState,
    GOALIE, TEAM_SIZE,
};

/// Penalty table used when a config enables ORE without giving one.
pub const DEFAULT_ORE_TABLE: [f64; 7] = [30.0, 24.0, 16.0, 10.0, 6.0, 3.0, 1.0];

/// Players closer than this to their target stand still.
const ARRIVE_DISTANCE: f64 = 0.5;
/// The goalie only leaves its line for balls this deep in its half.
const GOALIE_BOX_DEPTH: f64 = 36.0;
const GOALIE_BOX_WIDTH: f64 = 20.0;
/// Below this fraction of the maximum, only urgent runs may spend stamina.
const STAMINA_SAVE_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    #[default]
    Standard,
    /// Every player issues no command at all.
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    pub blocking: bool,
    pub ore: bool,
    pub unmark_simple: bool,
    pub unmark_passnet: bool,
}

impl Flags {
    pub const ALL_OFF: Flags = Flags { blocking: false, ore: false, unmark_simple: false, unmark_passnet: false };
}

/// Everything a team needs to play: feature flags, the ORE table, planner
/// budget and constant overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub name: String,
    pub policy: Policy,
    pub flags: Flags,
    pub ore_table: OreTable,
    pub weights_path: Option<PathBuf>,
    pub physics: Physics,
    pub tactics: Tactics,
    pub budget: SearchBudget,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            name: "agent".into(),
            policy: Policy::Standard,
            flags: Flags::ALL_OFF,
            ore_table: OreTable::new(DEFAULT_ORE_TABLE).expect("default table is valid"),
            weights_path: None,
            physics: Physics::default(),
            tactics: Tactics::default(),
            budget: SearchBudget::default(),
        }
    }
}

impl AgentConfig {
    pub fn with_flags(name: &str, flags: Flags) -> Self {
        Self { name: name.into(), flags, ..Self::default() }
    }

    pub fn null(name: &str) -> Self {
        Self { name: name.into(), policy: Policy::Null, ..Self::default() }
    }

    /// Reads a JSON config. A relative `weights_path` is resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: AgentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
        if let (Some(w), Some(dir)) = (&cfg.weights_path, path.parent()) {
            if w.is_relative() {
                cfg.weights_path = Some(dir.join(w));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.flags.unmark_passnet && self.weights_path.is_none() {
            return Err(Error::InvalidConfig(format!("{}: unmark_passnet requires weights_path", self.name)));
        }
        if self.budget.max_nodes == 0 || self.budget.max_depth == 0 {
            return Err(Error::InvalidConfig(format!("{}: planner budget must be positive", self.name)));
        }
        let p = &self.physics;
        let positive = [
            p.half_length,
            p.half_width,
            p.goal_half_width,
            p.ball_speed_max,
            p.player_speed_max,
            p.dash_accel_max,
            p.kickable_area,
            p.stamina_max,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !(0.0..1.0).contains(&p.ball_decay) {
            return Err(Error::InvalidConfig(format!("{}: physics constants out of range", self.name)));
        }
        Ok(())
    }

    pub fn params(&self) -> Params {
        Params { physics: self.physics.clone(), tactics: self.tactics.clone() }
    }

    /// The table the planner uses: all zeros when ORE is off.
    pub fn effective_ore_table(&self) -> OreTable {
        if self.flags.ore {
            self.ore_table
        } else {
            OreTable::ZERO
        }
    }
}

/// What a team decided in one cycle, for observers.
#[derive(Debug, Clone, Default)]
pub struct TeamDecision {
    pub holder_action: Option<ActionDescriptor>,
    pub plan: Option<SoccerTree>,
    pub blocker: Option<u8>,
    pub pass_tree: Option<PassTree>,
}

/// A configured team. Keeps the unmarking targets between cycles since those
/// are only recomputed every `unmark_period` cycles.
pub struct Agent {
    pub side: Side,
    config: AgentConfig,
    params: Params,
    table: OreTable,
    weights: Option<MlpWeights>,
    unmark_cache: [Option<Vec2>; TEAM_SIZE],
}

impl Agent {
    pub fn new(side: Side, config: AgentConfig) -> Result<Self> {
        config.validate()?;
        let weights = match (&config.weights_path, config.flags.unmark_passnet) {
            (Some(path), true) => Some(load_weights(path)?),
            _ => None,
        };
        Ok(Self::with_weights(side, config, weights))
    }

    /// Like [`Agent::new`] with already loaded weights.
    pub fn with_weights(side: Side, config: AgentConfig, weights: Option<MlpWeights>) -> Self {
        let params = config.params();
        let table = config.effective_ore_table();
        Self { side, config, params, table, weights, unmark_cache: [None; TEAM_SIZE] }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Writes this team's commands into `commands`.
    pub fn decide(&mut self, state: &WorldState, commands: &mut Commands) -> TeamDecision {
        let mut decision = TeamDecision::default();
        if self.config.policy == Policy::Null {
            return decision;
        }
        let side = self.side;
        let params = &self.params;
        let phys = &params.physics;
        let mut targets: [Option<Vec2>; TEAM_SIZE] = [None; TEAM_SIZE];
        // Players racing for the ball run at full power whatever their stamina.
        let mut urgent = [false; TEAM_SIZE];
        let mut done = [false; TEAM_SIZE];
        let slot = |unum: u8| usize::from(unum - 1);

        if let Some(plan) = chain_search_tree(state, side, self.config.budget, &self.table, params) {
            let holder = plan.nodes[0].state.ball_owner.expect("planner roots carry the holder");
            let action = plan.first_action().unwrap_or_else(|| ActionDescriptor::hold(holder, state.ball.position));
            commands[holder.index()] = if dribble_in_motion(state, &action, params) {
                go_to(state.player(holder), state.ball.position + state.ball.velocity, params)
            } else {
                kick_command(state, &action, params)
            };
            done[slot(holder.unum)] = true;
            // The receiver starts running in the kick cycle.
            if let (Command::Kick { power, dir }, Some(receiver)) = (commands[holder.index()], action.receiver) {
                let kicked = BallState {
                    position: state.ball.position,
                    velocity: side.orient(Vec2::polar(power / 100.0 * phys.ball_speed_max, dir)),
                };
                let flight = ball_trajectory(phys, &kicked, phys.intercept_horizon);
                let mate = state.player(PlayerId::new(side, receiver));
                let c = cycles_to_trajectory(phys, mate, &flight);
                targets[slot(receiver)] = Some(flight[c as usize]);
                urgent[slot(receiver)] = true;
            }
            decision.holder_action = Some(action);
            decision.plan = Some(plan);
        }

        let trajectory = ball_trajectory(phys, &state.ball, phys.intercept_horizon);
        let reach: Vec<u32> = state.team(side).iter().map(|p| cycles_to_trajectory(phys, p, &trajectory)).collect();
        let fastest = (1..=TEAM_SIZE as u8).min_by_key(|&u| (reach[slot(u)], u)).expect("team is not empty");
        let we_hold = decision.holder_action.is_some();
        let opponent_owns = !we_hold && opponent_owns_ball(state, side, params);

        // Chase the ball unless somebody already has it or the goalie would
        // have to leave its box.
        let chaser = (!we_hold && reach[slot(fastest)] < phys.intercept_horizon)
            .then_some(fastest)
            .filter(|&u| u != GOALIE || in_goalie_box(state.ball.position, side, phys));

        if opponent_owns {
            let mut busy = Vec::new();
            let mut blocker = None;
            if self.config.flags.blocking {
                if let Ok(curve) = dribble_curve(state, side, params.tactics.block_curve_horizon, params) {
                    blocker = elect_blocker(state, side, &curve, params);
                }
            }
            if let Some(b) = blocker {
                targets[slot(b.unum)] = Some(b.point.position);
                urgent[slot(b.unum)] = true;
                busy.push(b.unum);
                decision.blocker = Some(b.unum);
            } else if let Some(c) = chaser {
                targets[slot(c)] = Some(trajectory[reach[slot(c)] as usize]);
                urgent[slot(c)] = true;
                busy.push(c);
            }
            for (unum, target) in marking_targets(state, side, &busy, params) {
                targets[slot(unum)] = Some(target);
            }
        } else {
            if let Some(c) = chaser {
                targets[slot(c)] = Some(trajectory[reach[slot(c)] as usize]);
                urgent[slot(c)] = true;
            }
            let flags = self.config.flags;
            if flags.unmark_simple || flags.unmark_passnet {
                if flags.unmark_passnet {
                    decision.pass_tree = self
                        .weights
                        .as_ref()
                        .and_then(|w| build_pass_tree(state, side, w, params.tactics.prob_limit, params).ok());
                }
                self.plan_unmarking(state, &decision, &done, &mut targets);
            }
        }

        for p in state.team(side) {
            let i = slot(p.uniform_number);
            if done[i] {
                continue;
            }
            let target = targets[i].unwrap_or(p.home_position);
            let command = go_to(p, target, &self.params);
            commands[p.id().index()] = if urgent[i] { command } else { pace(p, command, &self.params) };
        }
        decision
    }

    fn plan_unmarking(
        &mut self,
        state: &WorldState,
        decision: &TeamDecision,
        done: &[bool; TEAM_SIZE],
        targets: &mut [Option<Vec2>; TEAM_SIZE],
    ) {
        let params = &self.params;
        let period = u64::from(params.tactics.unmark_period.max(1));
        for p in state.team(self.side) {
            let i = usize::from(p.uniform_number - 1);
            if p.uniform_number == GOALIE || done[i] || targets[i].is_some() {
                self.unmark_cache[i] = None;
                continue;
            }
            // Staggered so only a fraction of the team searches per cycle.
            if (state.cycle + u64::from(p.uniform_number)).is_multiple_of(period) || self.unmark_cache[i].is_none() {
                let me = p.id();
                let v11 = decision
                    .pass_tree
                    .as_ref()
                    .and_then(|t| select_passer_v11(t, p.uniform_number))
                    .map(|u| PlayerId::new(self.side, u));
                // Past this range no planned pass could reach any candidate.
                let range = params.tactics.max_pass_distance + params.tactics.unmark_step * GRID_DISTANCES as f64;
                let passer = v11
                    .or_else(|| select_passer_v10(state, me, params))
                    .filter(|&passer| state.player(passer).position.dist(p.position) <= range);
                self.unmark_cache[i] = passer.and_then(|passer| choose_unmark_target(state, me, passer, params));
            }
            targets[i] = self.unmark_cache[i];
        }
    }
}

fn in_goalie_box(ball: Vec2, side: Side, phys: &Physics) -> bool {
    let local = side.orient(ball);
    local.x <= -GOALIE_BOX_DEPTH && local.y.abs() <= GOALIE_BOX_WIDTH && local.x >= -phys.half_length
}

/// Kick realizing `action`: passes at the planner's pass speed, dribbles as a
/// soft push, shots at full power, holds stop the ball.
pub fn kick_command(state: &WorldState, action: &ActionDescriptor, params: &Params) -> Command {
    let side = action.kicker.side;
    let phys = &params.physics;
    let ball = state.ball.position;
    let dir = side.orient(action.target_point - ball).angle();
    let speed = match action.kind {
        ActionKind::Hold => 0.0,
        ActionKind::DirectPass | ActionKind::LeadPass => pass_kick_speed(ball.dist(action.target_point), params),
        ActionKind::Dribble => params.tactics.dribble_speed,
        ActionKind::Shoot => phys.ball_speed_max,
    };
    Command::Kick { power: (speed / phys.ball_speed_max * 100.0).min(100.0), dir }
}

/// A dribbler whose ball already rolls towards the dribble target runs after
/// it instead of kicking again.
fn dribble_in_motion(state: &WorldState, action: &ActionDescriptor, params: &Params) -> bool {
    if action.kind != ActionKind::Dribble {
        return false;
    }
    let v = state.ball.velocity;
    let want = action.target_point - state.ball.position;
    let speed = v.length();
    speed >= 0.5 * params.tactics.dribble_speed && v.dot(want) >= 0.9 * speed * want.length()
}

/// One-cycle move towards `target`: turn when the heading is off by more
/// than the turn threshold, otherwise dash, easing off near the target.
pub fn go_to(player: &PlayerState, target: Vec2, params: &Params) -> Command {
    let phys = &params.physics;
    let dist = player.position.dist(target);
    if dist < ARRIVE_DISTANCE {
        return Command::None;
    }
    let rel = normalize_angle(player.heading_to(target) - player.body_direction);
    if rel.abs() > phys.turn_threshold {
        return Command::Turn { moment: rel };
    }
    let power = (dist / phys.dash_accel_max * 100.0).min(100.0);
    Command::Dash { power, dir: rel }
}

/// Caps the dash power of a tired player at what one cycle recovers, so
/// positioning runs never drain the stamina a later chase needs.
pub fn pace(player: &PlayerState, command: Command, params: &Params) -> Command {
    let phys = &params.physics;
    match command {
        Command::Dash { power, dir } if player.stamina < STAMINA_SAVE_FRACTION * phys.stamina_max => {
            Command::Dash { power: power.min(phys.stamina_recovery), dir }
        }
        other => other,
    }
}

/// Commands for both teams in one cycle.
pub fn decide_all(left: &mut Agent, right: &mut Agent, state: &WorldState) -> (Commands, [TeamDecision; 2]) {
    let mut commands = [Command::None; 2 * TEAM_SIZE];
    let dl = left.decide(state, &mut commands);
    let dr = right.decide(state, &mut commands);
    (commands, [dl, dr])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::step;

    #[test]
    fn config_json_round_trip_and_defaults() {
        let cfg: AgentConfig = serde_json::from_str(r#"{"name": "b", "flags": {"blocking": true}}"#).unwrap();
        assert!(cfg.flags.blocking && !cfg.flags.ore);
        assert_eq!(cfg.physics, Physics::default());
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<AgentConfig>(&text).unwrap(), cfg);
        assert!(serde_json::from_str::<AgentConfig>(r#"{"flags": {"blokking": true}}"#).is_err());
    }

    #[test]
    fn passnet_requires_weights() {
        let cfg = AgentConfig::with_flags("v11", Flags { unmark_passnet: true, ..Flags::ALL_OFF });
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn ore_off_means_zero_table() {
        let cfg = AgentConfig::default();
        assert!(cfg.effective_ore_table().is_zero());
        let on = AgentConfig::with_flags("o", Flags { ore: true, ..Flags::ALL_OFF });
        assert_eq!(on.effective_ore_table().penalties(), &DEFAULT_ORE_TABLE);
    }

    #[test]
    fn go_to_turns_then_dashes() {
        let params = Params::default();
        let p = PlayerState::new(Side::Left, 5, Vec2::ZERO);
        assert_eq!(go_to(&p, Vec2::new(0.0, 10.0), &params), Command::Turn { moment: 90.0 });
        assert_eq!(go_to(&p, Vec2::new(10.0, 0.0), &params), Command::Dash { power: 100.0, dir: 0.0 });
        assert_eq!(go_to(&p, Vec2::new(0.2, 0.0), &params), Command::None);
        // Team frame: the right side's body 0 faces world -x.
        let r = PlayerState::new(Side::Right, 5, Vec2::ZERO);
        assert_eq!(go_to(&r, Vec2::new(-10.0, 0.0), &params), Command::Dash { power: 100.0, dir: 0.0 });
    }

    #[test]
    fn kick_command_reaches_planned_speed() {
        let params = Params::default();
        let mut s = WorldState::kickoff(&params.physics, Side::Left, 1);
        s.ball = BallState::default();
        let taker = s.player(PlayerId::new(Side::Right, 11)).id();
        let action = ActionDescriptor {
            kind: ActionKind::DirectPass,
            kicker: taker,
            target_point: Vec2::new(-10.0, 0.0),
            receiver: Some(9),
            duration: 4,
        };
        let cmd = kick_command(&s, &action, &params);
        let mut commands = [Command::None; 22];
        commands[taker.index()] = cmd;
        // Move the taker onto the ball so the kick is legal.
        s.player_mut(taker).position = Vec2::new(0.5, 0.0);
        let (next, report) = step(&s, &commands, &params.physics, 0);
        assert_eq!(report.illegal_kicks, 0);
        let expected = pass_kick_speed(10.0, &params);
        assert!((next.ball.position - Vec2::new(-expected, 0.0)).length() < 1e-12);
    }

    #[test]
    fn null_policy_issues_nothing() {
        let params = Params::default();
        let s = WorldState::kickoff(&params.physics, Side::Left, 1);
        let mut a = Agent::new(Side::Left, AgentConfig::null("n")).unwrap();
        let mut commands = [Command::None; 22];
        a.decide(&s, &mut commands);
        assert!(commands.iter().all(|c| *c == Command::None));
    }

    #[test]
    fn kickoff_taker_kicks() {
        let params = Params::default();
        let s = WorldState::kickoff(&params.physics, Side::Left, 1);
        let mut a = Agent::new(Side::Left, AgentConfig::default()).unwrap();
        let mut commands = [Command::None; 22];
        let d = a.decide(&s, &mut commands);
        assert!(d.holder_action.is_some());
        assert!(matches!(commands[PlayerId::new(Side::Left, 11).index()], Command::Kick { .. }));
    }
}
