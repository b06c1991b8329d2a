//! Simplified noise-free soccer world: state, per-cycle kinematics and
//! interception estimates.
//!
//! Coordinates are world coordinates with the left team attacking +x. Player
//! headings and command directions are expressed in the player's own team
//! frame (the frame in which that team attacks +x), so reflecting a state
//! through the origin and swapping sides is exact.

mod formation;
mod game;
mod kinematics;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Physics;
use crate::error::{Error, Result};
use crate::geom::{normalize_angle, Vec2};

pub use formation::{home_position, kickoff_position, GOALIE, KICKOFF_TAKER};
pub use game::{
    play_match, run_match, run_match_with, win_rate, MatchObserver, MatchResult, WinRate, DEFAULT_MATCH_CYCLES,
};
pub use kinematics::{
    ball_position_at, ball_trajectory, cycles_to_trajectory, is_kickable, min_cycles_to_moving_ball,
    min_cycles_to_point, reaches_within,
};

pub const TEAM_SIZE: usize = 11;
pub const NUM_PLAYERS: usize = 2 * TEAM_SIZE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Maps a world vector into this side's attack frame and back (the map is
    /// its own inverse).
    pub fn orient(self, v: Vec2) -> Vec2 {
        match self {
            Side::Left => v,
            Side::Right => -v,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlayerId {
    pub side: Side,
    pub unum: u8,
}

impl PlayerId {
    pub fn new(side: Side, unum: u8) -> Self {
        debug_assert!((1..=11).contains(&unum));
        Self { side, unum }
    }

    pub fn index(self) -> usize {
        self.side.index() * TEAM_SIZE + usize::from(self.unum - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub side: Side,
    pub uniform_number: u8,
    pub position: Vec2,
    pub velocity: Vec2,
    /// Heading in degrees, team frame, `[-180, 180)`.
    pub body_direction: f64,
    pub stamina: f64,
    pub home_position: Vec2,
}

impl PlayerState {
    pub fn new(side: Side, unum: u8, position: Vec2) -> Self {
        Self {
            side,
            uniform_number: unum,
            position,
            velocity: Vec2::ZERO,
            body_direction: 0.0,
            stamina: Physics::default().stamina_max,
            home_position: position,
        }
    }

    pub fn id(&self) -> PlayerId {
        PlayerId::new(self.side, self.uniform_number)
    }

    /// Heading from this player to `target` in the player's team frame.
    pub fn heading_to(&self, target: Vec2) -> f64 {
        self.side.orient(target - self.position).angle()
    }

    /// Unit vector of the body direction in world coordinates.
    pub fn facing(&self) -> Vec2 {
        self.side.orient(Vec2::from_angle(self.body_direction))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BallState {
    pub position: Vec2,
    pub velocity: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub cycle: u64,
    pub ball: BallState,
    /// Left team 1..=11 followed by right team 1..=11.
    pub players: Vec<PlayerState>,
    pub ball_owner: Option<PlayerId>,
    pub score_left: u32,
    pub score_right: u32,
}

impl WorldState {
    /// Both teams at their home positions around a stationary ball.
    pub fn new(ball: Vec2) -> Self {
        let mut players = Vec::with_capacity(NUM_PLAYERS);
        for side in [Side::Left, Side::Right] {
            for unum in 1..=11u8 {
                let home = side.orient(home_position(unum, side.orient(ball)));
                players.push(PlayerState::new(side, unum, home));
            }
        }
        Self {
            cycle: 0,
            ball: BallState { position: ball, velocity: Vec2::ZERO },
            players,
            ball_owner: None,
            score_left: 0,
            score_right: 0,
        }
    }

    /// Kickoff layout for a fresh match; `seed` perturbs the formation.
    pub fn kickoff(phys: &Physics, kicking: Side, seed: u64) -> Self {
        let mut state = Self::new(Vec2::ZERO);
        for p in &mut state.players {
            p.stamina = phys.stamina_max;
        }
        state.reset_for_kickoff(kicking, seed);
        state
    }

    pub fn player(&self, id: PlayerId) -> &PlayerState {
        &self.players[id.index()]
    }

    pub fn player_mut(&mut self, id: PlayerId) -> &mut PlayerState {
        &mut self.players[id.index()]
    }

    pub fn team(&self, side: Side) -> &[PlayerState] {
        let start = side.index() * TEAM_SIZE;
        &self.players[start..start + TEAM_SIZE]
    }

    pub fn score(&self, side: Side) -> u32 {
        match side {
            Side::Left => self.score_left,
            Side::Right => self.score_right,
        }
    }

    /// Point reflection through the center spot with sides swapped.
    pub fn mirrored(&self) -> WorldState {
        let mut players = Vec::with_capacity(NUM_PLAYERS);
        for p in self.team(Side::Right).iter().chain(self.team(Side::Left)) {
            players.push(PlayerState {
                side: p.side.opposite(),
                position: -p.position,
                velocity: -p.velocity,
                home_position: -p.home_position,
                ..p.clone()
            });
        }
        WorldState {
            cycle: self.cycle,
            ball: BallState { position: -self.ball.position, velocity: -self.ball.velocity },
            players,
            ball_owner: self.ball_owner.map(|o| PlayerId::new(o.side.opposite(), o.unum)),
            score_left: self.score_right,
            score_right: self.score_left,
        }
    }

    /// The state as seen by `side`: that team becomes the left team attacking +x.
    pub fn oriented(&self, side: Side) -> WorldState {
        match side {
            Side::Left => self.clone(),
            Side::Right => self.mirrored(),
        }
    }

    pub fn validate(&self, phys: &Physics) -> Result<()> {
        if self.players.len() != NUM_PLAYERS {
            return Err(Error::InvalidState(format!(
                "expected {NUM_PLAYERS} players, got {}",
                self.players.len()
            )));
        }
        for (i, p) in self.players.iter().enumerate() {
            let side = if i < TEAM_SIZE { Side::Left } else { Side::Right };
            let unum = (i % TEAM_SIZE + 1) as u8;
            if p.side != side || p.uniform_number != unum {
                return Err(Error::InvalidState(format!(
                    "slot {i} holds {:?} #{} but expects {side:?} #{unum}",
                    p.side, p.uniform_number
                )));
            }
            if !p.position.is_finite() || !p.velocity.is_finite() || p.stamina < 0.0 {
                return Err(Error::InvalidState(format!("{side:?} #{unum} is not finite")));
            }
            let lx = phys.half_length + phys.out_of_bounds_slack;
            let ly = phys.half_width + phys.out_of_bounds_slack;
            if p.position.x.abs() > lx || p.position.y.abs() > ly {
                return Err(Error::InvalidState(format!("{side:?} #{unum} is off the field")));
            }
        }
        if !self.ball.position.is_finite() || self.ball.velocity.length() > phys.ball_speed_max + 1e-9
        {
            return Err(Error::InvalidState("ball speed above maximum".into()));
        }
        Ok(())
    }

    /// Deterministic digest of every field, for reproducibility checks.
    pub fn state_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.cycle.hash(&mut h);
        hash_vec(&mut h, self.ball.position);
        hash_vec(&mut h, self.ball.velocity);
        for p in &self.players {
            hash_vec(&mut h, p.position);
            hash_vec(&mut h, p.velocity);
            hash_vec(&mut h, p.home_position);
            p.body_direction.to_bits().hash(&mut h);
            p.stamina.to_bits().hash(&mut h);
        }
        self.ball_owner.hash(&mut h);
        self.score_left.hash(&mut h);
        self.score_right.hash(&mut h);
        h.finish()
    }

    fn reset_for_kickoff(&mut self, kicking: Side, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ self.cycle.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let jitter: Vec<Vec2> = (0..TEAM_SIZE)
            .map(|_| Vec2::new(rng.gen_range(-1.5..=1.5), rng.gen_range(-1.5..=1.5)))
            .collect();
        self.ball = BallState::default();
        for p in &mut self.players {
            let local = kickoff_position(p.uniform_number, p.side == kicking, jitter[usize::from(p.uniform_number - 1)]);
            p.position = p.side.orient(local);
            p.velocity = Vec2::ZERO;
            p.body_direction = 0.0;
        }
        self.update_homes();
        self.ball_owner = Some(PlayerId::new(kicking, KICKOFF_TAKER));
    }

    fn update_homes(&mut self) {
        let ball = self.ball.position;
        for p in &mut self.players {
            p.home_position = p.side.orient(home_position(p.uniform_number, p.side.orient(ball)));
        }
    }

    /// Recomputes `ball_owner`: the nearest kickable player, otherwise the
    /// unique fastest interceptor. Ties across teams leave the ball unowned.
    fn update_owner(&mut self, phys: &Physics) {
        let kickable = self
            .players
            .iter()
            .filter(|p| is_kickable(phys, p, &self.ball))
            .map(|p| (p.position.dist(self.ball.position), p.id()));
        if let Some(owner) = unique_min(kickable) {
            self.ball_owner = owner;
            return;
        }
        let cycles = self
            .players
            .iter()
            .map(|p| (min_cycles_to_moving_ball(phys, p, &self.ball) as f64, p.id()))
            .filter(|(c, _)| *c < f64::from(phys.intercept_horizon));
        self.ball_owner = unique_min(cycles).flatten();
    }
}

fn hash_vec(h: &mut DefaultHasher, v: Vec2) {
    v.x.to_bits().hash(h);
    v.y.to_bits().hash(h);
}

/// Minimum by key; within a team the lower uniform number wins, a tie between
/// teams yields `Some(None)`. `None` when the iterator is empty.
fn unique_min(items: impl Iterator<Item = (f64, PlayerId)>) -> Option<Option<PlayerId>> {
    let mut best: [Option<(f64, PlayerId)>; 2] = [None, None];
    for (key, id) in items {
        let slot = &mut best[id.side.index()];
        if slot.is_none_or(|(k, _)| key < k) {
            *slot = Some((key, id));
        }
    }
    match best {
        [None, None] => None,
        [Some((_, a)), None] | [None, Some((_, a))] => Some(Some(a)),
        [Some((ka, a)), Some((kb, b))] => Some(if ka < kb {
            Some(a)
        } else if kb < ka {
            Some(b)
        } else {
            None
        }),
    }
}

/// A player command for one cycle. Directions are in the team frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Command {
    Dash { power: f64, dir: f64 },
    Turn { moment: f64 },
    Kick { power: f64, dir: f64 },
    #[default]
    None,
}

pub type Commands = [Command; NUM_PLAYERS];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepReport {
    /// Kicks issued by players that could not reach the ball.
    pub illegal_kicks: u32,
    /// Team that scored this cycle.
    pub goal: Option<Side>,
}

/// Advances the world by one cycle. `seed` feeds contested kicks and the
/// formation jitter applied at a kickoff after a goal.
pub fn step(state: &WorldState, commands: &Commands, phys: &Physics, seed: u64) -> (WorldState, StepReport) {
    let mut next = state.clone();
    let mut report = StepReport::default();

    // Kicks act on the pre-step ball; kicks within a team add up. When both
    // teams kick, the owner keeps the ball with `contest_keep_prob`; without
    // an owner among the kickers the strictly closer team wins and equally
    // close kickers add up.
    let mut kick_sum = [Vec2::ZERO; 2];
    let mut kick_dist = [f64::INFINITY; 2];
    let mut owner_kicks = false;
    for (p, cmd) in state.players.iter().zip(commands) {
        if let Command::Kick { power, dir } = *cmd {
            if is_kickable(phys, p, &state.ball) {
                let speed = power.clamp(0.0, 100.0) / 100.0 * phys.ball_speed_max;
                let t = p.side.index();
                kick_sum[t] += p.side.orient(Vec2::polar(speed, normalize_angle(dir)));
                kick_dist[t] = kick_dist[t].min(p.position.dist(state.ball.position));
                owner_kicks |= state.ball_owner == Some(p.id());
            } else {
                report.illegal_kicks += 1;
            }
        }
    }
    let kick = match (kick_dist[0].is_finite(), kick_dist[1].is_finite()) {
        (false, false) => None,
        (true, false) => Some(kick_sum[0]),
        (false, true) => Some(kick_sum[1]),
        (true, true) => Some(if owner_kicks {
            let owner = state.ball_owner.expect("owner kicked").side.index();
            // Only the cycle and seed feed the draw, so mirrored matches
            // resolve contests the same way.
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ state.cycle.wrapping_mul(0xD1B5_4A32_D192_ED03));
            let keep = rng.gen_bool(phys.contest_keep_prob.clamp(0.0, 1.0));
            kick_sum[if keep { owner } else { 1 - owner }]
        } else if kick_dist[0] < kick_dist[1] {
            kick_sum[0]
        } else if kick_dist[1] < kick_dist[0] {
            kick_sum[1]
        } else {
            kick_sum[0] + kick_sum[1]
        }),
    };
    if let Some(kick) = kick {
        next.ball.velocity = kick.clamp_length(phys.ball_speed_max);
    }

    for (p, cmd) in next.players.iter_mut().zip(commands) {
        match *cmd {
            Command::Turn { moment } => {
                p.body_direction = normalize_angle(p.body_direction + moment);
            }
            Command::Dash { power, dir } => {
                let power = power.clamp(0.0, 100.0).min(p.stamina);
                if power > 0.0 {
                    p.stamina -= power;
                    let dir = normalize_angle(dir).clamp(-phys.turn_threshold, phys.turn_threshold);
                    let accel = power / 100.0 * phys.dash_accel_max;
                    let push = p.side.orient(Vec2::polar(accel, p.body_direction + dir));
                    p.velocity = (p.velocity + push).clamp_length(phys.player_speed_max);
                }
            }
            Command::Kick { .. } | Command::None => {}
        }
        p.stamina = (p.stamina + phys.stamina_recovery).min(phys.stamina_max);
    }

    let prev_ball = next.ball.position;
    next.ball.position += next.ball.velocity;
    next.ball.velocity = next.ball.velocity * phys.ball_decay;
    let lx = phys.half_length + phys.out_of_bounds_slack;
    let ly = phys.half_width + phys.out_of_bounds_slack;
    for p in &mut next.players {
        p.position += p.velocity;
        p.velocity = p.velocity * phys.player_decay;
        p.position.x = p.position.x.clamp(-lx, lx);
        p.position.y = p.position.y.clamp(-ly, ly);
    }
    next.cycle += 1;

    report.goal = goal_scored(phys, prev_ball, next.ball.position);
    if let Some(scorer) = report.goal {
        match scorer {
            Side::Left => next.score_left += 1,
            Side::Right => next.score_right += 1,
        }
        next.reset_for_kickoff(scorer.opposite(), seed);
        return (next, report);
    }

    let b = &mut next.ball;
    if b.position.x.abs() > phys.half_length || b.position.y.abs() > phys.half_width {
        b.position = restart_point(phys, b.position);
        b.velocity = Vec2::ZERO;
    }
    next.update_homes();
    next.update_owner(phys);
    (next, report)
}

/// Where play restarts after the ball leaves the field at `p`: the nearest
/// point half a meter inside the lines.
pub fn restart_point(phys: &Physics, p: Vec2) -> Vec2 {
    Vec2::new(
        p.x.clamp(-(phys.half_length - 0.5), phys.half_length - 0.5),
        p.y.clamp(-(phys.half_width - 0.5), phys.half_width - 0.5),
    )
}

fn goal_scored(phys: &Physics, from: Vec2, to: Vec2) -> Option<Side> {
    let crossing_y = |line: f64| {
        let t = (line - from.x) / (to.x - from.x);
        from.y + (to.y - from.y) * t
    };
    if to.x > phys.half_length && from.x <= phys.half_length {
        (crossing_y(phys.half_length).abs() <= phys.goal_half_width).then_some(Side::Left)
    } else if to.x < -phys.half_length && from.x >= -phys.half_length {
        (crossing_y(-phys.half_length).abs() <= phys.goal_half_width).then_some(Side::Right)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_state() -> WorldState {
        let mut s = WorldState::new(Vec2::ZERO);
        // Park everyone well away from the ball paths used below.
        for p in &mut s.players {
            p.position = Vec2::new(p.position.x * 0.5, 30.0 * if p.side == Side::Left { 1.0 } else { -1.0 });
        }
        s
    }

    const NONE: Commands = [Command::None; NUM_PLAYERS];

    #[test]
    fn ball_moves_then_decays() {
        let phys = Physics::default();
        let mut s = quiet_state();
        s.ball = BallState { position: Vec2::ZERO, velocity: Vec2::new(1.0, 0.0) };
        let (next, _) = step(&s, &NONE, &phys, 0);
        assert_eq!(next.ball.position, Vec2::new(1.0, 0.0));
        assert_eq!(next.ball.velocity, Vec2::new(0.94, 0.0));
        assert_eq!(next.cycle, 1);
    }

    #[test]
    fn resting_world_is_a_fixed_point() {
        let phys = Physics::default();
        let s = quiet_state();
        let (next, _) = step(&s, &NONE, &phys, 0);
        for (a, b) in s.players.iter().zip(&next.players) {
            assert_eq!(a.position, b.position);
        }
        assert_eq!(next.ball.position, s.ball.position);
        assert_eq!(next.cycle, s.cycle + 1);
    }

    #[test]
    fn crossing_goal_line_inside_posts_scores() {
        let phys = Physics::default();
        let mut s = quiet_state();
        s.ball = BallState { position: Vec2::new(52.4, 0.0), velocity: Vec2::new(0.5, 0.0) };
        let (next, report) = step(&s, &NONE, &phys, 7);
        assert_eq!(report.goal, Some(Side::Left));
        assert_eq!(next.score_left, 1);
        assert_eq!(next.score_right, 0);
        // Kickoff reset: ball on the spot, right team to kick off.
        assert_eq!(next.ball.position, Vec2::ZERO);
        assert_eq!(next.ball_owner, Some(PlayerId::new(Side::Right, KICKOFF_TAKER)));
    }

    #[test]
    fn crossing_outside_posts_is_no_goal() {
        let phys = Physics::default();
        let mut s = quiet_state();
        s.ball = BallState { position: Vec2::new(52.4, 10.0), velocity: Vec2::new(0.5, 0.0) };
        let (next, report) = step(&s, &NONE, &phys, 0);
        assert_eq!(report.goal, None);
        assert!(next.ball.position.x < phys.half_length);
        assert_eq!(next.ball.velocity, Vec2::ZERO);
    }

    #[test]
    fn kick_out_of_reach_is_counted_and_ignored() {
        let phys = Physics::default();
        let s = quiet_state();
        let mut cmds = NONE;
        cmds[3] = Command::Kick { power: 100.0, dir: 0.0 };
        let (next, report) = step(&s, &cmds, &phys, 0);
        assert_eq!(report.illegal_kicks, 1);
        assert_eq!(next.ball.velocity, Vec2::ZERO);
    }

    #[test]
    fn kick_sets_ball_speed_from_power() {
        let phys = Physics::default();
        let mut s = quiet_state();
        s.players[9].position = Vec2::new(-0.5, 0.0);
        let mut cmds = NONE;
        cmds[9] = Command::Kick { power: 50.0, dir: 0.0 };
        let (next, _) = step(&s, &cmds, &phys, 0);
        assert!((next.ball.position.x - 1.5).abs() < 1e-12);
        assert!((next.ball.velocity.x - 1.5 * 0.94).abs() < 1e-12);
    }

    #[test]
    fn right_team_kicks_in_its_own_frame() {
        let phys = Physics::default();
        let mut s = quiet_state();
        s.players[11 + 9].position = Vec2::new(0.5, 0.0);
        let mut cmds = NONE;
        cmds[11 + 9] = Command::Kick { power: 100.0, dir: 0.0 };
        let (next, _) = step(&s, &cmds, &phys, 0);
        assert!(next.ball.velocity.x < 0.0);
    }

    #[test]
    fn contested_ball_goes_to_the_closer_kicker() {
        let phys = Physics::default();
        let mut s = quiet_state();
        s.players[9].position = Vec2::new(-0.3, 0.0);
        s.players[11 + 9].position = Vec2::new(0.5, 0.0);
        let mut cmds = NONE;
        cmds[9] = Command::Kick { power: 50.0, dir: 0.0 };
        cmds[11 + 9] = Command::Kick { power: 100.0, dir: 0.0 };
        let (next, _) = step(&s, &cmds, &phys, 0);
        assert!((next.ball.position.x - 1.5).abs() < 1e-12);
        // Equal distances: the kicks cancel.
        s.players[11 + 9].position = Vec2::new(0.3, 0.0);
        cmds[11 + 9] = Command::Kick { power: 50.0, dir: 0.0 };
        let (next, _) = step(&s, &cmds, &phys, 0);
        assert_eq!(next.ball.position, Vec2::ZERO);
    }

    #[test]
    fn dash_respects_speed_cap_and_stamina() {
        let phys = Physics::default();
        let mut s = quiet_state();
        s.players[5].stamina = 0.0;
        let mut cmds = NONE;
        cmds[4] = Command::Dash { power: 100.0, dir: 0.0 };
        cmds[5] = Command::Dash { power: 100.0, dir: 0.0 };
        let (mut next, _) = step(&s, &cmds, &phys, 0);
        for _ in 0..5 {
            next = step(&next, &cmds, &phys, 0).0;
        }
        let moved = next.players[4].position.dist(s.players[4].position);
        assert!((moved - 6.0 * 1.05).abs() < 1e-9, "moved {moved}");
        // Zero stamina disables the first dash; recovery then allows later ones.
        assert!(next.players[5].position.dist(s.players[5].position) < moved);
    }

    #[test]
    fn mirrored_is_an_involution() {
        let s = WorldState::kickoff(&Physics::default(), Side::Left, 3);
        assert_eq!(s.mirrored().mirrored(), s);
    }

    #[test]
    fn validate_rejects_wrong_slot() {
        let mut s = WorldState::new(Vec2::ZERO);
        s.players.swap(0, 1);
        assert!(s.validate(&Physics::default()).is_err());
    }
}
