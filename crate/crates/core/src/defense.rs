//! Blocking: predict where the opponent ball holder will dribble and send
//! exactly one defender to the earliest point on that path it can reach
//! first. Everybody else marks.

use serde::{Deserialize, Serialize};

use crate::config::Params;
use crate::error::{Error, Result};
use crate::evaluator::reversed_field_value;
use crate::geom::Vec2;
use crate::world::{
    ball_trajectory, cycles_to_trajectory, min_cycles_to_point, restart_point, PlayerId, Side, WorldState, GOALIE,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub cycle: u32,
    pub position: Vec2,
}

/// Predicted ball path of an opponent dribble, one point per cycle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DribbleCurve {
    pub points: Vec<CurvePoint>,
}

/// Earliest cycle and ball position at which any attacker (the team opposing
/// `defending`) can kick the ball.
pub fn predict_first_kick_point(state: &WorldState, defending: Side, params: &Params) -> Result<(u32, Vec2)> {
    let phys = &params.physics;
    let trajectory = in_play_trajectory(state, params);
    let cycles = state
        .team(defending.opposite())
        .iter()
        .map(|p| cycles_to_trajectory(phys, p, &trajectory))
        .min()
        .unwrap_or(phys.intercept_horizon);
    if cycles >= phys.intercept_horizon {
        return Err(Error::NoOwner);
    }
    Ok((cycles, trajectory[cycles as usize]))
}

/// Free ball path, except that once it leaves the field it rests where the
/// world restarts play.
fn in_play_trajectory(state: &WorldState, params: &Params) -> Vec<Vec2> {
    let phys = &params.physics;
    let mut trajectory = ball_trajectory(phys, &state.ball, phys.intercept_horizon);
    if let Some(out) = trajectory.iter().position(|&p| !in_field(p, params)) {
        let restart = restart_point(phys, trajectory[out]);
        trajectory[out..].fill(restart);
    }
    trajectory
}

fn in_field(p: Vec2, params: &Params) -> bool {
    p.x.abs() <= params.physics.half_length && p.y.abs() <= params.physics.half_width
}

/// Unit direction (world frame) towards the most dangerous of ten points
/// around `from`, or `None` when all of them are off the field.
fn dribble_direction(from: Vec2, defending: Side, params: &Params) -> Option<Vec2> {
    let attacker = defending.opposite();
    let radius = params.tactics.block_curve_radius;
    let mut best: Option<(f64, Vec2)> = None;
    for k in 0..10 {
        let dir = attacker.orient(Vec2::from_angle(f64::from(k) * 36.0));
        let candidate = from + dir * radius;
        if !in_field(candidate, params) {
            continue;
        }
        let value = reversed_field_value(candidate, defending, params);
        if best.is_none_or(|(v, _)| value > v) {
            best = Some((value, dir));
        }
    }
    best.map(|(_, dir)| dir)
}

/// Dribble path from the first kick point: `dribble_speed` meters per cycle
/// towards the most dangerous neighbouring point, re-aimed every
/// `block_rechoose_period` cycles, for at most `horizon` steps and never
/// leaving the field.
pub fn dribble_curve(state: &WorldState, defending: Side, horizon: u32, params: &Params) -> Result<DribbleCurve> {
    let tac = &params.tactics;
    let (start_cycle, start) = predict_first_kick_point(state, defending, params)?;
    let mut points = vec![CurvePoint { cycle: start_cycle, position: start }];
    let mut dir = Vec2::ZERO;
    let mut cur = start;
    for i in 0..horizon {
        if i % tac.block_rechoose_period.max(1) == 0 {
            match dribble_direction(cur, defending, params) {
                Some(d) => dir = d,
                None => break,
            }
        }
        let next = cur + dir * tac.dribble_speed;
        if !in_field(next, params) {
            break;
        }
        cur = next;
        points.push(CurvePoint { cycle: start_cycle + i + 1, position: cur });
    }
    Ok(DribbleCurve { points })
}

/// Earliest curve point `defender` reaches no later than the dribbler.
pub fn find_block_point(state: &WorldState, defender: PlayerId, curve: &DribbleCurve, params: &Params) -> Option<CurvePoint> {
    let player = state.player(defender);
    curve
        .points
        .iter()
        .find(|pt| min_cycles_to_point(&params.physics, player, pt.position) <= pt.cycle)
        .copied()
}

/// True when the team opposing `side` gets to the ball strictly first.
pub fn opponent_owns_ball(state: &WorldState, side: Side, params: &Params) -> bool {
    let phys = &params.physics;
    let trajectory = ball_trajectory(phys, &state.ball, phys.intercept_horizon);
    let fastest = |s: Side| {
        state
            .team(s)
            .iter()
            .map(|p| cycles_to_trajectory(phys, p, &trajectory))
            .min()
            .unwrap_or(phys.intercept_horizon)
    };
    fastest(side.opposite()) < fastest(side)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blocker {
    pub unum: u8,
    pub point: CurvePoint,
}

/// The single outfield player of `side` that should block: minimal block
/// cycle among those whose block point is near home and who have stamina to
/// spare, lower uniform number on ties.
pub fn elect_blocker(state: &WorldState, side: Side, curve: &DribbleCurve, params: &Params) -> Option<Blocker> {
    let tac = &params.tactics;
    let floor = tac.stamina_floor * params.physics.stamina_max;
    state
        .team(side)
        .iter()
        .filter(|p| p.uniform_number != GOALIE && p.stamina >= floor)
        .filter_map(|p| {
            let point = find_block_point(state, p.id(), curve, params)?;
            (point.position.dist(p.home_position) <= tac.block_home_radius)
                .then_some(Blocker { unum: p.uniform_number, point })
        })
        .min_by_key(|b| (b.point.cycle, b.unum))
}

/// Where `me` should go to block, if `me` is the elected blocker.
pub fn blocking_decision(state: &WorldState, me: PlayerId, params: &Params) -> Option<Vec2> {
    if !opponent_owns_ball(state, me.side, params) {
        return None;
    }
    let curve = dribble_curve(state, me.side, params.tactics.block_curve_horizon, params).ok()?;
    elect_blocker(state, me.side, &curve, params)
        .filter(|b| b.unum == me.unum)
        .map(|b| b.point.position)
}

/// Shadow-marking targets for the outfield players of `side` not listed in
/// `busy`: each, in uniform-number order, takes the nearest unclaimed
/// opponent near its home and stands `mark_distance` meters from it on the
/// line to the ball. Players without a mark go home.
pub fn marking_targets(state: &WorldState, side: Side, busy: &[u8], params: &Params) -> Vec<(u8, Vec2)> {
    let tac = &params.tactics;
    let ball = state.ball.position;
    let opponents = state.team(side.opposite());
    // The opponent on the ball is the blocker's or interceptor's business.
    let on_ball = opponents
        .iter()
        .min_by(|a, b| a.position.dist(ball).total_cmp(&b.position.dist(ball)))
        .map(|p| p.uniform_number);
    let mut claimed = vec![false; opponents.len()];
    let mut out = Vec::new();
    for p in state.team(side) {
        if p.uniform_number == GOALIE || busy.contains(&p.uniform_number) {
            continue;
        }
        let pick = opponents
            .iter()
            .enumerate()
            .filter(|(i, o)| !claimed[*i] && Some(o.uniform_number) != on_ball)
            .filter(|(_, o)| o.position.dist(p.home_position) <= tac.mark_home_radius)
            .min_by(|(_, a), (_, b)| {
                a.position.dist(p.home_position).total_cmp(&b.position.dist(p.home_position))
            });
        let target = match pick {
            Some((i, o)) => {
                claimed[i] = true;
                o.position + (ball - o.position).normalized() * tac.mark_distance
            }
            None => p.home_position,
        };
        out.push((p.uniform_number, target));
    }
    out
}
