//! Off-ball movement: a teammate of the ball possessor looks for a nearby
//! open spot that the possessor can safely pass to.

use serde::{Deserialize, Serialize};

use crate::config::Params;
use crate::evaluator::point_value;
use crate::geom::Vec2;
use crate::planner::{kickable_holder, pass_reaches_first};
use crate::world::{ball_trajectory, cycles_to_trajectory, PlayerId, PlayerState, Side, WorldState};

/// Directions and distances in the candidate grid.
pub const GRID_DIRECTIONS: usize = 10;
pub const GRID_DISTANCES: usize = 10;
const RECEIVE_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnmarkTarget {
    pub position: Vec2,
    pub score: f64,
    pub feasible_pass_count: u8,
    /// Grid coordinates: direction index `0..10`, distance index `0..10`.
    pub angle_index: u8,
    pub distance_index: u8,
}

/// Uniform number of the fastest player of `side` to the ball, with its cycle
/// count. Lower uniform numbers win ties.
fn fastest_to_ball(state: &WorldState, side: Side, params: &Params) -> (u32, u8) {
    let phys = &params.physics;
    let trajectory = ball_trajectory(phys, &state.ball, phys.intercept_horizon);
    state
        .team(side)
        .iter()
        .map(|p| (cycles_to_trajectory(phys, p, &trajectory), p.uniform_number))
        .min()
        .unwrap_or((phys.intercept_horizon, 1))
}

/// The ball possessor of `side`: the kickable player, otherwise the fastest
/// teammate to the ball. `None` when the opponents get there strictly first.
pub fn team_possessor(state: &WorldState, side: Side, params: &Params) -> Option<u8> {
    if let Some(holder) = kickable_holder(state, side, params) {
        return Some(holder.unum);
    }
    let (ours, unum) = fastest_to_ball(state, side, params);
    let (theirs, _) = fastest_to_ball(state, side.opposite(), params);
    (ours <= theirs && ours < params.physics.intercept_horizon).then_some(unum)
}

/// Passer for `me` to unmark for: the team possessor, unless that is `me`.
pub fn select_passer_v10(state: &WorldState, me: PlayerId, params: &Params) -> Option<PlayerId> {
    team_possessor(state, me.side, params)
        .filter(|&u| u != me.unum)
        .map(|u| PlayerId::new(me.side, u))
}

fn in_field(p: Vec2, params: &Params) -> bool {
    p.x.abs() <= params.physics.half_length && p.y.abs() <= params.physics.half_width
}

/// Every grid point around `me` before filtering, in (direction, distance)
/// order.
pub fn candidate_grid(state: &WorldState, me: PlayerId, params: &Params) -> Vec<UnmarkTarget> {
    let player = state.player(me);
    let team_velocity = me.side.orient(player.velocity);
    let axis = if team_velocity.length() > 0.1 { team_velocity.angle() } else { 0.0 };
    let mut out = Vec::with_capacity(GRID_DIRECTIONS * GRID_DISTANCES);
    for a in 0..GRID_DIRECTIONS {
        let dir = axis + 36.0 * a as f64;
        for d in 0..GRID_DISTANCES {
            let offset = Vec2::polar(params.tactics.unmark_step * (d + 1) as f64, dir);
            out.push(UnmarkTarget {
                position: player.position + me.side.orient(offset),
                score: f64::NEG_INFINITY,
                feasible_pass_count: 0,
                angle_index: a as u8,
                distance_index: d as u8,
            });
        }
    }
    out
}

/// Grid points that are in the field, near home and clear of every other
/// player. Scores are left unset.
pub fn generate_targets(state: &WorldState, me: PlayerId, params: &Params) -> Vec<UnmarkTarget> {
    let tac = &params.tactics;
    let home = state.player(me).home_position;
    candidate_grid(state, me, params)
        .into_iter()
        .filter(|t| in_field(t.position, params))
        .filter(|t| t.position.dist(home) <= tac.unmark_home_radius)
        .filter(|t| {
            state
                .players
                .iter()
                .filter(|p| p.id() != me)
                .all(|p| p.position.dist(t.position) >= tac.unmark_clearance)
        })
        .collect()
}

/// Score of standing at `target`, and how many of the eight lead passes
/// around it would arrive. `-inf` when none would.
pub fn score_target(state: &WorldState, passer: PlayerId, me: PlayerId, target: Vec2, params: &Params) -> (f64, u8) {
    let side = me.side;
    let passer_state = state.player(passer);
    let origin = if kickable_holder(state, side, params) == Some(passer) {
        state.ball.position
    } else {
        passer_state.position
    };
    let mut receiver = PlayerState { position: target, velocity: Vec2::ZERO, ..state.player(me).clone() };
    receiver.body_direction = receiver.heading_to(origin);

    let mut total = 0.0;
    let mut feasible = 0u8;
    for receive in receive_points(target, side, params) {
        if !pass_reaches_first(state, side, &receiver, origin, receive, params) {
            continue;
        }
        total += point_value(receive, side, params);
        feasible += 1;
    }
    if feasible == 0 {
        return (f64::NEG_INFINITY, 0);
    }
    (total / f64::from(feasible) + openness(state, side, target, params), feasible)
}

/// In-field receive points around `target`.
fn receive_points(target: Vec2, side: Side, params: &Params) -> impl Iterator<Item = Vec2> + '_ {
    (0..RECEIVE_POINTS)
        .map(move |k| target + side.orient(Vec2::polar(params.tactics.unmark_pass_radius, 45.0 * k as f64)))
        .filter(|&p| in_field(p, params))
}

fn openness(state: &WorldState, side: Side, target: Vec2, params: &Params) -> f64 {
    let tac = &params.tactics;
    let nearest = state.team(side.opposite()).iter().map(|p| p.position.dist(target)).fold(f64::INFINITY, f64::min);
    tac.w_open * nearest.min(tac.open_cap)
}

/// Bound on `score_target` that skips the pass checks: every feasible lane
/// is assumed to score like the best receive point.
fn score_bound(state: &WorldState, side: Side, target: Vec2, params: &Params) -> f64 {
    let best = receive_points(target, side, params).map(|p| point_value(p, side, params)).fold(f64::NEG_INFINITY, f64::max);
    // Slack covers rounding in the exact mean.
    best + 1e-9 * (1.0 + best.abs()) + openness(state, side, target, params)
}

/// Filtered targets with their scores filled in.
pub fn scored_targets(state: &WorldState, me: PlayerId, passer: PlayerId, params: &Params) -> Vec<UnmarkTarget> {
    generate_targets(state, me, params)
        .into_iter()
        .map(|mut t| {
            (t.score, t.feasible_pass_count) = score_target(state, passer, me, t.position, params);
            t
        })
        .collect()
}

/// Best finite-scored target; ties go to the target nearer to `me`, then to
/// the lower direction index.
pub fn best_unmark_target(state: &WorldState, me: PlayerId, passer: PlayerId, params: &Params) -> Option<UnmarkTarget> {
    let here = state.player(me).position;
    // Exact scores only for targets whose bound can still match the best.
    let mut bounded: Vec<(f64, UnmarkTarget)> = generate_targets(state, me, params)
        .into_iter()
        .map(|t| (score_bound(state, me.side, t.position, params), t))
        .collect();
    bounded.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best: Option<UnmarkTarget> = None;
    for (bound, mut t) in bounded {
        if best.is_some_and(|b| bound < b.score) {
            break;
        }
        (t.score, t.feasible_pass_count) = score_target(state, passer, me, t.position, params);
        if !t.score.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                t.score > b.score
                    || (t.score == b.score
                        && (t.position.dist(here), t.angle_index) < (b.position.dist(here), b.angle_index))
            }
        };
        if better {
            best = Some(t);
        }
    }
    best
}

pub fn choose_unmark_target(state: &WorldState, me: PlayerId, passer: PlayerId, params: &Params) -> Option<Vec2> {
    best_unmark_target(state, me, passer, params).map(|t| t.position)
}
