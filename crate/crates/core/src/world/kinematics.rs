//! Reachability estimates: who gets to a point, or to a rolling ball, first.

use super::{BallState, PlayerState};
use crate::config::Physics;
use crate::geom::{angle_diff, Vec2};

/// Slack when comparing covered distance against a target distance.
const REACH_EPS: f64 = 1e-9;

pub fn is_kickable(phys: &Physics, player: &PlayerState, ball: &BallState) -> bool {
    player.position.dist(ball.position) <= phys.kickable_area
}

/// Smallest `k >= 1` with `k * speed` covering `dist`.
fn dash_cycles(dist: f64, speed: f64) -> u32 {
    let mut k = ((dist - REACH_EPS) / speed).ceil().max(1.0) as u32;
    while f64::from(k) * speed + REACH_EPS < dist {
        k += 1;
    }
    while k > 1 && f64::from(k - 1) * speed + REACH_EPS >= dist {
        k -= 1;
    }
    k
}

fn needs_turn(phys: &Physics, player: &PlayerState, target: Vec2) -> bool {
    angle_diff(player.body_direction, player.heading_to(target)) > phys.turn_threshold
}

/// Cycles for `player` to get to `target`: zero inside the kickable area,
/// otherwise an optional turn cycle plus full-speed dashes covering the
/// whole distance.
pub fn min_cycles_to_point(phys: &Physics, player: &PlayerState, target: Vec2) -> u32 {
    let dist = player.position.dist(target);
    if dist <= phys.kickable_area {
        return 0;
    }
    dash_cycles(dist, phys.player_speed_max) + u32::from(needs_turn(phys, player, target))
}

/// Ball position after `cycles` cycles without interference.
pub fn ball_position_at(phys: &Physics, ball: &BallState, cycles: u32) -> Vec2 {
    let mut pos = ball.position;
    let mut vel = ball.velocity;
    for _ in 0..cycles {
        pos += vel;
        vel = vel * phys.ball_decay;
    }
    pos
}

/// Ball positions for cycles `0..=cycles`.
pub fn ball_trajectory(phys: &Physics, ball: &BallState, cycles: u32) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(cycles as usize + 1);
    let mut pos = ball.position;
    let mut vel = ball.velocity;
    out.push(pos);
    for _ in 0..cycles {
        pos += vel;
        vel = vel * phys.ball_decay;
        out.push(pos);
    }
    out
}

/// Whether `player` can be on `point` within `c` cycles.
pub fn reaches_within(phys: &Physics, player: &PlayerState, point: Vec2, c: u32) -> bool {
    let run = f64::from(c) * phys.player_speed_max + REACH_EPS;
    // Conservative squared-distance reject; the exact tests follow.
    let bound = if c == 0 { phys.kickable_area } else { run.max(phys.kickable_area) };
    if (point - player.position).length_sq() > bound * bound * (1.0 + 1e-9) {
        return false;
    }
    let dist = player.position.dist(point);
    if dist <= phys.kickable_area {
        return true;
    }
    if c == 0 || run < dist {
        return false;
    }
    dash_cycles(dist, phys.player_speed_max) < c || !needs_turn(phys, player, point)
}

/// First index `c` of `trajectory` that `player` can reach within `c`
/// cycles, or `phys.intercept_horizon` when none can.
pub fn cycles_to_trajectory(phys: &Physics, player: &PlayerState, trajectory: &[Vec2]) -> u32 {
    let horizon = phys.intercept_horizon;
    (0..horizon)
        .zip(trajectory)
        .find(|&(c, &point)| reaches_within(phys, player, point, c))
        .map_or(horizon, |(c, _)| c)
}

/// Cycles until `player` can first touch the ball, capped at the
/// interception horizon (the cap means "out of reach").
pub fn min_cycles_to_moving_ball(phys: &Physics, player: &PlayerState, ball: &BallState) -> u32 {
    let trajectory = ball_trajectory(phys, ball, phys.intercept_horizon);
    cycles_to_trajectory(phys, player, &trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Side;

    fn player_at(x: f64, y: f64, body: f64) -> PlayerState {
        let mut p = PlayerState::new(Side::Left, 5, Vec2::new(x, y));
        p.body_direction = body;
        p
    }

    fn ball_at(x: f64, y: f64) -> BallState {
        BallState { position: Vec2::new(x, y), velocity: Vec2::ZERO }
    }

    #[test]
    fn kickable_boundary_is_inclusive() {
        let phys = Physics::default();
        let p = player_at(0.0, 0.0, 0.0);
        assert!(is_kickable(&phys, &p, &ball_at(0.0, 0.0)));
        assert!(is_kickable(&phys, &p, &ball_at(1.085, 0.0)));
        assert!(!is_kickable(&phys, &p, &ball_at(1.2, 0.0)));
    }

    #[test]
    fn cycles_to_point_examples() {
        let phys = Physics::default();
        let aligned = player_at(0.0, 0.0, 0.0);
        let reversed = player_at(0.0, 0.0, -180.0);
        assert_eq!(min_cycles_to_point(&phys, &aligned, Vec2::ZERO), 0);
        assert_eq!(min_cycles_to_point(&phys, &aligned, Vec2::new(10.5, 0.0)), 10);
        assert_eq!(min_cycles_to_point(&phys, &reversed, Vec2::new(10.5, 0.0)), 11);
    }

    #[test]
    fn right_side_heading_uses_team_frame() {
        let phys = Physics::default();
        let mut p = PlayerState::new(Side::Right, 5, Vec2::ZERO);
        p.body_direction = 0.0;
        // Body 0 in the right team's frame faces world -x.
        assert_eq!(min_cycles_to_point(&phys, &p, Vec2::new(-10.5, 0.0)), 10);
        assert_eq!(min_cycles_to_point(&phys, &p, Vec2::new(10.5, 0.0)), 11);
    }

    #[test]
    fn moving_ball_examples() {
        let phys = Physics::default();
        let p = player_at(0.0, 0.0, 0.0);
        assert_eq!(min_cycles_to_moving_ball(&phys, &p, &ball_at(0.5, 0.0)), 0);
        let far = player_at(-50.0, -30.0, 0.0);
        let runaway = BallState { position: Vec2::new(50.0, 30.0), velocity: Vec2::new(3.0, 0.0) };
        assert_eq!(min_cycles_to_moving_ball(&phys, &far, &runaway), 50);
    }

    #[test]
    fn ball_rolling_towards_player_is_reached_no_later() {
        let phys = Physics::default();
        let p = player_at(0.0, 0.0, 0.0);
        let still = ball_at(15.0, 0.0);
        let towards = BallState { velocity: Vec2::new(-1.0, 0.0), ..still };
        let away = BallState { velocity: Vec2::new(1.0, 0.0), ..still };
        let c_still = min_cycles_to_moving_ball(&phys, &p, &still);
        assert!(min_cycles_to_moving_ball(&phys, &p, &towards) <= c_still);
        assert!(min_cycles_to_moving_ball(&phys, &p, &away) >= c_still);
    }

    #[test]
    fn trajectory_matches_repeated_position_queries() {
        let phys = Physics::default();
        let ball = BallState { position: Vec2::new(1.0, 2.0), velocity: Vec2::new(2.0, -1.0) };
        let traj = ball_trajectory(&phys, &ball, 20);
        for (c, p) in traj.iter().enumerate() {
            assert_eq!(*p, ball_position_at(&phys, &ball, c as u32));
        }
    }
}
