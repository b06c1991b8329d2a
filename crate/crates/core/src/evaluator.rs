//! State valuation for the ball-holding team.
//!
//! The field value rewards ball progress along the attack axis plus a bonus
//! for proximity to the opponent goal. The offensive-risk (ORE) table then
//! subtracts a penalty indexed by how many cycles the fastest opponent needs
//! to reach the ball.

use serde::{Deserialize, Serialize};

use crate::config::Params;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::world::{ball_trajectory, cycles_to_trajectory, Side, WorldState};

pub const ORE_LEN: usize = 7;
pub const ORE_MAX: f64 = 50.0;

/// Seven non-increasing penalties in `[0, 50]`; entry `i` applies when the
/// fastest opponent reaches the ball in `i` cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; ORE_LEN]", into = "[f64; ORE_LEN]")]
pub struct OreTable([f64; ORE_LEN]);

impl OreTable {
    pub const ZERO: OreTable = OreTable([0.0; ORE_LEN]);

    pub fn new(penalties: [f64; ORE_LEN]) -> Result<Self> {
        for (i, &v) in penalties.iter().enumerate() {
            if !(0.0..=ORE_MAX).contains(&v) {
                return Err(Error::InvalidOreTable(format!("entry {i} = {v} outside [0, {ORE_MAX}]")));
            }
            if i > 0 && v > penalties[i - 1] {
                return Err(Error::InvalidOreTable(format!(
                    "entry {i} = {v} exceeds entry {} = {}",
                    i - 1,
                    penalties[i - 1]
                )));
            }
        }
        Ok(Self(penalties))
    }

    pub fn penalties(&self) -> &[f64; ORE_LEN] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

impl Default for OreTable {
    fn default() -> Self {
        Self::ZERO
    }
}

impl TryFrom<[f64; ORE_LEN]> for OreTable {
    type Error = Error;
    fn try_from(v: [f64; ORE_LEN]) -> Result<Self> {
        Self::new(v)
    }
}

impl From<OreTable> for [f64; ORE_LEN] {
    fn from(t: OreTable) -> Self {
        t.0
    }
}

/// Value of a ball at `p`, with `p` already in the attacker's frame.
pub fn oriented_point_value(p: Vec2, params: &Params) -> f64 {
    let goal = Vec2::new(params.physics.half_length, 0.0);
    p.x + (params.tactics.goal_bonus_radius - p.dist(goal)).max(0.0)
}

/// Field value of `state` for the team attacking as `side`. Depends only on
/// the ball position.
pub fn field_value(state: &WorldState, side: Side, params: &Params) -> f64 {
    oriented_point_value(side.orient(state.ball.position), params)
}

/// Field value of a ball at `point` for the team attacking as `side`.
pub fn point_value(point: Vec2, side: Side, params: &Params) -> f64 {
    oriented_point_value(side.orient(point), params)
}

/// Value of a ball at `point` from the point of view of whoever attacks
/// `defending_side`'s goal: larger means more dangerous for the defenders.
pub fn reversed_field_value(point: Vec2, defending_side: Side, params: &Params) -> f64 {
    oriented_point_value(defending_side.opposite().orient(point), params)
}

pub fn ore_penalty(table: &OreTable, opponent_cycles: u32) -> f64 {
    table.0.get(opponent_cycles as usize).copied().unwrap_or(0.0)
}

/// Cycles the fastest player of the team opposing `side` needs to reach the
/// ball (capped at the interception horizon).
pub fn fastest_opponent_cycles(state: &WorldState, side: Side, params: &Params) -> u32 {
    let phys = &params.physics;
    let trajectory = ball_trajectory(phys, &state.ball, phys.intercept_horizon);
    state
        .team(side.opposite())
        .iter()
        .map(|p| cycles_to_trajectory(phys, p, &trajectory))
        .min()
        .unwrap_or(phys.intercept_horizon)
}

/// Field value minus the ORE penalty for the fastest opponent.
pub fn evaluate_state(state: &WorldState, side: Side, table: &OreTable, params: &Params) -> f64 {
    let base = field_value(state, side, params);
    if table.is_zero() {
        return base;
    }
    base - ore_penalty(table, fastest_opponent_cycles(state, side, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{BallState, PlayerState};

    fn empty_field_with_ball(x: f64, y: f64) -> WorldState {
        let mut s = WorldState::new(Vec2::ZERO);
        // Far corner, out of everybody's way.
        for p in &mut s.players {
            p.position = Vec2::new(-50.0, -33.0);
        }
        s.ball = BallState { position: Vec2::new(x, y), velocity: Vec2::ZERO };
        s
    }

    #[test]
    fn field_value_examples() {
        let params = Params::default();
        let at_goal = empty_field_with_ball(52.5, 0.0);
        assert_eq!(field_value(&at_goal, Side::Left, &params), 92.5);
        let own_goal = empty_field_with_ball(-52.5, 0.0);
        assert_eq!(field_value(&own_goal, Side::Left, &params), -52.5);
        // Right attacks -x: the left goal is its target.
        assert_eq!(field_value(&own_goal, Side::Right, &params), 92.5);
    }

    #[test]
    fn field_value_ignores_players() {
        let params = Params::default();
        let a = empty_field_with_ball(10.0, 5.0);
        let mut b = a.clone();
        b.players[3].position = Vec2::new(9.0, 5.0);
        b.players.swap(14, 15);
        assert_eq!(field_value(&a, Side::Left, &params), field_value(&b, Side::Left, &params));
    }

    #[test]
    fn reversed_value_peaks_at_defended_goal() {
        let params = Params::default();
        assert_eq!(reversed_field_value(Vec2::new(-52.5, 0.0), Side::Left, &params), 92.5);
        assert_eq!(reversed_field_value(Vec2::new(52.5, 0.0), Side::Right, &params), 92.5);
        // Retreating away from the defended goal only ever loses value.
        let mut last = f64::INFINITY;
        for i in 0..=100 {
            let v = reversed_field_value(Vec2::new(-52.5 + i as f64, 3.0), Side::Left, &params);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn ore_penalty_examples() {
        let t = OreTable::new([10.0, 9.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(ore_penalty(&t, 0), 10.0);
        assert_eq!(ore_penalty(&t, 6), 1.0);
        assert_eq!(ore_penalty(&t, 7), 0.0);
        assert_eq!(ore_penalty(&t, 100), 0.0);
    }

    #[test]
    fn table_validation() {
        assert!(OreTable::new([10.0, 18.0, 5.0, 4.0, 3.0, 2.0, 1.0]).is_err());
        assert!(OreTable::new([51.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(serde_json::from_str::<OreTable>("[1,2,0,0,0,0,0]").is_err());
        let t: OreTable = serde_json::from_str("[3,2,1,0,0,0,0]").unwrap();
        assert_eq!(serde_json::to_string(&t).unwrap(), "[3.0,2.0,1.0,0.0,0.0,0.0,0.0]");
    }

    #[test]
    fn evaluate_state_examples() {
        let params = Params::default();
        let table = OreTable::new([10.0, 9.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let mut s = empty_field_with_ball(20.0, 0.0);
        let fv = field_value(&s, Side::Left, &params);
        assert_eq!(evaluate_state(&s, Side::Left, &OreTable::ZERO, &params), fv);
        // All opponents 70 m away: nobody within the horizon.
        assert_eq!(evaluate_state(&s, Side::Left, &table, &params), fv);
        s.players[11 + 4] = PlayerState::new(Side::Right, 5, Vec2::new(20.5, 0.0));
        assert_eq!(evaluate_state(&s, Side::Left, &table, &params), fv - 10.0);
    }
}
