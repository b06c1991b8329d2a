//! Tunable constants for the simulator and the decision modules.
//!
//! Everything here serializes with `#[serde(default)]` so a config file only
//! needs to mention the values it overrides.

use serde::{Deserialize, Serialize};

/// Simulator constants. Defaults follow the standard soccer server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Physics {
    pub half_length: f64,
    pub half_width: f64,
    pub goal_half_width: f64,
    /// Players may stray this far past the lines.
    pub out_of_bounds_slack: f64,
    pub ball_decay: f64,
    pub ball_speed_max: f64,
    pub player_decay: f64,
    pub player_speed_max: f64,
    /// Acceleration of a full-power dash, m/cycle^2.
    pub dash_accel_max: f64,
    pub kickable_area: f64,
    /// Chance that the ball owner keeps the ball when both teams kick it in
    /// the same cycle.
    pub contest_keep_prob: f64,
    /// Heading changes above this cost a whole turn cycle.
    pub turn_threshold: f64,
    pub stamina_max: f64,
    pub stamina_recovery: f64,
    /// Interception searches give up after this many cycles.
    pub intercept_horizon: u32,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            half_length: 52.5,
            half_width: 34.0,
            goal_half_width: 7.01,
            out_of_bounds_slack: 2.0,
            ball_decay: 0.94,
            ball_speed_max: 3.0,
            player_decay: 0.4,
            player_speed_max: 1.05,
            dash_accel_max: 1.05,
            kickable_area: 1.085,
            contest_keep_prob: 0.8,
            turn_threshold: 30.0,
            stamina_max: 8000.0,
            stamina_recovery: 45.0,
            intercept_horizon: 50,
        }
    }
}

/// Behaviour constants shared by the planner, defense and unmarking logic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tactics {
    /// Radius around the opponent goal inside which states earn a bonus.
    pub goal_bonus_radius: f64,
    pub lead_distance: f64,
    /// Ball speed left when a pass reaches its target point.
    pub pass_end_speed: f64,
    pub max_pass_distance: f64,
    /// Mean ball speed the planner's predictor assumes for passes.
    pub pass_speed: f64,
    pub dribble_step: f64,
    pub dribble_speed: f64,
    pub shoot_range: f64,
    pub shot_clearance: f64,
    pub block_curve_radius: f64,
    pub block_curve_horizon: u32,
    pub block_rechoose_period: u32,
    pub block_home_radius: f64,
    /// Fraction of `Physics::stamina_max` a blocker must have left.
    pub stamina_floor: f64,
    pub mark_distance: f64,
    pub mark_home_radius: f64,
    pub unmark_step: f64,
    pub unmark_home_radius: f64,
    pub unmark_clearance: f64,
    pub unmark_pass_radius: f64,
    pub w_open: f64,
    pub open_cap: f64,
    /// Unmarkers recompute their target every this many cycles.
    pub unmark_period: u32,
    pub prob_limit: f64,
}

impl Default for Tactics {
    fn default() -> Self {
        Self {
            goal_bonus_radius: 40.0,
            lead_distance: 3.0,
            pass_end_speed: 1.2,
            max_pass_distance: 40.0,
            pass_speed: 2.5,
            dribble_step: 3.0,
            dribble_speed: 0.7,
            shoot_range: 20.0,
            shot_clearance: 2.0,
            block_curve_radius: 3.0,
            block_curve_horizon: 30,
            block_rechoose_period: 5,
            block_home_radius: 15.0,
            stamina_floor: 0.3,
            mark_distance: 2.0,
            mark_home_radius: 12.0,
            unmark_step: 1.5,
            unmark_home_radius: 10.0,
            unmark_clearance: 3.0,
            unmark_pass_radius: 1.5,
            w_open: 0.5,
            open_cap: 10.0,
            unmark_period: 5,
            prob_limit: 0.1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub physics: Physics,
    pub tactics: Tactics,
}
