//! Desk-scale 2D soccer simulation and decision engine.
//!
//! The crate is organised bottom-up:
//!
//! - [`world`]: noise-free kinematics, interception estimates and the match loop
//! - [`evaluator`]: state valuation with the offensive-risk penalty table
//! - [`planner`]: best-first chain-action search for the ball holder
//! - [`defense`]: dribble-curve prediction and single-blocker election
//! - [`unmark`]: off-ball target search for potential pass receivers
//! - [`passnet`]: pass-receiver features, dataset recording, MLP inference and pass trees
//! - [`ga`]: genetic tuning of the penalty table
//! - [`harness`]: agent configs, tournaments, dataset extraction and weights checks

pub mod agent;
pub mod config;
pub mod defense;
pub mod error;
pub mod evaluator;
pub mod ga;
pub mod geom;
pub mod harness;
pub mod passnet;
pub mod planner;
pub mod unmark;
pub mod world;

pub use config::{Params, Physics, Tactics};
pub use error::{Error, Result};
pub use geom::Vec2;
