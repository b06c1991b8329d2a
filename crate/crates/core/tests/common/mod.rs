//! Random states and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use chainball::geom::{angle_diff, Vec2};
use chainball::passnet::{Activation, Layer, MlpWeights};
use chainball::planner::{ChainModel, SearchBudget};
use chainball::world::{BallState, PlayerId, PlayerState, Side, WorldState};
use chainball::{Params, Physics};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point<R: Rng>(rng: &mut R, phys: &Physics) -> Vec2 {
    Vec2::new(
        rng.gen_range(-phys.half_length..=phys.half_length),
        rng.gen_range(-phys.half_width..=phys.half_width),
    )
}

/// Every player somewhere on the field, random body directions and
/// stamina, ball at rest or rolling up to full speed.
pub fn random_state<R: Rng>(rng: &mut R, phys: &Physics) -> WorldState {
    let mut s = WorldState::new(Vec2::ZERO);
    for p in &mut s.players {
        p.position = random_point(rng, phys);
        p.home_position = random_point(rng, phys);
        p.body_direction = rng.gen_range(-180.0..180.0);
        p.stamina = rng.gen_range(0.0..=phys.stamina_max);
    }
    s.ball.position = random_point(rng, phys);
    if rng.gen_bool(0.7) {
        s.ball.velocity = Vec2::polar(rng.gen_range(0.0..=phys.ball_speed_max), rng.gen_range(-180.0..180.0));
    }
    s
}

/// Exhaustive scan: walk the ball cycle by cycle and ask, for each cycle,
/// whether the player could be standing there by then.
pub fn interception_oracle(phys: &Physics, player: &PlayerState, ball: &BallState) -> u32 {
    let mut pos = ball.position;
    let mut vel = ball.velocity;
    for c in 0..phys.intercept_horizon {
        if point_cycles_oracle(phys, player, pos) <= c {
            return c;
        }
        pos += vel;
        vel = vel * phys.ball_decay;
    }
    phys.intercept_horizon
}

/// Cycles to a fixed point by counting dashes one at a time.
pub fn point_cycles_oracle(phys: &Physics, player: &PlayerState, target: Vec2) -> u32 {
    let dist = player.position.dist(target);
    if dist <= phys.kickable_area {
        return 0;
    }
    let mut dashes = 1;
    while f64::from(dashes) * phys.player_speed_max + 1e-9 < dist {
        dashes += 1;
    }
    let turn = angle_diff(player.body_direction, player.heading_to(target)) > phys.turn_threshold;
    dashes + u32::from(turn)
}

/// Toy search domain: states are action paths, branching and values come
/// from a seeded hash of the path.
pub struct Toy {
    pub seed: u64,
    pub max_branch: usize,
}

fn mix(seed: u64, path: &[usize]) -> u64 {
    path.iter().fold(seed ^ 0x9E37_79B9_7F4A_7C15, |h, &a| {
        let z = (h ^ (a as u64 + 1)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z ^ (z >> 29)
    })
}

impl Toy {
    pub fn branching(&self, path: &[usize]) -> usize {
        1 + (mix(self.seed, path) % self.max_branch as u64) as usize
    }

    pub fn value(&self, path: &[usize]) -> f64 {
        rng(mix(self.seed.wrapping_add(17), path)).gen_range(-10.0..10.0)
    }

    /// First action of the best path of length 1 or 2, by enumeration.
    pub fn brute_force(&self) -> usize {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for a in 0..self.branching(&[]) {
            let v = self.value(&[a]);
            if v > best.0 {
                best = (v, a);
            }
            for b in 0..self.branching(&[a]) {
                let v = self.value(&[a, b]);
                if v > best.0 {
                    best = (v, a);
                }
            }
        }
        best.1
    }

    pub fn full_budget(&self) -> SearchBudget {
        SearchBudget { max_nodes: self.max_branch * (self.max_branch + 1), max_depth: 2 }
    }
}

impl ChainModel for Toy {
    type State = Vec<usize>;
    type Action = usize;

    fn actions(&self, state: &Vec<usize>) -> Vec<usize> {
        (0..self.branching(state)).collect()
    }

    fn predict(&self, state: &Vec<usize>, action: &usize) -> Vec<usize> {
        let mut next = state.clone();
        next.push(*action);
        next
    }

    fn evaluate(&self, state: &Vec<usize>) -> f64 {
        self.value(state)
    }
}

/// A random state where `side` clearly owns a resting ball.
pub fn owned_state<R: Rng>(rng: &mut R, side: Side, params: &Params) -> WorldState {
    let phys = &params.physics;
    let mut s = random_state(rng, phys);
    s.ball.velocity = Vec2::ZERO;
    let holder = PlayerId::new(side, rng.gen_range(2..=11));
    s.ball.position = Vec2::new(rng.gen_range(-40.0..40.0), rng.gen_range(-25.0..25.0));
    s.player_mut(holder).position = s.ball.position + Vec2::polar(0.3, rng.gen_range(-180.0..180.0));
    for p in s.players.iter_mut().filter(|p| p.side != side) {
        if p.position.dist(s.ball.position) < 8.0 {
            p.position = Vec2::new(-p.position.x.signum() * 50.0, p.position.y);
        }
    }
    s
}

/// Dense network with random weights of the given size.
pub fn random_network<R: Rng>(rng: &mut R, dims: &[usize], scale: f64) -> MlpWeights {
    let layers = dims
        .windows(2)
        .enumerate()
        .map(|(i, w)| Layer {
            w: (0..w[1]).map(|_| (0..w[0]).map(|_| rng.gen_range(-scale..scale)).collect()).collect(),
            b: (0..w[1]).map(|_| rng.gen_range(-scale..scale)).collect(),
            act: if i + 2 == dims.len() { Activation::Softmax } else { Activation::Relu },
        })
        .collect();
    MlpWeights { schema_version: chainball::passnet::SCHEMA_VERSION, dims: dims.to_vec(), layers }
}
