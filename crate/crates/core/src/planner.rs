//! Chain-action planning for the ball holder.
//!
//! Candidate passes, dribbles and shots are generated from a state, a simple
//! predictor produces the resulting state for each, and a best-first search
//! keeps expanding the highest-valued unexpanded node. The holder executes the
//! first action on the path to the best node found.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::Params;
use crate::evaluator::{evaluate_state, OreTable};
use crate::geom::Vec2;
use crate::world::{
    is_kickable, min_cycles_to_point, reaches_within, BallState, PlayerId, PlayerState,
    Side, WorldState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    DirectPass,
    LeadPass,
    Dribble,
    Hold,
    Shoot,
}

impl ActionKind {
    pub fn is_pass(self) -> bool {
        matches!(self, ActionKind::DirectPass | ActionKind::LeadPass)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::DirectPass => "direct_pass",
            ActionKind::LeadPass => "lead_pass",
            ActionKind::Dribble => "dribble",
            ActionKind::Hold => "hold",
            ActionKind::Shoot => "shoot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionDescriptor {
    pub kind: ActionKind,
    pub kicker: PlayerId,
    pub target_point: Vec2,
    /// Set exactly for passes.
    pub receiver: Option<u8>,
    pub duration: u32,
}

impl ActionDescriptor {
    pub fn hold(kicker: PlayerId, ball: Vec2) -> Self {
        Self { kind: ActionKind::Hold, kicker, target_point: ball, receiver: None, duration: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Nodes created below the root.
    pub max_nodes: usize,
    pub max_depth: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_nodes: 300, max_depth: 4 }
    }
}

/// Nearest kickable player of `side`, lower uniform number on ties.
pub fn kickable_holder(state: &WorldState, side: Side, params: &Params) -> Option<PlayerId> {
    state
        .team(side)
        .iter()
        .filter(|p| is_kickable(&params.physics, p, &state.ball))
        .min_by(|a, b| {
            let da = a.position.dist(state.ball.position);
            let db = b.position.dist(state.ball.position);
            da.total_cmp(&db).then(a.uniform_number.cmp(&b.uniform_number))
        })
        .map(|p| p.id())
}

fn in_field(p: Vec2, params: &Params) -> bool {
    p.x.abs() <= params.physics.half_length && p.y.abs() <= params.physics.half_width
}

/// First-kick speed for a pass over `dist` meters.
pub fn pass_kick_speed(dist: f64, params: &Params) -> f64 {
    let phys = &params.physics;
    (params.tactics.pass_end_speed + dist * (1.0 - phys.ball_decay)).min(phys.ball_speed_max)
}

/// Cycles the predictor charges for a pass over `dist` meters.
fn pass_duration(dist: f64, params: &Params) -> u32 {
    ((dist / params.tactics.pass_speed).ceil() as u32).max(1)
}

fn dribble_duration(dist: f64, params: &Params) -> u32 {
    ((dist / params.tactics.dribble_speed).ceil() as u32).max(1)
}

/// True when `receiver` gets to a ball kicked from `origin` towards `target`
/// strictly before every opponent of `side`.
pub fn pass_reaches_first(
    state: &WorldState,
    side: Side,
    receiver: &PlayerState,
    origin: Vec2,
    target: Vec2,
    params: &Params,
) -> bool {
    let phys = &params.physics;
    let speed = pass_kick_speed(origin.dist(target), params);
    let mut pos = origin;
    let mut vel = (target - origin).normalized() * speed;
    TRAJECTORY.with_borrow_mut(|trajectory| {
        // Built only up to the receive cycle.
        trajectory.clear();
        let receive = (0..phys.intercept_horizon).find(|&c| {
            trajectory.push(pos);
            pos += vel;
            vel = vel * phys.ball_decay;
            reaches_within(phys, receiver, trajectory[c as usize], c)
        });
        let Some(receive) = receive else {
            return false;
        };
        let reach = f64::from(receive) * phys.player_speed_max + phys.kickable_area;
        let end = trajectory[receive as usize];
        // The kick is resolved before anybody else moves, so the scan starts
        // one cycle after it.
        state.team(side.opposite()).iter().all(|opp| {
            // Cheap reject before the exact scan.
            opp.position.dist_to_segment(origin, end) > reach
                || !(1..receive).any(|c| reaches_within(phys, opp, trajectory[c as usize], c))
        })
    })
}

thread_local! {
    static TRAJECTORY: std::cell::RefCell<Vec<Vec2>> = const { std::cell::RefCell::new(Vec::new()) };
}

/// Direct and lead passes from `holder` to every teammate that receives the
/// ball before any opponent.
pub fn generate_passes(state: &WorldState, holder: PlayerId, params: &Params) -> Vec<ActionDescriptor> {
    let side = holder.side;
    let origin = state.ball.position;
    let tac = &params.tactics;
    let mut out = Vec::new();
    for mate in state.team(side) {
        if mate.uniform_number == holder.unum {
            continue;
        }
        let direct = std::iter::once((ActionKind::DirectPass, mate.position));
        let leads = (0..8).map(|k| {
            let offset = side.orient(Vec2::polar(tac.lead_distance, f64::from(k) * 45.0));
            (ActionKind::LeadPass, mate.position + offset)
        });
        for (kind, target) in direct.chain(leads) {
            let dist = origin.dist(target);
            if !in_field(target, params) || dist > tac.max_pass_distance {
                continue;
            }
            if !pass_reaches_first(state, side, mate, origin, target, params) {
                continue;
            }
            out.push(ActionDescriptor {
                kind,
                kicker: holder,
                target_point: target,
                receiver: Some(mate.uniform_number),
                duration: pass_duration(dist, params),
            });
        }
    }
    out
}

/// Direct pass from `kicker` to teammate `receiver`, feasible or not.
pub fn direct_pass(state: &WorldState, kicker: PlayerId, receiver: u8, params: &Params) -> ActionDescriptor {
    let target = state.player(PlayerId::new(kicker.side, receiver)).position;
    ActionDescriptor {
        kind: ActionKind::DirectPass,
        kicker,
        target_point: target,
        receiver: Some(receiver),
        duration: pass_duration(state.ball.position.dist(target), params),
    }
}

/// Up to ten dribbles of `dribble_step` meters at 36-degree spacing.
pub fn generate_dribbles(state: &WorldState, holder: PlayerId, params: &Params) -> Vec<ActionDescriptor> {
    let side = holder.side;
    let tac = &params.tactics;
    let duration = dribble_duration(tac.dribble_step, params);
    (0..10)
        .filter_map(|k| {
            let target = state.ball.position + side.orient(Vec2::polar(tac.dribble_step, f64::from(k) * 36.0));
            if !in_field(target, params) {
                return None;
            }
            // An opponent arriving on the same cycle wins the contest often enough
            // that the dribble is treated as lost.
            let contested = state
                .team(side.opposite())
                .iter()
                .any(|opp| min_cycles_to_point(&params.physics, opp, target) <= duration);
            (!contested).then_some(ActionDescriptor {
                kind: ActionKind::Dribble,
                kicker: holder,
                target_point: target,
                receiver: None,
                duration,
            })
        })
        .collect()
}

/// Shots at three points of the goal mouth with a clear line.
pub fn generate_shots(state: &WorldState, holder: PlayerId, params: &Params) -> Vec<ActionDescriptor> {
    let side = holder.side;
    let phys = &params.physics;
    let tac = &params.tactics;
    let ball = state.ball.position;
    let goal = side.orient(Vec2::new(phys.half_length, 0.0));
    if ball.dist(goal) > tac.shoot_range {
        return Vec::new();
    }
    let spread = phys.goal_half_width * 0.7;
    [-spread, 0.0, spread]
        .into_iter()
        .filter_map(|y| {
            let target = side.orient(Vec2::new(phys.half_length, y));
            let blocked = state
                .team(side.opposite())
                .iter()
                .any(|opp| opp.position.dist_to_segment(ball, target) < tac.shot_clearance);
            (!blocked).then_some(ActionDescriptor {
                kind: ActionKind::Shoot,
                kicker: holder,
                target_point: target,
                receiver: None,
                duration: ((ball.dist(target) / phys.ball_speed_max).ceil() as u32).max(1),
            })
        })
        .collect()
}

/// Outcome of `action` under the planner's simple model: the ball jumps to
/// the target, the receiver (or dribbler) is placed on it and everybody else
/// drifts home at full speed for the action's duration.
pub fn predict(state: &WorldState, action: &ActionDescriptor, params: &Params) -> WorldState {
    let mut next = state.clone();
    next.cycle += u64::from(action.duration);
    if action.kind == ActionKind::Hold {
        return next;
    }
    next.ball = BallState { position: action.target_point, velocity: Vec2::ZERO };
    let carrier = match action.kind {
        ActionKind::DirectPass | ActionKind::LeadPass => {
            action.receiver.map(|r| PlayerId::new(action.kicker.side, r))
        }
        ActionKind::Dribble => Some(action.kicker),
        ActionKind::Shoot | ActionKind::Hold => None,
    };
    let travel = params.physics.player_speed_max * f64::from(action.duration);
    for p in &mut next.players {
        p.velocity = Vec2::ZERO;
        if Some(p.id()) == carrier {
            p.position = action.target_point;
            continue;
        }
        let to_home = p.home_position - p.position;
        let d = to_home.length();
        p.position = if d <= travel { p.home_position } else { p.position + to_home * (travel / d) };
    }
    next.ball_owner = carrier;
    next
}

/// A search domain: how to branch, transition and score states.
pub trait ChainModel {
    type State: Clone;
    type Action: Clone;

    fn actions(&self, state: &Self::State) -> Vec<Self::Action>;
    fn predict(&self, state: &Self::State, action: &Self::Action) -> Self::State;
    fn evaluate(&self, state: &Self::State) -> f64;
}

#[derive(Debug, Clone)]
pub struct ChainNode<S, A> {
    pub id: usize,
    pub parent: Option<usize>,
    pub state: S,
    pub incoming: Option<A>,
    pub value: f64,
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct SearchTree<S, A> {
    /// Node `i` has id `i`; node 0 is the root.
    pub nodes: Vec<ChainNode<S, A>>,
    /// Highest-valued non-root node, lower id on ties.
    pub best: Option<usize>,
}

impl<S, A: Clone> SearchTree<S, A> {
    /// The root child on the path to the best node.
    pub fn first_action(&self) -> Option<A> {
        let mut id = self.best?;
        while let Some(parent) = self.nodes[id].parent {
            if parent == 0 {
                break;
            }
            id = parent;
        }
        self.nodes[id].incoming.clone()
    }

    pub fn path_to_best(&self) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = self.best;
        while let Some(id) = cur {
            path.push(id);
            cur = self.nodes[id].parent;
        }
        path.reverse();
        path
    }
}

struct Frontier {
    value: f64,
    id: usize,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // Max-heap on value, then on lower id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(other.id.cmp(&self.id))
    }
}

/// Best-first expansion from `root`. Each step pops the unexpanded node with
/// the highest value (lower id on ties) and creates its children, until the
/// budget is spent or nothing expandable is left. When an expansion would
/// overrun the budget, only its highest-valued children are kept.
pub fn best_first_search<M: ChainModel>(model: &M, root: M::State, budget: SearchBudget) -> SearchTree<M::State, M::Action> {
    let root_value = model.evaluate(&root);
    let mut nodes = vec![ChainNode { id: 0, parent: None, state: root, incoming: None, value: root_value, depth: 0 }];
    let mut open = BinaryHeap::new();
    if budget.max_depth > 0 {
        open.push(Frontier { value: root_value, id: 0 });
    }
    let mut created = 0usize;
    while created < budget.max_nodes {
        let Some(Frontier { id, .. }) = open.pop() else { break };
        let depth = nodes[id].depth + 1;
        let mut children: Vec<(usize, M::Action, M::State, f64)> = model
            .actions(&nodes[id].state)
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                let s = model.predict(&nodes[id].state, &a);
                let v = model.evaluate(&s);
                (i, a, s, v)
            })
            .collect();
        let room = budget.max_nodes - created;
        if children.len() > room {
            children.sort_by(|a, b| b.3.total_cmp(&a.3).then(a.0.cmp(&b.0)));
            children.truncate(room);
            children.sort_by_key(|c| c.0);
        }
        for (_, action, state, value) in children {
            let child = nodes.len();
            nodes.push(ChainNode { id: child, parent: Some(id), state, incoming: Some(action), value, depth });
            created += 1;
            if depth < budget.max_depth {
                open.push(Frontier { value, id: child });
            }
        }
    }
    let best = nodes
        .iter()
        .skip(1)
        .max_by(|a, b| a.value.total_cmp(&b.value).then(b.id.cmp(&a.id)))
        .map(|n| n.id);
    SearchTree { nodes, best }
}

/// The soccer instance of [`ChainModel`] for one team.
pub struct SoccerChain<'a> {
    pub side: Side,
    pub table: &'a OreTable,
    pub params: &'a Params,
}

impl ChainModel for SoccerChain<'_> {
    type State = WorldState;
    type Action = ActionDescriptor;

    fn actions(&self, state: &WorldState) -> Vec<ActionDescriptor> {
        let Some(holder) = state.ball_owner.filter(|o| o.side == self.side) else {
            return Vec::new();
        };
        let mut out = generate_passes(state, holder, self.params);
        out.extend(generate_dribbles(state, holder, self.params));
        out.extend(generate_shots(state, holder, self.params));
        out
    }

    fn predict(&self, state: &WorldState, action: &ActionDescriptor) -> WorldState {
        predict(state, action, self.params)
    }

    fn evaluate(&self, state: &WorldState) -> f64 {
        evaluate_state(state, self.side, self.table, self.params)
    }
}

pub type SoccerTree = SearchTree<WorldState, ActionDescriptor>;

/// Full search tree for `side`'s kickable holder, `None` if nobody of `side`
/// can kick the ball.
pub fn chain_search_tree(
    state: &WorldState,
    side: Side,
    budget: SearchBudget,
    table: &OreTable,
    params: &Params,
) -> Option<SoccerTree> {
    let holder = kickable_holder(state, side, params)?;
    let mut root = state.clone();
    root.ball_owner = Some(holder);
    Some(best_first_search(&SoccerChain { side, table, params }, root, budget))
}

/// Action for `side`'s ball holder: the first step of the best chain found,
/// or hold when no candidate exists.
pub fn chain_search(
    state: &WorldState,
    side: Side,
    budget: SearchBudget,
    table: &OreTable,
    params: &Params,
) -> Option<ActionDescriptor> {
    let tree = chain_search_tree(state, side, budget, table, params)?;
    let holder = tree.nodes[0].state.ball_owner?;
    Some(tree.first_action().unwrap_or_else(|| ActionDescriptor::hold(holder, state.ball.position)))
}

/// One line per node: `id parent kind value`, parent `-` for the root.
pub fn dump_tree(tree: &SoccerTree) -> String {
    let mut out = String::new();
    for n in &tree.nodes {
        let parent = n.parent.map_or_else(|| "-".to_string(), |p| p.to_string());
        let kind = n.incoming.map_or("root", |a| a.kind.as_str());
        let _ = writeln!(out, "{} {} {} {:.6}", n.id, parent, kind, n.value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Everybody parked in the far corners; the caller places the actors.
    fn blank_state(ball: Vec2) -> WorldState {
        let mut s = WorldState::new(ball);
        for p in &mut s.players {
            let c = if p.side == Side::Left { Vec2::new(-52.0, -33.0) } else { Vec2::new(52.0, 33.0) };
            p.position = c;
            p.home_position = c;
        }
        s
    }

    fn place(s: &mut WorldState, side: Side, unum: u8, pos: Vec2) {
        let idx = PlayerId::new(side, unum).index();
        s.players[idx] = PlayerState { home_position: pos, ..PlayerState::new(side, unum, pos) };
    }

    fn remove_team(s: &mut WorldState, side: Side) {
        for p in s.players.iter_mut().filter(|p| p.side == side) {
            p.position = Vec2::new(0.0, 0.0) + side.orient(Vec2::new(-200.0, 0.0));
        }
    }

    fn lone_pair() -> WorldState {
        let mut s = blank_state(Vec2::new(0.0, 0.0));
        remove_team(&mut s, Side::Right);
        remove_team(&mut s, Side::Left);
        place(&mut s, Side::Left, 10, Vec2::new(-0.5, 0.0));
        place(&mut s, Side::Left, 9, Vec2::new(10.0, 5.0));
        s
    }

    #[test]
    fn single_teammate_gets_one_direct_and_eight_lead_passes() {
        let params = Params::default();
        let s = lone_pair();
        let passes = generate_passes(&s, PlayerId::new(Side::Left, 10), &params);
        // Teammates parked 200 m away are out of range, only #9 remains.
        assert_eq!(passes.len(), 9);
        assert_eq!(passes.iter().filter(|p| p.kind == ActionKind::DirectPass).count(), 1);
        assert!(passes.iter().all(|p| p.receiver == Some(9)));
    }

    #[test]
    fn opponent_on_the_line_removes_the_direct_pass() {
        let params = Params::default();
        let mut s = lone_pair();
        place(&mut s, Side::Right, 4, Vec2::new(5.0, 2.5));
        let passes = generate_passes(&s, PlayerId::new(Side::Left, 10), &params);
        assert!(!passes.iter().any(|p| p.kind == ActionKind::DirectPass));
    }

    #[test]
    fn no_teammates_in_range_means_no_passes() {
        let params = Params::default();
        let mut s = lone_pair();
        place(&mut s, Side::Left, 9, Vec2::new(-200.0, 0.0));
        assert!(generate_passes(&s, PlayerId::new(Side::Left, 10), &params).is_empty());
    }

    #[test]
    fn dribbles_in_open_field_and_corner() {
        let params = Params::default();
        let s = lone_pair();
        let holder = PlayerId::new(Side::Left, 10);
        assert_eq!(generate_dribbles(&s, holder, &params).len(), 10);

        let mut corner = lone_pair();
        corner.ball.position = Vec2::new(52.0, 33.5);
        place(&mut corner, Side::Left, 10, Vec2::new(51.5, 33.5));
        assert!(generate_dribbles(&corner, holder, &params).len() < 10);
    }

    #[test]
    fn adjacent_opponent_prunes_that_dribble() {
        let params = Params::default();
        let mut s = lone_pair();
        place(&mut s, Side::Right, 4, Vec2::new(1.0, 0.0));
        let dribbles = generate_dribbles(&s, PlayerId::new(Side::Left, 10), &params);
        assert!(!dribbles.iter().any(|d| d.target_point.y.abs() < 1e-9 && d.target_point.x > 0.0));
    }

    #[test]
    fn predictor_examples() {
        let params = Params::default();
        let s = lone_pair();
        let holder = PlayerId::new(Side::Left, 10);
        let hold = predict(&s, &ActionDescriptor::hold(holder, s.ball.position), &params);
        assert_eq!(hold.cycle, s.cycle + 1);
        assert_eq!(hold.players, s.players);

        let dribble = generate_dribbles(&s, holder, &params)[0];
        assert_eq!(dribble.duration, 5);
        let after = predict(&s, &dribble, &params);
        assert_eq!(after.cycle, s.cycle + 5);
        assert_eq!(after.player(holder).position, dribble.target_point);

        let pass = generate_passes(&s, holder, &params)[0];
        let after = predict(&s, &pass, &params);
        assert_eq!(after.ball_owner, Some(PlayerId::new(Side::Left, 9)));
        assert_eq!(after.ball.position, pass.target_point);
    }

    #[test]
    fn degenerate_budget_returns_best_root_child() {
        let params = Params::default();
        let s = lone_pair();
        let budget = SearchBudget { max_nodes: 1, max_depth: 4 };
        let tree = chain_search_tree(&s, Side::Left, budget, &OreTable::ZERO, &params).unwrap();
        assert_eq!(tree.nodes.len(), 2);
        let holder = PlayerId::new(Side::Left, 10);
        let mut root = s.clone();
        root.ball_owner = Some(holder);
        let model = SoccerChain { side: Side::Left, table: &OreTable::ZERO, params: &params };
        let best = model
            .actions(&root)
            .into_iter()
            .map(|a| model.evaluate(&model.predict(&root, &a)))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(tree.nodes[1].value, best);
    }

    #[test]
    fn search_is_deterministic_and_within_budget() {
        let params = Params::default();
        let s = WorldState::kickoff(&params.physics, Side::Left, 11);
        let budget = SearchBudget::default();
        let table = OreTable::new([10.0, 9.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let a = chain_search_tree(&s, Side::Left, budget, &table, &params).unwrap();
        let b = chain_search_tree(&s, Side::Left, budget, &table, &params).unwrap();
        assert!(a.nodes.len() <= budget.max_nodes + 1);
        assert!(a.nodes.iter().all(|n| n.depth <= budget.max_depth));
        assert_eq!(a.first_action(), b.first_action());
        assert_eq!(dump_tree(&a), dump_tree(&b));
    }

    #[test]
    fn no_holder_means_no_search() {
        let params = Params::default();
        let mut s = lone_pair();
        s.ball.position = Vec2::new(30.0, 0.0);
        assert!(chain_search(&s, Side::Left, SearchBudget::default(), &OreTable::ZERO, &params).is_none());
    }

    #[test]
    fn hold_when_nothing_is_possible() {
        let params = Params::default();
        let mut s = lone_pair();
        place(&mut s, Side::Left, 9, Vec2::new(-200.0, 0.0));
        // Surround the holder so every dribble is contested.
        for (i, k) in (0..10).enumerate() {
            let pos = Vec2::new(-0.5, 0.0) + Vec2::polar(2.2, f64::from(k) * 36.0);
            place(&mut s, Side::Right, (i + 2) as u8, pos);
        }
        let action = chain_search(&s, Side::Left, SearchBudget::default(), &OreTable::ZERO, &params).unwrap();
        assert_eq!(action.kind, ActionKind::Hold);
    }
}
