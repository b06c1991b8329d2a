//! Pass-receiver prediction: state features, the labelled dataset format,
//! feed-forward inference from a JSON weights file and the pass tree used by
//! the second unmarking strategy.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Params;
use crate::error::{Error, Result};
use crate::planner::{direct_pass, predict};
use crate::unmark::team_possessor;
use crate::world::{PlayerId, Side, WorldState, TEAM_SIZE};

pub const SCHEMA_VERSION: u32 = 1;
pub const FEATURE_LEN: usize = 4 + 4 * 2 * TEAM_SIZE;
pub const NUM_CLASSES: usize = TEAM_SIZE;
pub const LAYER_DIMS: [usize; 5] = [FEATURE_LEN, 128, 64, 32, NUM_CLASSES];
pub const MAX_TREE_NODES: usize = 10;
/// Receivers pushed to the pass list per expanded node.
const BRANCHING: usize = 2;
const PROBE_COUNT: usize = 100;

/// First line of every dataset file.
pub fn dataset_preamble() -> String {
    format!("# chainball passnet schema_version={SCHEMA_VERSION}")
}

pub fn dataset_header() -> String {
    let mut cols: Vec<String> = (0..FEATURE_LEN).map(|i| format!("f{i}")).collect();
    cols.push("label".into());
    cols.join(",")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Ball then own team 1..11 then opponents 1..11, each as (x, y, vx, vy) in
/// the frame where `perspective` attacks +x. Positions are scaled by the
/// half-field size, velocities by the maximum ball speed.
pub fn extract_features(state: &WorldState, perspective: Side, params: &Params) -> FeatureVector {
    let phys = &params.physics;
    let mut out = Vec::with_capacity(FEATURE_LEN);
    let mut push = |pos: crate::Vec2, vel: crate::Vec2| {
        let (pos, vel) = (perspective.orient(pos), perspective.orient(vel));
        out.extend([
            pos.x / phys.half_length,
            pos.y / phys.half_width,
            vel.x / phys.ball_speed_max,
            vel.y / phys.ball_speed_max,
        ]);
    };
    push(state.ball.position, state.ball.velocity);
    for side in [perspective, perspective.opposite()] {
        for p in state.team(side) {
            push(p.position, p.velocity);
        }
    }
    FeatureVector(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: FeatureVector,
    /// Receiver uniform number, 1..=11.
    pub label: u8,
}

/// CSV dataset sink.
pub struct DatasetWriter<W: Write> {
    out: W,
    rows: usize,
}

impl DatasetWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Self::new(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }
}

impl<W: Write> DatasetWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{}", dataset_preamble())?;
        writeln!(out, "{}", dataset_header())?;
        Ok(Self { out, rows: 0 })
    }

    pub fn write_sample(&mut self, sample: &Sample) -> std::io::Result<()> {
        for v in sample.features.as_slice() {
            write!(self.out, "{v},")?;
        }
        writeln!(self.out, "{}", sample.label)?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Builds the sample for a pass from the kicking team's point of view.
pub fn make_sample(state: &WorldState, kicking: Side, receiver: u8, params: &Params) -> Sample {
    Sample { features: extract_features(state, kicking, params), label: receiver }
}

pub fn record_sample<W: Write>(
    state: &WorldState,
    kicking: Side,
    receiver: u8,
    sink: &mut DatasetWriter<W>,
    params: &Params,
) -> std::io::Result<()> {
    sink.write_sample(&make_sample(state, kicking, receiver, params))
}

/// Reads a dataset written by [`DatasetWriter`].
pub fn read_dataset(path: &Path) -> Result<Vec<Sample>> {
    let bad = |reason: String| Error::InvalidConfig(format!("{}: {reason}", path.display()));
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let mut next_line = || lines.next().transpose().map_err(|e| Error::io(path, e));
    if next_line()?.as_deref() != Some(dataset_preamble().as_str()) {
        return Err(bad("missing or unsupported schema line".into()));
    }
    if next_line()?.as_deref() != Some(dataset_header().as_str()) {
        return Err(bad("unexpected column header".into()));
    }
    let mut out = Vec::new();
    while let Some(line) = next_line()? {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != FEATURE_LEN + 1 {
            return Err(bad(format!("row {} has {} columns", out.len() + 1, cells.len())));
        }
        let parse = |c: &str| c.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", out.len() + 1)));
        let features = cells[..FEATURE_LEN].iter().map(|c| parse(c)).collect::<Result<Vec<_>>>()?;
        let label: u8 = cells[FEATURE_LEN].parse().map_err(|_| bad(format!("row {}: bad label", out.len() + 1)))?;
        if !(1..=11).contains(&label) {
            return Err(bad(format!("row {}: label {label} outside 1..11", out.len() + 1)));
        }
        out.push(Sample { features: FeatureVector(features), label });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Row-major, `[out][in]`.
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub act: Activation,
}

impl Layer {
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self
            .w
            .iter()
            .zip(&self.b)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect();
        match self.act {
            Activation::Relu => y.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Softmax => softmax(&mut y),
        }
        y
    }
}

fn softmax(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpWeights {
    pub schema_version: u32,
    pub dims: Vec<usize>,
    pub layers: Vec<Layer>,
}

impl MlpWeights {
    /// A network of the given layer sizes with all parameters zero.
    pub fn zeros(dims: &[usize]) -> Self {
        Self::from_fn(dims, |_, _, _| 0.0)
    }

    /// Uniform random parameters scaled by fan-in.
    pub fn random(dims: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(dims, |_, fan_in, _| {
            let bound = (6.0 / fan_in as f64).sqrt();
            rng.gen_range(-bound..=bound)
        })
    }

    /// `f(layer, fan_in, is_bias)` supplies every parameter in file order.
    fn from_fn(dims: &[usize], mut f: impl FnMut(usize, usize, bool) -> f64) -> Self {
        let n = dims.len().saturating_sub(1);
        let layers = (0..n)
            .map(|l| {
                let (fan_in, fan_out) = (dims[l], dims[l + 1]);
                let w = (0..fan_out).map(|_| (0..fan_in).map(|_| f(l, fan_in, false)).collect()).collect();
                let b = (0..fan_out).map(|_| f(l, fan_in, true)).collect();
                let act = if l + 1 == n { Activation::Softmax } else { Activation::Relu };
                Layer { w, b, act }
            })
            .collect();
        Self { schema_version: SCHEMA_VERSION, dims: dims.to_vec(), layers }
    }

    /// Checks internal consistency: matrix shapes follow `dims`, relu on
    /// hidden layers, softmax on the last, finite values.
    pub fn check_shape(&self) -> std::result::Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.dims.len() < 2 || self.layers.len() != self.dims.len() - 1 {
            return Err(format!("{} layers for dims {:?}", self.layers.len(), self.dims));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
            if layer.w.len() != fan_out || layer.b.len() != fan_out || layer.w.iter().any(|r| r.len() != fan_in) {
                return Err(format!("layer {l} shape does not match {fan_in}->{fan_out}"));
            }
            let want = if l + 1 == self.layers.len() { Activation::Softmax } else { Activation::Relu };
            if layer.act != want {
                return Err(format!("layer {l} activation {:?} (expected {want:?})", layer.act));
            }
            if layer.w.iter().flatten().chain(&layer.b).any(|v| !v.is_finite()) {
                return Err(format!("layer {l} has non-finite values"));
            }
        }
        Ok(())
    }

    /// Full validation for use as a pass predictor.
    pub fn validate(&self, path: &Path) -> Result<()> {
        if self.dims != LAYER_DIMS {
            return Err(Error::WeightsDims { expected: LAYER_DIMS.to_vec(), found: self.dims.clone() });
        }
        self.check_shape().map_err(|reason| Error::WeightsFormat { path: path.to_path_buf(), reason })
    }
}

pub fn load_weights(path: &Path) -> Result<MlpWeights> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let weights: MlpWeights = serde_json::from_str(&text)
        .map_err(|e| Error::WeightsFormat { path: path.to_path_buf(), reason: e.to_string() })?;
    weights.validate(path)?;
    Ok(weights)
}

pub fn save_weights(weights: &MlpWeights, path: &Path) -> Result<()> {
    let text = serde_json::to_string(weights).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Forward pass through any shape-valid network.
pub fn mlp_forward(weights: &MlpWeights, input: &[f64]) -> Vec<f64> {
    let mut x = input.to_vec();
    for layer in &weights.layers {
        x = layer.forward(&x);
    }
    x
}

/// Receiver probabilities; index `i` is teammate `i + 1`.
pub fn predict_receivers(weights: &MlpWeights, features: &FeatureVector) -> Vec<f64> {
    mlp_forward(weights, features.as_slice())
}

/// Probe input `i`: a fixed integer hash of each (probe, feature) index
/// mapped into `[-1, 1)`. Simple enough to reproduce in any language.
pub fn probe_vector(i: usize) -> Vec<f64> {
    (0..FEATURE_LEN)
        .map(|j| {
            let k = (i * FEATURE_LEN + j) as u64;
            let h = k.wrapping_mul(2_654_435_761) % (1 << 32);
            h as f64 / 2f64.powi(32) * 2.0 - 1.0
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsReport {
    pub probes: usize,
    /// SHA-256 over the probe outputs, each printed with six decimals, one
    /// per line.
    pub checksum: String,
    /// Largest deviation of a probe's output sum from 1.
    pub max_sum_error: f64,
}

pub fn weights_report(weights: &MlpWeights) -> WeightsReport {
    let mut hasher = Sha256::new();
    let mut max_sum_error: f64 = 0.0;
    for i in 0..PROBE_COUNT {
        let out = mlp_forward(weights, &probe_vector(i));
        max_sum_error = max_sum_error.max((out.iter().sum::<f64>() - 1.0).abs());
        for v in out {
            hasher.update(format!("{v:.6}\n").as_bytes());
        }
    }
    let checksum = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    WeightsReport { probes: PROBE_COUNT, checksum, max_sum_error }
}

pub fn verify_weights(path: &Path) -> Result<WeightsReport> {
    Ok(weights_report(&load_weights(path)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassTreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub owner: u8,
    pub state: WorldState,
    pub incoming_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassTree {
    pub side: Side,
    pub nodes: Vec<PassTreeNode>,
}

impl PassTree {
    pub fn node_of(&self, unum: u8) -> Option<&PassTreeNode> {
        self.nodes.iter().find(|n| n.owner == unum)
    }
}

struct PassEntry {
    prob: f64,
    parent: usize,
    receiver: u8,
}

/// Pass List order: higher probability first, then lower receiver number,
/// then the older parent.
fn entry_order(a: &PassEntry, b: &PassEntry) -> Ordering {
    a.prob.total_cmp(&b.prob).then(b.receiver.cmp(&a.receiver)).then(b.parent.cmp(&a.parent))
}

/// Tree of likely future ball owners for `side`, rooted at its current
/// possessor. Each expansion adds the two likeliest receivers above
/// `prob_limit` who own no node yet; the likeliest pending pass becomes the
/// next node. Stops at ten nodes or an empty pass list.
pub fn build_pass_tree(
    root_state: &WorldState,
    side: Side,
    weights: &MlpWeights,
    prob_limit: f64,
    params: &Params,
) -> Result<PassTree> {
    let owner = team_possessor(root_state, side, params)
        .ok_or_else(|| Error::Precondition(format!("{side:?} does not own the ball")))?;
    let mut nodes = vec![PassTreeNode {
        id: 0,
        parent: None,
        owner,
        state: root_state.clone(),
        incoming_probability: 1.0,
    }];
    let mut pass_list: Vec<PassEntry> = Vec::new();
    let mut frontier = 0;
    while nodes.len() < MAX_TREE_NODES {
        let node = &nodes[frontier];
        let probs = predict_receivers(weights, &extract_features(&node.state, side, params));
        let mut picks: Vec<PassEntry> = probs
            .iter()
            .enumerate()
            .map(|(i, &prob)| PassEntry { prob, parent: frontier, receiver: i as u8 + 1 })
            .filter(|e| e.prob > prob_limit && nodes.iter().all(|n| n.owner != e.receiver))
            .collect();
        picks.sort_by(|a, b| entry_order(b, a));
        pass_list.extend(picks.into_iter().take(BRANCHING));

        let next = loop {
            let Some(best) = pass_list.iter().enumerate().max_by(|a, b| entry_order(a.1, b.1)).map(|(i, _)| i)
            else {
                break None;
            };
            let entry = pass_list.swap_remove(best);
            if nodes.iter().all(|n| n.owner != entry.receiver) {
                break Some(entry);
            }
        };
        let Some(entry) = next else { break };
        let parent = &nodes[entry.parent];
        let kicker = PlayerId::new(side, parent.owner);
        let action = direct_pass(&parent.state, kicker, entry.receiver, params);
        let state = predict(&parent.state, &action, params);
        let id = nodes.len();
        nodes.push(PassTreeNode {
            id,
            parent: Some(entry.parent),
            owner: entry.receiver,
            state,
            incoming_probability: entry.prob,
        });
        frontier = id;
    }
    Ok(PassTree { side, nodes })
}

/// Passer for `me` in the tree: the owner of my node's parent.
pub fn select_passer_v11(tree: &PassTree, me: u8) -> Option<u8> {
    let node = tree.node_of(me)?;
    node.parent.map(|p| tree.nodes[p].owner)
}
