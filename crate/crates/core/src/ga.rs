//! Genetic tuning of the ORE penalty table.
//!
//! A chromosome is seven non-increasing genes in `[0, 50]`. Each generation
//! keeps the best 20 and breeds 80 children from 160 fitness-weighted
//! parents; children are repaired after crossover so they stay valid.

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, Flags};
use crate::error::{Error, Result};
use crate::evaluator::{OreTable, ORE_LEN, ORE_MAX};
use crate::harness::derive_seed;
use crate::world::{run_match, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub genes: [f64; ORE_LEN],
}

impl Chromosome {
    pub fn is_valid(&self) -> bool {
        self.genes.iter().all(|g| (0.0..=ORE_MAX).contains(g)) && self.genes.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn to_table(&self) -> OreTable {
        OreTable::new(self.genes).expect("chromosomes are kept valid")
    }

    pub fn l1_distance(&self, other: &[f64; ORE_LEN]) -> f64 {
        self.genes.iter().zip(other).map(|(a, b)| (a - b).abs()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub parents_drawn: usize,
    pub children: usize,
    pub elite_kept: usize,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    pub max_iterations: usize,
    /// Generations without improvement of the best fitness before stopping.
    pub stagnation_limit: usize,
    pub fitness_matches: usize,
    pub base_seed: u64,
    /// Length of each fitness match.
    pub match_cycles: u64,
    /// Template for the tuned team; its flags are forced to all features on
    /// and its table replaced by the chromosome.
    pub candidate: AgentConfig,
    /// Fixed opponent; defaults to all features off.
    pub opponent: AgentConfig,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            parents_drawn: 160,
            children: 80,
            elite_kept: 20,
            mutation_rate: 0.1,
            max_iterations: 100,
            stagnation_limit: 10,
            fitness_matches: 10,
            base_seed: 1,
            match_cycles: 3000,
            candidate: AgentConfig::with_flags("tuned", all_features()),
            opponent: AgentConfig::with_flags("baseline", Flags::ALL_OFF),
        }
    }
}

fn all_features() -> Flags {
    Flags { blocking: true, ore: true, unmark_simple: true, unmark_passnet: false }
}

impl GaConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: GaConfig =
            serde_json::from_str(&text).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.population_size == 0 || self.elite_kept + self.children != self.population_size {
            return bad(format!(
                "elite_kept ({}) + children ({}) must equal population_size ({})",
                self.elite_kept, self.children, self.population_size
            ));
        }
        if self.parents_drawn != 2 * self.children {
            return bad(format!("parents_drawn ({}) must be twice children ({})", self.parents_drawn, self.children));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad(format!("mutation_rate {} outside [0, 1]", self.mutation_rate));
        }
        if self.max_iterations == 0 || self.match_cycles == 0 {
            return bad("max_iterations and match_cycles must be positive".into());
        }
        Ok(())
    }
}

/// Clamps every gene into `[0, 50]`, then lowers each gene that exceeds its
/// predecessor to one below it (never below zero).
pub fn repair(genes: [f64; ORE_LEN]) -> Chromosome {
    let mut g = genes.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, ORE_MAX) });
    for i in 1..ORE_LEN {
        if g[i] > g[i - 1] {
            g[i] = (g[i - 1] - 1.0).max(0.0);
        }
    }
    Chromosome { genes: g }
}

/// Seven uniform draws in `[0, 50]` sorted non-increasing.
pub fn random_chromosome<R: Rng>(rng: &mut R) -> Chromosome {
    let mut g = [0.0; ORE_LEN];
    for v in &mut g {
        *v = rng.gen_range(0.0..=ORE_MAX);
    }
    g.sort_by(|a, b| b.total_cmp(a));
    Chromosome { genes: g }
}

/// Uniform crossover followed by [`repair`].
pub fn crossover<R: Rng>(a: &Chromosome, b: &Chromosome, rng: &mut R) -> Chromosome {
    let mut g = a.genes;
    for (i, v) in g.iter_mut().enumerate() {
        if rng.gen_bool(0.5) {
            *v = b.genes[i];
        }
    }
    repair(g)
}

/// Redraws each gene with probability `rate` uniformly between its
/// neighbours, scanning left to right, so the result stays valid.
pub fn mutate<R: Rng>(c: &Chromosome, rng: &mut R, rate: f64) -> Chromosome {
    let mut g = c.genes;
    for i in 0..ORE_LEN {
        if rate > 0.0 && rng.gen_bool(rate.min(1.0)) {
            let hi = if i == 0 { ORE_MAX } else { g[i - 1] };
            let lo = if i + 1 == ORE_LEN { 0.0 } else { g[i + 1] };
            g[i] = rng.gen_range(lo..=hi);
        }
    }
    Chromosome { genes: g }
}

/// Seed of fitness match `m`. Depends only on the base seed and the match
/// index, so every chromosome faces the same matches.
pub fn fitness_seed(base_seed: u64, m: usize) -> u64 {
    derive_seed(&[base_seed, 0x6A, (m / 2) as u64])
}

/// Mean goal difference of the candidate team using `c` against the fixed
/// opponent. Odd matches replay the previous seed with sides swapped.
/// The candidate template playing with `c` as its table.
pub fn candidate_config(c: &Chromosome, cfg: &GaConfig) -> AgentConfig {
    let mut candidate = cfg.candidate.clone();
    candidate.flags = Flags { unmark_passnet: candidate.flags.unmark_passnet, ..all_features() };
    candidate.ore_table = c.to_table();
    candidate
}

pub fn fitness(c: &Chromosome, cfg: &GaConfig) -> Result<f64> {
    if cfg.fitness_matches == 0 {
        eprintln!("warning: fitness_matches is 0, fitness defined as 0");
        return Ok(0.0);
    }
    let candidate = candidate_config(c, cfg);
    let mut total = 0i64;
    for m in 0..cfg.fitness_matches {
        let seed = fitness_seed(cfg.base_seed, m);
        let (side, result) = if m % 2 == 0 {
            (Side::Left, run_match(&candidate, &cfg.opponent, seed, cfg.match_cycles)?)
        } else {
            (Side::Right, run_match(&cfg.opponent, &candidate, seed, cfg.match_cycles)?)
        };
        total += result.goal_difference(side);
    }
    Ok(total as f64 / cfg.fitness_matches as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub best: Chromosome,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
}

/// Runs the GA with the match-based fitness.
pub fn evolve(cfg: &GaConfig) -> Result<GaOutcome> {
    cfg.validate()?;
    // Surface config errors once instead of inside the parallel loop.
    AgentConfig { ore_table: OreTable::ZERO, ..cfg.candidate.clone() }.validate()?;
    cfg.opponent.validate()?;
    evolve_with(cfg, |c| fitness(c, cfg).unwrap_or(f64::NEG_INFINITY), |_, _| {})
}

/// Runs the GA with an arbitrary fitness. `on_generation` sees every
/// evaluated population with its fitness values.
pub fn evolve_with<F, G>(cfg: &GaConfig, fitness_fn: F, mut on_generation: G) -> Result<GaOutcome>
where
    F: Fn(&Chromosome) -> f64 + Sync,
    G: FnMut(usize, &[(Chromosome, f64)]),
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.base_seed);
    let evaluate = |cs: Vec<Chromosome>| -> Vec<(Chromosome, f64)> {
        cs.into_par_iter().map(|c| (c, fitness_fn(&c))).collect()
    };
    let initial: Vec<Chromosome> = (0..cfg.population_size).map(|_| random_chromosome(&mut rng)).collect();
    let mut population = evaluate(initial);
    let mut best: Option<(Chromosome, f64)> = None;
    let mut history = Vec::new();
    let mut stagnant = 0;
    for generation in 0..cfg.max_iterations {
        on_generation(generation, &population);
        let gen_best = population.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).expect("population is not empty");
        let mean = population.iter().map(|p| p.1).sum::<f64>() / population.len() as f64;
        if best.is_none_or(|(_, f)| gen_best.1 > f) {
            best = Some(gen_best);
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        history.push(GenerationStats { generation, best: best.map_or(gen_best.1, |b| b.1), mean });
        if stagnant >= cfg.stagnation_limit || generation + 1 == cfg.max_iterations {
            break;
        }

        let min = population.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = population.iter().map(|p| p.1 - min + 1.0).collect();
        let pick = WeightedIndex::new(&weights).map_err(|e| Error::InvalidConfig(format!("fitness weights: {e}")))?;
        let parents: Vec<usize> = (0..cfg.parents_drawn).map(|_| pick.sample(&mut rng)).collect();
        let children: Vec<Chromosome> = parents
            .chunks(2)
            .map(|pair| {
                let child = crossover(&population[pair[0]].0, &population[pair[1]].0, &mut rng);
                mutate(&child, &mut rng, cfg.mutation_rate)
            })
            .collect();

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| population[b].1.total_cmp(&population[a].1).then(a.cmp(&b)));
        let mut next: Vec<(Chromosome, f64)> = order[..cfg.elite_kept].iter().map(|&i| population[i]).collect();
        next.extend(evaluate(children));
        population = next;
    }
    let (best, best_fitness) = best.expect("at least one generation runs");
    Ok(GaOutcome { best, best_fitness, history })
}

/// History as `gen,best,mean` CSV.
pub fn history_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from("gen,best,mean\n");
    for h in history {
        out.push_str(&format!("{},{},{}\n", h.generation, h.best, h.mean));
    }
    out
}
