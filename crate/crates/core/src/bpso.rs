//! Binary particle swarm optimization over meta-feature masks, driven by the
//! distance between the selector's competence estimates and the Oracle's,
//! with a global-validation archive against overfitting.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::{random_mask, FeatureMask, MetaDataset, MetaMatrix};
use crate::pool::Perceptron;
use crate::rng::{self, Rng};
use crate::selector::{train_meta, MetaClassifierConfig};

/// Fitness given to masks that select nothing.
pub const EMPTY_MASK_FITNESS: f64 = f64::MAX;

/// Oracle competence: 1 iff `classifier` predicts `label` for `x`.
pub fn oracle_competence(classifier: &Perceptron, x: &[f64], label: usize) -> u8 {
    u8::from(classifier.label(x) == label)
}

/// `(1 / N·M) · sqrt(Σ (δ_λ − δ_Oracle)²)` over all (sample, classifier) rows.
pub fn oracle_distance(estimates: &[f64], oracle: &[bool]) -> f64 {
    assert_eq!(estimates.len(), oracle.len());
    if estimates.is_empty() {
        return 0.0;
    }
    let sq: f64 = estimates
        .iter()
        .zip(oracle)
        .map(|(d, &o)| {
            let diff = d - f64::from(u8::from(o));
            diff * diff
        })
        .sum();
    sq.sqrt() / estimates.len() as f64
}

/// S-shaped transfer, `1 / (1 + e^(-2v))`.
pub fn transfer_s(v: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * v).exp())
}

/// V-shaped transfer, `|(2/π) · atan((π/2) v)|`.
pub fn transfer_v(v: f64) -> f64 {
    ((2.0 / PI) * ((PI / 2.0) * v).atan()).abs()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transfer {
    S,
    #[default]
    V,
}

impl Transfer {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Transfer::S => transfer_s(v),
            Transfer::V => transfer_v(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpsoConfig {
    pub swarm_size: usize,
    pub max_generations: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    /// Generations without a gbest improvement before stopping.
    pub stall_limit: usize,
    pub transfer: Transfer,
    pub v_max: f64,
    /// Independent restarts; the best validated archive wins.
    pub runs: usize,
    /// Disables the validation archive and returns gbest instead.
    pub global_validation: bool,
    pub seed: u64,
}

impl Default for BpsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 20,
            max_generations: 100,
            inertia: 1.0,
            c1: 2.0,
            c2: 2.0,
            stall_limit: 5,
            transfer: Transfer::V,
            v_max: 6.0,
            runs: 30,
            global_validation: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub position: FeatureMask,
    pub velocity: Vec<f64>,
    pub fitness: f64,
    pub pbest: FeatureMask,
    pub pbest_fitness: f64,
}

impl Particle {
    pub fn new(position: FeatureMask) -> Self {
        let d = position.len();
        Self {
            pbest: position.clone(),
            position,
            velocity: vec![0.0; d],
            fitness: f64::INFINITY,
            pbest_fitness: f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub gbest: FeatureMask,
    pub gbest_fitness: f64,
    pub generation: usize,
    rng: Rng,
}

impl Swarm {
    /// Random swarm: every bit is set with probability one half.
    pub fn random(dim: usize, size: usize, seed: u64) -> Self {
        let mut rng = rng::derived_rng(seed, "swarm", 0);
        let particles: Vec<Particle> = (0..size).map(|_| Particle::new(random_mask(dim, &mut rng))).collect();
        Self::from_particles(particles, rng)
    }

    pub fn from_particles(particles: Vec<Particle>, rng: Rng) -> Self {
        let gbest = particles[0].position.clone();
        Self {
            particles,
            gbest,
            gbest_fitness: f64::INFINITY,
            generation: 0,
            rng,
        }
    }

    /// Scores every position and updates personal and global bests on strict
    /// improvement. Returns whether gbest improved.
    pub fn evaluate<F>(&mut self, fitness: F) -> bool
    where
        F: Fn(&FeatureMask) -> f64 + Sync,
    {
        let scores: Vec<f64> = self.particles.par_iter().map(|p| fitness(&p.position)).collect();
        let mut improved = false;
        for (p, f) in self.particles.iter_mut().zip(scores) {
            p.fitness = f;
            if f < p.pbest_fitness {
                p.pbest = p.position.clone();
                p.pbest_fitness = f;
            }
            if f < self.gbest_fitness {
                self.gbest = p.position.clone();
                self.gbest_fitness = f;
                improved = true;
            }
        }
        improved
    }

    /// Velocity update followed by the bit-flip position update.
    pub fn advance(&mut self, config: &BpsoConfig) {
        let gbest = &self.gbest;
        for p in &mut self.particles {
            for d in 0..p.velocity.len() {
                let s = f64::from(u8::from(p.position.get(d)));
                let pb = f64::from(u8::from(p.pbest.get(d)));
                let gb = f64::from(u8::from(gbest.get(d)));
                let r1: f64 = self.rng.random();
                let r2: f64 = self.rng.random();
                let v = config.inertia * p.velocity[d] + config.c1 * r1 * (pb - s) + config.c2 * r2 * (gb - s);
                p.velocity[d] = v.clamp(-config.v_max, config.v_max);
            }
            for d in 0..p.velocity.len() {
                let r: f64 = self.rng.random();
                if r < config.transfer.apply(p.velocity[d]) {
                    let bit = p.position.get(d);
                    p.position.set(d, !bit);
                }
            }
        }
        self.generation += 1;
    }

    /// One generation without validation: evaluate, then move.
    pub fn step<F>(&mut self, config: &BpsoConfig, fitness: F) -> bool
    where
        F: Fn(&FeatureMask) -> f64 + Sync,
    {
        let improved = self.evaluate(fitness);
        self.advance(config);
        improved
    }

    pub fn mean_fitness(&self) -> f64 {
        let finite: Vec<f64> = self
            .particles
            .iter()
            .map(|p| p.fitness)
            .filter(|f| f.is_finite() && *f < EMPTY_MASK_FITNESS)
            .collect();
        if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        }
    }
}

/// Best mask seen on the validation meta-data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    pub best_mask: FeatureMask,
    pub validation_fitness: f64,
    pub generation: usize,
    pub run: usize,
}

/// Scores for a mask: search fitness and validation fitness.
pub trait MaskObjective: Sync {
    fn dim(&self) -> usize;
    fn optimization(&self, mask: &FeatureMask) -> f64;
    fn validation(&self, mask: &FeatureMask) -> f64;
    /// Both scores at once; override when they share work.
    fn evaluate(&self, mask: &FeatureMask) -> (f64, f64) {
        (self.optimization(mask), self.validation(mask))
    }
}

/// Oracle-distance objective: the selector is trained on `train` and scored
/// on `optimize` (search) and `validate` (archive).
pub struct OracleFitness {
    train: MetaDataset,
    optimize: MetaDataset,
    validate: MetaDataset,
    config: MetaClassifierConfig,
}

impl OracleFitness {
    pub fn new(train: MetaDataset, optimize: MetaDataset, validate: MetaDataset, config: MetaClassifierConfig) -> Self {
        Self {
            train,
            optimize,
            validate,
            config,
        }
    }

    fn score(model: &crate::selector::MetaClassifier, data: &MetaMatrix) -> f64 {
        let estimates: Vec<f64> = (0..data.len())
            .map(|i| model.competence_unchecked(data.row(i)))
            .collect();
        oracle_distance(&estimates, &data.labels)
    }

    fn scores(&self, mask: &FeatureMask, validate: bool) -> (f64, f64) {
        if mask.count_ones() == 0 {
            return (EMPTY_MASK_FITNESS, EMPTY_MASK_FITNESS);
        }
        let Ok(model) = train_meta(&self.train.to_matrix(mask), mask, &self.config) else {
            return (EMPTY_MASK_FITNESS, EMPTY_MASK_FITNESS);
        };
        let opt = Self::score(&model, &self.optimize.to_matrix(mask));
        let val = if validate {
            Self::score(&model, &self.validate.to_matrix(mask))
        } else {
            f64::NAN
        };
        (opt, val)
    }
}

impl MaskObjective for OracleFitness {
    fn dim(&self) -> usize {
        self.train
            .rows
            .first()
            .map_or(self.train.layout.len(), |r| r.values.len())
    }

    fn optimization(&self, mask: &FeatureMask) -> f64 {
        self.scores(mask, false).0
    }

    fn validation(&self, mask: &FeatureMask) -> f64 {
        self.evaluate(mask).1
    }

    fn evaluate(&self, mask: &FeatureMask) -> (f64, f64) {
        self.scores(mask, true)
    }
}

/// One row of the optimization trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub run: usize,
    pub generation: usize,
    pub gbest_fitness: f64,
    pub archive_validation_fitness: f64,
    pub mean_swarm_fitness: f64,
}

/// Validation score of one particle position, kept for auditing the archive.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRecord {
    pub run: usize,
    pub generation: usize,
    pub particle: usize,
    pub fitness: f64,
}

#[derive(Clone, Debug)]
pub struct Optimization {
    pub archive: Archive,
    /// gbest of the run that produced the archive.
    pub gbest: FeatureMask,
    pub gbest_fitness: f64,
    pub trace: Vec<TraceRow>,
    pub validations: Vec<ValidationRecord>,
    /// Generations executed per run.
    pub generations: Vec<usize>,
}

impl Optimization {
    pub fn write_trace<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "run",
            "generation",
            "gbest_fitness",
            "archive_validation_fitness",
            "mean_swarm_fitness",
        ])?;
        for r in &self.trace {
            w.write_record([
                r.run.to_string(),
                r.generation.to_string(),
                r.gbest_fitness.to_string(),
                r.archive_validation_fitness.to_string(),
                r.mean_swarm_fitness.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Memoizes objective values per mask; the objective is deterministic.
struct Cache<'a, O: MaskObjective> {
    objective: &'a O,
    values: Mutex<HashMap<FeatureMask, (f64, f64)>>,
}

impl<'a, O: MaskObjective> Cache<'a, O> {
    fn get(&self, mask: &FeatureMask) -> (f64, f64) {
        if let Some(v) = self.values.lock().expect("cache lock").get(mask) {
            return *v;
        }
        let v = self.objective.evaluate(mask);
        self.values.lock().expect("cache lock").insert(mask.clone(), v);
        v
    }
}

/// Runs the swarm `config.runs` times. In every generation the positions are
/// scored on the optimization data (driving pbest/gbest), moved, and the new
/// positions are scored on the validation data; the archive keeps the best
/// validated mask across all runs.
pub fn optimize<O: MaskObjective>(objective: &O, config: &BpsoConfig) -> Optimization {
    let dim = objective.dim();
    let cache = Cache {
        objective,
        values: Mutex::new(HashMap::new()),
    };
    let mut best: Option<(Archive, FeatureMask, f64)> = None;
    let mut trace = Vec::new();
    let mut validations = Vec::new();
    let mut generations = Vec::new();

    for run in 0..config.runs.max(1) {
        let mut swarm = Swarm::random(
            dim,
            config.swarm_size.max(1),
            rng::derive_seed(config.seed, "bpso-run", run as u64),
        );
        let mut archive = Archive {
            best_mask: swarm.particles[0].position.clone(),
            validation_fitness: f64::INFINITY,
            generation: 0,
            run,
        };
        let mut stall = 0;
        let mut executed = 0;
        for generation in 1..=config.max_generations {
            executed = generation;
            let improved = swarm.evaluate(|m| cache.get(m).0);
            stall = if improved { 0 } else { stall + 1 };
            let mean = swarm.mean_fitness();
            swarm.advance(config);

            let scores: Vec<f64> = swarm.particles.par_iter().map(|p| cache.get(&p.position).1).collect();
            for (i, (p, f)) in swarm.particles.iter().zip(scores).enumerate() {
                validations.push(ValidationRecord {
                    run,
                    generation,
                    particle: i,
                    fitness: f,
                });
                if f < archive.validation_fitness {
                    archive = Archive {
                        best_mask: p.position.clone(),
                        validation_fitness: f,
                        generation,
                        run,
                    };
                }
            }
            trace.push(TraceRow {
                run,
                generation,
                gbest_fitness: swarm.gbest_fitness,
                archive_validation_fitness: archive.validation_fitness,
                mean_swarm_fitness: mean,
            });
            if stall >= config.stall_limit {
                break;
            }
        }
        generations.push(executed);

        if !config.global_validation {
            let val = cache.get(&swarm.gbest).1;
            archive = Archive {
                best_mask: swarm.gbest.clone(),
                validation_fitness: val,
                generation: executed,
                run,
            };
        }
        let better = match &best {
            None => true,
            Some((a, _, _)) => archive.validation_fitness < a.validation_fitness,
        };
        if better {
            best = Some((archive, swarm.gbest.clone(), swarm.gbest_fitness));
        }
    }

    let (archive, gbest, gbest_fitness) = best.expect("at least one run");
    Optimization {
        archive,
        gbest,
        gbest_fitness,
        trace,
        validations,
        generations,
    }
}
