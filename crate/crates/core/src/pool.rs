//! Linear perceptrons and Bagging pool generation.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// Gain applied to the normalized margin before squashing into supports.
const SUPPORT_GAIN: f64 = 4.0;
const BOOTSTRAP_RETRIES: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptronConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for PerceptronConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate: 0.01,
        }
    }
}

/// Crisp label plus the normalized class-support vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub supports: Vec<f64>,
}

/// Linear perceptron. Binary problems keep a single weight row (positive score
/// means class 1); multi-class problems keep one row per class. The last
/// column of every row is the bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perceptron {
    weights: Vec<Vec<f64>>,
    class_count: usize,
    feature_count: usize,
    /// Largest margin seen on the training rows; supports are computed from
    /// margins divided by this value.
    margin_scale: f64,
}

impl Perceptron {
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Internal consistency of a deserialized model.
    pub(crate) fn check_shape(&self) -> Result<()> {
        let rows = if self.is_binary() { 1 } else { self.class_count };
        let ok = self.class_count >= 2
            && self.weights.len() == rows
            && self.weights.iter().all(|w| w.len() == self.feature_count + 1)
            && self.margin_scale.is_finite()
            && self.margin_scale > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::ModelFormat("inconsistent perceptron weights".into()))
        }
    }

    fn is_binary(&self) -> bool {
        self.class_count == 2
    }

    fn score_row(row: &[f64], x: &[f64]) -> f64 {
        let (w, b) = row.split_at(row.len() - 1);
        w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b[0]
    }

    fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights.iter().map(|row| Self::score_row(row, x)).collect()
    }

    fn crisp(&self, scores: &[f64]) -> usize {
        if self.is_binary() {
            usize::from(scores[0] > 0.0)
        } else {
            argmax(scores)
        }
    }

    /// Signed margin: distance to the hyperplane for binary models, score gap
    /// between the two best classes over the norm of their weight difference
    /// otherwise.
    fn margin(&self, scores: &[f64]) -> f64 {
        if self.is_binary() {
            scores[0] / norm(&self.weights[0][..self.feature_count]).max(f64::MIN_POSITIVE)
        } else {
            let (top, second) = top_two(scores);
            let diff: Vec<f64> = self.weights[top][..self.feature_count]
                .iter()
                .zip(&self.weights[second][..self.feature_count])
                .map(|(a, b)| a - b)
                .collect();
            (scores[top] - scores[second]) / norm(&diff).max(f64::MIN_POSITIVE)
        }
    }

    /// Perpendicular distance of `x` to the decision boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.margin(&self.scores(x)).abs())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.check_dim(x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> Prediction {
        let scores = self.scores(x);
        let label = self.crisp(&scores);
        let supports = if self.is_binary() {
            let z = SUPPORT_GAIN * self.margin(&scores) / self.margin_scale;
            let p1 = logistic(z);
            vec![1.0 - p1, p1]
        } else {
            let scaled: Vec<f64> = scores.iter().map(|s| SUPPORT_GAIN * s / self.margin_scale).collect();
            softmax(&scaled)
        };
        Prediction { label, supports }
    }

    pub fn label(&self, x: &[f64]) -> usize {
        self.crisp(&self.scores(x))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

/// First index of the maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn top_two(values: &[f64]) -> (usize, usize) {
    let top = argmax(values);
    let mut second = usize::from(top == 0);
    for (i, v) in values.iter().enumerate() {
        if i != top && *v > values[second] {
            second = i;
        }
    }
    (top, second)
}

/// Trains a perceptron with the classic mistake-driven update, visiting the
/// rows in a seeded random order each epoch.
pub fn train_perceptron(ds: &Dataset, config: &PerceptronConfig, seed: u64) -> Perceptron {
    let d = ds.feature_count();
    let l = ds.class_count();
    let mut rng = rng::derived_rng(seed, "perceptron", 0);
    let rows = if l == 2 { 1 } else { l };
    let mut weights: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..=d).map(|_| rng.random_range(-0.5..0.5)).collect())
        .collect();

    let mut order: Vec<usize> = (0..ds.len()).collect();
    let lr = config.learning_rate;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = ds.row(i);
            let y = ds.label(i);
            if l == 2 {
                let target = if y == 1 { 1.0 } else { -1.0 };
                if target * Perceptron::score_row(&weights[0], x) <= 0.0 {
                    update(&mut weights[0], x, lr * target);
                }
            } else {
                let scores: Vec<f64> = weights.iter().map(|w| Perceptron::score_row(w, x)).collect();
                let predicted = argmax(&scores);
                if predicted != y {
                    update(&mut weights[y], x, lr);
                    update(&mut weights[predicted], x, -lr);
                }
            }
        }
    }

    let mut model = Perceptron {
        weights,
        class_count: l,
        feature_count: d,
        margin_scale: 1.0,
    };
    let scale = ds
        .rows()
        .map(|x| {
            let s = model.scores(x);
            if model.is_binary() {
                model.margin(&s).abs()
            } else {
                s.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
        })
        .fold(0.0f64, f64::max);
    model.margin_scale = if scale > 1e-12 { scale } else { 1.0 };
    model
}

fn update(row: &mut [f64], x: &[f64], step: f64) {
    let bias = row.len() - 1;
    for (w, v) in row[..bias].iter_mut().zip(x) {
        *w += step * v;
    }
    row[bias] += step;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolConfig {
    pub size: usize,
    pub bootstrap_frac: f64,
    pub perceptron: PerceptronConfig,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            size: 100,
            bootstrap_frac: 0.5,
            perceptron: PerceptronConfig::default(),
        }
    }
}

/// Ordered pool of base classifiers sharing input dimension and class count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierPool {
    members: Vec<Perceptron>,
}

impl ClassifierPool {
    pub fn new(members: Vec<Perceptron>) -> Result<Self> {
        let first = members.first().ok_or(Error::Config("empty pool".into()))?;
        let (d, l) = (first.feature_count, first.class_count);
        if let Some(bad) = members.iter().find(|m| m.feature_count != d || m.class_count != l) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.feature_count,
            });
        }
        Ok(Self { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Perceptron] {
        &self.members
    }

    pub fn get(&self, i: usize) -> &Perceptron {
        &self.members[i]
    }

    pub fn class_count(&self) -> usize {
        self.members[0].class_count
    }

    pub fn feature_count(&self) -> usize {
        self.members[0].feature_count
    }

    /// First `m` members, as produced by the same generation run.
    pub fn prefix(&self, m: usize) -> Self {
        Self {
            members: self.members[..m].to_vec(),
        }
    }

    pub fn labels(&self, x: &[f64]) -> Vec<usize> {
        self.members.iter().map(|c| c.label(x)).collect()
    }
}

/// Draws a with-replacement bootstrap of `ceil(frac * n)` rows that contains
/// every class, retrying a bounded number of times.
fn bootstrap(ds: &Dataset, frac: f64, rng: &mut rng::Rng) -> Result<Vec<usize>> {
    let n = ds.len();
    let size = ((frac * n as f64).ceil() as usize).clamp(1, usize::MAX);
    let classes = ds.class_count();
    for _ in 0..BOOTSTRAP_RETRIES {
        let idx: Vec<usize> = (0..size).map(|_| rng.random_range(0..n)).collect();
        let mut seen = vec![false; classes];
        for &i in &idx {
            seen[ds.label(i)] = true;
        }
        if seen.iter().all(|&s| s) {
            return Ok(idx);
        }
    }
    Err(Error::DegenerateBootstrap {
        classes,
        attempts: BOOTSTRAP_RETRIES,
    })
}

/// Generates a pool with Bagging. Member `i` is trained on its own bootstrap
/// with a sub-seed derived from `(seed, i)`, so the result does not depend on
/// scheduling.
pub fn bagging(ds: &Dataset, config: &PoolConfig, seed: u64) -> Result<ClassifierPool> {
    if config.size == 0 {
        return Err(Error::Config("pool size must be at least 1".into()));
    }
    if config.bootstrap_frac.is_nan() || config.bootstrap_frac <= 0.0 {
        return Err(Error::Config("bootstrap_frac must be positive".into()));
    }
    let members = (0..config.size)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::derived_rng(seed, "bootstrap", i as u64);
            let idx = bootstrap(ds, config.bootstrap_frac, &mut rng)?;
            let sample = ds.subset(&idx);
            Ok(train_perceptron(&sample, &config.perceptron, member_seed(seed, i)))
        })
        .collect::<Result<Vec<_>>>()?;
    ClassifierPool::new(members)
}

/// Seed handed to [`train_perceptron`] for pool member `i`.
pub fn member_seed(seed: u64, i: usize) -> u64 {
    rng::derive_seed(seed, "member", i as u64)
}

/// Bootstrap row indices used for member `i` of [`bagging`].
pub fn bootstrap_indices(ds: &Dataset, frac: f64, seed: u64, i: usize) -> Result<Vec<usize>> {
    let mut rng = rng::derived_rng(seed, "bootstrap", i as u64);
    bootstrap(ds, frac, &mut rng)
}
