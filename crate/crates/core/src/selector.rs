//! The meta-classifier: an L2-regularized logistic model mapping a masked
//! meta-feature vector to a competence level in `[0, 1]`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMask, MetaMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetaClassifierConfig {
    /// Penalty on the (standardized) weights; the bias is not penalized.
    pub l2: f64,
    /// Newton iteration cap.
    pub max_iter: usize,
    pub tolerance: f64,
    /// Loss weight of competent rows relative to incompetent ones.
    pub positive_weight: f64,
    pub seed: u64,
}

impl Default for MetaClassifierConfig {
    fn default() -> Self {
        Self {
            l2: 1e-2,
            max_iter: 50,
            tolerance: 1e-8,
            positive_weight: 1.0,
            seed: 0,
        }
    }
}

/// Trained selector. Inputs are standardized with the stored column means and
/// scales before the linear score is squashed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaClassifier {
    weights: Vec<f64>,
    bias: f64,
    mean: Vec<f64>,
    scale: Vec<f64>,
    mask_fingerprint: u64,
    /// Set when training saw a single meta-class; the model then outputs
    /// the observed class rate for every input.
    constant: Option<f64>,
    pub iterations: usize,
    pub training_accuracy: f64,
    pub config: MetaClassifierConfig,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Row order sorted by label then values, so training does not depend on
/// the order rows were supplied in.
fn canonical_order(data: &MetaMatrix) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        data.labels[a].cmp(&data.labels[b]).then_with(|| {
            data.row(a)
                .iter()
                .zip(data.row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    order
}

impl MetaClassifier {
    /// Zero-weight model: outputs 0.5 everywhere.
    pub fn zero(dim: usize, mask: &FeatureMask) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
            mask_fingerprint: mask.fingerprint(),
            constant: None,
            iterations: 0,
            training_accuracy: 0.0,
            config: MetaClassifierConfig::default(),
        }
    }

    /// Model with explicit weights on standardized-free inputs.
    pub fn from_parts(weights: Vec<f64>, bias: f64, mask: &FeatureMask) -> Self {
        let dim = weights.len();
        Self {
            weights,
            bias,
            ..Self::zero(dim, mask)
        }
    }

    /// Internal consistency of a deserialized model.
    pub(crate) fn check_shape(&self) -> Result<()> {
        let d = self.weights.len();
        if self.mean.len() == d && self.scale.len() == d {
            Ok(())
        } else {
            Err(Error::ModelFormat("inconsistent selector weights".into()))
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn mask_fingerprint(&self) -> u64 {
        self.mask_fingerprint
    }

    pub fn is_constant(&self) -> bool {
        self.constant.is_some()
    }

    /// Effective weights on the raw (unstandardized) inputs.
    pub fn raw_weights(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.scale).map(|(w, s)| w / s).collect()
    }

    /// Competence `δ` for a masked meta-feature vector.
    pub fn competence(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: v.len(),
            });
        }
        Ok(self.competence_unchecked(v))
    }

    /// Competence for a full vector, checking the mask against the one the
    /// model was trained with.
    pub fn competence_full(&self, full: &[f64], mask: &FeatureMask) -> Result<f64> {
        if mask.fingerprint() != self.mask_fingerprint {
            return Err(Error::Config("feature mask differs from the training mask".into()));
        }
        let v = crate::features::apply_mask(full, mask)?;
        self.competence(&v)
    }

    pub(crate) fn competence_unchecked(&self, v: &[f64]) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        let z: f64 = v
            .iter()
            .zip(&self.weights)
            .zip(self.mean.iter().zip(&self.scale))
            .map(|((x, w), (m, s))| w * (x - m) / s)
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }

    /// Fraction of rows whose thresholded competence (`δ >= 0.5`) matches
    /// the label.
    pub fn accuracy(&self, data: &MetaMatrix) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        let hits = (0..data.len())
            .filter(|&i| (self.competence_unchecked(data.row(i)) >= 0.5) == data.labels[i])
            .count();
        hits as f64 / data.len() as f64
    }
}

/// Fits the selector by damped Newton iterations on the weighted, penalized
/// log-loss. Single-class data yields a constant model.
pub fn train_meta(data: &MetaMatrix, mask: &FeatureMask, config: &MetaClassifierConfig) -> Result<MetaClassifier> {
    let n = data.len();
    let dim = data.dim;
    if n < 2 {
        return Err(Error::Config(format!("meta-classifier needs at least 2 rows, got {n}")));
    }
    if dim != mask.count_ones() {
        return Err(Error::DimensionMismatch {
            expected: mask.count_ones(),
            found: dim,
        });
    }
    let positives = data.labels.iter().filter(|&&b| b).count();
    if positives == 0 || positives == n {
        let rate = positives as f64 / n as f64;
        let mut model = MetaClassifier::zero(dim, mask);
        model.constant = Some(rate);
        model.training_accuracy = 1.0;
        model.config = config.clone();
        return Ok(model);
    }

    let order = canonical_order(data);

    let mut mean = vec![0.0; dim];
    for &i in &order {
        for (m, x) in mean.iter_mut().zip(data.row(i)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut scale = vec![0.0; dim];
    for &i in &order {
        for ((s, x), m) in scale.iter_mut().zip(data.row(i)).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    for s in &mut scale {
        *s = (*s / n as f64).sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }

    // Design matrix with a trailing bias column.
    let p = dim + 1;
    let x = DMatrix::from_fn(n, p, |r, c| {
        if c == dim {
            1.0
        } else {
            (data.row(order[r])[c] - mean[c]) / scale[c]
        }
    });
    let y: Vec<f64> = order.iter().map(|&i| f64::from(u8::from(data.labels[i]))).collect();
    let weight: Vec<f64> = order
        .iter()
        .map(|&i| if data.labels[i] { config.positive_weight } else { 1.0 })
        .collect();
    let total_weight: f64 = weight.iter().sum();
    let l2 = config.l2.max(0.0);

    let objective = |beta: &DVector<f64>| -> f64 {
        let z = &x * beta;
        let loss: f64 = (0..n)
            .map(|r| {
                let zr = z[r];
                // log(1 + e^z) - y z, stable
                let softplus = if zr > 0.0 {
                    zr + (-zr).exp().ln_1p()
                } else {
                    zr.exp().ln_1p()
                };
                weight[r] * (softplus - y[r] * zr)
            })
            .sum::<f64>()
            / total_weight;
        let penalty: f64 = beta.iter().take(dim).map(|b| b * b).sum::<f64>() * l2 / 2.0;
        loss + penalty
    };

    let mut beta = DVector::<f64>::zeros(p);
    let mut current = objective(&beta);
    let mut iterations = 0;
    for _ in 0..config.max_iter {
        iterations += 1;
        let z = &x * &beta;
        let mut grad = DVector::<f64>::zeros(p);
        let mut hess = DMatrix::<f64>::zeros(p, p);
        let mut xw = x.clone();
        for r in 0..n {
            let mu = sigmoid(z[r]);
            let g = weight[r] * (mu - y[r]) / total_weight;
            let h = (weight[r] * mu * (1.0 - mu) / total_weight).max(1e-12);
            for c in 0..p {
                grad[c] += g * x[(r, c)];
            }
            let root = h.sqrt();
            for c in 0..p {
                xw[(r, c)] *= root;
            }
        }
        hess.gemm_tr(1.0, &xw, &xw, 0.0);
        for c in 0..dim {
            grad[c] += l2 * beta[c];
            hess[(c, c)] += l2;
        }
        // Keeps the system positive definite when l2 = 0 on separable data.
        hess[(dim, dim)] += 1e-10;
        for c in 0..dim {
            hess[(c, c)] += 1e-10;
        }
        let step = match hess.cholesky() {
            Some(chol) => chol.solve(&grad),
            None => grad.clone(),
        };

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let candidate = &beta - &step * t;
            let value = objective(&candidate);
            if value <= current {
                beta = candidate;
                current = value;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || step.amax() * t < config.tolerance {
            break;
        }
    }

    let mut model = MetaClassifier {
        weights: beta.iter().take(dim).copied().collect(),
        bias: beta[dim],
        mean,
        scale,
        mask_fingerprint: mask.fingerprint(),
        constant: None,
        iterations,
        training_accuracy: 0.0,
        config: config.clone(),
    };
    model.training_accuracy = model.accuracy(data);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]], labels: &[bool]) -> MetaMatrix {
        MetaMatrix {
            values: rows.iter().flat_map(|r| r.iter().copied()).collect(),
            dim: rows[0].len(),
            labels: labels.to_vec(),
        }
    }

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        let data = matrix(
            &[&[0.0, 0.0], &[0.2, 0.1], &[0.9, 1.0], &[1.0, 0.8]],
            &[false, false, true, true],
        );
        let mask = FeatureMask::all(2);
        let m = train_meta(&data, &mask, &MetaClassifierConfig::default()).unwrap();
        assert_eq!(m.training_accuracy, 1.0);
        assert_eq!(m.accuracy(&data), 1.0);
    }

    #[test]
    fn conflicting_duplicates_give_half() {
        let data = matrix(&[&[0.3], &[0.3], &[0.3], &[0.3]], &[true, false, true, false]);
        let m = train_meta(&data, &FeatureMask::all(1), &MetaClassifierConfig::default()).unwrap();
        assert!((m.competence(&[0.3]).unwrap() - 0.5).abs() <= 0.05);
    }

    #[test]
    fn deterministic_and_order_invariant() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()])
            .collect();
        let labels: Vec<bool> = (0..40).map(|i| (i * 7) % 5 < 2).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let data = matrix(&refs, &labels);
        let mask = FeatureMask::all(2);
        let cfg = MetaClassifierConfig::default();
        let a = train_meta(&data, &mask, &cfg).unwrap();
        assert_eq!(a, train_meta(&data, &mask, &cfg).unwrap());

        let mut rev_rows = refs.clone();
        rev_rows.reverse();
        let mut rev_labels = labels.clone();
        rev_labels.reverse();
        let b = train_meta(&matrix(&rev_rows, &rev_labels), &mask, &cfg).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
    }

    #[test]
    fn single_class_gives_constant_model() {
        let data = matrix(&[&[0.1], &[0.5]], &[true, true]);
        let m = train_meta(&data, &FeatureMask::all(1), &MetaClassifierConfig::default()).unwrap();
        assert!(m.is_constant());
        assert_eq!(m.competence(&[123.0]).unwrap(), 1.0);
    }

    #[test]
    fn zero_model_outputs_half() {
        let m = MetaClassifier::zero(3, &FeatureMask::all(3));
        assert_eq!(m.competence(&[1.0, -5.0, 9.0]).unwrap(), 0.5);
    }

    #[test]
    fn monotone_in_positive_weight() {
        let m = MetaClassifier::from_parts(vec![1.5, -0.5], 0.1, &FeatureMask::all(2));
        let mut last = 0.0;
        for step in 0..50 {
            let d = m.competence(&[step as f64 * 0.1 - 2.5, 0.3]).unwrap();
            assert!(d >= last);
            last = d;
        }
    }

    #[test]
    fn threshold_reproduces_training_accuracy() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i as f64 * 0.7).sin(), i as f64 / 60.0, (i % 3) as f64])
            .collect();
        let labels: Vec<bool> = (0..60)
            .map(|i| (i as f64 * 0.7).sin() + (i % 4) as f64 * 0.2 > 0.3)
            .collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let data = matrix(&refs, &labels);
        let m = train_meta(&data, &FeatureMask::all(3), &MetaClassifierConfig::default()).unwrap();
        let recomputed = rows
            .iter()
            .zip(&labels)
            .filter(|(r, &l)| (m.competence(r).unwrap() >= 0.5) == l)
            .count() as f64
            / 60.0;
        assert_eq!(recomputed, m.training_accuracy);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = MetaClassifier::zero(2, &FeatureMask::all(2));
        assert!(matches!(m.competence(&[1.0]), Err(Error::DimensionMismatch { .. })));
        let other = FeatureMask::from_bits(vec![true, true, false]);
        assert!(m.competence_full(&[1.0, 2.0, 3.0], &other).is_err());
    }
}
