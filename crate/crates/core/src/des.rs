//! Classification with a trained selector, plus the baseline dynamic and
//! static combination rules it is compared against.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, ScaleParams};
use crate::error::{Error, Result};
use crate::features::{apply_mask, FeatureMask, MetaLayout, QueryContext, ReferenceSet};
use crate::pool::ClassifierPool;
use crate::region;
use crate::selector::MetaClassifier;

/// Neighborhood sizes and the two thresholds of the method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesParams {
    pub k: usize,
    pub kp: usize,
    /// `h_c`: samples whose pool consensus reaches this value are left out
    /// of meta-training.
    pub consensus_threshold: f64,
    /// `Υ`: minimum competence for a classifier to vote.
    pub selection_threshold: f64,
}

impl Default for DesParams {
    fn default() -> Self {
        Self {
            k: 7,
            kp: 5,
            consensus_threshold: 0.7,
            selection_threshold: 0.5,
        }
    }
}

impl DesParams {
    pub fn layout(&self) -> MetaLayout {
        MetaLayout::new(self.k, self.kp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.kp == 0 {
            return Err(Error::Config("k and kp must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.consensus_threshold) {
            return Err(Error::Config("consensus_threshold must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.selection_threshold) {
            return Err(Error::Config("selection_threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Fraction of pool members that predict `label` for `x`.
pub fn consensus(pool: &ClassifierPool, x: &[f64], label: usize) -> f64 {
    let hits = pool.members().iter().filter(|c| c.label(x) == label).count();
    hits as f64 / pool.len() as f64
}

/// Class with the largest summed weight among the classes that received a
/// vote; ties go to the lowest class index.
pub fn weighted_vote(labels: &[usize], weights: &[f64], class_count: usize) -> usize {
    assert_eq!(labels.len(), weights.len());
    assert!(!labels.is_empty(), "vote needs at least one voter");
    let mut tally = vec![0.0; class_count];
    let mut voted = vec![false; class_count];
    for (&l, &w) in labels.iter().zip(weights) {
        tally[l] += w;
        voted[l] = true;
    }
    let mut best: Option<usize> = None;
    for c in 0..class_count {
        if voted[c] && best.is_none_or(|b| tally[c] > tally[b]) {
            best = Some(c);
        }
    }
    best.expect("some class voted")
}

pub fn majority_vote(labels: &[usize], class_count: usize) -> usize {
    weighted_vote(labels, &vec![1.0; labels.len()], class_count)
}

/// Outcome of classifying one sample with a [`DesModel`].
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub label: usize,
    /// `δ` for every pool member.
    pub competences: Vec<f64>,
    /// Members that voted.
    pub selected: Vec<usize>,
    /// No member reached the threshold; the most competent one decided.
    pub fallback: bool,
}

/// Everything needed to classify raw samples: the pool, the selector and its
/// mask, the input scaling, and the dynamic selection set with its caches.
#[derive(Clone, Debug)]
pub struct DesModel {
    pub pool: ClassifierPool,
    pub selector: MetaClassifier,
    pub mask: FeatureMask,
    pub scale: ScaleParams,
    pub reference: ReferenceSet,
    pub params: DesParams,
}

impl DesModel {
    pub fn new(
        pool: ClassifierPool,
        selector: MetaClassifier,
        mask: FeatureMask,
        scale: ScaleParams,
        reference: ReferenceSet,
        params: DesParams,
    ) -> Result<Self> {
        params.validate()?;
        let layout = params.layout();
        if mask.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.len(),
                found: mask.len(),
            });
        }
        if selector.input_dim() != mask.count_ones() {
            return Err(Error::DimensionMismatch {
                expected: mask.count_ones(),
                found: selector.input_dim(),
            });
        }
        if reference.pool_size() != pool.len() {
            return Err(Error::DimensionMismatch {
                expected: pool.len(),
                found: reference.pool_size(),
            });
        }
        Ok(Self {
            pool,
            selector,
            mask,
            scale,
            reference,
            params,
        })
    }

    pub fn class_count(&self) -> usize {
        self.pool.class_count()
    }

    pub fn class_names(&self) -> &[String] {
        self.reference.data().class_names()
    }

    /// Classifies a raw (unscaled) sample.
    pub fn classify(&self, x: &[f64]) -> Result<Decision> {
        if x.len() != self.scale.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.scale.dim(),
                found: x.len(),
            });
        }
        self.classify_scaled(&self.scale.transform_row(x))
    }

    /// Classifies a sample already mapped by `self.scale`.
    pub fn classify_scaled(&self, x: &[f64]) -> Result<Decision> {
        let ctx = QueryContext::new(&self.reference, &self.pool, self.params.layout(), x, None, None)?;
        let competences = (0..self.pool.len())
            .map(|i| {
                let v = apply_mask(&ctx.values(i), &self.mask)?;
                self.selector.competence(&v)
            })
            .collect::<Result<Vec<f64>>>()?;
        let labels: Vec<usize> = ctx.predictions().iter().map(|p| p.label).collect();
        let mut selected: Vec<usize> = (0..competences.len())
            .filter(|&i| competences[i] >= self.params.selection_threshold)
            .collect();
        let fallback = selected.is_empty();
        if fallback {
            selected.push(crate::pool::argmax(&competences));
        }
        let votes: Vec<usize> = selected.iter().map(|&i| labels[i]).collect();
        let weights: Vec<f64> = selected.iter().map(|&i| competences[i]).collect();
        Ok(Decision {
            label: weighted_vote(&votes, &weights, self.class_count()),
            competences,
            selected,
            fallback,
        })
    }

    /// Classifies every row of an already-scaled dataset.
    pub fn classify_all_scaled(&self, data: &Dataset) -> Result<Vec<Decision>> {
        (0..data.len())
            .into_par_iter()
            .map(|j| self.classify_scaled(data.row(j)))
            .collect()
    }
}

/// Combination rules reported by experiments. `Oracle` is the ideal selector
/// and needs the true label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    MetaDesOracle,
    Ola,
    Lca,
    KnoraE,
    KnoraU,
    SingleBest,
    StaticSelection,
    MajorityVote,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::MetaDesOracle,
        Method::Ola,
        Method::Lca,
        Method::KnoraE,
        Method::KnoraU,
        Method::SingleBest,
        Method::StaticSelection,
        Method::MajorityVote,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::MetaDesOracle => "META-DES.Oracle",
            Method::Ola => "OLA",
            Method::Lca => "LCA",
            Method::KnoraE => "KNORA-E",
            Method::KnoraU => "KNORA-U",
            Method::SingleBest => "SINGLE_BEST",
            Method::StaticSelection => "STATIC_SELECTION",
            Method::MajorityVote => "MAJORITY_VOTE",
            Method::Oracle => "ORACLE",
        }
    }

    pub fn is_baseline(self) -> bool {
        !matches!(self, Method::MetaDesOracle | Method::Oracle)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Case-insensitive; `-`, `_` and `.` are interchangeable.
    fn from_str(s: &str) -> Result<Self> {
        let norm = |t: &str| t.to_ascii_lowercase().replace(['-', '.'], "_");
        let wanted = norm(s.trim());
        Method::ALL
            .into_iter()
            .find(|m| norm(m.name()) == wanted)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.name().to_string()
    }
}

/// Baseline rules over a pool and its dynamic selection set.
pub struct Baselines<'a> {
    pool: &'a ClassifierPool,
    reference: &'a ReferenceSet,
    k: usize,
    /// Members ordered by DSEL accuracy, best first (ties by index).
    ranking: Vec<usize>,
}

impl<'a> Baselines<'a> {
    pub fn new(pool: &'a ClassifierPool, reference: &'a ReferenceSet, k: usize) -> Result<Self> {
        if k == 0 || k > reference.len() {
            return Err(Error::NeighborhoodTooLarge {
                k,
                available: reference.len(),
            });
        }
        let accuracy = dsel_accuracy(reference);
        let mut ranking: Vec<usize> = (0..pool.len()).collect();
        ranking.sort_by(|&a, &b| accuracy[b].total_cmp(&accuracy[a]).then(a.cmp(&b)));
        Ok(Self {
            pool,
            reference,
            k,
            ranking,
        })
    }

    /// Member with the best DSEL accuracy.
    pub fn single_best(&self) -> usize {
        self.ranking[0]
    }

    /// Top `ceil(M / 2)` members by DSEL accuracy.
    pub fn static_ensemble(&self) -> &[usize] {
        &self.ranking[..self.pool.len().div_ceil(2)]
    }

    /// Label predicted by `method` for a scaled sample.
    pub fn predict(&self, method: Method, x: &[f64]) -> Result<usize> {
        let labels = self.pool.labels(x);
        let l = self.pool.class_count();
        let region = || region::region_of(x, self.reference.data(), self.k, None);
        let label = match method {
            Method::MajorityVote => majority_vote(&labels, l),
            Method::SingleBest => labels[self.single_best()],
            Method::StaticSelection => {
                let votes: Vec<usize> = self.static_ensemble().iter().map(|&i| labels[i]).collect();
                majority_vote(&votes, l)
            }
            Method::Ola => {
                let hood = region()?.indices;
                let scores: Vec<f64> = (0..self.pool.len())
                    .map(|i| hood.iter().filter(|&&j| self.reference.is_correct(j, i)).count() as f64)
                    .collect();
                labels[crate::pool::argmax(&scores)]
            }
            Method::Lca => {
                let hood = region()?.indices;
                let data = self.reference.data();
                let scores: Vec<f64> = (0..self.pool.len())
                    .map(|i| {
                        let same: Vec<usize> = hood.iter().copied().filter(|&j| data.label(j) == labels[i]).collect();
                        if same.is_empty() {
                            0.0
                        } else {
                            same.iter().filter(|&&j| self.reference.is_correct(j, i)).count() as f64 / same.len() as f64
                        }
                    })
                    .collect();
                labels[crate::pool::argmax(&scores)]
            }
            Method::KnoraE => {
                let hood = region()?.indices;
                let mut chosen = Vec::new();
                for size in (1..=hood.len()).rev() {
                    chosen = (0..self.pool.len())
                        .filter(|&i| hood[..size].iter().all(|&j| self.reference.is_correct(j, i)))
                        .collect();
                    if !chosen.is_empty() {
                        break;
                    }
                }
                if chosen.is_empty() {
                    majority_vote(&labels, l)
                } else {
                    let votes: Vec<usize> = chosen.iter().map(|&i| labels[i]).collect();
                    majority_vote(&votes, l)
                }
            }
            Method::KnoraU => {
                let hood = region()?.indices;
                let weights: Vec<f64> = (0..self.pool.len())
                    .map(|i| hood.iter().filter(|&&j| self.reference.is_correct(j, i)).count() as f64)
                    .collect();
                if weights.iter().all(|&w| w == 0.0) {
                    majority_vote(&labels, l)
                } else {
                    weighted_vote(&labels, &weights, l)
                }
            }
            Method::MetaDesOracle | Method::Oracle => {
                return Err(Error::Config(format!("{method} is not a baseline rule")));
            }
        };
        Ok(label)
    }
}

/// Accuracy of every member on the dynamic selection set.
pub fn dsel_accuracy(reference: &ReferenceSet) -> Vec<f64> {
    let n = reference.len() as f64;
    (0..reference.pool_size())
        .map(|i| (0..reference.len()).filter(|&j| reference.is_correct(j, i)).count() as f64 / n)
        .collect()
}

/// One-shot form of [`Baselines::predict`].
pub fn baseline_predict(
    method: Method,
    pool: &ClassifierPool,
    reference: &ReferenceSet,
    x: &[f64],
    k: usize,
) -> Result<usize> {
    Baselines::new(pool, reference, k)?.predict(method, x)
}

/// Fraction of samples that at least one pool member gets right.
pub fn oracle_accuracy(pool: &ClassifierPool, test: &Dataset) -> f64 {
    if test.is_empty() {
        return 0.0;
    }
    let hits = (0..test.len())
        .into_par_iter()
        .filter(|&j| {
            let x = test.row(j);
            pool.members().iter().any(|c| c.label(x) == test.label(j))
        })
        .count();
    hits as f64 / test.len() as f64
}

/// Oracle prediction: the true label when some member predicts it, else the
/// pool's majority vote.
pub fn oracle_label(pool: &ClassifierPool, x: &[f64], truth: usize) -> usize {
    let labels = pool.labels(x);
    if labels.contains(&truth) {
        truth
    } else {
        majority_vote(&labels, pool.class_count())
    }
}

/// One row of a prediction export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: usize,
    pub true_label: String,
    pub predicted_label: String,
    pub method: Method,
    pub fallback: bool,
    pub selected_count: usize,
}

pub fn write_predictions<W: std::io::Write>(records: &[PredictionRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "sample_id",
        "true_label",
        "predicted_label",
        "method",
        "fallback",
        "selected_count",
    ])?;
    for r in records {
        w.write_record([
            r.sample_id.to_string(),
            r.true_label.clone(),
            r.predicted_label.clone(),
            r.method.to_string(),
            r.fallback.to_string(),
            r.selected_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_p2, scale_minmax};
    use crate::features::RrcConfig;
    use crate::pool::{bagging, PoolConfig};

    #[test]
    fn weighted_vote_hand_case() {
        // A: 0.9, B: 0.6 + 0.55 = 1.15
        assert_eq!(weighted_vote(&[0, 1, 1], &[0.9, 0.6, 0.55], 2), 1);
        assert_eq!(weighted_vote(&[0, 1], &[0.5, 0.5], 2), 0);
        assert_eq!(weighted_vote(&[2, 1], &[0.5, 0.5], 3), 1);
        // Classes without voters never win, even on zero weights.
        assert_eq!(weighted_vote(&[2, 1], &[0.0, 0.0], 3), 1);
    }

    #[test]
    fn consensus_counts_correct_members() {
        let (train, _) = scale_minmax(&generate_p2(200, 1));
        let pool = bagging(
            &train,
            &PoolConfig {
                size: 5,
                ..Default::default()
            },
            3,
        )
        .unwrap();
        for j in 0..20 {
            let x = train.row(j);
            let y = train.label(j);
            let h = consensus(&pool, x, y);
            let hits = pool.labels(x).iter().filter(|&&l| l == y).count();
            assert_eq!(h, hits as f64 / 5.0);
            assert_eq!(consensus(&pool, x, y) + consensus(&pool, x, 1 - y), 1.0);
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("knora_e".parse::<Method>().unwrap(), Method::KnoraE);
        assert_eq!("meta-des-oracle".parse::<Method>().unwrap(), Method::MetaDesOracle);
        assert!("mcb".parse::<Method>().is_err());
    }

    fn fixture(m: usize) -> (ClassifierPool, ReferenceSet, Dataset) {
        let (train, params) = scale_minmax(&generate_p2(300, 11));
        let dsel = params.transform(&generate_p2(150, 12)).unwrap();
        let test = params.transform(&generate_p2(100, 13)).unwrap();
        let pool = bagging(
            &train,
            &PoolConfig {
                size: m,
                ..Default::default()
            },
            4,
        )
        .unwrap();
        let reference = ReferenceSet::build(
            &pool,
            dsel,
            &RrcConfig {
                samples: 50,
                ..Default::default()
            },
        )
        .unwrap();
        (pool, reference, test)
    }

    #[test]
    fn pool_of_one_agrees_everywhere() {
        let (pool, reference, test) = fixture(1);
        let b = Baselines::new(&pool, &reference, 5).unwrap();
        for x in test.rows().take(30) {
            let expected = pool.get(0).label(x);
            for m in Method::ALL.into_iter().filter(|m| m.is_baseline()) {
                assert_eq!(b.predict(m, x).unwrap(), expected, "{m}");
            }
        }
    }

    #[test]
    fn zero_threshold_uniform_competence_is_majority_vote() {
        let (pool, reference, test) = fixture(5);
        let params = DesParams {
            selection_threshold: 0.0,
            ..Default::default()
        };
        let mask = FeatureMask::all(params.layout().len());
        let selector = MetaClassifier::zero(mask.count_ones(), &mask);
        let scale = ScaleParams::fit(reference.data());
        let model = DesModel::new(pool.clone(), selector, mask, scale, reference, params).unwrap();
        for x in test.rows() {
            let d = model.classify_scaled(x).unwrap();
            assert_eq!(d.selected.len(), 5);
            assert_eq!(d.label, majority_vote(&pool.labels(x), 2));
        }
    }

    #[test]
    fn empty_selection_falls_back_to_most_competent() {
        let (pool, reference, test) = fixture(3);
        let params = DesParams {
            selection_threshold: 0.9,
            ..Default::default()
        };
        let mask = FeatureMask::all(params.layout().len());
        let selector = MetaClassifier::zero(mask.count_ones(), &mask);
        let scale = ScaleParams::fit(reference.data());
        let model = DesModel::new(pool.clone(), selector, mask, scale, reference, params).unwrap();
        let x = test.row(0);
        let d = model.classify_scaled(x).unwrap();
        assert!(d.fallback);
        // every δ is 0.5, so the lowest index wins
        assert_eq!(d.selected, vec![0]);
        assert_eq!(d.label, pool.get(0).label(x));
    }

    #[test]
    fn oracle_bounds_every_method() {
        let (pool, reference, test) = fixture(5);
        let oracle = oracle_accuracy(&pool, &test);
        let b = Baselines::new(&pool, &reference, 7).unwrap();
        for m in Method::ALL.into_iter().filter(|m| m.is_baseline()) {
            let acc = (0..test.len())
                .filter(|&j| b.predict(m, test.row(j)).unwrap() == test.label(j))
                .count() as f64
                / test.len() as f64;
            assert!(acc <= oracle, "{m}: {acc} > {oracle}");
        }
        let superset = oracle_accuracy(&pool, &test);
        assert!(superset >= oracle_accuracy(&pool.prefix(2), &test));
    }

    #[test]
    fn prediction_csv_layout() {
        let rows = vec![PredictionRecord {
            sample_id: 3,
            true_label: "I".into(),
            predicted_label: "II".into(),
            method: Method::KnoraU,
            fallback: false,
            selected_count: 4,
        }];
        let mut buf = Vec::new();
        write_predictions(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "sample_id,true_label,predicted_label,method,fallback,selected_count\n3,I,II,KNORA-U,false,4\n"
        );
    }
}
