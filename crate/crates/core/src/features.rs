//! Competence meta-features.
//!
//! Each (sample, base classifier) pair is described by a fixed-layout vector
//! built from fifteen criteria:
//!
//! | set        | width | source                                   |
//! |------------|-------|------------------------------------------|
//! | `f_Hard`   | K     | correctness on each region neighbor      |
//! | `f_Prob`   | K     | support for each neighbor's true class   |
//! | `f_Overall`| 1     | local accuracy over the region           |
//! | `f_Cond`   | 1     | local accuracy conditioned on the output |
//! | `f_Conf`   | 1     | normalized distance to the boundary      |
//! | `f_Amb`    | 1     | gap between the two largest supports     |
//! | `f_Log`    | K     | logarithmic support transform            |
//! | `f_PRC`    | K     | randomized-reference-classifier score    |
//! | `f_MD`     | K     | minimal support difference               |
//! | `f_Ent`    | K     | support entropy                          |
//! | `f_Exp`    | K     | exponential support transform            |
//! | `f_KL`     | K     | divergence from the uniform classifier   |
//! | `f_OP`     | Kp    | correctness on each profile neighbor     |
//! | `f_Rank`   | 1     | consecutive correct DSEL samples         |
//! | `f_RankOP` | 1     | consecutive correct profile neighbors    |
//!
//! giving `8K + Kp + 6` values.

use std::fmt;
use std::ops::Range;

use rand::Rng as _;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pool::{ClassifierPool, Prediction};
use crate::region::{self, OutputProfile, ProfileNeighborhood, RegionOfCompetence};
use crate::rng;

const LOG_FLOOR: f64 = 1e-12;
const SUPPORT_CEILING: f64 = 1.0 - 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    Hard,
    Prob,
    Overall,
    Cond,
    Conf,
    Amb,
    Log,
    Prc,
    Md,
    Ent,
    Exp,
    Kl,
    Op,
    Rank,
    RankOp,
}

impl FeatureSet {
    /// Layout order.
    pub const ALL: [FeatureSet; 15] = [
        FeatureSet::Hard,
        FeatureSet::Prob,
        FeatureSet::Overall,
        FeatureSet::Cond,
        FeatureSet::Conf,
        FeatureSet::Amb,
        FeatureSet::Log,
        FeatureSet::Prc,
        FeatureSet::Md,
        FeatureSet::Ent,
        FeatureSet::Exp,
        FeatureSet::Kl,
        FeatureSet::Op,
        FeatureSet::Rank,
        FeatureSet::RankOp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Hard => "f_Hard",
            FeatureSet::Prob => "f_Prob",
            FeatureSet::Overall => "f_Overall",
            FeatureSet::Cond => "f_Cond",
            FeatureSet::Conf => "f_Conf",
            FeatureSet::Amb => "f_Amb",
            FeatureSet::Log => "f_Log",
            FeatureSet::Prc => "f_PRC",
            FeatureSet::Md => "f_MD",
            FeatureSet::Ent => "f_Ent",
            FeatureSet::Exp => "f_Exp",
            FeatureSet::Kl => "f_KL",
            FeatureSet::Op => "f_OP",
            FeatureSet::Rank => "f_Rank",
            FeatureSet::RankOp => "f_RankOP",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sizes of the region of competence (`k`) and profile neighborhood (`kp`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaLayout {
    pub k: usize,
    pub kp: usize,
}

impl MetaLayout {
    pub fn new(k: usize, kp: usize) -> Self {
        assert!(k >= 1 && kp >= 1, "neighborhood sizes must be positive");
        Self { k, kp }
    }

    pub fn width(&self, set: FeatureSet) -> usize {
        match set {
            FeatureSet::Hard
            | FeatureSet::Prob
            | FeatureSet::Log
            | FeatureSet::Prc
            | FeatureSet::Md
            | FeatureSet::Ent
            | FeatureSet::Exp
            | FeatureSet::Kl => self.k,
            FeatureSet::Op => self.kp,
            _ => 1,
        }
    }

    /// Total vector length, `8K + Kp + 6`.
    pub fn len(&self) -> usize {
        FeatureSet::ALL.iter().map(|&s| self.width(s)).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn range(&self, set: FeatureSet) -> Range<usize> {
        let mut start = 0;
        for s in FeatureSet::ALL {
            let w = self.width(s);
            if s == set {
                return start..start + w;
            }
            start += w;
        }
        unreachable!("every set is part of the layout")
    }

    pub fn set_of(&self, index: usize) -> FeatureSet {
        FeatureSet::ALL
            .into_iter()
            .find(|&s| self.range(s).contains(&index))
            .expect("index within layout")
    }

    /// Column names such as `f_Hard[3]` or `f_Amb`.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.len());
        for s in FeatureSet::ALL {
            let w = self.width(s);
            if w == 1 {
                names.push(s.name().to_string());
            } else {
                names.extend((1..=w).map(|i| format!("{}[{i}]", s.name())));
            }
        }
        names
    }
}

impl Default for MetaLayout {
    fn default() -> Self {
        Self { k: 7, kp: 5 }
    }
}

/// Binary selection over the meta-feature layout.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMask {
    bits: Vec<bool>,
}

impl FeatureMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn all(len: usize) -> Self {
        Self { bits: vec![true; len] }
    }

    pub fn none(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// FNV-1a over the bit pattern and its length.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |byte: u8| {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        };
        for b in (self.bits.len() as u64).to_le_bytes() {
            feed(b);
        }
        for &bit in &self.bits {
            feed(u8::from(bit));
        }
        h
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Keeps the entries of `values` whose mask bit is set, in order.
pub fn apply_mask(values: &[f64], mask: &FeatureMask) -> Result<Vec<f64>> {
    if values.len() != mask.len() {
        return Err(Error::DimensionMismatch {
            expected: mask.len(),
            found: values.len(),
        });
    }
    if mask.count_ones() == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(mask.selected().map(|i| values[i]).collect())
}

/// `2 S^(log 2 / log L) - 1`: negative below the random-guess support `1/L`.
pub fn log_support(s_correct: f64, class_count: usize) -> f64 {
    let s = s_correct.clamp(LOG_FLOOR, 1.0);
    let exponent = 2f64.ln() / (class_count as f64).ln();
    2.0 * s.powf(exponent) - 1.0
}

/// `1 - 2^(-(L-1) S / (1 - S))`.
pub fn exp_support(s_correct: f64, class_count: usize) -> f64 {
    let s = s_correct.clamp(0.0, SUPPORT_CEILING);
    1.0 - 2f64.powf(-((class_count as f64 - 1.0) * s) / (1.0 - s))
}

/// Shannon entropy (natural log) of a support vector, with `0 log 0 = 0`.
pub fn entropy(supports: &[f64]) -> f64 {
    -supports.iter().filter(|&&s| s > 0.0).map(|&s| s * s.ln()).sum::<f64>()
}

/// KL divergence of a support vector from the uniform vector.
pub fn kl_from_uniform(supports: &[f64]) -> f64 {
    let l = supports.len() as f64;
    supports.iter().filter(|&&s| s > 0.0).map(|&s| s * (s * l).ln()).sum()
}

/// `min over l != correct of (S_l - S_correct)`.
pub fn minimal_difference(supports: &[f64], correct: usize) -> f64 {
    supports
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != correct)
        .map(|(_, &s)| s - supports[correct])
        .fold(f64::INFINITY, f64::min)
}

/// Largest support minus the second largest.
pub fn ambiguity(supports: &[f64]) -> f64 {
    let mut top = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &s in supports {
        if s > top {
            second = top;
            top = s;
        } else if s > second {
            second = s;
        }
    }
    top - second
}

/// Settings of the randomized reference classifier estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RrcConfig {
    pub samples: usize,
    pub concentration: f64,
    pub seed: u64,
}

impl Default for RrcConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            concentration: 10.0,
            seed: 0,
        }
    }
}

/// Monte-Carlo probability that a random support vector whose expected value
/// is `supports` ranks `correct` first. Each class draws from a Beta with mean
/// `S_l` and the given concentration.
pub fn rrc_competence_with(supports: &[f64], correct: usize, samples: usize, concentration: f64, seed: u64) -> f64 {
    let betas: Vec<Beta<f64>> = supports
        .iter()
        .map(|&s| {
            let m = s.clamp(1e-6, 1.0 - 1e-6);
            Beta::new(concentration * m, concentration * (1.0 - m)).expect("positive shape parameters")
        })
        .collect();
    let mut rng = rng::derived_rng(seed, "rrc", 0);
    let mut draws = vec![0.0; supports.len()];
    let mut hits = 0usize;
    for _ in 0..samples {
        for (d, beta) in draws.iter_mut().zip(&betas) {
            *d = beta.sample(&mut rng);
        }
        // Normalizing the draws does not change which class ranks first.
        let target = draws[correct];
        if draws.iter().enumerate().all(|(l, &v)| l == correct || v < target) {
            hits += 1;
        }
    }
    hits as f64 / samples.max(1) as f64
}

pub fn rrc_competence(supports: &[f64], correct: usize, samples: usize, seed: u64) -> f64 {
    rrc_competence_with(supports, correct, samples, RrcConfig::default().concentration, seed)
}

/// Per-(DSEL row, classifier) quantities that do not depend on the query.
#[derive(Clone, Debug, PartialEq)]
struct NeighborCriteria {
    correct: bool,
    prob: f64,
    log: f64,
    prc: f64,
    md: f64,
    ent: f64,
    exp: f64,
    kl: f64,
}

/// DSEL together with the pool's cached outputs on it.
#[derive(Clone, Debug)]
pub struct ReferenceSet {
    data: Dataset,
    pool_size: usize,
    predictions: Vec<Prediction>,
    criteria: Vec<NeighborCriteria>,
    profiles: Vec<OutputProfile>,
    conf_bounds: Vec<(f64, f64)>,
    rrc: RrcConfig,
}

impl ReferenceSet {
    pub fn build(pool: &ClassifierPool, dsel: Dataset, rrc: &RrcConfig) -> Result<Self> {
        if dsel.feature_count() != pool.feature_count() {
            return Err(Error::DimensionMismatch {
                expected: pool.feature_count(),
                found: dsel.feature_count(),
            });
        }
        let m = pool.len();
        let l = pool.class_count();
        let rows: Vec<(Vec<Prediction>, Vec<NeighborCriteria>, Vec<f64>)> = (0..dsel.len())
            .into_par_iter()
            .map(|j| {
                let x = dsel.row(j);
                let truth = dsel.label(j);
                let mut preds = Vec::with_capacity(m);
                let mut crit = Vec::with_capacity(m);
                let mut dist = Vec::with_capacity(m);
                for (i, c) in pool.members().iter().enumerate() {
                    let p = c.predict_unchecked(x);
                    let s = p.supports[truth];
                    let seed = rng::derive_seed(rrc.seed, "rrc-cell", (j * m + i) as u64);
                    crit.push(NeighborCriteria {
                        correct: p.label == truth,
                        prob: s,
                        log: log_support(s, l),
                        prc: rrc_competence_with(&p.supports, truth, rrc.samples, rrc.concentration, seed),
                        md: minimal_difference(&p.supports, truth),
                        ent: entropy(&p.supports),
                        exp: exp_support(s, l),
                        kl: kl_from_uniform(&p.supports),
                    });
                    dist.push(c.boundary_distance(x).expect("dimension checked"));
                    preds.push(p);
                }
                (preds, crit, dist)
            })
            .collect();

        let mut predictions = Vec::with_capacity(dsel.len() * m);
        let mut criteria = Vec::with_capacity(dsel.len() * m);
        let mut profiles = Vec::with_capacity(dsel.len());
        let mut conf_bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); m];
        for (preds, crit, dist) in rows {
            profiles.push(OutputProfile(
                preds.iter().flat_map(|p| p.supports.iter().copied()).collect(),
            ));
            for (b, d) in conf_bounds.iter_mut().zip(dist) {
                b.0 = b.0.min(d);
                b.1 = b.1.max(d);
            }
            predictions.extend(preds);
            criteria.extend(crit);
        }
        Ok(Self {
            data: dsel,
            pool_size: m,
            predictions,
            criteria,
            profiles,
            conf_bounds,
            rrc: rrc.clone(),
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    pub fn rrc(&self) -> &RrcConfig {
        &self.rrc
    }

    pub fn profiles(&self) -> &[OutputProfile] {
        &self.profiles
    }

    /// Cached prediction of classifier `i` on DSEL row `j`.
    pub fn prediction(&self, j: usize, i: usize) -> &Prediction {
        &self.predictions[j * self.pool_size + i]
    }

    pub fn is_correct(&self, j: usize, i: usize) -> bool {
        self.criteria[j * self.pool_size + i].correct
    }

    /// Min and max boundary distance of classifier `i` over DSEL.
    pub fn conf_bounds(&self, i: usize) -> (f64, f64) {
        self.conf_bounds[i]
    }

    fn crit(&self, j: usize, i: usize) -> &NeighborCriteria {
        &self.criteria[j * self.pool_size + i]
    }
}

/// One extracted meta-feature vector and its competence label.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaFeatureVector {
    pub values: Vec<f64>,
    /// `true` when the classifier predicts the sample's label.
    pub meta_label: bool,
    pub classifier_index: usize,
    pub sample_id: usize,
}

/// Everything about a query that is shared across pool members.
pub struct QueryContext<'a> {
    reference: &'a ReferenceSet,
    layout: MetaLayout,
    pub region: RegionOfCompetence,
    pub profile_hood: ProfileNeighborhood,
    /// DSEL ordered by distance to the query.
    order: Vec<usize>,
    predictions: Vec<Prediction>,
    boundary_distances: Vec<f64>,
    truth: Option<usize>,
}

impl<'a> QueryContext<'a> {
    /// `exclude` is the query's own DSEL row, if it belongs to DSEL.
    pub fn new(
        reference: &'a ReferenceSet,
        pool: &ClassifierPool,
        layout: MetaLayout,
        x: &[f64],
        truth: Option<usize>,
        exclude: Option<usize>,
    ) -> Result<Self> {
        let dsel = &reference.data;
        let region = region::region_of(x, dsel, layout.k, exclude)?;
        let mut predictions = Vec::with_capacity(pool.len());
        let mut boundary_distances = Vec::with_capacity(pool.len());
        for c in pool.members() {
            predictions.push(c.predict(x)?);
            boundary_distances.push(c.boundary_distance(x)?);
        }
        let profile = OutputProfile(predictions.iter().flat_map(|p| p.supports.iter().copied()).collect());
        let profile_hood = region::profile_neighborhood(&profile, &reference.profiles, layout.kp, exclude)?;
        let order = region::rank_all(x, dsel.rows(), exclude);
        Ok(Self {
            reference,
            layout,
            region,
            profile_hood,
            order,
            predictions,
            boundary_distances,
            truth,
        })
    }

    pub fn prediction(&self, i: usize) -> &Prediction {
        &self.predictions[i]
    }

    pub fn predictions(&self) -> &[Prediction] {
        &self.predictions
    }

    /// Full meta-feature vector for classifier `i`.
    pub fn values(&self, i: usize) -> Vec<f64> {
        let r = self.reference;
        let dsel = &r.data;
        let k = self.layout.k;
        let mut v = Vec::with_capacity(self.layout.len());
        let hood = &self.region.indices;

        v.extend(hood.iter().map(|&j| f64::from(u8::from(r.crit(j, i).correct))));
        v.extend(hood.iter().map(|&j| r.crit(j, i).prob));

        let hits = hood.iter().filter(|&&j| r.crit(j, i).correct).count();
        v.push(hits as f64 / k as f64);

        let assigned = self.predictions[i].label;
        let (mut same_class, mut total) = (0.0, 0.0);
        for &j in hood {
            let s = r.prediction(j, i).supports[assigned];
            total += s;
            if dsel.label(j) == assigned {
                same_class += s;
            }
        }
        v.push(if total > 0.0 { same_class / total } else { 0.0 });

        let (lo, hi) = r.conf_bounds[i];
        let d = self.boundary_distances[i];
        v.push(if hi > lo {
            ((d - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.5
        });

        v.push(ambiguity(&self.predictions[i].supports));

        v.extend(hood.iter().map(|&j| r.crit(j, i).log));
        v.extend(hood.iter().map(|&j| r.crit(j, i).prc));
        v.extend(hood.iter().map(|&j| r.crit(j, i).md));
        v.extend(hood.iter().map(|&j| r.crit(j, i).ent));
        v.extend(hood.iter().map(|&j| r.crit(j, i).exp));
        v.extend(hood.iter().map(|&j| r.crit(j, i).kl));

        let op: Vec<bool> = self
            .profile_hood
            .indices
            .iter()
            .map(|&j| r.crit(j, i).correct)
            .collect();
        v.extend(op.iter().map(|&b| f64::from(u8::from(b))));

        let rank = self.order.iter().take_while(|&&j| r.crit(j, i).correct).count();
        v.push(rank as f64);
        v.push(op.iter().take_while(|&&b| b).count() as f64);

        debug_assert_eq!(v.len(), self.layout.len());
        v
    }

    /// Labeled vector for classifier `i`; needs the query's true label.
    pub fn extract(&self, i: usize, sample_id: usize) -> Result<MetaFeatureVector> {
        let truth = self
            .truth
            .ok_or_else(|| Error::Config("meta-label needs the query's true label".into()))?;
        Ok(MetaFeatureVector {
            values: self.values(i),
            meta_label: self.predictions[i].label == truth,
            classifier_index: i,
            sample_id,
        })
    }
}

/// Labeled meta-feature rows, sample-major and classifier-minor.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaDataset {
    pub layout: MetaLayout,
    pub rows: Vec<MetaFeatureVector>,
}

impl MetaDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct sample ids in first-appearance order.
    pub fn sample_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = Vec::new();
        for r in &self.rows {
            if ids.last() != Some(&r.sample_id) && !ids.contains(&r.sample_id) {
                ids.push(r.sample_id);
            }
        }
        ids
    }

    pub fn filter_samples(&self, keep: impl Fn(usize) -> bool) -> MetaDataset {
        MetaDataset {
            layout: self.layout,
            rows: self.rows.iter().filter(|r| keep(r.sample_id)).cloned().collect(),
        }
    }

    pub fn concat(&self, other: &MetaDataset) -> MetaDataset {
        MetaDataset {
            layout: self.layout,
            rows: self.rows.iter().chain(&other.rows).cloned().collect(),
        }
    }

    /// Masked design matrix (row-major) and labels.
    pub fn to_matrix(&self, mask: &FeatureMask) -> MetaMatrix {
        let dim = mask.count_ones();
        let selected: Vec<usize> = mask.selected().collect();
        let mut values = Vec::with_capacity(self.rows.len() * dim);
        for r in &self.rows {
            values.extend(selected.iter().map(|&i| r.values[i]));
        }
        MetaMatrix {
            values,
            dim,
            labels: self.rows.iter().map(|r| r.meta_label).collect(),
        }
    }

    /// CSV export: one column per meta-feature, then `meta_label`,
    /// `classifier_index` and `sample_id`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.layout.feature_names();
        header.extend(["meta_label", "classifier_index", "sample_id"].map(String::from));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.values.iter().map(|v| v.to_string()).collect();
            rec.push(u8::from(r.meta_label).to_string());
            rec.push(r.classifier_index.to_string());
            rec.push(r.sample_id.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Dense training matrix for the meta-classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaMatrix {
    pub values: Vec<f64>,
    pub dim: usize,
    pub labels: Vec<bool>,
}

impl MetaMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

/// Extracts labeled meta-feature rows for every sample of `samples` and every
/// pool member. `ids` gives the sample id recorded for each row of `samples`.
/// When the samples are DSEL rows themselves, `dsel_rows[j]` names the DSEL
/// row of sample `j` so that its neighborhoods skip it.
pub fn build_meta_dataset(
    pool: &ClassifierPool,
    reference: &ReferenceSet,
    layout: MetaLayout,
    samples: &Dataset,
    ids: &[usize],
    dsel_rows: Option<&[usize]>,
) -> Result<MetaDataset> {
    if ids.len() != samples.len() || dsel_rows.is_some_and(|r| r.len() != samples.len()) {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            found: ids.len(),
        });
    }
    let per_sample: Vec<Vec<MetaFeatureVector>> = (0..samples.len())
        .into_par_iter()
        .map(|j| {
            let ctx = QueryContext::new(
                reference,
                pool,
                layout,
                samples.row(j),
                Some(samples.label(j)),
                dsel_rows.map(|r| r[j]),
            )?;
            (0..pool.len()).map(|i| ctx.extract(i, ids[j])).collect()
        })
        .collect::<Result<_>>()?;
    Ok(MetaDataset {
        layout,
        rows: per_sample.into_iter().flatten().collect(),
    })
}

/// Random mask with each bit set with probability one half.
pub fn random_mask(len: usize, rng: &mut rng::Rng) -> FeatureMask {
    FeatureMask::from_bits((0..len).map(|_| rng.random_bool(0.5)).collect())
}
