//! End-to-end training: pool generation, meta-data construction with the
//! consensus filter, meta-feature selection, and the final selector.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bpso::{self, BpsoConfig, Optimization, OracleFitness};
use crate::dataset::{Dataset, ScaleParams};
use crate::des::{consensus, DesModel, DesParams};
use crate::error::Result;
use crate::features::{build_meta_dataset, MetaDataset, ReferenceSet, RrcConfig};
use crate::pool::{bagging, ClassifierPool, PoolConfig};
use crate::rng;
use crate::selector::{train_meta, MetaClassifierConfig};

/// Smallest filtered meta-training set (in samples) used as is.
pub const MIN_FILTERED_SAMPLES: usize = 4;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub pool: PoolConfig,
    pub des: DesParams,
    pub bpso: BpsoConfig,
    pub meta: MetaClassifierConfig,
    pub rrc: RrcConfig,
    /// Base seed; every stage derives its own.
    pub seed: u64,
}

/// Bookkeeping from one [`fit`] call.
#[derive(Clone, Debug)]
pub struct FitReport {
    /// Meta-training samples before and after the consensus filter.
    pub meta_samples: (usize, usize),
    /// DSEL samples before and after the consensus filter.
    pub dsel_samples: (usize, usize),
    /// The filter left too little meta-training data and was skipped.
    pub meta_filter_skipped: bool,
    pub dsel_filter_skipped: bool,
    /// Rows of the selection-training and selection-scoring halves.
    pub half_rows: (usize, usize),
    pub optimization: Optimization,
}

#[derive(Clone, Debug)]
pub struct Fitted {
    pub model: DesModel,
    pub report: FitReport,
}

/// Indices of the samples whose pool consensus is below `threshold`.
pub fn low_consensus(pool: &ClassifierPool, data: &Dataset, threshold: f64) -> Vec<usize> {
    (0..data.len())
        .filter(|&j| consensus(pool, data.row(j), data.label(j)) < threshold)
        .collect()
}

/// Whether a meta-dataset has rows of both meta-classes.
fn has_both_classes(meta: &MetaDataset) -> bool {
    meta.rows.iter().any(|r| r.meta_label) && meta.rows.iter().any(|r| !r.meta_label)
}

/// Low-consensus subset of `data` turned into meta-data; falls back to every
/// sample when the filtered set is too small or single-class. The flag
/// reports the fallback.
fn filtered_meta(
    pool: &ClassifierPool,
    reference: &ReferenceSet,
    data: &Dataset,
    threshold: f64,
    layout: crate::features::MetaLayout,
    is_dsel: bool,
) -> Result<(MetaDataset, usize, bool)> {
    let build = |keep: &[usize]| {
        let subset = data.subset(keep);
        build_meta_dataset(pool, reference, layout, &subset, keep, is_dsel.then_some(keep))
    };
    let keep = low_consensus(pool, data, threshold);
    if keep.len() >= MIN_FILTERED_SAMPLES {
        let meta = build(&keep)?;
        if has_both_classes(&meta) {
            return Ok((meta, keep.len(), false));
        }
    }
    let all: Vec<usize> = (0..data.len()).collect();
    Ok((build(&all)?, all.len(), true))
}

/// Splits meta-data 50/50 by sample id with a seeded shuffle.
pub fn halve_by_sample(meta: &MetaDataset, seed: u64) -> (MetaDataset, MetaDataset) {
    let mut ids = meta.sample_ids();
    ids.sort_unstable();
    ids.shuffle(&mut rng::derived_rng(seed, "halve", 0));
    let first: std::collections::HashSet<usize> = ids[..ids.len().div_ceil(2)].iter().copied().collect();
    (
        meta.filter_samples(|id| first.contains(&id)),
        meta.filter_samples(|id| !first.contains(&id)),
    )
}

/// Trains a model from raw (unscaled) splits. Scaling is fitted on `train`.
pub fn fit(train: &Dataset, meta_train: &Dataset, dsel: &Dataset, config: &TrainConfig) -> Result<Fitted> {
    config.des.validate()?;
    let scale = ScaleParams::fit(train);
    let train = scale.transform(train)?;
    let meta_train = scale.transform(meta_train)?;
    let dsel = scale.transform(dsel)?;
    let pool = bagging(&train, &config.pool, rng::derive_seed(config.seed, "pool", 0))?;
    fit_with_pool(pool, scale, &meta_train, dsel, config)
}

/// Trains the selection stage on top of an existing pool. The datasets must
/// already be scaled with `scale`.
pub fn fit_with_pool(
    pool: ClassifierPool,
    scale: ScaleParams,
    meta_train: &Dataset,
    dsel: Dataset,
    config: &TrainConfig,
) -> Result<Fitted> {
    let layout = config.des.layout();
    let rrc = RrcConfig {
        seed: rng::derive_seed(config.seed, "rrc", config.rrc.seed),
        ..config.rrc.clone()
    };
    let reference = ReferenceSet::build(&pool, dsel, &rrc)?;
    let h_c = config.des.consensus_threshold;

    let (meta, meta_kept, meta_skipped) = filtered_meta(&pool, &reference, meta_train, h_c, layout, false)?;
    let (validation, dsel_kept, dsel_skipped) = filtered_meta(&pool, &reference, reference.data(), h_c, layout, true)?;

    let (fit_half, score_half) = halve_by_sample(&meta, rng::derive_seed(config.seed, "meta-halves", 0));
    let half_rows = (fit_half.len(), score_half.len());
    let objective = OracleFitness::new(fit_half, score_half, validation, config.meta.clone());
    let bpso_config = BpsoConfig {
        seed: rng::derive_seed(config.seed, "bpso", config.bpso.seed),
        ..config.bpso.clone()
    };
    let optimization = bpso::optimize(&objective, &bpso_config);
    let mask = optimization.archive.best_mask.clone();

    let selector = train_meta(&meta.to_matrix(&mask), &mask, &config.meta)?;
    let report = FitReport {
        meta_samples: (meta_train.len(), meta_kept),
        dsel_samples: (reference.len(), dsel_kept),
        meta_filter_skipped: meta_skipped,
        dsel_filter_skipped: dsel_skipped,
        half_rows,
        optimization,
    };
    let model = DesModel::new(pool, selector, mask, scale, reference, config.des.clone())?;
    Ok(Fitted { model, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_p2;

    fn small_config() -> TrainConfig {
        TrainConfig {
            pool: PoolConfig {
                size: 5,
                ..Default::default()
            },
            bpso: BpsoConfig {
                runs: 1,
                swarm_size: 6,
                max_generations: 4,
                ..Default::default()
            },
            rrc: RrcConfig {
                samples: 50,
                ..Default::default()
            },
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn halves_are_disjoint_by_sample() {
        let (train, meta, dsel) = (generate_p2(200, 1), generate_p2(80, 2), generate_p2(120, 3));
        let fitted = fit(&train, &meta, &dsel, &small_config()).unwrap();
        let (a, b) = fitted.report.half_rows;
        assert_eq!((a + b) % 5, 0);
        assert!(a > 0 && b > 0);
        assert!(fitted.report.meta_samples.1 <= 80);
    }

    #[test]
    fn halving_keeps_samples_whole() {
        let (train, meta, dsel) = (generate_p2(200, 1), generate_p2(40, 2), generate_p2(100, 3));
        let config = small_config();
        let scale = ScaleParams::fit(&train);
        let pool = bagging(&scale.transform(&train).unwrap(), &config.pool, 1).unwrap();
        let reference = ReferenceSet::build(&pool, scale.transform(&dsel).unwrap(), &config.rrc).unwrap();
        let ids: Vec<usize> = (0..40).collect();
        let md = build_meta_dataset(
            &pool,
            &reference,
            config.des.layout(),
            &scale.transform(&meta).unwrap(),
            &ids,
            None,
        )
        .unwrap();
        let (x, y) = halve_by_sample(&md, 9);
        let xs = x.sample_ids();
        let ys = y.sample_ids();
        assert_eq!(xs.len(), 20);
        assert_eq!(ys.len(), 20);
        assert!(xs.iter().all(|i| !ys.contains(i)));
        assert_eq!(x.len() + y.len(), md.len());
    }

    #[test]
    fn fit_is_deterministic() {
        let (train, meta, dsel) = (generate_p2(200, 4), generate_p2(60, 5), generate_p2(100, 6));
        let a = fit(&train, &meta, &dsel, &small_config()).unwrap();
        let b = fit(&train, &meta, &dsel, &small_config()).unwrap();
        assert_eq!(a.model.mask, b.model.mask);
        assert_eq!(a.model.selector, b.model.selector);
    }

    #[test]
    fn full_consensus_falls_back_to_all_samples() {
        let (train, meta, dsel) = (generate_p2(200, 4), generate_p2(30, 5), generate_p2(100, 6));
        let mut config = small_config();
        config.des.consensus_threshold = 0.0;
        let fitted = fit(&train, &meta, &dsel, &config).unwrap();
        assert!(fitted.report.meta_filter_skipped);
        assert_eq!(fitted.report.meta_samples, (30, 30));
    }
}
