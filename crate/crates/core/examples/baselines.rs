//! Dynamic and static baselines on a bundled CSV dataset.
//!
//!     cargo run --release --example baselines [path/to.csv]

use metades::dataset::{load_csv, split_holdout, LabelColumn, ScaleParams, SplitSpec};
use metades::des::{oracle_accuracy, Baselines, Method};
use metades::features::{ReferenceSet, RrcConfig};
use metades::pool::{bagging, PoolConfig};

fn main() -> metades::error::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/wine.csv").into());
    let data = load_csv(&path, LabelColumn::Last)?;
    println!(
        "{path}: {} samples, {} features, classes {:?}",
        data.len(),
        data.feature_count(),
        data.class_names()
    );

    let splits = split_holdout(
        &data,
        &SplitSpec {
            seed: 3,
            ..Default::default()
        },
    )?;
    let scale = ScaleParams::fit(&splits.train);
    let pool = bagging(
        &scale.transform(&splits.train)?,
        &PoolConfig {
            size: 20,
            ..Default::default()
        },
        1,
    )?;
    let reference = ReferenceSet::build(&pool, scale.transform(&splits.dsel)?, &RrcConfig::default())?;
    let test = scale.transform(&splits.test)?;

    let baselines = Baselines::new(&pool, &reference, 7)?;
    println!("single best member: {}", baselines.single_best());
    println!("static ensemble: {:?}\n", baselines.static_ensemble());
    for m in Method::ALL.into_iter().filter(|m| m.is_baseline()) {
        let hits = (0..test.len())
            .filter(|&j| baselines.predict(m, test.row(j)).is_ok_and(|p| p == test.label(j)))
            .count();
        println!("{:<18} {:.4}", m.name(), hits as f64 / test.len() as f64);
    }
    println!("{:<18} {:.4}", "ORACLE", oracle_accuracy(&pool, &test));
    Ok(())
}
