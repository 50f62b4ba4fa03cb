//! Train on the P2 problem with a five-perceptron pool and compare the
//! dynamic selector with the pool's baselines.
//!
//!     cargo run --release --example p2_walkthrough

use metades::bpso::BpsoConfig;
use metades::dataset::generate_p2;
use metades::des::{oracle_accuracy, Baselines, Method};
use metades::pool::PoolConfig;
use metades::training::{fit, TrainConfig};

fn main() -> metades::error::Result<()> {
    let (train, meta, dsel, test) = (
        generate_p2(500, 1),
        generate_p2(500, 2),
        generate_p2(500, 3),
        generate_p2(2000, 4),
    );
    let config = TrainConfig {
        pool: PoolConfig {
            size: 5,
            ..Default::default()
        },
        bpso: BpsoConfig {
            runs: 5,
            ..Default::default()
        },
        seed: 7,
        ..Default::default()
    };
    let fitted = fit(&train, &meta, &dsel, &config)?;
    let model = &fitted.model;
    let report = &fitted.report;
    println!(
        "meta-training samples kept by the consensus filter: {} of {}{}",
        report.meta_samples.1,
        report.meta_samples.0,
        if report.meta_filter_skipped {
            " (filter skipped)"
        } else {
            ""
        }
    );
    println!(
        "selected {} of {} meta-features, validation distance {:.4}",
        model.mask.count_ones(),
        model.mask.len(),
        report.optimization.archive.validation_fitness
    );

    let scaled = model.scale.transform(&test)?;
    let decisions = model.classify_all_scaled(&scaled)?;
    let hits = decisions
        .iter()
        .zip(scaled.labels())
        .filter(|(d, &y)| d.label == y)
        .count();
    let mean_selected = decisions.iter().map(|d| d.selected.len()).sum::<usize>() as f64 / decisions.len() as f64;
    println!(
        "\n{:<18} {:.4}  (mean ensemble size {:.2})",
        "META-DES.Oracle",
        hits as f64 / 2000.0,
        mean_selected
    );

    let baselines = Baselines::new(&model.pool, &model.reference, config.des.k)?;
    for m in Method::ALL.into_iter().filter(|m| m.is_baseline()) {
        let hits = (0..scaled.len())
            .filter(|&j| baselines.predict(m, scaled.row(j)).is_ok_and(|p| p == scaled.label(j)))
            .count();
        println!("{:<18} {:.4}", m.name(), hits as f64 / scaled.len() as f64);
    }
    println!("{:<18} {:.4}", "ORACLE", oracle_accuracy(&model.pool, &scaled));
    Ok(())
}
