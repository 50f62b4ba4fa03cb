//! Meta-feature selection alone: build the meta-data for a P2 pool, run the
//! swarm with both transfer functions and print the convergence trace.
//!
//!     cargo run --release --example bpso_selection

use metades::bpso::{optimize, BpsoConfig, OracleFitness, Transfer};
use metades::dataset::{generate_p2, ScaleParams};
use metades::des::DesParams;
use metades::features::{build_meta_dataset, ReferenceSet, RrcConfig};
use metades::pool::{bagging, PoolConfig};
use metades::selector::MetaClassifierConfig;
use metades::training::{halve_by_sample, low_consensus};

fn main() -> metades::error::Result<()> {
    let raw = generate_p2(500, 1);
    let scale = ScaleParams::fit(&raw);
    let pool = bagging(
        &scale.transform(&raw)?,
        &PoolConfig {
            size: 5,
            ..Default::default()
        },
        3,
    )?;
    let reference = ReferenceSet::build(&pool, scale.transform(&generate_p2(500, 2))?, &RrcConfig::default())?;
    let params = DesParams::default();

    // Meta-training data: low-consensus samples only.
    let meta_raw = scale.transform(&generate_p2(500, 3))?;
    let keep = low_consensus(&pool, &meta_raw, params.consensus_threshold);
    let meta = build_meta_dataset(&pool, &reference, params.layout(), &meta_raw.subset(&keep), &keep, None)?;
    let all: Vec<usize> = (0..reference.len()).collect();
    let validation = build_meta_dataset(&pool, &reference, params.layout(), reference.data(), &all, Some(&all))?;
    let (fit_half, score_half) = halve_by_sample(&meta, 5);
    println!("{} meta-rows from {} low-consensus samples", meta.len(), keep.len());

    let objective = OracleFitness::new(fit_half, score_half, validation, MetaClassifierConfig::default());
    for transfer in [Transfer::S, Transfer::V] {
        let config = BpsoConfig {
            transfer,
            runs: 3,
            seed: 1,
            ..Default::default()
        };
        let result = optimize(&objective, &config);
        println!("\ntransfer {transfer:?}: generations per run {:?}", result.generations);
        for row in result.trace.iter().filter(|r| r.run == 0) {
            println!(
                "  gen {:>3}  gbest {:.4}  archive {:.4}  swarm mean {:.4}",
                row.generation, row.gbest_fitness, row.archive_validation_fitness, row.mean_swarm_fitness
            );
        }
        let a = &result.archive;
        println!(
            "  archive: run {} gen {} validation {:.4}",
            a.run, a.generation, a.validation_fitness
        );
        println!("  mask {}", a.best_mask);
    }
    Ok(())
}
