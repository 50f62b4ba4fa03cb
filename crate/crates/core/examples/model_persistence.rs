//! Save a trained model, reload it, and check that it classifies the same.
//!
//!     cargo run --release --example model_persistence

use metades::bpso::BpsoConfig;
use metades::dataset::{load_csv, split_holdout, LabelColumn, SplitSpec};
use metades::persist::{load_model, save_model};
use metades::pool::PoolConfig;
use metades::training::{fit, TrainConfig};

fn main() -> metades::error::Result<()> {
    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"), LabelColumn::Last)?;
    let s = split_holdout(&data, &SplitSpec::default())?;
    let config = TrainConfig {
        pool: PoolConfig {
            size: 10,
            ..Default::default()
        },
        bpso: BpsoConfig {
            runs: 3,
            ..Default::default()
        },
        ..Default::default()
    };
    let model = fit(&s.train, &s.meta_train, &s.dsel, &config)?.model;

    let path = std::env::temp_dir().join("metades-iris-model.json");
    save_model(&model, &path)?;
    println!("saved {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    let back = load_model(&path)?;

    let mut same = 0;
    for (x, &y) in s.test.rows().zip(s.test.labels()) {
        let (a, b) = (model.classify(x)?, back.classify(x)?);
        same += usize::from(a == b);
        println!(
            "truth {:<10} predicted {:<10} ensemble {:?}{}",
            data.class_names()[y],
            back.class_names()[b.label],
            b.selected,
            if b.fallback { " (fallback)" } else { "" }
        );
    }
    println!("{same}/{} decisions identical after reload", s.test.len());
    Ok(())
}
