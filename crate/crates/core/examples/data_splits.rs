//! Load a CSV, make the stratified four-way holdout and fit the scaling.
//!
//!     cargo run --release --example data_splits

use metades::dataset::{load_csv, split_holdout, LabelColumn, ScaleParams, SplitSpec};

fn main() -> metades::error::Result<()> {
    let data = load_csv(
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/breast_cancer.csv"),
        LabelColumn::Last,
    )?;
    println!("classes {:?}, counts {:?}", data.class_names(), data.class_counts());
    let s = split_holdout(
        &data,
        &SplitSpec {
            seed: 1,
            ..Default::default()
        },
    )?;
    for (name, part) in [
        ("train", &s.train),
        ("meta-train", &s.meta_train),
        ("dsel", &s.dsel),
        ("test", &s.test),
    ] {
        println!(
            "{name:<11} {:>4} samples, class counts {:?}",
            part.len(),
            part.class_counts()
        );
    }
    let scale = ScaleParams::fit(&s.train);
    let test = scale.transform(&s.test)?;
    let (lo, hi) = test
        .rows()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    println!("scaled test values lie in [{lo}, {hi}]");
    Ok(())
}
