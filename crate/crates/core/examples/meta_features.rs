//! Extract the meta-feature vector of every pool member for one query and
//! print it grouped by feature set.
//!
//!     cargo run --release --example meta_features

use metades::dataset::{generate_p2, ScaleParams};
use metades::features::{FeatureSet, MetaLayout, QueryContext, ReferenceSet, RrcConfig};
use metades::pool::{bagging, PoolConfig};

fn main() -> metades::error::Result<()> {
    let raw = generate_p2(400, 1);
    let scale = ScaleParams::fit(&raw);
    let train = scale.transform(&raw)?;
    let pool = bagging(
        &train,
        &PoolConfig {
            size: 3,
            ..Default::default()
        },
        11,
    )?;
    let reference = ReferenceSet::build(&pool, scale.transform(&generate_p2(300, 2))?, &RrcConfig::default())?;

    let layout = MetaLayout::default();
    let query = scale.transform_row(&[0.4, 0.6]);
    let truth = 0;
    let ctx = QueryContext::new(&reference, &pool, layout, &query, Some(truth), None)?;
    println!("meta-feature vector length: {}", layout.len());

    for i in 0..pool.len() {
        let v = ctx.extract(i, 0)?;
        println!(
            "\nclassifier {i}: predicts {}, competent: {}",
            ctx.prediction(i).label,
            v.meta_label
        );
        for set in FeatureSet::ALL {
            let values: Vec<String> = v.values[layout.range(set)].iter().map(|x| format!("{x:.3}")).collect();
            println!("  {:<9} {}", set.name(), values.join(" "));
        }
    }
    Ok(())
}
