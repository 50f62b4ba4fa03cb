//! Replicated benchmark from a TOML file, with the CSV reports and the
//! meta-feature selection frequencies.
//!
//!     cargo run --release --example benchmark [config.toml] [output-dir]

use metades::experiment::{run_experiment, ExperimentConfig};

fn main() -> metades::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/iris.toml").into());
    let mut config = ExperimentConfig::load(&path)?;
    if let Some(out) = args.next() {
        config.output_dir = Some(out.into());
    }
    let report = run_experiment(&config)?;
    print!("{}", report.summary_text());

    if let Some(freq) = &report.frequencies {
        println!("\nmost selected meta-features:");
        let mut features = freq.features.clone();
        features.sort_by(|a, b| b.frequency.total_cmp(&a.frequency));
        for f in features.iter().take(8) {
            println!("  {:<12} {:.2} ({})", f.name, f.frequency, f.band.name());
        }
    }
    if let Some(dir) = &config.output_dir {
        for p in report.write_to_dir(dir)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}
