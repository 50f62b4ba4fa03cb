use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use metades::dataset::{
    generate_p2_with, load_csv, split_holdout, write_csv, Dataset, LabelColumn, P2Boundaries, SplitSpec,
};
use metades::des::{write_predictions, Method, PredictionRecord};
use metades::error::{Error, Result};
use metades::experiment::{frequency_report, read_masks_csv, run_experiment, ExperimentConfig};
use metades::persist::{load_model, save_model};
use metades::training::{fit, TrainConfig};

#[derive(Parser)]
#[command(
    name = "metades",
    version,
    about = "Dynamic ensemble selection with Oracle-guided meta-feature selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the P2 problem to CSV.
    GenP2 {
        #[arg(short, long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the printed first boundary curve (unbalanced classes).
        #[arg(long)]
        printed_e1: bool,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit a model on a CSV file and save it.
    Train(TrainArgs),
    /// Classify the rows of a CSV file with a saved model.
    Classify(ClassifyArgs),
    /// Run a replicated comparison described by a TOML file.
    Benchmark(BenchmarkArgs),
    /// Selection frequencies of the meta-features over saved masks.
    FreqReport {
        /// `masks.csv` written by `benchmark`.
        masks: PathBuf,
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Labelled CSV, split into train / meta-train / DSEL / test.
    data: PathBuf,
    #[arg(long, default_value = "last")]
    label_column: LabelColumn,
    /// TOML with any of the `pool`, `des`, `bpso`, `meta`, `rrc` tables.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long, default_value = "model.json")]
    model: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(short, long)]
    model: PathBuf,
    input: PathBuf,
    /// Label column of the input; without it every column is a feature.
    #[arg(long)]
    label_column: Option<LabelColumn>,
    /// Predictions CSV; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Comma-separated method names, replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn train(args: TrainArgs) -> Result<()> {
    let mut config: TrainConfig = match &args.config {
        Some(p) => toml::from_str(&fs::read_to_string(p)?).map_err(|e| Error::Config(e.to_string()))?,
        None => TrainConfig::default(),
    };
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let data = load_csv(&args.data, args.label_column)?;
    let splits = split_holdout(
        &data,
        &SplitSpec {
            seed: config.seed,
            ..Default::default()
        },
    )?;
    let fitted = fit(&splits.train, &splits.meta_train, &splits.dsel, &config)?;
    let model = &fitted.model;
    let hits = splits
        .test
        .rows()
        .zip(splits.test.labels())
        .map(|(x, &y)| model.classify(x).map(|d| d.label == y))
        .collect::<Result<Vec<bool>>>()?;
    save_model(model, &args.model)?;
    let archive = &fitted.report.optimization.archive;
    eprintln!(
        "pool {} | mask {} of {} meta-features | validation distance {:.4}",
        model.pool.len(),
        model.mask.count_ones(),
        model.mask.len(),
        archive.validation_fitness
    );
    eprintln!(
        "held-out accuracy {:.4} on {} samples",
        hits.iter().filter(|h| **h).count() as f64 / hits.len() as f64,
        hits.len()
    );
    eprintln!("model written to {}", args.model.display());
    Ok(())
}

fn read_features(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|v| v.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(_) => {
                let (column, value) = rec
                    .iter()
                    .enumerate()
                    .find(|(_, v)| v.trim().parse::<f64>().is_err())
                    .expect("some cell failed");
                return Err(Error::Parse {
                    path: path.into(),
                    row: i + 1,
                    column: column + 1,
                    value: value.into(),
                });
            }
        }
    }
    Ok(rows)
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let names = model.class_names().to_vec();
    let (rows, truth): (Vec<Vec<f64>>, Option<Vec<String>>) = match args.label_column {
        Some(col) => {
            let ds: Dataset = load_csv(&args.input, col)?;
            let truth = ds.labels().iter().map(|&l| ds.class_names()[l].clone()).collect();
            (ds.rows().map(<[f64]>::to_vec).collect(), Some(truth))
        }
        None => (read_features(&args.input)?, None),
    };
    let mut records = Vec::with_capacity(rows.len());
    for (j, x) in rows.iter().enumerate() {
        let d = model.classify(x)?;
        records.push(PredictionRecord {
            sample_id: j,
            true_label: truth.as_ref().map_or_else(String::new, |t| t[j].clone()),
            predicted_label: names[d.label].clone(),
            method: Method::MetaDesOracle,
            fallback: d.fallback,
            selected_count: d.selected.len(),
        });
    }
    write_predictions(&records, output(args.output.as_deref())?)?;
    if truth.is_some() && !records.is_empty() {
        let hits = records.iter().filter(|r| r.true_label == r.predicted_label).count();
        eprintln!(
            "accuracy {:.4} on {} samples",
            hits as f64 / records.len() as f64,
            records.len()
        );
    }
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(r) = args.replications {
        config.replications = r;
    }
    if let Some(m) = args.methods {
        config.methods = m;
    }
    if args.output_dir.is_some() {
        config.output_dir = args.output_dir;
    }
    config.validate()?;
    let report = run_experiment(&config)?;
    print!("{}", report.summary_text());
    if let Some(dir) = &config.output_dir {
        report.write_to_dir(dir)?;
        eprintln!("reports written to {}", dir.display());
    }
    Ok(())
}

fn freq_report(masks: &Path, output_dir: Option<&Path>) -> Result<()> {
    let (layout, masks) = read_masks_csv(masks)?;
    let report = frequency_report(&masks, layout)?;
    match output_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            report.write_features_csv(File::create(dir.join("frequencies.csv"))?)?;
            report.write_sets_csv(File::create(dir.join("set_frequencies.csv"))?)?;
        }
        None => report.write_sets_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenP2 {
            n,
            seed,
            printed_e1,
            output: out,
        } => {
            let b = if printed_e1 {
                P2Boundaries::PRINTED
            } else {
                P2Boundaries::BALANCED
            };
            write_csv(&generate_p2_with(n, seed, &b), output(out.as_deref())?)
        }
        Command::Train(a) => train(a),
        Command::Classify(a) => classify(a),
        Command::Benchmark(a) => benchmark(a),
        Command::FreqReport { masks, output_dir } => freq_report(&masks, output_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
