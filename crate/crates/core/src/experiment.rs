//! Replicated experiments: configuration, orchestration, aggregation and
//! report files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bpso::BpsoConfig;
use crate::dataset::{generate_p2_with, load_csv, split_holdout, Dataset, LabelColumn, P2Boundaries, SplitSpec};
use crate::des::{oracle_accuracy, Baselines, DesParams, Method};
use crate::error::{Error, Result};
use crate::features::{FeatureMask, FeatureSet, MetaLayout, RrcConfig};
use crate::pool::PoolConfig;
use crate::rng;
use crate::selector::MetaClassifierConfig;
use crate::training::{fit, TrainConfig};

/// Where replication data comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    /// Fresh P2 samples for every split and replication.
    P2 {
        #[serde(default = "defaults::p2_train")]
        train: usize,
        #[serde(default = "defaults::p2_train")]
        meta: usize,
        #[serde(default = "defaults::p2_train")]
        dsel: usize,
        #[serde(default = "defaults::p2_test")]
        test: usize,
        /// Use the printed (unbalanced) first boundary curve.
        #[serde(default)]
        printed_e1: bool,
    },
    /// A CSV file split by stratified holdout in every replication.
    Csv {
        path: PathBuf,
        #[serde(default)]
        label_column: LabelColumn,
    },
}

mod defaults {
    pub fn p2_train() -> usize {
        500
    }
    pub fn p2_test() -> usize {
        2000
    }
    pub fn replications() -> usize {
        20
    }
    pub fn methods() -> Vec<crate::des::Method> {
        crate::des::Method::ALL.to_vec()
    }
    pub fn reference() -> crate::des::Method {
        crate::des::Method::MetaDesOracle
    }
    pub fn name() -> String {
        "experiment".into()
    }
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::P2 {
            train: 500,
            meta: 500,
            dsel: 500,
            test: 2000,
            printed_e1: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "defaults::name")]
    pub name: String,
    #[serde(default)]
    pub data: DataSource,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub pool: PoolConfig,
    #[serde(default)]
    pub des: DesParams,
    #[serde(default)]
    pub bpso: BpsoConfig,
    #[serde(default)]
    pub meta: MetaClassifierConfig,
    #[serde(default)]
    pub rrc: RrcConfig,
    #[serde(default = "defaults::replications")]
    pub replications: usize,
    /// Rows of the report, in order. Repeats are allowed.
    #[serde(default = "defaults::methods")]
    pub methods: Vec<Method>,
    /// Method the win-tie-loss counts are taken against.
    #[serde(default = "defaults::reference")]
    pub reference: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a TOML file; a relative CSV path is resolved against the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut config = Self::from_toml(&fs::read_to_string(path)?)?;
        if let DataSource::Csv { path: data, .. } = &mut config.data {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        self.des.validate()?;
        if let DataSource::P2 {
            train,
            meta,
            dsel,
            test,
            ..
        } = self.data
        {
            if [train, meta, dsel, test].contains(&0) {
                return Err(Error::Config("P2 split sizes must be positive".into()));
            }
        } else {
            self.split.validate()?;
        }
        Ok(())
    }

    fn train_config(&self, replication: usize) -> TrainConfig {
        TrainConfig {
            pool: self.pool.clone(),
            des: self.des.clone(),
            bpso: self.bpso.clone(),
            meta: self.meta.clone(),
            rrc: self.rrc.clone(),
            seed: rng::derive_seed(self.seed, "replication", replication as u64),
        }
    }
}

/// Raw (unscaled) splits of one replication.
#[derive(Clone, Debug)]
pub struct ReplicationData {
    pub train: Dataset,
    pub meta_train: Dataset,
    pub dsel: Dataset,
    pub test: Dataset,
}

/// Builds the splits for replication `r`. `loaded` is the CSV dataset when
/// the source is a file.
pub fn replication_data(config: &ExperimentConfig, loaded: Option<&Dataset>, r: usize) -> Result<ReplicationData> {
    match &config.data {
        DataSource::P2 {
            train,
            meta,
            dsel,
            test,
            printed_e1,
        } => {
            let b = if *printed_e1 {
                P2Boundaries::PRINTED
            } else {
                P2Boundaries::BALANCED
            };
            let seed = |tag: &str| rng::derive_seed(config.seed, tag, r as u64);
            Ok(ReplicationData {
                train: generate_p2_with(*train, seed("p2-train"), &b),
                meta_train: generate_p2_with(*meta, seed("p2-meta"), &b),
                dsel: generate_p2_with(*dsel, seed("p2-dsel"), &b),
                test: generate_p2_with(*test, seed("p2-test"), &b),
            })
        }
        DataSource::Csv { .. } => {
            let ds = loaded.ok_or_else(|| Error::Config("CSV dataset not loaded".into()))?;
            let spec = SplitSpec {
                seed: rng::derive_seed(config.seed, "split", r as u64),
                ..config.split.clone()
            };
            let s = split_holdout(ds, &spec)?;
            Ok(ReplicationData {
                train: s.train,
                meta_train: s.meta_train,
                dsel: s.dsel,
                test: s.test,
            })
        }
    }
}

/// Outcome of one replication. `accuracies` follows the configured method
/// order; a failed replication has no accuracies and an error message.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationResult {
    pub replication: usize,
    pub accuracies: Vec<Option<f64>>,
    pub mask: Option<FeatureMask>,
    /// Share of test samples classified by the max-competence fallback.
    pub fallback_rate: Option<f64>,
    pub error: Option<String>,
}

fn accuracy(predicted: impl Iterator<Item = usize>, truth: &[usize]) -> f64 {
    let hits = predicted.zip(truth).filter(|(p, t)| p == *t).count();
    hits as f64 / truth.len() as f64
}

/// Trains and evaluates every configured method on one replication.
pub fn run_replication(config: &ExperimentConfig, loaded: Option<&Dataset>, r: usize) -> Result<ReplicationResult> {
    let data = replication_data(config, loaded, r)?;
    let fitted = fit(&data.train, &data.meta_train, &data.dsel, &config.train_config(r))?;
    let model = &fitted.model;
    let test = model.scale.transform(&data.test)?;
    let truth = test.labels();
    let baselines = Baselines::new(&model.pool, &model.reference, config.des.k)?;

    let mut des_result: Option<(f64, f64)> = None;
    let mut accuracies = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let acc = match method {
            Method::MetaDesOracle => {
                if des_result.is_none() {
                    let decisions = model.classify_all_scaled(&test)?;
                    let fallbacks = decisions.iter().filter(|d| d.fallback).count();
                    des_result = Some((
                        accuracy(decisions.iter().map(|d| d.label), truth),
                        fallbacks as f64 / test.len() as f64,
                    ));
                }
                des_result.expect("computed above").0
            }
            Method::Oracle => oracle_accuracy(&model.pool, &test),
            baseline => {
                let predicted = (0..test.len())
                    .into_par_iter()
                    .map(|j| baselines.predict(baseline, test.row(j)))
                    .collect::<Result<Vec<usize>>>()?;
                accuracy(predicted.into_iter(), truth)
            }
        };
        accuracies.push(Some(acc));
    }
    Ok(ReplicationResult {
        replication: r,
        accuracies,
        mask: Some(model.mask.clone()),
        fallback_rate: des_result.map(|d| d.1),
        error: None,
    })
}

/// Mean ranks (1 = best) of `scores`, higher score ranking better; ties
/// share the mean of the ranks they span.
pub fn mean_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Frequency bands of the selection-frequency plot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    White,
    LightGrey,
    DarkGrey,
    Black,
}

impl Band {
    /// Lower bounds are inclusive: [0, .25) white, [.25, .5) light grey,
    /// [.5, .75) dark grey, [.75, 1] black.
    pub fn of(frequency: f64) -> Band {
        if frequency < 0.25 {
            Band::White
        } else if frequency < 0.5 {
            Band::LightGrey
        } else if frequency < 0.75 {
            Band::DarkGrey
        } else {
            Band::Black
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::White => "white",
            Band::LightGrey => "light grey",
            Band::DarkGrey => "dark grey",
            Band::Black => "black",
        }
    }
}

/// Per-bit share of masks that select the bit.
pub fn selection_frequencies(masks: &[FeatureMask]) -> Result<Vec<f64>> {
    let first = masks.first().ok_or(Error::Empty)?;
    let d = first.len();
    if let Some(bad) = masks.iter().find(|m| m.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    Ok((0..d)
        .map(|i| masks.iter().filter(|m| m.get(i)).count() as f64 / masks.len() as f64)
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureFrequency {
    pub name: String,
    pub set: FeatureSet,
    pub frequency: f64,
    pub band: Band,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyReport {
    pub masks: usize,
    pub features: Vec<FeatureFrequency>,
    /// Mean frequency of each set's members, in layout order.
    pub sets: Vec<(FeatureSet, f64, Band)>,
}

pub fn frequency_report(masks: &[FeatureMask], layout: MetaLayout) -> Result<FrequencyReport> {
    let freq = selection_frequencies(masks)?;
    if freq.len() != layout.len() {
        return Err(Error::DimensionMismatch {
            expected: layout.len(),
            found: freq.len(),
        });
    }
    let features = layout
        .feature_names()
        .into_iter()
        .zip(&freq)
        .enumerate()
        .map(|(i, (name, &f))| FeatureFrequency {
            name,
            set: layout.set_of(i),
            frequency: f,
            band: Band::of(f),
        })
        .collect();
    let sets = FeatureSet::ALL
        .into_iter()
        .map(|s| {
            let r = layout.range(s);
            let mean = freq[r.clone()].iter().sum::<f64>() / r.len() as f64;
            (s, mean, Band::of(mean))
        })
        .collect();
    Ok(FrequencyReport {
        masks: masks.len(),
        features,
        sets,
    })
}

impl FrequencyReport {
    pub fn write_features_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["feature", "set", "frequency", "band"])?;
        for f in &self.features {
            w.write_record([f.name.as_str(), f.set.name(), &fmt6(f.frequency), f.band.name()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_sets_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["set", "frequency", "band"])?;
        for (s, f, b) in &self.sets {
            w.write_record([s.name(), &fmt6(*f), b.name()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Aggregate row of the summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub average_rank: Option<f64>,
    /// Reference method's wins, ties and losses against this row.
    pub win_tie_loss: (usize, usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub methods: Vec<Method>,
    pub reference: Method,
    pub layout: MetaLayout,
    pub replications: Vec<ReplicationResult>,
    pub summary: Vec<MethodSummary>,
    pub frequencies: Option<FrequencyReport>,
}

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt6)
}

/// Runs every replication (concurrently) and aggregates the results.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let loaded = match &config.data {
        DataSource::Csv { path, label_column } => Some(load_csv(path, *label_column)?),
        DataSource::P2 { .. } => None,
    };
    let replications: Vec<ReplicationResult> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            run_replication(config, loaded.as_ref(), r).unwrap_or_else(|e| ReplicationResult {
                replication: r,
                accuracies: vec![None; config.methods.len()],
                mask: None,
                fallback_rate: None,
                error: Some(e.to_string()),
            })
        })
        .collect();
    Ok(aggregate(config, replications))
}

/// Summary statistics, mean ranks, win-tie-loss and selection frequencies.
pub fn aggregate(config: &ExperimentConfig, replications: Vec<ReplicationResult>) -> RunReport {
    let m = config.methods.len();
    let complete: Vec<&ReplicationResult> = replications
        .iter()
        .filter(|r| r.accuracies.iter().all(Option::is_some))
        .collect();
    let mut rank_sums = vec![0.0; m];
    for r in &complete {
        let scores: Vec<f64> = r.accuracies.iter().map(|a| a.expect("complete")).collect();
        for (s, rank) in rank_sums.iter_mut().zip(mean_ranks(&scores)) {
            *s += rank;
        }
    }
    let reference_col = config.methods.iter().position(|&x| x == config.reference);

    let summary = (0..m)
        .map(|c| {
            let values: Vec<f64> = replications.iter().filter_map(|r| r.accuracies[c]).collect();
            let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
            let std = mean.map(|mu| {
                if values.len() < 2 {
                    0.0
                } else {
                    (values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
                }
            });
            let mut wtl = (0, 0, 0);
            if let Some(rc) = reference_col {
                for r in &replications {
                    if let (Some(a), Some(b)) = (r.accuracies[rc], r.accuracies[c]) {
                        match a.total_cmp(&b) {
                            std::cmp::Ordering::Greater => wtl.0 += 1,
                            std::cmp::Ordering::Equal => wtl.1 += 1,
                            std::cmp::Ordering::Less => wtl.2 += 1,
                        }
                    }
                }
            }
            MethodSummary {
                method: config.methods[c],
                mean,
                std,
                average_rank: (!complete.is_empty()).then(|| rank_sums[c] / complete.len() as f64),
                win_tie_loss: wtl,
            }
        })
        .collect();

    let layout = config.des.layout();
    let masks: Vec<FeatureMask> = replications.iter().filter_map(|r| r.mask.clone()).collect();
    let frequencies = frequency_report(&masks, layout).ok();
    RunReport {
        name: config.name.clone(),
        methods: config.methods.clone(),
        reference: config.reference,
        layout,
        replications,
        summary,
        frequencies,
    }
}

impl RunReport {
    /// Long-format accuracies: `replication,method,accuracy`.
    pub fn write_accuracy_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["replication", "method", "accuracy"])?;
        for r in &self.replications {
            for (m, a) in self.methods.iter().zip(&r.accuracies) {
                w.write_record([r.replication.to_string(), m.to_string(), cell(*a)])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["method", "mean", "std", "average_rank", "wins", "ties", "losses"])?;
        for s in &self.summary {
            let (win, tie, loss) = s.win_tie_loss;
            w.write_record([
                s.method.to_string(),
                cell(s.mean),
                cell(s.std),
                cell(s.average_rank),
                win.to_string(),
                tie.to_string(),
                loss.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Selected mask per replication (`NA` for failed ones).
    pub fn write_masks_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["replication", "k", "kp", "mask", "fallback_rate", "error"])?;
        for r in &self.replications {
            w.write_record([
                r.replication.to_string(),
                self.layout.k.to_string(),
                self.layout.kp.to_string(),
                r.mask.as_ref().map_or_else(|| "NA".to_string(), |m| m.to_string()),
                cell(r.fallback_rate),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let ok = self.replications.iter().filter(|r| r.error.is_none()).count();
        let _ = writeln!(out, "experiment: {}", self.name);
        let _ = writeln!(out, "replications: {} ({} completed)", self.replications.len(), ok);
        let _ = writeln!(out, "win-tie-loss reference: {}", self.reference);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<18} {:>9} {:>9} {:>9} {:>11}",
            "method", "mean", "std", "avg rank", "W-T-L"
        );
        for s in &self.summary {
            let (w, t, l) = s.win_tie_loss;
            let _ = writeln!(
                out,
                "{:<18} {:>9} {:>9} {:>9} {:>11}",
                s.method.name(),
                s.mean.map_or("NA".into(), |v| format!("{:.4}", v)),
                s.std.map_or("NA".into(), |v| format!("{:.4}", v)),
                s.average_rank.map_or("NA".into(), |v| format!("{:.2}", v)),
                format!("{w}-{t}-{l}"),
            );
        }
        for r in self.replications.iter().filter(|r| r.error.is_some()) {
            let _ = writeln!(
                out,
                "replication {} failed: {}",
                r.replication,
                r.error.as_deref().unwrap_or("")
            );
        }
        if let Some(f) = &self.frequencies {
            let _ = writeln!(out);
            let _ = writeln!(out, "selection frequency per set over {} masks", f.masks);
            for (s, v, b) in &f.sets {
                let _ = writeln!(out, "{:<10} {:.3} {}", s.name(), v, b.name());
            }
        }
        out
    }

    /// Writes `accuracy.csv`, `summary.csv`, `masks.csv`,
    /// `frequencies.csv`, `set_frequencies.csv` and `summary.txt`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut open = |name: &str| -> Result<fs::File> {
            let p = dir.join(name);
            written.push(p.clone());
            Ok(fs::File::create(p)?)
        };
        self.write_accuracy_csv(open("accuracy.csv")?)?;
        self.write_summary_csv(open("summary.csv")?)?;
        self.write_masks_csv(open("masks.csv")?)?;
        if let Some(f) = &self.frequencies {
            f.write_features_csv(open("frequencies.csv")?)?;
            f.write_sets_csv(open("set_frequencies.csv")?)?;
        }
        fs::write(dir.join("summary.txt"), self.summary_text())?;
        written.push(dir.join("summary.txt"));
        Ok(written)
    }
}

/// Reads the masks column written by [`RunReport::write_masks_csv`], with the
/// layout recorded next to them. Failed replications are skipped.
pub fn read_masks_csv(path: impl AsRef<Path>) -> Result<(MetaLayout, Vec<FeatureMask>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut layout = None;
    let mut masks = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<usize> {
            rec.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| Error::Parse {
                path: "masks".into(),
                row: row + 2,
                column: i + 1,
                value: rec.get(i).unwrap_or("").to_string(),
            })
        };
        let l = MetaLayout::new(parse(1)?, parse(2)?);
        if layout.is_some_and(|x| x != l) {
            return Err(Error::Config("masks use different layouts".into()));
        }
        layout = Some(l);
        let text = rec.get(3).unwrap_or("NA");
        if text == "NA" {
            continue;
        }
        let bits = text
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse {
                    path: "masks".into(),
                    row: row + 2,
                    column: 4,
                    value: text.to_string(),
                }),
            })
            .collect::<Result<Vec<bool>>>()?;
        masks.push(FeatureMask::from_bits(bits));
    }
    Ok((layout.ok_or(Error::Empty)?, masks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties_use_mean_rank() {
        assert_eq!(mean_ranks(&[0.9, 0.8, 0.9, 0.7]), vec![1.5, 3.0, 1.5, 4.0]);
        let r = mean_ranks(&[0.5; 4]);
        assert_eq!(r, vec![2.5; 4]);
        assert_eq!(r.iter().sum::<f64>(), 10.0);
    }

    #[test]
    fn bands_are_lower_inclusive() {
        assert_eq!(Band::of(0.0), Band::White);
        assert_eq!(Band::of(0.2499), Band::White);
        assert_eq!(Band::of(0.25), Band::LightGrey);
        assert_eq!(Band::of(0.5), Band::DarkGrey);
        assert_eq!(Band::of(0.75), Band::Black);
        assert_eq!(Band::of(1.0), Band::Black);
    }

    #[test]
    fn frequencies_hand_count() {
        let masks: Vec<FeatureMask> = ["1100", "1010", "1001", "1000"]
            .iter()
            .map(|s| FeatureMask::from_bits(s.chars().map(|c| c == '1').collect()))
            .collect();
        assert_eq!(selection_frequencies(&masks).unwrap(), vec![1.0, 0.25, 0.25, 0.25]);
        let two = [FeatureMask::from_bits(vec![true]), FeatureMask::from_bits(vec![false])];
        let f = selection_frequencies(&two).unwrap()[0];
        assert_eq!((f, Band::of(f)), (0.5, Band::DarkGrey));
    }

    #[test]
    fn all_ones_mask_is_black_everywhere() {
        let layout = MetaLayout::default();
        let report = frequency_report(&[FeatureMask::all(layout.len())], layout).unwrap();
        assert!(report
            .features
            .iter()
            .all(|f| f.frequency == 1.0 && f.band == Band::Black));
        assert_eq!(report.sets.len(), 15);
        assert!(report.sets.iter().all(|s| s.1 == 1.0));
    }

    #[test]
    fn config_defaults_and_overrides() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c.replications, 20);
        assert_eq!(c.bpso.swarm_size, 20);
        assert_eq!(c.des.k, 7);
        assert_eq!(c.pool.size, 100);
        assert_eq!(c.methods.len(), Method::ALL.len());
        let c = ExperimentConfig::from_toml(
            r#"
            replications = 2
            methods = ["knora-e", "META-DES.Oracle"]
            [data]
            kind = "csv"
            path = "x.csv"
            label_column = "first"
            [bpso]
            runs = 4
            transfer = "S"
            "#,
        )
        .unwrap();
        assert_eq!(c.methods, vec![Method::KnoraE, Method::MetaDesOracle]);
        assert_eq!(c.bpso.runs, 4);
        assert!(matches!(
            c.data,
            DataSource::Csv {
                label_column: LabelColumn::First,
                ..
            }
        ));
        assert!(ExperimentConfig::from_toml("replications = 0").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("methods = [\"MCB\"]").is_err());
    }

    #[test]
    fn aggregate_marks_missing_cells() {
        let config = ExperimentConfig {
            methods: vec![Method::KnoraE, Method::Ola],
            reference: Method::KnoraE,
            ..Default::default()
        };
        let reps = vec![
            ReplicationResult {
                replication: 0,
                accuracies: vec![Some(0.9), Some(0.8)],
                mask: None,
                fallback_rate: None,
                error: None,
            },
            ReplicationResult {
                replication: 1,
                accuracies: vec![None, None],
                mask: None,
                fallback_rate: None,
                error: Some("boom".into()),
            },
        ];
        let report = aggregate(&config, reps);
        assert_eq!(report.summary[1].win_tie_loss, (1, 0, 0));
        assert_eq!(report.summary[0].win_tie_loss, (0, 1, 0));
        assert_eq!(report.summary[0].average_rank, Some(1.0));
        let mut buf = Vec::new();
        report.write_accuracy_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("1,KNORA-E,NA"));
        assert!(report.summary_text().contains("replication 1 failed: boom"));
    }
}
