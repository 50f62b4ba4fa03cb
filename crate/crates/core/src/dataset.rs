//! Labeled feature matrices, CSV ingestion, stratified holdout splits, min-max
//! scaling and the P2 synthetic problem.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Row-major feature matrix with integer class labels in `0..class_count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    feature_count: usize,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from rows. `class_names` fixes `class_count`.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        let feature_count = rows.first().map(Vec::len).ok_or(Error::Empty)?;
        let mut features = Vec::with_capacity(rows.len() * feature_count);
        for row in &rows {
            if row.len() != feature_count {
                return Err(Error::DimensionMismatch {
                    expected: feature_count,
                    found: row.len(),
                });
            }
            features.extend_from_slice(row);
        }
        Self::from_flat(features, feature_count, labels, class_names)
    }

    pub fn from_flat(
        features: Vec<f64>,
        feature_count: usize,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if labels.is_empty() || feature_count == 0 {
            return Err(Error::Empty);
        }
        if features.len() != labels.len() * feature_count {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * feature_count,
                found: features.len(),
            });
        }
        if class_names.len() < 2 {
            return Err(Error::SingleClass);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Config(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite feature value".into()));
        }
        Ok(Self {
            features,
            labels,
            feature_count,
            class_names,
        })
    }

    /// Same as [`Dataset::from_flat`] with class names `"0".."L-1"`.
    pub fn with_class_count(
        features: Vec<f64>,
        feature_count: usize,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        let names = (0..class_count).map(|c| c.to_string()).collect();
        Self::from_flat(features, feature_count, labels, names)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_count..(i + 1) * self.feature_count]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.feature_count)
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order. Class names are kept even if a class
    /// ends up absent.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.feature_count);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            labels,
            feature_count: self.feature_count,
            class_names: self.class_names.clone(),
        }
    }
}

/// Which CSV column holds the class label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelColumn {
    First,
    #[default]
    Last,
    #[serde(untagged)]
    Index(usize),
}

impl LabelColumn {
    fn resolve(self, columns: usize) -> usize {
        match self {
            LabelColumn::First => 0,
            LabelColumn::Last => columns - 1,
            LabelColumn::Index(i) => i,
        }
    }
}

impl FromStr for LabelColumn {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "first" => Ok(LabelColumn::First),
            "last" => Ok(LabelColumn::Last),
            _ => s
                .parse()
                .map(LabelColumn::Index)
                .map_err(|_| format!("expected `first`, `last` or a column index, got {s:?}")),
        }
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::First => f.write_str("first"),
            LabelColumn::Last => f.write_str("last"),
            LabelColumn::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Reads a comma-separated file. A first row whose feature cells are all
/// non-numeric is taken as a header. Labels are encoded in order of first
/// appearance.
pub fn load_csv(path: impl AsRef<Path>, label_column: LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        records.push(record);
    }
    let first = records.first().ok_or(Error::Empty)?;
    let columns = first.len();
    let label_col = label_column.resolve(columns);
    if columns < 2 || label_col >= columns {
        return Err(Error::Config(format!(
            "label column {label_col} invalid for {columns}-column file {}",
            path.display()
        )));
    }

    let header = first
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != label_col)
        .all(|(_, cell)| cell.parse::<f64>().is_err());
    let skip = usize::from(header);

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut codes: HashMap<String, usize> = HashMap::new();
    for (r, record) in records.iter().enumerate().skip(skip) {
        if record.len() != columns {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                row: r + 1,
                found: record.len(),
                expected: columns,
            });
        }
        for (c, cell) in record.iter().enumerate() {
            if c == label_col {
                let next = names.len();
                let code = *codes.entry(cell.to_string()).or_insert_with(|| {
                    names.push(cell.to_string());
                    next
                });
                labels.push(code);
            } else {
                let value = cell
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        path: path.to_path_buf(),
                        row: r + 1,
                        column: c + 1,
                        value: cell.to_string(),
                    })?;
                features.push(value);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::Empty);
    }
    if names.len() < 2 {
        return Err(Error::SingleClass);
    }
    Dataset::from_flat(features, columns - 1, labels, names)
}

/// Writes `ds` as CSV with a `x1..xd,label` header, labels as class names.
pub fn write_csv<W: std::io::Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=ds.feature_count()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for (i, row) in ds.rows().enumerate() {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        record.push(ds.class_names()[ds.label(i)].clone());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Holdout proportions. `train + dsel + test = 1`; the meta-training set is
/// carved out of the training portion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub dsel_frac: f64,
    pub test_frac: f64,
    pub meta_frac_of_train: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_frac: 0.5,
            dsel_frac: 0.25,
            test_frac: 0.25,
            meta_frac_of_train: 0.25,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = [
            ("train_frac", self.train_frac),
            ("dsel_frac", self.dsel_frac),
            ("test_frac", self.test_frac),
            ("meta_frac_of_train", self.meta_frac_of_train),
        ];
        for (name, f) in fracs {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidSplit(format!("{name} = {f} not in (0, 1)")));
            }
        }
        let sum = self.train_frac + self.dsel_frac + self.test_frac;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSplit(format!("train + dsel + test = {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Index partition produced by [`split_indices`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub meta_train: Vec<usize>,
    pub dsel: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Splits {
    pub train: Dataset,
    pub meta_train: Dataset,
    pub dsel: Dataset,
    pub test: Dataset,
}

/// Largest-remainder apportionment of `total` over `weights` (summing to 1).
/// Ties go to the earlier part.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &p in order.iter().cycle().take(total.saturating_sub(assigned)) {
        counts[p] += 1;
    }
    counts
}

/// Stratified allocation: per-class counts for each part whose column totals
/// equal the global largest-remainder targets and whose per-class values stay
/// within one sample of the exact quota.
fn stratified_counts(class_sizes: &[usize], weights: &[f64]) -> Vec<Vec<usize>> {
    let n: usize = class_sizes.iter().sum();
    let targets = apportion(n, weights);
    let mut counts: Vec<Vec<usize>> = class_sizes
        .iter()
        .map(|&size| weights.iter().map(|w| (w * size as f64).floor() as usize).collect())
        .collect();
    let mut class_left: Vec<usize> = class_sizes
        .iter()
        .zip(&counts)
        .map(|(&s, row)| s - row.iter().sum::<usize>())
        .collect();
    let mut part_left: Vec<usize> = (0..weights.len())
        .map(|p| targets[p] - counts.iter().map(|row| row[p]).sum::<usize>())
        .collect();

    // Each class hands its leftover samples, at most one per part, to the
    // parts still owed the most (Ryser's construction), preferring larger
    // fractional remainders among equals. This keeps every cell within one
    // sample of its quota while meeting the global targets.
    let mut classes: Vec<usize> = (0..class_sizes.len()).collect();
    classes.sort_by(|&a, &b| class_left[b].cmp(&class_left[a]).then(a.cmp(&b)));
    for c in classes {
        let rem = |p: usize| {
            let q = weights[p] * class_sizes[c] as f64;
            q - q.floor()
        };
        let mut parts: Vec<usize> = (0..weights.len()).collect();
        parts.sort_by(|&a, &b| {
            part_left[b]
                .cmp(&part_left[a])
                .then(rem(b).total_cmp(&rem(a)))
                .then(a.cmp(&b))
        });
        for p in parts {
            if class_left[c] == 0 {
                break;
            }
            if part_left[p] > 0 {
                counts[c][p] += 1;
                class_left[c] -= 1;
                part_left[p] -= 1;
            }
        }
    }
    // Unreachable for feasible margins; keeps the partition exact regardless.
    for c in 0..class_sizes.len() {
        while class_left[c] > 0 {
            let p = (0..weights.len()).max_by_key(|&p| part_left[p]).expect("parts");
            counts[c][p] += 1;
            class_left[c] -= 1;
            part_left[p] = part_left[p].saturating_sub(1);
        }
    }
    counts
}

/// Stratified holdout partition of `labels`.
pub fn split_indices(labels: &[usize], class_count: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < 4 {
            return Err(Error::ClassTooSmall {
                class: c.to_string(),
                count: members.len(),
                needed: 4,
            });
        }
    }
    let mut rng = rng::derived_rng(spec.seed, "holdout", 0);
    for members in &mut by_class {
        members.shuffle(&mut rng);
    }

    let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let outer = stratified_counts(&sizes, &[spec.train_frac, spec.dsel_frac, spec.test_frac]);
    let train_sizes: Vec<usize> = outer.iter().map(|row| row[0]).collect();
    let inner = stratified_counts(&train_sizes, &[1.0 - spec.meta_frac_of_train, spec.meta_frac_of_train]);

    let mut out = SplitIndices {
        train: Vec::new(),
        meta_train: Vec::new(),
        dsel: Vec::new(),
        test: Vec::new(),
    };
    for (c, members) in by_class.iter().enumerate() {
        let [tr, ds, te] = [outer[c][0], outer[c][1], outer[c][2]];
        let [base, meta] = [inner[c][0], inner[c][1]];
        debug_assert_eq!(tr + ds + te, members.len());
        debug_assert_eq!(base + meta, tr);
        let mut at = 0;
        let mut take = |len: usize| {
            let s = &members[at..at + len];
            at += len;
            s
        };
        out.train.extend_from_slice(take(base));
        out.meta_train.extend_from_slice(take(meta));
        out.dsel.extend_from_slice(take(ds));
        out.test.extend_from_slice(take(te));
    }
    for part in [&mut out.train, &mut out.meta_train, &mut out.dsel, &mut out.test] {
        part.sort_unstable();
    }
    Ok(out)
}

/// Splits `ds` into training, meta-training, dynamic-selection and test sets
/// while preserving class priors.
pub fn split_holdout(ds: &Dataset, spec: &SplitSpec) -> Result<Splits> {
    let idx = split_indices(ds.labels(), ds.class_count(), spec).map_err(|e| match e {
        Error::ClassTooSmall { class, count, needed } => Error::ClassTooSmall {
            class: class
                .parse::<usize>()
                .ok()
                .and_then(|c| ds.class_names().get(c).cloned())
                .unwrap_or(class),
            count,
            needed,
        },
        other => other,
    })?;
    Ok(Splits {
        train: ds.subset(&idx.train),
        meta_train: ds.subset(&idx.meta_train),
        dsel: ds.subset(&idx.dsel),
        test: ds.subset(&idx.test),
    })
}

/// Per-column bounds for min-max scaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScaleParams {
    pub fn fit(ds: &Dataset) -> Self {
        let d = ds.feature_count();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in ds.rows() {
            for j in 0..d {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        Self { min, max }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Maps into `[0, 1]`, clamping values outside the fitted range. Constant
    /// columns map to 0.5.
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
            .collect()
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.feature_count() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: ds.feature_count(),
            });
        }
        let features = ds.rows().flat_map(|r| self.transform_row(r)).collect();
        Ok(Dataset {
            features,
            labels: ds.labels.clone(),
            feature_count: ds.feature_count,
            class_names: ds.class_names.clone(),
        })
    }
}

/// Fits min-max bounds on `ds` and returns the scaled copy.
pub fn scale_minmax(ds: &Dataset) -> (Dataset, ScaleParams) {
    let params = ScaleParams::fit(ds);
    let scaled = params.transform(ds).expect("fitted on the same dataset");
    (scaled, params)
}

/// Boundary curves of the P2 problem on `[0, 10]²`.
///
/// `PRINTED` uses `E1(x) = sin(x) + 5`. `BALANCED` doubles the sine
/// amplitude; with it the `7.902` offset of `E4` splits the square into two
/// classes of (nearly) equal area, which the printed curve does not.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct P2Boundaries {
    pub e1_amplitude: f64,
}

impl P2Boundaries {
    pub const PRINTED: Self = Self { e1_amplitude: 1.0 };
    pub const BALANCED: Self = Self { e1_amplitude: 2.0 };

    pub fn e1(&self, x: f64) -> f64 {
        self.e1_amplitude * x.sin() + 5.0
    }

    pub fn e2(&self, x: f64) -> f64 {
        (x - 2.0).powi(2) + 1.0
    }

    pub fn e3(&self, x: f64) -> f64 {
        -0.1 * x * x + 0.6 * (4.0 * x).sin() + 8.0
    }

    pub fn e4(&self, x: f64) -> f64 {
        (x - 10.0).powi(2) / 2.0 + 7.902
    }

    pub fn curves(&self, x: f64) -> [f64; 4] {
        [self.e1(x), self.e2(x), self.e3(x), self.e4(x)]
    }

    /// Class of `(x, y)`: the label alternates each time a curve is crossed,
    /// so it is the parity of the number of curves lying below the point.
    pub fn label(&self, x: f64, y: f64) -> usize {
        self.curves(x).iter().filter(|&&e| y > e).count() % 2
    }
}

impl Default for P2Boundaries {
    fn default() -> Self {
        Self::BALANCED
    }
}

/// `n` points drawn uniformly from `[0, 10]²`, labeled by the default
/// [`P2Boundaries`].
pub fn generate_p2(n: usize, seed: u64) -> Dataset {
    generate_p2_with(n, seed, &P2Boundaries::default())
}

pub fn generate_p2_with(n: usize, seed: u64, boundaries: &P2Boundaries) -> Dataset {
    assert!(n >= 1, "P2 needs at least one sample");
    let mut rng = rng::derived_rng(seed, "p2", 0);
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.random_range(0.0..=10.0);
        let y = rng.random_range(0.0..=10.0);
        features.extend_from_slice(&[x, y]);
        labels.push(boundaries.label(x, y));
    }
    Dataset::from_flat(features, 2, labels, vec!["I".into(), "II".into()]).expect("P2 rows are finite and two-class")
}
