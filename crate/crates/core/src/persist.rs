//! Model files: a versioned JSON envelope around everything a fitted model
//! needs. The reference-set caches are rebuilt on load; they are a pure
//! function of the pool, DSEL and the RRC settings, so a reloaded model
//! classifies exactly like the original.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::{Dataset, ScaleParams};
use crate::des::{DesModel, DesParams};
use crate::error::{Error, Result};
use crate::features::{FeatureMask, ReferenceSet, RrcConfig};
use crate::pool::{ClassifierPool, Perceptron};
use crate::selector::MetaClassifier;

pub const FORMAT: &str = "metades-model";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataRecord {
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRecord {
    params: DesParams,
    scale: ScaleParams,
    pool: Vec<Perceptron>,
    mask: FeatureMask,
    selector: MetaClassifier,
    dsel: DataRecord,
    rrc: RrcConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<M> {
    format: String,
    version: u32,
    model: M,
}

fn format_error(e: impl std::fmt::Display) -> Error {
    Error::ModelFormat(e.to_string())
}

pub fn write_model<W: Write>(model: &DesModel, writer: W) -> Result<()> {
    let data = model.reference.data();
    let record = ModelRecord {
        params: model.params.clone(),
        scale: model.scale.clone(),
        pool: model.pool.members().to_vec(),
        mask: model.mask.clone(),
        selector: model.selector.clone(),
        dsel: DataRecord {
            rows: data.rows().map(<[f64]>::to_vec).collect(),
            labels: data.labels().to_vec(),
            class_names: data.class_names().to_vec(),
        },
        rrc: model.reference.rrc().clone(),
    };
    let envelope = Envelope {
        format: FORMAT.to_string(),
        version: VERSION,
        model: record,
    };
    let mut writer = BufWriter::new(writer);
    serde_json::to_writer(&mut writer, &envelope).map_err(format_error)?;
    writer.flush()?;
    Ok(())
}

pub fn read_model<R: Read>(reader: R) -> Result<DesModel> {
    let value: Value = serde_json::from_reader(BufReader::new(reader)).map_err(format_error)?;
    let format = value.get("format").and_then(Value::as_str);
    if format != Some(FORMAT) {
        return Err(Error::ModelFormat(format!("not a {FORMAT} file")));
    }
    let version = value
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::ModelFormat("missing version".into()))?;
    if version != u64::from(VERSION) {
        return Err(Error::ModelVersion {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: VERSION,
        });
    }
    let envelope: Envelope<ModelRecord> = serde_json::from_value(value).map_err(format_error)?;
    rebuild(envelope.model)
}

fn rebuild(m: ModelRecord) -> Result<DesModel> {
    for p in &m.pool {
        p.check_shape()?;
    }
    m.selector.check_shape()?;
    let pool = ClassifierPool::new(m.pool)?;
    if m.scale.min.len() != m.scale.max.len() || m.scale.dim() != pool.feature_count() {
        return Err(Error::ModelFormat("scaling does not match the pool".into()));
    }
    if m.dsel.class_names.len() != pool.class_count() {
        return Err(Error::ModelFormat("class names do not match the pool".into()));
    }
    if m.selector.mask_fingerprint() != m.mask.fingerprint() {
        return Err(Error::ModelFormat("selector was trained for a different mask".into()));
    }
    let dsel = Dataset::new(m.dsel.rows, m.dsel.labels, m.dsel.class_names)?;
    let reference = ReferenceSet::build(&pool, dsel, &m.rrc)?;
    DesModel::new(pool, m.selector, m.mask, m.scale, reference, m.params)
}

pub fn save_model(model: &DesModel, path: impl AsRef<Path>) -> Result<()> {
    write_model(model, File::create(path)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<DesModel> {
    read_model(File::open(path)?)
}
