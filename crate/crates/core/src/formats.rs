//! On-disk artifacts: CSV series, filter lists and curves, and versioned JSON.
//!
//! Every CSV starts with `# format_version=1`, optionally followed by a
//! `# config=<json>` line echoing the settings that produced it. Readers
//! skip `#` lines.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::arcore::ArFilter;
use crate::error::{Error, Result};
use crate::switching::SwitchingArModel;

pub const FORMAT_VERSION: u32 = 1;

fn header_lines(config: Option<&serde_json::Value>) -> String {
    let mut out = format!("# format_version={FORMAT_VERSION}\n");
    if let Some(c) = config {
        out.push_str(&format!("# config={c}\n"));
    }
    out
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn finish(w: csv::Writer<Vec<u8>>, config: Option<&serde_json::Value>) -> Result<String> {
    let body = w
        .into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))?;
    let body = String::from_utf8(body).expect("csv output is UTF-8");
    Ok(header_lines(config) + &body)
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(idx).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column `{name}`"),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{raw}` as {name}"),
    })
}

/// A series with an optional hidden-state column.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesData {
    pub values: Vec<f64>,
    pub states: Option<Vec<usize>>,
}

pub fn series_to_csv(
    values: &[f64],
    states: Option<&[usize]>,
    config: Option<&serde_json::Value>,
) -> Result<String> {
    if let Some(s) = states {
        if s.len() != values.len() {
            return Err(Error::invalid("state path and series differ in length"));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(e.to_string());
    match states {
        Some(_) => w.write_record(["t", "x", "state"]),
        None => w.write_record(["t", "x"]),
    }
    .map_err(csv_err)?;
    for (t, x) in values.iter().enumerate() {
        let mut row = vec![t.to_string(), format!("{x:?}")];
        if let Some(s) = states {
            row.push(s[t].to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w, config)
}

/// Parse `t,x[,state]` CSV; errors name the offending line.
pub fn series_from_reader<R: Read>(input: R) -> Result<SeriesData> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let x_col = col("x").ok_or_else(|| Error::Parse {
        line: 1,
        message: "header lacks an `x` column".into(),
    })?;
    let state_col = col("state");
    let mut values = Vec::new();
    let mut states = state_col.map(|_| Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let x: f64 = parse_field(&rec, x_col, "x")?;
        if !x.is_finite() {
            return Err(Error::Parse {
                line: rec.position().map_or(0, |p| p.line()),
                message: "non-finite value".into(),
            });
        }
        values.push(x);
        if let (Some(c), Some(s)) = (state_col, states.as_mut()) {
            s.push(parse_field(&rec, c, "state")?);
        }
    }
    if values.is_empty() {
        return Err(Error::invalid("series file has no rows"));
    }
    Ok(SeriesData { values, states })
}

pub fn read_series(path: &Path) -> Result<SeriesData> {
    series_from_reader(fs::File::open(path)?)
}

/// One filter per row, columns `psi_1..psi_L`.
pub fn filters_to_csv(filters: &[ArFilter], config: Option<&serde_json::Value>) -> Result<String> {
    let order = filters.first().map_or(0, ArFilter::order);
    if filters.iter().any(|f| f.order() != order) {
        return Err(Error::invalid("filters differ in order"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record((1..=order).map(|l| format!("psi_{l}")))
        .map_err(csv_err)?;
    for f in filters {
        w.write_record(f.coeffs().iter().map(|c| format!("{c:?}")))
            .map_err(csv_err)?;
    }
    finish(w, config)
}

pub fn filters_from_reader<R: Read>(input: R) -> Result<Vec<ArFilter>> {
    let mut rdr = reader(input);
    let width = rdr.headers().map_err(csv_error)?.len();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let coeffs = (0..width)
            .map(|i| parse_field::<f64>(&rec, i, &format!("psi_{}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        out.push(ArFilter::new(coeffs).map_err(|e| Error::Parse {
            line: rec.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn read_filters(path: &Path) -> Result<Vec<ArFilter>> {
    filters_from_reader(fs::File::open(path)?)
}

/// Two-column curve `M,<value_name>` for `M = 1..`.
pub fn curve_to_csv(value_name: &str, values: &[f64], config: Option<&serde_json::Value>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record(["M", value_name]).map_err(csv_err)?;
    for (m, v) in values.iter().enumerate() {
        w.write_record([(m + 1).to_string(), format!("{v:?}")])
            .map_err(csv_err)?;
    }
    finish(w, config)
}

/// Generic table with a header row.
pub fn table_to_csv(
    header: &[String],
    rows: &[Vec<String>],
    config: Option<&serde_json::Value>,
) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    finish(w, config)
}

/// JSON artifact wrapper: `{format_version, config, ..payload}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub format_version: u32,
    #[serde(default)]
    pub config: serde_json::Value,
    #[serde(flatten)]
    pub payload: T,
}

impl<T> Artifact<T> {
    pub fn new(config: serde_json::Value, payload: T) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            config,
            payload,
        }
    }
}

pub fn artifact_to_json<T: Serialize>(artifact: &Artifact<T>) -> Result<String> {
    let mut s = serde_json::to_string_pretty(artifact)?;
    s.push('\n');
    Ok(s)
}

pub fn artifact_from_json<T: DeserializeOwned>(text: &str) -> Result<Artifact<T>> {
    let a: Artifact<T> = serde_json::from_str(text)?;
    if a.format_version != FORMAT_VERSION {
        return Err(Error::invalid(format!(
            "unsupported format_version {}",
            a.format_version
        )));
    }
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPayload {
    pub model: SwitchingArModel,
}

/// Read a model artifact, re-validating every field.
pub fn read_model(path: &Path) -> Result<SwitchingArModel> {
    let a: Artifact<ModelPayload> = artifact_from_json(&fs::read_to_string(path)?)?;
    let m = a.payload.model;
    let filters = m
        .filters()
        .iter()
        .map(|f| ArFilter::with_params(f.coeffs().to_vec(), f.intercept(), f.noise_variance()))
        .collect::<Result<Vec<_>>>()?;
    SwitchingArModel::new(filters, m.transition().to_vec(), m.initial().to_vec())
}

pub fn model_to_json(model: &SwitchingArModel, config: serde_json::Value) -> Result<String> {
    artifact_to_json(&Artifact::new(
        config,
        ModelPayload {
            model: model.clone(),
        },
    ))
}
