//! Config-driven experiment runner behind the `distqml` binary.
//!
//! An [`ExperimentConfig`] names a kind, a seed and a kind-specific parameter
//! record. [`run`] is a pure function of the config: it returns a JSON
//! summary (results, full ledger, privacy bound, config echo), an optional
//! CSV series and an event log, and [`write_outputs`] stores them as
//! `summary.json`, `series.csv` and `events.log`.

mod catalog;
mod format;
pub mod params;
mod runners;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use catalog::{list_experiments, CatalogEntry};
pub use format::{fmt_f64, render_json};
use params::*;

use crate::error::{Error, Result};
use crate::protocol::privacy_report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Inference,
    Gradcheck,
    Dpcd,
    Stdgd,
    Stdft,
    Linclass,
    Spectrum,
    Seprank,
    Universal,
    Dataparallel,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Inference,
        ExperimentKind::Gradcheck,
        ExperimentKind::Dpcd,
        ExperimentKind::Stdgd,
        ExperimentKind::Stdft,
        ExperimentKind::Linclass,
        ExperimentKind::Spectrum,
        ExperimentKind::Seprank,
        ExperimentKind::Universal,
        ExperimentKind::Dataparallel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Inference => "inference",
            ExperimentKind::Gradcheck => "gradcheck",
            ExperimentKind::Dpcd => "dpcd",
            ExperimentKind::Stdgd => "stdgd",
            ExperimentKind::Stdft => "stdft",
            ExperimentKind::Linclass => "linclass",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Seprank => "seprank",
            ExperimentKind::Universal => "universal",
            ExperimentKind::Dataparallel => "dataparallel",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// One experiment invocation as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: String,
    pub seed: u64,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, seed: u64, params: Value) -> Self {
        Self { kind: kind.as_str().to_string(), seed, params, out_dir: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks the kind and the parameter record without running anything.
    pub fn validate(&self) -> Result<ExperimentParams> {
        ExperimentParams::parse(self.kind.parse()?, &self.params)
    }
}

/// Parsed parameter record, defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentParams {
    Inference(InferenceParams),
    Gradcheck(GradcheckParams),
    Dpcd(DpcdParams),
    Stdgd(StdgdParams),
    Stdft(StdftParams),
    Linclass(LinclassParams),
    Spectrum(SpectrumParams),
    Seprank(SeprankParams),
    Universal(UniversalParams),
    Dataparallel(DataparallelParams),
}

fn parse_as<T: serde::de::DeserializeOwned>(v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Config(e.to_string()))
}

impl ExperimentParams {
    pub fn parse(kind: ExperimentKind, v: &Value) -> Result<Self> {
        Ok(match kind {
            ExperimentKind::Inference => Self::Inference(parse_as(v)?),
            ExperimentKind::Gradcheck => Self::Gradcheck(parse_as(v)?),
            ExperimentKind::Dpcd => Self::Dpcd(parse_as(v)?),
            ExperimentKind::Stdgd => Self::Stdgd(parse_as(v)?),
            ExperimentKind::Stdft => Self::Stdft(parse_as(v)?),
            ExperimentKind::Linclass => Self::Linclass(parse_as(v)?),
            ExperimentKind::Spectrum => Self::Spectrum(parse_as(v)?),
            ExperimentKind::Seprank => Self::Seprank(parse_as(v)?),
            ExperimentKind::Universal => Self::Universal(parse_as(v)?),
            ExperimentKind::Dataparallel => Self::Dataparallel(parse_as(v)?),
        })
    }

    pub fn kind(&self) -> ExperimentKind {
        match self {
            Self::Inference(_) => ExperimentKind::Inference,
            Self::Gradcheck(_) => ExperimentKind::Gradcheck,
            Self::Dpcd(_) => ExperimentKind::Dpcd,
            Self::Stdgd(_) => ExperimentKind::Stdgd,
            Self::Stdft(_) => ExperimentKind::Stdft,
            Self::Linclass(_) => ExperimentKind::Linclass,
            Self::Spectrum(_) => ExperimentKind::Spectrum,
            Self::Seprank(_) => ExperimentKind::Seprank,
            Self::Universal(_) => ExperimentKind::Universal,
            Self::Dataparallel(_) => ExperimentKind::Dataparallel,
        }
    }

    /// The full record, defaults included.
    pub fn to_value(&self) -> Result<Value> {
        Ok(match self {
            Self::Inference(p) => serde_json::to_value(p)?,
            Self::Gradcheck(p) => serde_json::to_value(p)?,
            Self::Dpcd(p) => serde_json::to_value(p)?,
            Self::Stdgd(p) => serde_json::to_value(p)?,
            Self::Stdft(p) => serde_json::to_value(p)?,
            Self::Linclass(p) => serde_json::to_value(p)?,
            Self::Spectrum(p) => serde_json::to_value(p)?,
            Self::Seprank(p) => serde_json::to_value(p)?,
            Self::Universal(p) => serde_json::to_value(p)?,
            Self::Dataparallel(p) => serde_json::to_value(p)?,
        })
    }
}

/// Rows for `series.csv`; cells are already formatted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Series {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub summary: Value,
    pub series: Option<Series>,
    pub events: String,
}

impl ExperimentOutput {
    pub fn summary_json(&self) -> Result<String> {
        render_json(&self.summary)
    }
}

/// Runs one experiment. Identical configs give identical outputs.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let params = config.validate()?;
    let out = runners::run(&params, config.seed)?;
    let summary = json!({
        "kind": params.kind().as_str(),
        "seed": config.seed,
        "config": { "kind": params.kind().as_str(), "seed": config.seed, "params": params.to_value()? },
        "results": out.results,
        "ledger": out.ledger,
        "privacy": privacy_report(&out.ledger),
    });
    Ok(ExperimentOutput { summary, series: out.series, events: out.events })
}

/// Writes `summary.json`, `series.csv` (when present) and `events.log`.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("summary.json"), output.summary_json()?)?;
    if let Some(series) = &output.series {
        std::fs::write(dir.join("series.csv"), series.to_csv()?)?;
    }
    std::fs::write(dir.join("events.log"), &output.events)?;
    Ok(())
}

/// Machine-readable error record printed by the CLI.
pub fn error_record(err: &Error) -> Value {
    json!({ "error": { "code": err.code(), "message": err.to_string() } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_kind_is_reported() {
        let cfg = ExperimentConfig::from_json(r#"{"kind": "teleport", "seed": 1}"#).unwrap();
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.code(), "unknown_kind");
        assert_eq!(error_record(&err)["error"]["code"], "unknown_kind");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert_eq!(ExperimentConfig::from_json(r#"{"kind": "spectrum", "seed": 1, "colour": 2}"#).unwrap_err().code(), "invalid_config");
        let cfg = ExperimentConfig::from_json(r#"{"kind": "spectrum", "seed": 1, "params": {"n_prime": 2, "layers": 2, "depth": 3}}"#).unwrap();
        assert_eq!(cfg.validate().unwrap_err().code(), "invalid_config");
    }

    #[test]
    fn inference_summary_has_exact_ledger() {
        let cfg = ExperimentConfig::new(ExperimentKind::Inference, 5, json!({"n_qubits": 4, "layers": 3, "shots": 100}));
        let out = run(&cfg).unwrap();
        assert_eq!(out.summary["ledger"]["qubits_sent"], 2400);
        assert!(out.events.lines().count() > 0);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let cfg = ExperimentConfig::new(ExperimentKind::Dpcd, 9, json!({"eps0": 0.2}));
        assert_eq!(run(&cfg).unwrap().summary_json().unwrap(), run(&cfg).unwrap().summary_json().unwrap());
    }

    #[test]
    fn outputs_land_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::new(ExperimentKind::Spectrum, 2, json!({"n_prime": 4, "layers": 2}));
        write_outputs(&run(&cfg).unwrap(), dir.path()).unwrap();
        for f in ["summary.json", "series.csv", "events.log"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
        assert!(csv.starts_with("n_prime,layers,predicted_count,measured_count"));
    }
}
