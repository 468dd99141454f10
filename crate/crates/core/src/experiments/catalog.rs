use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ExperimentKind, ExperimentParams};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub kind: ExperimentKind,
    pub description: String,
    pub required: Vec<String>,
    /// Optional fields with their defaults.
    pub optional: BTreeMap<String, Value>,
    /// A valid parameter record sized for a quick run.
    pub example: Value,
}

fn describe(kind: ExperimentKind) -> (&'static str, Value) {
    match kind {
        ExperimentKind::Inference => (
            "Two-party inference on a random smooth circuit: shot estimate of the loss and exact ledger.",
            json!({"n_qubits": 4, "layers": 3, "shots": 100}),
        ),
        ExperimentKind::Gradcheck => (
            "Parameter-shift vs finite differences vs the E observable on random smooth circuits.",
            json!({"instances": 20}),
        ),
        ExperimentKind::Dpcd => (
            "Coordinate descent with one-shot measurements on the cos instance; reports suboptimality of the averaged iterate.",
            json!({"eps0": 0.1}),
        ),
        ExperimentKind::Stdgd => (
            "Gradient descent with budgeted full-gradient estimates.",
            json!({"iterations": 10, "eps": 0.1}),
        ),
        ExperimentKind::Stdft => (
            "Fine-tuning of the last layer from a pool of copies prepared up front.",
            json!({"eps0": 0.1}),
        ),
        ExperimentKind::Linclass => (
            "Classical sketch protocol for distributed linear classification with margin gamma.",
            json!({"n": 512, "gamma": 0.4, "trials": 10}),
        ),
        ExperimentKind::Spectrum => (
            "Frequency spectrum of a Hadamard-mixed ladder by path enumeration, checked on a grid.",
            json!({"n_prime": 4, "layers": 2}),
        ),
        ExperimentKind::Seprank => (
            "Numerical separation rank of a two-input ladder.",
            json!({"n_prime": 2, "layers": 2}),
        ),
        ExperimentKind::Universal => (
            "Sup-norm error of the single-layer universal circuit against a target function.",
            json!({"function": {"kind": "triangle"}, "ms": [4, 8], "grid": 1000}),
        ),
        ExperimentKind::Dataparallel => (
            "Amplitude encoding of a row-split matrix with a single quantum message.",
            json!({"rows": 4, "cols": 4}),
        ),
    }
}

const REQUIRED: [(ExperimentKind, &[&str]); 10] = [
    (ExperimentKind::Inference, &["n_qubits", "layers", "shots"]),
    (ExperimentKind::Gradcheck, &["instances"]),
    (ExperimentKind::Dpcd, &["eps0"]),
    (ExperimentKind::Stdgd, &["iterations", "eps"]),
    (ExperimentKind::Stdft, &["eps0"]),
    (ExperimentKind::Linclass, &["n", "gamma"]),
    (ExperimentKind::Spectrum, &["n_prime", "layers"]),
    (ExperimentKind::Seprank, &["n_prime", "layers"]),
    (ExperimentKind::Universal, &["function"]),
    (ExperimentKind::Dataparallel, &["rows", "cols"]),
];

fn required_only(example: &Value, required: &[&str]) -> Value {
    Value::Object(
        example
            .as_object()
            .into_iter()
            .flatten()
            .filter(|(k, _)| required.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    )
}

/// Every experiment kind with its parameter schema.
pub fn list_experiments() -> Result<Vec<CatalogEntry>> {
    REQUIRED
        .iter()
        .map(|&(kind, required)| {
            let (description, example) = describe(kind);
            let minimal = required_only(&example, required);
            let filled = ExperimentParams::parse(kind, &minimal)?.to_value()?;
            let optional = filled
                .as_object()
                .map(|o| o.iter().filter(|(k, _)| !required.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect())
                .unwrap_or_default();
            Ok(CatalogEntry {
                kind,
                description: description.to_string(),
                required: required.iter().map(|s| s.to_string()).collect(),
                optional,
                example,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_covers_every_kind() {
        let cat = list_experiments().unwrap();
        assert_eq!(cat.len(), 10);
        for k in ExperimentKind::ALL {
            assert!(cat.iter().any(|e| e.kind == k));
        }
    }

    #[test]
    fn required_fields_are_really_required() {
        for e in list_experiments().unwrap() {
            ExperimentParams::parse(e.kind, &e.example).unwrap();
            for field in &e.required {
                let mut partial = e.example.clone();
                partial.as_object_mut().unwrap().remove(field);
                assert!(ExperimentParams::parse(e.kind, &partial).is_err(), "{} without {field}", e.kind);
            }
        }
    }

    #[test]
    fn defaults_round_trip() {
        for e in list_experiments().unwrap() {
            let required: Vec<&str> = e.required.iter().map(String::as_str).collect();
            let minimal = required_only(&e.example, &required);
            let mut full = minimal.clone();
            let obj = full.as_object_mut().unwrap();
            for (k, v) in &e.optional {
                obj.insert(k.clone(), v.clone());
            }
            let parsed = ExperimentParams::parse(e.kind, &full).unwrap();
            assert_eq!(parsed, ExperimentParams::parse(e.kind, &minimal).unwrap());
        }
    }
}
