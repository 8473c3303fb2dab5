//! JSON density specifications for the general-decay commands.
//!
//! ```json
//! {"family": "uniform", "delta": 1.0, "eta1": 1.0, "eta2": 2.0, "params": {}}
//! {"family": "pareto", "delta": 0.8, "eta1": 1.0, "eta2": "inf", "params": {"tail_index": 2.5}}
//! {"family": "inverse_poly", "delta": 1.0, "params": {"kappa": 2.0, "alpha1": 0.0, "alpha2": 1.0}}
//! ```
//!
//! For `inverse_poly` the support follows from `kappa`, `alpha1`, `alpha2`;
//! `eta1`/`eta2` may be given but must then agree with it.

use pcrisk_core::DensitySpec;
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("density spec is not valid JSON: {0}")]
    Syntax(String),
    #[error("density spec field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

const TOP_KEYS: [&str; 5] = ["family", "delta", "eta1", "eta2", "params"];

fn number(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<f64>, ConfigError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => n
            .as_f64()
            .map(Some)
            .ok_or_else(|| field_err(path, "not representable as a float")),
        Some(Value::String(s)) if s.eq_ignore_ascii_case("inf") => Ok(Some(f64::INFINITY)),
        Some(_) => Err(field_err(path, "expected a number")),
    }
}

fn required(obj: &Map<String, Value>, key: &str, path: &str) -> Result<f64, ConfigError> {
    number(obj, key, path)?.ok_or_else(|| field_err(path, "missing"))
}

fn finite(value: f64, path: &str) -> Result<f64, ConfigError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(field_err(path, "must be finite"))
    }
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<(), ConfigError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(field_err(&format!("{prefix}{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn matches(given: Option<f64>, derived: f64, path: &str) -> Result<(), ConfigError> {
    match given {
        Some(v) if !(v == derived || (v - derived).abs() <= 1e-9 * derived.abs()) => {
            Err(field_err(
                path,
                format!("inconsistent with params (expected {derived})"),
            ))
        }
        _ => Ok(()),
    }
}

pub fn parse_density(text: &str) -> Result<DensitySpec, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| ConfigError::Syntax("top level must be an object".into()))?;
    check_keys(obj, &TOP_KEYS, "")?;
    let family = match obj.get("family") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(field_err("family", "expected a string")),
        None => return Err(field_err("family", "missing")),
    };
    let delta = finite(required(obj, "delta", "delta")?, "delta")?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(field_err("delta", "must lie in (0, 1]"));
    }
    let empty = Map::new();
    let params = match obj.get("params") {
        None | Some(Value::Null) => &empty,
        Some(Value::Object(m)) => m,
        Some(_) => return Err(field_err("params", "expected an object")),
    };
    let eta1 = number(obj, "eta1", "eta1")?;
    let eta2 = number(obj, "eta2", "eta2")?;

    let spec = match family {
        "uniform" => {
            check_keys(params, &[], "params.")?;
            let eta1 = finite(eta1.ok_or_else(|| field_err("eta1", "missing"))?, "eta1")?;
            let eta2 = finite(eta2.ok_or_else(|| field_err("eta2", "missing"))?, "eta2")?;
            if !(eta1 > 0.0) {
                return Err(field_err("eta1", "must be positive"));
            }
            if !(eta2 > eta1) {
                return Err(field_err("eta2", "must exceed eta1"));
            }
            DensitySpec::uniform(eta1, eta2, delta)
        }
        "pareto" => {
            check_keys(params, &["tail_index"], "params.")?;
            let a = finite(
                required(params, "tail_index", "params.tail_index")?,
                "params.tail_index",
            )?;
            if !(a > 0.0) {
                return Err(field_err("params.tail_index", "must be positive"));
            }
            let eta1 = finite(eta1.ok_or_else(|| field_err("eta1", "missing"))?, "eta1")?;
            if !(eta1 > 0.0) {
                return Err(field_err("eta1", "must be positive"));
            }
            if eta2.is_some_and(f64::is_finite) {
                return Err(field_err(
                    "eta2",
                    "pareto support is unbounded; use null or \"inf\"",
                ));
            }
            DensitySpec::pareto(a, eta1, delta)
        }
        "inverse_poly" => {
            check_keys(params, &["kappa", "alpha1", "alpha2"], "params.")?;
            let kappa = finite(required(params, "kappa", "params.kappa")?, "params.kappa")?;
            if !(kappa > 0.0) {
                return Err(field_err("params.kappa", "must be positive"));
            }
            let alpha1 = number(params, "alpha1", "params.alpha1")?.unwrap_or(0.0);
            let alpha2 = number(params, "alpha2", "params.alpha2")?.unwrap_or(1.0);
            if !(alpha2 > 0.0 && alpha2 <= 1.0) {
                return Err(field_err("params.alpha2", "must lie in (0, 1]"));
            }
            if !(alpha1 >= 0.0 && alpha1 < alpha2) {
                return Err(field_err("params.alpha1", "must lie in [0, alpha2)"));
            }
            let spec = DensitySpec::inverse_poly_band(kappa, alpha1, alpha2, delta);
            if let Ok(s) = &spec {
                matches(eta1, s.eta1(), "eta1")?;
                matches(eta2, s.eta2(), "eta2")?;
            }
            spec
        }
        other => {
            return Err(field_err(
                "family",
                format!("unknown family `{other}` (expected inverse_poly, uniform or pareto)"),
            ))
        }
    };
    spec.map_err(|e| field_err(family, e.to_string()))
}
