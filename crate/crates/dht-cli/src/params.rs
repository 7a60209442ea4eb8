//! Parameter-document handling: per-command defaults, JSON config file,
//! `--param` overrides, validation helpers, and the reproducibility hash.

use crate::CliError;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub params: Map<String, Value>,
    pub out: PathBuf,
    pub seed: u64,
    pub grid_step: f64,
    pub precision: usize,
}

fn defaults(command: &str) -> (Map<String, Value>, f64, &'static str) {
    let mut m = Map::new();
    let mut put = |k: &str, v: Value| {
        m.insert(k.to_string(), v);
    };
    // (params, default grid step, artifact extension)
    let (step, ext) = match command {
        "fig2" => {
            put("p", Value::from(0.25));
            // the two rates named in the reference figure plus four
            // implementer-default fill-in curves
            put("rates", serde_json::json!([0.1, 0.3, 0.5, 0.7, 0.9, 1.0]));
            put("exponent_max", Value::from(0.2));
            (1.0 / 512.0, "csv")
        }
        "fig3" => {
            put("p", Value::from(0.1));
            put("q", Value::from(0.2));
            put("rate", Value::from(0.4));
            (0.01, "csv")
        }
        "tai-point" => {
            put("p", Value::from(0.25));
            put("delta_v", Value::from(0.1));
            put("delta_u", Value::from(0.0));
            (1.0 / 512.0, "csv")
        }
        "tai-frontier" => {
            put("p", Value::from(0.25));
            put("probes", serde_json::json!([[0.6, 0.05], [0.8, 0.1], [1.0, 0.15]]));
            (1.0 / 512.0, "csv")
        }
        "wz" => {
            put("p", Value::from(0.25));
            (1.0 / 128.0, "csv")
        }
        "iproject" => (1.0 / 64.0, "json"),
        "exponent" => {
            put("p", Value::from(0.1));
            put("q", Value::from(0.2));
            put("rate", Value::from(0.4));
            (1.0 / 64.0, "csv")
        }
        "simulate" => {
            put("scheme", Value::from("tai"));
            put("n", Value::from(32));
            put("trials", Value::from(1000));
            put("delta_typ", Value::from(0.05));
            (1.0 / 512.0, "json")
        }
        _ => (1.0 / 512.0, "csv"),
    };
    (m, step, ext)
}

impl RunConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn resolve(
        command: &str,
        config_file: Option<&Path>,
        overrides: &[String],
        out: Option<PathBuf>,
        seed: Option<u64>,
        grid_step: Option<f64>,
        precision: Option<usize>,
    ) -> Result<Self, CliError> {
        let (mut params, default_step, ext) = defaults(command);
        if let Some(path) = config_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let doc: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad JSON in {}: {e}", path.display())))?;
            let Value::Object(obj) = doc else {
                return Err(CliError::Config("config document must be a JSON object".into()));
            };
            for (k, v) in obj {
                params.insert(k, v);
            }
        }
        for kv in overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--param needs KEY=VALUE, got {kv:?}")))?;
            let value = serde_json::from_str(v).unwrap_or_else(|_| Value::from(v));
            params.insert(k.to_string(), value);
        }
        let grid_step = grid_step.unwrap_or(default_step);
        if !(grid_step > 0.0 && grid_step <= 0.5) {
            return Err(CliError::Config(format!("grid step {grid_step} out of (0, 0.5]")));
        }
        Ok(Self {
            command: command.to_string(),
            params,
            out: out.unwrap_or_else(|| PathBuf::from(format!("{command}.{ext}"))),
            seed: seed.unwrap_or(0),
            grid_step,
            precision: precision.unwrap_or(6),
        })
    }

    /// SHA-256 over the canonical (key-sorted) parameter document plus the
    /// swept-axis resolution; the seed is reported separately.
    pub fn config_hash(&self) -> String {
        let sorted: BTreeMap<&String, &Value> = self.params.iter().collect();
        let canonical = serde_json::json!({
            "command": self.command,
            "params": sorted,
            "grid_step": self.grid_step,
            "precision": self.precision,
        });
        let mut h = Sha256::new();
        h.update(canonical.to_string().as_bytes());
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| CliError::Config(format!("non-numeric parameter {key:?}"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| CliError::Config(format!("non-integer parameter {key:?}"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str, CliError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_str()
                .ok_or_else(|| CliError::Config(format!("non-string parameter {key:?}"))),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let arr = self
            .params
            .get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::Config(format!("missing or non-array parameter {key:?}")))?;
        arr.iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| CliError::Config(format!("non-numeric entry in {key:?}")))
            })
            .collect()
    }

    pub fn pair_list(&self, key: &str) -> Result<Vec<(f64, f64)>, CliError> {
        let arr = self
            .params
            .get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::Config(format!("missing or non-array parameter {key:?}")))?;
        arr.iter()
            .map(|v| {
                let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                    CliError::Config(format!("{key:?} entries must be [a, b] pairs"))
                })?;
                match (pair[0].as_f64(), pair[1].as_f64()) {
                    (Some(a), Some(b)) => Ok((a, b)),
                    _ => Err(CliError::Config(format!("non-numeric pair in {key:?}"))),
                }
            })
            .collect()
    }

    pub fn probability(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64_or(key, default)?;
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Config(format!("{key} = {v} outside [0, 1]")));
        }
        Ok(v)
    }
}
