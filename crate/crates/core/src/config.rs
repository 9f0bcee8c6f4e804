//! Plain-text model configuration: `key = value` lines or a JSON object with
//! the keys `N`, `k1`, `k2`, `K`, `L`, `force.kind`, `force.params`.
//!
//! Both formats reduce to a flat key map, so layering (flags over file over
//! defaults) is a map overlay.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use crate::analysis::study::sweep_interfaces;
use crate::error::{AtcError, Result};
use crate::lattice::{build_chain, decompose, ChainModel, Decomposition, ForceSpec, DEFAULT_ASSUMPTION_CONSTANT};

pub const MODEL_KEYS: [&str; 7] = ["N", "k1", "k2", "K", "L", "force.kind", "force.params"];

pub const DEFAULT_K1: f64 = 1.0;
pub const DEFAULT_K2: f64 = -1.0 / 6.0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// JSON if the text starts with `{`, otherwise `key = value` lines with
    /// `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_pairs(text)
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AtcError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn parse_pairs(text: &str) -> Result<Self> {
        let mut raw = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| AtcError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            raw.set(key.trim(), value.trim().trim_matches('"'));
        }
        Ok(raw)
    }

    fn parse_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| AtcError::Config(format!("invalid JSON: {e}")))?;
        let Value::Object(map) = value else {
            return Err(AtcError::Config("JSON config must be an object".into()));
        };
        let mut raw = Self::new();
        fn flatten(prefix: &str, map: &serde_json::Map<String, Value>, raw: &mut RawConfig) -> Result<()> {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                match v {
                    Value::Object(inner) => flatten(&key, inner, raw)?,
                    Value::Array(items) => {
                        let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
                        raw.set(&key, &parts.join(","));
                    }
                    other => raw.set(&key, &scalar(other)?),
                }
            }
            Ok(())
        }
        fn scalar(v: &Value) -> Result<String> {
            match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                Value::Bool(b) => Ok(b.to_string()),
                other => Err(AtcError::Config(format!("unsupported config value {other}"))),
            }
        }
        flatten("", &map, &mut raw)?;
        Ok(raw)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    /// Entries of `other` replace entries of `self`.
    pub fn overlay(mut self, other: &RawConfig) -> Self {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get_str(key)
            .map(|v| v.parse::<T>().map_err(|_| AtcError::Config(format!("cannot parse {key} = '{v}'"))))
            .transpose()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Rejects keys outside `allowed`, catching typos before any solve.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(AtcError::Config(format!("unknown config key '{k}'"))),
            None => Ok(()),
        }
    }
}

/// `force.kind` plus comma-separated `force.params`.
pub fn force_from_parts(kind: &str, params: Option<&str>) -> Result<ForceSpec> {
    let nums = || -> Result<Vec<f64>> {
        params
            .unwrap_or_default()
            .split([',', ':'])
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|_| AtcError::InvalidForce(format!("bad parameter '{s}'"))))
            .collect()
    };
    let arity = |got: usize, want: &str| AtcError::InvalidForce(format!("{kind} takes {want} parameters, got {got}"));
    match kind.trim().to_ascii_lowercase().as_str() {
        "zero" => Ok(ForceSpec::Zero),
        "point" => match nums()?.as_slice() {
            [site, magnitude] if *site >= 0.0 && site.fract() == 0.0 => {
                Ok(ForceSpec::Point { site: *site as usize, magnitude: *magnitude })
            }
            [_, _] => Err(AtcError::InvalidForce("point site must be a non-negative integer".into())),
            p => Err(arity(p.len(), "2")),
        },
        "sine" => match nums()?.as_slice() {
            [m] => Ok(ForceSpec::sine(*m)),
            [m, phase] => Ok(ForceSpec::Sine { mode: *m, phase: *phase }),
            p => Err(arity(p.len(), "1 or 2")),
        },
        "poly" => {
            let coeffs = nums()?;
            if coeffs.is_empty() {
                return Err(arity(0, "at least 1"));
            }
            Ok(ForceSpec::Poly { coeffs })
        }
        "table" => {
            let path = params.ok_or_else(|| AtcError::InvalidForce("table needs a CSV path in force.params".into()))?;
            Ok(ForceSpec::Table { values: crate::io::read_force_table(Path::new(path.trim()))? })
        }
        other => Err(AtcError::InvalidForce(format!("unknown force kind '{other}'"))),
    }
}

/// A validated model: chain parameters, interfaces and load.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub n: usize,
    pub k1: f64,
    pub k2: f64,
    pub k: usize,
    pub l: usize,
    pub force: ForceSpec,
}

impl ModelConfig {
    /// `N` is required. `K` and `L` default to the sweep rule with `p = 2`,
    /// `γ = 1/2`; the load defaults to zero.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let n: usize = raw.get("N")?.ok_or_else(|| AtcError::Config("N is required".into()))?;
        let (k_default, l_default) = sweep_interfaces(n, 2.0, 0.5, DEFAULT_ASSUMPTION_CONSTANT);
        let force = match raw.get_str("force.kind") {
            Some(kind) => force_from_parts(kind, raw.get_str("force.params"))?,
            None if raw.get_str("force.params").is_some() => {
                return Err(AtcError::Config("force.params given without force.kind".into()))
            }
            None => ForceSpec::Zero,
        };
        let config = Self {
            n,
            k1: raw.get("k1")?.unwrap_or(DEFAULT_K1),
            k2: raw.get("k2")?.unwrap_or(DEFAULT_K2),
            k: raw.get("K")?.unwrap_or(k_default),
            l: raw.get("L")?.unwrap_or(l_default),
            force,
        };
        config.build()?;
        Ok(config)
    }

    pub fn build(&self) -> Result<(ChainModel, Decomposition)> {
        let chain = build_chain(self.n, self.k1, self.k2, &self.force)?;
        let decomp = decompose(&chain, self.k, self.l)?;
        Ok((chain, decomp))
    }
}
