//! Optional JSON config file. Keys are the kebab-case flag names; any flag
//! given on the command line overrides the file.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use crate::commands::{FilterKind, InputFormat};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Config {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub format: Option<InputFormat>,
    pub filter: Option<FilterKind>,
    /// Number, or the string `"auto"`.
    pub sigma: Option<SigmaValue>,
    pub percent: Option<f64>,
    pub seed: Option<u64>,
    pub patch_radius: Option<usize>,
    pub search_radius: Option<usize>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub levels: Option<Vec<f64>>,
    pub filters: Option<Vec<FilterKind>>,
    /// `"x,y,z,ex,ey,ez"`
    pub crop: Option<String>,
    pub residual: Option<PathBuf>,
    pub repeats: Option<usize>,
    pub sigma_policy: Option<String>,
    pub noise_reference: Option<String>,
    pub dtype: Option<String>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SigmaValue {
    Number(f64),
    Text(String),
}

impl SigmaValue {
    pub fn as_flag(&self) -> String {
        match self {
            SigmaValue::Number(v) => v.to_string(),
            SigmaValue::Text(s) => s.clone(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}
