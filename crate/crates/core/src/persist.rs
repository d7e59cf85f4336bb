//! Self-describing JSON model files.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bregman::DivergenceKind;
use crate::data::{ClassId, FeatureShape};
use crate::error::{OdaError, Result};
use crate::metrics::Model;
use crate::mrtree::OdaTree;
use crate::oda::AnnealState;

pub const FORMAT_VERSION: u32 = 1;

/// Training mode of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// A single learner on the raw features.
    Flat,
    /// A tree whose nodes all see the raw features.
    Tree,
    /// A tree whose depth selects the wavelet approximation level.
    Multires,
}

impl FromStr for Mode {
    type Err = OdaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(Self::Flat),
            "tree" => Ok(Self::Tree),
            "multires" => Ok(Self::Multires),
            _ => Err(OdaError::usage(format!("unknown mode `{s}` (flat, tree, multires)"))),
        }
    }
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::Tree => "tree",
            Self::Multires => "multires",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    Flat(Box<AnnealState>),
    Tree(Box<OdaTree>),
}

/// A trained model with everything needed to use it again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub mode: Mode,
    pub divergence: DivergenceKind,
    pub feature_shape: FeatureShape,
    pub wavelet_levels: usize,
    /// External class names indexed by class id.
    pub class_names: Vec<String>,
    pub learner: Learner,
}

impl ModelFile {
    pub fn flat(state: AnnealState, feature_shape: FeatureShape, class_names: Vec<String>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            mode: Mode::Flat,
            divergence: state.params.divergence,
            feature_shape,
            wavelet_levels: 0,
            class_names,
            learner: Learner::Flat(Box::new(state)),
        }
    }

    pub fn tree(tree: OdaTree, mode: Mode, class_names: Vec<String>) -> Self {
        let wavelet_levels = match mode {
            Mode::Multires => tree.config.max_depth,
            _ => 0,
        };
        Self {
            format_version: FORMAT_VERSION,
            mode,
            divergence: tree.config.params.divergence.unwrap_or_default(),
            feature_shape: tree.input_shape,
            wavelet_levels,
            class_names,
            learner: Learner::Tree(Box::new(tree)),
        }
    }

    pub fn model(&self) -> &dyn Model {
        match &self.learner {
            Learner::Flat(s) => s.as_ref(),
            Learner::Tree(t) => t.as_ref(),
        }
    }

    pub fn class_name(&self, id: ClassId) -> String {
        self.class_names
            .get(id as usize)
            .cloned()
            .unwrap_or_else(|| id.to_string())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| OdaError::Invariant(format!("model serialization: {e}")))
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let bad = |m: String| OdaError::load(path, m);
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| bad(format!("not a model file (expected format_version {FORMAT_VERSION}): {e}")))?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => return Err(bad(format!("unsupported format_version {v}, expected {FORMAT_VERSION}"))),
            None => return Err(bad(format!("missing format_version, expected {FORMAT_VERSION}"))),
        }
        serde_json::from_value(value).map_err(|e| bad(format!("malformed model (format_version {FORMAT_VERSION}): {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| OdaError::load(path, e.to_string()))?;
        Self::from_json(&text, path)
    }
}

impl Model for ModelFile {
    fn predict(&self, x: &[f64]) -> Result<ClassId> {
        self.model().predict(x)
    }

    fn predict_counted(&self, x: &[f64], evals: &mut u64) -> Result<ClassId> {
        self.model().predict_counted(x, evals)
    }

    fn quantization_error(&self, x: &[f64]) -> Result<f64> {
        self.model().quantization_error(x)
    }

    fn association(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.model().association(x)
    }

    fn temperature(&self) -> f64 {
        self.model().temperature()
    }

    fn codevector_count(&self) -> usize {
        self.model().codevector_count()
    }
}
