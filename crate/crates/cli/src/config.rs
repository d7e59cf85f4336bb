//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use oda_core::bregman::DivergenceKind;
use oda_core::data::OrderPolicy;
use oda_core::oda::ParamOverrides;
use oda_core::persist::Mode;
use oda_core::OdaError;

use crate::dataspec::DataSpec;

type Result<T> = std::result::Result<T, OdaError>;

fn usage(msg: impl Into<String>) -> OdaError {
    OdaError::Usage(msg.into())
}

/// Keys that take a per-depth suffix, e.g. `k_max.1 = 6`.
const PARAM_KEYS: &[&str] = &[
    "t_max",
    "t_min",
    "t_min_ratio",
    "gamma",
    "k_max",
    "eps_c",
    "eps_n",
    "eps_r",
    "delta",
    "step_a",
    "step_b",
    "divergence",
    "check_every",
    "level_budget",
];

const RUN_KEYS: &[&str] = &[
    "mode",
    "data",
    "label_column",
    "shape",
    "out",
    "seed",
    "max_depth",
    "layers",
    "wavelet_levels",
    "batch_size",
    "max_samples",
    "node_warmup",
    "min_class_share",
    "initial_point",
    "order",
];

/// Raw settings in file order of precedence: later `set` calls win.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut s = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                OdaError::Load {
                    path: origin.to_path_buf(),
                    message: format!("line {}: expected key = value", i + 1),
                }
            })?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| OdaError::Load {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text, path)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let base = key.split_once('.').map_or(key, |(b, _)| b);
        let known = RUN_KEYS.contains(&key) || PARAM_KEYS.contains(&base);
        if !known {
            return Err(usage(format!("unknown config key `{key}`")));
        }
        if let Some((_, depth)) = key.split_once('.') {
            depth
                .parse::<usize>()
                .map_err(|_| usage(format!("bad depth suffix in `{key}`")))?;
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Parses `key=value` as given on the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("expected KEY=VALUE, got `{pair}`")))?;
        self.set(k.trim(), v.trim())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| usage(format!("invalid value `{v}` for `{key}`"))))
            .transpose()
    }

    fn overrides(&self, suffix: Option<usize>) -> Result<ParamOverrides> {
        let key = |k: &str| match suffix {
            Some(d) => format!("{k}.{d}"),
            None => k.to_string(),
        };
        let divergence = match self.get(&key("divergence")) {
            None => None,
            Some(v) => Some(parse_divergence(v)?),
        };
        Ok(ParamOverrides {
            t_max: self.parsed(&key("t_max"))?,
            t_min: self.parsed(&key("t_min"))?,
            t_min_ratio: self.parsed(&key("t_min_ratio"))?,
            gamma: self.parsed(&key("gamma"))?,
            k_max: self.parsed(&key("k_max"))?,
            eps_c: self.parsed(&key("eps_c"))?,
            eps_n: self.parsed(&key("eps_n"))?,
            eps_r: self.parsed(&key("eps_r"))?,
            delta: self.parsed(&key("delta"))?,
            step_a: self.parsed(&key("step_a"))?,
            step_b: self.parsed(&key("step_b"))?,
            divergence,
            seed: None,
            check_every: self.parsed(&key("check_every"))?,
            level_budget: self.parsed(&key("level_budget"))?,
        })
    }

    fn max_suffix(&self) -> Option<usize> {
        self.values
            .keys()
            .filter_map(|k| k.split_once('.'))
            .filter_map(|(_, d)| d.parse().ok())
            .max()
    }
}

fn parse_divergence(v: &str) -> Result<DivergenceKind> {
    match v {
        "se" | "squared_euclidean" => Ok(DivergenceKind::SquaredEuclidean),
        "kl" | "generalized_kl" => Ok(DivergenceKind::generalized_kl()),
        _ => Err(usage(format!("unknown divergence `{v}` (se, kl)"))),
    }
}

fn parse_point(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|f| f.trim().parse::<f64>().map_err(|_| usage(format!("bad initial point `{v}`"))))
        .collect()
}

/// A validated training run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub data: DataSpec,
    pub out: PathBuf,
    pub seed: u64,
    pub params: ParamOverrides,
    pub depth_params: Vec<ParamOverrides>,
    pub max_depth: usize,
    pub layers: Option<usize>,
    pub batch_size: usize,
    pub max_samples: u64,
    pub node_warmup: Option<usize>,
    pub min_class_share: Option<f64>,
    pub initial_point: Option<Vec<f64>>,
    pub order: OrderPolicy,
}

impl RunConfig {
    /// `env_seed` (from `ODA_SEED`) replaces the configured seed.
    pub fn from_settings(s: &Settings, env_seed: Option<&str>) -> Result<Self> {
        let mode: Mode = s.get("mode").unwrap_or("flat").parse()?;
        let data = s
            .get("data")
            .ok_or_else(|| usage("no dataset given (set `data`)"))?;
        let data = DataSpec::parse(data, s.get("label_column"), s.get("shape"))?;
        data.check_paths()?;
        let seed = match env_seed {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| usage(format!("ODA_SEED must be an unsigned integer, got `{v}`")))?,
            None => s.parsed("seed")?.unwrap_or(0),
        };
        let max_depth = s.parsed("max_depth")?.unwrap_or(match mode {
            Mode::Flat => 0,
            _ => 1,
        });
        if let Some(levels) = s.parsed::<usize>("wavelet_levels")? {
            if mode == Mode::Multires && levels != max_depth {
                return Err(usage(format!(
                    "multires mode needs wavelet_levels = max_depth (got {levels} and {max_depth})"
                )));
            }
        }
        if mode != Mode::Flat && max_depth == 0 {
            return Err(usage("tree modes need max_depth >= 1"));
        }
        let depth_params = match s.max_suffix() {
            Some(m) => (0..=m).map(|d| s.overrides(Some(d))).collect::<Result<_>>()?,
            None => Vec::new(),
        };
        let initial_point = s.get("initial_point").map(parse_point).transpose()?;
        let order = match s.get("order") {
            Some(v) => v.parse()?,
            None => OrderPolicy::default(),
        };
        Ok(Self {
            mode,
            data,
            out: PathBuf::from(s.get("out").unwrap_or("oda-out")),
            seed,
            params: s.overrides(None)?,
            depth_params,
            max_depth,
            layers: s.parsed("layers")?,
            batch_size: s.parsed("batch_size")?.unwrap_or(256),
            max_samples: s.parsed("max_samples")?.unwrap_or(10_000_000),
            node_warmup: s.parsed("node_warmup")?,
            min_class_share: s.parsed("min_class_share")?,
            initial_point,
            order,
        })
    }
}
