use serde::{Deserialize, Serialize};

use crate::bregman::DivergenceKind;
use crate::data::RunningStats;
use crate::error::{OdaError, Result};

/// Samples between two convergence checks.
pub const DEFAULT_CHECK_EVERY: usize = 100;
/// Hard cap on samples spent at one temperature level.
pub const DEFAULT_LEVEL_BUDGET: usize = 50_000;
/// Samples used to estimate the data scale before training.
pub const WARMUP_SAMPLES: usize = 200;

/// Stepsize `alpha_n = 1 / (a + b n)`.
#[inline]
pub fn stepsize(n: u64, a: f64, b: f64) -> f64 {
    1.0 / (a + b * n as f64)
}

/// Fully resolved annealing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    pub t_max: f64,
    pub t_min: f64,
    pub gamma: f64,
    pub k_max: usize,
    /// Convergence tolerance on codevector movement between checks.
    pub eps_c: f64,
    /// Merge tolerance for effective codevectors.
    pub eps_n: f64,
    /// Idle-mass threshold for pruning.
    pub eps_r: f64,
    /// Relative perturbation magnitude (scaled by per-coordinate data std).
    pub delta: f64,
    pub step_a: f64,
    pub step_b: f64,
    pub divergence: DivergenceKind,
    pub seed: u64,
    pub check_every: usize,
    pub level_budget: usize,
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(OdaError::usage(m.to_string()));
        if !(self.t_min > 0.0) || !(self.t_max >= self.t_min) || !self.t_max.is_finite() {
            return fail("temperatures must satisfy t_max >= t_min > 0");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail("gamma must lie in (0, 1)");
        }
        if self.k_max == 0 {
            return fail("k_max must be at least 1");
        }
        if !(self.eps_c > 0.0 && self.eps_n > 0.0 && self.eps_r > 0.0 && self.delta > 0.0) {
            return fail("tolerances and delta must be positive");
        }
        if !(self.step_a >= 1.0) || !(self.step_b > 0.0) {
            return fail("stepsize needs a >= 1 and b > 0");
        }
        if self.check_every == 0 || self.level_budget == 0 {
            return fail("check_every and level_budget must be positive");
        }
        Ok(())
    }

    /// Resolves defaults from data statistics; explicit overrides win.
    ///
    /// `t_max` defaults to ten times the total variance, `t_min` to
    /// `t_max * 1e-4`, `eps_c` to `1e-4 * t_max`, and `eps_n` to
    /// `10 * delta` times the total variance.
    pub fn from_stats(stats: &RunningStats, o: &ParamOverrides) -> Result<Self> {
        Self::from_stats_anchored(stats, o, None)
    }

    /// Like [`AnnealParams::from_stats`], for a codebook starting at `anchor`.
    ///
    /// The default `t_max` then also covers the divergence from the data mean
    /// to the anchor, so a start far from the data is still hot enough for
    /// every codevector to see every sample. `t_min` and `eps_c` keep their
    /// data-scale defaults.
    pub fn from_stats_anchored(stats: &RunningStats, o: &ParamOverrides, anchor: Option<&[f64]>) -> Result<Self> {
        let total_var = stats.total_variance();
        let scale = if total_var > 0.0 { total_var } else { 1.0 };
        let divergence = o.divergence.unwrap_or_default();
        let offset = match anchor {
            Some(a) if a.len() == stats.mean().len() => divergence.eval(stats.mean(), a),
            _ => 0.0,
        };
        let delta = o.delta.unwrap_or(0.01);
        let data_t_max = o.t_max.unwrap_or(10.0 * scale);
        let t_max = o.t_max.unwrap_or(10.0 * (scale + offset));
        let t_min = o
            .t_min
            .or(o.t_min_ratio.map(|r| r * data_t_max))
            .unwrap_or(data_t_max * 1e-4);
        let eps_n = o.eps_n.unwrap_or(10.0 * delta * scale);
        let params = Self {
            t_max,
            t_min,
            gamma: o.gamma.unwrap_or(0.8),
            k_max: o.k_max.unwrap_or(256),
            eps_c: o.eps_c.unwrap_or(1e-4 * data_t_max),
            eps_n,
            eps_r: o.eps_r.unwrap_or(1e-4),
            delta,
            step_a: o.step_a.unwrap_or(2.0),
            step_b: o.step_b.unwrap_or(0.9),
            divergence,
            seed: o.seed.unwrap_or(0),
            check_every: o.check_every.unwrap_or(DEFAULT_CHECK_EVERY),
            level_budget: o.level_budget.unwrap_or(DEFAULT_LEVEL_BUDGET),
        };
        params.validate()?;
        Ok(params)
    }

    /// Number of temperature levels the schedule visits from `t_max` down to `t_min`.
    pub fn schedule_len(&self) -> usize {
        let mut t = self.t_max;
        let mut n = 0;
        while t >= self.t_min * (1.0 - 1e-12) {
            n += 1;
            t *= self.gamma;
        }
        n
    }
}

/// Optional user settings; unset fields fall back to data-driven defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamOverrides {
    pub t_max: Option<f64>,
    pub t_min: Option<f64>,
    /// `t_min` as a fraction of the resolved `t_max`; ignored when `t_min` is set.
    pub t_min_ratio: Option<f64>,
    pub gamma: Option<f64>,
    pub k_max: Option<usize>,
    pub eps_c: Option<f64>,
    pub eps_n: Option<f64>,
    pub eps_r: Option<f64>,
    pub delta: Option<f64>,
    pub step_a: Option<f64>,
    pub step_b: Option<f64>,
    pub divergence: Option<DivergenceKind>,
    pub seed: Option<u64>,
    pub check_every: Option<usize>,
    pub level_budget: Option<usize>,
}

impl ParamOverrides {
    pub fn resolve(&self, stats: &RunningStats) -> Result<AnnealParams> {
        AnnealParams::from_stats(stats, self)
    }

    /// Field-wise `self.or(fallback)`.
    pub fn or(&self, fallback: &ParamOverrides) -> ParamOverrides {
        ParamOverrides {
            t_max: self.t_max.or(fallback.t_max),
            t_min: self.t_min.or(fallback.t_min),
            t_min_ratio: self.t_min_ratio.or(fallback.t_min_ratio),
            gamma: self.gamma.or(fallback.gamma),
            k_max: self.k_max.or(fallback.k_max),
            eps_c: self.eps_c.or(fallback.eps_c),
            eps_n: self.eps_n.or(fallback.eps_n),
            eps_r: self.eps_r.or(fallback.eps_r),
            delta: self.delta.or(fallback.delta),
            step_a: self.step_a.or(fallback.step_a),
            step_b: self.step_b.or(fallback.step_b),
            divergence: self.divergence.or(fallback.divergence),
            seed: self.seed.or(fallback.seed),
            check_every: self.check_every.or(fallback.check_every),
            level_budget: self.level_budget.or(fallback.level_budget),
        }
    }
}
