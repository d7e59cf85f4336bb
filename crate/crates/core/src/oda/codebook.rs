//! Codevectors and the codebook-level operations of one annealing level.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bregman::DivergenceKind;
use crate::data::ClassId;
use crate::error::{OdaError, Result};

/// A prototype with its class and the running moment estimates behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codevector {
    pub weights: Vec<f64>,
    pub label: ClassId,
    /// Estimate of the codevector's probability mass.
    pub mass: f64,
    /// Estimate of `weights * mass`.
    pub accumulator: Vec<f64>,
}

impl Codevector {
    pub fn new(weights: Vec<f64>, label: ClassId, mass: f64) -> Self {
        let accumulator = weights.iter().map(|w| w * mass).collect();
        Self {
            weights,
            label,
            mass,
            accumulator,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Recomputes `weights = accumulator / mass`; a massless codevector keeps its weights.
    pub fn refresh_weights(&mut self) {
        if self.mass > 0.0 {
            let inv = 1.0 / self.mass;
            for (w, s) in self.weights.iter_mut().zip(&self.accumulator) {
                *w = s * inv;
            }
        }
    }

    /// Multiplies mass and accumulator by `factor`, leaving the weights fixed.
    pub fn rescale_mass(&mut self, factor: f64) {
        self.mass *= factor;
        self.accumulator.iter_mut().for_each(|s| *s *= factor);
    }
}

/// Gibbs association `rho_i exp(-d(x, mu_i) / T)`, normalized over the codebook.
///
/// Computed in the log domain with the largest exponent subtracted.
pub fn gibbs_association(
    x: &[f64],
    codebook: &[Codevector],
    temperature: f64,
    kind: DivergenceKind,
) -> Result<Vec<f64>> {
    if !(temperature > 0.0) {
        return Err(OdaError::usage("temperature must be positive"));
    }
    if codebook.iter().any(|c| c.dim() != x.len()) {
        return Err(OdaError::usage("codebook and sample dimensions differ"));
    }
    let dists: Vec<f64> = codebook.iter().map(|c| kind.eval(x, &c.weights)).collect();
    let mut out = vec![0.0; codebook.len()];
    gibbs_from_distances(&dists, codebook.iter().map(|c| c.mass), temperature, &mut out)?;
    Ok(out)
}

/// Normalized Gibbs weights from precomputed divergences, written into `out`.
pub(crate) fn gibbs_from_distances(
    dists: &[f64],
    masses: impl Iterator<Item = f64>,
    temperature: f64,
    out: &mut [f64],
) -> Result<()> {
    let mut max = f64::NEG_INFINITY;
    for ((o, &d), m) in out.iter_mut().zip(dists).zip(masses) {
        *o = if m > 0.0 {
            m.ln() - d / temperature
        } else {
            f64::NEG_INFINITY
        };
        max = max.max(*o);
    }
    if max == f64::NEG_INFINITY {
        return Err(OdaError::Degenerate("every codevector has zero mass".into()));
    }
    let mut total = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
    Ok(())
}

/// True iff every codevector moved less than `eps_c` since `previous`.
///
/// Codebooks are index-aligned; a size change counts as not converged.
pub fn converged_at_temperature(
    previous: &[Vec<f64>],
    codebook: &[Codevector],
    eps_c: f64,
    kind: DivergenceKind,
) -> bool {
    previous.len() == codebook.len()
        && previous
            .iter()
            .zip(codebook)
            .all(|(p, c)| kind.eval(&c.weights, p) < eps_c)
}

/// Replaces each codevector by a pair `mu + u`, `mu - u`.
///
/// `u` is uniform in `[-delta * scale_j, delta * scale_j]` per coordinate.
/// Children keep the parent's label and take half its mass.
pub fn perturb_pairs<R: Rng>(codebook: &mut Vec<Codevector>, delta: f64, scale: &[f64], rng: &mut R) {
    let mut next = Vec::with_capacity(codebook.len() * 2);
    for parent in codebook.drain(..) {
        let offset: Vec<f64> = scale
            .iter()
            .map(|&s| {
                let r = delta * s;
                if r > 0.0 {
                    rng.random_range(-r..=r)
                } else {
                    0.0
                }
            })
            .collect();
        let mass = parent.mass / 2.0;
        for sign in [1.0, -1.0] {
            let w = parent
                .weights
                .iter()
                .zip(&offset)
                .map(|(m, u)| m + sign * u)
                .collect();
            next.push(Codevector::new(w, parent.label, mass));
        }
    }
    *codebook = next;
}

/// Greedy same-label merge in codebook order.
///
/// Codevector `i` is absorbed by the first surviving `j < i` of the same label
/// with `d(mu_j, mu_i) < eps_n`; the survivor takes the summed mass and
/// accumulator. Returns the number of codevectors removed.
pub fn merge_effective(codebook: &mut Vec<Codevector>, eps_n: f64, kind: DivergenceKind) -> usize {
    let before = codebook.len();
    let mut survivors: Vec<Codevector> = Vec::with_capacity(before);
    for cv in codebook.drain(..) {
        let target = survivors
            .iter()
            .position(|s| s.label == cv.label && kind.eval(&s.weights, &cv.weights) < eps_n);
        match target {
            Some(j) => {
                let s = &mut survivors[j];
                s.mass += cv.mass;
                s.accumulator
                    .iter_mut()
                    .zip(&cv.accumulator)
                    .for_each(|(a, b)| *a += b);
                s.refresh_weights();
            }
            None => survivors.push(cv),
        }
    }
    *codebook = survivors;
    before - codebook.len()
}

/// Removes codevectors whose mass fell below `eps_r`.
///
/// The heaviest codevector of each class in `classes` is always kept. The
/// removed mass is redistributed over the survivors in proportion to their
/// mass. Returns the number removed.
pub fn prune_idle(codebook: &mut Vec<Codevector>, eps_r: f64, classes: &[ClassId]) -> usize {
    let before = codebook.len();
    let total: f64 = codebook.iter().map(|c| c.mass).sum();
    let mut protected = vec![false; before];
    for &class in classes {
        let heaviest = codebook
            .iter()
            .enumerate()
            .filter(|(_, c)| c.label == class)
            .max_by(|a, b| a.1.mass.total_cmp(&b.1.mass).then(b.0.cmp(&a.0)));
        if let Some((i, _)) = heaviest {
            protected[i] = true;
        }
    }
    let mut i = 0;
    codebook.retain(|c| {
        let keep = protected[i] || c.mass >= eps_r;
        i += 1;
        keep
    });
    let removed = before - codebook.len();
    if removed > 0 {
        let kept: f64 = codebook.iter().map(|c| c.mass).sum();
        if kept > 0.0 && total > 0.0 {
            let factor = total / kept;
            codebook.iter_mut().for_each(|c| c.rescale_mass(factor));
        }
    }
    removed
}

/// Index of the codevector closest to `x`, lowest index on ties.
pub fn nearest(x: &[f64], codebook: &[Codevector], kind: DivergenceKind) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in codebook.iter().enumerate() {
        let d = kind.eval(x, &c.weights);
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}
