//! One online deterministic annealing learner and its temperature-level loop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::codebook::{self, gibbs_from_distances, Codevector};
use super::params::{stepsize, AnnealParams, ParamOverrides, WARMUP_SAMPLES};
use crate::data::{ClassId, Dataset, RunningStats, SampleStream};
use crate::error::{OdaError, Result};
use crate::metrics;

/// Whether class labels drive the membership term of the update.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Supervision {
    /// One initial codevector per listed class.
    Labels(Vec<ClassId>),
    /// Clustering: a single pseudo-class, membership always one.
    Unsupervised,
}

/// Where the learner is inside its temperature loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// The next sample opens a new temperature level (perturbation first).
    LevelStart,
    Annealing,
    /// The schedule, the codebook cap, or the stream ended.
    Finished,
}

/// Summary of one completed temperature level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub temperature: f64,
    /// Codebook size after merging and pruning.
    pub codevectors: usize,
    pub samples_observed: u64,
    pub converged: bool,
    pub perturbed: bool,
    pub divergence_evals: u64,
    pub train_accuracy: Option<f64>,
    pub distortion: Option<f64>,
}

/// What happened as a result of one observed sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    Updated,
    /// The sample completed a temperature level.
    LevelClosed,
    /// The learner had already finished; nothing was updated.
    Idle,
}

/// Online deterministic annealing state: codebook, temperature and schedule position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealState {
    pub codebook: Vec<Codevector>,
    pub classes: Vec<ClassId>,
    pub supervised: bool,
    pub temperature: f64,
    /// Index of the current temperature level, starting at 0.
    pub level: usize,
    /// Stochastic-approximation step `n` within the current level.
    pub step_count: u64,
    pub params: AnnealParams,
    pub history: Vec<LevelRecord>,
    /// Running per-coordinate moments of every observed sample.
    pub stats: RunningStats,
    pub phase: Phase,
    /// Total divergence evaluations spent in updates.
    pub divergence_evals: u64,
    final_level: bool,
    perturbed: bool,
    level_samples: u64,
    level_evals: u64,
    checkpoint: Vec<Vec<f64>>,
    #[serde(skip)]
    scratch: Scratch,
}

/// Reusable buffers; carry no state, so they never affect equality.
#[derive(Debug, Clone, Default)]
struct Scratch {
    dist: Vec<f64>,
    assoc: Vec<f64>,
}

impl PartialEq for Scratch {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// splitmix64 finalizer, used to derive independent seeds.
pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Starts a learner with one codevector per class, all at `initial_point`.
pub fn init_state(params: AnnealParams, supervision: Supervision, initial_point: &[f64]) -> Result<AnnealState> {
    params.validate()?;
    if initial_point.is_empty() || initial_point.iter().any(|v| !v.is_finite()) {
        return Err(OdaError::usage("initial point must be non-empty and finite"));
    }
    let (classes, supervised) = match supervision {
        Supervision::Labels(mut c) => {
            c.sort_unstable();
            c.dedup();
            if c.is_empty() {
                return Err(OdaError::usage("at least one class is required"));
            }
            (c, true)
        }
        Supervision::Unsupervised => (vec![0], false),
    };
    let codebook = classes
        .iter()
        .map(|&c| Codevector::new(initial_point.to_vec(), c, 1.0))
        .collect();
    Ok(AnnealState {
        codebook,
        classes,
        supervised,
        temperature: params.t_max,
        level: 0,
        step_count: 0,
        params,
        history: Vec::new(),
        stats: RunningStats::new(initial_point.len()),
        phase: Phase::LevelStart,
        divergence_evals: 0,
        final_level: false,
        perturbed: false,
        level_samples: 0,
        level_evals: 0,
        checkpoint: Vec::new(),
        scratch: Scratch::default(),
    })
}

impl AnnealState {
    pub fn k(&self) -> usize {
        self.codebook.len()
    }

    pub fn dim(&self) -> usize {
        self.stats.mean().len()
    }

    pub fn is_finished(&self) -> bool {
        self.phase == Phase::Finished
    }

    /// Samples seen in the current (open) level.
    pub fn level_samples(&self) -> u64 {
        self.level_samples
    }

    /// One stochastic-approximation update of every codevector.
    ///
    /// Does not touch the level loop; see [`AnnealState::observe`] for that.
    pub fn sa_step(&mut self, x: &[f64], label: Option<ClassId>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(OdaError::usage(format!(
                "sample dimension {} does not match codebook dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let label = match (self.supervised, label) {
            (true, Some(l)) => Some(l),
            (true, None) => return Err(OdaError::usage("supervised learner needs a label")),
            (false, _) => None,
        };
        self.stats.push(x);
        let kind = self.params.divergence;
        let k = self.codebook.len();
        self.scratch.dist.clear();
        self.scratch.dist
            .extend(self.codebook.iter().map(|c| kind.eval(x, &c.weights)));
        self.scratch.assoc.resize(k, 0.0);
        gibbs_from_distances(
            &self.scratch.dist,
            self.codebook.iter().map(|c| c.mass),
            self.temperature,
            &mut self.scratch.assoc,
        )?;
        self.divergence_evals += k as u64;
        self.level_evals += k as u64;

        let alpha = stepsize(self.step_count, self.params.step_a, self.params.step_b);
        for (cv, &p) in self.codebook.iter_mut().zip(&self.scratch.assoc) {
            let s = match label {
                Some(l) if cv.label != l => 0.0,
                _ => 1.0,
            };
            let sp = s * p;
            cv.mass += alpha * (sp - cv.mass);
            for (acc, &xi) in cv.accumulator.iter_mut().zip(x) {
                *acc += alpha * (sp * xi - *acc);
            }
            if cv.mass > f64::MIN_POSITIVE {
                cv.refresh_weights();
            } else {
                // idle: keep the last location and let pruning handle it
                cv.mass = 0.0;
                cv.accumulator.iter_mut().for_each(|a| *a = 0.0);
            }
        }
        self.step_count += 1;
        Ok(())
    }

    /// Feeds one sample through the level loop: opens a level when needed,
    /// updates, and closes the level on convergence or budget exhaustion.
    pub fn observe(&mut self, x: &[f64], label: Option<ClassId>) -> Result<StepEvent> {
        match self.phase {
            Phase::Finished => return Ok(StepEvent::Idle),
            Phase::LevelStart => self.begin_level(),
            Phase::Annealing => {}
        }
        self.sa_step(x, label)?;
        self.level_samples += 1;
        if self.level_samples.is_multiple_of(self.params.check_every as u64) {
            let converged = codebook::converged_at_temperature(
                &self.checkpoint,
                &self.codebook,
                self.params.eps_c,
                self.params.divergence,
            );
            self.snapshot();
            let exhausted = self.level_samples >= self.params.level_budget as u64;
            if converged || exhausted {
                self.close_level(converged);
                return Ok(StepEvent::LevelClosed);
            }
        }
        Ok(StepEvent::Updated)
    }

    fn snapshot(&mut self) {
        self.checkpoint.clear();
        self.checkpoint
            .extend(self.codebook.iter().map(|c| c.weights.clone()));
    }

    fn begin_level(&mut self) {
        self.step_count = 0;
        self.level_samples = 0;
        self.level_evals = 0;
        if 2 * self.k() <= self.params.k_max {
            self.perturb();
            self.perturbed = true;
        } else {
            self.final_level = true;
            self.perturbed = false;
        }
        self.snapshot();
        self.phase = Phase::Annealing;
    }

    /// Per-coordinate data scale used for perturbations.
    pub fn perturbation_scale(&self) -> Vec<f64> {
        if self.stats.count() < 2 {
            return vec![1.0; self.dim()];
        }
        self.stats.std()
    }

    /// Splits every codevector into a perturbed pair; the codebook doubles.
    pub fn perturb(&mut self) {
        let scale = self.perturbation_scale();
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.params.seed, self.level as u64 + 1));
        codebook::perturb_pairs(&mut self.codebook, self.params.delta, &scale, &mut rng);
    }

    /// Merges coincident same-label codevectors.
    pub fn merge_effective(&mut self) -> usize {
        codebook::merge_effective(&mut self.codebook, self.params.eps_n, self.params.divergence)
    }

    /// Drops idle codevectors, keeping at least one per class.
    pub fn prune_idle(&mut self) -> usize {
        codebook::prune_idle(&mut self.codebook, self.params.eps_r, &self.classes)
    }

    /// `T <- gamma T`, restarting the stepsize sequence.
    pub fn lower_temperature(&mut self) {
        self.temperature *= self.params.gamma;
        self.step_count = 0;
        self.level += 1;
    }

    fn close_level(&mut self, converged: bool) {
        self.merge_effective();
        self.prune_idle();
        self.history.push(LevelRecord {
            level: self.level,
            temperature: self.temperature,
            codevectors: self.k(),
            samples_observed: self.level_samples,
            converged,
            perturbed: self.perturbed,
            divergence_evals: self.level_evals,
            train_accuracy: None,
            distortion: None,
        });
        if self.final_level || self.k() >= self.params.k_max {
            self.phase = Phase::Finished;
            return;
        }
        let next = self.temperature * self.params.gamma;
        if next < self.params.t_min * (1.0 - 1e-12) {
            self.phase = Phase::Finished;
        } else {
            self.lower_temperature();
            self.phase = Phase::LevelStart;
        }
    }

    /// Closes an open level without convergence (the stream ran dry) and stops.
    pub fn interrupt(&mut self) {
        if self.phase == Phase::Annealing {
            self.close_level(false);
        }
        self.phase = Phase::Finished;
    }

    /// Index of the nearest codevector.
    pub fn assign(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(OdaError::usage("sample dimension does not match the codebook"));
        }
        codebook::nearest(x, &self.codebook, self.params.divergence)
            .ok_or_else(|| OdaError::usage("empty codebook"))
    }

    /// Label of the nearest codevector (lowest index on ties).
    pub fn predict(&self, x: &[f64]) -> Result<ClassId> {
        self.assign(x).map(|i| self.codebook[i].label)
    }

    /// Class with the largest summed Gibbs association at the current temperature.
    pub fn predict_soft(&self, x: &[f64]) -> Result<ClassId> {
        if self.codebook.is_empty() {
            return Err(OdaError::usage("empty codebook"));
        }
        let p = codebook::gibbs_association(x, &self.codebook, self.temperature, self.params.divergence)?;
        let mut votes: Vec<(ClassId, f64)> = Vec::new();
        for (c, w) in self.codebook.iter().zip(p) {
            match votes.iter_mut().find(|(l, _)| *l == c.label) {
                Some(v) => v.1 += w,
                None => votes.push((c.label, w)),
            }
        }
        votes.sort_by_key(|v| v.0);
        Ok(votes
            .iter()
            .fold(votes[0], |best, v| if v.1 > best.1 { *v } else { best })
            .0)
    }

    /// Association probabilities of `x` at the current temperature.
    pub fn association(&self, x: &[f64]) -> Result<Vec<f64>> {
        codebook::gibbs_association(x, &self.codebook, self.temperature, self.params.divergence)
    }

    /// History rows; a learner that has not closed a level reports its current one.
    pub fn history_rows(&self) -> Vec<LevelRecord> {
        if !self.history.is_empty() {
            return self.history.clone();
        }
        vec![LevelRecord {
            level: self.level,
            temperature: self.temperature,
            codevectors: self.k(),
            samples_observed: self.level_samples,
            converged: false,
            perturbed: false,
            divergence_evals: self.level_evals,
            train_accuracy: None,
            distortion: None,
        }]
    }
}

/// How [`run_oda_with`] seeds and reports.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Starting location of every initial codevector; defaults to the first observed sample.
    pub initial_point: Option<Vec<f64>>,
    /// Fill `train_accuracy` and `distortion` of each level record from the stream's dataset.
    pub level_metrics: bool,
}

/// Estimates the data scale from the first samples of the stream.
///
/// Returns the statistics and the consumed samples (which are not replayed).
pub fn warm_up(stream: &mut SampleStream<'_>, n: usize) -> Result<(RunningStats, Vec<Vec<f64>>)> {
    let mut stats = RunningStats::new(stream.dataset().dim());
    let mut seen = Vec::with_capacity(n);
    for obs in stream.by_ref().take(n) {
        stats.push(obs.x);
        seen.push(obs.x.to_vec());
    }
    if seen.is_empty() {
        return Err(OdaError::usage("stream produced no samples"));
    }
    Ok((stats, seen))
}

/// Trains a flat learner on `stream` until the schedule ends.
pub fn run_oda(stream: &mut SampleStream<'_>, overrides: &ParamOverrides) -> Result<AnnealState> {
    run_oda_with(
        stream,
        overrides,
        &RunOptions {
            level_metrics: true,
            ..Default::default()
        },
    )
}

pub fn run_oda_with(
    stream: &mut SampleStream<'_>,
    overrides: &ParamOverrides,
    options: &RunOptions,
) -> Result<AnnealState> {
    let dataset: &Dataset = stream.dataset();
    let (stats, warm) = warm_up(stream, WARMUP_SAMPLES)?;
    let params = AnnealParams::from_stats_anchored(&stats, overrides, options.initial_point.as_deref())?;
    let supervision = if dataset.is_labeled() {
        Supervision::Labels(dataset.class_set())
    } else {
        Supervision::Unsupervised
    };
    let initial = options.initial_point.clone().unwrap_or_else(|| warm[0].clone());
    let mut state = init_state(params, supervision, &initial)?;
    state.stats = stats;
    train(&mut state, stream, if options.level_metrics { Some(dataset) } else { None })?;
    Ok(state)
}

/// Drives an existing learner with `stream` until it finishes or the stream ends.
pub fn train(state: &mut AnnealState, stream: &mut SampleStream<'_>, metrics_on: Option<&Dataset>) -> Result<()> {
    while !state.is_finished() {
        let Some(obs) = stream.next() else {
            state.interrupt();
            break;
        };
        if state.observe(obs.x, obs.label)? == StepEvent::LevelClosed {
            if let Some(d) = metrics_on {
                let acc = if d.is_labeled() {
                    Some(metrics::eval_accuracy(state, d)?)
                } else {
                    None
                };
                let dist = metrics::eval_distortion(state, d)?;
                let rec = state.history.last_mut().expect("level just closed");
                rec.train_accuracy = acc;
                rec.distortion = Some(dist);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bregman::DivergenceKind;
    use crate::data::{gen_gaussians, stream, OrderPolicy};
    use rand_distr::{Distribution, Normal};

    fn params() -> AnnealParams {
        AnnealParams {
            t_max: 10.0,
            t_min: 0.1,
            gamma: 0.8,
            k_max: 64,
            eps_c: 1e-3,
            eps_n: 1e-3,
            eps_r: 1e-4,
            delta: 0.01,
            step_a: 1.0,
            step_b: 1.0,
            divergence: DivergenceKind::SquaredEuclidean,
            seed: 1,
            check_every: 100,
            level_budget: 50_000,
        }
    }

    #[test]
    fn init_places_one_codevector_per_class() {
        let s = init_state(params(), Supervision::Labels(vec![1, 0]), &[0.0, 0.0]).unwrap();
        assert_eq!(s.k(), 2);
        assert_eq!(s.temperature, 10.0);
        assert!(s.codebook.iter().all(|c| c.weights == vec![0.0, 0.0] && c.mass == 1.0));
        let u = init_state(params(), Supervision::Unsupervised, &[3.0]).unwrap();
        assert_eq!(u.k(), 1);
        assert!(matches!(
            init_state(params(), Supervision::Labels(vec![]), &[0.0]),
            Err(OdaError::Usage(_))
        ));
    }

    #[test]
    fn full_step_overwrites_single_codevector() {
        let mut s = init_state(params(), Supervision::Labels(vec![0]), &[0.0, 0.0]).unwrap();
        s.sa_step(&[2.0, -1.0], Some(0)).unwrap();
        assert!((s.codebook[0].mass - 1.0).abs() < 1e-15);
        assert_eq!(s.codebook[0].weights, vec![2.0, -1.0]);
    }

    #[test]
    fn mismatched_label_shrinks_mass() {
        let mut p = params();
        p.step_a = 4.0;
        let mut s = init_state(p, Supervision::Labels(vec![0, 1]), &[0.0]).unwrap();
        s.sa_step(&[1.0], Some(0)).unwrap();
        // alpha_0 = 1/4; class-1 codevector has s = 0
        assert!((s.codebook[1].mass - 0.75).abs() < 1e-15);
        assert_eq!(s.codebook[1].weights, vec![0.0]);
        assert!(matches!(s.sa_step(&[1.0], None), Err(OdaError::Usage(_))));
        assert!(matches!(s.sa_step(&[1.0, 2.0], Some(0)), Err(OdaError::Usage(_))));
    }

    #[test]
    fn running_mean_of_gaussian_stream() {
        let mut s = init_state(params(), Supervision::Unsupervised, &[5.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = Normal::new(0.0, 1.0).unwrap();
        let mut sum = 0.0;
        for i in 0..10_000 {
            let x = n.sample(&mut rng);
            sum += x;
            s.sa_step(&[x], None).unwrap();
            if i == 9_999 {
                // with a = b = 1 the update is exactly the running sample mean
                assert!((s.codebook[0].weights[0] - sum / 10_000.0).abs() < 1e-9);
            }
        }
        assert!(s.codebook[0].weights[0].abs() < 0.05);
    }

    #[test]
    fn mass_and_consistency_invariants() {
        let d = gen_gaussians(3, 200, &[vec![-2.0, 0.0], vec![2.0, 0.0]], 1.0).unwrap();
        let mut p = params();
        p.step_a = 2.0;
        p.step_b = 0.9;
        let mut s = init_state(p, Supervision::Labels(vec![0, 1]), &[0.0, 0.0]).unwrap();
        s.perturb();
        for obs in stream(&d, 9, OrderPolicy::WithReplacement).unwrap().take(2000) {
            s.sa_step(obs.x, obs.label).unwrap();
            let total: f64 = s.codebook.iter().map(|c| c.mass).sum();
            assert!(total > 0.0 && total <= 2.0 + 1e-12);
            for c in &s.codebook {
                assert!(c.mass > 0.0 && c.mass <= 1.0);
                for (w, a) in c.weights.iter().zip(&c.accumulator) {
                    assert!((w * c.mass - a).abs() <= 1e-10 * a.abs().max(1e-300) + 1e-300);
                }
            }
        }
    }

    #[test]
    fn lower_temperature_is_geometric() {
        let mut p = params();
        p.t_max = 16.0;
        p.gamma = 0.5;
        let mut s = init_state(p, Supervision::Unsupervised, &[0.0]).unwrap();
        for _ in 0..5 {
            s.lower_temperature();
        }
        assert!((s.temperature - 0.5).abs() < 1e-15);
        let mut q = params();
        q.t_max = 10.0;
        let mut s = init_state(q, Supervision::Unsupervised, &[0.0]).unwrap();
        s.lower_temperature();
        assert!((s.temperature - 8.0).abs() < 1e-12);
        assert_eq!(s.step_count, 0);
    }

    #[test]
    fn single_level_when_t_min_equals_t_max() {
        let d = gen_gaussians(3, 300, &[vec![-3.0, 0.0], vec![3.0, 0.0]], 1.0).unwrap();
        let mut st = stream(&d, 1, OrderPolicy::WithReplacement).unwrap();
        let o = ParamOverrides {
            t_max: Some(100.0),
            t_min: Some(100.0),
            ..Default::default()
        };
        let s = run_oda(&mut st, &o).unwrap();
        assert_eq!(s.history.len(), 1);
        assert_eq!(s.k(), 2);
        assert!(s.is_finished());
    }

    #[test]
    fn exhausted_stream_marks_last_level() {
        let d = gen_gaussians(3, 150, &[vec![-3.0, 0.0], vec![3.0, 0.0]], 1.0).unwrap();
        let mut st = stream(&d, 1, OrderPolicy::AsIs).unwrap();
        let o = ParamOverrides {
            eps_c: Some(1e-300),
            ..Default::default()
        };
        let s = run_oda(&mut st, &o).unwrap();
        assert!(s.is_finished());
        assert!(!s.history.last().unwrap().converged);
    }

    #[test]
    fn predict_nearest_and_soft() {
        let mut s = init_state(params(), Supervision::Labels(vec![0, 1]), &[0.0]).unwrap();
        s.codebook[0] = Codevector::new(vec![-1.0], 0, 0.5);
        s.codebook[1] = Codevector::new(vec![1.0], 1, 0.5);
        assert_eq!(s.predict(&[-0.9]).unwrap(), 0);
        assert_eq!(s.predict(&[1.0]).unwrap(), 1);
        assert_eq!(s.predict_soft(&[0.7]).unwrap(), 1);
        s.codebook.clear();
        assert!(matches!(s.predict(&[0.0]), Err(OdaError::Usage(_))));
    }

    #[test]
    fn history_rows_for_fresh_state() {
        let s = init_state(params(), Supervision::Unsupervised, &[0.0]).unwrap();
        let rows = s.history_rows();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].temperature, 10.0);
    }

    #[test]
    fn seed_mixing_separates_streams() {
        assert_ne!(mix_seed(1, 1), mix_seed(1, 2));
        assert_ne!(mix_seed(1, 1), mix_seed(2, 1));
        assert_eq!(mix_seed(7, 3), mix_seed(7, 3));
    }
}
