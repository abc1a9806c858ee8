//! Sequential Monte Carlo source-term estimation.
//!
//! The posterior over source terms is carried by a weighted particle set.
//! Measurements reweight the particles (bootstrap proposal: the parameters
//! are fixed, so there is no predict-step jitter); when the effective sample
//! size falls below a threshold the set is rejuvenated by systematic
//! resampling followed by a random-walk Metropolis-Hastings move targeting
//! the full-history posterior.
//!
//! Weight updates run in linear space with a per-measurement log-likelihood
//! floor, and all reductions are sequential in particle order, so results do
//! not depend on thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dispersion::{concentration, wrap_angle, Position, SourceTerm};
use crate::error::{ConfigError, DegeneratePosterior};
use crate::seeds;
use crate::sensor::{log_likelihood, Measurement, SensorParams, LOG_LIKELIHOOD_FLOOR};

const LN_TAU: f64 = 1.8378770664093453; // ln(2*pi)

// Parameter vector layout shared by priors, proposals and snapshots.
pub(crate) const P_SX: usize = 0;
pub(crate) const P_SY: usize = 1;
pub(crate) const P_SZ: usize = 2;
pub(crate) const P_Q: usize = 3;
pub(crate) const P_U: usize = 4;
pub(crate) const P_PHI: usize = 5;
pub(crate) const P_Z1: usize = 6;
pub(crate) const P_Z2: usize = 7;
pub(crate) const N_PARAMS: usize = 8;

pub(crate) const PARAM_NAMES: [&str; N_PARAMS] = [
    "source_x",
    "source_y",
    "source_z",
    "release_rate",
    "wind_speed",
    "wind_dir",
    "diffusivity",
    "particle_lifetime",
];

pub(crate) fn theta_to_vec(t: &SourceTerm) -> [f64; N_PARAMS] {
    [
        t.source_pos.x,
        t.source_pos.y,
        t.source_pos.z,
        t.release_rate,
        t.wind_speed,
        t.wind_dir,
        t.diffusivity,
        t.particle_lifetime,
    ]
}

pub(crate) fn vec_to_theta(v: &[f64; N_PARAMS]) -> SourceTerm {
    SourceTerm {
        source_pos: Position::new(v[P_SX], v[P_SY], v[P_SZ]),
        release_rate: v[P_Q],
        wind_speed: v[P_U],
        wind_dir: v[P_PHI],
        diffusivity: v[P_Z1],
        particle_lifetime: v[P_Z2],
    }
}

/// Hard support of each parameter, independent of the prior shape.
fn support_ok(idx: usize, x: f64) -> bool {
    if !x.is_finite() {
        return false;
    }
    match idx {
        P_Q | P_Z1 | P_Z2 => x > 0.0,
        P_U => x >= 0.0,
        _ => true,
    }
}

/// Marginal prior for one source-term parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamPrior {
    /// Known constant (excluded from estimation and MCMC proposals).
    Fixed(f64),
    Uniform { lo: f64, hi: f64 },
    Gamma { shape: f64, scale: f64 },
    Normal { mean: f64, variance: f64 },
}

impl ParamPrior {
    pub fn is_fixed(&self) -> bool {
        matches!(self, ParamPrior::Fixed(_))
    }

    fn validate(&self, field: &str, idx: usize) -> Result<(), ConfigError> {
        match *self {
            ParamPrior::Fixed(v) => {
                if !support_ok(idx, v) {
                    return Err(ConfigError::new(field, "fixed value outside support"));
                }
            }
            ParamPrior::Uniform { lo, hi } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(ConfigError::new(field, "uniform requires finite lo < hi"));
                }
            }
            ParamPrior::Gamma { shape, scale } => {
                if !(shape > 0.0) || !(scale > 0.0) {
                    return Err(ConfigError::new(field, "gamma requires shape > 0, scale > 0"));
                }
            }
            ParamPrior::Normal { variance, mean } => {
                if !(variance > 0.0) || !mean.is_finite() {
                    return Err(ConfigError::new(field, "normal requires variance > 0"));
                }
            }
        }
        Ok(())
    }
}

/// Per-parameter priors for the full source term. Fixed entries pin a
/// parameter to a known scenario constant (known-environment mode); free
/// entries are sampled and rejuvenated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub source_x: ParamPrior,
    pub source_y: ParamPrior,
    pub source_z: ParamPrior,
    pub release_rate: ParamPrior,
    pub wind_speed: ParamPrior,
    pub wind_dir: ParamPrior,
    pub diffusivity: ParamPrior,
    pub particle_lifetime: ParamPrior,
}

impl PriorSpec {
    pub(crate) fn by_index(&self, idx: usize) -> &ParamPrior {
        match idx {
            P_SX => &self.source_x,
            P_SY => &self.source_y,
            P_SZ => &self.source_z,
            P_Q => &self.release_rate,
            P_U => &self.wind_speed,
            P_PHI => &self.wind_dir,
            P_Z1 => &self.diffusivity,
            P_Z2 => &self.particle_lifetime,
            _ => unreachable!("parameter index out of range"),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for idx in 0..N_PARAMS {
            self.by_index(idx)
                .validate(&format!("prior.{}", PARAM_NAMES[idx]), idx)?;
        }
        Ok(())
    }

    /// Indices of parameters that are estimated (non-fixed).
    pub(crate) fn free_indices(&self) -> Vec<usize> {
        (0..N_PARAMS)
            .filter(|&i| !self.by_index(i).is_fixed())
            .collect()
    }

    fn sample_param<R: Rng + ?Sized>(
        &self,
        idx: usize,
        rng: &mut R,
    ) -> Result<f64, ConfigError> {
        let prior = self.by_index(idx);
        if let ParamPrior::Fixed(v) = prior {
            return Ok(*v);
        }
        // Rejection against the hard support realizes the truncated prior.
        for _ in 0..1000 {
            let raw = match *prior {
                ParamPrior::Fixed(v) => v,
                ParamPrior::Uniform { lo, hi } => rng.random_range(lo..hi),
                ParamPrior::Gamma { shape, scale } => {
                    rand_distr::Gamma::new(shape, scale)
                        .expect("validated gamma")
                        .sample(rng)
                }
                ParamPrior::Normal { mean, variance } => {
                    rand_distr::Normal::new(mean, variance.sqrt())
                        .expect("validated normal")
                        .sample(rng)
                }
            };
            let v = if idx == P_PHI { wrap_angle(raw) } else { raw };
            if support_ok(idx, v) {
                return Ok(v);
            }
        }
        Err(ConfigError::new(
            format!("prior.{}", PARAM_NAMES[idx]),
            "could not draw a value inside the parameter support",
        ))
    }

    /// Log-density of one parameter value, including the hard-support
    /// truncation (constant truncation factors cancel in MH ratios).
    pub(crate) fn log_density_at(&self, idx: usize, x: f64) -> f64 {
        if !support_ok(idx, x) {
            return f64::NEG_INFINITY;
        }
        match *self.by_index(idx) {
            ParamPrior::Fixed(_) => 0.0,
            ParamPrior::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    -(hi - lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            ParamPrior::Gamma { shape, scale } => {
                if x > 0.0 {
                    (shape - 1.0) * x.ln() - x / scale - shape * scale.ln() - ln_gamma(shape)
                } else {
                    f64::NEG_INFINITY
                }
            }
            ParamPrior::Normal { mean, variance } => {
                // Angles are compared through the wrapped difference so the
                // density is continuous across the 0/2*pi seam.
                let d = if idx == P_PHI {
                    wrap_signed(x - mean)
                } else {
                    x - mean
                };
                -0.5 * (LN_TAU + variance.ln()) - d * d / (2.0 * variance)
            }
        }
    }

    /// Joint log-prior of a full source term.
    pub(crate) fn log_density(&self, v: &[f64; N_PARAMS]) -> f64 {
        let mut acc = 0.0;
        for idx in 0..N_PARAMS {
            let d = self.log_density_at(idx, v[idx]);
            if d == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            acc += d;
        }
        acc
    }
}

/// Wraps an angle difference into [-pi, pi).
fn wrap_signed(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = (a + std::f64::consts::PI).rem_euclid(t);
    r - std::f64::consts::PI
}

/// Weighted hypotheses approximating the source-term posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    particles: Vec<SourceTerm>,
    weights: Vec<f64>,
}

impl ParticleSet {
    pub fn from_parts(particles: Vec<SourceTerm>, weights: Vec<f64>) -> Result<Self, ConfigError> {
        if particles.is_empty() || particles.len() != weights.len() {
            return Err(ConfigError::new(
                "particles",
                "particle and weight lengths must match and be non-empty",
            ));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(ConfigError::new(
                "weights",
                "weights must be non-negative and sum to 1",
            ));
        }
        Ok(Self { particles, weights })
    }

    /// Uniform weights over the given particles.
    pub fn uniform(particles: Vec<SourceTerm>) -> Self {
        let n = particles.len();
        Self {
            particles,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[SourceTerm] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Degenerate-posterior recovery: resets to uniform weights.
    pub fn reset_uniform(&mut self) {
        let n = self.len();
        self.weights.iter_mut().for_each(|w| *w = 1.0 / n as f64);
    }
}

/// Ordered measurement history Z_k.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurementHistory {
    measurements: Vec<Measurement>,
}

impl MeasurementHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a measurement; time indices must be strictly increasing.
    pub fn push(&mut self, m: Measurement) -> Result<(), ConfigError> {
        if let Some(last) = self.measurements.last() {
            if m.time_index <= last.time_index {
                return Err(ConfigError::new(
                    "history",
                    "time_index must be strictly increasing",
                ));
            }
        }
        self.measurements.push(m);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }

    pub fn as_slice(&self) -> &[Measurement] {
        &self.measurements
    }
}

pub(crate) struct AllFloored;

/// Multiplies weights by exp(ll) and renormalizes with a fixed sequential
/// reduction order. Returns the log of the normalization constant (the
/// marginal likelihood estimate of the measurement).
pub(crate) fn reweight_into(
    old: &[f64],
    ll: &[f64],
    out: &mut [f64],
) -> Result<f64, AllFloored> {
    debug_assert_eq!(old.len(), ll.len());
    debug_assert_eq!(old.len(), out.len());
    let max_ll = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max_ll > LOG_LIKELIHOOD_FLOOR) {
        return Err(AllFloored);
    }
    let mut sum = 0.0;
    for i in 0..old.len() {
        // ll == 0 is the common sub-threshold fast path; exp(0) == 1.
        let e = if ll[i] == 0.0 { old[i] } else { old[i] * ll[i].exp() };
        out[i] = e;
        sum += e;
    }
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(AllFloored);
    }
    let inv = 1.0 / sum;
    out.iter_mut().for_each(|w| *w *= inv);
    Ok(sum.ln())
}

/// Draws `n` particles i.i.d. from the prior with uniform weights.
pub fn sample_prior<R: Rng + ?Sized>(
    spec: &PriorSpec,
    n: usize,
    rng: &mut R,
) -> Result<ParticleSet, ConfigError> {
    spec.validate()?;
    if n < 2 {
        return Err(ConfigError::new("particle_count", "must be at least 2"));
    }
    let mut particles = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v = [0.0; N_PARAMS];
        for (idx, slot) in v.iter_mut().enumerate() {
            *slot = spec.sample_param(idx, rng)?;
        }
        particles.push(vec_to_theta(&v));
    }
    Ok(ParticleSet::uniform(particles))
}

/// One Bayesian measurement update (reweighting only; particles unchanged).
///
/// Returns the updated set and the log normalization constant. Fails with a
/// degenerate-posterior error when every particle's log-likelihood hit the
/// floor, carrying the measurement's step index.
pub fn bayes_update(
    ps: &ParticleSet,
    m: &Measurement,
    sp: &SensorParams,
) -> Result<(ParticleSet, f64), DegeneratePosterior> {
    let ll: Vec<f64> = ps
        .particles
        .iter()
        .map(|theta| log_likelihood(m, concentration(&m.position, theta), sp))
        .collect();
    let mut weights = vec![0.0; ps.len()];
    let log_evidence = reweight_into(&ps.weights, &ll, &mut weights)
        .map_err(|_| DegeneratePosterior { step: m.time_index })?;
    Ok((
        ParticleSet {
            particles: ps.particles.clone(),
            weights,
        },
        log_evidence,
    ))
}

/// Effective sample size 1 / sum(w^2), in [1, N].
pub fn effective_sample_size(ps: &ParticleSet) -> f64 {
    let s: f64 = ps.weights.iter().map(|w| w * w).sum();
    1.0 / s
}

/// Systematic resampling: one uniform offset, stratified cumulative
/// selection. Output weights are uniform; the copy count of particle `i` is
/// within {floor(N w_i), ceil(N w_i)}. Consumes exactly one `f64` draw.
pub fn systematic_resample<R: Rng + ?Sized>(ps: &ParticleSet, rng: &mut R) -> ParticleSet {
    let idx = systematic_indices(&ps.weights, rng.random::<f64>());
    let particles = idx.iter().map(|&i| ps.particles[i]).collect();
    ParticleSet::uniform(particles)
}

/// Index selection given the single uniform variate in [0, 1).
pub(crate) fn systematic_indices(weights: &[f64], unit: f64) -> Vec<usize> {
    let n = weights.len();
    let step = 1.0 / n as f64;
    let mut u = unit * step;
    let mut cum = weights[0];
    let mut i = 0usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        while u > cum && i + 1 < n {
            i += 1;
            cum += weights[i];
        }
        out.push(i);
        u += step;
    }
    out
}

/// Random-walk Metropolis-Hastings rejuvenation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcConfig {
    /// Proposals per particle per move.
    pub proposals_per_particle: usize,
    /// Proposal scale c; the proposal covariance is c^2 times the empirical
    /// covariance of the free parameters.
    pub scale: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            proposals_per_particle: 3,
            scale: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct McmcDiagnostics {
    pub proposed: usize,
    pub accepted: usize,
}

impl McmcDiagnostics {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Weighted covariance matrix of the free parameters (two-pass).
pub(crate) fn free_param_covariance(
    ps: &ParticleSet,
    free: &[usize],
) -> nalgebra::DMatrix<f64> {
    let d = free.len();
    let mut mean = vec![0.0; d];
    for (theta, &w) in ps.particles.iter().zip(&ps.weights) {
        let v = theta_to_vec(theta);
        for (j, &idx) in free.iter().enumerate() {
            mean[j] += w * v[idx];
        }
    }
    let mut cov = nalgebra::DMatrix::zeros(d, d);
    for (theta, &w) in ps.particles.iter().zip(&ps.weights) {
        let v = theta_to_vec(theta);
        for a in 0..d {
            let da = v[free[a]] - mean[a];
            for b in a..d {
                let db = v[free[b]] - mean[b];
                cov[(a, b)] += w * da * db;
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            cov[(a, b)] = cov[(b, a)];
        }
    }
    cov
}

/// Full-history log-posterior of one source term.
fn log_posterior(
    v: &[f64; N_PARAMS],
    hist: &[Measurement],
    spec: &PriorSpec,
    sp: &SensorParams,
) -> f64 {
    let lp = spec.log_density(v);
    if lp == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let theta = vec_to_theta(v);
    let mut acc = lp;
    for m in hist {
        acc += log_likelihood(m, concentration(&m.position, &theta), sp);
    }
    acc
}

/// Lower-triangular proposal factor: Cholesky of scale^2 * cov, falling back
/// to a diagonal when the covariance is singular (e.g. a collapsed set).
fn proposal_factor(cov: &nalgebra::DMatrix<f64>, scale: f64) -> nalgebra::DMatrix<f64> {
    let d = cov.nrows();
    let scaled = cov * (scale * scale);
    if let Some(chol) = nalgebra::Cholesky::new(scaled.clone()) {
        return chol.l();
    }
    let mut l = nalgebra::DMatrix::zeros(d, d);
    for j in 0..d {
        let var = cov[(j, j)].max(1e-12);
        l[(j, j)] = scale * var.sqrt();
    }
    l
}

/// One Metropolis-Hastings sweep with a fixed proposal factor over the given
/// free parameters, targeting the full-history posterior. Each particle runs
/// an independent chain of `proposals` steps seeded from `move_seed`.
pub fn mh_sweep(
    ps: &ParticleSet,
    hist: &MeasurementHistory,
    spec: &PriorSpec,
    sp: &SensorParams,
    free: &[usize],
    proposal_l: &nalgebra::DMatrix<f64>,
    proposals: usize,
    move_seed: u64,
) -> (ParticleSet, McmcDiagnostics) {
    let d = free.len();
    let results: Vec<(SourceTerm, usize)> = ps
        .particles
        .par_iter()
        .enumerate()
        .map(|(i, theta)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(&[move_seed, i as u64]));
            let mut cur = theta_to_vec(theta);
            let mut cur_lp = log_posterior(&cur, hist.as_slice(), spec, sp);
            let mut accepted = 0;
            let mut z = vec![0.0; d];
            for _ in 0..proposals {
                for zi in z.iter_mut() {
                    *zi = rng.sample(rand_distr::StandardNormal);
                }
                let mut prop = cur;
                for (a, &idx) in free.iter().enumerate() {
                    let mut delta = 0.0;
                    for b in 0..=a {
                        delta += proposal_l[(a, b)] * z[b];
                    }
                    prop[idx] += delta;
                }
                if free.contains(&P_PHI) {
                    prop[P_PHI] = wrap_angle(prop[P_PHI]);
                }
                let prop_lp = log_posterior(&prop, hist.as_slice(), spec, sp);
                let accept = if prop_lp == f64::NEG_INFINITY {
                    false
                } else if prop_lp >= cur_lp {
                    true
                } else {
                    rng.random::<f64>().ln() < prop_lp - cur_lp
                };
                if accept {
                    cur = prop;
                    cur_lp = prop_lp;
                    accepted += 1;
                }
            }
            (vec_to_theta(&cur), accepted)
        })
        .collect();

    let mut particles = Vec::with_capacity(ps.len());
    let mut accepted = 0;
    for (theta, acc) in results {
        particles.push(theta);
        accepted += acc;
    }
    let diag = McmcDiagnostics {
        proposed: ps.len() * proposals,
        accepted,
    };
    (
        ParticleSet {
            particles,
            weights: ps.weights.clone(),
        },
        diag,
    )
}

/// MCMC rejuvenation move (call after resampling, weights uniform).
///
/// The proposal covariance is `cfg.scale^2` times the empirical covariance of
/// the free parameters of the input set. With an empty history the input is
/// returned unchanged.
pub fn mcmc_move<R: Rng + ?Sized>(
    ps: &ParticleSet,
    hist: &MeasurementHistory,
    spec: &PriorSpec,
    sp: &SensorParams,
    cfg: &McmcConfig,
    rng: &mut R,
) -> (ParticleSet, McmcDiagnostics) {
    if hist.is_empty() {
        return (ps.clone(), McmcDiagnostics::default());
    }
    let free = spec.free_indices();
    if free.is_empty() {
        return (ps.clone(), McmcDiagnostics::default());
    }
    let cov = free_param_covariance(ps, &free);
    let l = proposal_factor(&cov, cfg.scale);
    let move_seed = rng.random::<u64>();
    mh_sweep(
        ps,
        hist,
        spec,
        sp,
        &free,
        &l,
        cfg.proposals_per_particle,
        move_seed,
    )
}

/// Weighted posterior mean; the wind direction is averaged circularly.
pub fn posterior_mean(ps: &ParticleSet) -> SourceTerm {
    let mut acc = [0.0; N_PARAMS];
    let mut sin_sum = 0.0;
    let mut cos_sum = 0.0;
    for (theta, &w) in ps.particles.iter().zip(&ps.weights) {
        let v = theta_to_vec(theta);
        for (slot, x) in acc.iter_mut().zip(v.iter()) {
            *slot += w * x;
        }
        sin_sum += w * v[P_PHI].sin();
        cos_sum += w * v[P_PHI].cos();
    }
    if sin_sum.hypot(cos_sum) > 1e-12 {
        acc[P_PHI] = wrap_angle(sin_sum.atan2(cos_sum));
    } else {
        // Directions cancel; any representative is as good as another.
        acc[P_PHI] = 0.0;
    }
    vec_to_theta(&acc)
}

/// Trace of the 3x3 position covariance: sum_i w_i ||s_i - s_bar||^2.
pub fn spatial_covariance_trace(ps: &ParticleSet) -> f64 {
    let (mut mx, mut my, mut mz) = (0.0, 0.0, 0.0);
    for (theta, &w) in ps.particles.iter().zip(&ps.weights) {
        mx += w * theta.source_pos.x;
        my += w * theta.source_pos.y;
        mz += w * theta.source_pos.z;
    }
    let mut acc = 0.0;
    for (theta, &w) in ps.particles.iter().zip(&ps.weights) {
        let dx = theta.source_pos.x - mx;
        let dy = theta.source_pos.y - my;
        let dz = theta.source_pos.z - mz;
        acc += w * (dx * dx + dy * dy + dz * dz);
    }
    acc
}

/// Serializable posterior snapshot: one array per parameter plus weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosteriorSnapshot {
    pub source_x: Vec<f64>,
    pub source_y: Vec<f64>,
    pub source_z: Vec<f64>,
    pub release_rate: Vec<f64>,
    pub wind_speed: Vec<f64>,
    pub wind_dir: Vec<f64>,
    pub diffusivity: Vec<f64>,
    pub particle_lifetime: Vec<f64>,
    pub weights: Vec<f64>,
}

impl From<&ParticleSet> for PosteriorSnapshot {
    fn from(ps: &ParticleSet) -> Self {
        let n = ps.len();
        let mut cols: Vec<Vec<f64>> = (0..N_PARAMS).map(|_| Vec::with_capacity(n)).collect();
        for theta in &ps.particles {
            let v = theta_to_vec(theta);
            for (col, x) in cols.iter_mut().zip(v.iter()) {
                col.push(*x);
            }
        }
        let mut it = cols.into_iter();
        Self {
            source_x: it.next().unwrap(),
            source_y: it.next().unwrap(),
            source_z: it.next().unwrap(),
            release_rate: it.next().unwrap(),
            wind_speed: it.next().unwrap(),
            wind_dir: it.next().unwrap(),
            diffusivity: it.next().unwrap(),
            particle_lifetime: it.next().unwrap(),
            weights: ps.weights.clone(),
        }
    }
}

impl PosteriorSnapshot {
    pub fn to_particle_set(&self) -> Result<ParticleSet, ConfigError> {
        let n = self.weights.len();
        let cols = [
            &self.source_x,
            &self.source_y,
            &self.source_z,
            &self.release_rate,
            &self.wind_speed,
            &self.wind_dir,
            &self.diffusivity,
            &self.particle_lifetime,
        ];
        if cols.iter().any(|c| c.len() != n) {
            return Err(ConfigError::new(
                "snapshot",
                "parameter arrays must all match the weight count",
            ));
        }
        let mut particles = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = [0.0; N_PARAMS];
            for (j, col) in cols.iter().enumerate() {
                v[j] = col[i];
            }
            particles.push(vec_to_theta(&v));
        }
        ParticleSet::from_parts(particles, self.weights.clone())
    }
}
