//! Action selection over the 8-direction step set.
//!
//! Three strategies share the same candidate enumeration and, where they are
//! stochastic, the same pre-drawn rollout variates (common random numbers, so candidate
//! comparisons are not blurred by sampling noise):
//!
//! - dual-control: expected squared distance to the source under
//!   hypothesized next measurements, which decomposes into an exploitation
//!   distance term plus the predicted position-covariance trace;
//! - MPC: squared distance to the current posterior mean plus the current
//!   covariance trace (action-independent);
//! - entropy baseline: entropy of the predicted measurement distribution,
//!   maximized.
//!
//! Hypothetical posterior updates are reweighting-only: no resampling and no
//! rejuvenation inside the planning loop.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dispersion::{concentration, DomainBounds, Position};
use crate::error::{ConfigError, CoreError};
use crate::estimator::{
    posterior_mean, reweight_into, spatial_covariance_trace, ParticleSet,
};
use crate::sensor::{log_likelihood, sample_with, Measurement, SensorParams};

/// Number of compass headings.
pub const HEADING_COUNT: usize = 8;

// Unit displacement per heading, counterclockwise from +x in 45-degree
// increments. Cardinal entries are exact.
const UNIT: [(f64, f64); HEADING_COUNT] = {
    const D: f64 = std::f64::consts::FRAC_1_SQRT_2;
    [
        (1.0, 0.0),
        (D, D),
        (0.0, 1.0),
        (-D, D),
        (-1.0, 0.0),
        (-D, -D),
        (0.0, -1.0),
        (D, -D),
    ]
};

/// One admissible move: a fixed-length planar step along a compass heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Action {
    pub dx: f64,
    pub dy: f64,
    /// Heading in degrees, one of 0, 45, ..., 315.
    pub heading_deg: u16,
}

impl Action {
    /// The `idx`-th compass action (0 => 0 degrees, counterclockwise).
    pub fn compass(idx: usize, step_size: f64) -> Self {
        let (ux, uy) = UNIT[idx % HEADING_COUNT];
        Self {
            dx: step_size * ux,
            dy: step_size * uy,
            heading_deg: (45 * (idx % HEADING_COUNT)) as u16,
        }
    }

    pub fn heading_index(&self) -> usize {
        (self.heading_deg / 45) as usize
    }

    /// Successor position (planar motion, dz = 0).
    pub fn apply(&self, p: &Position) -> Position {
        Position::new(p.x + self.dx, p.y + self.dy, p.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Dcee,
    Mpc,
    Entrotaxis,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Dcee => "dcee",
            Strategy::Mpc => "mpc",
            Strategy::Entrotaxis => "entrotaxis",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dcee" => Ok(Strategy::Dcee),
            "mpc" => Ok(Strategy::Mpc),
            "entrotaxis" => Ok(Strategy::Entrotaxis),
            _ => Err(ConfigError::new(
                "strategy",
                format!("unknown strategy `{s}` (expected dcee|mpc|entrotaxis)"),
            )),
        }
    }
}

/// How candidate evaluations consume randomness.
///
/// Independent per-candidate streams leave Monte Carlo noise in the
/// candidate comparison; that noise dithers the argmin and is what lets the
/// one-step planner leave regions where the expected-cost landscape is flat
/// (far from any detectable plume every action looks alike). Common random
/// numbers remove that noise, which sharpens comparisons but freezes the
/// deterministic tie-break into limit cycles during blind search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RngPolicy {
    /// Each candidate action draws its own packet stream.
    #[default]
    PerCandidate,
    /// All candidates share one packet stream.
    CommonRandomNumbers,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    /// Step length, meters.
    pub step_size: f64,
    /// Hypothesized measurements per candidate evaluation (M).
    pub predictions_per_step: usize,
    pub strategy: Strategy,
    /// Lookahead depth for the dual-control planner; 1 is the one-step
    /// planner, up to 3 by enumeration.
    pub horizon: usize,
    /// Concentration bins for the entropy baseline (plus one non-detection
    /// bin).
    pub entropy_bins: usize,
    #[serde(default)]
    pub rng_policy: RngPolicy,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            step_size: 2.0,
            predictions_per_step: 40,
            strategy: Strategy::Dcee,
            horizon: 1,
            entropy_bins: 8,
            rng_policy: RngPolicy::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(ConfigError::new("planner.step_size", "must be > 0"));
        }
        if self.predictions_per_step < 1 {
            return Err(ConfigError::new(
                "planner.predictions_per_step",
                "must be at least 1",
            ));
        }
        if !(1..=3).contains(&self.horizon) {
            return Err(ConfigError::new(
                "planner.horizon",
                "must lie in 1..=3 (action sequences are enumerated)",
            ));
        }
        if self.entropy_bins < 1 {
            return Err(ConfigError::new("planner.entropy_bins", "must be at least 1"));
        }
        Ok(())
    }
}

/// Compass actions whose successor stays inside the domain. Never empty for
/// `p` inside the bounds.
pub fn candidate_actions(
    p: &Position,
    b: &DomainBounds,
    cfg: &PlannerConfig,
) -> Result<Vec<Action>, ConfigError> {
    if !b.contains(p) {
        return Err(ConfigError::new(
            "position",
            "candidate actions require a position inside the domain",
        ));
    }
    let actions: Vec<Action> = (0..HEADING_COUNT)
        .map(|i| Action::compass(i, cfg.step_size))
        .filter(|a| b.contains(&a.apply(p)))
        .collect();
    Ok(actions)
}

/// Pre-drawn variates for one hypothesized measurement: a uniform for the
/// particle draw, a uniform for the sensor channel coin, and a standard
/// normal for the reading noise.
#[derive(Debug, Clone, Copy)]
pub struct RolloutPacket {
    pub particle_u: f64,
    pub channel_u: f64,
    pub noise_z: f64,
}

/// Draws `count` rollout packets in a fixed order.
pub fn draw_packets<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<RolloutPacket> {
    (0..count)
        .map(|_| RolloutPacket {
            particle_u: rng.random(),
            channel_u: rng.random(),
            noise_z: rng.sample(rand_distr::StandardNormal),
        })
        .collect()
}

/// Stage-major packet layout for multistage rollouts; stage 0 matches the
/// one-step draw order.
pub fn draw_stage_packets<R: Rng + ?Sized>(
    rng: &mut R,
    stages: usize,
    per_stage: usize,
) -> Vec<Vec<RolloutPacket>> {
    (0..stages).map(|_| draw_packets(rng, per_stage)).collect()
}

/// First index whose cumulative weight exceeds `u` (weights normalized).
fn weighted_index(weights: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cum += w;
        if u < cum {
            return i;
        }
    }
    weights.len() - 1
}

/// Draws hypothesized next measurements at `p_next` from the posterior
/// predictive: particle index by weight, then the sensor model at that
/// particle's concentration.
pub fn hypothesize_measurements<R: Rng + ?Sized>(
    ps: &ParticleSet,
    p_next: &Position,
    sp: &SensorParams,
    m_count: usize,
    rng: &mut R,
) -> Vec<Measurement> {
    let packets = draw_packets(rng, m_count);
    packets
        .iter()
        .map(|pk| {
            let idx = weighted_index(ps.weights(), pk.particle_u);
            let c = concentration(p_next, &ps.particles()[idx]);
            let (value, detected) = sample_with(c, sp, pk.channel_u, pk.noise_z);
            Measurement {
                value,
                detected,
                position: *p_next,
                time_index: 0,
            }
        })
        .collect()
}

/// Weighted position mean and covariance trace in one pass pair.
fn mean_and_trace(particles: &[crate::dispersion::SourceTerm], weights: &[f64]) -> (Position, f64) {
    let (mut mx, mut my, mut mz) = (0.0, 0.0, 0.0);
    for (t, &w) in particles.iter().zip(weights) {
        mx += w * t.source_pos.x;
        my += w * t.source_pos.y;
        mz += w * t.source_pos.z;
    }
    let mut tr = 0.0;
    for (t, &w) in particles.iter().zip(weights) {
        let dx = t.source_pos.x - mx;
        let dy = t.source_pos.y - my;
        let dz = t.source_pos.z - mz;
        tr += w * (dx * dx + dy * dy + dz * dz);
    }
    (Position::new(mx, my, mz), tr)
}

/// Dual-control cost of one action on shared packets: mean over hypothesized
/// measurements of `||p_next - s_bar_j||^2 + trace P_j`, where each
/// hypothetical posterior comes from a reweighting-only update. A degenerate
/// hypothetical update makes the action's cost infinite.
pub fn dcee_cost_with_packets(
    ps: &ParticleSet,
    p: &Position,
    a: &Action,
    sp: &SensorParams,
    packets: &[RolloutPacket],
) -> f64 {
    let p_next = a.apply(p);
    let n = ps.len();
    let conc: Vec<f64> = ps
        .particles()
        .iter()
        .map(|t| concentration(&p_next, t))
        .collect();
    let mut ll = vec![0.0; n];
    let mut wbuf = vec![0.0; n];
    let mut total = 0.0;
    for pk in packets {
        let idx = weighted_index(ps.weights(), pk.particle_u);
        let (value, detected) = sample_with(conc[idx], sp, pk.channel_u, pk.noise_z);
        let m = Measurement {
            value,
            detected,
            position: p_next,
            time_index: 0,
        };
        for i in 0..n {
            ll[i] = log_likelihood(&m, conc[i], sp);
        }
        if reweight_into(ps.weights(), &ll, &mut wbuf).is_err() {
            return f64::INFINITY;
        }
        let (mean, tr) = mean_and_trace(ps.particles(), &wbuf);
        total += p_next.dist2(&mean) + tr;
    }
    total / packets.len() as f64
}

/// Dual-control cost with fresh draws from `rng`.
pub fn dcee_cost<R: Rng + ?Sized>(
    ps: &ParticleSet,
    p: &Position,
    a: &Action,
    sp: &SensorParams,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> f64 {
    let packets = draw_packets(rng, cfg.predictions_per_step);
    dcee_cost_with_packets(ps, p, a, sp, &packets)
}

/// Myopic stochastic-MPC cost: squared distance to the current posterior
/// mean plus the current covariance trace. The trace does not depend on the
/// action, so the argmin is the action pointing most directly at the mean.
pub fn mpc_cost(ps: &ParticleSet, p: &Position, a: &Action) -> f64 {
    let mean = posterior_mean(ps).source_pos;
    let tr = spatial_covariance_trace(ps);
    a.apply(p).dist2(&mean) + tr
}

/// Entropy (nats) of the predicted measurement distribution at `p + a`,
/// estimated from hypothesized measurements binned into one non-detection
/// bin plus equal-width concentration bins over the observed range.
pub fn entrotaxis_reward_with_packets(
    ps: &ParticleSet,
    p: &Position,
    a: &Action,
    sp: &SensorParams,
    cfg: &PlannerConfig,
    packets: &[RolloutPacket],
) -> f64 {
    let p_next = a.apply(p);
    let mut nondetect = 0usize;
    let mut values = Vec::with_capacity(packets.len());
    for pk in packets {
        let idx = weighted_index(ps.weights(), pk.particle_u);
        let c = concentration(&p_next, &ps.particles()[idx]);
        let (value, detected) = sample_with(c, sp, pk.channel_u, pk.noise_z);
        if detected {
            values.push(value);
        } else {
            nondetect += 1;
        }
    }
    let total = packets.len() as f64;
    let mut counts = vec![0usize; cfg.entropy_bins];
    if !values.is_empty() {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = hi - lo;
        for v in &values {
            let bin = if width > 0.0 {
                (((v - lo) / width) * cfg.entropy_bins as f64) as usize
            } else {
                0
            };
            counts[bin.min(cfg.entropy_bins - 1)] += 1;
        }
    }
    let mut entropy = 0.0;
    for &c in counts.iter().chain(std::iter::once(&nondetect)) {
        if c > 0 {
            let prob = c as f64 / total;
            entropy -= prob * prob.ln();
        }
    }
    entropy
}

/// Entropy reward with fresh draws from `rng`.
pub fn entrotaxis_reward<R: Rng + ?Sized>(
    ps: &ParticleSet,
    p: &Position,
    a: &Action,
    sp: &SensorParams,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> f64 {
    let packets = draw_packets(rng, cfg.predictions_per_step);
    entrotaxis_reward_with_packets(ps, p, a, sp, cfg, &packets)
}

/// Multistage dual-control cost on shared stage-major packets: measurements
/// are hypothesized sequentially along the action sequence, the copied
/// posterior is reweighted after each, and the terminal posterior scores the
/// final position.
pub fn dcee_cost_multistage_with_packets(
    ps: &ParticleSet,
    p: &Position,
    action_sequence: &[Action],
    sp: &SensorParams,
    stage_packets: &[Vec<RolloutPacket>],
) -> Result<f64, ConfigError> {
    let stages = action_sequence.len();
    if stages == 0 || stages > 3 {
        return Err(ConfigError::new(
            "planner.horizon",
            "action sequences must have length 1..=3",
        ));
    }
    if stage_packets.len() != stages {
        return Err(ConfigError::new(
            "planner.packets",
            "one packet vector per stage is required",
        ));
    }
    let rollouts = stage_packets[0].len();
    let n = ps.len();

    // Positions along the sequence are shared by every rollout.
    let mut positions = Vec::with_capacity(stages);
    let mut pos = *p;
    for a in action_sequence {
        pos = a.apply(&pos);
        positions.push(pos);
    }
    let conc_stage: Vec<Vec<f64>> = positions
        .iter()
        .map(|q| ps.particles().iter().map(|t| concentration(q, t)).collect())
        .collect();

    let mut ll = vec![0.0; n];
    let mut total = 0.0;
    for j in 0..rollouts {
        let mut w = ps.weights().to_vec();
        let mut wbuf = vec![0.0; n];
        let mut degenerate = false;
        for s in 0..stages {
            let pk = stage_packets[s][j];
            let idx = weighted_index(&w, pk.particle_u);
            let (value, detected) =
                sample_with(conc_stage[s][idx], sp, pk.channel_u, pk.noise_z);
            let m = Measurement {
                value,
                detected,
                position: positions[s],
                time_index: 0,
            };
            for i in 0..n {
                ll[i] = log_likelihood(&m, conc_stage[s][i], sp);
            }
            if reweight_into(&w, &ll, &mut wbuf).is_err() {
                degenerate = true;
                break;
            }
            std::mem::swap(&mut w, &mut wbuf);
        }
        if degenerate {
            return Ok(f64::INFINITY);
        }
        let (mean, tr) = mean_and_trace(ps.particles(), &w);
        total += positions[stages - 1].dist2(&mean) + tr;
    }
    Ok(total / rollouts as f64)
}

/// Multistage dual-control cost with fresh draws from `rng`.
pub fn dcee_cost_multistage<R: Rng + ?Sized>(
    ps: &ParticleSet,
    p: &Position,
    action_sequence: &[Action],
    sp: &SensorParams,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<f64, ConfigError> {
    let packets =
        draw_stage_packets(rng, action_sequence.len(), cfg.predictions_per_step);
    dcee_cost_multistage_with_packets(ps, p, action_sequence, sp, &packets)
}

/// One scored candidate, for trace output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredAction {
    pub action: Action,
    pub score: f64,
}

/// Result of one planning step.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub action: Action,
    /// Score of every candidate in heading order (cost for dcee/mpc,
    /// entropy for entrotaxis).
    pub scores: Vec<ScoredAction>,
    /// True when every dual-control candidate degenerated and the myopic
    /// rule was used instead.
    pub degraded_to_mpc: bool,
}

/// Picks the best index under strict improvement, so ties break toward the
/// lowest heading index. Returns None when no score is finite.
fn best_index(scores: &[f64], minimize: bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if !s.is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, b)) => {
                if minimize {
                    s < b
                } else {
                    s > b
                }
            }
        };
        if better {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// Evaluates all candidate actions under the configured strategy and returns
/// the argmin (dcee, mpc) or argmax (entrotaxis). All candidates share the
/// same packets, and the result is a pure function of (inputs, rng state).
pub fn select_action<R: Rng + ?Sized>(
    ps: &ParticleSet,
    p: &Position,
    b: &DomainBounds,
    sp: &SensorParams,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<Selection, CoreError> {
    cfg.validate()?;
    let candidates = candidate_actions(p, b, cfg)?;
    if candidates.is_empty() {
        return Err(CoreError::Planner(
            "no admissible action from the current position".into(),
        ));
    }

    let mpc_scores = |cands: &[Action]| -> Vec<f64> {
        let mean = posterior_mean(ps).source_pos;
        let tr = spatial_covariance_trace(ps);
        cands.iter().map(|a| a.apply(p).dist2(&mean) + tr).collect()
    };

    // One packet set per candidate, shared or independent per the stream
    // policy; keyed by heading index so boundary filtering does not shift
    // the streams of the remaining candidates.
    let packets_for = |rng: &mut R, cands: &[Action]| -> Vec<Vec<RolloutPacket>> {
        match cfg.rng_policy {
            RngPolicy::CommonRandomNumbers => {
                let shared = draw_packets(rng, cfg.predictions_per_step);
                vec![shared; cands.len()]
            }
            RngPolicy::PerCandidate => {
                let plan_seed: u64 = rng.random();
                cands
                    .iter()
                    .map(|a| {
                        let mut r = ChaCha8Rng::seed_from_u64(crate::seeds::mix(&[
                            plan_seed,
                            a.heading_index() as u64,
                        ]));
                        draw_packets(&mut r, cfg.predictions_per_step)
                    })
                    .collect()
            }
        }
    };

    let (scores, minimize, mut degraded) = match cfg.strategy {
        Strategy::Mpc => (mpc_scores(&candidates), true, false),
        Strategy::Entrotaxis => {
            let packets = packets_for(rng, &candidates);
            let scores = candidates
                .iter()
                .zip(&packets)
                .map(|(a, pk)| entrotaxis_reward_with_packets(ps, p, a, sp, cfg, pk))
                .collect();
            (scores, false, false)
        }
        Strategy::Dcee if cfg.horizon == 1 => {
            let packets = packets_for(rng, &candidates);
            use rayon::prelude::*;
            let scores: Vec<f64> = candidates
                .par_iter()
                .zip(&packets)
                .map(|(a, pk)| dcee_cost_with_packets(ps, p, a, sp, pk))
                .collect();
            (scores, true, false)
        }
        Strategy::Dcee => {
            let sequences = enumerate_sequences(p, b, cfg, cfg.horizon)?;
            let stage_packets: Vec<Vec<Vec<RolloutPacket>>> = match cfg.rng_policy {
                RngPolicy::CommonRandomNumbers => {
                    let shared =
                        draw_stage_packets(rng, cfg.horizon, cfg.predictions_per_step);
                    vec![shared; sequences.len()]
                }
                RngPolicy::PerCandidate => {
                    let plan_seed: u64 = rng.random();
                    (0..sequences.len())
                        .map(|i| {
                            let mut r = ChaCha8Rng::seed_from_u64(crate::seeds::mix(&[
                                plan_seed, i as u64,
                            ]));
                            draw_stage_packets(&mut r, cfg.horizon, cfg.predictions_per_step)
                        })
                        .collect()
                }
            };
            use rayon::prelude::*;
            let seq_costs: Vec<f64> = sequences
                .par_iter()
                .zip(&stage_packets)
                .map(|(seq, pk)| {
                    dcee_cost_multistage_with_packets(ps, p, seq, sp, pk)
                        .unwrap_or(f64::INFINITY)
                })
                .collect();
            // Score of a candidate is the best sequence starting with it.
            let scores: Vec<f64> = candidates
                .iter()
                .map(|a| {
                    sequences
                        .iter()
                        .zip(&seq_costs)
                        .filter(|(seq, _)| seq[0] == *a)
                        .map(|(_, c)| *c)
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            (scores, true, false)
        }
    };

    let (scores, best) = match best_index(&scores, minimize) {
        Some(i) => (scores, i),
        None => {
            // Every dual-control candidate degenerated: fall back to the
            // myopic rule for this step.
            log::warn!("all candidate costs infinite; falling back to the myopic rule");
            degraded = true;
            let fallback = mpc_scores(&candidates);
            let i = best_index(&fallback, true).expect("mpc scores are finite");
            (fallback, i)
        }
    };

    Ok(Selection {
        action: candidates[best],
        scores: candidates
            .iter()
            .zip(&scores)
            .map(|(a, &s)| ScoredAction {
                action: *a,
                score: s,
            })
            .collect(),
        degraded_to_mpc: degraded,
    })
}

/// All bounds-respecting action sequences of the given depth.
fn enumerate_sequences(
    p: &Position,
    b: &DomainBounds,
    cfg: &PlannerConfig,
    depth: usize,
) -> Result<Vec<Vec<Action>>, ConfigError> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(depth);
    fn recurse(
        p: &Position,
        b: &DomainBounds,
        cfg: &PlannerConfig,
        depth: usize,
        prefix: &mut Vec<Action>,
        out: &mut Vec<Vec<Action>>,
    ) -> Result<(), ConfigError> {
        for a in candidate_actions(p, b, cfg)? {
            prefix.push(a);
            if depth == 1 {
                out.push(prefix.clone());
            } else {
                recurse(&a.apply(p), b, cfg, depth - 1, prefix, out)?;
            }
            prefix.pop();
        }
        Ok(())
    }
    recurse(p, b, cfg, depth, &mut prefix, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::SourceTerm;
    use crate::sensor::DetectNoise;
    use approx::assert_relative_eq;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn theta_at(x: f64, y: f64) -> SourceTerm {
        SourceTerm {
            source_pos: Position::new(x, y, 1.0),
            release_rate: 5.0,
            wind_speed: 4.0,
            wind_dir: 0.0,
            diffusivity: 1.0,
            particle_lifetime: 8.0,
        }
    }

    fn noiseless_sensor() -> SensorParams {
        SensorParams {
            threshold: 1e-6,
            detect_prob: 1.0,
            noise_std_detect: DetectNoise::Constant(0.0),
            noise_std_nondetect: 0.0,
        }
    }

    fn cfg(strategy: Strategy) -> PlannerConfig {
        PlannerConfig {
            strategy,
            ..PlannerConfig::default()
        }
    }

    #[test]
    fn action_geometry() {
        let a = Action::compass(0, 2.0);
        assert_eq!((a.dx, a.dy), (2.0, 0.0));
        assert_eq!(a.heading_deg, 0);
        for i in 0..HEADING_COUNT {
            let a = Action::compass(i, 2.0);
            assert_relative_eq!(a.dx.hypot(a.dy), 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn candidate_counts_center_corner_edge() {
        let b = DomainBounds::default();
        let c = cfg(Strategy::Mpc);
        let center = candidate_actions(&Position::new(25.0, 25.0, 4.0), &b, &c).unwrap();
        assert_eq!(center.len(), 8);
        let corner = candidate_actions(&Position::new(0.0, 0.0, 4.0), &b, &c).unwrap();
        assert_eq!(corner.len(), 3);
        let edge = candidate_actions(&Position::new(0.0, 25.0, 4.0), &b, &c).unwrap();
        assert_eq!(edge.len(), 5);
    }

    #[test]
    fn candidates_outside_domain_is_an_error() {
        let b = DomainBounds::default();
        let c = cfg(Strategy::Mpc);
        assert!(candidate_actions(&Position::new(-1.0, 0.0, 4.0), &b, &c).is_err());
    }

    #[test]
    fn hypothesize_collapsed_noiseless_is_deterministic() {
        let truth = theta_at(10.0, 10.0);
        let ps = ParticleSet::uniform(vec![truth; 5]);
        let sp = noiseless_sensor();
        let p_next = Position::new(9.0, 10.0, 1.0);
        let c = concentration(&p_next, &truth);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ms = hypothesize_measurements(&ps, &p_next, &sp, 20, &mut rng);
        assert!(ms.iter().all(|m| m.value == c && m.detected));
    }

    #[test]
    fn hypothesize_far_particles_are_all_nondetections() {
        let ps = ParticleSet::uniform(vec![theta_at(45.0, 45.0); 4]);
        let sp = SensorParams {
            threshold: 5e-4,
            detect_prob: 0.7,
            noise_std_detect: DetectNoise::Constant(0.05),
            noise_std_nondetect: 1e-4,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ms = hypothesize_measurements(
            &ps,
            &Position::new(2.0, 2.0, 4.0),
            &sp,
            100,
            &mut rng,
        );
        assert!(ms.iter().all(|m| !m.detected));
    }

    #[test]
    fn hypothesize_mixture_detection_fraction() {
        // Two hypotheses: one detectable at the query (prob detect_prob),
        // one far away (never detects); mixture weights 0.3/0.7.
        let near = theta_at(10.0, 10.0);
        let far = theta_at(45.0, 45.0);
        let p_next = Position::new(9.5, 10.0, 1.0);
        let sp = SensorParams {
            threshold: 1e-3,
            detect_prob: 0.7,
            noise_std_detect: DetectNoise::Constant(0.0),
            noise_std_nondetect: 0.0,
        };
        assert!(concentration(&p_next, &near) >= sp.threshold);
        assert!(concentration(&p_next, &far) < sp.threshold);
        let ps = ParticleSet::from_parts(vec![near, far], vec![0.3, 0.7]).unwrap();
        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ms = hypothesize_measurements(&ps, &p_next, &sp, n, &mut rng);
        let rate = ms.iter().filter(|m| m.detected).count() as f64 / n as f64;
        let p = 0.3 * 0.7;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((rate - p).abs() < 3.0 * sigma, "rate {rate} vs {p}");
    }

    #[test]
    fn collapsed_posterior_dcee_cost_is_squared_distance() {
        let truth = theta_at(20.0, 20.0);
        let ps = ParticleSet::uniform(vec![truth; 8]);
        let sp = noiseless_sensor();
        let p = Position::new(10.0, 20.0, 1.0);
        let c = cfg(Strategy::Dcee);
        let mut best = (f64::INFINITY, 0u16);
        for i in 0..HEADING_COUNT {
            let a = Action::compass(i, c.step_size);
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let cost = dcee_cost(&ps, &p, &a, &sp, &c, &mut rng);
            let expected = a.apply(&p).dist2(&truth.source_pos);
            assert_relative_eq!(cost, expected, max_relative = 1e-9);
            if cost < best.0 {
                best = (cost, a.heading_deg);
            }
        }
        // The argmin points straight at the source (+x).
        assert_eq!(best.1, 0);
    }

    #[test]
    fn theorem_decomposition_identity_on_random_sets() {
        // E||p - s||^2 == ||p - s_bar||^2 + trace P, exactly, on empirical
        // distributions.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        use rand::Rng;
        for _ in 0..200 {
            let n = rng.random_range(2..100usize);
            let particles: Vec<SourceTerm> = (0..n)
                .map(|_| {
                    theta_at(rng.random_range(0.0..50.0), rng.random_range(0.0..50.0))
                })
                .collect();
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-12).collect();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let p = Position::new(
                rng.random_range(0.0..50.0),
                rng.random_range(0.0..50.0),
                4.0,
            );
            let direct: f64 = particles
                .iter()
                .zip(&weights)
                .map(|(t, &w)| w * p.dist2(&t.source_pos))
                .sum();
            let (mean, tr) = mean_and_trace(&particles, &weights);
            let decomposed = p.dist2(&mean) + tr;
            assert_relative_eq!(direct, decomposed, max_relative = 1e-9);
        }
    }

    #[test]
    fn dcee_cost_matches_brute_force_nested_expectation() {
        // 10 particles, M = 4, fixed seed. The oracle expands the nested
        // expectation directly: for each packet it draws the particle by
        // cumulative scan, samples the sensor, reweights by likelihood, and
        // averages ||p_next - s||^2 over that hypothetical posterior without
        // the mean/trace decomposition.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        use rand::Rng;
        let particles: Vec<SourceTerm> = (0..10)
            .map(|_| theta_at(rng.random_range(5.0..15.0), rng.random_range(5.0..15.0)))
            .collect();
        let raw: Vec<f64> = (0..10).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let ps = ParticleSet::from_parts(particles.clone(), weights.clone()).unwrap();
        let sp = SensorParams {
            threshold: 5e-4,
            detect_prob: 0.7,
            noise_std_detect: DetectNoise::Proportional {
                coeff: 0.1,
                offset: 2e-5,
            },
            noise_std_nondetect: 1e-4,
        };
        let p = Position::new(9.0, 9.0, 4.0);
        let a = Action::compass(1, 2.0);
        let mut packet_rng = ChaCha8Rng::seed_from_u64(7);
        let packets = draw_packets(&mut packet_rng, 4);

        let cost = dcee_cost_with_packets(&ps, &p, &a, &sp, &packets);

        // Independent expansion.
        let p_next = a.apply(&p);
        let mut acc = 0.0;
        for pk in &packets {
            let mut idx = weights.len() - 1;
            let mut cum = 0.0;
            for (i, &w) in weights.iter().enumerate() {
                cum += w;
                if pk.particle_u < cum {
                    idx = i;
                    break;
                }
            }
            let c_drawn = concentration(&p_next, &particles[idx]);
            let (value, detected) = sample_with(c_drawn, &sp, pk.channel_u, pk.noise_z);
            let m = Measurement {
                value,
                detected,
                position: p_next,
                time_index: 0,
            };
            let mut post: Vec<f64> = particles
                .iter()
                .zip(&weights)
                .map(|(t, &w)| {
                    w * log_likelihood(&m, concentration(&p_next, t), &sp).exp()
                })
                .collect();
            let z: f64 = post.iter().sum();
            post.iter_mut().for_each(|w| *w /= z);
            acc += particles
                .iter()
                .zip(&post)
                .map(|(t, &w)| w * p_next.dist2(&t.source_pos))
                .sum::<f64>();
        }
        let oracle = acc / packets.len() as f64;
        assert_relative_eq!(cost, oracle, max_relative = 1e-12);
    }

    #[test]
    fn dcee_cost_never_below_exploitation_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        use rand::Rng;
        let particles: Vec<SourceTerm> = (0..20)
            .map(|_| theta_at(rng.random_range(0.0..50.0), rng.random_range(0.0..50.0)))
            .collect();
        let ps = ParticleSet::uniform(particles);
        let sp = SensorParams {
            threshold: 5e-4,
            ..SensorParams::default()
        };
        let p = Position::new(25.0, 25.0, 4.0);
        let a = Action::compass(2, 2.0);
        let packets = draw_packets(&mut rng, 16);
        let p_next = a.apply(&p);

        // Reproduce the hypothetical posteriors and check the floor per
        // rollout via the library reweight path.
        let conc: Vec<f64> = ps
            .particles()
            .iter()
            .map(|t| concentration(&p_next, t))
            .collect();
        let cost = dcee_cost_with_packets(&ps, &p, &a, &sp, &packets);
        let mut floor_acc = 0.0;
        let n = ps.len();
        let mut ll = vec![0.0; n];
        let mut wbuf = vec![0.0; n];
        for pk in &packets {
            let idx = weighted_index(ps.weights(), pk.particle_u);
            let (value, detected) = sample_with(conc[idx], &sp, pk.channel_u, pk.noise_z);
            let m = Measurement {
                value,
                detected,
                position: p_next,
                time_index: 0,
            };
            for i in 0..n {
                ll[i] = log_likelihood(&m, conc[i], &sp);
            }
            reweight_into(ps.weights(), &ll, &mut wbuf).ok().unwrap();
            let (mean, _) = mean_and_trace(ps.particles(), &wbuf);
            floor_acc += p_next.dist2(&mean);
        }
        assert!(cost >= floor_acc / packets.len() as f64 - 1e-12);
    }

    #[test]
    fn mpc_symmetric_posterior_ties_break_to_lowest_heading() {
        // Posterior mean at the agent position: every action costs
        // step^2 + trace, so the tie must break to heading 0.
        let ps = ParticleSet::uniform(vec![theta_at(25.0, 25.0); 4]);
        let p = Position::new(25.0, 25.0, 1.0);
        let b = DomainBounds::default();
        let sp = SensorParams::default();
        let c = cfg(Strategy::Mpc);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sel = select_action(&ps, &p, &b, &sp, &c, &mut rng).unwrap();
        assert_eq!(sel.action.heading_deg, 0);
        let first = sel.scores[0].score;
        for s in &sel.scores {
            assert_relative_eq!(s.score, first, max_relative = 1e-12);
        }
    }

    #[test]
    fn mpc_hand_geometry() {
        // Mean at (10, 0) from the origin: heading 0 wins.
        let ps = ParticleSet::uniform(vec![theta_at(10.0, 25.0)]);
        let p = Position::new(0.0, 25.0, 1.0);
        let b = DomainBounds::default();
        let c = cfg(Strategy::Mpc);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let sel = select_action(&ps, &p, &b, &SensorParams::default(), &c, &mut rng).unwrap();
        assert_eq!(sel.action.heading_deg, 0);
    }

    #[test]
    fn mpc_argmin_invariant_to_weight_scaling() {
        // Scaling all likelihoods by a constant before normalization leaves
        // the weights, hence the argmin, unchanged: emulate by comparing
        // selections from identical normalized weights built at two scales.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        use rand::Rng;
        let particles: Vec<SourceTerm> = (0..30)
            .map(|_| theta_at(rng.random_range(0.0..50.0), rng.random_range(0.0..50.0)))
            .collect();
        let raw: Vec<f64> = (0..30).map(|_| rng.random::<f64>() + 1e-6).collect();
        let t1: f64 = raw.iter().sum();
        let w1: Vec<f64> = raw.iter().map(|w| w / t1).collect();
        let scaled: Vec<f64> = raw.iter().map(|w| w * 7.25).collect();
        let t2: f64 = scaled.iter().sum();
        let w2: Vec<f64> = scaled.iter().map(|w| w / t2).collect();
        let ps1 = ParticleSet::from_parts(particles.clone(), w1).unwrap();
        let ps2 = ParticleSet::from_parts(particles, w2).unwrap();
        let p = Position::new(25.0, 25.0, 4.0);
        let b = DomainBounds::default();
        let c = cfg(Strategy::Mpc);
        let s1 = select_action(&ps1, &p, &b, &SensorParams::default(), &c, &mut rng).unwrap();
        let s2 = select_action(&ps2, &p, &b, &SensorParams::default(), &c, &mut rng).unwrap();
        assert_eq!(s1.action, s2.action);
    }

    #[test]
    fn entrotaxis_collapsed_noiseless_entropy_is_zero() {
        let truth = theta_at(10.0, 10.0);
        let ps = ParticleSet::uniform(vec![truth; 6]);
        let sp = noiseless_sensor();
        let p = Position::new(9.0, 10.0, 1.0);
        let a = Action::compass(0, 2.0);
        let c = cfg(Strategy::Entrotaxis);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = entrotaxis_reward(&ps, &p, &a, &sp, &c, &mut rng);
        assert_eq!(h, 0.0);
    }

    #[test]
    fn entrotaxis_fifty_fifty_split_is_ln2() {
        // One detectable hypothesis, one far hypothesis, equal weights, and
        // packets engineered to draw each exactly once.
        let near = theta_at(10.0, 10.0);
        let far = theta_at(45.0, 45.0);
        let ps = ParticleSet::uniform(vec![near, far]);
        let sp = SensorParams {
            threshold: 1e-3,
            detect_prob: 1.0,
            noise_std_detect: DetectNoise::Constant(0.0),
            noise_std_nondetect: 0.0,
        };
        let p = Position::new(9.0, 10.0, 1.0);
        let a = Action::compass(0, 0.5);
        let packets = vec![
            RolloutPacket {
                particle_u: 0.25,
                channel_u: 0.0,
                noise_z: 0.0,
            },
            RolloutPacket {
                particle_u: 0.75,
                channel_u: 0.0,
                noise_z: 0.0,
            },
        ];
        let c = cfg(Strategy::Entrotaxis);
        let h = entrotaxis_reward_with_packets(&ps, &p, &a, &sp, &c, &packets);
        assert_relative_eq!(h, std::f64::consts::LN_2, max_relative = 1e-12);
    }

    #[test]
    fn entrotaxis_matches_histogram_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        use rand::Rng;
        let particles: Vec<SourceTerm> = (0..10)
            .map(|_| theta_at(rng.random_range(8.0..12.0), rng.random_range(8.0..12.0)))
            .collect();
        let ps = ParticleSet::uniform(particles.clone());
        let sp = SensorParams {
            threshold: 5e-4,
            detect_prob: 0.7,
            noise_std_detect: DetectNoise::Proportional {
                coeff: 0.1,
                offset: 2e-5,
            },
            noise_std_nondetect: 1e-4,
        };
        let p = Position::new(10.0, 10.0, 1.0);
        let a = Action::compass(3, 2.0);
        let c = cfg(Strategy::Entrotaxis);
        let mut packet_rng = ChaCha8Rng::seed_from_u64(14);
        let packets = draw_packets(&mut packet_rng, 64);
        let h = entrotaxis_reward_with_packets(&ps, &p, &a, &sp, &c, &packets);

        // Independent histogram entropy on the same draws.
        let p_next = a.apply(&p);
        let mut nondetect = 0usize;
        let mut vals = Vec::new();
        for pk in &packets {
            let mut idx = 9;
            let mut cum = 0.0;
            for (i, w) in ps.weights().iter().enumerate() {
                cum += w;
                if pk.particle_u < cum {
                    idx = i;
                    break;
                }
            }
            let cc = concentration(&p_next, &particles[idx]);
            let (value, detected) = sample_with(cc, &sp, pk.channel_u, pk.noise_z);
            if detected {
                vals.push(value);
            } else {
                nondetect += 1;
            }
        }
        let mut probs = Vec::new();
        if nondetect > 0 {
            probs.push(nondetect as f64 / 64.0);
        }
        if !vals.is_empty() {
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut counts = vec![0usize; c.entropy_bins];
            for v in &vals {
                let b = if hi > lo {
                    ((((v - lo) / (hi - lo)) * c.entropy_bins as f64) as usize)
                        .min(c.entropy_bins - 1)
                } else {
                    0
                };
                counts[b] += 1;
            }
            for cnt in counts {
                if cnt > 0 {
                    probs.push(cnt as f64 / 64.0);
                }
            }
        }
        let oracle: f64 = -probs.iter().map(|q| q * q.ln()).sum::<f64>();
        assert_relative_eq!(h, oracle, max_relative = 1e-12);
    }

    #[test]
    fn multistage_horizon_one_equals_single_step_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        use rand::Rng;
        let particles: Vec<SourceTerm> = (0..12)
            .map(|_| theta_at(rng.random_range(5.0..20.0), rng.random_range(5.0..20.0)))
            .collect();
        let ps = ParticleSet::uniform(particles);
        let sp = SensorParams {
            threshold: 5e-4,
            ..SensorParams::default()
        };
        let p = Position::new(10.0, 10.0, 4.0);
        let a = Action::compass(2, 2.0);
        let mut rng1 = ChaCha8Rng::seed_from_u64(99);
        let packets = draw_stage_packets(&mut rng1, 1, 16);
        let multi = dcee_cost_multistage_with_packets(&ps, &p, &[a], &sp, &packets).unwrap();
        let single = dcee_cost_with_packets(&ps, &p, &a, &sp, &packets[0]);
        assert_relative_eq!(multi, single, max_relative = 1e-12);
    }

    #[test]
    fn multistage_collapsed_posterior_is_terminal_distance() {
        let truth = theta_at(20.0, 20.0);
        let ps = ParticleSet::uniform(vec![truth; 4]);
        let sp = noiseless_sensor();
        let p = Position::new(10.0, 10.0, 1.0);
        let seq = [Action::compass(1, 2.0), Action::compass(0, 2.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let c = cfg(Strategy::Dcee);
        let cost = dcee_cost_multistage(&ps, &p, &seq, &sp, &c, &mut rng).unwrap();
        let terminal = seq[1].apply(&seq[0].apply(&p));
        assert_relative_eq!(
            cost,
            terminal.dist2(&truth.source_pos),
            max_relative = 1e-9
        );
    }

    #[test]
    fn multistage_matches_brute_force_two_stage_oracle() {
        // 5 particles, M = 2, horizon 2, fixed draws: sequential conditional
        // expansion reproduced independently.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        use rand::Rng;
        let particles: Vec<SourceTerm> = (0..5)
            .map(|_| theta_at(rng.random_range(8.0..13.0), rng.random_range(8.0..13.0)))
            .collect();
        let weights = vec![0.1, 0.3, 0.2, 0.25, 0.15];
        let ps = ParticleSet::from_parts(particles.clone(), weights.clone()).unwrap();
        let sp = SensorParams {
            threshold: 5e-4,
            detect_prob: 0.7,
            noise_std_detect: DetectNoise::Proportional {
                coeff: 0.1,
                offset: 2e-5,
            },
            noise_std_nondetect: 1e-4,
        };
        let p = Position::new(9.0, 9.0, 4.0);
        let seq = [Action::compass(1, 2.0), Action::compass(2, 2.0)];
        let mut packet_rng = ChaCha8Rng::seed_from_u64(18);
        let packets = draw_stage_packets(&mut packet_rng, 2, 2);

        let cost =
            dcee_cost_multistage_with_packets(&ps, &p, &seq, &sp, &packets).unwrap();

        // Oracle: explicit two-stage rollout per packet column.
        let p1 = seq[0].apply(&p);
        let p2 = seq[1].apply(&p1);
        let mut acc = 0.0;
        for j in 0..2 {
            let mut w = weights.clone();
            for (stage, pos) in [(0usize, p1), (1usize, p2)] {
                let pk = packets[stage][j];
                let mut idx = 4;
                let mut cum = 0.0;
                for (i, &wi) in w.iter().enumerate() {
                    cum += wi;
                    if pk.particle_u < cum {
                        idx = i;
                        break;
                    }
                }
                let c_drawn = concentration(&pos, &particles[idx]);
                let (value, detected) = sample_with(c_drawn, &sp, pk.channel_u, pk.noise_z);
                let m = Measurement {
                    value,
                    detected,
                    position: pos,
                    time_index: 0,
                };
                let mut next: Vec<f64> = particles
                    .iter()
                    .zip(&w)
                    .map(|(t, &wi)| {
                        wi * log_likelihood(&m, concentration(&pos, t), &sp).exp()
                    })
                    .collect();
                let z: f64 = next.iter().sum();
                next.iter_mut().for_each(|x| *x /= z);
                w = next;
            }
            acc += particles
                .iter()
                .zip(&w)
                .map(|(t, &wi)| wi * p2.dist2(&t.source_pos))
                .sum::<f64>();
        }
        assert_relative_eq!(cost, acc / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn multistage_rejects_long_horizons() {
        let ps = ParticleSet::uniform(vec![theta_at(10.0, 10.0); 3]);
        let seq = [Action::compass(0, 2.0); 4];
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let err = dcee_cost_multistage(
            &ps,
            &Position::new(5.0, 5.0, 1.0),
            &seq,
            &SensorParams::default(),
            &cfg(Strategy::Dcee),
            &mut rng,
        );
        assert!(err.is_err());
    }

    #[test]
    fn select_action_single_candidate_is_unconditional() {
        // A 1-meter-wide strip leaves exactly one admissible action.
        let b = DomainBounds {
            x_range: [0.0, 50.0],
            y_range: [0.0, 1.0],
            z_range: [0.0, 8.0],
        };
        let p = Position::new(0.0, 0.0, 0.5);
        let c = PlannerConfig {
            step_size: 2.0,
            strategy: Strategy::Mpc,
            ..PlannerConfig::default()
        };
        let cands = candidate_actions(&p, &b, &c).unwrap();
        assert_eq!(cands.len(), 1);
        let ps = ParticleSet::uniform(vec![theta_at(25.0, 0.5); 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let sel = select_action(&ps, &p, &b, &SensorParams::default(), &c, &mut rng).unwrap();
        assert_eq!(sel.action, cands[0]);
    }

    #[test]
    fn collapsed_posterior_dcee_and_mpc_agree() {
        let truth = theta_at(30.0, 10.0);
        let ps = ParticleSet::uniform(vec![truth; 5]);
        let sp = noiseless_sensor();
        let p = Position::new(20.0, 20.0, 1.0);
        let b = DomainBounds::default();
        let mut rng1 = ChaCha8Rng::seed_from_u64(21);
        let mut rng2 = ChaCha8Rng::seed_from_u64(21);
        let dcee = select_action(&ps, &p, &b, &sp, &cfg(Strategy::Dcee), &mut rng1).unwrap();
        let mpc = select_action(&ps, &p, &b, &sp, &cfg(Strategy::Mpc), &mut rng2).unwrap();
        assert_eq!(dcee.action, mpc.action);
    }

    #[test]
    fn select_action_is_repeatable() {
        let mut init = ChaCha8Rng::seed_from_u64(22);
        use rand::Rng;
        let particles: Vec<SourceTerm> = (0..40)
            .map(|_| {
                theta_at(
                    init.random_range(0.0..50.0),
                    init.random_range(0.0..50.0),
                )
            })
            .collect();
        let ps = ParticleSet::uniform(particles);
        let sp = SensorParams {
            threshold: 5e-4,
            ..SensorParams::default()
        };
        let p = Position::new(25.0, 25.0, 4.0);
        let b = DomainBounds::default();
        for strategy in [Strategy::Dcee, Strategy::Mpc, Strategy::Entrotaxis] {
            let c = cfg(strategy);
            let s1 = select_action(
                &ps,
                &p,
                &b,
                &sp,
                &c,
                &mut ChaCha8Rng::seed_from_u64(23),
            )
            .unwrap();
            let s2 = select_action(
                &ps,
                &p,
                &b,
                &sp,
                &c,
                &mut ChaCha8Rng::seed_from_u64(23),
            )
            .unwrap();
            assert_eq!(s1.action, s2.action);
            assert_eq!(s1.scores, s2.scores);
        }
    }

    #[test]
    fn degenerate_rollouts_fall_back_to_mpc() {
        // A huge background noise std makes every hypothesized measurement a
        // false-alarm detection that no particle can explain: every
        // dual-control candidate costs infinity and the myopic rule decides.
        let particles = vec![theta_at(40.0, 40.0), theta_at(42.0, 44.0)];
        let ps = ParticleSet::uniform(particles);
        let sp = SensorParams {
            threshold: 0.5,
            detect_prob: 0.7,
            noise_std_detect: DetectNoise::Constant(1e-6),
            noise_std_nondetect: 1e4,
        };
        let p = Position::new(2.0, 2.0, 4.0);
        let b = DomainBounds::default();
        let c = cfg(Strategy::Dcee);
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let sel = select_action(&ps, &p, &b, &sp, &c, &mut rng).unwrap();
        assert!(sel.degraded_to_mpc);
        let mut rng2 = ChaCha8Rng::seed_from_u64(25);
        let mpc = select_action(&ps, &p, &b, &sp, &cfg(Strategy::Mpc), &mut rng2).unwrap();
        assert_eq!(sel.action, mpc.action);
    }

    #[test]
    fn config_validation_bounds() {
        let mut c = PlannerConfig::default();
        c.horizon = 4;
        assert!(c.validate().is_err());
        c.horizon = 0;
        assert!(c.validate().is_err());
        c.horizon = 1;
        c.predictions_per_step = 0;
        assert!(c.validate().is_err());
    }
}
