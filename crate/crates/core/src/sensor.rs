//! Probabilistic detection/non-detection gas sensor.
//!
//! A reading either comes from the detection channel (true concentration plus
//! Gaussian noise, taken with probability `detect_prob` when the plume is
//! above the threshold) or from the non-detection channel (folded Gaussian
//! background noise). The same model doubles as the measurement likelihood
//! for the Bayesian filter: detections contribute a Gaussian density scaled
//! by the effective detection probability, non-detections contribute the
//! total probability mass of reading below the threshold.
//!
//! The non-detection channel is realized as a Bernoulli mixture (miss with
//! probability `1 - P_eff`, plus the below-threshold Gaussian mass of the
//! detection channel). A residual detection probability [`EPS_MISS`] is kept
//! for hypotheses predicting sub-threshold concentrations so that model error
//! cannot zero out a particle on a single stray detection.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::dispersion::Position;
use crate::error::ConfigError;

/// Effective detection probability assigned to hypotheses whose predicted
/// concentration is below the threshold.
pub const EPS_MISS: f64 = 0.1;

/// ln(1e-300): floor applied to every log-likelihood so that particle
/// weights stay finite under outliers.
pub const LOG_LIKELIHOOD_FLOOR: f64 = -690.77552789821368;

/// Lower bound on the detection-noise std used inside the likelihood, so a
/// noiseless sensor configuration still yields finite densities.
const SIGMA_MIN: f64 = 1e-12;

const LN_SQRT_TAU: f64 = 0.91893853320467274; // ln(sqrt(2*pi))

/// Detection-channel noise model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectNoise {
    /// Fixed std in g/m^3.
    Constant(f64),
    /// Std grows with the signal: `coeff * c + offset`.
    Proportional { coeff: f64, offset: f64 },
}

impl DetectNoise {
    /// Noise std for a given true/model concentration.
    #[inline]
    pub fn std_at(&self, c: f64) -> f64 {
        match *self {
            DetectNoise::Constant(s) => s,
            DetectNoise::Proportional { coeff, offset } => coeff * c + offset,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            DetectNoise::Constant(s) if s >= 0.0 && s.is_finite() => Ok(()),
            DetectNoise::Proportional { coeff, offset }
                if coeff >= 0.0 && offset >= 0.0 && coeff.is_finite() && offset.is_finite() =>
            {
                Ok(())
            }
            _ => Err(ConfigError::new(
                "sensor.noise_std_detect",
                "noise parameters must be non-negative",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorParams {
    /// Classification threshold z_thr, g/m^3.
    pub threshold: f64,
    /// Probability of the detection channel firing when the plume is above
    /// threshold.
    pub detect_prob: f64,
    /// Detection-channel noise.
    pub noise_std_detect: DetectNoise,
    /// Non-detection (background) noise std, g/m^3.
    pub noise_std_nondetect: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            detect_prob: 0.7,
            noise_std_detect: DetectNoise::Constant(0.05),
            noise_std_nondetect: 0.05,
        }
    }
}

impl SensorParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(ConfigError::new("sensor.threshold", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.detect_prob) {
            return Err(ConfigError::new("sensor.detect_prob", "must lie in [0, 1]"));
        }
        self.noise_std_detect.validate()?;
        if !(self.noise_std_nondetect >= 0.0) || !self.noise_std_nondetect.is_finite() {
            return Err(ConfigError::new(
                "sensor.noise_std_nondetect",
                "must be non-negative",
            ));
        }
        Ok(())
    }

    /// Effective detection probability for a hypothesis predicting `c_model`.
    #[inline]
    pub fn p_eff(&self, c_model: f64) -> f64 {
        if c_model >= self.threshold {
            self.detect_prob
        } else {
            EPS_MISS
        }
    }
}

/// One concentration reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measurement {
    /// Reading z, g/m^3, floored at zero.
    pub value: f64,
    /// Classification: `value >= threshold`.
    pub detected: bool,
    /// Where the reading was taken.
    pub position: Position,
    /// Step index of the reading.
    pub time_index: usize,
}

/// Threshold classification of a raw reading.
#[inline]
pub fn classify_detection(value: f64, sp: &SensorParams) -> bool {
    value >= sp.threshold
}

/// Deterministic core of the sampler: maps a true concentration and two
/// pre-drawn variates (one uniform for the channel coin, one standard
/// normal for the noise) to a reading. Shared by the forward sampler and the
/// planner's common-random-number rollouts.
#[inline]
pub fn sample_with(c_true: f64, sp: &SensorParams, channel_u: f64, noise_z: f64) -> (f64, bool) {
    let raw = if c_true >= sp.threshold && channel_u < sp.detect_prob {
        c_true + noise_z * sp.noise_std_detect.std_at(c_true)
    } else {
        (noise_z * sp.noise_std_nondetect).abs()
    };
    let value = raw.max(0.0);
    (value, classify_detection(value, sp))
}

/// Draws one reading of a true concentration at `position`.
pub fn sample_measurement<R: Rng + ?Sized>(
    c_true: f64,
    position: Position,
    time_index: usize,
    sp: &SensorParams,
    rng: &mut R,
) -> Measurement {
    let channel_u: f64 = rng.random();
    let noise_z: f64 = rng.sample(rand_distr::StandardNormal);
    let (value, detected) = sample_with(c_true, sp, channel_u, noise_z);
    Measurement {
        value,
        detected,
        position,
        time_index,
    }
}

/// Standard normal CDF.
#[inline]
fn phi(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Probability that the sensor classifies a detection, given a hypothesis
/// predicting `c_model`.
pub fn detection_mass(c_model: f64, sp: &SensorParams) -> f64 {
    let sigma = sp.noise_std_detect.std_at(c_model).max(SIGMA_MIN);
    sp.p_eff(c_model) * (1.0 - phi((sp.threshold - c_model) / sigma))
}

/// Probability of a non-detection under a hypothesis predicting `c_model`:
/// channel miss plus the below-threshold mass of the detection channel.
pub fn nondetection_mass(c_model: f64, sp: &SensorParams) -> f64 {
    let p = sp.p_eff(c_model);
    let sigma = sp.noise_std_detect.std_at(c_model).max(SIGMA_MIN);
    (1.0 - p) + p * phi((sp.threshold - c_model) / sigma)
}

/// Log-likelihood of a reading under a hypothesis predicting `c_model`.
///
/// Detections contribute `ln(P_eff * N(value; c_model, sigma^2))`;
/// non-detections contribute the log of [`nondetection_mass`]. The result is
/// floored at [`LOG_LIKELIHOOD_FLOOR`] and is finite for all inputs.
#[inline]
pub fn log_likelihood(m: &Measurement, c_model: f64, sp: &SensorParams) -> f64 {
    let sigma = sp.noise_std_detect.std_at(c_model).max(SIGMA_MIN);
    let ll = if m.detected {
        let z = (m.value - c_model) / sigma;
        sp.p_eff(c_model).ln() - sigma.ln() - LN_SQRT_TAU - 0.5 * z * z
    } else {
        let t = (sp.threshold - c_model) / sigma;
        if t > 8.0 {
            // Phi(t) is 1 to double precision; the mixture mass is 1.
            0.0
        } else {
            let p = sp.p_eff(c_model);
            ((1.0 - p) + p * phi(t)).ln()
        }
    };
    ll.max(LOG_LIKELIHOOD_FLOOR)
}
