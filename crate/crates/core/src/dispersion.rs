//! Isotropic plume dispersion model and domain geometry.
//!
//! The forward map is the closed-form steady-state concentration field of a
//! continuous point release under uniform wind:
//!
//! ```text
//! M(p, theta) = q / (4 pi z1 r) * exp(-r / lambda)
//!             * exp(-(p_x - s_x) u cos(phi) / (2 z1))
//!             * exp(-(p_y - s_y) u sin(phi) / (2 z1))
//! lambda = sqrt( z1 z2 / (1 + u^2 z2 / (4 z1)) )
//! ```
//!
//! with `r = ||p - s||`, release rate `q`, wind speed `u`, wind direction
//! `phi`, diffusivity `z1` and mean particle lifetime `z2`.
//!
//! Orientation: with the sign convention above, the elevated lobe of the
//! plume extends along `-(cos phi, sin phi)`; the concentration ratio between
//! the `+x` and `-x` sides of the source at distance `d` (for `phi = 0`) is
//! exactly `exp(-d u / z1)`. Scenario files that want a plume extending along
//! a bearing `b` must therefore set `wind_dir = b + pi`.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Distance floor (m) guarding the 1/r singularity at the source. Queries
/// closer than this are evaluated at this radius.
pub const R_MIN: f64 = 0.1;

const TAU: f64 = std::f64::consts::TAU;

/// A point in the search domain, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Squared Euclidean distance to `other`.
    pub fn dist2(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn dist(&self, other: &Position) -> f64 {
        self.dist2(other).sqrt()
    }
}

/// Source term: location of the release plus the environment parameters the
/// plume model depends on. In the known-environment mode only the position
/// and release rate are estimated; wind, diffusivity and lifetime are pinned
/// to scenario constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceTerm {
    pub source_pos: Position,
    /// Release rate q, g/s. Strictly positive.
    pub release_rate: f64,
    /// Mean wind speed u, m/s. Non-negative.
    pub wind_speed: f64,
    /// Wind direction phi, radians in [0, 2*pi).
    pub wind_dir: f64,
    /// Diffusivity z1, m^2/s. Strictly positive.
    pub diffusivity: f64,
    /// Mean particle lifetime z2, s. Strictly positive.
    pub particle_lifetime: f64,
}

impl SourceTerm {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.source_pos.is_finite() {
            return Err(ConfigError::new("source_pos", "coordinates must be finite"));
        }
        for (name, v) in [
            ("release_rate", self.release_rate),
            ("diffusivity", self.diffusivity),
            ("particle_lifetime", self.particle_lifetime),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::new(name, "must be strictly positive"));
            }
        }
        if !(self.wind_speed >= 0.0) || !self.wind_speed.is_finite() {
            return Err(ConfigError::new("wind_speed", "must be non-negative"));
        }
        if !(0.0..TAU).contains(&self.wind_dir) {
            return Err(ConfigError::new("wind_dir", "must lie in [0, 2*pi)"));
        }
        Ok(())
    }
}

/// Normalizes an angle into [0, 2*pi).
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can return TAU when `a` is a tiny negative number.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Axis-aligned search domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBounds {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub z_range: [f64; 2],
}

impl DomainBounds {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, r) in [
            ("x_range", self.x_range),
            ("y_range", self.y_range),
            ("z_range", self.z_range),
        ] {
            if !(r[0] < r[1]) || !r[0].is_finite() || !r[1].is_finite() {
                return Err(ConfigError::new(name, "requires finite min < max"));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &Position) -> bool {
        self.x_range[0] <= p.x
            && p.x <= self.x_range[1]
            && self.y_range[0] <= p.y
            && p.y <= self.y_range[1]
            && self.z_range[0] <= p.z
            && p.z <= self.z_range[1]
    }
}

impl Default for DomainBounds {
    /// 50 m square footprint with an 8 m ceiling.
    fn default() -> Self {
        Self {
            x_range: [0.0, 50.0],
            y_range: [0.0, 50.0],
            z_range: [0.0, 8.0],
        }
    }
}

/// Plume length scale lambda (m).
///
/// Strictly decreasing in wind speed with the other parameters fixed.
pub fn plume_lambda(theta: &SourceTerm) -> Result<f64, ConfigError> {
    let l = lambda_value(theta);
    if !l.is_finite() || !(l > 0.0) {
        return Err(ConfigError::new(
            "plume_lambda",
            format!("non-finite length scale from parameters: {l}"),
        ));
    }
    Ok(l)
}

#[inline]
fn lambda_value(theta: &SourceTerm) -> f64 {
    let z1 = theta.diffusivity;
    let z2 = theta.particle_lifetime;
    let u = theta.wind_speed;
    (z1 * z2 / (1.0 + u * u * z2 / (4.0 * z1))).sqrt()
}

/// Expected concentration (g/m^3) at `p` under source hypothesis `theta`.
///
/// The radial distance is clamped to [`R_MIN`] so queries at the source stay
/// finite; the advection exponents use the raw offsets.
#[inline]
pub fn concentration(p: &Position, theta: &SourceTerm) -> f64 {
    let s = &theta.source_pos;
    let dx = p.x - s.x;
    let dy = p.y - s.y;
    let dz = p.z - s.z;
    let r = (dx * dx + dy * dy + dz * dz).sqrt().max(R_MIN);
    let z1 = theta.diffusivity;
    let lambda = lambda_value(theta);
    let half_inv_z1 = theta.wind_speed / (2.0 * z1);
    let arg = -r / lambda - (dx * theta.wind_dir.cos() + dy * theta.wind_dir.sin()) * half_inv_z1;
    theta.release_rate / (4.0 * std::f64::consts::PI * z1 * r) * arg.exp()
}

/// Clamps `p` into `b` coordinate-wise. Idempotent.
pub fn clip_to_bounds(p: &Position, b: &DomainBounds) -> Position {
    Position {
        x: p.x.clamp(b.x_range[0], b.x_range[1]),
        y: p.y.clamp(b.y_range[0], b.y_range[1]),
        z: p.z.clamp(b.z_range[0], b.z_range[1]),
    }
}
