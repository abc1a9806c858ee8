//! Shared fixtures for the criterion benches.

use dcee_core::{
    DetectNoise, DomainBounds, ParamPrior, ParticleSet, Position, PriorSpec, SensorParams,
    SourceTerm,
};
use rand::Rng;

pub fn table1_truth() -> SourceTerm {
    SourceTerm {
        source_pos: Position::new(20.0, 20.0, 1.0),
        release_rate: 5.0,
        wind_speed: 4.0,
        wind_dir: 0.0,
        diffusivity: 1.0,
        particle_lifetime: 8.0,
    }
}

pub fn bench_sensor() -> SensorParams {
    SensorParams {
        threshold: 5e-4,
        detect_prob: 0.7,
        noise_std_detect: DetectNoise::Proportional {
            coeff: 0.1,
            offset: 2e-5,
        },
        noise_std_nondetect: 1e-4,
    }
}

pub fn bench_prior(bounds: &DomainBounds) -> PriorSpec {
    PriorSpec {
        source_x: ParamPrior::Uniform {
            lo: bounds.x_range[0],
            hi: bounds.x_range[1],
        },
        source_y: ParamPrior::Uniform {
            lo: bounds.y_range[0],
            hi: bounds.y_range[1],
        },
        source_z: ParamPrior::Uniform {
            lo: bounds.z_range[0],
            hi: bounds.z_range[1],
        },
        release_rate: ParamPrior::Gamma {
            shape: 2.0,
            scale: 5.0,
        },
        wind_speed: ParamPrior::Fixed(4.0),
        wind_dir: ParamPrior::Fixed(0.0),
        diffusivity: ParamPrior::Fixed(1.0),
        particle_lifetime: ParamPrior::Fixed(8.0),
    }
}

/// A spread-out particle cloud with normalized random weights.
pub fn random_particles<R: Rng>(n: usize, rng: &mut R) -> ParticleSet {
    let particles: Vec<SourceTerm> = (0..n)
        .map(|_| {
            let mut t = table1_truth();
            t.source_pos = Position::new(
                rng.random_range(0.0..50.0),
                rng.random_range(0.0..50.0),
                rng.random_range(0.0..8.0),
            );
            t.release_rate = rng.random_range(0.5..20.0);
            t
        })
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-9).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    ParticleSet::from_parts(particles, weights).expect("valid set")
}
