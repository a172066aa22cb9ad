//! Received signal strength model.
//!
//! An agent at distance `d` from the source reads `S·exp(-α d²)` plus zero
//! mean Gaussian noise whose standard deviation is `noise_fraction` times
//! the noiseless reading.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::source::SourceModel;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorConfig {
    pub noise_fraction: f64,
}

impl SensorConfig {
    pub fn new(noise_fraction: f64) -> Result<Self> {
        let cfg = Self { noise_fraction };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_fraction.is_finite() && self.noise_fraction >= 0.0) {
            return Err(Error::invalid(
                "sensor.noise_fraction",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

/// Noiseless signal strength at `agent_pos`.
pub fn signal(source: &SourceModel, agent_pos: Vec2) -> f64 {
    let d2 = (agent_pos - source.position).norm_squared();
    source.power * (-source.alpha * d2).exp()
}

/// One sensor reading. The noise draw is skipped entirely when
/// `noise_fraction` is zero, so noiseless runs do not consume randomness.
/// Readings are not clamped and can be negative under large noise.
pub fn measure<R: Rng + ?Sized>(
    source: &SourceModel,
    agent_pos: Vec2,
    cfg: &SensorConfig,
    rng: &mut R,
) -> f64 {
    let clean = signal(source, agent_pos);
    if cfg.noise_fraction == 0.0 {
        return clean;
    }
    let z: f64 = StandardNormal.sample(rng);
    clean + z * cfg.noise_fraction * clean
}
