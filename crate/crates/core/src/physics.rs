//! Reference values from standard physics: singlet-state same-colour
//! probabilities and a CSL-style collapse-time scaling estimate.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParticleKind {
    Photon,
    SpinHalf,
}

impl ParticleKind {
    /// Switch angles in degrees that realise the three-position device.
    pub fn device_angles(self) -> [f64; 3] {
        match self {
            Self::Photon => [0.0, 60.0, 120.0],
            Self::SpinHalf => [0.0, 120.0, 240.0],
        }
    }
}

impl fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Photon => "photon",
            Self::SpinHalf => "spin-half",
        })
    }
}

impl FromStr for ParticleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "photon" => Ok(Self::Photon),
            "spin-half" | "spin1/2" | "spin-1/2" => Ok(Self::SpinHalf),
            other => Err(Error::InvalidArgument(format!("unknown particle kind {other:?}"))),
        }
    }
}

/// Quantum prediction for "same colour on both lamps" with the right wing's
/// colour assignment reversed: `cos²(Δ)` for photons, `cos²(Δ/2)` for
/// spin-1/2, where `Δ` is the angle difference in degrees.
pub fn qm_same_color_probability(kind: ParticleKind, angle_a: f64, angle_b: f64) -> f64 {
    let delta = (angle_a - angle_b).to_radians();
    let half_angle = match kind {
        ParticleKind::Photon => delta,
        ParticleKind::SpinHalf => delta / 2.0,
    };
    half_angle.cos().powi(2)
}

/// Reference collapse time: 1e-8 s for 1e13 displaced nucleons.
pub const REFERENCE_TIME_S: f64 = 1e-8;
pub const REFERENCE_PARTICLES: f64 = 1e13;

/// Experimental timescales a collapse estimate is compared against.
pub const THRESHOLD_FAST_S: f64 = 1e-6;
pub const THRESHOLD_SLOW_S: f64 = 3e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseEstimate {
    pub collapse_time: f64,
    pub n_particles: f64,
    /// Particle mass over nucleon mass.
    pub mass_ratio: f64,
}

/// Collapse time under a rate proportional to particle mass and the square
/// of particle number, anchored at the reference point.
pub fn csl_collapse_time(n_particles: f64, mass_ratio: f64) -> Result<CollapseEstimate> {
    if !(n_particles.is_finite() && n_particles >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "particle count must be a finite number >= 1, got {n_particles}"
        )));
    }
    if !(mass_ratio.is_finite() && mass_ratio > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mass ratio must be finite and positive, got {mass_ratio}"
        )));
    }
    let scale = REFERENCE_PARTICLES / n_particles;
    Ok(CollapseEstimate {
        collapse_time: REFERENCE_TIME_S * scale * scale / mass_ratio,
        n_particles,
        mass_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdFlags {
    /// Slower than 1 µs.
    pub exceeds_fast: bool,
    /// Slower than 30 µs.
    pub exceeds_slow: bool,
}

pub fn compare_to_thresholds(estimate: &CollapseEstimate) -> ThresholdFlags {
    ThresholdFlags {
        exceeds_fast: estimate.collapse_time > THRESHOLD_FAST_S,
        exceeds_slow: estimate.collapse_time > THRESHOLD_SLOW_S,
    }
}
