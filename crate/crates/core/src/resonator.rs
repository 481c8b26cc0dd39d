//! Single metamaterial resonator unit: geometry, quarter-wave resonance,
//! lumped series-RLC acoustic impedance, and side-branch transmission.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::FrequencyResponse;

/// Neck length of a unit, m. The structures are printed with a fixed throat
/// depth; the impedance rescaling below absorbs the exact value, so it is a
/// module constant rather than a per-unit field.
pub const NECK_LENGTH: f64 = 1.0e-3;

/// Flanged-neck end-correction factor applied to the neck length as
/// `l_eff = l_neck + END_CORRECTION * r`.
pub const END_CORRECTION: f64 = 1.7;

/// Properties of the surrounding air.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirMedium {
    /// Speed of sound, m/s.
    pub sound_speed: f64,
    /// Density, kg/m^3.
    pub density: f64,
}

impl Default for AirMedium {
    fn default() -> Self {
        Self {
            sound_speed: 343.0,
            density: 1.21,
        }
    }
}

impl AirMedium {
    pub fn validate(&self) -> Result<()> {
        if !(self.sound_speed > 0.0) || !(self.density > 0.0) {
            return Err(Error::arg("air medium parameters must be positive"));
        }
        Ok(())
    }
}

/// One cylindrical-cavity-plus-circular-neck resonator unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorUnit {
    /// Cavity depth, m.
    pub h: f64,
    /// Neck radius, m.
    pub r: f64,
    /// Cavity cross-section radius, m. Must be >= `r`.
    pub cavity_radius: f64,
    /// Quality factor of the series resonance.
    pub q_factor: f64,
}

/// Default cavity cross-section radius, m. Chosen so the three-unit array
/// built from the default heights has a cavity-volume sum near 0.8 cm^3.
pub const DEFAULT_CAVITY_RADIUS: f64 = 5.0e-3;

/// Default neck radius, m.
pub const DEFAULT_NECK_RADIUS: f64 = 1.5e-3;

impl ResonatorUnit {
    pub fn new(h: f64, r: f64, cavity_radius: f64, q_factor: f64) -> Result<Self> {
        let unit = Self {
            h,
            r,
            cavity_radius,
            q_factor,
        };
        unit.validate()?;
        Ok(unit)
    }

    /// Unit with the default neck and cavity cross-section.
    pub fn with_height(h: f64, q_factor: f64) -> Result<Self> {
        Self::new(h, DEFAULT_NECK_RADIUS, DEFAULT_CAVITY_RADIUS, q_factor)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(Error::arg(format!("cavity depth must be positive, got {}", self.h)));
        }
        if !(self.r > 0.0) {
            return Err(Error::arg(format!("neck radius must be positive, got {}", self.r)));
        }
        if self.cavity_radius < self.r {
            return Err(Error::arg(format!(
                "cavity radius {} smaller than neck radius {}",
                self.cavity_radius, self.r
            )));
        }
        if !(self.q_factor > 0.0) {
            return Err(Error::arg(format!("q_factor must be positive, got {}", self.q_factor)));
        }
        Ok(())
    }

    /// Cavity air volume, m^3.
    pub fn cavity_volume(&self) -> f64 {
        PI * self.cavity_radius * self.cavity_radius * self.h
    }

    /// Neck air volume, m^3.
    pub fn neck_volume(&self) -> f64 {
        PI * self.r * self.r * NECK_LENGTH
    }
}

/// Quarter-wave design law: `f0 = v / (4 (h + r))`.
pub fn resonance_frequency(unit: &ResonatorUnit, air: &AirMedium) -> f64 {
    air.sound_speed / (4.0 * (unit.h + unit.r))
}

/// Invert the design law for a cavity depth: `h = v/(4 f) - r`.
///
/// Fails if the requested frequency is too high to realize with the given
/// neck radius (the depth would be non-positive).
pub fn design_unit_for(
    f_target: f64,
    r: f64,
    cavity_radius: f64,
    q_factor: f64,
    air: &AirMedium,
) -> Result<ResonatorUnit> {
    if !(f_target > 0.0) {
        return Err(Error::arg(format!("target frequency must be positive, got {f_target}")));
    }
    let h = air.sound_speed / (4.0 * f_target) - r;
    if h <= 0.0 {
        return Err(Error::InfeasibleDesign(format!(
            "f = {f_target} Hz needs cavity depth {h:.3e} m with neck radius {r:.3e} m"
        )));
    }
    ResonatorUnit::new(h, r, cavity_radius, q_factor)
}

/// Lumped elements of a unit after rescaling: series resistance, acoustic
/// mass and compliance whose zero-reactance frequency equals the design law
/// exactly.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LumpedElements {
    pub resistance: f64,
    pub mass: f64,
    pub compliance: f64,
    /// Characteristic impedance sqrt(M/C) — invariant under the rescale.
    pub char_impedance: f64,
    pub f0: f64,
}

pub(crate) fn lumped_elements(unit: &ResonatorUnit, air: &AirMedium) -> LumpedElements {
    let l_eff = NECK_LENGTH + END_CORRECTION * unit.r;
    let mass_raw = air.density * l_eff / (PI * unit.r * unit.r);
    let compliance_raw = unit.cavity_volume() / (air.density * air.sound_speed * air.sound_speed);
    let f_raw = 1.0 / (2.0 * PI * (mass_raw * compliance_raw).sqrt());
    let f0 = resonance_frequency(unit, air);
    // Scale M and C by the same factor: moves the resonance onto the design
    // law while keeping sqrt(M/C) fixed.
    let s = f_raw / f0;
    let mass = mass_raw * s;
    let compliance = compliance_raw * s;
    let resistance = 2.0 * PI * f0 * mass / unit.q_factor;
    LumpedElements {
        resistance,
        mass,
        compliance,
        char_impedance: (mass_raw / compliance_raw).sqrt(),
        f0,
    }
}

/// Series-resonant acoustic impedance `Z(f) = R + j(2 pi f M - 1/(2 pi f C))`.
///
/// Geometry-derived mass and compliance, uniformly rescaled so the reactance
/// zero-crossing sits exactly at [`resonance_frequency`].
pub fn unit_impedance(unit: &ResonatorUnit, air: &AirMedium, f: f64) -> Result<Complex64> {
    if !(f > 0.0) {
        return Err(Error::arg(format!("frequency must be positive, got {f}")));
    }
    let el = lumped_elements(unit, air);
    Ok(impedance_from_elements(&el, f))
}

#[inline]
pub(crate) fn impedance_from_elements(el: &LumpedElements, f: f64) -> Complex64 {
    let w = 2.0 * PI * f;
    Complex64::new(el.resistance, w * el.mass - 1.0 / (w * el.compliance))
}

/// Side-branch transmission magnitude for one (possibly modified) set of
/// lumped elements: `T(f) = |Z| / |Z + z_ref|`, clamped to [0, 1].
#[inline]
pub(crate) fn side_branch_transmission(el: &LumpedElements, z_ref: f64, f: f64) -> f64 {
    let z = impedance_from_elements(el, f);
    let t = z.norm() / (z + z_ref).norm();
    t.clamp(0.0, 1.0)
}

/// Transmission coefficient of a single unit mounted as a side branch,
/// sampled on `grid`. Real-valued, in [0, 1], minimal at the unit resonance.
pub fn single_unit_transmission(
    unit: &ResonatorUnit,
    air: &AirMedium,
    z_ref: f64,
    grid: &[f64],
) -> Result<FrequencyResponse> {
    if !(z_ref > 0.0) {
        return Err(Error::arg("reference impedance must be positive"));
    }
    let el = lumped_elements(unit, air);
    let gains = crate::exec::map_collect(grid, |&f| {
        if f <= 0.0 {
            1.0
        } else {
            side_branch_transmission(&el, z_ref, f)
        }
    });
    FrequencyResponse::from_real(grid.to_vec(), gains)
}

/// Width of the band where a single unit's transmission stays at or below
/// `threshold`, in Hz. Closed form from the series-resonance algebra; used by
/// the coupling calibration.
pub(crate) fn notch_width(unit: &ResonatorUnit, air: &AirMedium, z_ref: f64, threshold: f64) -> f64 {
    let el = lumped_elements(unit, air);
    let r = el.resistance;
    let t2 = threshold * threshold;
    let num = t2 * (r + z_ref) * (r + z_ref) - r * r;
    if num <= 0.0 {
        return 0.0;
    }
    let x_max = (num / (1.0 - t2)).sqrt();
    el.f0 * x_max / el.char_impedance
}
