//! Enclosure presets, the channel interference model, composite device-level
//! responses, and parametric geometry export.

pub mod geometry;
pub mod stl;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplifier::{self, CoiledUnit};
use crate::error::{Error, Result};
use crate::resonator::AirMedium;
use crate::spectral::{evaluate_response, FrequencyResponse};

/// Which device family the enclosure targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnclosureKind {
    Mobile,
    Speaker,
}

/// Enclosure geometry and mount parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnclosurePreset {
    pub kind: EnclosureKind,
    /// Outer dimensions, m.
    pub length: f64,
    pub width: f64,
    pub height: f64,
    /// Voice-channel cross-section, m.
    pub channel_width: f64,
    pub channel_height: f64,
    /// Wall thickness, m.
    pub wall: f64,
    /// Target center of the mounted amplifier's composite peak, Hz.
    pub amp_center_target: f64,
    /// Target composite peak gain (device-level).
    pub amp_gain_target: f64,
    /// Two-path interference path difference, m.
    pub channel_delta_l: f64,
    /// Two-path mix ratio `a` in [0, 1].
    pub channel_mix: f64,
}

impl EnclosurePreset {
    /// Mobile-device enclosure: 40 x 25 x 15 mm shell, 4 x 2 mm side
    /// channels, 5 mm walls. Composite amplification targets 2800 Hz at
    /// 78.8x.
    pub fn mobile() -> Self {
        Self {
            kind: EnclosureKind::Mobile,
            length: 40.0e-3,
            width: 25.0e-3,
            height: 15.0e-3,
            channel_width: 4.0e-3,
            channel_height: 2.0e-3,
            wall: 5.0e-3,
            amp_center_target: 2800.0,
            amp_gain_target: 78.8,
            channel_delta_l: 6.0e-3,
            channel_mix: 0.15,
        }
    }

    /// Smart-speaker enclosure: 25 x 20 x 10 mm shell. The composite
    /// amplification targets (2900 Hz, 45x) are configurable placeholders,
    /// not anchored values.
    pub fn speaker() -> Self {
        Self {
            kind: EnclosureKind::Speaker,
            length: 25.0e-3,
            width: 20.0e-3,
            height: 10.0e-3,
            channel_width: 4.0e-3,
            channel_height: 2.0e-3,
            wall: 5.0e-3,
            amp_center_target: 2900.0,
            amp_gain_target: 45.0,
            channel_delta_l: 4.0e-3,
            channel_mix: 0.15,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("width", self.width),
            ("height", self.height),
            ("channel_width", self.channel_width),
            ("channel_height", self.channel_height),
            ("wall", self.wall),
        ] {
            if !(v > 0.0) {
                return Err(Error::arg(format!("{name} must be positive, got {v}")));
            }
        }
        let min_dim = self.length.min(self.width).min(self.height);
        if self.wall >= min_dim / 2.0 {
            return Err(Error::arg(format!(
                "wall {} m too thick for a {} m minimum dimension",
                self.wall, min_dim
            )));
        }
        if !(0.0..=1.0).contains(&self.channel_mix) {
            return Err(Error::arg(format!(
                "channel mix must be in [0, 1], got {}",
                self.channel_mix
            )));
        }
        if self.channel_delta_l < 0.0 {
            return Err(Error::arg("channel path difference must be non-negative"));
        }
        Ok(())
    }
}

/// Channel gain at one frequency:
/// `H_ch(f) = (1 + a e^{-j 2 pi f dL / c}) / (1 + a)`.
pub fn channel_gain(preset: &EnclosurePreset, air: &AirMedium, f: f64) -> Complex64 {
    let a = preset.channel_mix;
    let phase = -2.0 * PI * f * preset.channel_delta_l / air.sound_speed;
    (1.0 + a * Complex64::new(0.0, phase).exp()) / (1.0 + a)
}

/// Two-path interference response of the voice channel: |H| <= 1, unity
/// where the paths align, periodic in frequency with period `c / delta_L`.
pub fn channel_response(
    preset: &EnclosurePreset,
    air: &AirMedium,
    grid: &[f64],
) -> Result<FrequencyResponse> {
    preset.validate()?;
    let values = crate::exec::map_collect(grid, |&f| channel_gain(preset, air, f));
    FrequencyResponse::new(grid.to_vec(), values)
}

/// A preset whose channel and mounted amplifier have been fitted to the
/// composite targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedMount {
    pub preset: EnclosurePreset,
    /// The device-mounted amplifier: center shifted by the channel path
    /// coupling, peak gain raised to hit the composite target.
    pub amp: CoiledUnit,
    /// Composite peak location achieved, Hz.
    pub peak_frequency: f64,
    /// Composite peak value achieved.
    pub peak_gain: f64,
}

/// Composite magnitude `|array_T| * A_mounted * |H_ch|` at one frequency.
fn composite_at(
    array_t: &FrequencyResponse,
    amp: &CoiledUnit,
    preset: &EnclosurePreset,
    air: &AirMedium,
    f: f64,
) -> f64 {
    let arr = evaluate_response(array_t, f).map_or(1.0, |v| v.norm());
    arr * amplifier::gain_at(amp, air, f) * channel_gain(preset, air, f).norm()
}

fn composite_peak(
    array_t: &FrequencyResponse,
    amp: &CoiledUnit,
    preset: &EnclosurePreset,
    air: &AirMedium,
) -> (f64, f64) {
    let center = preset.amp_center_target;
    let lo = (center - 1500.0).max(100.0);
    let hi = center + 1500.0;
    let n = (hi - lo).round() as usize; // 1 Hz steps
    let mut best = (lo, f64::MIN);
    for i in 0..=n {
        let f = lo + i as f64;
        let v = composite_at(array_t, amp, preset, air, f);
        if v > best.1 {
            best = (f, v);
        }
    }
    best
}

/// Fit the enclosure mount so the composite device response
/// (`array_T x mounted amplifier x channel`) peaks at the preset's
/// `amp_center_target` with its `amp_gain_target`.
///
/// The channel's path coupling re-tunes the mounted amplifier: its effective
/// folded path grows to `c / (4 f_target)`, moving the resonance down from
/// the free-field value; the peak gain is then solved so the composite peak
/// hits the target, and a small deterministic grid over the two-path
/// parameters `(delta_L, a)` picks the channel ripple that best preserves
/// the passband. Identical inputs produce identical fits.
pub fn fit_channel(
    preset: &EnclosurePreset,
    coiled: &CoiledUnit,
    array_t: &FrequencyResponse,
    air: &AirMedium,
) -> Result<FittedMount> {
    preset.validate()?;
    coiled.validate()?;
    let free_resonance = amplifier::coiled_resonance(coiled, air);
    let target = preset.amp_center_target;
    if !(target > 0.0) || !(preset.amp_gain_target >= 1.0) {
        return Err(Error::FitFailure(format!(
            "targets out of range: {} Hz, {}x",
            target, preset.amp_gain_target
        )));
    }
    if target > free_resonance {
        return Err(Error::FitFailure(format!(
            "channel coupling only lengthens the path: cannot raise {free_resonance:.0} Hz to {target:.0} Hz"
        )));
    }

    // Path extension that lands the mounted resonance on the target center.
    let mounted_path = air.sound_speed / (4.0 * target);
    let mut mounted = *coiled;
    mounted.l_coiled = mounted_path;

    let delta_grid = [2.0e-3, 4.0e-3, 6.0e-3, 8.0e-3, 10.0e-3];
    let mix_grid = [0.0, 0.05, 0.1, 0.15, 0.2, 0.3];

    let mut best: Option<(FittedMount, f64)> = None;
    for &delta_l in &delta_grid {
        for &mix in &mix_grid {
            let mut candidate_preset = *preset;
            candidate_preset.channel_delta_l = delta_l;
            candidate_preset.channel_mix = mix;
            let mut amp = mounted;
            // Solve the peak gain against the composite, iterating a few
            // times because raising the gain can nudge the argmax.
            for _ in 0..3 {
                let (f_peak, value) = composite_peak(array_t, &amp, &candidate_preset, air, );
                let arr =
                    evaluate_response(array_t, f_peak).map_or(1.0, |v| v.norm());
                let ch = channel_gain(&candidate_preset, air, f_peak).norm();
                let f_r = amplifier::coiled_resonance(&amp, air);
                let half_width = f_r / (2.0 * amp.q_amp);
                let d = (f_peak - f_r) / half_width;
                let lorentz = 1.0 / (1.0 + d * d);
                // arr * ch * (1 + (pg - 1) * lorentz) = target gain
                let needed = preset.amp_gain_target / (arr * ch);
                if needed <= 1.0 || lorentz <= 0.0 {
                    break;
                }
                amp.peak_gain = 1.0 + (needed - 1.0) / lorentz;
                let _ = value;
            }
            let (f_peak, value) = composite_peak(array_t, &amp, &candidate_preset, air);

            // Passband violation over [100, 2000] Hz.
            let mut violation = 0.0f64;
            let mut f = 100.0;
            while f <= 2000.0 {
                let v = composite_at(array_t, &amp, &candidate_preset, air, f);
                violation += (v - 1.1).max(0.0) + (0.9 - v).max(0.0);
                f += 50.0;
            }

            let loc_err = (f_peak - target).abs();
            let gain_err = (value - preset.amp_gain_target).abs() / preset.amp_gain_target;
            if loc_err > 50.0 || gain_err > 0.05 {
                continue;
            }
            let score = violation * 1e3 + loc_err + gain_err * 100.0;
            if best.as_ref().map_or(true, |(_, s)| score < *s) {
                best = Some((
                    FittedMount {
                        preset: candidate_preset,
                        amp,
                        peak_frequency: f_peak,
                        peak_gain: value,
                    },
                    score,
                ));
            }
        }
    }

    best.map(|(m, _)| m).ok_or_else(|| {
        Error::FitFailure(format!(
            "no channel parameters reach {target:.0} Hz / {:.1}x within tolerance",
            preset.amp_gain_target
        ))
    })
}

/// Composite device response on `grid`: pointwise product of the array
/// transmission, the mounted amplifier response, and the channel response.
/// Outside every modeled band the factors are unity, so the composite is too.
pub fn device_response(
    preset: &EnclosurePreset,
    array_t: &FrequencyResponse,
    amp_h: &FrequencyResponse,
    air: &AirMedium,
    grid: &[f64],
) -> Result<FrequencyResponse> {
    preset.validate()?;
    let values = crate::exec::map_collect(grid, |&f| {
        let arr = evaluate_response(array_t, f).map_or(Complex64::new(1.0, 0.0), |v| v);
        let amp = evaluate_response(amp_h, f).map_or(Complex64::new(1.0, 0.0), |v| v);
        arr * amp * channel_gain(preset, air, f)
    });
    FrequencyResponse::new(grid.to_vec(), values)
}
