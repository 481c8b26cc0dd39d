//! Toolkit configuration: one structured TOML file with explicit units in
//! key names. Unknown keys are hard errors so a typo in a calibration
//! constant cannot silently fall back to a default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::amplifier::CoiledUnit;
use crate::attacks::MicrophoneModel;
use crate::coupling::CouplingModel;
use crate::device::{EnclosureKind, EnclosurePreset};
use crate::error::{Error, Result};
use crate::metrics::RecognitionPolicy;
use crate::resonator::AirMedium;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirSection {
    pub sound_speed_m_per_s: f64,
    pub density_kg_per_m3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSection {
    pub neck_radius_mm: f64,
    pub cavity_radius_mm: f64,
    pub q: f64,
    pub heights_mm: Vec<f64>,
    pub spacing_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub alpha: f64,
    pub z_ref: f64,
    pub q_broadening_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifierSection {
    pub l_mm: f64,
    pub k_mm: f64,
    pub d_mm: f64,
    pub g_mm: f64,
    pub l_coiled_mm: f64,
    pub l_straight_mm: f64,
    pub q_amp: f64,
    pub peak_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSection {
    pub length_mm: f64,
    pub width_mm: f64,
    pub height_mm: f64,
    pub channel_width_mm: f64,
    pub channel_height_mm: f64,
    pub wall_mm: f64,
    pub amp_center_target_hz: f64,
    pub amp_gain_target: f64,
    pub channel_delta_l_mm: f64,
    pub channel_mix: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicSection {
    pub a1: f64,
    pub a2: f64,
    pub lowpass_cutoff_hz: f64,
    pub noise_floor_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub corr_threshold: f64,
    pub snr_threshold_db: f64,
    pub word_distortion_db: f64,
    pub crr_band_lo_hz: f64,
    pub crr_band_hi_hz: f64,
    pub crr_tolerance_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    pub root: u64,
}

/// The complete toolkit configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolkitConfig {
    pub air: AirSection,
    pub resonator: ResonatorSection,
    pub coupling: CouplingSection,
    pub amplifier: AmplifierSection,
    pub mobile: PresetSection,
    pub speaker: PresetSection,
    pub microphone: MicSection,
    pub policy: PolicySection,
    pub seeds: SeedSection,
}

fn preset_section(p: &EnclosurePreset) -> PresetSection {
    PresetSection {
        length_mm: p.length * 1e3,
        width_mm: p.width * 1e3,
        height_mm: p.height * 1e3,
        channel_width_mm: p.channel_width * 1e3,
        channel_height_mm: p.channel_height * 1e3,
        wall_mm: p.wall * 1e3,
        amp_center_target_hz: p.amp_center_target,
        amp_gain_target: p.amp_gain_target,
        channel_delta_l_mm: p.channel_delta_l * 1e3,
        channel_mix: p.channel_mix,
    }
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        let air = AirMedium::default();
        let amp = crate::amplifier::design_coiled_for(3000.0, &air)
            .expect("default amplifier design is feasible");
        Self {
            air: AirSection {
                sound_speed_m_per_s: air.sound_speed,
                density_kg_per_m3: air.density,
            },
            resonator: ResonatorSection {
                neck_radius_mm: crate::resonator::DEFAULT_NECK_RADIUS * 1e3,
                cavity_radius_mm: crate::resonator::DEFAULT_CAVITY_RADIUS * 1e3,
                q: crate::coupling::DEFAULT_UNIT_Q,
                heights_mm: vec![2.0, 3.2, 4.8],
                spacing_mm: 0.1,
            },
            coupling: CouplingSection {
                alpha: crate::coupling::DEFAULT_ALPHA,
                z_ref: crate::coupling::DEFAULT_Z_REF,
                q_broadening_gain: crate::coupling::DEFAULT_Q_BROADENING_GAIN,
            },
            amplifier: AmplifierSection {
                l_mm: amp.l * 1e3,
                k_mm: amp.k * 1e3,
                d_mm: amp.d * 1e3,
                g_mm: amp.g * 1e3,
                l_coiled_mm: amp.l_coiled * 1e3,
                l_straight_mm: amp.l_straight * 1e3,
                q_amp: amp.q_amp,
                peak_gain: amp.peak_gain,
            },
            mobile: preset_section(&EnclosurePreset::mobile()),
            speaker: preset_section(&EnclosurePreset::speaker()),
            microphone: MicSection {
                a1: 1.0,
                a2: 0.5,
                lowpass_cutoff_hz: 20_000.0,
                noise_floor_db: -60.0,
            },
            policy: PolicySection {
                corr_threshold: 0.5,
                snr_threshold_db: 10.0,
                word_distortion_db: 10.0,
                crr_band_lo_hz: 100.0,
                crr_band_hi_hz: 2000.0,
                crr_tolerance_db: 1.0,
            },
            seeds: SeedSection { root: 42 },
        }
    }
}

impl ToolkitConfig {
    pub fn air_medium(&self) -> AirMedium {
        AirMedium {
            sound_speed: self.air.sound_speed_m_per_s,
            density: self.air.density_kg_per_m3,
        }
    }

    pub fn coupling_model(&self) -> CouplingModel {
        CouplingModel {
            alpha: self.coupling.alpha,
            z_ref: self.coupling.z_ref,
            q_broadening_gain: self.coupling.q_broadening_gain,
        }
    }

    pub fn units(&self) -> Result<Vec<crate::resonator::ResonatorUnit>> {
        self.resonator
            .heights_mm
            .iter()
            .map(|&h| {
                crate::resonator::ResonatorUnit::new(
                    h * 1e-3,
                    self.resonator.neck_radius_mm * 1e-3,
                    self.resonator.cavity_radius_mm * 1e-3,
                    self.resonator.q,
                )
            })
            .collect()
    }

    pub fn array(&self) -> Result<crate::coupling::ArrayConfig> {
        crate::coupling::ArrayConfig::new(
            self.units()?,
            crate::coupling::Arrangement::Linear,
            self.resonator.spacing_mm * 1e-3,
        )
    }

    pub fn amplifier_unit(&self) -> CoiledUnit {
        CoiledUnit {
            l: self.amplifier.l_mm * 1e-3,
            k: self.amplifier.k_mm * 1e-3,
            d: self.amplifier.d_mm * 1e-3,
            g: self.amplifier.g_mm * 1e-3,
            l_coiled: self.amplifier.l_coiled_mm * 1e-3,
            l_straight: self.amplifier.l_straight_mm * 1e-3,
            q_amp: self.amplifier.q_amp,
            peak_gain: self.amplifier.peak_gain,
        }
    }

    pub fn preset(&self, kind: EnclosureKind) -> EnclosurePreset {
        let s = match kind {
            EnclosureKind::Mobile => &self.mobile,
            EnclosureKind::Speaker => &self.speaker,
        };
        EnclosurePreset {
            kind,
            length: s.length_mm * 1e-3,
            width: s.width_mm * 1e-3,
            height: s.height_mm * 1e-3,
            channel_width: s.channel_width_mm * 1e-3,
            channel_height: s.channel_height_mm * 1e-3,
            wall: s.wall_mm * 1e-3,
            amp_center_target: s.amp_center_target_hz,
            amp_gain_target: s.amp_gain_target,
            channel_delta_l: s.channel_delta_l_mm * 1e-3,
            channel_mix: s.channel_mix,
        }
    }

    pub fn microphone(&self) -> MicrophoneModel {
        MicrophoneModel {
            a1: self.microphone.a1,
            a2: self.microphone.a2,
            lowpass_cutoff: self.microphone.lowpass_cutoff_hz,
            noise_floor_db: self.microphone.noise_floor_db,
        }
    }

    pub fn recognition_policy(&self) -> RecognitionPolicy {
        RecognitionPolicy {
            corr_threshold: self.policy.corr_threshold,
            snr_threshold_db: self.policy.snr_threshold_db,
            word_distortion_db: self.policy.word_distortion_db,
            crr_band: (self.policy.crr_band_lo_hz, self.policy.crr_band_hi_hz),
            crr_tolerance_db: self.policy.crr_tolerance_db,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_roundtrips_through_toml() {
        let cfg = ToolkitConfig::default();
        let text = cfg.to_toml().unwrap();
        let back = ToolkitConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = ToolkitConfig::default().to_toml().unwrap();
        text.push_str("\n[extra]\nmystery = 1\n");
        assert!(ToolkitConfig::from_toml(&text).is_err());
        let typo = text.replace("q_broadening_gain", "q_broadening_gian");
        assert!(ToolkitConfig::from_toml(&typo).is_err());
    }

    #[test]
    fn derived_objects_valid() {
        let cfg = ToolkitConfig::default();
        cfg.array().unwrap();
        cfg.amplifier_unit().validate().unwrap();
        cfg.preset(EnclosureKind::Mobile).validate().unwrap();
        cfg.preset(EnclosureKind::Speaker).validate().unwrap();
        cfg.microphone().validate().unwrap();
        cfg.recognition_policy().validate().unwrap();
    }
}
