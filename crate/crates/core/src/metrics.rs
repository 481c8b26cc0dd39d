//! Signal-level surrogates for the protection-success, word-interference,
//! and command-recognition metrics, plus machine-readable defense reports.
//!
//! Real recognizer hardware is out of scope; recognition is operationalized
//! as explicit, threshold-based signal criteria. Every threshold lives in
//! [`RecognitionPolicy`].

use std::collections::BTreeMap;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::attacks::{AttackKind, CapturedTrial};
use crate::error::{Error, Result};
use crate::spectral::{self, FrequencyResponse, Signal};

/// Thresholds that stand in for a recognizer's behavior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecognitionPolicy {
    /// Minimum lag-maximized normalized correlation for recognition.
    pub corr_threshold: f64,
    /// Minimum captured in-band SNR (command band over the band above 6 kHz),
    /// dB.
    pub snr_threshold_db: f64,
    /// Per-word log-spectral distortion in the consonant band that counts as
    /// destroyed, dB.
    pub word_distortion_db: f64,
    /// Band whose spectral shape a recognized command must preserve, Hz.
    pub crr_band: (f64, f64),
    /// Allowed log-spectral distortion over `crr_band`, dB.
    pub crr_tolerance_db: f64,
}

impl Default for RecognitionPolicy {
    fn default() -> Self {
        Self {
            corr_threshold: 0.5,
            snr_threshold_db: 10.0,
            word_distortion_db: 10.0,
            crr_band: (100.0, 2000.0),
            crr_tolerance_db: 1.0,
        }
    }
}

impl RecognitionPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.corr_threshold > 0.0)
            || !(self.snr_threshold_db > 0.0)
            || !(self.word_distortion_db > 0.0)
            || !(self.crr_tolerance_db > 0.0)
        {
            return Err(Error::arg("policy thresholds must be positive"));
        }
        if !(self.crr_band.0 >= 0.0 && self.crr_band.0 < self.crr_band.1) {
            return Err(Error::arg("bad crr band"));
        }
        Ok(())
    }
}

/// Correlation band for recognition and word scoring, Hz.
const CORR_BAND: (f64, f64) = (100.0, 4000.0);
/// Noise band for the captured SNR, Hz (above this up to Nyquist).
const NOISE_BAND_LO: f64 = 6000.0;
/// Consonant band scored by the word-interference metric, Hz.
const WORD_BAND: (f64, f64) = (2000.0, 4000.0);
/// Sub-bands used for log-spectral comparisons.
const N_SUBBANDS: usize = 16;
/// Reference sub-bands carrying less than this share of band energy are
/// skipped in spectral distances (they hold no command content).
const SUBBAND_FLOOR: f64 = 1e-4;

/// Max over all lags of the cross-correlation between `a` and `b`,
/// normalized by the signal energies (Cauchy-Schwarz bound 1).
pub fn normalized_peak_correlation(a: &[f64], b: &[f64]) -> f64 {
    let ea: f64 = a.iter().map(|x| x * x).sum();
    let eb: f64 = b.iter().map(|x| x * x).sum();
    if ea <= 0.0 || eb <= 0.0 {
        return 0.0;
    }
    let n = (a.len() + b.len() - 1).next_power_of_two();
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fa.resize(n, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fb.resize(n, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut fa);
    planner.plan_fft_forward(n).process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y.conj();
    }
    planner.plan_fft_inverse(n).process(&mut fa);
    let scale = 1.0 / n as f64;
    let peak = fa.iter().map(|c| c.re * scale).fold(f64::MIN, f64::max);
    (peak / (ea * eb).sqrt()).clamp(-1.0, 1.0)
}

/// Lag (in samples of `a` relative to `b`) at the correlation peak.
fn peak_lag(a: &[f64], b: &[f64]) -> i64 {
    let n = (a.len() + b.len() - 1).next_power_of_two();
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fa.resize(n, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fb.resize(n, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut fa);
    planner.plan_fft_forward(n).process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y.conj();
    }
    planner.plan_fft_inverse(n).process(&mut fa);
    let (mut best_i, mut best) = (0usize, f64::MIN);
    for (i, c) in fa.iter().enumerate() {
        if c.re > best {
            best = c.re;
            best_i = i;
        }
    }
    // Circular correlation index: i < n/2 means a lags b by +i.
    if best_i < n / 2 {
        best_i as i64
    } else {
        best_i as i64 - n as i64
    }
}

/// Normalized sub-band energy distribution of `samples` over `band`.
fn subband_distribution(samples: &[f64], rate: f64, band: (f64, f64)) -> Vec<f64> {
    let (df, powers) = spectral::power_bins(samples, rate);
    let width = (band.1 - band.0) / N_SUBBANDS as f64;
    let mut bands = vec![0.0f64; N_SUBBANDS];
    for (k, p) in powers.iter().enumerate() {
        let f = k as f64 * df;
        if f < band.0 || f >= band.1 {
            continue;
        }
        let idx = (((f - band.0) / width) as usize).min(N_SUBBANDS - 1);
        bands[idx] += p;
    }
    let total: f64 = bands.iter().sum();
    if total > 0.0 {
        for b in &mut bands {
            *b /= total;
        }
    }
    bands
}

/// RMS log-spectral distance (dB) between captured and reference sub-band
/// shapes over `band`. Sub-bands where the reference carries no content are
/// skipped; both distributions are normalized first, so the measure is
/// invariant under global amplitude scaling.
fn log_spectral_distance(cap: &[f64], reference: &[f64], rate: f64, band: (f64, f64)) -> f64 {
    let dc = subband_distribution(cap, rate, band);
    let dr = subband_distribution(reference, rate, band);
    let mut sum = 0.0;
    let mut count = 0usize;
    for (c, r) in dc.iter().zip(&dr) {
        if *r < SUBBAND_FLOOR {
            continue;
        }
        let db = 10.0 * (c.max(1e-12) / r).log10();
        sum += db * db;
        count += 1;
    }
    if count == 0 {
        return 0.0;
    }
    (sum / count as f64).sqrt()
}

fn bandpassed(sig: &Signal, band: (f64, f64)) -> Signal {
    spectral::bandpass(sig, band.0, band.1, 50.0).expect("valid correlation band")
}

/// Recognition surrogate: lag-maximized normalized correlation between the
/// band-passed captured and reference signals must clear `corr_threshold`,
/// and the captured command-band-over-noise-band SNR must clear
/// `snr_threshold_db`.
pub fn attack_recognized(trial: &CapturedTrial, policy: &RecognitionPolicy) -> Result<bool> {
    policy.validate()?;
    let cap = &trial.captured;
    let reference = &trial.reference.signal;
    if (cap.sample_rate() - reference.sample_rate()).abs() > 1e-9 {
        return Err(Error::arg(format!(
            "rate mismatch: captured {} Hz vs reference {} Hz",
            cap.sample_rate(),
            reference.sample_rate()
        )));
    }
    let cap_bp = bandpassed(cap, CORR_BAND);
    let ref_bp = bandpassed(reference, CORR_BAND);
    let corr = normalized_peak_correlation(cap_bp.samples(), ref_bp.samples());
    if corr < policy.corr_threshold {
        return Ok(false);
    }
    let nyq = cap.nyquist();
    let command = spectral::band_energy(cap, CORR_BAND.0, CORR_BAND.1.min(nyq))?;
    let noise = if NOISE_BAND_LO < nyq {
        spectral::band_energy(cap, NOISE_BAND_LO, nyq)?
    } else {
        0.0
    };
    // A silent noise band means nothing competes with the command.
    let snr_ok = if noise <= 1e-15 * (command + 1e-300) {
        true
    } else {
        10.0 * (command / noise).log10() >= policy.snr_threshold_db
    };
    Ok(snr_ok)
}

/// Protection success rate: the fraction of attack trials that were NOT
/// recognized.
pub fn psr(trials: &[CapturedTrial], policy: &RecognitionPolicy) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::arg("PSR needs at least one trial"));
    }
    if trials.iter().any(|t| matches!(t.spec.kind, AttackKind::Clean)) {
        return Err(Error::arg("PSR is defined over attack trials, found a clean trial"));
    }
    let flags = crate::exec::map_collect(trials, |t| attack_recognized(t, policy));
    let mut blocked = 0usize;
    for f in flags {
        if !f? {
            blocked += 1;
        }
    }
    Ok(blocked as f64 / trials.len() as f64)
}

/// Word interference rate: a word is destroyed when its lag-aligned
/// band-passed correlation falls below the threshold OR its consonant-band
/// spectral shape is distorted past `word_distortion_db`.
pub fn wir(trial: &CapturedTrial, policy: &RecognitionPolicy) -> Result<f64> {
    policy.validate()?;
    if trial.reference.words.is_empty() {
        return Err(Error::arg("reference has no word spans"));
    }
    let rate = trial.captured.sample_rate();
    let cap_bp = bandpassed(&trial.captured, CORR_BAND);
    let ref_bp = bandpassed(&trial.reference.signal, CORR_BAND);
    let lag = peak_lag(cap_bp.samples(), ref_bp.samples());
    let n_cap = cap_bp.len() as i64;
    let mut destroyed = 0usize;
    for w in &trial.reference.words {
        let start = (w.start as i64 + lag).clamp(0, n_cap - 1) as usize;
        let end = (w.end as i64 + lag).clamp(start as i64 + 1, n_cap) as usize;
        let cap_seg = &cap_bp.samples()[start..end];
        let ref_seg = &ref_bp.samples()[w.start..w.end];
        let corr = normalized_peak_correlation(cap_seg, ref_seg);
        let cap_raw = &trial.captured.samples()[start..end];
        let ref_raw = &trial.reference.signal.samples()[w.start..w.end];
        let lsd = log_spectral_distance(cap_raw, ref_raw, rate, WORD_BAND);
        if corr < policy.corr_threshold || lsd >= policy.word_distortion_db {
            destroyed += 1;
        }
    }
    Ok(destroyed as f64 / trial.reference.words.len() as f64)
}

/// Command recognition rate over clean trials: recognized commands must pass
/// [`attack_recognized`] and keep their formant-band spectral shape within
/// `crr_tolerance_db`.
pub fn crr(trials: &[CapturedTrial], policy: &RecognitionPolicy) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::arg("CRR needs at least one trial"));
    }
    if trials.iter().any(|t| !matches!(t.spec.kind, AttackKind::Clean)) {
        return Err(Error::arg("CRR is defined over clean trials only"));
    }
    let flags = crate::exec::map_collect(trials, |t| -> Result<bool> {
        if !attack_recognized(t, policy)? {
            return Ok(false);
        }
        let lsd = log_spectral_distance(
            t.captured.samples(),
            t.reference.signal.samples(),
            t.captured.sample_rate(),
            policy.crr_band,
        );
        Ok(lsd <= policy.crr_tolerance_db)
    });
    let mut recognized = 0usize;
    for f in flags {
        if f? {
            recognized += 1;
        }
    }
    Ok(recognized as f64 / trials.len() as f64)
}

/// Max and mean of `|resp|` over the grid points inside `[f_lo, f_hi]`.
pub fn transmission_stats(resp: &FrequencyResponse, f_lo: f64, f_hi: f64) -> Result<(f64, f64)> {
    let (first, last) = (resp.freqs()[0], *resp.freqs().last().unwrap());
    if f_lo < first || f_hi > last || f_lo >= f_hi {
        return Err(Error::arg(format!(
            "band [{f_lo}, {f_hi}] outside the response grid [{first}, {last}]"
        )));
    }
    let mut max = f64::MIN;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (f, v) in resp.freqs().iter().zip(resp.values()) {
        if *f < f_lo || *f > f_hi {
            continue;
        }
        let m = v.norm();
        max = max.max(m);
        sum += m;
        count += 1;
    }
    if count == 0 {
        return Err(Error::arg("no grid points inside the band"));
    }
    Ok((max, sum / count as f64))
}

/// Per-trial summary inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub kind: String,
    pub seed: u64,
    pub recognized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word_interference: Option<f64>,
}

/// Aggregated defense outcome. Schema v1; field order is fixed, so identical
/// inputs serialize byte-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefenseReport {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wir: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_tc_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_tc_mean: Option<f64>,
    pub trials: Vec<TrialRecord>,
    pub metadata: BTreeMap<String, String>,
}

impl DefenseReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))
    }

    /// Two-column `metric,value` summary.
    pub fn csv_summary(&self) -> String {
        let mut out = String::from("metric,value\n");
        let mut push = |name: &str, v: Option<f64>| {
            if let Some(v) = v {
                out.push_str(&format!("{name},{v}\n"));
            }
        };
        push("psr", self.psr);
        push("wir", self.wir);
        push("crr", self.crr);
        push("band_tc_max", self.band_tc_max);
        push("band_tc_mean", self.band_tc_mean);
        out
    }
}

/// Aggregate trials (and optionally a defense response scored over `band`)
/// into a schema-v1 report. PSR/WIR cover the attack trials, CRR the clean
/// trials; each is omitted when no trial of that class is present.
pub fn report(
    trials: &[CapturedTrial],
    response: Option<(&FrequencyResponse, (f64, f64))>,
    policy: &RecognitionPolicy,
    metadata: BTreeMap<String, String>,
) -> Result<DefenseReport> {
    let attack_trials: Vec<CapturedTrial> = trials
        .iter()
        .filter(|t| !matches!(t.spec.kind, AttackKind::Clean))
        .cloned()
        .collect();
    let clean_trials: Vec<CapturedTrial> = trials
        .iter()
        .filter(|t| matches!(t.spec.kind, AttackKind::Clean))
        .cloned()
        .collect();

    let mut records = Vec::with_capacity(trials.len());
    for (i, t) in trials.iter().enumerate() {
        let recognized = attack_recognized(t, policy)?;
        let word_interference = if matches!(t.spec.kind, AttackKind::Clean) {
            None
        } else {
            Some(wir(t, policy)?)
        };
        records.push(TrialRecord {
            index: i,
            kind: t.spec.kind_name().into(),
            seed: t.seed,
            recognized,
            word_interference,
        });
    }

    let psr_value = if attack_trials.is_empty() {
        None
    } else {
        Some(psr(&attack_trials, policy)?)
    };
    let wir_value = if attack_trials.is_empty() {
        None
    } else {
        let sum: f64 = records.iter().filter_map(|r| r.word_interference).sum();
        Some(sum / attack_trials.len() as f64)
    };
    let crr_value = if clean_trials.is_empty() {
        None
    } else {
        Some(crr(&clean_trials, policy)?)
    };
    let (band_tc_max, band_tc_mean) = match response {
        Some((resp, band)) => {
            let (max, mean) = transmission_stats(resp, band.0, band.1)?;
            (Some(max), Some(mean))
        }
        None => (None, None),
    };

    Ok(DefenseReport {
        schema_version: 1,
        psr: psr_value,
        wir: wir_value,
        crr: crr_value,
        band_tc_max,
        band_tc_mean,
        trials: records,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::{self, AttackSpec, MicrophoneModel};

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("word{i}")).collect()
    }

    fn quiet_mic() -> MicrophoneModel {
        MicrophoneModel {
            a2: 0.0,
            noise_floor_db: -120.0,
            ..Default::default()
        }
    }

    fn clean_trial(n_words: usize) -> CapturedTrial {
        let cmd = attacks::synth_command(&labels(n_words), 48_000.0).unwrap();
        let spec = AttackSpec {
            kind: AttackKind::Clean,
            level: 0.5,
        };
        attacks::run_attack(&spec, &cmd, None, &quiet_mic(), 1).unwrap()
    }

    #[test]
    fn identical_signals_recognized() {
        let trial = clean_trial(2);
        assert!(attack_recognized(&trial, &RecognitionPolicy::default()).unwrap());
    }

    #[test]
    fn pure_noise_not_recognized() {
        use rand::{Rng, SeedableRng};
        let mut trial = clean_trial(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = trial.captured.len();
        trial.captured = Signal::new(
            48_000.0,
            (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect(),
        )
        .unwrap();
        assert!(!attack_recognized(&trial, &RecognitionPolicy::default()).unwrap());
    }

    #[test]
    fn rate_mismatch_rejected() {
        let mut trial = clean_trial(1);
        trial.captured =
            crate::spectral::resample::resample(&trial.captured, 44_100.0).unwrap();
        assert!(attack_recognized(&trial, &RecognitionPolicy::default()).is_err());
    }

    #[test]
    fn psr_extremes() {
        let cmd = attacks::synth_command(&labels(2), 48_000.0).unwrap();
        let spec = AttackSpec {
            kind: AttackKind::Inaudible {
                carrier_hz: 25_000.0,
                mod_index: 0.8,
            },
            level: 0.5,
        };
        let policy = RecognitionPolicy::default();
        // Undefended inaudible trials demodulate cleanly: all recognized.
        let trials: Vec<CapturedTrial> = (0..4)
            .map(|i| {
                attacks::run_attack(&spec, &cmd, None, &MicrophoneModel::default(), i).unwrap()
            })
            .collect();
        assert_eq!(psr(&trials, &policy).unwrap(), 0.0);
        // Silence every capture: nothing recognized.
        let silenced: Vec<CapturedTrial> = trials
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.captured = Signal::new(t.captured.sample_rate(), vec![1e-12; t.captured.len()])
                    .unwrap();
                t
            })
            .collect();
        assert_eq!(psr(&silenced, &policy).unwrap(), 1.0);
        assert!(psr(&[], &policy).is_err());
        assert!(psr(&[clean_trial(1)], &policy).is_err());
    }

    #[test]
    fn psr_concatenation_is_weighted_mean() {
        let cmd = attacks::synth_command(&labels(1), 48_000.0).unwrap();
        let spec = AttackSpec {
            kind: AttackKind::Inaudible {
                carrier_hz: 25_000.0,
                mod_index: 0.8,
            },
            level: 0.5,
        };
        let policy = RecognitionPolicy::default();
        let mk = |seed| attacks::run_attack(&spec, &cmd, None, &MicrophoneModel::default(), seed).unwrap();
        let part_a: Vec<CapturedTrial> = (0..3).map(mk).collect();
        let mut part_b: Vec<CapturedTrial> = (3..5).map(mk).collect();
        // Silence part B so the two parts have different PSR.
        for t in &mut part_b {
            t.captured =
                Signal::new(t.captured.sample_rate(), vec![1e-12; t.captured.len()]).unwrap();
        }
        let pa = psr(&part_a, &policy).unwrap();
        let pb = psr(&part_b, &policy).unwrap();
        let mut all = part_a.clone();
        all.extend(part_b.clone());
        let combined = psr(&all, &policy).unwrap();
        let weighted = (pa * 3.0 + pb * 2.0) / 5.0;
        assert!((combined - weighted).abs() <= 1e-12);
    }

    #[test]
    fn wir_zero_for_faithful_capture_and_one_for_silence() {
        let policy = RecognitionPolicy::default();
        let trial = clean_trial(3);
        assert_eq!(wir(&trial, &policy).unwrap(), 0.0);
        let mut silenced = trial.clone();
        silenced.captured = Signal::new(
            silenced.captured.sample_rate(),
            vec![0.0; silenced.captured.len()],
        )
        .unwrap();
        assert_eq!(wir(&silenced, &policy).unwrap(), 1.0);
    }

    #[test]
    fn wir_scale_invariant() {
        let policy = RecognitionPolicy::default();
        let trial = clean_trial(3);
        let mut scaled = trial.clone();
        scaled.captured = Signal::new(
            scaled.captured.sample_rate(),
            scaled.captured.samples().iter().map(|s| 7.3 * s).collect(),
        )
        .unwrap();
        assert_eq!(
            wir(&trial, &policy).unwrap(),
            wir(&scaled, &policy).unwrap()
        );
    }

    #[test]
    fn crr_passthrough_and_notched() {
        let policy = RecognitionPolicy::default();
        let cmd = attacks::synth_command(&labels(2), 48_000.0).unwrap();
        let spec = AttackSpec {
            kind: AttackKind::Clean,
            level: 0.5,
        };
        let clean: Vec<CapturedTrial> = (0..3)
            .map(|i| attacks::run_attack(&spec, &cmd, None, &quiet_mic(), i).unwrap())
            .collect();
        assert_eq!(crr(&clean, &policy).unwrap(), 1.0);

        // A notch across the whole formant band destroys recognition.
        let notch = FrequencyResponse::from_real(
            vec![50.0, 99.0, 100.0, 2000.0, 2001.0, 24_000.0],
            vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0],
        )
        .unwrap();
        let notched: Vec<CapturedTrial> = (0..3)
            .map(|i| attacks::run_attack(&spec, &cmd, Some(&notch), &quiet_mic(), i).unwrap())
            .collect();
        assert_eq!(crr(&notched, &policy).unwrap(), 0.0);

        // Mixing in an attack trial is a usage error.
        let mut mixed = clean.clone();
        mixed.push(
            attacks::run_attack(
                &AttackSpec {
                    kind: AttackKind::Inaudible {
                        carrier_hz: 25_000.0,
                        mod_index: 0.8,
                    },
                    level: 0.5,
                },
                &cmd,
                None,
                &quiet_mic(),
                9,
            )
            .unwrap(),
        );
        assert!(crr(&mixed, &policy).is_err());
    }

    #[test]
    fn crr_scale_invariant() {
        let policy = RecognitionPolicy::default();
        let trial = clean_trial(2);
        let mut scaled = trial.clone();
        scaled.captured = Signal::new(
            scaled.captured.sample_rate(),
            scaled.captured.samples().iter().map(|s| 0.37 * s).collect(),
        )
        .unwrap();
        assert_eq!(
            crr(&[trial], &policy).unwrap(),
            crr(&[scaled], &policy).unwrap()
        );
    }

    #[test]
    fn recognition_monotone_in_threshold() {
        let policy = RecognitionPolicy::default();
        let trial = clean_trial(2);
        let mut recognized_counts = Vec::new();
        for thr in [0.2, 0.5, 0.8, 0.99] {
            let p = RecognitionPolicy {
                corr_threshold: thr,
                ..policy
            };
            recognized_counts.push(attack_recognized(&trial, &p).unwrap() as u8);
        }
        // Once recognition fails at some threshold it stays failed above it.
        for w in recognized_counts.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn transmission_stats_constant_and_errors() {
        let r = FrequencyResponse::from_real(vec![100.0, 200.0, 300.0], vec![0.1, 0.1, 0.1])
            .unwrap();
        let (max, mean) = transmission_stats(&r, 100.0, 300.0).unwrap();
        assert_eq!((max, mean), (0.1, 0.1));
        assert!(transmission_stats(&r, 50.0, 300.0).is_err());
        assert!(transmission_stats(&r, 100.0, 400.0).is_err());
    }

    #[test]
    fn report_schema_rules_and_determinism() {
        let policy = RecognitionPolicy::default();
        let clean = clean_trial(2);
        let meta: BTreeMap<String, String> =
            [("config".to_string(), "default".to_string())].into();
        let rep = report(&[clean.clone()], None, &policy, meta.clone()).unwrap();
        assert!(rep.psr.is_none());
        assert!(rep.wir.is_none());
        assert_eq!(rep.crr, Some(1.0));
        assert_eq!(rep.schema_version, 1);
        let again = report(&[clean], None, &policy, meta).unwrap();
        assert_eq!(rep.to_json().unwrap(), again.to_json().unwrap());
        // Metric echo: the crr field equals the component metric.
        assert_eq!(rep.crr.unwrap(), 1.0);
        assert!(rep.csv_summary().contains("crr,1"));
    }

    #[test]
    fn all_metric_outputs_in_unit_interval() {
        let policy = RecognitionPolicy::default();
        let cmd = attacks::synth_command(&labels(3), 48_000.0).unwrap();
        let specs = [
            AttackKind::Clean,
            AttackKind::Inaudible {
                carrier_hz: 18_000.0,
                mod_index: 0.8,
            },
            AttackKind::Adversarial {
                band_lo_hz: 2000.0,
                band_hi_hz: 4000.0,
                snr_db: 15.0,
            },
        ];
        for (i, kind) in specs.into_iter().enumerate() {
            let spec = AttackSpec { kind, level: 0.5 };
            let trial =
                attacks::run_attack(&spec, &cmd, None, &MicrophoneModel::default(), i as u64)
                    .unwrap();
            let w = wir(&trial, &policy).unwrap();
            assert!((0.0..=1.0).contains(&w));
            if !matches!(trial.spec.kind, AttackKind::Clean) {
                let p = psr(std::slice::from_ref(&trial), &policy).unwrap();
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}
