//! Synthesis of clean commands, inaudible (AM-ultrasound) and adversarial
//! attacks, and the microphone nonlinearity capture model.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, fir, resample, wav, FrequencyResponse, Signal};

/// Duration of one synthesized word, s.
const WORD_SECS: f64 = 0.3;
/// Silence between words, s.
const GAP_SECS: f64 = 0.1;
/// Formant-proxy tone frequencies, Hz.
const F1_HZ: f64 = 500.0;
const F2_HZ: f64 = 1500.0;
/// Consonant-band chirp sweep, Hz.
const CHIRP_LO: f64 = 2500.0;
const CHIRP_HI: f64 = 3500.0;
/// Tone amplitudes. The consonant chirp carries ~0.1% of the word energy,
/// mirroring the small share of speech information above 2 kHz.
const F1_AMP: f64 = 0.55;
const F2_AMP: f64 = 0.44;
const CHIRP_AMP: f64 = 0.022;
/// Raised-cosine attack/release of each word burst, s.
const EDGE_SECS: f64 = 0.01;

/// Capture chain output rate ceiling, Hz.
const CAPTURE_RATE: f64 = 48_000.0;

/// A word-annotated waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandSignal {
    pub signal: Signal,
    pub words: Vec<WordSpan>,
}

/// One word's sample span and label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl CommandSignal {
    pub fn new(signal: Signal, words: Vec<WordSpan>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::arg("a command needs at least one word"));
        }
        let mut prev_end = 0usize;
        for (i, w) in words.iter().enumerate() {
            if w.start >= w.end {
                return Err(Error::arg(format!("word {i}: empty span")));
            }
            if w.start < prev_end && i > 0 {
                return Err(Error::arg(format!("word {i}: spans overlap or not ascending")));
            }
            if w.end > signal.len() {
                return Err(Error::Input(format!(
                    "word {i}: span end {} beyond signal length {}",
                    w.end,
                    signal.len()
                )));
            }
            prev_end = w.end;
        }
        Ok(Self { signal, words })
    }

    /// Resample the waveform and rescale the word spans to match.
    pub fn resampled(&self, target_rate: f64) -> Result<Self> {
        if target_rate == self.signal.sample_rate() {
            return Ok(self.clone());
        }
        let signal = resample::resample(&self.signal, target_rate)?;
        let ratio = target_rate / self.signal.sample_rate();
        let n = signal.len();
        let words = self
            .words
            .iter()
            .map(|w| WordSpan {
                start: ((w.start as f64 * ratio).round() as usize).min(n.saturating_sub(1)),
                end: ((w.end as f64 * ratio).round() as usize).min(n),
                label: w.label.clone(),
            })
            .collect();
        Self::new(signal, words)
    }
}

/// Attack class and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttackKind {
    /// Voice command amplitude-modulated onto an ultrasonic carrier.
    Inaudible { carrier_hz: f64, mod_index: f64 },
    /// Band-limited perturbation added to the clean command.
    Adversarial {
        band_lo_hz: f64,
        band_hi_hz: f64,
        snr_db: f64,
    },
    /// The unmodified command.
    Clean,
}

/// Declarative attack description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Linear amplitude scale applied at playback.
    pub level: f64,
}

impl AttackSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0) {
            return Err(Error::arg(format!("level must be positive, got {}", self.level)));
        }
        match &self.kind {
            AttackKind::Inaudible { carrier_hz, mod_index } => {
                if !(16_000.0..=40_000.0).contains(carrier_hz) {
                    return Err(Error::arg(format!(
                        "carrier {carrier_hz} Hz outside the 16-40 kHz attack range"
                    )));
                }
                if !(*mod_index > 0.0 && *mod_index <= 1.0) {
                    return Err(Error::arg(format!("mod_index must be in (0, 1], got {mod_index}")));
                }
            }
            AttackKind::Adversarial { band_lo_hz, band_hi_hz, snr_db } => {
                if !(band_lo_hz < band_hi_hz) || *band_lo_hz < 0.0 {
                    return Err(Error::arg(format!("bad band [{band_lo_hz}, {band_hi_hz}]")));
                }
                if *snr_db < 10.0 {
                    return Err(Error::arg(format!(
                        "perturbation SNR {snr_db} dB below the 10 dB small-perturbation regime"
                    )));
                }
            }
            AttackKind::Clean => {}
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            AttackKind::Inaudible { .. } => "inaudible",
            AttackKind::Adversarial { .. } => "adversarial",
            AttackKind::Clean => "clean",
        }
    }
}

/// Second-order microphone front-end model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrophoneModel {
    /// Linear gain.
    pub a1: f64,
    /// Quadratic coefficient (1/amplitude).
    pub a2: f64,
    /// Anti-alias / audio-chain low-pass cutoff, Hz.
    pub lowpass_cutoff: f64,
    /// White-noise RMS relative to unit amplitude, dB.
    pub noise_floor_db: f64,
}

impl Default for MicrophoneModel {
    fn default() -> Self {
        Self {
            a1: 1.0,
            a2: 0.5,
            lowpass_cutoff: 20_000.0,
            noise_floor_db: -60.0,
        }
    }
}

impl MicrophoneModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.a1 > 0.0) || self.a2 < 0.0 {
            return Err(Error::arg("microphone gains out of range"));
        }
        if !(self.lowpass_cutoff > 0.0) {
            return Err(Error::arg("low-pass cutoff must be positive"));
        }
        Ok(())
    }
}

/// FNV-1a, used to derive stable per-word phases from label text.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Synthesize a multi-word command: per word a 300 ms burst of formant-proxy
/// tones (500 Hz, 1500 Hz) plus a faint 2.5-3.5 kHz consonant chirp, with
/// 100 ms silences in between. Deterministic: label text sets the phases.
pub fn synth_command(labels: &[String], sample_rate: f64) -> Result<CommandSignal> {
    if labels.is_empty() {
        return Err(Error::arg("need at least one word label"));
    }
    if sample_rate < 16_000.0 {
        return Err(Error::arg(format!(
            "sample rate {sample_rate} Hz too low for speech synthesis (min 16 kHz)"
        )));
    }
    let word_len = (WORD_SECS * sample_rate).round() as usize;
    let gap_len = (GAP_SECS * sample_rate).round() as usize;
    let edge_len = (EDGE_SECS * sample_rate).round() as usize;
    let total = labels.len() * word_len + (labels.len() - 1) * gap_len;
    let mut samples = vec![0.0f64; total];
    let mut words = Vec::with_capacity(labels.len());

    for (w, label) in labels.iter().enumerate() {
        let start = w * (word_len + gap_len);
        let hash = fnv1a(label.as_bytes());
        let phase = |shift: u32| -> f64 {
            let bits = (hash >> shift) & 0xffff;
            bits as f64 / 65536.0 * std::f64::consts::TAU
        };
        let (p1, p2, p3) = (phase(0), phase(16), phase(32));
        for i in 0..word_len {
            let t = i as f64 / sample_rate;
            let env = if i < edge_len {
                0.5 * (1.0 - (std::f64::consts::PI * (edge_len - i) as f64 / edge_len as f64).cos())
            } else if i >= word_len - edge_len {
                let d = word_len - 1 - i;
                0.5 * (1.0 - (std::f64::consts::PI * (edge_len - d) as f64 / edge_len as f64).cos())
            } else {
                1.0
            };
            // Linear chirp across the word.
            let frac = i as f64 / word_len as f64;
            let chirp_f = CHIRP_LO + (CHIRP_HI - CHIRP_LO) * frac / 2.0;
            let s = F1_AMP * (std::f64::consts::TAU * F1_HZ * t + p1).sin()
                + F2_AMP * (std::f64::consts::TAU * F2_HZ * t + p2).sin()
                + CHIRP_AMP * (std::f64::consts::TAU * chirp_f * t + p3).sin();
            samples[start + i] = env * s;
        }
        words.push(WordSpan {
            start,
            end: start + word_len,
            label: label.clone(),
        });
    }
    CommandSignal::new(Signal::new(sample_rate, samples)?, words)
}

/// Load a command from a WAV file plus an optional span sidecar
/// (`[{start, end, label}]` JSON). Without the sidecar the whole file
/// becomes a single word.
pub fn ingest_command(wav_path: &Path, spans_path: Option<&Path>) -> Result<CommandSignal> {
    let signal = wav::read_wav(wav_path)?;
    let words = match spans_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str::<Vec<WordSpan>>(&text)
                .map_err(|e| Error::Input(format!("span sidecar: {e}")))?
        }
        None => vec![WordSpan {
            start: 0,
            end: signal.len(),
            label: "command".into(),
        }],
    };
    CommandSignal::new(signal, words)
}

/// Write a command's waveform and span sidecar.
pub fn write_command(cmd: &CommandSignal, wav_path: &Path) -> Result<()> {
    wav::write_wav(&cmd.signal, wav::WavFormat::Float32, wav_path)?;
    let spans = serde_json::to_string_pretty(&cmd.words).map_err(|e| Error::Input(e.to_string()))?;
    std::fs::write(wav_path.with_extension("spans.json"), spans)?;
    Ok(())
}

/// Amplitude-modulate the command onto an ultrasonic carrier:
/// `s(t) = level (1 + m x(t)) cos(2 pi f_c t)` with the command normalized
/// to unit peak. The output rate is raised to at least 2.5x the carrier.
pub fn modulate_inaudible(
    cmd: &CommandSignal,
    carrier_hz: f64,
    mod_index: f64,
    level: f64,
) -> Result<Signal> {
    if !(16_000.0..=40_000.0).contains(&carrier_hz) {
        return Err(Error::arg(format!(
            "carrier {carrier_hz} Hz outside the 16-40 kHz attack range"
        )));
    }
    if !(mod_index > 0.0 && mod_index <= 1.0) {
        return Err(Error::arg(format!("mod_index must be in (0, 1], got {mod_index}")));
    }
    let target_rate = (2.5 * carrier_hz).max(cmd.signal.sample_rate()).ceil();
    let upsampled = resample::resample(&cmd.signal, target_rate)?;
    let peak = upsampled
        .samples()
        .iter()
        .fold(0.0f64, |a, &b| a.max(b.abs()))
        .max(f64::MIN_POSITIVE);
    let rate = upsampled.sample_rate();
    let samples = upsampled
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let t = i as f64 / rate;
            level * (1.0 + mod_index * x / peak) * (std::f64::consts::TAU * carrier_hz * t).cos()
        })
        .collect();
    Signal::new(rate, samples)
}

/// Microphone capture: quadratic nonlinearity, linear-phase low-pass
/// (>= 60 dB stopband), seeded white noise at the floor RMS, and a final
/// downsample to 48 kHz when the input runs faster.
pub fn mic_capture(input: &Signal, mic: &MicrophoneModel, seed: u64) -> Result<Signal> {
    mic.validate()?;
    let rate = input.sample_rate();
    let distorted: Vec<f64> = input
        .samples()
        .iter()
        .map(|&x| mic.a1 * x + mic.a2 * x * x)
        .collect();

    let nyquist = rate / 2.0;
    let cutoff = mic.lowpass_cutoff.min(0.95 * nyquist);
    let filtered = if cutoff < 0.95 * nyquist {
        let taps = fir::lowpass_taps(rate, cutoff, 0.1 * cutoff, 60.0);
        fir::filter_same(&distorted, &taps)
    } else {
        distorted
    };

    // Uniform white noise scaled to the floor RMS.
    let sigma = 10f64.powf(mic.noise_floor_db / 20.0);
    let half_width = sigma * 3f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy: Vec<f64> = filtered
        .iter()
        .map(|&x| x + rng.gen_range(-half_width..half_width))
        .collect();
    let captured = Signal::new(rate, noisy)?;

    if rate > CAPTURE_RATE {
        resample::resample(&captured, CAPTURE_RATE)
    } else {
        Ok(captured)
    }
}

/// Add a band-limited seeded perturbation at the requested SNR
/// (`10 log10(P_clean / P_delta) = snr_db`). Spans are preserved.
pub fn inject_adversarial(
    clean: &CommandSignal,
    band_lo: f64,
    band_hi: f64,
    snr_db: f64,
    seed: u64,
) -> Result<CommandSignal> {
    let nyq = clean.signal.nyquist();
    if !(band_lo >= 0.0 && band_lo < band_hi && band_hi <= nyq) {
        return Err(Error::arg(format!("band [{band_lo}, {band_hi}] outside [0, {nyq}]")));
    }
    if snr_db < 10.0 {
        return Err(Error::arg(format!(
            "perturbation SNR {snr_db} dB below the 10 dB small-perturbation regime"
        )));
    }
    let n = clean.signal.len();
    let rate = clean.signal.sample_rate();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Signal::new(rate, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let edge = ((band_hi - band_lo) * 0.05).min(100.0);
    let band_noise = spectral::bandpass(&noise, band_lo, band_hi, edge)?;
    let e_clean = clean.signal.energy();
    let e_delta = band_noise.energy();
    let scale = (e_clean / (e_delta * 10f64.powf(snr_db / 10.0))).sqrt();
    let samples = clean
        .signal
        .samples()
        .iter()
        .zip(band_noise.samples())
        .map(|(c, d)| c + scale * d)
        .collect();
    CommandSignal::new(Signal::new(rate, samples)?, clean.words.clone())
}

/// One captured attack (or clean) trial with its aligned clean reference.
#[derive(Debug, Clone, PartialEq)]
pub struct CapturedTrial {
    pub spec: AttackSpec,
    pub seed: u64,
    pub captured: Signal,
    pub reference: CommandSignal,
}

/// Run one attack through the optional defense and the microphone.
///
/// Clean/adversarial playback is scaled by `spec.level`, filtered by the
/// defense response when given, and captured; inaudible attacks are
/// modulated first. The reference is always the clean command resampled to
/// the captured rate.
pub fn run_attack(
    spec: &AttackSpec,
    cmd: &CommandSignal,
    defense: Option<&FrequencyResponse>,
    mic: &MicrophoneModel,
    seed: u64,
) -> Result<CapturedTrial> {
    spec.validate()?;
    let scaled = |sig: &Signal| -> Result<Signal> {
        Signal::new(
            sig.sample_rate(),
            sig.samples().iter().map(|s| s * spec.level).collect(),
        )
    };
    let stimulus = match &spec.kind {
        AttackKind::Clean => scaled(&cmd.signal)?,
        AttackKind::Adversarial { band_lo_hz, band_hi_hz, snr_db } => {
            let adv = inject_adversarial(cmd, *band_lo_hz, *band_hi_hz, *snr_db, seed)?;
            scaled(&adv.signal)?
        }
        AttackKind::Inaudible { carrier_hz, mod_index } => {
            modulate_inaudible(cmd, *carrier_hz, *mod_index, spec.level)?
        }
    };
    let defended = match defense {
        Some(resp) => spectral::apply_response(&stimulus, resp),
        None => stimulus,
    };
    let captured = mic_capture(&defended, mic, seed)?;
    let reference = cmd.resampled(captured.sample_rate())?;
    Ok(CapturedTrial {
        spec: spec.clone(),
        seed,
        captured,
        reference,
    })
}

/// Run a batch of seeded trials; trials are independent and evaluated
/// data-parallel, with output order matching input order.
pub fn run_trials(
    specs: &[(AttackSpec, u64)],
    cmd: &CommandSignal,
    defense: Option<&FrequencyResponse>,
    mic: &MicrophoneModel,
) -> Result<Vec<CapturedTrial>> {
    let results = crate::exec::map_collect(specs, |(spec, seed)| {
        run_attack(spec, cmd, defense, mic, *seed)
    });
    results.into_iter().collect()
}
