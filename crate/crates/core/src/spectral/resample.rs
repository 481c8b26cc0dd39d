//! Polyphase rational-ratio resampling (windowed-sinc, Kaiser design).

use crate::error::{Error, Result};
use crate::spectral::{fir, Signal};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Resample `sig` to `target_rate`.
///
/// Rates are treated as integer Hz; the rational ratio L/M is reduced and the
/// signal is upsampled by L, filtered by a single Kaiser-windowed sinc
/// anti-aliasing low-pass (>= 80 dB stopband), and decimated by M. Output
/// length is `ceil(n * L / M)`.
pub fn resample(sig: &Signal, target_rate: f64) -> Result<Signal> {
    let from = sig.sample_rate().round() as u64;
    let to = target_rate.round() as u64;
    if from == 0 || to == 0 {
        return Err(Error::arg("rates must be positive integers"));
    }
    if from == to {
        return Ok(sig.clone());
    }
    let g = gcd(from, to);
    let (l, m) = ((to / g) as usize, (from / g) as usize);
    if l > 4096 || m > 4096 {
        return Err(Error::arg(format!(
            "resample ratio {to}/{from} reduces to {l}/{m}; too fine to realize"
        )));
    }

    let interm_rate = sig.sample_rate() * l as f64;
    // Cut at the smaller of the two Nyquists, with a 10% guard band.
    let cutoff = 0.45 * sig.sample_rate().min(target_rate);
    let transition = 0.1 * cutoff;
    let taps = fir::lowpass_taps(interm_rate, cutoff, transition, 80.0);
    let delay = (taps.len() - 1) / 2;

    let n_in = sig.len();
    let n_out = (n_in * l).div_ceil(m);
    let x = sig.samples();
    let mut out = Vec::with_capacity(n_out);
    // Polyphase evaluation: output sample j sits at intermediate index j*m;
    // only every l-th tap hits a real input sample.
    for j in 0..n_out {
        let center = j * m + delay;
        let phase_offset = center % l;
        let mut acc = 0.0;
        let mut t = phase_offset;
        while t < taps.len() {
            let interm_index = center - t;
            let k = interm_index / l;
            if k < n_in {
                acc += taps[t] * x[k];
            }
            t += l;
        }
        out.push(acc * l as f64);
    }
    Signal::new(target_rate, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(rate: f64, f: f64, secs: f64) -> Signal {
        let n = (rate * secs) as usize;
        Signal::new(
            rate,
            (0..n).map(|i| (2.0 * PI * f * i as f64 / rate).sin()).collect(),
        )
        .unwrap()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn upsample_preserves_tone() {
        let sig = tone(48000.0, 1000.0, 0.25);
        let up = resample(&sig, 100_000.0).unwrap();
        assert_eq!(up.sample_rate(), 100_000.0);
        // Interior RMS within 0.5% of 1/sqrt(2).
        let inner = &up.samples()[2000..up.len() - 2000];
        assert!((rms(inner) - (0.5f64).sqrt()).abs() < 0.005);
        // Dominant bin at 1 kHz.
        let e = crate::spectral::band_energy(&up, 900.0, 1100.0).unwrap();
        let tot = up.energy();
        assert!(e >= 0.98 * tot);
    }

    #[test]
    fn downsample_preserves_tone() {
        let sig = tone(100_000.0, 1000.0, 0.25);
        let down = resample(&sig, 48000.0).unwrap();
        let inner = &down.samples()[2000..down.len() - 2000];
        assert!((rms(inner) - (0.5f64).sqrt()).abs() < 0.005);
    }

    #[test]
    fn downsample_removes_out_of_band_content() {
        let rate = 100_000.0;
        let n = 25_000;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / rate;
                (2.0 * PI * 1000.0 * t).sin() + (2.0 * PI * 40_000.0 * t).sin()
            })
            .collect();
        let sig = Signal::new(rate, samples).unwrap();
        let down = resample(&sig, 48000.0).unwrap();
        // 40 kHz would alias to 8 kHz at 48 kHz rate; it must be gone.
        let aliased = crate::spectral::band_energy(&down, 7500.0, 8500.0).unwrap();
        let kept = crate::spectral::band_energy(&down, 900.0, 1100.0).unwrap();
        assert!(aliased <= 1e-6 * kept, "alias leak {aliased:e} vs {kept:e}");
    }

    #[test]
    fn identity_when_rates_match() {
        let sig = tone(48000.0, 500.0, 0.1);
        let same = resample(&sig, 48000.0).unwrap();
        assert_eq!(sig.samples(), same.samples());
    }
}
