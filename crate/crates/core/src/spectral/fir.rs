//! Kaiser-windowed linear-phase FIR design and delay-compensated filtering.

use std::f64::consts::PI;

/// Zeroth-order modified Bessel function of the first kind, by power series.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half_x = x / 2.0;
    for k in 1..64 {
        term *= (half_x / k as f64) * (half_x / k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Kaiser window parameters for a given stopband attenuation (dB) and
/// normalized transition width (fraction of the sample rate).
fn kaiser_params(atten_db: f64, transition: f64) -> (usize, f64) {
    let beta = if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    };
    let n = ((atten_db - 7.95) / (2.285 * 2.0 * PI * transition)).ceil() as usize;
    (n | 1, beta) // force odd length: integer group delay
}

/// Low-pass taps: cutoff in Hz, transition width in Hz, stopband in dB.
pub fn lowpass_taps(sample_rate: f64, cutoff: f64, transition: f64, atten_db: f64) -> Vec<f64> {
    let (n, beta) = kaiser_params(atten_db, transition / sample_rate);
    let m = (n - 1) as f64;
    let fc = cutoff / sample_rate; // normalized (cycles/sample)
    let i0b = bessel_i0(beta);
    (0..n)
        .map(|i| {
            let k = i as f64 - m / 2.0;
            let sinc = if k == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * k).sin() / (PI * k)
            };
            let t = 2.0 * i as f64 / m - 1.0;
            let window = bessel_i0(beta * (1.0 - t * t).max(0.0).sqrt()) / i0b;
            sinc * window
        })
        .collect()
}

/// Convolve and drop the group delay, so output sample `i` aligns with input
/// sample `i`. Output length equals input length.
pub fn filter_same(input: &[f64], taps: &[f64]) -> Vec<f64> {
    let delay = (taps.len() - 1) / 2;
    let n = input.len();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let center = i + delay;
        let mut acc = 0.0;
        for (j, &t) in taps.iter().enumerate() {
            if let Some(k) = center.checked_sub(j) {
                if k < n {
                    acc += t * input[k];
                }
            }
        }
        *o = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lowpass_passes_and_stops() {
        let rate = 48000.0;
        let taps = lowpass_taps(rate, 4000.0, 1000.0, 60.0);
        let n = 9600;
        let tone = |f: f64| -> Vec<f64> {
            (0..n).map(|i| (2.0 * PI * f * i as f64 / rate).sin()).collect()
        };
        let rms = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
        let passed = filter_same(&tone(1000.0), &taps);
        let stopped = filter_same(&tone(8000.0), &taps);
        // Trim edges where the convolution is still filling.
        let trim = taps.len();
        assert_relative_eq!(
            rms(&passed[trim..n - trim]),
            rms(&tone(1000.0)[trim..n - trim]),
            max_relative = 1e-2
        );
        let atten = 20.0 * (rms(&stopped[trim..n - trim]) / rms(&tone(8000.0)[trim..n - trim])).log10();
        assert!(atten <= -60.0, "stopband only {atten:.1} dB");
    }

    #[test]
    fn delay_compensation_aligns_output() {
        let rate = 48000.0;
        let taps = lowpass_taps(rate, 6000.0, 1500.0, 60.0);
        let n = 4800;
        let tone: Vec<f64> = (0..n).map(|i| (2.0 * PI * 500.0 * i as f64 / rate).sin()).collect();
        let out = filter_same(&tone, &taps);
        // Cross-correlate at zero lag only: alignment means same phase.
        let trim = taps.len();
        let dot: f64 = tone[trim..n - trim]
            .iter()
            .zip(&out[trim..n - trim])
            .map(|(a, b)| a * b)
            .sum();
        let na: f64 = tone[trim..n - trim].iter().map(|a| a * a).sum();
        let nb: f64 = out[trim..n - trim].iter().map(|b| b * b).sum();
        assert!(dot / (na * nb).sqrt() >= 0.9999);
    }
}
