//! Core signal and frequency-response types with FFT-based filtering,
//! composition, and band-energy analysis.

pub mod fir;
pub mod resample;
pub mod wav;


use std::path::Path;
use std::sync::Mutex;

use num_complex::Complex64;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

/// A uniformly sampled real-valued waveform.
///
/// Invariants (enforced on construction): positive sample rate, at least one
/// sample, every sample finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    sample_rate: f64,
    samples: Vec<f64>,
}

impl Signal {
    pub fn new(sample_rate: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::arg(format!("sample_rate must be positive, got {sample_rate}")));
        }
        if samples.is_empty() {
            return Err(Error::arg("signal must contain at least one sample"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::arg(format!("non-finite sample at index {i}")));
        }
        Ok(Self { sample_rate, samples })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by invariant
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate / 2.0
    }

    /// Total time-domain energy, `sum(x[n]^2)`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// How [`make_grid`] spaces its points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridSpacing {
    Linear,
    Log,
}

/// Complex gain sampled on a strictly ascending frequency grid.
///
/// Evaluation between grid points interpolates linearly in the complex value;
/// evaluation outside the grid span returns unity gain, so band-limited models
/// compose into full-range device responses without padding bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    freqs: Vec<f64>,
    values: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn new(freqs: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != values.len() {
            return Err(Error::arg(format!(
                "{} frequencies but {} values",
                freqs.len(),
                values.len()
            )));
        }
        if freqs.is_empty() {
            return Err(Error::arg("response needs at least one grid point"));
        }
        if freqs[0] < 0.0 {
            return Err(Error::arg("frequencies must be non-negative"));
        }
        if freqs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::arg("frequency grid must be strictly ascending"));
        }
        if freqs.iter().any(|f| !f.is_finite())
            || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::arg("response contains non-finite entries"));
        }
        Ok(Self { freqs, values })
    }

    /// Response with real-valued gain at every grid point.
    pub fn from_real(freqs: Vec<f64>, gains: Vec<f64>) -> Result<Self> {
        let values = gains.into_iter().map(|g| Complex64::new(g, 0.0)).collect();
        Self::new(freqs, values)
    }

    /// The identity (unity-gain) response on a minimal grid.
    pub fn identity() -> Self {
        Self {
            freqs: vec![0.0, 1.0],
            values: vec![Complex64::new(1.0, 0.0); 2],
        }
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Serialize as CSV with header `f_hz,re,im`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "f_hz,re,im")?;
        for (f, v) in self.freqs.iter().zip(&self.values) {
            writeln!(w, "{f},{},{}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn to_csv_path(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        self.write_csv(&mut file)?;
        Ok(())
    }

    /// Parse the `f_hz,re,im` CSV format written by [`Self::write_csv`].
    pub fn read_csv<R: std::io::BufRead>(r: R) -> Result<Self> {
        let mut freqs = Vec::new();
        let mut values = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line.trim() != "f_hz,re,im" {
                    return Err(Error::Input(format!("unexpected CSV header: {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut field = |name: &str| -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::Input(format!("line {}: missing {name}", i + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("line {}: {name}: {e}", i + 1)))
            };
            let f = field("f_hz")?;
            let re = field("re")?;
            let im = field("im")?;
            freqs.push(f);
            values.push(Complex64::new(re, im));
        }
        Self::new(freqs, values)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let resp: Self = serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
        // Re-validate: serde bypasses the constructor.
        Self::new(resp.freqs, resp.values)
    }
}

/// Build a frequency grid of `n_points` values spanning `[f_min, f_max]`.
///
/// Log spacing requires `f_min > 0`.
pub fn make_grid(f_min: f64, f_max: f64, n_points: usize, spacing: GridSpacing) -> Result<Vec<f64>> {
    if !(f_min >= 0.0) || !(f_min < f_max) {
        return Err(Error::arg(format!(
            "need 0 <= f_min < f_max, got [{f_min}, {f_max}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::arg("grid needs at least 2 points"));
    }
    let n = n_points as f64;
    let grid = match spacing {
        GridSpacing::Linear => (0..n_points)
            .map(|i| f_min + (f_max - f_min) * i as f64 / (n - 1.0))
            .collect::<Vec<_>>(),
        GridSpacing::Log => {
            if f_min <= 0.0 {
                return Err(Error::arg("log spacing requires f_min > 0"));
            }
            let (a, b) = (f_min.ln(), f_max.ln());
            (0..n_points)
                .map(|i| (a + (b - a) * i as f64 / (n - 1.0)).exp())
                .collect()
        }
    };
    Ok(grid)
}

/// Interpolate `resp` at frequency `f`.
///
/// Linear interpolation in the complex value between bracketing grid points;
/// unity gain outside the grid span.
pub fn evaluate_response(resp: &FrequencyResponse, f: f64) -> Result<Complex64> {
    if !(f >= 0.0) {
        return Err(Error::arg(format!("frequency must be non-negative, got {f}")));
    }
    Ok(evaluate_unchecked(resp, f))
}

#[inline]
fn evaluate_unchecked(resp: &FrequencyResponse, f: f64) -> Complex64 {
    let freqs = &resp.freqs;
    if f < freqs[0] || f > *freqs.last().unwrap() {
        return Complex64::new(1.0, 0.0);
    }
    match freqs.binary_search_by(|g| g.partial_cmp(&f).unwrap()) {
        Ok(i) => resp.values[i],
        Err(i) => {
            // freqs[i-1] < f < freqs[i]; i >= 1 because f >= freqs[0].
            let (f0, f1) = (freqs[i - 1], freqs[i]);
            let t = (f - f0) / (f1 - f0);
            resp.values[i - 1] * (1.0 - t) + resp.values[i] * t
        }
    }
}

fn fft_forward(buf: &mut [Complex<f64>]) {
    // FftPlanner caches plans internally; a fresh planner per call would
    // re-derive twiddles for every signal length.
    static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);
    let mut guard = PLANNER.lock().unwrap();
    let planner = guard.get_or_insert_with(FftPlanner::new);
    planner.plan_fft_forward(buf.len()).process(buf);
}

fn fft_inverse(buf: &mut [Complex<f64>]) {
    static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);
    let mut guard = PLANNER.lock().unwrap();
    let planner = guard.get_or_insert_with(FftPlanner::new);
    planner.plan_fft_inverse(buf.len()).process(buf);
}

/// Filter `sig` through `resp` in the frequency domain.
///
/// The spectrum is multiplied by the interpolated response and symmetrized
/// (negative-frequency bins take the conjugate of positive-frequency bins) so
/// the output is exactly real. Zero-phase, length- and rate-preserving.
pub fn apply_response(sig: &Signal, resp: &FrequencyResponse) -> Signal {
    let n = sig.len();
    let mut buf: Vec<Complex<f64>> = sig
        .samples
        .iter()
        .map(|&s| Complex::new(s, 0.0))
        .collect();
    fft_forward(&mut buf);

    let df = sig.sample_rate / n as f64;
    let half = n / 2;
    // Gains for bins 0..=half, evaluated in parallel for long signals.
    let bins: Vec<usize> = (0..=half).collect();
    let gains = exec::map_collect(&bins, |&k| evaluate_unchecked(resp, k as f64 * df));

    buf[0] *= gains[0];
    for k in 1..=half {
        buf[k] *= gains[k];
        if k != n - k {
            // Mirror bin: conjugate symmetry keeps the inverse transform real.
            buf[n - k] = buf[k].conj();
        }
    }
    if n % 2 == 0 {
        // Nyquist bin of a real signal must stay real.
        buf[half] = Complex::new(buf[half].re, 0.0);
    }

    fft_inverse(&mut buf);
    let scale = 1.0 / n as f64;
    let samples: Vec<f64> = buf.iter().map(|c| c.re * scale).collect();
    Signal {
        sample_rate: sig.sample_rate,
        samples,
    }
}

/// Pointwise product of two responses, evaluated on the union of both grids.
pub fn compose(a: &FrequencyResponse, b: &FrequencyResponse) -> FrequencyResponse {
    let mut grid: Vec<f64> = Vec::with_capacity(a.freqs.len() + b.freqs.len());
    let (mut i, mut j) = (0, 0);
    while i < a.freqs.len() || j < b.freqs.len() {
        let next = match (a.freqs.get(i), b.freqs.get(j)) {
            (Some(&fa), Some(&fb)) if fa < fb => {
                i += 1;
                fa
            }
            (Some(&fa), Some(&fb)) if fb < fa => {
                j += 1;
                fb
            }
            (Some(&fa), Some(_)) => {
                i += 1;
                j += 1;
                fa
            }
            (Some(&fa), None) => {
                i += 1;
                fa
            }
            (None, Some(&fb)) => {
                j += 1;
                fb
            }
            (None, None) => unreachable!(),
        };
        grid.push(next);
    }
    let values = grid
        .iter()
        .map(|&f| evaluate_unchecked(a, f) * evaluate_unchecked(b, f))
        .collect();
    FrequencyResponse {
        freqs: grid,
        values,
    }
}

/// Energy of `sig` within `[f_lo, f_hi]`, Parseval-consistent with
/// [`Signal::energy`]: the full band `[0, nyquist]` recovers the time-domain
/// energy to within rounding.
pub fn band_energy(sig: &Signal, f_lo: f64, f_hi: f64) -> Result<f64> {
    let nyq = sig.nyquist();
    if !(f_lo >= 0.0 && f_lo < f_hi && f_hi <= nyq) {
        return Err(Error::arg(format!(
            "band [{f_lo}, {f_hi}] outside [0, {nyq}]"
        )));
    }
    let n = sig.len();
    let mut buf: Vec<Complex<f64>> = sig
        .samples
        .iter()
        .map(|&s| Complex::new(s, 0.0))
        .collect();
    fft_forward(&mut buf);
    let df = sig.sample_rate / n as f64;
    let half = n / 2;
    let mut energy = 0.0;
    for (k, c) in buf.iter().enumerate().take(half + 1) {
        let f = k as f64 * df;
        if f < f_lo || f > f_hi {
            continue;
        }
        let p = c.norm_sqr() / n as f64;
        // One-sided spectrum: interior bins carry their mirror's share too.
        let two_sided = k != 0 && !(n % 2 == 0 && k == half);
        energy += if two_sided { 2.0 * p } else { p };
    }
    Ok(energy)
}

/// Magnitude spectrum sampled at the FFT bin frequencies, `(freqs, |X_k|)`,
/// one-sided. Used by the metrics module for sub-band comparisons.
pub(crate) fn power_bins(samples: &[f64], sample_rate: f64) -> (f64, Vec<f64>) {
    let n = samples.len();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s, 0.0)).collect();
    fft_forward(&mut buf);
    let half = n / 2;
    let df = sample_rate / n as f64;
    let powers = buf
        .iter()
        .take(half + 1)
        .enumerate()
        .map(|(k, c)| {
            let two_sided = k != 0 && !(n % 2 == 0 && k == half);
            c.norm_sqr() / n as f64 * if two_sided { 2.0 } else { 1.0 }
        })
        .collect();
    (df, powers)
}

/// Zero-phase band-pass via the FFT with raised-cosine edges of width
/// `edge_hz`. Bins below `f_lo - edge` and above `f_hi + edge` are zeroed.
pub fn bandpass(sig: &Signal, f_lo: f64, f_hi: f64, edge_hz: f64) -> Result<Signal> {
    if !(f_lo >= 0.0 && f_lo < f_hi) {
        return Err(Error::arg(format!("bad band [{f_lo}, {f_hi}]")));
    }
    let taper = |f: f64| -> f64 {
        let rise = if f < f_lo {
            let d = (f_lo - f) / edge_hz;
            if d >= 1.0 {
                0.0
            } else {
                0.5 * (1.0 + (std::f64::consts::PI * d).cos())
            }
        } else {
            1.0
        };
        let fall = if f > f_hi {
            let d = (f - f_hi) / edge_hz;
            if d >= 1.0 {
                0.0
            } else {
                0.5 * (1.0 + (std::f64::consts::PI * d).cos())
            }
        } else {
            1.0
        };
        rise * fall
    };
    // Dense mask grid: fine enough that linear interpolation is exact at the
    // scale of the cosine edge.
    let nyq = sig.nyquist();
    let step = (edge_hz / 8.0).max(nyq / 16384.0);
    let mut freqs = Vec::new();
    let mut f = 0.0;
    while f < nyq {
        freqs.push(f);
        f += step;
    }
    freqs.push(nyq);
    let gains: Vec<f64> = freqs.iter().map(|&f| taper(f)).collect();
    let resp = FrequencyResponse::from_real(freqs, gains).expect("mask grid is ascending");
    Ok(apply_response(sig, &resp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine(rate: f64, f: f64, n: usize) -> Signal {
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / rate).sin())
            .collect();
        Signal::new(rate, samples).unwrap()
    }

    #[test]
    fn signal_invariants_enforced() {
        assert!(Signal::new(0.0, vec![1.0]).is_err());
        assert!(Signal::new(-48e3, vec![1.0]).is_err());
        assert!(Signal::new(48e3, vec![]).is_err());
        assert!(Signal::new(48e3, vec![f64::NAN]).is_err());
        assert!(Signal::new(48e3, vec![f64::INFINITY]).is_err());
        assert!(Signal::new(48e3, vec![0.0]).is_ok());
    }

    #[test]
    fn grid_linear_midpoint() {
        let g = make_grid(16000.0, 40000.0, 3, GridSpacing::Linear).unwrap();
        assert_eq!(g, vec![16000.0, 28000.0, 40000.0]);
    }

    #[test]
    fn grid_empty_interval_rejected() {
        assert!(make_grid(100.0, 100.0, 10, GridSpacing::Linear).is_err());
        assert!(make_grid(200.0, 100.0, 10, GridSpacing::Linear).is_err());
    }

    #[test]
    fn grid_exact_step() {
        let g = make_grid(0.0, 24000.0, 481, GridSpacing::Linear).unwrap();
        for (i, f) in g.iter().enumerate() {
            assert_eq!(*f, i as f64 * 50.0, "bin {i}");
        }
    }

    #[test]
    fn grid_log_ascending() {
        let g = make_grid(100.0, 10000.0, 33, GridSpacing::Log).unwrap();
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_relative_eq!(g[0], 100.0, max_relative = 1e-12);
        assert_relative_eq!(g[32], 10000.0, max_relative = 1e-12);
        assert!(make_grid(0.0, 100.0, 4, GridSpacing::Log).is_err());
    }

    #[test]
    fn evaluate_midpoint_interpolation() {
        let r = FrequencyResponse::from_real(vec![1000.0, 2000.0], vec![0.2, 0.4]).unwrap();
        let v = evaluate_response(&r, 1500.0).unwrap();
        assert_abs_diff_eq!(v.re, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn evaluate_outside_span_is_unity() {
        let r = FrequencyResponse::from_real(vec![1000.0, 2000.0], vec![0.2, 0.4]).unwrap();
        assert_eq!(evaluate_response(&r, 50.0).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(evaluate_response(&r, 5000.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn evaluate_on_grid_point_returns_stored() {
        let r = FrequencyResponse::new(
            vec![1000.0, 2000.0],
            vec![Complex64::new(0.2, 0.1), Complex64::new(0.4, -0.3)],
        )
        .unwrap();
        assert_eq!(evaluate_response(&r, 2000.0).unwrap(), Complex64::new(0.4, -0.3));
    }

    #[test]
    fn evaluate_negative_frequency_rejected() {
        let r = FrequencyResponse::identity();
        assert!(evaluate_response(&r, -1.0).is_err());
    }

    #[test]
    fn response_grid_must_ascend() {
        assert!(FrequencyResponse::from_real(vec![2000.0, 1000.0], vec![1.0, 1.0]).is_err());
        assert!(FrequencyResponse::from_real(vec![1000.0, 1000.0], vec![1.0, 1.0]).is_err());
        assert!(FrequencyResponse::from_real(vec![-5.0, 1000.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn apply_identity_response() {
        let sig = sine(48000.0, 1000.0, 4800);
        let out = apply_response(&sig, &FrequencyResponse::identity());
        for (a, b) in sig.samples().iter().zip(out.samples()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        assert_relative_eq!(sig.energy(), out.energy(), max_relative = 1e-9);
    }

    #[test]
    fn apply_scalar_gain_halves_amplitude() {
        let sig = sine(48000.0, 1000.0, 4800);
        let r = FrequencyResponse::from_real(vec![0.0, 24000.0], vec![0.5, 0.5]).unwrap();
        let out = apply_response(&sig, &r);
        let peak_in = sig.samples().iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        let peak_out = out.samples().iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        assert_relative_eq!(peak_out, 0.5 * peak_in, max_relative = 1e-6);
    }

    #[test]
    fn apply_narrow_notch_kills_tone() {
        // 1 kHz sine, notch of zero gain over 1 kHz += 50 Hz. Residual band
        // energy must fall at least 40 dB below the input's.
        let sig = sine(48000.0, 1000.0, 48000); // integer number of periods
        let freqs = vec![0.0, 949.999, 950.0, 1050.0, 1050.001, 24000.0];
        let gains = vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0];
        let r = FrequencyResponse::from_real(freqs, gains).unwrap();
        let out = apply_response(&sig, &r);
        let e_in = band_energy(&sig, 900.0, 1100.0).unwrap();
        let e_out = band_energy(&out, 900.0, 1100.0).unwrap();
        assert!(
            e_out <= 1e-4 * e_in,
            "residual {:.2} dB",
            10.0 * (e_out / e_in).log10()
        );
    }

    #[test]
    fn apply_is_linear() {
        let rate = 48000.0;
        let n = 4096;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = Signal::new(rate, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let y = Signal::new(rate, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let (a, b) = (0.7, -1.3);
        let r = FrequencyResponse::from_real(
            vec![0.0, 6000.0, 12000.0, 24000.0],
            vec![1.0, 0.4, 0.9, 0.1],
        )
        .unwrap();
        let combined = Signal::new(
            rate,
            x.samples()
                .iter()
                .zip(y.samples())
                .map(|(xs, ys)| a * xs + b * ys)
                .collect(),
        )
        .unwrap();
        let lhs = apply_response(&combined, &r);
        let fx = apply_response(&x, &r);
        let fy = apply_response(&y, &r);
        for i in 0..n {
            let rhs = a * fx.samples()[i] + b * fy.samples()[i];
            assert_abs_diff_eq!(lhs.samples()[i], rhs, epsilon = 1e-9);
        }
    }

    #[test]
    fn apply_passive_response_never_gains_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let n = 2048 + 64 * trial;
            let sig = Signal::new(
                48000.0,
                (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let gains: Vec<f64> = (0..9).map(|_| rng.gen_range(0.0..1.0)).collect();
            let freqs = make_grid(0.0, 24000.0, 9, GridSpacing::Linear).unwrap();
            let r = FrequencyResponse::from_real(freqs, gains).unwrap();
            let out = apply_response(&sig, &r);
            assert!(
                out.energy() <= sig.energy() * (1.0 + 1e-12),
                "trial {trial}: {} > {}",
                out.energy(),
                sig.energy()
            );
        }
    }

    #[test]
    fn compose_with_identity() {
        let h = FrequencyResponse::from_real(vec![1000.0, 2000.0, 3000.0], vec![0.5, 0.25, 0.8])
            .unwrap();
        let c = compose(&h, &FrequencyResponse::identity());
        for &f in h.freqs() {
            let a = evaluate_response(&c, f).unwrap();
            let b = evaluate_response(&h, f).unwrap();
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn compose_commutes_pointwise() {
        let a = FrequencyResponse::new(
            vec![100.0, 1000.0, 5000.0],
            vec![
                Complex64::new(0.5, 0.2),
                Complex64::new(0.25, -0.4),
                Complex64::new(0.8, 0.0),
            ],
        )
        .unwrap();
        let b = FrequencyResponse::new(
            vec![50.0, 800.0, 2000.0, 9000.0],
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.3, 0.3),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.5),
            ],
        )
        .unwrap();
        let ab = compose(&a, &b);
        let ba = compose(&b, &a);
        for f in [10.0, 50.0, 137.0, 800.0, 1500.0, 2000.0, 7000.0, 9500.0] {
            let x = evaluate_response(&ab, f).unwrap();
            let y = evaluate_response(&ba, f).unwrap();
            assert!((x - y).norm() <= 1e-12, "f = {f}: {x} vs {y}");
        }
    }

    #[test]
    fn compose_is_associative_pointwise() {
        let mk = |fs: Vec<f64>, gs: Vec<f64>| FrequencyResponse::from_real(fs, gs).unwrap();
        let a = mk(vec![100.0, 1000.0], vec![0.5, 1.5]);
        let b = mk(vec![500.0, 2000.0], vec![0.2, 0.9]);
        let c = mk(vec![50.0, 2500.0], vec![1.1, 0.3]);
        let left = compose(&compose(&a, &b), &c);
        let right = compose(&a, &compose(&b, &c));
        for f in [10.0, 100.0, 700.0, 1800.0, 2600.0] {
            let x = evaluate_response(&left, f).unwrap();
            let y = evaluate_response(&right, f).unwrap();
            assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn compose_reciprocal_recovers_identity() {
        // Where |H| is well above zero, composing with the pointwise inverse
        // restores unity gain.
        let freqs = make_grid(100.0, 10000.0, 200, GridSpacing::Linear).unwrap();
        let gains: Vec<Complex64> = freqs
            .iter()
            .map(|f| Complex64::new(0.3 + (f / 3000.0).sin().abs(), 0.1))
            .collect();
        let h = FrequencyResponse::new(freqs.clone(), gains.clone()).unwrap();
        let inv = FrequencyResponse::new(freqs.clone(), gains.iter().map(|g| 1.0 / g).collect())
            .unwrap();
        let c = compose(&h, &inv);
        for &f in &freqs {
            let v = evaluate_response(&c, f).unwrap();
            assert!((v - Complex64::new(1.0, 0.0)).norm() <= 1e-6, "f = {f}: {v}");
        }
    }

    #[test]
    fn band_energy_pure_tone() {
        let sig = sine(48000.0, 1000.0, 48000);
        let total = sig.energy();
        let in_band = band_energy(&sig, 900.0, 1100.0).unwrap();
        let out_band = band_energy(&sig, 2000.0, 3000.0).unwrap();
        assert!(in_band >= 0.99 * total);
        assert!(out_band <= 1e-6 * total);
    }

    #[test]
    fn band_energy_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sig = Signal::new(
            48000.0,
            (0..4801).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let full = band_energy(&sig, 0.0, sig.nyquist()).unwrap();
        assert_relative_eq!(full, sig.energy(), max_relative = 1e-9);
    }

    #[test]
    fn band_energy_outside_nyquist_rejected() {
        let sig = sine(48000.0, 1000.0, 4800);
        assert!(band_energy(&sig, 1000.0, 25000.0).is_err());
        assert!(band_energy(&sig, -10.0, 1000.0).is_err());
        assert!(band_energy(&sig, 3000.0, 2000.0).is_err());
    }

    #[test]
    fn band_energy_white_noise_proportional_to_bandwidth() {
        // Statistical oracle: over 100 seeded trials the mean in-band share of
        // white noise tracks the bandwidth fraction within 10%.
        let mut ratios = Vec::new();
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sig = Signal::new(
                48000.0,
                (0..8192).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let e_band = band_energy(&sig, 3000.0, 9000.0).unwrap();
            let e_all = band_energy(&sig, 0.0, 24000.0).unwrap();
            ratios.push(e_band / e_all);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let expected = 6000.0 / 24000.0;
        assert!(
            (mean - expected).abs() <= 0.1 * expected,
            "mean share {mean:.4} vs expected {expected:.4}"
        );
    }

    #[test]
    fn csv_roundtrip() {
        let r = FrequencyResponse::new(
            vec![100.0, 250.5, 9000.0],
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, -0.25),
                Complex64::new(0.0, 2.0),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let parsed = FrequencyResponse::read_csv(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(r, parsed);
    }

    #[test]
    fn json_roundtrip() {
        let r = FrequencyResponse::from_real(vec![10.0, 20.0], vec![0.5, 2.0]).unwrap();
        let s = r.to_json().unwrap();
        assert_eq!(FrequencyResponse::from_json(&s).unwrap(), r);
    }

    #[test]
    fn bandpass_isolates_band() {
        let rate = 48000.0;
        let n = 48000;
        let lo = sine(rate, 500.0, n);
        let hi = sine(rate, 8000.0, n);
        let mixed = Signal::new(
            rate,
            lo.samples()
                .iter()
                .zip(hi.samples())
                .map(|(a, b)| a + b)
                .collect(),
        )
        .unwrap();
        let out = bandpass(&mixed, 100.0, 4000.0, 100.0).unwrap();
        let kept = band_energy(&out, 400.0, 600.0).unwrap();
        let removed = band_energy(&out, 7000.0, 9000.0).unwrap();
        assert!(kept >= 0.99 * band_energy(&mixed, 400.0, 600.0).unwrap());
        assert!(removed <= 1e-9 * kept);
    }
}
