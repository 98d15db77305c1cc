//! Linear-phase FIR low-pass design and zero-delay application.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ingest::EegSegment;

pub const DEFAULT_CUTOFF_HZ: f64 = 60.0;
pub const DEFAULT_TAPS: usize = 101;

/// Symmetric, odd-length FIR filter with unity DC gain.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    taps: Vec<f64>,
    cutoff_hz: f64,
    sample_rate: f64,
}

impl FirFilter {
    /// Wrap explicit coefficients. They must be odd in number and symmetric.
    pub fn from_taps(taps: Vec<f64>, cutoff_hz: f64, sample_rate: f64) -> Result<Self> {
        if taps.len().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "FIR tap count must be odd, got {}",
                taps.len()
            )));
        }
        let n = taps.len();
        for i in 0..n / 2 {
            let (a, b) = (taps[i], taps[n - 1 - i]);
            if (a - b).abs() > 1e-15 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::invalid("FIR taps must be symmetric"));
            }
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("FIR tap".into()));
        }
        Ok(Self {
            taps,
            cutoff_hz,
            sample_rate,
        })
    }

    pub fn identity(sample_rate: f64) -> Self {
        Self {
            taps: vec![1.0],
            cutoff_hz: sample_rate / 2.0,
            sample_rate,
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn cutoff_hz(&self) -> f64 {
        self.cutoff_hz
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn group_delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// `H(e^{jω}) = Σ taps[n]·e^{-jωn}` at `freq_hz`.
    pub fn frequency_response(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate;
        self.taps
            .iter()
            .enumerate()
            .map(|(n, &t)| Complex64::from_polar(t, -w * n as f64))
            .sum()
    }

    pub fn magnitude_db(&self, freq_hz: f64) -> f64 {
        20.0 * self.frequency_response(freq_hz).norm().log10()
    }
}

/// Hamming-windowed sinc low-pass, normalized so the taps sum to one.
pub fn design_lowpass_fir(cutoff_hz: f64, sample_rate: f64, num_taps: usize) -> Result<FirFilter> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0) {
        return Err(Error::invalid(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {}) Hz",
            sample_rate / 2.0
        )));
    }
    if num_taps < 3 || num_taps.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "tap count must be odd and at least 3, got {num_taps}"
        )));
    }

    let fc = cutoff_hz / sample_rate;
    let m = (num_taps - 1) as f64;
    let center = num_taps / 2;
    let mut taps: Vec<f64> = (0..num_taps)
        .map(|i| {
            // Signed offset from the center; mirrored pairs get bitwise-equal values.
            let k = i.abs_diff(center) as f64;
            let sinc = if k == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * k).sin() / (PI * k)
            };
            let window = 0.54 - 0.46 * (2.0 * PI * (center as f64 + k) / m).cos();
            sinc * window
        })
        .collect();

    // Sum the mirrored pairs first so normalization keeps exact symmetry.
    let sum: f64 = taps[center] + (0..center).map(|i| 2.0 * taps[i]).sum::<f64>();
    for t in &mut taps {
        *t /= sum;
    }
    Ok(FirFilter {
        taps,
        cutoff_hz,
        sample_rate,
    })
}

/// Filter `x` with symmetric (edge-repeating) reflection at both ends and
/// compensate the group delay, so the output is time-aligned with the input
/// and has the same length.
pub fn filter_samples(filter: &FirFilter, x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let taps = filter.taps();
    if n <= taps.len() {
        return Err(Error::TooShort {
            len: n,
            needed: format!("must exceed the filter length {}", taps.len()),
        });
    }
    let half = filter.group_delay();
    let mut padded = Vec::with_capacity(n + 2 * half);
    padded.extend((0..half).rev().map(|i| x[i]));
    padded.extend_from_slice(x);
    padded.extend((0..half).map(|i| x[n - 1 - i]));

    // The taps are symmetric, so correlation and convolution coincide.
    Ok((0..n)
        .map(|i| {
            taps.iter()
                .zip(&padded[i..i + taps.len()])
                .map(|(t, s)| t * s)
                .sum()
        })
        .collect())
}

pub fn apply_fir(filter: &FirFilter, segment: &EegSegment) -> Result<EegSegment> {
    segment.with_samples(filter_samples(filter, segment.samples())?)
}
