//! Discrete Fourier analysis and raw periodograms.
//!
//! The fast transform handles every length without zero-padding the
//! signal: powers of two go through an iterative radix-2 kernel and all
//! other lengths through Bluestein's chirp-z reformulation, whose internal
//! convolution is itself a power-of-two transform. Bin `k` therefore always
//! sits at `k * fs / N`.

// `!(a > b)` is deliberate: NaN has to fail the checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::EegSegment;

/// Complex DFT coefficients of a real segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    sample_rate: f64,
}

impl Spectrum {
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate / self.bins.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodogramPoint {
    pub frequency_hz: f64,
    pub power: f64,
}

/// Squared DFT magnitude at bins `1..=N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    points: Vec<PeriodogramPoint>,
    sample_rate: f64,
}

impl Periodogram {
    /// Build from explicit points. Frequencies must be strictly increasing
    /// and positive; powers nonnegative and finite.
    pub fn from_points(points: Vec<PeriodogramPoint>, sample_rate: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("periodogram has no points".into()));
        }
        for w in points.windows(2) {
            if !(w[1].frequency_hz > w[0].frequency_hz) {
                return Err(Error::invalid("periodogram frequencies must be strictly increasing"));
            }
        }
        if !(points[0].frequency_hz > 0.0) {
            return Err(Error::invalid("periodogram frequencies must be positive"));
        }
        if let Some(p) = points.iter().find(|p| !(p.power >= 0.0 && p.power.is_finite())) {
            return Err(Error::invalid(format!(
                "invalid power {} at {} Hz",
                p.power, p.frequency_hz
            )));
        }
        Ok(Self {
            points,
            sample_rate,
        })
    }

    pub fn points(&self) -> &[PeriodogramPoint] {
        &self.points
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate / 2.0
    }
}

/// Direct O(N²) evaluation of the DFT. Used as the reference for [`fft`].
pub fn dft_naive(segment: &EegSegment) -> Result<Spectrum> {
    Ok(Spectrum {
        bins: dft_naive_real(segment.samples())?,
        sample_rate: segment.sample_rate(),
    })
}

pub fn dft_naive_real(x: &[f64]) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Empty("DFT of an empty signal".into()));
    }
    // Reduce k*j mod n in integers so the twiddle angle stays in [0, 2π).
    let twiddles: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 / n as f64))
        .collect();
    Ok((0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &s)| twiddles[(k * j) % n] * s)
                .sum()
        })
        .collect())
}

pub fn fft(segment: &EegSegment) -> Result<Spectrum> {
    Ok(Spectrum {
        bins: fft_real(segment.samples())?,
        sample_rate: segment.sample_rate(),
    })
}

pub fn fft_real(x: &[f64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::Empty("FFT of an empty signal".into()));
    }
    let buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(transform(buf, Direction::Forward))
}

/// Forward DFT of a complex sequence of any nonzero length.
pub fn fft_complex(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::Empty("FFT of an empty signal".into()));
    }
    Ok(transform(x.to_vec(), Direction::Forward))
}

/// Inverse DFT, including the 1/N factor.
pub fn ifft_complex(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::Empty("inverse FFT of an empty signal".into()));
    }
    let n = x.len() as f64;
    let mut out = transform(x.to_vec(), Direction::Inverse);
    for v in &mut out {
        *v /= n;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

// Unnormalized transform in either direction.
fn transform(mut buf: Vec<Complex64>, dir: Direction) -> Vec<Complex64> {
    let n = buf.len();
    if n <= 1 {
        return buf;
    }
    if n.is_power_of_two() {
        radix2_in_place(&mut buf, dir);
        buf
    } else {
        bluestein(&buf, dir)
    }
}

fn radix2_in_place(buf: &mut [Complex64], dir: Direction) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();

    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    // Twiddles for the largest stage; smaller stages stride through them.
    let half = n / 2;
    let twiddles: Vec<Complex64> = (0..half)
        .map(|k| Complex64::from_polar(1.0, dir.sign() * 2.0 * PI * k as f64 / n as f64))
        .collect();

    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

fn bluestein(x: &[Complex64], dir: Direction) -> Vec<Complex64> {
    let n = x.len();
    let m = (2 * n - 1).next_power_of_two();

    // chirp[k] = exp(sign·iπ k²/n); k² is reduced mod 2n exactly in integers.
    let two_n = 2 * n as u128;
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k = k as u128;
            let r = (k * k % two_n) as f64;
            Complex64::from_polar(1.0, dir.sign() * PI * r / n as f64)
        })
        .collect();

    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = x[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        let c = chirp[k].conj();
        b[k] = c;
        b[m - k] = c;
    }

    radix2_in_place(&mut a, Direction::Forward);
    radix2_in_place(&mut b, Direction::Forward);
    for (ai, bi) in a.iter_mut().zip(&b) {
        *ai *= bi;
    }
    radix2_in_place(&mut a, Direction::Inverse);
    let scale = 1.0 / m as f64;

    (0..n).map(|k| a[k] * scale * chirp[k]).collect()
}

/// Raw periodogram: `|X[k]|²` at `k·fs/N` for `k = 1..=N/2`. No window,
/// no averaging, no zero-padding; the DC bin is left out.
pub fn periodogram(segment: &EegSegment) -> Result<Periodogram> {
    let n = segment.len();
    let spectrum = fft(segment)?;
    let points: Vec<PeriodogramPoint> = (1..=n / 2)
        .map(|k| PeriodogramPoint {
            frequency_hz: spectrum.frequency(k),
            power: spectrum.bins[k].norm_sqr(),
        })
        .collect();
    if points.is_empty() {
        return Err(Error::TooShort {
            len: n,
            needed: "a periodogram needs at least 2 samples".into(),
        });
    }
    Ok(Periodogram {
        points,
        sample_rate: segment.sample_rate(),
    })
}

/// Least-squares slope of `log10(power)` against `log10(frequency)` over
/// the points with `f_min <= f <= f_max`.
pub fn estimate_spectral_slope(p: &Periodogram, f_min: f64, f_max: f64) -> Result<f64> {
    if !(f_min > 0.0 && f_max > f_min) {
        return Err(Error::invalid(format!(
            "slope range must satisfy 0 < f_min < f_max, got [{f_min}, {f_max}]"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for pt in p
        .points
        .iter()
        .filter(|pt| pt.frequency_hz >= f_min && pt.frequency_hz <= f_max)
    {
        if !(pt.power > 0.0) {
            return Err(Error::invalid(format!(
                "nonpositive power {} at {} Hz inside the fit range",
                pt.power, pt.frequency_hz
            )));
        }
        xs.push(pt.frequency_hz.log10());
        ys.push(pt.power.log10());
    }
    if xs.len() < 2 {
        return Err(Error::invalid(format!(
            "only {} periodogram point(s) in [{f_min}, {f_max}] Hz; need at least 2",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Render the log-log CSV. Rows with zero power leave both log columns
/// empty.
pub fn loglog_csv(p: &Periodogram) -> String {
    let mut out = String::from("frequency_hz,power,log10_frequency,log10_power\n");
    for pt in &p.points {
        if pt.power > 0.0 {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                pt.frequency_hz,
                pt.power,
                pt.frequency_hz.log10(),
                pt.power.log10()
            );
        } else {
            let _ = writeln!(out, "{},{},,", pt.frequency_hz, pt.power);
        }
    }
    out
}

pub fn export_loglog(p: &Periodogram, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, loglog_csv(p)).map_err(|e| Error::io(path, e))
}
