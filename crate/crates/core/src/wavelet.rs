//! Daubechies-4 filter bank and multilevel DWT with half-point symmetric
//! extension.
//!
//! Coefficient counts follow `⌊(n + L − 1)/2⌋` per level (`L = 8`), the
//! same layout MATLAB's `wavedec` and PyWavelets produce in symmetric mode,
//! so a 4097-sample segment yields `[2052, 1029, 518, 262]` details and a
//! 262-sample approximation.
//!
//! Analysis at output index `o` is the inner product
//! `Σⱼ h[j]·x̂[2o + j − (L − 2)]`, where `x̂` is the symmetrically extended
//! input. Because every sample of `x` is covered by a retained coefficient,
//! the transposed operator reconstructs `x` exactly.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::EegSegment;

pub const DEFAULT_LEVELS: usize = 4;

/// Daubechies scaling filter with four vanishing moments, normalized to
/// `Σh = √2`. Minimum-phase root selection.
#[allow(clippy::excessive_precision)]
const DB4_SCALING: [f64; 8] = [
    0.230_377_813_308_896_500_863_291_2,
    0.714_846_570_552_915_647_089_922,
    0.630_880_767_929_858_907_881_716_3,
    -0.027_983_769_416_859_854_211_413_75,
    -0.187_034_811_719_093_084_079_570_7,
    0.030_841_381_835_560_763_627_219_36,
    0.032_883_011_666_885_199_735_407_51,
    -0.010_597_401_785_069_032_104_883_21,
];

const SUM_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-8;

/// Orthogonal two-channel filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilterBank {
    id: String,
    analysis_lowpass: Vec<f64>,
    analysis_highpass: Vec<f64>,
    synthesis_lowpass: Vec<f64>,
    synthesis_highpass: Vec<f64>,
}

impl WaveletFilterBank {
    /// Build an orthogonal bank from a scaling filter and check it: unit
    /// norm, `Σh = √2`, double-shift orthogonality and `vanishing_moments`
    /// annihilated polynomial degrees in the high-pass branch.
    pub fn from_scaling_filter(
        id: impl Into<String>,
        scaling: &[f64],
        vanishing_moments: usize,
    ) -> Result<Self> {
        let len = scaling.len();
        if len < 2 || !len.is_multiple_of(2) {
            return Err(Error::FilterBank(format!(
                "scaling filter length must be even and at least 2, got {len}"
            )));
        }
        let h = scaling.to_vec();
        let g: Vec<f64> = (0..len)
            .map(|n| if n % 2 == 0 { h[len - 1 - n] } else { -h[len - 1 - n] })
            .collect();
        let bank = Self {
            id: id.into(),
            synthesis_lowpass: h.iter().rev().copied().collect(),
            synthesis_highpass: g.iter().rev().copied().collect(),
            analysis_lowpass: h,
            analysis_highpass: g,
        };
        bank.validate(vanishing_moments)?;
        Ok(bank)
    }

    fn validate(&self, vanishing_moments: usize) -> Result<()> {
        let h = &self.analysis_lowpass;
        let g = &self.analysis_highpass;
        let sum: f64 = h.iter().sum();
        if (sum - std::f64::consts::SQRT_2).abs() > SUM_TOL {
            return Err(Error::FilterBank(format!("Σh = {sum}, expected √2")));
        }
        for shift in 0..h.len() / 2 {
            let dot = double_shift_product(h, shift);
            let expected = if shift == 0 { 1.0 } else { 0.0 };
            if (dot - expected).abs() > SUM_TOL {
                return Err(Error::FilterBank(format!(
                    "Σ h[n]·h[n+{}] = {dot}, expected {expected}",
                    2 * shift
                )));
            }
        }
        for p in 0..vanishing_moments {
            let m = moment(g, p);
            if m.abs() > MOMENT_TOL {
                return Err(Error::FilterBank(format!("high-pass moment {p} is {m}")));
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn filter_len(&self) -> usize {
        self.analysis_lowpass.len()
    }

    pub fn analysis_lowpass(&self) -> &[f64] {
        &self.analysis_lowpass
    }

    pub fn analysis_highpass(&self) -> &[f64] {
        &self.analysis_highpass
    }

    pub fn synthesis_lowpass(&self) -> &[f64] {
        &self.synthesis_lowpass
    }

    pub fn synthesis_highpass(&self) -> &[f64] {
        &self.synthesis_highpass
    }
}

/// `Σₙ h[n]·h[n + 2·shift]`.
pub fn double_shift_product(h: &[f64], shift: usize) -> f64 {
    let off = 2 * shift;
    (0..h.len().saturating_sub(off)).map(|n| h[n] * h[n + off]).sum()
}

/// `Σₙ g[n]·nᵖ`.
pub fn moment(g: &[f64], p: usize) -> f64 {
    g.iter()
        .enumerate()
        .map(|(n, &v)| v * (n as f64).powi(p as i32))
        .sum()
}

/// The db4 bank (8 taps, 4 vanishing moments). Validated once on first use.
pub fn db4_filter_bank() -> WaveletFilterBank {
    static BANK: OnceLock<WaveletFilterBank> = OnceLock::new();
    BANK.get_or_init(|| {
        WaveletFilterBank::from_scaling_filter("db4", &DB4_SCALING, 4)
            .expect("embedded db4 coefficients fail validation")
    })
    .clone()
}

/// Number of coefficients one analysis step produces from `n` samples.
pub fn coefficient_len(n: usize, filter_len: usize) -> usize {
    (n + filter_len - 1) / 2
}

// Half-point symmetric extension: x[-1-m] = x[m], x[n+m] = x[n-1-m].
fn symmetric_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut r = i.rem_euclid(period);
    if r >= n {
        r = period - 1 - r;
    }
    r as usize
}

/// One analysis step: returns `(approx, detail)`.
pub fn dwt_single_level(signal: &[f64], bank: &WaveletFilterBank) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = signal.len();
    let len = bank.filter_len();
    if n < len {
        return Err(Error::TooShort {
            len: n,
            needed: format!("at least {len} samples for one DWT level"),
        });
    }
    let out_len = coefficient_len(n, len);
    let h = bank.analysis_lowpass();
    let g = bank.analysis_highpass();
    let offset = len as isize - 2;

    let mut approx = Vec::with_capacity(out_len);
    let mut detail = Vec::with_capacity(out_len);
    for o in 0..out_len {
        let base = 2 * o as isize - offset;
        let (mut a, mut d) = (0.0, 0.0);
        for j in 0..len {
            let s = signal[symmetric_index(base + j as isize, n)];
            a += h[j] * s;
            d += g[j] * s;
        }
        approx.push(a);
        detail.push(d);
    }
    Ok((approx, detail))
}

/// One synthesis step producing `out_len` samples.
pub fn idwt_single_level(
    approx: &[f64],
    detail: &[f64],
    out_len: usize,
    bank: &WaveletFilterBank,
) -> Result<Vec<f64>> {
    let len = bank.filter_len();
    if approx.len() != detail.len() {
        return Err(Error::Bookkeeping(format!(
            "approximation has {} coefficients but detail has {}",
            approx.len(),
            detail.len()
        )));
    }
    if out_len == 0 || coefficient_len(out_len, len) != approx.len() {
        return Err(Error::Bookkeeping(format!(
            "{} coefficients cannot come from a {out_len}-sample signal",
            approx.len()
        )));
    }
    let hs = bank.synthesis_lowpass();
    let gs = bank.synthesis_highpass();

    // x[n] = Σ_o a[o]·h̃[2o+1−n] + d[o]·g̃[2o+1−n] over 0 ≤ 2o+1−n < L.
    Ok((0..out_len)
        .map(|n| {
            let lo = n.saturating_sub(1).div_ceil(2);
            let hi = ((n + len - 2) / 2).min(approx.len() - 1);
            (lo..=hi)
                .map(|o| {
                    let j = 2 * o + 1 - n;
                    approx[o] * hs[j] + detail[o] * gs[j]
                })
                .sum()
        })
        .collect())
}

/// One coefficient array of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    /// Final-level approximation.
    Approx,
    /// Detail coefficients at a 1-based level.
    Detail(usize),
}

impl Component {
    pub fn label(self, levels: usize) -> String {
        match self {
            Component::Approx => format!("a{levels}"),
            Component::Detail(j) => format!("d{j}"),
        }
    }
}

/// Coefficient pyramid for one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    approx: Vec<f64>,
    details: Vec<Vec<f64>>,
    level_lengths: Vec<usize>,
    original_length: usize,
    bank_id: String,
}

impl DecompositionResult {
    /// Assemble and check a decomposition; `details[0]` is level 1.
    pub fn from_parts(
        approx: Vec<f64>,
        details: Vec<Vec<f64>>,
        original_length: usize,
        bank: &WaveletFilterBank,
    ) -> Result<Self> {
        let level_lengths = expected_level_lengths(original_length, details.len(), bank.filter_len());
        let d = Self {
            approx,
            details,
            level_lengths,
            original_length,
            bank_id: bank.id().to_string(),
        };
        d.check(bank)?;
        Ok(d)
    }

    pub fn approx(&self) -> &[f64] {
        &self.approx
    }

    /// Detail arrays, `d₁` first.
    pub fn details(&self) -> &[Vec<f64>] {
        &self.details
    }

    /// Detail coefficients at a 1-based level.
    pub fn detail(&self, level: usize) -> Option<&[f64]> {
        level.checked_sub(1).and_then(|i| self.details.get(i)).map(Vec::as_slice)
    }

    /// Coefficient count per level, level 1 first.
    pub fn level_lengths(&self) -> &[usize] {
        &self.level_lengths
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    pub fn bank_id(&self) -> &str {
        &self.bank_id
    }

    pub fn component(&self, c: Component) -> Option<&[f64]> {
        match c {
            Component::Approx => Some(&self.approx),
            Component::Detail(j) => self.detail(j),
        }
    }

    /// All components: the approximation, then details from the coarsest level down.
    pub fn components(&self) -> Vec<Component> {
        std::iter::once(Component::Approx)
            .chain((1..=self.levels()).rev().map(Component::Detail))
            .collect()
    }

    /// Sum of squares over every coefficient array.
    pub fn energy(&self) -> f64 {
        self.approx.iter().map(|v| v * v).sum::<f64>()
            + self.details.iter().flatten().map(|v| v * v).sum::<f64>()
    }

    fn check(&self, bank: &WaveletFilterBank) -> Result<()> {
        if bank.id() != self.bank_id {
            return Err(Error::Bookkeeping(format!(
                "decomposition made with {:?} but bank is {:?}",
                self.bank_id,
                bank.id()
            )));
        }
        if self.original_length == 0 {
            return Err(Error::Bookkeeping("original length is zero".into()));
        }
        let expected = expected_level_lengths(self.original_length, self.details.len(), bank.filter_len());
        if self.level_lengths != expected {
            return Err(Error::Bookkeeping(format!(
                "level lengths {:?} do not match {:?} for {} samples",
                self.level_lengths, expected, self.original_length
            )));
        }
        for (j, d) in self.details.iter().enumerate() {
            if d.len() != expected[j] {
                return Err(Error::Bookkeeping(format!(
                    "d{} has {} coefficients, expected {}",
                    j + 1,
                    d.len(),
                    expected[j]
                )));
            }
        }
        let approx_len = expected.last().copied().unwrap_or(self.original_length);
        if self.approx.len() != approx_len {
            return Err(Error::Bookkeeping(format!(
                "approximation has {} coefficients, expected {approx_len}",
                self.approx.len()
            )));
        }
        Ok(())
    }

    fn zeroed_except(&self, keep: Option<Component>) -> Self {
        let keep_if = |c: Component, v: &Vec<f64>| {
            if keep == Some(c) {
                v.clone()
            } else {
                vec![0.0; v.len()]
            }
        };
        Self {
            approx: keep_if(Component::Approx, &self.approx),
            details: self
                .details
                .iter()
                .enumerate()
                .map(|(j, d)| keep_if(Component::Detail(j + 1), d))
                .collect(),
            level_lengths: self.level_lengths.clone(),
            original_length: self.original_length,
            bank_id: self.bank_id.clone(),
        }
    }
}

fn expected_level_lengths(n: usize, levels: usize, filter_len: usize) -> Vec<usize> {
    let mut lens = Vec::with_capacity(levels);
    let mut cur = n;
    for _ in 0..levels {
        cur = coefficient_len(cur, filter_len);
        lens.push(cur);
    }
    lens
}

/// Deepest decomposition a signal of length `n` supports.
pub fn max_levels(n: usize, filter_len: usize) -> usize {
    let mut levels = 0;
    let mut cur = n;
    while cur >= filter_len {
        cur = coefficient_len(cur, filter_len);
        levels += 1;
    }
    levels
}

pub fn dwt_multilevel_samples(
    signal: &[f64],
    bank: &WaveletFilterBank,
    levels: usize,
) -> Result<DecompositionResult> {
    if signal.is_empty() {
        return Err(Error::Empty("cannot decompose an empty signal".into()));
    }
    let supported = max_levels(signal.len(), bank.filter_len());
    if levels > supported {
        return Err(Error::TooShort {
            len: signal.len(),
            needed: format!(
                "{levels} levels requested but at most {supported} fit the {}-tap filter",
                bank.filter_len()
            ),
        });
    }
    let mut approx = signal.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d) = dwt_single_level(&approx, bank)?;
        approx = a;
        details.push(d);
    }
    DecompositionResult::from_parts(approx, details, signal.len(), bank)
}

pub fn dwt_multilevel(
    segment: &EegSegment,
    bank: &WaveletFilterBank,
    levels: usize,
) -> Result<DecompositionResult> {
    dwt_multilevel_samples(segment.samples(), bank, levels)
}

/// Inverse multilevel transform of every coefficient array.
pub fn reconstruct_full(d: &DecompositionResult, bank: &WaveletFilterBank) -> Result<Vec<f64>> {
    d.check(bank)?;
    let mut approx = d.approx.clone();
    for level in (1..=d.levels()).rev() {
        let out_len = if level == 1 {
            d.original_length
        } else {
            d.level_lengths[level - 2]
        };
        approx = idwt_single_level(&approx, &d.details[level - 1], out_len, bank)?;
    }
    Ok(approx)
}

/// Inverse transform with every array except `c` zeroed.
pub fn reconstruct_component(
    d: &DecompositionResult,
    c: Component,
    bank: &WaveletFilterBank,
) -> Result<Vec<f64>> {
    if d.component(c).is_none() {
        return Err(Error::invalid(format!(
            "{} does not exist in a {}-level decomposition",
            c.label(d.levels()),
            d.levels()
        )));
    }
    reconstruct_full(&d.zeroed_except(Some(c)), bank)
}

/// The five EEG rhythms and the 4-level components they are read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubBandId {
    Delta,
    Theta,
    Alpha,
    Beta,
    Gamma,
}

impl SubBandId {
    pub const ALL: [SubBandId; 5] = [
        SubBandId::Delta,
        SubBandId::Theta,
        SubBandId::Alpha,
        SubBandId::Beta,
        SubBandId::Gamma,
    ];

    /// Decomposition depth the band mapping assumes.
    pub const LEVELS: usize = 4;

    pub fn component(self) -> Component {
        match self {
            SubBandId::Delta => Component::Approx,
            SubBandId::Theta => Component::Detail(4),
            SubBandId::Alpha => Component::Detail(3),
            SubBandId::Beta => Component::Detail(2),
            SubBandId::Gamma => Component::Detail(1),
        }
    }

    /// Nominal label range in Hz (0–4, 4–8, 8–15, 15–30, 30–60).
    pub fn nominal_range_hz(self) -> (f64, f64) {
        match self {
            SubBandId::Delta => (0.0, 4.0),
            SubBandId::Theta => (4.0, 8.0),
            SubBandId::Alpha => (8.0, 15.0),
            SubBandId::Beta => (15.0, 30.0),
            SubBandId::Gamma => (30.0, 60.0),
        }
    }

    /// Ideal dyadic pass band of the component at `sample_rate`.
    pub fn dyadic_range_hz(self, sample_rate: f64) -> (f64, f64) {
        component_range_hz(self.component(), Self::LEVELS, sample_rate)
    }

    pub fn name(self) -> &'static str {
        match self {
            SubBandId::Delta => "delta",
            SubBandId::Theta => "theta",
            SubBandId::Alpha => "alpha",
            SubBandId::Beta => "beta",
            SubBandId::Gamma => "gamma",
        }
    }
}

impl fmt::Display for SubBandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SubBandId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SubBandId::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown sub-band {s:?}")))
    }
}

/// Ideal dyadic band of a component: details at level j cover
/// `[fs/2^(j+1), fs/2^j]`, the approximation `[0, fs/2^(L+1)]`.
pub fn component_range_hz(c: Component, levels: usize, sample_rate: f64) -> (f64, f64) {
    match c {
        Component::Approx => (0.0, sample_rate / 2f64.powi(levels as i32 + 1)),
        Component::Detail(j) => (
            sample_rate / 2f64.powi(j as i32 + 1),
            sample_rate / 2f64.powi(j as i32),
        ),
    }
}

/// Reconstruct one EEG sub-band; the decomposition must have 4 levels.
pub fn reconstruct_subband(
    d: &DecompositionResult,
    band: SubBandId,
    bank: &WaveletFilterBank,
) -> Result<Vec<f64>> {
    if d.levels() != SubBandId::LEVELS {
        return Err(Error::invalid(format!(
            "sub-band {band} needs a {}-level decomposition, got {} levels",
            SubBandId::LEVELS,
            d.levels()
        )));
    }
    reconstruct_component(d, band.component(), bank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-100.0..100.0)).collect()
    }

    fn max_abs(x: &[f64]) -> f64 {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn db4_identities() {
        let b = db4_filter_bank();
        let h = b.analysis_lowpass();
        assert_eq!(h.len(), 8);
        assert!((h.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs() <= 1e-12);
        assert!((h.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() <= 1e-12);
        for m in 1..4 {
            assert!(double_shift_product(h, m).abs() <= 1e-12);
        }
        for p in 0..4 {
            assert!(moment(b.analysis_highpass(), p).abs() <= 1e-8, "p={p}");
        }
        assert!((h[0] - 0.230377813309).abs() < 1e-12);
        assert!(b.analysis_highpass().iter().sum::<f64>().abs() <= 1e-12);
        for n in 0..8 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(b.analysis_highpass()[n], sign * h[7 - n]);
            assert_eq!(b.synthesis_lowpass()[n], h[7 - n]);
        }
    }

    #[test]
    fn fifth_moment_does_not_vanish() {
        // Exactly four vanishing moments, not more.
        assert!(moment(db4_filter_bank().analysis_highpass(), 4).abs() > 1e-3);
    }

    #[test]
    fn corrupted_scaling_filter_is_rejected() {
        let mut h = DB4_SCALING;
        h[3] += 1e-6;
        assert!(WaveletFilterBank::from_scaling_filter("bad", &h, 4).is_err());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(WaveletFilterBank::from_scaling_filter("haar", &[s, s], 1).is_ok());
        assert!(WaveletFilterBank::from_scaling_filter("haar", &[s, s], 2).is_err());
    }

    #[test]
    fn single_level_lengths() {
        let b = db4_filter_bank();
        let (a, d) = dwt_single_level(&random(4097, 1), &b).unwrap();
        assert_eq!((a.len(), d.len()), (2052, 2052));
        assert!(dwt_single_level(&[1.0; 7], &b).is_err());
    }

    #[test]
    fn constant_has_no_detail() {
        let b = db4_filter_bank();
        let (_, d) = dwt_single_level(&[5.5; 100], &b).unwrap();
        assert!(d.iter().all(|v| v.abs() <= 1e-10));
    }

    #[test]
    fn cubic_interior_details_vanish() {
        let b = db4_filter_bank();
        let n = 200;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                2.0 - 3.0 * t + 0.5 * t * t + 4.0 * t * t * t
            })
            .collect();
        let (_, d) = dwt_single_level(&x, &b).unwrap();
        // Coefficients whose support stays inside [0, n).
        for (o, v) in d.iter().enumerate() {
            let start = 2 * o as isize - 6;
            if start >= 0 && start + 7 < n as isize {
                assert!(v.abs() <= 1e-8, "o={o} v={v}");
            }
        }
    }

    #[test]
    fn multilevel_lengths_for_bonn_segments() {
        let b = db4_filter_bank();
        let d = dwt_multilevel_samples(&random(4097, 2), &b, 4).unwrap();
        assert_eq!(d.level_lengths(), &[2052, 1029, 518, 262]);
        assert_eq!(d.approx().len(), 262);
        assert_eq!(d.details().iter().map(Vec::len).collect::<Vec<_>>(), [2052, 1029, 518, 262]);
    }

    #[test]
    fn zero_levels_is_identity() {
        let b = db4_filter_bank();
        let x = random(30, 3);
        let d = dwt_multilevel_samples(&x, &b, 0).unwrap();
        assert_eq!(d.approx(), x.as_slice());
        assert!(d.details().is_empty());
        assert_eq!(reconstruct_full(&d, &b).unwrap(), x);
    }

    #[test]
    fn too_many_levels() {
        let b = db4_filter_bank();
        assert!(dwt_multilevel_samples(&[1.0; 8], &b, 4).is_err());
        assert_eq!(max_levels(8, 8), 1);
        assert!(dwt_multilevel_samples(&[1.0; 8], &b, 1).is_ok());
    }

    #[test]
    fn perfect_reconstruction_various_lengths() {
        let b = db4_filter_bank();
        for (i, n) in [8usize, 9, 15, 64, 65, 100, 257, 1000, 4097].into_iter().enumerate() {
            let x = random(n, 10 + i as u64);
            let levels = max_levels(n, 8).min(4);
            let d = dwt_multilevel_samples(&x, &b, levels).unwrap();
            let y = reconstruct_full(&d, &b).unwrap();
            assert_eq!(y.len(), n);
            let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-8 * max_abs(&x), "n={n} err={err}");
        }
    }

    #[test]
    fn zero_and_constant_round_trip() {
        let b = db4_filter_bank();
        let d = dwt_multilevel_samples(&[0.0; 300], &b, 4).unwrap();
        assert!(reconstruct_full(&d, &b).unwrap().iter().all(|&v| v == 0.0));
        let d = dwt_multilevel_samples(&[3.25; 300], &b, 4).unwrap();
        assert!(reconstruct_full(&d, &b).unwrap().iter().all(|v| (v - 3.25).abs() <= 1e-9));
    }

    #[test]
    fn zeroed_pyramid_gives_zero_band() {
        let b = db4_filter_bank();
        let d = dwt_multilevel_samples(&[0.0; 500], &b, 4).unwrap();
        for band in SubBandId::ALL {
            assert!(reconstruct_subband(&d, band, &b).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn subbands_sum_to_full() {
        let b = db4_filter_bank();
        let x = random(1500, 7);
        let d = dwt_multilevel_samples(&x, &b, 4).unwrap();
        let full = reconstruct_full(&d, &b).unwrap();
        let mut sum = vec![0.0; x.len()];
        for band in SubBandId::ALL {
            for (s, v) in sum.iter_mut().zip(reconstruct_subband(&d, band, &b).unwrap()) {
                *s += v;
            }
        }
        let scale = max_abs(&full);
        for (s, f) in sum.iter().zip(&full) {
            assert!((s - f).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn band_level_mismatch() {
        let b = db4_filter_bank();
        let d = dwt_multilevel_samples(&random(500, 4), &b, 3).unwrap();
        assert!(reconstruct_subband(&d, SubBandId::Delta, &b).is_err());
        assert!(reconstruct_component(&d, Component::Detail(4), &b).is_err());
        assert!(reconstruct_component(&d, Component::Detail(3), &b).is_ok());
    }

    #[test]
    fn corrupted_bookkeeping_is_caught() {
        let b = db4_filter_bank();
        let x = random(300, 5);
        let d = dwt_multilevel_samples(&x, &b, 2).unwrap();
        let mut details = d.details().to_vec();
        details[1].pop();
        assert!(DecompositionResult::from_parts(d.approx().to_vec(), details, 300, &b).is_err());
        assert!(DecompositionResult::from_parts(d.approx().to_vec(), d.details().to_vec(), 301, &b).is_err());
        let haar = WaveletFilterBank::from_scaling_filter(
            "haar",
            &[std::f64::consts::FRAC_1_SQRT_2; 2],
            1,
        )
        .unwrap();
        assert!(reconstruct_full(&d, &haar).is_err());
    }

    #[test]
    fn interior_energy_is_preserved() {
        let b = db4_filter_bank();
        let n = 1024;
        let mut x = vec![0.0; n];
        let body = random(600, 6);
        x[212..812].copy_from_slice(&body);
        let d = dwt_multilevel_samples(&x, &b, 4).unwrap();
        let e_signal: f64 = x.iter().map(|v| v * v).sum();
        assert!((d.energy() - e_signal).abs() <= 1e-6 * e_signal);
    }

    #[test]
    fn nominal_ranges_partition_zero_to_sixty() {
        let mut edge = 0.0;
        for band in SubBandId::ALL {
            let (lo, hi) = band.nominal_range_hz();
            assert_eq!(lo, edge);
            edge = hi;
        }
        assert_eq!(edge, 60.0);
    }

    #[test]
    fn dyadic_edges_at_bonn_rate() {
        let fs = 173.61;
        let (lo, hi) = SubBandId::Gamma.dyadic_range_hz(fs);
        assert!((lo - 43.4025).abs() < 1e-9 && (hi - 86.805).abs() < 1e-9);
        let (lo, hi) = SubBandId::Delta.dyadic_range_hz(fs);
        assert!(lo == 0.0 && (hi - 5.4253125).abs() < 1e-9);
    }

    #[test]
    fn parses_band_names() {
        assert_eq!("Delta".parse::<SubBandId>().unwrap(), SubBandId::Delta);
        assert_eq!("gamma".parse::<SubBandId>().unwrap(), SubBandId::Gamma);
        assert!("mu".parse::<SubBandId>().is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn perfect_reconstruction(n in 64usize..4098, seed in 0u64..1000) {
            let b = db4_filter_bank();
            let x = random(n, seed);
            let d = dwt_multilevel_samples(&x, &b, 4).unwrap();
            let y = reconstruct_full(&d, &b).unwrap();
            let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            proptest::prop_assert!(err <= 1e-8 * max_abs(&x));
        }
    }
}
