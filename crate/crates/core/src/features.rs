//! Six-statistic feature vectors (min, max, mean, median, mode, std) and
//! per-dataset feature matrices.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::{apply_fir, FirFilter};
use crate::ingest::{ClassLabel, EegSegment, LabeledDataset};
use crate::wavelet::{dwt_multilevel, reconstruct_subband, SubBandId, WaveletFilterBank};

pub const FEATURE_NAMES: [&str; 6] = ["min", "max", "mean", "median", "mode", "std"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
    pub std: f64,
}

impl FeatureVector {
    /// Values in the fixed column order `min,max,mean,median,mode,std`.
    pub fn to_array(&self) -> [f64; 6] {
        [self.min, self.max, self.mean, self.median, self.mode, self.std]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            min: v[0],
            max: v[1],
            mean: v[2],
            median: v[3],
            mode: v[4],
            std: v[5],
        }
    }
}

/// Compute the six statistics.
///
/// The median averages the two middle values for even lengths, `std` is
/// the sample standard deviation (divisor `n − 1`, zero for one sample)
/// and the mode is taken over samples rounded to the nearest integer, ties
/// going to the smallest value. The mode is clamped into `[min, max]` so
/// rounding never moves it outside the data range.
pub fn extract_features(signal: &[f64]) -> Result<FeatureVector> {
    if signal.is_empty() {
        return Err(Error::Empty("cannot extract features from an empty signal".into()));
    }
    if let Some(v) = signal.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("signal value {v}")));
    }
    let n = signal.len();
    let mut sorted = signal.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[n - 1];
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };

    let mean = signal.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = signal.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };

    Ok(FeatureVector {
        min,
        max,
        mean,
        median,
        mode: rounded_mode(signal).clamp(min, max),
        std,
    })
}

fn rounded_mode(signal: &[f64]) -> f64 {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for v in signal {
        *counts.entry(v.round() as i64).or_default() += 1;
    }
    // BTreeMap iterates ascending, and only a strictly larger count replaces
    // the current best, so ties resolve to the smallest value.
    let mut best = (0i64, 0usize);
    for (&value, &count) in &counts {
        if count > best.1 {
            best = (value, count);
        }
    }
    best.0 as f64
}

/// Which signal the features are read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureBand {
    /// The (band-limited) segment itself, without decomposition.
    WholeSignal,
    SubBand(SubBandId),
}

impl FeatureBand {
    pub fn name(self) -> &'static str {
        match self {
            FeatureBand::WholeSignal => "whole",
            FeatureBand::SubBand(b) => b.name(),
        }
    }
}

impl fmt::Display for FeatureBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("whole") {
            Ok(FeatureBand::WholeSignal)
        } else {
            s.parse().map(FeatureBand::SubBand)
        }
    }
}

/// Signal path from a raw segment to the signal features are taken from.
#[derive(Debug, Clone)]
pub struct FeaturePipeline {
    /// Band-limiting filter; `None` analyses the raw segment.
    pub filter: Option<FirFilter>,
    pub bank: WaveletFilterBank,
    pub levels: usize,
}

impl FeaturePipeline {
    /// Band-limited (if a filter is set) signal, or one of its sub-band
    /// reconstructions.
    pub fn band_signal(&self, segment: &EegSegment, band: FeatureBand) -> Result<Vec<f64>> {
        let limited = match &self.filter {
            Some(f) => apply_fir(f, segment)?,
            None => segment.clone(),
        };
        match band {
            FeatureBand::WholeSignal => Ok(limited.into_samples()),
            FeatureBand::SubBand(b) => {
                let d = dwt_multilevel(&limited, &self.bank, self.levels)?;
                reconstruct_subband(&d, b, &self.bank)
            }
        }
    }

    pub fn features(&self, segment: &EegSegment, band: FeatureBand) -> Result<FeatureVector> {
        self.band_signal(segment, band)
            .and_then(|s| extract_features(&s))
            .map_err(|e| e.in_segment(segment.source_id()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub source_id: String,
    pub label: ClassLabel,
    pub features: FeatureVector,
}

/// One row per dataset entry, in dataset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub band: FeatureBand,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn new(band: FeatureBand, rows: Vec<FeatureRow>) -> Self {
        Self { band, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count(&self, label: ClassLabel) -> usize {
        self.rows.iter().filter(|r| r.label == label).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("source_id,label,min,max,mean,median,mode,std\n");
        for r in &self.rows {
            let f = &r.features;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.source_id, r.label, f.min, f.max, f.mean, f.median, f.mode, f.std
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Features for every entry of `ds`. Rows are computed in parallel and
/// returned in dataset order.
pub fn feature_table(
    ds: &LabeledDataset,
    band: FeatureBand,
    pipeline: &FeaturePipeline,
) -> Result<FeatureMatrix> {
    if ds.is_empty() {
        return Err(Error::Empty("dataset has no entries".into()));
    }
    let rows = ds
        .entries()
        .par_iter()
        .map(|e| {
            pipeline.features(&e.segment, band).map(|features| FeatureRow {
                source_id: e.segment.source_id().to_string(),
                label: e.label,
                features,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix::new(band, rows))
}
