//! Loading, validating and synthesizing single-channel EEG segments.
//!
//! Segment files follow the Bonn corpus layout: ASCII text, one sample per
//! line, no header. The sample rate is not stored in the files and is
//! supplied by the caller (173.61 Hz for that corpus).

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample rate of the Bonn EEG corpus, in Hz.
pub const BONN_SAMPLE_RATE: f64 = 173.61;

/// Samples per segment in the Bonn EEG corpus.
pub const BONN_SEGMENT_LEN: usize = 4097;

/// One single-channel recording.
#[derive(Debug, Clone, PartialEq)]
pub struct EegSegment {
    samples: Vec<f64>,
    sample_rate: f64,
    source_id: String,
}

impl EegSegment {
    pub fn new(samples: Vec<f64>, sample_rate: f64, source_id: impl Into<String>) -> Result<Self> {
        let source_id = source_id.into();
        if samples.is_empty() {
            return Err(Error::Empty(format!("segment {source_id:?} has no samples")));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite(format!(
                "segment {source_id:?} sample {i} is {}",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            source_id,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// New segment with the same rate and id but different samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.sample_rate, self.source_id.clone())
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    Normal,
    Epileptic,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 2] = [ClassLabel::Normal, ClassLabel::Epileptic];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Normal => "Normal",
            ClassLabel::Epileptic => "Epileptic",
        }
    }

    /// Target value used by the classifier (Epileptic is the positive class).
    pub fn target(self) -> f64 {
        match self {
            ClassLabel::Normal => 0.0,
            ClassLabel::Epileptic => 1.0,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "normal" => Ok(ClassLabel::Normal),
            "epileptic" => Ok(ClassLabel::Epileptic),
            _ => Err(Error::invalid(format!(
                "unknown class label {t:?} (expected Normal or Epileptic)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledEntry {
    pub segment: EegSegment,
    pub label: ClassLabel,
}

/// Labeled segments sharing one sample rate, with unique source ids.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    entries: Vec<LabeledEntry>,
}

impl LabeledDataset {
    pub fn new(entries: Vec<LabeledEntry>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::Empty("dataset has no entries".into()))?;
        let rate = first.segment.sample_rate();
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if e.segment.sample_rate() != rate {
                return Err(Error::invalid(format!(
                    "segment {:?} has sample rate {} but the dataset uses {rate}",
                    e.segment.source_id(),
                    e.segment.sample_rate()
                )));
            }
            if !seen.insert(e.segment.source_id()) {
                return Err(Error::invalid(format!(
                    "duplicate source id {:?}",
                    e.segment.source_id()
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[LabeledEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.entries[0].segment.sample_rate()
    }

    pub fn count(&self, label: ClassLabel) -> usize {
        self.entries.iter().filter(|e| e.label == label).count()
    }
}

/// Read one segment file. The source id is the file stem.
pub fn load_segment(path: impl AsRef<Path>, sample_rate: f64) -> Result<EegSegment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();

    let mut samples = Vec::with_capacity(BONN_SEGMENT_LEN);
    // `lines` strips the trailing '\r' of CRLF endings.
    for (i, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        let value: f64 = field.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            text: field.to_string(),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                text: field.to_string(),
            });
        }
        samples.push(value);
    }
    if samples.is_empty() {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    EegSegment::new(samples, sample_rate, source_id)
}

/// Write a segment as one sample per line. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_segment(segment: &EegSegment, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(segment.len() * 8);
    for s in segment.samples() {
        out.push_str(&format_sample(*s));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn format_sample(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    path: String,
    label: String,
}

/// Load a `path,label` CSV manifest. Relative segment paths are resolved
/// against the manifest's directory.
pub fn load_dataset(manifest_path: impl AsRef<Path>, sample_rate: f64) -> Result<LabeledDataset> {
    let manifest_path = manifest_path.as_ref();
    let manifest_err = |message: String| Error::Manifest {
        path: manifest_path.to_path_buf(),
        message,
    };
    let file = fs::File::open(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new(""));

    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| manifest_err(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["path", "label"] {
        return Err(manifest_err(format!(
            "expected header `path,label`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut entries = Vec::new();
    for (i, row) in reader.deserialize::<ManifestRow>().enumerate() {
        let row = row.map_err(|e| manifest_err(format!("row {}: {e}", i + 2)))?;
        let label: ClassLabel = row
            .label
            .parse()
            .map_err(|e: Error| manifest_err(format!("row {}: {e}", i + 2)))?;
        let seg_path = resolve(base, &row.path);
        let segment = load_segment(&seg_path, sample_rate)?;
        entries.push(LabeledEntry { segment, label });
    }
    if entries.is_empty() {
        return Err(manifest_err("manifest lists no segments".into()));
    }
    LabeledDataset::new(entries).map_err(|e| manifest_err(e.to_string()))
}

/// Write a `path,label` manifest. Paths are written as given.
pub fn write_manifest(path: impl AsRef<Path>, rows: &[(PathBuf, ClassLabel)]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(out, "path,label").expect("write to Vec");
    for (p, label) in rows {
        writeln!(out, "{},{}", p.display(), label).expect("write to Vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// One sinusoidal component of a synthetic signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneComponent {
    pub frequency_hz: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl ToneComponent {
    pub fn new(frequency_hz: f64, amplitude: f64, phase: f64) -> Self {
        Self {
            frequency_hz,
            amplitude,
            phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub components: Vec<ToneComponent>,
    pub noise_std: f64,
    pub length: usize,
    pub sample_rate: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn tone(frequency_hz: f64, amplitude: f64, length: usize, sample_rate: f64) -> Self {
        Self {
            components: vec![ToneComponent::new(frequency_hz, amplitude, 0.0)],
            noise_std: 0.0,
            length,
            sample_rate,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::invalid("synthetic length must be at least 1"));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::invalid(format!(
                "noise std must be nonnegative, got {}",
                self.noise_std
            )));
        }
        let nyquist = self.sample_rate / 2.0;
        for c in &self.components {
            if !(c.frequency_hz >= 0.0 && c.frequency_hz < nyquist) {
                return Err(Error::invalid(format!(
                    "component frequency {} Hz is not below Nyquist ({nyquist} Hz)",
                    c.frequency_hz
                )));
            }
        }
        Ok(())
    }
}

/// Sum of sinusoids plus seeded Gaussian noise.
pub fn synthesize_signal(spec: &SyntheticSpec) -> Result<EegSegment> {
    spec.validate()?;
    let fs = spec.sample_rate;
    let mut samples: Vec<f64> = (0..spec.length)
        .map(|k| {
            let t = k as f64 / fs;
            spec.components
                .iter()
                .map(|c| c.amplitude * (2.0 * std::f64::consts::PI * c.frequency_hz * t + c.phase).sin())
                .sum()
        })
        .collect();
    if spec.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.noise_std).expect("validated std");
        for s in &mut samples {
            *s += normal.sample(&mut rng);
        }
    }
    EegSegment::new(samples, fs, format!("synthetic-{}", spec.seed))
}
