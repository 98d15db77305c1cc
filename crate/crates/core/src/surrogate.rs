//! Synthetic two-class stand-in for the Bonn Z/S sets.
//!
//! "Normal" segments are low-amplitude mixtures of delta, alpha and beta
//! tones over background noise. "Epileptic" segments carry a
//! high-amplitude rhythmic spike-and-slow-wave train at 2–4 Hz. Both use
//! per-segment random frequencies, amplitudes and phases drawn from one
//! seeded generator, so a corpus is reproducible from its seed.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ingest::{
    synthesize_signal, write_manifest, write_segment, ClassLabel, EegSegment, LabeledDataset,
    LabeledEntry, SyntheticSpec, ToneComponent,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateConfig {
    pub per_class: usize,
    pub length: usize,
    pub sample_rate: f64,
    pub seed: u64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            per_class: 100,
            length: crate::ingest::BONN_SEGMENT_LEN,
            sample_rate: crate::ingest::BONN_SAMPLE_RATE,
            seed: 42,
        }
    }
}

fn normal_segment(rng: &mut ChaCha8Rng, cfg: &SurrogateConfig, id: String) -> Result<EegSegment> {
    let mut tone = |lo: f64, hi: f64, amp_lo: f64, amp_hi: f64| {
        ToneComponent::new(
            rng.random_range(lo..hi),
            rng.random_range(amp_lo..amp_hi),
            rng.random_range(0.0..2.0 * PI),
        )
    };
    let components = vec![
        tone(0.5, 3.5, 10.0, 30.0),
        tone(8.5, 12.0, 25.0, 50.0),
        tone(14.0, 25.0, 8.0, 20.0),
        tone(30.0, 45.0, 2.0, 6.0),
    ];
    let spec = SyntheticSpec {
        components,
        noise_std: rng.random_range(10.0..20.0),
        length: cfg.length,
        sample_rate: cfg.sample_rate,
        seed: rng.random(),
    };
    let seg = synthesize_signal(&spec)?;
    EegSegment::new(round_all(seg.into_samples()), cfg.sample_rate, id)
}

fn epileptic_segment(rng: &mut ChaCha8Rng, cfg: &SurrogateConfig, id: String) -> Result<EegSegment> {
    let fs = cfg.sample_rate;
    let rate_hz = rng.random_range(2.0..4.0);
    let spike_amp = rng.random_range(400.0..900.0);
    let wave_amp = rng.random_range(150.0..350.0);
    let spike_width = rng.random_range(0.015..0.03);
    let offset = rng.random_range(0.0..1.0 / rate_hz);
    let noise = Normal::new(0.0, rng.random_range(20.0..50.0)).expect("positive std");

    let period = 1.0 / rate_hz;
    let mut samples = Vec::with_capacity(cfg.length);
    for k in 0..cfg.length {
        let t = k as f64 / fs;
        let phase = ((t - offset).rem_euclid(period)) / period;
        // Sharp negative spike at the start of each cycle, then a slow wave.
        let dt = phase * period;
        let spike = -spike_amp * (-0.5 * (dt / spike_width).powi(2)).exp();
        let wave = wave_amp * (2.0 * PI * phase).sin() * (1.0 - phase);
        samples.push(spike + wave + noise.sample(rng));
    }
    EegSegment::new(round_all(samples), fs, id)
}

// The real corpus is integer ADC output.
fn round_all(mut x: Vec<f64>) -> Vec<f64> {
    for v in &mut x {
        *v = v.round();
    }
    x
}

/// Generate `per_class` segments of each class, interleaved Normal then
/// Epileptic, ids `Z001…` and `S001…`.
pub fn surrogate_dataset(cfg: &SurrogateConfig) -> Result<LabeledDataset> {
    if cfg.per_class == 0 {
        return Err(Error::invalid("per_class must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut entries = Vec::with_capacity(2 * cfg.per_class);
    for i in 1..=cfg.per_class {
        entries.push(LabeledEntry {
            segment: normal_segment(&mut rng, cfg, format!("Z{i:03}"))?,
            label: ClassLabel::Normal,
        });
    }
    for i in 1..=cfg.per_class {
        entries.push(LabeledEntry {
            segment: epileptic_segment(&mut rng, cfg, format!("S{i:03}"))?,
            label: ClassLabel::Epileptic,
        });
    }
    LabeledDataset::new(entries)
}

/// Write a dataset as one text file per segment plus `manifest.csv`.
/// Returns the manifest path.
pub fn write_dataset(ds: &LabeledDataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rows = Vec::with_capacity(ds.len());
    for e in ds.entries() {
        let name = PathBuf::from(format!("{}.txt", e.segment.source_id()));
        write_segment(&e.segment, dir.join(&name))?;
        rows.push((name, e.label));
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(&manifest, &rows)?;
    Ok(manifest)
}
