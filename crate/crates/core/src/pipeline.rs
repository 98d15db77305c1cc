//! End-to-end configuration shared by the library and the CLI.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::classify::{
    evaluate_features, stratified_split_indices, train_features, EvalReport, LabeledFeatures,
    MlpModel, TrainConfig,
};
use crate::error::{Error, Result};
use crate::features::{feature_table, FeatureBand, FeatureMatrix, FeaturePipeline};
use crate::filtering::{apply_fir, design_lowpass_fir, FirFilter, DEFAULT_CUTOFF_HZ, DEFAULT_TAPS};
use crate::ingest::{EegSegment, LabeledDataset, BONN_SAMPLE_RATE};
use crate::wavelet::{
    component_range_hz, db4_filter_bank, dwt_multilevel, reconstruct_component, reconstruct_full,
    Component, DecompositionResult, SubBandId, WaveletFilterBank, DEFAULT_LEVELS,
};

/// Which signal(s) feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FeatureSelection {
    /// One band of the band-limited signal (or the whole band-limited signal).
    Single(FeatureBand),
    /// The unfiltered segment.
    Raw,
    /// All five sub-bands, concatenated (30 columns).
    AllBands,
}

impl Default for FeatureSelection {
    fn default() -> Self {
        FeatureSelection::Single(FeatureBand::SubBand(SubBandId::Delta))
    }
}

impl fmt::Display for FeatureSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSelection::Single(b) => write!(f, "{b}"),
            FeatureSelection::Raw => f.write_str("raw"),
            FeatureSelection::AllBands => f.write_str("all"),
        }
    }
}

impl FromStr for FeatureSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(FeatureSelection::Raw),
            "all" => Ok(FeatureSelection::AllBands),
            other => other.parse().map(FeatureSelection::Single).map_err(|_| {
                Error::invalid(format!(
                    "unknown band {s:?} (expected delta, theta, alpha, beta, gamma, whole, raw or all)"
                ))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub sample_rate: f64,
    pub cutoff_hz: f64,
    pub fir_taps: usize,
    pub levels: usize,
    pub band: FeatureSelection,
    pub train: TrainConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sample_rate: BONN_SAMPLE_RATE,
            cutoff_hz: DEFAULT_CUTOFF_HZ,
            fir_taps: DEFAULT_TAPS,
            levels: DEFAULT_LEVELS,
            band: FeatureSelection::default(),
            train: TrainConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Checks the filter design and decomposition depth only.
    pub fn validate_signal_path(&self) -> Result<()> {
        self.filter()?;
        if self.levels == 0 {
            return Err(Error::invalid("levels must be at least 1"));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_signal_path()?;
        let uses_bands = matches!(
            self.band,
            FeatureSelection::AllBands | FeatureSelection::Single(FeatureBand::SubBand(_))
        );
        if uses_bands && self.levels != SubBandId::LEVELS {
            return Err(Error::invalid(format!(
                "band {} needs levels = {}, got {}",
                self.band,
                SubBandId::LEVELS,
                self.levels
            )));
        }
        self.train.validate()
    }

    pub fn filter(&self) -> Result<FirFilter> {
        design_lowpass_fir(self.cutoff_hz, self.sample_rate, self.fir_taps)
    }

    pub fn bank(&self) -> WaveletFilterBank {
        db4_filter_bank()
    }

    pub fn feature_pipeline(&self, band_limit: bool) -> Result<FeaturePipeline> {
        Ok(FeaturePipeline {
            filter: if band_limit { Some(self.filter()?) } else { None },
            bank: self.bank(),
            levels: self.levels,
        })
    }

    /// Feature matrices for the configured selection, one per band used.
    pub fn feature_matrices(&self, ds: &LabeledDataset) -> Result<Vec<FeatureMatrix>> {
        self.validate()?;
        match self.band {
            FeatureSelection::Single(b) => Ok(vec![feature_table(ds, b, &self.feature_pipeline(true)?)?]),
            FeatureSelection::Raw => Ok(vec![feature_table(
                ds,
                FeatureBand::WholeSignal,
                &self.feature_pipeline(false)?,
            )?]),
            FeatureSelection::AllBands => {
                let p = self.feature_pipeline(true)?;
                SubBandId::ALL
                    .into_iter()
                    .map(|b| feature_table(ds, FeatureBand::SubBand(b), &p))
                    .collect()
            }
        }
    }

    /// Features, stratified split, training and held-out evaluation.
    pub fn train_eval(&self, ds: &LabeledDataset) -> Result<TrainEvalOutcome> {
        let table = LabeledFeatures::concat(&self.feature_matrices(ds)?)?;
        let (train_idx, test_idx) =
            stratified_split_indices(&table.labels, self.train.split_ratio, self.train.seed)?;
        let train = table.subset(&train_idx);
        let test = table.subset(&test_idx);
        let model = train_features(&train, &self.train)?;
        let train_report = evaluate_features(&model, &train)?;
        let report = evaluate_features(&model, &test)?;
        Ok(TrainEvalOutcome {
            model,
            train_accuracy: train_report.accuracy,
            report,
        })
    }

    /// Band-limit and decompose one segment, reconstructing every component.
    pub fn decompose(&self, segment: &EegSegment) -> Result<DecomposeOutcome> {
        self.validate_signal_path()?;
        let bank = self.bank();
        let limited = apply_fir(&self.filter()?, segment)?;
        let decomposition = dwt_multilevel(&limited, &bank, self.levels)?;
        let full = reconstruct_full(&decomposition, &bank)?;
        let components = decomposition
            .components()
            .into_iter()
            .map(|c| {
                Ok(ComponentSignal {
                    component: c,
                    label: c.label(self.levels),
                    band: band_for(c, self.levels),
                    range_hz: component_range_hz(c, self.levels, segment.sample_rate()),
                    samples: reconstruct_component(&decomposition, c, &bank)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let scale = max_abs(limited.samples());
        let residual = max_abs_diff(limited.samples(), &full);
        let mut sum = vec![0.0; full.len()];
        for c in &components {
            for (s, v) in sum.iter_mut().zip(&c.samples) {
                *s += v;
            }
        }
        let additive = max_abs_diff(&sum, &full);
        let full_scale = max_abs(&full);
        Ok(DecomposeOutcome {
            band_limited: limited,
            decomposition,
            components,
            residual: ResidualSummary {
                max_abs_error: residual,
                max_abs_signal: scale,
                relative_error: if scale > 0.0 { residual / scale } else { residual },
                subband_sum_max_abs_error: additive,
                subband_sum_relative_error: if full_scale > 0.0 { additive / full_scale } else { additive },
            },
        })
    }
}

fn band_for(c: Component, levels: usize) -> Option<SubBandId> {
    if levels != SubBandId::LEVELS {
        return None;
    }
    SubBandId::ALL.into_iter().find(|b| b.component() == c)
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[derive(Debug, Clone)]
pub struct TrainEvalOutcome {
    pub model: MlpModel,
    pub train_accuracy: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone)]
pub struct ComponentSignal {
    pub component: Component,
    pub label: String,
    pub band: Option<SubBandId>,
    pub range_hz: (f64, f64),
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSummary {
    pub max_abs_error: f64,
    pub max_abs_signal: f64,
    pub relative_error: f64,
    pub subband_sum_max_abs_error: f64,
    pub subband_sum_relative_error: f64,
}

#[derive(Debug, Clone)]
pub struct DecomposeOutcome {
    pub band_limited: EegSegment,
    pub decomposition: DecompositionResult,
    pub components: Vec<ComponentSignal>,
    pub residual: ResidualSummary,
}
