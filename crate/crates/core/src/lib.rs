//! EEG sub-band analysis: FIR band-limiting, Daubechies-4 multilevel
//! wavelet decomposition, raw periodograms, six-statistic feature vectors
//! and a small feedforward classifier.
//!
//! ```text
//! segment ──► apply_fir (0–60 Hz) ──► dwt_multilevel (db4, 4 levels)
//!                                        │
//!        a₄ d₄ d₃ d₂ d₁ ◄── reconstruct_subband (delta … gamma)
//!                                        │
//!                     extract_features ──► train_mlp / evaluate
//! ```

pub mod classify;
pub mod error;
pub mod features;
pub mod filtering;
pub mod ingest;
pub mod pipeline;
pub mod spectral;
pub mod surrogate;
pub mod wavelet;

pub use error::{Error, Result};
pub use ingest::{ClassLabel, EegSegment, LabeledDataset};
pub use pipeline::PipelineConfig;
pub use wavelet::{db4_filter_bank, SubBandId};
