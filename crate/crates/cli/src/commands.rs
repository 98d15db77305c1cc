use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use eegband::classify::{Confusion, Prediction, TrainConfig};
use eegband::features::{extract_features, FeatureMatrix, FeatureVector};
use eegband::filtering::apply_fir;
use eegband::ingest::{load_dataset, load_segment, LabeledDataset};
use eegband::pipeline::{FeatureSelection, PipelineConfig, ResidualSummary};
use eegband::spectral::{estimate_spectral_slope, export_loglog, periodogram};
use eegband::surrogate::{surrogate_dataset, write_dataset, SurrogateConfig};
use eegband::wavelet::SubBandId;

use crate::Command;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Pipeline(#[from] eegband::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Pipeline(e) if e.is_input_error() => 2,
            CliError::Pipeline(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cmd: &Command, cfg: &PipelineConfig, out_dir: &Path) -> Result<()> {
    match cmd {
        Command::Decompose { input } => decompose(input, cfg, out_dir),
        Command::Periodogram {
            inputs,
            slope,
            slope_min_hz,
            slope_max_hz,
        } => periodograms(inputs, cfg, out_dir, slope.then_some((*slope_min_hz, *slope_max_hz))),
        Command::Features { manifest, compare_reference } => features(manifest, cfg, out_dir, *compare_reference),
        Command::TrainEval {
            manifest,
            synthetic,
            per_class,
        } => {
            let (ds, source) = if *synthetic {
                let sc = SurrogateConfig {
                    per_class: *per_class,
                    sample_rate: cfg.sample_rate,
                    seed: cfg.train.seed,
                    ..SurrogateConfig::default()
                };
                (surrogate_dataset(&sc)?, "synthetic".to_string())
            } else {
                let m = manifest.as_ref().expect("clap requires a manifest");
                (load_dataset(m, cfg.sample_rate)?, m.display().to_string())
            };
            train_eval(&ds, &source, cfg, out_dir)
        }
        Command::Synthetic { per_class, length } => {
            let sc = SurrogateConfig {
                per_class: *per_class,
                length: *length,
                sample_rate: cfg.sample_rate,
                seed: cfg.train.seed,
            };
            let ds = surrogate_dataset(&sc)?;
            let manifest = write_dataset(&ds, out_dir)?;
            println!("wrote {} segments and {}", ds.len(), manifest.display());
            Ok(())
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Usage(format!("cannot create output directory {}: {e}", dir.display()))
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable report");
    write_file(path, &(text + "\n"))
}

fn validated(cfg: &PipelineConfig) -> Result<()> {
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))
}

#[derive(Serialize)]
struct ComponentMeta {
    label: String,
    band: Option<SubBandId>,
    nominal_range_hz: Option<(f64, f64)>,
    dyadic_range_hz: (f64, f64),
    coefficient_count: usize,
    coefficient_file: String,
    reconstruction_file: String,
}

#[derive(Serialize)]
struct DecomposeMeta {
    source_id: String,
    sample_rate: f64,
    nyquist_hz: f64,
    cutoff_hz: f64,
    fir_taps: usize,
    wavelet: String,
    levels: usize,
    original_length: usize,
    level_lengths: Vec<usize>,
    components: Vec<ComponentMeta>,
    residual: ResidualSummary,
}

fn decompose(input: &Path, cfg: &PipelineConfig, out_dir: &Path) -> Result<()> {
    let seg = load_segment(input, cfg.sample_rate)?;
    let out = cfg.decompose(&seg)?;
    ensure_dir(out_dir)?;
    let id = seg.source_id();

    let mut components = Vec::new();
    for c in &out.components {
        let name = c.band.map(|b| b.name().to_string()).unwrap_or_else(|| c.label.clone());
        let rec_file = format!("{id}_{name}.csv");
        let mut csv = String::from("index,value\n");
        for (i, v) in c.samples.iter().enumerate() {
            let _ = writeln!(csv, "{i},{v}");
        }
        write_file(&out_dir.join(&rec_file), &csv)?;

        let coeffs = out
            .decomposition
            .component(c.component)
            .expect("component listed by the decomposition");
        let coef_file = format!("{id}_coeffs_{}.csv", c.label);
        let mut csv = String::from("index,coefficient\n");
        for (i, v) in coeffs.iter().enumerate() {
            let _ = writeln!(csv, "{i},{v}");
        }
        write_file(&out_dir.join(&coef_file), &csv)?;

        components.push(ComponentMeta {
            label: c.label.clone(),
            band: c.band,
            nominal_range_hz: c.band.map(SubBandId::nominal_range_hz),
            dyadic_range_hz: c.range_hz,
            coefficient_count: coeffs.len(),
            coefficient_file: coef_file,
            reconstruction_file: rec_file,
        });
    }

    let meta = DecomposeMeta {
        source_id: id.to_string(),
        sample_rate: seg.sample_rate(),
        nyquist_hz: seg.sample_rate() / 2.0,
        cutoff_hz: cfg.cutoff_hz,
        fir_taps: cfg.fir_taps,
        wavelet: out.decomposition.bank_id().to_string(),
        levels: out.decomposition.levels(),
        original_length: out.decomposition.original_length(),
        level_lengths: out.decomposition.level_lengths().to_vec(),
        components,
        residual: out.residual,
    };
    write_json(&out_dir.join(format!("{id}_decomposition.json")), &meta)?;
    println!(
        "{id}: {} components, reconstruction max error {:.3e} (relative {:.3e}), sub-band sum error {:.3e}",
        meta.components.len(),
        out.residual.max_abs_error,
        out.residual.relative_error,
        out.residual.subband_sum_relative_error
    );
    Ok(())
}

#[derive(Serialize)]
struct PeriodogramMeta {
    source_id: String,
    samples: usize,
    sample_rate: f64,
    nyquist_hz: f64,
    points: usize,
    csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope: Option<SlopeMeta>,
}

#[derive(Serialize)]
struct SlopeMeta {
    f_min_hz: f64,
    f_max_hz: f64,
    log_log_slope: f64,
}

fn periodograms(
    inputs: &[PathBuf],
    cfg: &PipelineConfig,
    out_dir: &Path,
    slope: Option<(f64, f64)>,
) -> Result<()> {
    let segments = inputs
        .iter()
        .map(|p| load_segment(p, cfg.sample_rate))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    ensure_dir(out_dir)?;
    for seg in &segments {
        let p = periodogram(seg)?;
        let id = seg.source_id();
        let csv = format!("{id}_periodogram.csv");
        export_loglog(&p, out_dir.join(&csv))?;
        let slope = match slope {
            Some((lo, hi)) => Some(SlopeMeta {
                f_min_hz: lo,
                f_max_hz: hi,
                log_log_slope: estimate_spectral_slope(&p, lo, hi)?,
            }),
            None => None,
        };
        let meta = PeriodogramMeta {
            source_id: id.to_string(),
            samples: seg.len(),
            sample_rate: seg.sample_rate(),
            nyquist_hz: p.nyquist(),
            points: p.points().len(),
            csv: csv.clone(),
            slope,
        };
        write_json(&out_dir.join(format!("{id}_periodogram.json")), &meta)?;
        match &meta.slope {
            Some(s) => println!("{id}: {csv} ({} points), slope {:.4}", meta.points, s.log_log_slope),
            None => println!("{id}: {csv} ({} points)", meta.points),
        }
    }
    Ok(())
}

/// Reference rows for the two exemplar segments.
const REFERENCE_ROWS: [(&str, [f64; 6]); 2] = [
    ("Z038", [-190.0, 185.0, 6.816, 7.0, -1.0, 478.5]),
    ("S001", [-1765.0, 1027.0, 47.1, 187.0, 399.0, 42.6]),
];

fn feature_file_name(m: &FeatureMatrix, sel: FeatureSelection) -> String {
    match sel {
        FeatureSelection::Raw => "features_raw.csv".into(),
        _ => format!("features_{}.csv", m.band),
    }
}

fn features(manifest: &Path, cfg: &PipelineConfig, out_dir: &Path, compare_reference: bool) -> Result<()> {
    validated(cfg)?;
    let ds = load_dataset(manifest, cfg.sample_rate)?;
    let mats = cfg.feature_matrices(&ds)?;
    ensure_dir(out_dir)?;
    for m in &mats {
        let name = feature_file_name(m, cfg.band);
        m.write_csv(out_dir.join(&name))?;
        println!("{name}: {} rows", m.len());
    }
    if compare_reference {
        print_reference_comparison(&ds, cfg)?;
    }
    Ok(())
}

fn fmt_row(label: &str, v: [f64; 6]) -> String {
    format!(
        "{label:<24}{:>10.3}{:>10.3}{:>10.3}{:>10.3}{:>10.3}{:>10.3}",
        v[0], v[1], v[2], v[3], v[4], v[5]
    )
}

fn print_reference_comparison(ds: &LabeledDataset, cfg: &PipelineConfig) -> Result<()> {
    let fir = cfg.filter()?;
    let pipeline = cfg.feature_pipeline(true)?;
    println!(
        "{:<24}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}",
        "", "min", "max", "mean", "median", "mode", "std"
    );
    let mut found = false;
    for (id, reference) in REFERENCE_ROWS {
        let Some(entry) = ds
            .entries()
            .iter()
            .find(|e| e.segment.source_id().eq_ignore_ascii_case(id))
        else {
            continue;
        };
        found = true;
        let seg = &entry.segment;
        let raw: FeatureVector = extract_features(seg.samples())?;
        let limited = extract_features(apply_fir(&fir, seg)?.samples())?;
        let delta = pipeline.features(seg, eegband::features::FeatureBand::SubBand(SubBandId::Delta))?;
        println!("{}", fmt_row(&format!("{id} reference"), reference));
        println!("{}", fmt_row(&format!("{id} raw"), raw.to_array()));
        println!("{}", fmt_row(&format!("{id} band-limited"), limited.to_array()));
        println!("{}", fmt_row(&format!("{id} delta"), delta.to_array()));
    }
    if !found {
        println!("(neither Z038 nor S001 is listed in the manifest)");
    }
    println!("note: the reference std column is not consistent with the other columns and is shown for comparison only");
    Ok(())
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    dataset: &'a str,
    segments: usize,
    band: String,
    seed: u64,
    config: &'a TrainConfig,
    train_size: usize,
    test_size: usize,
    train_accuracy: f64,
    accuracy: f64,
    confusion: Confusion,
    predictions: &'a [Prediction],
}

fn train_eval(ds: &LabeledDataset, source: &str, cfg: &PipelineConfig, out_dir: &Path) -> Result<()> {
    validated(cfg)?;
    log::info!("training on {} segments from {source}", ds.len());
    let out = cfg.train_eval(ds)?;
    ensure_dir(out_dir)?;
    out.model.save(out_dir.join("model.json"))?;
    let report = ReportDoc {
        dataset: source,
        segments: ds.len(),
        band: cfg.band.to_string(),
        seed: cfg.train.seed,
        config: &cfg.train,
        train_size: ds.len() - out.report.predictions.len(),
        test_size: out.report.predictions.len(),
        train_accuracy: out.train_accuracy,
        accuracy: out.report.accuracy,
        confusion: out.report.confusion,
        predictions: &out.report.predictions,
    };
    write_json(&out_dir.join("report.json"), &report)?;
    let c = out.report.confusion;
    println!(
        "held-out accuracy {:.4} on {} segments (TP {} TN {} FP {} FN {}), train accuracy {:.4}, seed {}",
        out.report.accuracy,
        report.test_size,
        c.tp,
        c.tn,
        c.fp,
        c.fn_,
        out.train_accuracy,
        cfg.train.seed
    );
    Ok(())
}
