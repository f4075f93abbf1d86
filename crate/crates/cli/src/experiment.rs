//! Threshold-sweep classification harness: precision, recall and accuracy
//! per threshold over a labeled shape corpus.

use anyhow::{bail, Result};
use moment_triangle::{
    axis_symmetry_classify, classification_metrics, horizontal_symmetry_score, AxisVerdict,
    MomentTable, PixelCloud,
};
use rayon::prelude::*;

/// Which classifier the sweep drives.
///
/// `Horizontal` thresholds are the dimensionless `r` (an image is symmetric
/// when its score is below `r^2`); `Axis` thresholds are in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentMode {
    Horizontal,
    Axis,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub mode: ExperimentMode,
    /// Moment order used per image.
    pub order: usize,
    /// Worker threads; `None` uses all cores. Output is identical either way.
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(lo: f64, hi: f64, step: f64, mode: ExperimentMode) -> Self {
        Self {
            lo,
            hi,
            step,
            mode,
            order: 8,
            jobs: None,
        }
    }

    fn thresholds(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub threshold: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<MetricsRow>,
    pub best_threshold: f64,
    pub best_accuracy: f64,
}

/// Per-image statistic cached once so the sweep is cheap.
enum ImageStat {
    Score(f64),
    Angles { angles: [f64; 3], usable: bool },
}

fn image_stat(cloud: &PixelCloud, mode: ExperimentMode, order: usize) -> Result<ImageStat> {
    let (normalized, _) = cloud.normalized()?;
    let table = MomentTable::compute(&normalized, order)?;
    let (centralized, _) = table.centralized()?;
    Ok(match mode {
        ExperimentMode::Horizontal => ImageStat::Score(horizontal_symmetry_score(&centralized)?),
        ExperimentMode::Axis => {
            // The threshold only matters for the verdict; the raw angles are
            // threshold independent.
            let result = axis_symmetry_classify(&centralized, 1.0)?;
            ImageStat::Angles {
                angles: result.angles,
                usable: result.verdict != AxisVerdict::Indeterminate,
            }
        }
    })
}

fn predict(stat: &ImageStat, threshold: f64, mode: ExperimentMode) -> bool {
    match (stat, mode) {
        (ImageStat::Score(score), ExperimentMode::Horizontal) => *score < threshold * threshold,
        (ImageStat::Angles { angles, usable }, ExperimentMode::Axis) => {
            if !usable {
                return false;
            }
            let t = threshold.to_radians();
            let half_pi = std::f64::consts::FRAC_PI_2;
            let vertical = angles.iter().all(|a| (a.abs() - half_pi).abs() < t);
            let agree = (angles[0] - angles[1]).abs() < t
                && (angles[1] - angles[2]).abs() < t
                && (angles[2] - angles[0]).abs() < t;
            vertical || agree
        }
        _ => unreachable!("stat kind follows mode"),
    }
}

/// Sweeps the threshold over the labeled corpus and reports one metrics row
/// per threshold plus the accuracy-maximizing threshold (smallest on ties).
pub fn run_experiment(
    config: &ExperimentConfig,
    corpus: &[(PixelCloud, bool)],
) -> Result<ExperimentResult> {
    let sweep_ok = config.lo < config.hi && config.step > 0.0;
    if !sweep_ok {
        bail!(
            "invalid sweep {}..{} step {}",
            config.lo,
            config.hi,
            config.step
        );
    }
    if corpus.is_empty() {
        bail!("empty corpus");
    }

    let compute = || -> Result<Vec<ImageStat>> {
        corpus
            .par_iter()
            .map(|(cloud, _)| image_stat(cloud, config.mode, config.order))
            .collect()
    };
    let stats = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()?
            .install(compute),
        None => compute(),
    }?;
    let truths: Vec<bool> = corpus.iter().map(|&(_, label)| label).collect();

    let mut rows = Vec::new();
    let mut best = (f64::NEG_INFINITY, config.lo);
    for threshold in config.thresholds() {
        let predictions: Vec<bool> = stats
            .iter()
            .map(|s| predict(s, threshold, config.mode))
            .collect();
        let metrics = classification_metrics(&predictions, &truths)?;
        let row = MetricsRow {
            threshold,
            precision: metrics.precision(),
            recall: metrics.recall(),
            accuracy: metrics.accuracy(),
        };
        if let Some(acc) = row.accuracy {
            if acc > best.0 {
                best = (acc, threshold);
            }
        }
        rows.push(row);
    }
    Ok(ExperimentResult {
        rows,
        best_threshold: best.1,
        best_accuracy: best.0,
    })
}

fn metric_field(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.16e}"),
        None => "nan".to_string(),
    }
}

/// `threshold,precision,recall,accuracy` rows with 17 significant digits.
pub fn metrics_to_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("threshold,precision,recall,accuracy\n");
    for row in rows {
        out.push_str(&format!(
            "{:.16e},{},{},{}\n",
            row.threshold,
            metric_field(row.precision),
            metric_field(row.recall),
            metric_field(row.accuracy),
        ));
    }
    out
}
