//! Geometric readings of a centralized moment grid: elongation, rotational
//! fold symmetry, covariance, reflection axes, and the two threshold
//! classifiers built on them.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::cloud::PixelCloud;
use crate::error::{Error, Result};
use crate::moments::MomentTable;

/// Relative first-moment size above which a table does not count as
/// centralized.
const CENTRALIZED_TOLERANCE: f64 = 1e-8;
/// Default magnitude cutoff (relative to the natural entry scale) below
/// which an entry is uninformative for reflection checks.
pub const REFLECTION_MAGNITUDE_TOLERANCE: f64 = 1e-8;
/// Default bound on the per-entry reflection residual
/// `min(|mu|/scale, 1) * |sin(arg mu + (l-j) theta)|`. Coordinate jitter of
/// 1e-3 of the extent keeps the residual under about 0.1 on mirror images,
/// while clearly asymmetric images push it past 0.3 on several entries.
pub const REFLECTION_ANGLE_TOLERANCE: f64 = 0.2;

fn mass_of(table: &MomentTable) -> Result<f64> {
    let mass = table.mu00();
    if mass <= 0.0 {
        return Err(Error::EmptyImage);
    }
    Ok(mass)
}

fn ensure_centralized(table: &MomentTable) -> Result<f64> {
    let mass = mass_of(table)?;
    if table.order() < 1 {
        return Ok(mass);
    }
    let rms = (table.entry(1, 1).re.max(0.0) / mass).sqrt();
    let magnitude = table.entry(1, 0).norm();
    if magnitude > CENTRALIZED_TOLERANCE * mass * (1.0 + rms) {
        return Err(Error::NotCentralized { magnitude });
    }
    Ok(mass)
}

/// Natural size of `mu_(j,l)` for a centralized table: `mass * rms^(j+l)`.
fn entry_scale(table: &MomentTable, mass: f64, j: usize, l: usize) -> f64 {
    let rms = (table.entry(1, 1).re.max(0.0) / mass).sqrt();
    mass * rms.powi((j + l) as i32)
}

/// Shape elongation `|mu_(0,2)| / mu_(1,1)` of a centralized grid.
///
/// Lies in `[0, 1]`: exactly 1 for collinear images, 0 for images with more
/// than two-fold rotational symmetry. `None` when `mu_(1,1) = 0` (all mass at
/// the centroid), where the quantity is undefined.
pub fn elongation(centralized: &MomentTable) -> Result<Option<f64>> {
    if centralized.order() < 2 {
        return Err(Error::InsufficientOrder {
            needed: 2,
            available: centralized.order(),
        });
    }
    ensure_centralized(centralized)?;
    let mu11 = centralized.entry(1, 1).re;
    if mu11 <= 0.0 {
        return Ok(None);
    }
    Ok(Some(centralized.entry(0, 2).norm() / mu11))
}

/// True when the pixels lie on a single straight line: `1 - elongation <= tol`.
pub fn is_line(centralized: &MomentTable, tol: f64) -> Result<bool> {
    let e = elongation(centralized)?.ok_or(Error::DegenerateScale)?;
    Ok(1.0 - e <= tol)
}

/// A detected rotational fold and the largest normalized moment that should
/// have vanished for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldSymmetry {
    pub fold: usize,
    pub residual: f64,
}

/// Checks every fold `2..=max_fold` against the vanishing criterion: an
/// image has `F`-fold rotation symmetry exactly when `mu_(j,l) = 0` for all
/// `(l - j)` not divisible by `F`. Returns the folds whose largest offending
/// normalized entry stays within `tol`.
pub fn detect_frs(
    centralized: &MomentTable,
    max_fold: usize,
    tol: f64,
) -> Result<Vec<FoldSymmetry>> {
    if centralized.order() < max_fold + 2 {
        return Err(Error::InsufficientOrder {
            needed: max_fold + 2,
            available: centralized.order(),
        });
    }
    ensure_centralized(centralized)?;
    let mu11 = centralized.entry(1, 1).re;
    if mu11 <= 0.0 {
        return Err(Error::DegenerateScale);
    }
    let order = centralized.order();
    let sqrt_mu11 = mu11.sqrt();
    let mut found = Vec::new();
    for fold in 2..=max_fold {
        let mut residual = 0.0f64;
        for j in 0..=order {
            for l in 0..=order {
                let diff = l as i64 - j as i64;
                if diff.rem_euclid(fold as i64) == 0 {
                    continue;
                }
                let normalized = centralized.entry(j, l).norm() / sqrt_mu11.powi((j + l) as i32);
                residual = residual.max(normalized);
            }
        }
        if residual <= tol {
            found.push(FoldSymmetry { fold, residual });
        }
    }
    Ok(found)
}

/// Covariance matrix of the image viewed as a bivariate distribution around
/// its centroid, straight from the second-order entries.
pub fn covariance(centralized: &MomentTable) -> Result<Matrix2<f64>> {
    if centralized.order() < 2 {
        return Err(Error::InsufficientOrder {
            needed: 2,
            available: centralized.order(),
        });
    }
    let mass = mass_of(centralized)?;
    let mu11 = centralized.entry(1, 1).re;
    let mu02 = centralized.entry(0, 2);
    let half = 2.0 * mass;
    Ok(Matrix2::new(
        (mu11 + mu02.re) / half,
        -mu02.im / half,
        -mu02.im / half,
        (mu11 - mu02.re) / half,
    ))
}

/// Elongation from a covariance matrix: `|l_max - l_min| / (l_max + l_min)`
/// via the closed-form 2x2 eigenvalues. Agrees with [`elongation`].
pub fn eigen_elongation(sigma: &Matrix2<f64>) -> Result<f64> {
    let trace = sigma[(0, 0)] + sigma[(1, 1)];
    if trace <= 0.0 {
        return Err(Error::DegenerateScale);
    }
    let gap = ((sigma[(0, 0)] - sigma[(1, 1)]).powi(2) + 4.0 * sigma[(0, 1)].powi(2)).sqrt();
    Ok(gap / trace)
}

impl MomentTable {
    /// Moments of the image reflected about the line through the origin at
    /// angle `theta`: `mu_(j,l) -> mu_(l,j) e^(2 i (j-l) theta)`.
    ///
    /// Reflecting twice returns the original table.
    pub fn reflected(&self, theta: f64) -> MomentTable {
        let mut out = self.clone();
        for j in 0..=self.order() {
            for l in 0..=self.order() {
                let phase = Complex64::from_polar(1.0, 2.0 * (j as f64 - l as f64) * theta);
                out.set(j, l, self.entry(l, j) * phase);
            }
        }
        out
    }
}

/// Wraps a line angle into `(-pi/2, pi/2]` (a line and its opposite
/// direction are the same axis).
fn wrap_axis(theta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let x = (theta + std::f64::consts::FRAC_PI_2).rem_euclid(pi) - std::f64::consts::FRAC_PI_2;
    if x == -std::f64::consts::FRAC_PI_2 {
        std::f64::consts::FRAC_PI_2
    } else {
        x
    }
}

/// Detects a reflection axis of a centralized grid.
///
/// Mirror symmetry about angle `t` forces `Im(mu_(j,l) e^(i (l-j) t)) = 0`
/// for every entry. A candidate angle comes from the first entry
/// `mu_(j,j+1)` with a usable real part (`pi/2` when none has one); the
/// reported angle pools every informative entry of total degree up to the
/// table order through a weighted phase residual, which keeps the estimate
/// sharp when individual entries are small or noisy. The pooled angle is
/// then verified entry by entry; entries below the magnitude cutoff are 0/0
/// cases and are skipped, and each residual is weighted by the (capped)
/// entry magnitude so that noise-dominated entries cannot veto a real axis.
pub fn reflection_axis(centralized: &MomentTable, magnitude_tol: f64) -> Result<Option<f64>> {
    reflection_axis_with(centralized, magnitude_tol, REFLECTION_ANGLE_TOLERANCE)
}

pub fn reflection_axis_with(
    centralized: &MomentTable,
    magnitude_tol: f64,
    angle_tol: f64,
) -> Result<Option<f64>> {
    let mass = ensure_centralized(centralized)?;
    let order = centralized.order();
    if order < 2 {
        return Err(Error::InsufficientOrder {
            needed: 2,
            available: order,
        });
    }
    if centralized.entry(1, 1).re <= 0.0 {
        // All mass at the centroid: every axis fixes the image, none is
        // distinguished.
        return Ok(None);
    }

    let mut candidate = std::f64::consts::FRAC_PI_2;
    for j in 0..order {
        let entry = centralized.entry(j, j + 1);
        if entry.re.abs() > magnitude_tol * entry_scale(centralized, mass, j, j + 1) {
            candidate = (-entry.im / entry.re).atan();
            break;
        }
    }

    // (phase, index difference, normalized magnitude) of every informative
    // entry with total degree within the table order.
    let mut terms: Vec<(f64, f64, f64)> = Vec::new();
    for j in 0..=order {
        for l in (j + 1)..=order {
            if j + l > order {
                continue;
            }
            let entry = centralized.entry(j, l);
            let normalized = entry.norm() / entry_scale(centralized, mass, j, l);
            if normalized > magnitude_tol {
                terms.push((entry.arg(), (l - j) as f64, normalized));
            }
        }
    }
    if terms.is_empty() {
        // Nothing constrains the axis; fall back to the candidate rule.
        return Ok(Some(candidate));
    }

    let objective = |theta: f64| -> f64 {
        terms
            .iter()
            .map(|&(psi, k, m)| {
                let s = (psi + k * theta).sin();
                m.min(10.0) * s * s
            })
            .sum()
    };

    // Global scan over the axis range, then golden-section descent. Among
    // near-tied minima (multi-axis shapes), prefer the one closest to the
    // candidate entry's angle.
    let half_pi = std::f64::consts::FRAC_PI_2;
    let samples = 1024;
    let mut best = (f64::INFINITY, candidate);
    for k in 0..samples {
        let theta = -half_pi + std::f64::consts::PI * (k as f64 + 0.5) / samples as f64;
        let value = objective(theta);
        if value < best.0 {
            best = (value, theta);
        }
    }
    let refine = |seed: f64| -> (f64, f64) {
        let golden = 0.381_966_011_250_105_1;
        let window = std::f64::consts::PI / samples as f64;
        let (mut lo, mut hi) = (seed - window, seed + window);
        while hi - lo > 1e-12 {
            let a = lo + golden * (hi - lo);
            let b = hi - golden * (hi - lo);
            if objective(a) < objective(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let theta = 0.5 * (lo + hi);
        (objective(theta), theta)
    };
    let (global_value, global_theta) = refine(best.1);
    let (candidate_value, candidate_theta) = refine(candidate);
    let theta = if candidate_value <= global_value * (1.0 + 1e-9) + 1e-30 {
        candidate_theta
    } else {
        global_theta
    };

    for &(psi, k, m) in &terms {
        if m.min(1.0) * (psi + k * theta).sin().abs() > angle_tol {
            return Ok(None);
        }
    }
    Ok(Some(wrap_axis(theta)))
}

/// The horizontal-symmetry score
/// `Im(mu_(0,2)/mu_(1,1))^2 + Im(mu_(0,3)/mu_(1,1)^(3/2))^2 + Im(mu_(1,2)/mu_(1,1)^(3/2))^2`.
///
/// Zero exactly when the first four triangle rows are consistent with a
/// horizontal reflection axis; an image classifies as symmetric when the
/// score is below `r^2` for a chosen threshold `r`.
pub fn horizontal_symmetry_score(centralized: &MomentTable) -> Result<f64> {
    if centralized.order() < 3 {
        return Err(Error::InsufficientOrder {
            needed: 3,
            available: centralized.order(),
        });
    }
    ensure_centralized(centralized)?;
    let mu11 = centralized.entry(1, 1).re;
    if mu11 <= 0.0 {
        return Err(Error::DegenerateScale);
    }
    let p32 = mu11 * mu11.sqrt();
    let a = centralized.entry(0, 2).im / mu11;
    let b = centralized.entry(0, 3).im / p32;
    let c = centralized.entry(1, 2).im / p32;
    Ok(a * a + b * b + c * c)
}

/// Verdict of the any-axis symmetry classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisVerdict {
    /// All three reference angles sit within the threshold of +-pi/2.
    SymmetricVertical,
    /// The three reference angles agree; the axis is their mean.
    Symmetric {
        axis: f64,
    },
    NotSymmetric,
    /// Some reference moment had no usable real or imaginary part, so the
    /// arctangent rule does not apply.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisClassification {
    pub verdict: AxisVerdict,
    /// `atan(-Im/Re)` of `mu_(1,2)`, `mu_(2,3)`, `mu_(3,4)`.
    pub angles: [f64; 3],
}

/// Three-angle axis classifier: compares `atan(-Im/Re)` of `mu_(1,2)`,
/// `mu_(2,3)` and `mu_(3,4)` and declares symmetry when they agree within
/// `threshold` (radians), with a special case for vertical axes where the
/// arctangent wraps.
pub fn axis_symmetry_classify(
    centralized: &MomentTable,
    threshold: f64,
) -> Result<AxisClassification> {
    if centralized.order() < 4 {
        return Err(Error::InsufficientOrder {
            needed: 4,
            available: centralized.order(),
        });
    }
    let mass = ensure_centralized(centralized)?;
    let references = [(1usize, 2usize), (2, 3), (3, 4)];
    let mut angles = [0.0f64; 3];
    let mut indeterminate = false;
    for (i, &(j, l)) in references.iter().enumerate() {
        let entry = centralized.entry(j, l);
        let scale = entry_scale(centralized, mass, j, l);
        if entry.norm() <= 1e-12 * scale {
            indeterminate = true;
        }
        angles[i] = (-entry.im / entry.re).atan();
    }
    if indeterminate {
        return Ok(AxisClassification {
            verdict: AxisVerdict::Indeterminate,
            angles,
        });
    }

    let half_pi = std::f64::consts::FRAC_PI_2;
    let vertical = angles.iter().all(|t| (t.abs() - half_pi).abs() < threshold);
    if vertical {
        return Ok(AxisClassification {
            verdict: AxisVerdict::SymmetricVertical,
            angles,
        });
    }
    let agree = (angles[0] - angles[1]).abs() < threshold
        && (angles[1] - angles[2]).abs() < threshold
        && (angles[2] - angles[0]).abs() < threshold;
    if agree {
        return Ok(AxisClassification {
            verdict: AxisVerdict::Symmetric {
                axis: (angles[0] + angles[1] + angles[2]) / 3.0,
            },
            angles,
        });
    }
    Ok(AxisClassification {
        verdict: AxisVerdict::NotSymmetric,
        angles,
    })
}

/// Confusion counts for a batch of binary decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassificationMetrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl ClassificationMetrics {
    pub fn precision(&self) -> Option<f64> {
        let denom = self.true_positives + self.false_positives;
        (denom > 0).then(|| self.true_positives as f64 / denom as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let denom = self.true_positives + self.false_negatives;
        (denom > 0).then(|| self.true_positives as f64 / denom as f64)
    }

    pub fn accuracy(&self) -> Option<f64> {
        let total =
            self.true_positives + self.false_positives + self.true_negatives + self.false_negatives;
        (total > 0).then(|| (self.true_positives + self.true_negatives) as f64 / total as f64)
    }
}

/// Tallies predictions against ground truth.
pub fn classification_metrics(
    predictions: &[bool],
    truths: &[bool],
) -> Result<ClassificationMetrics> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch {
            expected: truths.len(),
            found: predictions.len(),
        });
    }
    let mut m = ClassificationMetrics {
        true_positives: 0,
        false_positives: 0,
        true_negatives: 0,
        false_negatives: 0,
    };
    for (&p, &t) in predictions.iter().zip(truths) {
        match (p, t) {
            (true, true) => m.true_positives += 1,
            (true, false) => m.false_positives += 1,
            (false, false) => m.true_negatives += 1,
            (false, true) => m.false_negatives += 1,
        }
    }
    Ok(m)
}

/// Settings for [`SymmetryReport::analyze`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryOptions {
    pub order: usize,
    pub line_tolerance: f64,
    pub frs_tolerance: f64,
    /// Largest fold to test; clamped to the pixel count (discrete images
    /// cannot have infinite-fold symmetry) and to what the order supports.
    pub max_fold: usize,
    pub reflection_magnitude_tolerance: f64,
    pub reflection_angle_tolerance: f64,
    /// Radians; agreement threshold for the three-angle axis classifier.
    pub axis_threshold: f64,
}

impl Default for SymmetryOptions {
    fn default() -> Self {
        Self {
            order: 10,
            line_tolerance: 1e-9,
            frs_tolerance: 1e-6,
            max_fold: 8,
            reflection_magnitude_tolerance: REFLECTION_MAGNITUDE_TOLERANCE,
            reflection_angle_tolerance: REFLECTION_ANGLE_TOLERANCE,
            axis_threshold: 4.0 * std::f64::consts::PI / 180.0,
        }
    }
}

/// Everything the analyzers can say about one image.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub elongation: Option<f64>,
    pub is_line: bool,
    pub frs_folds: Vec<FoldSymmetry>,
    pub reflection_axis: Option<f64>,
    /// In the image's original coordinate units.
    pub covariance: Matrix2<f64>,
    pub horizontal_score: Option<f64>,
    pub axis_angles: [f64; 3],
    pub axis_verdict: AxisVerdict,
}

impl SymmetryReport {
    /// Runs every detector on one cloud. Coordinates are normalized for
    /// conditioning; the covariance is mapped back to original units.
    pub fn analyze(cloud: &PixelCloud, options: &SymmetryOptions) -> Result<SymmetryReport> {
        let (normalized, record) = cloud.normalized()?;
        let table = MomentTable::compute(&normalized, options.order)?;
        let (centralized, _) = table.centralized()?;

        let elong = elongation(&centralized)?;
        let is_line = elong
            .map(|e| 1.0 - e <= options.line_tolerance)
            .unwrap_or(false);

        let max_fold = options
            .max_fold
            .min(cloud.len())
            .min(options.order.saturating_sub(2));
        let frs_folds = if max_fold >= 2 && centralized.entry(1, 1).re > 0.0 {
            detect_frs(&centralized, max_fold, options.frs_tolerance)?
        } else {
            Vec::new()
        };

        let reflection_axis = reflection_axis_with(
            &centralized,
            options.reflection_magnitude_tolerance,
            options.reflection_angle_tolerance,
        )?;

        let covariance = covariance(&centralized)? / (record.scale * record.scale);
        let horizontal_score = match horizontal_symmetry_score(&centralized) {
            Ok(score) => Some(score),
            Err(Error::DegenerateScale) => None,
            Err(e) => return Err(e),
        };
        let axis = axis_symmetry_classify(&centralized, options.axis_threshold)?;

        Ok(SymmetryReport {
            elongation: elong,
            is_line,
            frs_folds,
            reflection_axis,
            covariance,
            horizontal_score,
            axis_angles: axis.angles,
            axis_verdict: axis.verdict,
        })
    }
}
