//! The discrete Radon transform and its moment bridge to triangle rows.
//!
//! Projecting the image onto the direction `(cos t, sin t)` gives a discrete
//! mass profile `f_t(r)`. Its `n`-th moment is a finite Fourier series in the
//! angle whose coefficients are exactly the entries of triangle row `n`:
//!
//! `m_n(t) = (1/2^n) * sum_l C(n,l) mu_(l,n-l) e^(i (n-2l) t)`
//!
//! so rows can be evaluated into projection moments and recovered back from
//! `n + 1` generic samples.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cloud::PixelCloud;
use crate::error::{Error, Result};
use crate::invariants::wrap_angle;
use crate::reconstruct::{intensities_from_column, reconstruct_image, DEFAULT_CONDITION_BOUND};
use crate::triangle::PascalTriangle;

/// Lower bound on pairwise distances of `e^(2 i t_j)` for an angle set to
/// count as generic.
pub const DEFAULT_GENERIC_GAP: f64 = 1e-8;
/// Imaginary residue allowed when evaluating the Fourier side, relative to
/// the value.
pub const FOURIER_IMAG_TOLERANCE: f64 = 1e-9;
/// Offsets closer than this merge into one projection bin.
pub const DEFAULT_BIN_TOLERANCE: f64 = 1e-9;

/// One bin of a discrete projection: signed offset along the projection
/// axis and the mass that landed there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionBin {
    pub offset: f64,
    pub mass: f64,
}

/// The projection of an image onto the axis at angle `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonProjection {
    pub theta: f64,
    pub bins: Vec<ProjectionBin>,
}

impl RadonProjection {
    pub fn total_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.mass).sum()
    }
}

/// One projection-moment observation `m_n(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSample {
    pub theta: f64,
    pub order: usize,
    pub value: f64,
}

/// Projects every pixel onto the axis at `theta`; offsets within
/// `bin_tolerance` of a bin's first offset merge into that bin.
pub fn project(cloud: &PixelCloud, theta: f64, bin_tolerance: f64) -> RadonProjection {
    let t = wrap_angle(theta);
    let (sin, cos) = t.sin_cos();
    let mut offsets: Vec<(f64, f64)> = cloud
        .pixels()
        .iter()
        .map(|p| (p.location.re * cos + p.location.im * sin, p.intensity))
        .collect();
    offsets.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut bins = Vec::new();
    let mut i = 0;
    while i < offsets.len() {
        let anchor = offsets[i].0;
        let mut mass = 0.0;
        let mut weighted = 0.0;
        let mut plain = 0.0;
        let mut count = 0usize;
        while i < offsets.len() && offsets[i].0 - anchor <= bin_tolerance {
            mass += offsets[i].1;
            weighted += offsets[i].0 * offsets[i].1;
            plain += offsets[i].0;
            count += 1;
            i += 1;
        }
        let offset = if mass > 0.0 {
            weighted / mass
        } else {
            plain / count as f64
        };
        bins.push(ProjectionBin { offset, mass });
    }
    RadonProjection { theta: t, bins }
}

/// `m_n(theta) = sum_k r_k(theta)^n rho_k`, straight from the pixels.
///
/// The angle is reduced into `(-pi, pi]` first (the reduction is exact), so
/// `m_n(theta + 2 pi)` computes bit-identically to `m_n(theta)` whenever the
/// caller's addition was exact.
pub fn radon_moment_direct(cloud: &PixelCloud, theta: f64, n: usize) -> MomentSample {
    let t = wrap_angle(theta);
    let (sin, cos) = t.sin_cos();
    let value = cloud
        .pixels()
        .iter()
        .map(|p| (p.location.re * cos + p.location.im * sin).powi(n as i32) * p.intensity)
        .sum();
    MomentSample {
        theta: t,
        order: n,
        value,
    }
}

/// Evaluates triangle row `n` as the Fourier series of `m_n` at `theta`.
///
/// `row` must be a raw triangle row (entries `C(n,l) mu_(l,n-l)`); an
/// imaginary residue above tolerance signals a corrupted row.
pub fn radon_moment_fourier(row: &[Complex64], theta: f64) -> Result<MomentSample> {
    if row.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let n = row.len() - 1;
    let t = wrap_angle(theta);
    let mut acc = Complex64::new(0.0, 0.0);
    for (l, &entry) in row.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, (n as f64 - 2.0 * l as f64) * t);
        acc += entry * phase;
    }
    acc /= 2f64.powi(n as i32);
    let tolerance = FOURIER_IMAG_TOLERANCE * (1.0 + acc.re.abs());
    if acc.im.abs() > tolerance {
        return Err(Error::ImaginaryResidue {
            residue: acc.im.abs(),
            tolerance,
        });
    }
    Ok(MomentSample {
        theta: t,
        order: n,
        value: acc.re,
    })
}

/// True when the `n + 1` angles have pairwise-distinct `e^(2 i t)` with the
/// default gap; angle sets aliasing modulo pi make the row system singular.
pub fn check_generic_angles(thetas: &[f64], n: usize) -> bool {
    check_generic_angles_with(thetas, n, DEFAULT_GENERIC_GAP)
}

pub fn check_generic_angles_with(thetas: &[f64], n: usize, gap: f64) -> bool {
    if thetas.len() != n + 1 {
        return false;
    }
    let points: Vec<Complex64> = thetas
        .iter()
        .map(|&t| Complex64::from_polar(1.0, 2.0 * t))
        .collect();
    for (i, &a) in points.iter().enumerate() {
        for &b in points.iter().skip(i + 1) {
            if (a - b).norm() < gap {
                return false;
            }
        }
    }
    true
}

/// The default deterministic angle schedule `t_j = j pi / (n + 2)`,
/// `j = 0..=n`, which is generic for every `n`.
pub fn generic_angle_schedule(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| j as f64 * std::f64::consts::PI / (n + 2) as f64)
        .collect()
}

/// A recovered triangle row plus solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSolve {
    pub row: Vec<Complex64>,
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// Recovers triangle row `n` from `n + 1` generic moment samples by solving
/// the trigonometric Vandermonde system.
pub fn row_from_samples(n: usize, samples: &[MomentSample]) -> Result<RowSolve> {
    if samples.len() != n + 1 {
        return Err(Error::LengthMismatch {
            expected: n + 1,
            found: samples.len(),
        });
    }
    for s in samples {
        if s.order != n {
            return Err(Error::SampleOrderMismatch {
                expected: n,
                found: s.order,
            });
        }
    }
    let thetas: Vec<f64> = samples.iter().map(|s| s.theta).collect();
    if !check_generic_angles(&thetas, n) {
        return Err(Error::NonGenericAngles);
    }
    let dim = n + 1;
    let scale = 2f64.powi(n as i32);
    let matrix = DMatrix::from_fn(dim, dim, |j, l| {
        Complex64::from_polar(1.0 / scale, (n as f64 - 2.0 * l as f64) * thetas[j])
    });
    let rhs = DVector::from_fn(dim, |j, _| Complex64::new(samples[j].value, 0.0));
    let solution = matrix
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem {
            context: "row from samples",
        })?;
    let svd = matrix.svd(false, false);
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let condition = match (values.first(), values.last()) {
        (Some(&max), Some(&min)) if min > 0.0 => max / min,
        _ => f64::INFINITY,
    };
    Ok(RowSolve {
        row: solution.iter().copied().collect(),
        condition,
        ill_conditioned: condition > DEFAULT_CONDITION_BOUND,
    })
}

/// Reconstructs intensities at known locations from projection-moment
/// samples: row `n` needs the `n + 1` samples in `samples_by_row[n]`, for
/// `n = 0..N-1`.
pub fn image_from_radon(
    locations: &[Complex64],
    samples_by_row: &[Vec<MomentSample>],
) -> Result<PixelCloud> {
    let n = locations.len();
    if samples_by_row.len() < n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: samples_by_row.len(),
        });
    }
    if n == 0 {
        return Ok(PixelCloud::empty());
    }
    let mut column = Vec::with_capacity(n);
    for (row_order, samples) in samples_by_row.iter().take(n).enumerate() {
        let solve = row_from_samples(row_order, samples)?;
        // The right edge of row n is mu_(n,0).
        column.push(solve.row[row_order]);
    }
    let solve = intensities_from_column(locations, &column, 0)?;
    let scale = column.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let pixels: Vec<(Complex64, f64)> = locations
        .iter()
        .zip(&solve.intensities)
        .map(|(&z, &rho)| {
            // Zero-intensity pixels can come back infinitesimally negative.
            let clamped = if rho < 0.0 && rho.abs() <= 1e-9 * scale {
                0.0
            } else {
                rho
            };
            (z, clamped)
        })
        .collect();
    PixelCloud::new(pixels)
}

/// Full pipeline for unknown locations: recovers rows `0..=2N-2` from the
/// samples, assembles the triangle, and reconstructs the image from it.
pub fn image_from_radon_unknown_locations(
    samples_by_row: &[Vec<MomentSample>],
) -> Result<PixelCloud> {
    if samples_by_row.is_empty() {
        return Ok(PixelCloud::empty());
    }
    let mut rows = Vec::with_capacity(samples_by_row.len());
    for (n, samples) in samples_by_row.iter().enumerate() {
        rows.push(row_from_samples(n, samples)?.row);
    }
    let triangle = PascalTriangle::from_rows(rows)?;
    reconstruct_image(&triangle)
}
