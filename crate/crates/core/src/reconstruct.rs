//! Image recovery from moments.
//!
//! Two regimes:
//!
//! * locations known: the column `{mu_(j,l)}_j` is a Vandermonde-times-diagonal
//!   system in the intensities;
//! * locations unknown: the nonzero pixels are the roots of the monic
//!   polynomial whose coefficients satisfy
//!   `sum_j c_j mu_(s-j+m, l) = -mu_(s+m, l)` for every index pair the data
//!   affords, with `s` read off the numerical rank of the moment matrix.
//!
//! A triangle of order `r` only carries moments with `j + l <= r`, so the
//! coefficient system is assembled from all admissible `(m, l)` shifts rather
//! than just the square `m = 0` block; that squeezes the most out of
//! low-order triangles. Reconstruction runs on centralized, rescaled moments
//! and maps results back at the end.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cloud::PixelCloud;
use crate::error::{Error, Result};
use crate::moments::{binomial_f64, MomentTable};
use crate::roots::{eval_with_derivative, polynomial_roots};
use crate::triangle::PascalTriangle;

/// Multiplier on `dim * sigma_max * eps` used as the rank cutoff.
pub const DEFAULT_RANK_SAFETY_FACTOR: f64 = 100.0;
/// Condition estimate above which location recovery refuses to answer.
pub const DEFAULT_CONDITION_BOUND: f64 = 1e12;
/// Relative disagreement allowed between conjugate triangle entries.
pub const TRIANGLE_CONSISTENCY_TOLERANCE: f64 = 1e-8;

/// Numerical-rank report for a moment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEstimate {
    /// Number of pixels with nonzero intensity.
    pub support: usize,
    /// Singular values, largest first.
    pub singular_values: Vec<f64>,
    /// Cutoff the rank was counted against.
    pub threshold: f64,
}

/// Intensities from a direct column solve, with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensitySolve {
    pub intensities: Vec<f64>,
    /// Largest imaginary part discarded from the raw complex solution.
    pub imaginary_residue: f64,
    pub condition: f64,
    /// Set when the condition estimate exceeded the configured bound;
    /// the solve still returns its best answer.
    pub ill_conditioned: bool,
}

/// Intensities from the stacked real/imaginary least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresSolve {
    pub intensities: Vec<f64>,
    /// Euclidean norm of the residual of the stacked system.
    pub residual: f64,
    /// True when the stacked matrix was rank deficient and the minimum-norm
    /// solution was returned.
    pub rank_deficient: bool,
}

/// Location-recovery output: the monic coefficients, their roots, and the
/// worst polynomial residual over the reported roots.
#[derive(Debug, Clone, PartialEq)]
pub struct PronySolution {
    pub coefficients: Vec<Complex64>,
    pub roots: Vec<Complex64>,
    pub residual: f64,
    pub condition: f64,
}

/// Knobs for [`reconstruct_image_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionParams {
    pub rank_safety_factor: f64,
    pub condition_bound: f64,
    /// Run a Gauss-Newton refinement of locations and intensities against
    /// every available moment after the linear-algebra pass.
    pub polish: bool,
}

impl Default for ReconstructionParams {
    fn default() -> Self {
        Self {
            rank_safety_factor: DEFAULT_RANK_SAFETY_FACTOR,
            condition_bound: DEFAULT_CONDITION_BOUND,
            polish: true,
        }
    }
}

fn singular_support(matrix: &DMatrix<Complex64>, safety_factor: f64) -> SupportEstimate {
    let dim = matrix.nrows().max(matrix.ncols());
    let svd = matrix.clone().svd(false, false);
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let threshold = dim as f64 * sigma_max * f64::EPSILON * safety_factor;
    let support = singular_values.iter().filter(|&&s| s > threshold).count();
    SupportEstimate {
        support,
        singular_values,
        threshold,
    }
}

/// Number of nonzero-intensity pixels, read off the singular values of the
/// full moment matrix slice held by `table`.
pub fn effective_support(table: &MomentTable) -> SupportEstimate {
    effective_support_with(table, DEFAULT_RANK_SAFETY_FACTOR)
}

pub fn effective_support_with(table: &MomentTable, safety_factor: f64) -> SupportEstimate {
    let m = table.order() + 1;
    // tau[a][b] = mu_(b, a)
    let tau = DMatrix::from_fn(m, m, |a, b| table.entry(b, a));
    singular_support(&tau, safety_factor)
}

fn column_matrix(locations: &[Complex64], l: usize) -> Result<DMatrix<Complex64>> {
    let n = locations.len();
    for (i, &a) in locations.iter().enumerate() {
        for &b in locations.iter().skip(i + 1) {
            if a == b {
                return Err(Error::DuplicateLocations);
            }
        }
        if l >= 1 && a.norm() == 0.0 {
            return Err(Error::ZeroLocation { index: i });
        }
    }
    Ok(DMatrix::from_fn(n, n, |j, k| {
        locations[k].powu(j as u32) * locations[k].conj().powu(l as u32)
    }))
}

fn condition_estimate(matrix: &DMatrix<Complex64>) -> f64 {
    let svd = matrix.clone().svd(false, false);
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    match (values.first(), values.last()) {
        (Some(&max), Some(&min)) if min > 0.0 => max / min,
        _ => f64::INFINITY,
    }
}

/// Solves `mu_(j,l) = sum_k z_k^j conj(z_k)^l rho_k` for the intensities,
/// given the pixel locations and the column `moment_column[j] = mu_(j,l)`.
pub fn intensities_from_column(
    locations: &[Complex64],
    moment_column: &[Complex64],
    l: usize,
) -> Result<IntensitySolve> {
    intensities_from_column_with(locations, moment_column, l, DEFAULT_CONDITION_BOUND)
}

pub fn intensities_from_column_with(
    locations: &[Complex64],
    moment_column: &[Complex64],
    l: usize,
    condition_bound: f64,
) -> Result<IntensitySolve> {
    if locations.len() != moment_column.len() {
        return Err(Error::LengthMismatch {
            expected: locations.len(),
            found: moment_column.len(),
        });
    }
    if locations.is_empty() {
        return Ok(IntensitySolve {
            intensities: Vec::new(),
            imaginary_residue: 0.0,
            condition: 1.0,
            ill_conditioned: false,
        });
    }
    let matrix = column_matrix(locations, l)?;
    let rhs = DVector::from_column_slice(moment_column);
    let solution = matrix
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem {
            context: "column intensity solve",
        })?;
    let condition = condition_estimate(&matrix);
    let imaginary_residue = solution.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok(IntensitySolve {
        intensities: solution.iter().map(|v| v.re).collect(),
        imaginary_residue,
        condition,
        ill_conditioned: condition > condition_bound,
    })
}

/// Same system as [`intensities_from_column`], but split into real and
/// imaginary parts and solved in least squares, so the answer is real by
/// construction.
pub fn intensities_real_least_squares(
    locations: &[Complex64],
    moment_column: &[Complex64],
    l: usize,
) -> Result<LeastSquaresSolve> {
    if locations.len() != moment_column.len() {
        return Err(Error::LengthMismatch {
            expected: locations.len(),
            found: moment_column.len(),
        });
    }
    let n = locations.len();
    if n == 0 {
        return Ok(LeastSquaresSolve {
            intensities: Vec::new(),
            residual: 0.0,
            rank_deficient: false,
        });
    }
    let complex = column_matrix(locations, l)?;
    let mut stacked = DMatrix::zeros(2 * n, n);
    let mut rhs = DVector::zeros(2 * n);
    for j in 0..n {
        for k in 0..n {
            stacked[(j, k)] = complex[(j, k)].re;
            stacked[(n + j, k)] = complex[(j, k)].im;
        }
        rhs[j] = moment_column[j].re;
        rhs[n + j] = moment_column[j].im;
    }
    let svd = stacked.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = 2.0 * n as f64 * sigma_max * f64::EPSILON * DEFAULT_RANK_SAFETY_FACTOR;
    let rank = svd.rank(eps);
    let solution = svd.solve(&rhs, eps).map_err(|_| Error::SingularSystem {
        context: "stacked least squares",
    })?;
    let residual = (&stacked * &solution - &rhs).norm();
    Ok(LeastSquaresSolve {
        intensities: solution.iter().copied().collect(),
        residual,
        rank_deficient: rank < n,
    })
}

/// Recovers the `s` nonzero pixel locations from a full moment grid by the
/// square system `sum_j c_j mu_(s-j, l) = -mu_(s, l)`, `l = 0..s-1`.
pub fn recover_locations(table: &MomentTable, support: usize) -> Result<PronySolution> {
    recover_locations_with(table, support, DEFAULT_CONDITION_BOUND)
}

pub fn recover_locations_with(
    table: &MomentTable,
    support: usize,
    condition_bound: f64,
) -> Result<PronySolution> {
    if support == 0 {
        return Ok(PronySolution {
            coefficients: Vec::new(),
            roots: Vec::new(),
            residual: 0.0,
            condition: 1.0,
        });
    }
    // The right-hand side needs mu_(support, l) up to l = support - 1.
    if table.order() < support {
        return Err(Error::InsufficientOrder {
            needed: support,
            available: table.order(),
        });
    }
    let s = support;
    let matrix = DMatrix::from_fn(s, s, |l, col| table.entry(s - 1 - col, l));
    let rhs = DVector::from_fn(s, |l, _| -table.entry(s, l));
    solve_prony(&matrix, &rhs, s, condition_bound)
}

fn solve_prony(
    matrix: &DMatrix<Complex64>,
    rhs: &DVector<Complex64>,
    support: usize,
    condition_bound: f64,
) -> Result<PronySolution> {
    let svd = matrix.clone().svd(true, true);
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let sigma_max = values.first().copied().unwrap_or(0.0);
    let eps = matrix.nrows().max(matrix.ncols()) as f64
        * sigma_max
        * f64::EPSILON
        * DEFAULT_RANK_SAFETY_FACTOR;
    let rank = svd.rank(eps);
    if rank < support {
        if matrix.is_square() {
            return Err(Error::SupportInconsistency { support });
        }
        return Err(Error::InsufficientOrder {
            needed: 2 * support - 1,
            available: matrix.nrows(),
        });
    }
    let sigma_min = values
        .get(support - 1)
        .copied()
        .filter(|&v| v > 0.0)
        .unwrap_or(f64::MIN_POSITIVE);
    let condition = sigma_max / sigma_min;
    if condition > condition_bound {
        return Err(Error::IllConditioned {
            condition,
            bound: condition_bound,
        });
    }
    let solution = svd.solve(rhs, eps).map_err(|_| Error::SingularSystem {
        context: "location coefficient solve",
    })?;
    // Unknowns are ordered (c_1, ..., c_s) but columns were (c_1 <-> mu_(s-1,l)).
    let coefficients: Vec<Complex64> = solution.iter().copied().collect();
    let roots = polynomial_roots(&coefficients)?;
    let residual = roots
        .iter()
        .map(|&r| eval_with_derivative(&coefficients, r).0.norm())
        .fold(0.0, f64::max);
    Ok(PronySolution {
        coefficients,
        roots,
        residual,
        condition,
    })
}

/// Moments indexed by `(j, l)` with `j + l <= order`: exactly the content of
/// a triangle of that order.
#[derive(Debug, Clone)]
pub(crate) struct DegreeMoments {
    order: usize,
    data: Vec<Complex64>,
}

impl DegreeMoments {
    fn index(j: usize, l: usize) -> usize {
        let n = j + l;
        n * (n + 1) / 2 + j
    }

    pub(crate) fn get(&self, j: usize, l: usize) -> Complex64 {
        debug_assert!(j + l <= self.order);
        self.data[Self::index(j, l)]
    }

    pub(crate) fn order(&self) -> usize {
        self.order
    }

    /// Reads a triangle back into plain moments, checking that conjugate
    /// partners within each row agree.
    pub(crate) fn from_triangle(triangle: &PascalTriangle, tolerance: f64) -> Result<Self> {
        let order = triangle.order();
        let mut data = vec![Complex64::new(0.0, 0.0); (order + 1) * (order + 2) / 2];
        for n in 0..=order {
            for j in 0..=n {
                let a = triangle.entry(n, j) / binomial_f64(n, j);
                let b = triangle.entry(n, n - j) / binomial_f64(n, n - j);
                if (a - b.conj()).norm() > tolerance * (1.0 + a.norm() + b.norm()) {
                    return Err(Error::InconsistentTriangle { row: n, entry: j });
                }
                data[Self::index(j, n - j)] = (a + b.conj()) * 0.5;
            }
        }
        Ok(Self { order, data })
    }

    /// Moments of the image translated by `offset`.
    pub(crate) fn translated(&self, offset: Complex64) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); self.data.len()];
        let mut z_pow = vec![Complex64::new(1.0, 0.0); self.order + 1];
        for p in 1..=self.order {
            z_pow[p] = z_pow[p - 1] * offset;
        }
        for n in 0..=self.order {
            for j in 0..=n {
                let l = n - j;
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 0..=j {
                    for t in 0..=l {
                        acc += self.get(s, t)
                            * binomial_f64(j, s)
                            * binomial_f64(l, t)
                            * z_pow[j - s]
                            * z_pow[l - t].conj();
                    }
                }
                data[Self::index(j, l)] = acc;
            }
        }
        Self {
            order: self.order,
            data,
        }
    }

    /// Moments of the image scaled by `factor` about the origin.
    pub(crate) fn scaled(&self, factor: f64) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for n in 0..=self.order {
            let pw = factor.powi(n as i32);
            for j in 0..=n {
                data[Self::index(j, n - j)] = self.get(j, n - j) * pw;
            }
        }
        Self {
            order: self.order,
            data,
        }
    }

    fn max_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// The `m x m` moment matrix slice; needs `2(m-1) <= order`.
    fn tau(&self, m: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(m, m, |a, b| self.get(b, a))
    }
}

/// Rebuilds the pixel cloud encoded by a raw moment triangle.
pub fn reconstruct_image(triangle: &PascalTriangle) -> Result<PixelCloud> {
    reconstruct_image_with(triangle, &ReconstructionParams::default())
}

pub fn reconstruct_image_with(
    triangle: &PascalTriangle,
    params: &ReconstructionParams,
) -> Result<PixelCloud> {
    if !triangle.frame_tags().is_empty() {
        return Err(Error::FrameTagsPresent);
    }
    let raw = DegreeMoments::from_triangle(triangle, TRIANGLE_CONSISTENCY_TOLERANCE)?;
    if raw.max_norm() == 0.0 {
        return Ok(PixelCloud::empty());
    }
    let mass = raw.get(0, 0).re;
    if mass <= 0.0 {
        return Err(Error::EmptyImage);
    }
    let order = raw.order();

    // Work in centralized, unit-spread coordinates; undo at the end.
    let centroid = if order >= 1 {
        raw.get(1, 0) / mass
    } else {
        Complex64::new(0.0, 0.0)
    };
    let centered = raw.translated(-centroid);
    let spread = if order >= 2 {
        (centered.get(1, 1).re / mass).max(0.0).sqrt()
    } else {
        0.0
    };
    let scale = if spread > 0.0 { 1.0 / spread } else { 1.0 };
    let conditioned = centered.scaled(scale);

    let bound = order / 2 + 1;
    let estimate = singular_support(&conditioned.tau(bound), params.rank_safety_factor);
    let s = estimate.support;
    if s == 0 {
        return Ok(PixelCloud::empty());
    }

    // Every admissible shifted equation: sum_j c_j mu_(s-j+m, l) = -mu_(s+m, l).
    if order < s {
        return Err(Error::InsufficientOrder {
            needed: 2 * s - 1,
            available: order,
        });
    }
    let budget = order - s;
    let mut rows = Vec::new();
    let mut rhs_entries = Vec::new();
    for m in 0..=budget {
        for l in 0..=(budget - m) {
            let mut row = Vec::with_capacity(s);
            for j in 1..=s {
                row.push(conditioned.get(s - j + m, l));
            }
            rows.push(row);
            rhs_entries.push(-conditioned.get(s + m, l));
        }
    }
    if rows.len() < s {
        return Err(Error::InsufficientOrder {
            needed: 2 * s - 1,
            available: order,
        });
    }
    let matrix = DMatrix::from_fn(rows.len(), s, |r, c| rows[r][c]);
    let rhs = DVector::from_column_slice(&rhs_entries);
    let prony = solve_prony(&matrix, &rhs, s, params.condition_bound)?;

    let locations = prony.roots.clone();
    let column: Vec<Complex64> = (0..s).map(|j| conditioned.get(j, 0)).collect();
    let solve = intensities_from_column_with(&locations, &column, 0, params.condition_bound)?;
    let mut locations = locations;
    let mut intensities = solve.intensities;

    if params.polish {
        polish_against_moments(&conditioned, &mut locations, &mut intensities);
    }

    let pixels: Vec<(Complex64, f64)> = locations
        .iter()
        .zip(&intensities)
        .filter(|&(_, &rho)| rho > 0.0)
        .map(|(&z, &rho)| (z / scale + centroid, rho))
        .collect();
    PixelCloud::new(pixels)
}

/// Gauss-Newton refinement of `(x_k, y_k, rho_k)` against every moment the
/// triangle provides. Keeps the best iterate seen.
fn polish_against_moments(
    grid: &DegreeMoments,
    locations: &mut [Complex64],
    intensities: &mut [f64],
) {
    let s = locations.len();
    if s == 0 {
        return;
    }
    let order = grid.order();
    let mut targets = Vec::new();
    for j in 0..=order {
        for l in j..=(order - j) {
            targets.push((j, l, grid.get(j, l)));
        }
    }
    let rows: usize = targets
        .iter()
        .map(|&(j, l, _)| if j == l { 1 } else { 2 })
        .sum();
    if rows < 3 * s {
        return;
    }

    let residual_of = |locs: &[Complex64], rhos: &[f64]| -> DVector<f64> {
        let mut f = DVector::zeros(rows);
        let mut r = 0;
        for &(j, l, mu) in &targets {
            let mut model = Complex64::new(0.0, 0.0);
            for k in 0..s {
                model += locs[k].powu(j as u32) * locs[k].conj().powu(l as u32) * rhos[k];
            }
            let diff = model - mu;
            f[r] = diff.re;
            r += 1;
            if j != l {
                f[r] = diff.im;
                r += 1;
            }
        }
        f
    };

    let mut best_locs = locations.to_vec();
    let mut best_rhos = intensities.to_vec();
    let mut best_norm = residual_of(&best_locs, &best_rhos).norm();

    let mut locs = best_locs.clone();
    let mut rhos = best_rhos.clone();
    for _ in 0..10 {
        let f = residual_of(&locs, &rhos);
        let mut jac = DMatrix::zeros(rows, 3 * s);
        let mut r = 0;
        for &(j, l, _) in &targets {
            for k in 0..s {
                let z = locs[k];
                let zj = z.powu(j as u32);
                let zl = z.conj().powu(l as u32);
                let dj = if j > 0 {
                    z.powu(j as u32 - 1) * j as f64
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let dl = if l > 0 {
                    z.conj().powu(l as u32 - 1) * l as f64
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let dx = (dj * zl + zj * dl) * rhos[k];
                let dy = (dj * zl - zj * dl) * Complex64::new(0.0, rhos[k]);
                let drho = zj * zl;
                jac[(r, 3 * k)] = dx.re;
                jac[(r, 3 * k + 1)] = dy.re;
                jac[(r, 3 * k + 2)] = drho.re;
                if j != l {
                    jac[(r + 1, 3 * k)] = dx.im;
                    jac[(r + 1, 3 * k + 1)] = dy.im;
                    jac[(r + 1, 3 * k + 2)] = drho.im;
                }
            }
            r += if j == l { 1 } else { 2 };
        }
        let svd = jac.svd(true, true);
        let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let eps = rows as f64 * sigma_max * f64::EPSILON * 10.0;
        let Ok(delta) = svd.solve(&(-&f), eps) else {
            break;
        };
        let scale_now: f64 = locs.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if delta.norm() <= 1e-15 * scale_now {
            break;
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..5 {
            let trial_locs: Vec<Complex64> = (0..s)
                .map(|k| locs[k] + Complex64::new(step * delta[3 * k], step * delta[3 * k + 1]))
                .collect();
            let trial_rhos: Vec<f64> = (0..s).map(|k| rhos[k] + step * delta[3 * k + 2]).collect();
            let norm = residual_of(&trial_locs, &trial_rhos).norm();
            if norm < best_norm {
                locs = trial_locs;
                rhos = trial_rhos;
                best_norm = norm;
                best_locs = locs.clone();
                best_rhos = rhos.clone();
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    locations.copy_from_slice(&best_locs);
    intensities.copy_from_slice(&best_rhos);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{pair_indices, pairing_max_distance};
    use crate::moments::compute_moment;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cloud(pixels: &[(f64, f64, f64)]) -> PixelCloud {
        PixelCloud::new(pixels.iter().map(|&(x, y, w)| (c(x, y), w))).unwrap()
    }

    #[test]
    fn single_location_column_solve() {
        let solve = intensities_from_column(&[c(0.0, 0.0)], &[c(3.0, 0.0)], 0).unwrap();
        assert_eq!(solve.intensities, vec![3.0]);
    }

    #[test]
    fn two_location_column_solve_by_hand() {
        // locations 1 and -1: mu_(0,0) = a + b, mu_(1,0) = a - b.
        let solve = intensities_from_column(
            &[c(1.0, 0.0), c(-1.0, 0.0)],
            &[c(7.0, 0.0), c(-3.0, 0.0)],
            0,
        )
        .unwrap();
        assert!((solve.intensities[0] - 2.0).abs() <= 1e-12);
        assert!((solve.intensities[1] - 5.0).abs() <= 1e-12);
    }

    #[test]
    fn column_solve_recovers_forward_moments_l1() {
        let cl = cloud(&[
            (0.3, -0.1, 0.7),
            (-0.4, 0.9, 0.2),
            (0.05, 0.55, 1.1),
            (0.8, 0.2, 0.4),
            (-0.6, -0.7, 0.9),
            (0.15, -0.85, 0.6),
        ]);
        let locations: Vec<Complex64> = cl.pixels().iter().map(|p| p.location).collect();
        let column: Vec<Complex64> = (0..6).map(|j| compute_moment(&cl, j, 1)).collect();
        let solve = intensities_from_column(&locations, &column, 1).unwrap();
        for (got, p) in solve.intensities.iter().zip(cl.pixels()) {
            assert!((got - p.intensity).abs() <= 1e-8 * p.intensity);
        }
    }

    #[test]
    fn column_solve_rejects_bad_locations() {
        assert_eq!(
            intensities_from_column(&[c(1.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0); 2], 0),
            Err(Error::DuplicateLocations)
        );
        assert_eq!(
            intensities_from_column(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0); 2], 1),
            Err(Error::ZeroLocation { index: 0 })
        );
    }

    #[test]
    fn least_squares_agrees_with_direct_solve() {
        let locations = [c(1.0, 0.0), c(0.0, 1.0)];
        let column = [c(2.0, 0.0), c(1.0, 1.0)];
        let ls = intensities_real_least_squares(&locations, &column, 0).unwrap();
        assert!((ls.intensities[0] - 1.0).abs() <= 1e-10);
        assert!((ls.intensities[1] - 1.0).abs() <= 1e-10);
        assert!(!ls.rank_deficient);

        let direct = intensities_from_column(&locations, &column, 0).unwrap();
        for (a, b) in ls.intensities.iter().zip(&direct.intensities) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn least_squares_absorbs_small_noise() {
        let cl = cloud(&[(0.4, 0.2, 0.9), (-0.5, 0.3, 0.4), (0.1, -0.7, 1.2)]);
        let locations: Vec<Complex64> = cl.pixels().iter().map(|p| p.location).collect();
        let mut column: Vec<Complex64> = (0..3).map(|j| compute_moment(&cl, j, 0)).collect();
        column[1] += c(1e-9, -1e-9);
        let ls = intensities_real_least_squares(&locations, &column, 0).unwrap();
        assert!(ls.residual <= 1e-8);
        for (got, p) in ls.intensities.iter().zip(cl.pixels()) {
            assert!((got - p.intensity).abs() <= 1e-6);
        }
    }

    #[test]
    fn support_counts_nonzero_pixels() {
        let cl = cloud(&[
            (0.3, -0.1, 0.7),
            (-0.4, 0.9, 0.2),
            (0.05, 0.55, 1.1),
            (0.8, 0.2, 0.0),
            (-0.6, -0.7, 0.0),
        ]);
        let table = MomentTable::compute(&cl, 4).unwrap();
        assert_eq!(effective_support(&table).support, 3);
    }

    #[test]
    fn support_of_zero_image_is_zero() {
        let cl = cloud(&[(0.3, -0.1, 0.0), (-0.4, 0.9, 0.0)]);
        let table = MomentTable::compute(&cl, 1).unwrap();
        assert_eq!(effective_support(&table).support, 0);
    }

    #[test]
    fn support_of_full_cloud_is_pixel_count() {
        let cl = cloud(&[
            (0.3, -0.1, 0.7),
            (-0.4, 0.9, 0.2),
            (0.05, 0.55, 1.1),
            (0.8, 0.2, 0.4),
        ]);
        let table = MomentTable::compute(&cl, 3).unwrap();
        assert_eq!(effective_support(&table).support, 4);
    }

    #[test]
    fn support_ignores_appended_zero_pixels() {
        let base = cloud(&[(0.3, -0.1, 0.7), (-0.4, 0.9, 0.2), (0.05, 0.55, 1.1)]);
        let padded = base.union(&cloud(&[(0.9, -0.9, 0.0), (-0.8, -0.2, 0.0)]));
        let t_base = MomentTable::compute(&base, 4).unwrap();
        let t_padded = MomentTable::compute(&padded, 4).unwrap();
        assert_eq!(
            effective_support(&t_base).support,
            effective_support(&t_padded).support
        );
    }

    #[test]
    fn single_pixel_location_recovery_by_hand() {
        let cl = cloud(&[(2.0, 1.0, 1.0)]);
        let table = MomentTable::compute(&cl, 1).unwrap();
        let prony = recover_locations(&table, 1).unwrap();
        assert!((prony.coefficients[0] - c(-2.0, -1.0)).norm() <= 1e-12);
        assert!((prony.roots[0] - c(2.0, 1.0)).norm() <= 1e-12);
    }

    #[test]
    fn symmetric_pair_gives_t_squared_minus_one() {
        let cl = cloud(&[(1.0, 0.0, 1.0), (-1.0, 0.0, 1.0)]);
        let table = MomentTable::compute(&cl, 2).unwrap();
        let prony = recover_locations(&table, 2).unwrap();
        assert!(prony.coefficients[0].norm() <= 1e-12);
        assert!((prony.coefficients[1] - c(-1.0, 0.0)).norm() <= 1e-12);
        let mut roots = prony.roots.clone();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((roots[0] - c(-1.0, 0.0)).norm() <= 1e-9);
        assert!((roots[1] - c(1.0, 0.0)).norm() <= 1e-9);
    }

    #[test]
    fn random_five_pixel_location_recovery() {
        let cl = cloud(&[
            (0.3, -0.1, 0.7),
            (-0.4, 0.9, 0.2),
            (0.05, 0.55, 1.1),
            (0.8, 0.2, 0.4),
            (-0.6, -0.7, 0.9),
        ]);
        let table = MomentTable::compute(&cl, 5).unwrap();
        let prony = recover_locations(&table, 5).unwrap();
        let truth: Vec<Complex64> = cl.pixels().iter().map(|p| p.location).collect();
        assert!(pairing_max_distance(&truth, &prony.roots) <= 1e-6);
    }

    #[test]
    fn recovery_is_permutation_invariant() {
        let pixels = [
            (0.3, -0.1, 0.7),
            (-0.4, 0.9, 0.2),
            (0.05, 0.55, 1.1),
            (0.8, 0.2, 0.4),
        ];
        let mut reversed = pixels;
        reversed.reverse();
        let t1 = MomentTable::compute(&cloud(&pixels), 4).unwrap();
        let t2 = MomentTable::compute(&cloud(&reversed), 4).unwrap();
        let r1 = recover_locations(&t1, 4).unwrap();
        let r2 = recover_locations(&t2, 4).unwrap();
        assert!(pairing_max_distance(&r1.roots, &r2.roots) <= 1e-10);
    }

    #[test]
    fn reconstruct_single_pixel_from_order_two_triangle() {
        let cl = cloud(&[(1.0, 2.0, 3.0)]);
        let table = MomentTable::compute(&cl, 2).unwrap();
        let tri = PascalTriangle::from_table(&table, 2).unwrap();
        let back = reconstruct_image(&tri).unwrap();
        assert_eq!(back.len(), 1);
        assert!((back.pixels()[0].location - c(1.0, 2.0)).norm() <= 1e-9);
        assert!((back.pixels()[0].intensity - 3.0).abs() <= 1e-9);
    }

    #[test]
    fn reconstruct_zero_image_is_empty() {
        let cl = cloud(&[(0.3, -0.1, 0.0), (-0.4, 0.9, 0.0)]);
        let table = MomentTable::compute(&cl, 2).unwrap();
        let tri = PascalTriangle::from_table(&table, 2).unwrap();
        assert!(reconstruct_image(&tri).unwrap().is_empty());
    }

    #[test]
    fn reconstruct_eight_pixels_from_minimal_triangle() {
        let cl = cloud(&[
            (0.31, -0.12, 0.7),
            (-0.42, 0.91, 0.2),
            (0.06, 0.53, 1.1),
            (0.83, 0.22, 0.4),
            (-0.61, -0.72, 0.9),
            (0.17, -0.88, 0.6),
            (-0.85, 0.1, 0.35),
            (0.55, 0.62, 0.8),
        ]);
        let table = MomentTable::compute(&cl, 14).unwrap();
        let tri = PascalTriangle::from_table(&table, 14).unwrap();
        let back = reconstruct_image(&tri).unwrap();
        assert_eq!(back.len(), 8);
        let truth: Vec<Complex64> = cl.pixels().iter().map(|p| p.location).collect();
        let found: Vec<Complex64> = back.pixels().iter().map(|p| p.location).collect();
        let perm = pair_indices(&truth, &found);
        for (i, &j) in perm.iter().enumerate() {
            assert!((truth[i] - found[j]).norm() <= 1e-6);
            let (a, b) = (cl.pixels()[i].intensity, back.pixels()[j].intensity);
            assert!((a - b).abs() <= 1e-6 * a);
        }
    }

    #[test]
    fn two_pixel_clouds_share_their_order_two_triangle() {
        // The order-2 triangle of a two-pixel image does not determine it: a
        // whole one-parameter family matches. Reconstruction must refuse
        // rather than guess.
        let a = cloud(&[(1.0, 0.0, 1.0), (-1.0, 0.0, 1.0)]);
        let rho1 = 0.8f64;
        let rho2 = 1.2f64;
        let b = cloud(&[
            ((rho2 / rho1).sqrt(), 0.0, rho1),
            (-(rho1 / rho2).sqrt(), 0.0, rho2),
        ]);
        let ta = MomentTable::compute(&a, 2).unwrap();
        let tb = MomentTable::compute(&b, 2).unwrap();
        for j in 0..=2 {
            for l in 0..=(2 - j) {
                assert!((ta.entry(j, l) - tb.entry(j, l)).norm() <= 1e-12);
            }
        }
        let tri = PascalTriangle::from_table(&ta, 2).unwrap();
        assert!(matches!(
            reconstruct_image(&tri),
            Err(Error::InsufficientOrder { .. })
        ));
    }

    #[test]
    fn triangle_inconsistency_is_detected() {
        let cl = cloud(&[(0.3, -0.1, 0.7), (-0.4, 0.9, 0.2)]);
        let table = MomentTable::compute(&cl, 3).unwrap();
        let tri = PascalTriangle::from_table(&table, 3).unwrap();
        let mut rows: Vec<Vec<Complex64>> = tri.rows().to_vec();
        rows[2][0] += c(0.5, 0.5);
        let corrupted = PascalTriangle::from_rows(rows).unwrap();
        assert!(matches!(
            reconstruct_image(&corrupted),
            Err(Error::InconsistentTriangle { row: 2, .. })
        ));
    }

    #[test]
    fn column_solves_agree_between_l0_and_l1() {
        let cl = cloud(&[(0.4, 0.2, 0.9), (-0.5, 0.3, 0.4), (0.1, -0.7, 1.2)]);
        let locations: Vec<Complex64> = cl.pixels().iter().map(|p| p.location).collect();
        let col0: Vec<Complex64> = (0..3).map(|j| compute_moment(&cl, j, 0)).collect();
        let col1: Vec<Complex64> = (0..3).map(|j| compute_moment(&cl, j, 1)).collect();
        let s0 = intensities_from_column(&locations, &col0, 0).unwrap();
        let s1 = intensities_from_column(&locations, &col1, 1).unwrap();
        for (a, b) in s0.intensities.iter().zip(&s1.intensities) {
            assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
        }
    }
}
