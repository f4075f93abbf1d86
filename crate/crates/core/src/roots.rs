//! Simultaneous polynomial root finding (Aberth-Ehrlich iteration).

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const UPDATE_TOLERANCE: f64 = 1e-14;

/// All roots (with multiplicity) of the monic polynomial
/// `t^s + c_1 t^(s-1) + ... + c_s`, where `coefficients = [c_1, ..., c_s]`.
///
/// Starts from a deterministically perturbed circle of initial guesses and
/// refines all roots simultaneously; converges when every update is below
/// `1e-14 * (1 + |root|)`.
pub fn polynomial_roots(coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coefficients.len();
    if degree == 0 {
        return Ok(Vec::new());
    }
    if degree == 1 {
        return Ok(vec![-coefficients[0]]);
    }

    // Cauchy bound: every root has |t| <= 1 + max |c_j|.
    let bound = 1.0 + coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
    // Geometric-mean-ish radius from the constant term, clamped to the bound.
    let tail = coefficients[degree - 1].norm();
    let radius = if tail > 0.0 {
        tail.powf(1.0 / degree as f64).min(bound).max(1e-3)
    } else {
        0.5 * bound
    };

    let mut roots: Vec<Complex64> = (0..degree)
        .map(|k| {
            // Fixed angular offset plus a per-index wobble keeps guesses off
            // symmetry axes of the coefficient set.
            let angle =
                2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.45 + 0.01 * k as f64;
            let r = radius * (1.0 + 0.05 * ((k % 3) as f64 - 1.0));
            Complex64::from_polar(r, angle)
        })
        .collect();

    for _ in 0..MAX_ITERATIONS {
        let mut worst_update = 0.0f64;
        for k in 0..degree {
            let z = roots[k];
            let (p, dp) = eval_with_derivative(coefficients, z);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 { p / dp } else { p };
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, &other) in roots.iter().enumerate() {
                if j != k {
                    let diff = z - other;
                    if diff.norm() > 0.0 {
                        repulsion += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() > 0.0 {
                newton / denom
            } else {
                newton
            };
            roots[k] = z - step;
            worst_update = worst_update.max(step.norm() / (1.0 + roots[k].norm()));
        }
        if worst_update <= UPDATE_TOLERANCE {
            return Ok(roots);
        }
    }

    let residual = roots
        .iter()
        .map(|&z| eval_with_derivative(coefficients, z).0.norm())
        .fold(0.0, f64::max);
    // Accept a stalled iteration whose residuals are already at noise level.
    let scale = 1.0 + coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if residual <= 1e-10 * scale {
        return Ok(roots);
    }
    Err(Error::RootFindingStalled {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// Horner evaluation of the monic polynomial and its derivative.
pub(crate) fn eval_with_derivative(
    coefficients: &[Complex64],
    t: Complex64,
) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coefficients {
        dp = dp * t + p;
        p = p * t + c;
    }
    (p, dp)
}

/// Expands `prod (t - r_k)` into monic coefficients `[c_1, ..., c_s]`.
pub fn coefficients_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); roots.len()];
    for (count, &r) in roots.iter().enumerate() {
        // Multiply the current polynomial by (t - r).
        for i in (0..=count).rev() {
            let lower = if i == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                coeffs[i - 1]
            };
            coeffs[i] = if i == count {
                -r * lower
            } else {
                coeffs[i] - r * lower
            };
        }
    }
    coeffs
}
