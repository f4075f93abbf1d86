//! Complex moments `mu_(j,l) = sum_k z_k^j conj(z_k)^l rho(z_k)` and the
//! square moment grid.
//!
//! The grid satisfies the conjugate symmetry `mu_(j,l) = conj(mu_(l,j))`; only
//! the upper wedge `j <= l` is summed and the rest is mirrored. Mirroring is
//! exact in IEEE arithmetic because powers, products and sums of conjugated
//! inputs are bitwise conjugates of the originals.

use num_complex::Complex64;

use crate::cloud::PixelCloud;
use crate::error::{Error, Result};

/// Default cap on moment and triangle orders. Binomials up to this order fit
/// comfortably in `u128` and entries stay representable for normalized
/// coordinates.
pub const DEFAULT_MAX_ORDER: usize = 64;

/// Exact binomial coefficient `C(n, k)`.
///
/// Fails on `k > n` and on overflow instead of wrapping.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Err(Error::BinomialRange { n, k });
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        // c * (n - k + i) is divisible by i at every step.
        c = c
            .checked_mul((n - k + i) as u128)
            .ok_or(Error::BinomialOverflow { n, k })?
            / i as u128;
    }
    Ok(c)
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    binomial(n as u64, k as u64).expect("binomial within configured cap") as f64
}

/// The complex moment of order `(j, l)` of a cloud, summed in the cloud's
/// canonical pixel order.
pub fn compute_moment(cloud: &PixelCloud, j: usize, l: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for p in cloud.pixels() {
        let term = p.location.powu(j as u32) * p.location.conj().powu(l as u32) * p.intensity;
        acc += term;
    }
    acc
}

/// The `(order+1) x (order+1)` grid of complex moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    order: usize,
    entries: Vec<Complex64>,
}

impl MomentTable {
    /// Computes all `mu_(j,l)` for `j, l <= order`.
    ///
    /// Only `j <= l` entries are summed; `j > l` are conjugate mirrors.
    pub fn compute(cloud: &PixelCloud, order: usize) -> Result<Self> {
        Self::compute_capped(cloud, order, DEFAULT_MAX_ORDER)
    }

    pub fn compute_capped(cloud: &PixelCloud, order: usize, cap: usize) -> Result<Self> {
        if order > cap {
            return Err(Error::OrderAboveCap { order, cap });
        }
        let dim = order + 1;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for j in 0..dim {
            for l in j..dim {
                let value = compute_moment(cloud, j, l);
                if !(value.re.is_finite() && value.im.is_finite()) {
                    return Err(Error::NonFiniteMoment { j, l });
                }
                entries[j * dim + l] = value;
                entries[l * dim + j] = value.conj();
            }
        }
        Ok(Self { order, entries })
    }

    /// Wraps an explicit grid; `entries[j][l]` must be `mu_(j,l)`.
    pub fn from_entries(order: usize, entries: Vec<Complex64>) -> Result<Self> {
        let dim = order + 1;
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { order, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `mu_(j,l)`; panics if outside the grid (use [`MomentTable::get`] to probe).
    pub fn entry(&self, j: usize, l: usize) -> Complex64 {
        self.entries[j * (self.order + 1) + l]
    }

    pub fn get(&self, j: usize, l: usize) -> Result<Complex64> {
        if j > self.order || l > self.order {
            return Err(Error::MomentUnavailable { j, l });
        }
        Ok(self.entry(j, l))
    }

    pub(crate) fn set(&mut self, j: usize, l: usize, value: Complex64) {
        let dim = self.order + 1;
        self.entries[j * dim + l] = value;
    }

    pub fn mu00(&self) -> f64 {
        self.entry(0, 0).re
    }

    /// Largest deviation from conjugate symmetry, relative to entry size.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..=self.order {
            for l in j..=self.order {
                let a = self.entry(j, l);
                let b = self.entry(l, j);
                let defect = (a - b.conj()).norm() / (1.0 + a.norm());
                worst = worst.max(defect);
            }
        }
        worst
    }
}
