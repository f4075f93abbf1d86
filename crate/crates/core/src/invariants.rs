//! Group actions prolonged onto moment grids, moving frames, and the
//! invariantized triangle.
//!
//! Planar translation, isotropic/anisotropic scaling and rotation all act on
//! moments by explicit formulas. Each frame maps a grid onto a chosen
//! cross-section (`mu_(1,0) = 0`, `mu_(1,1) = 1`, `Im mu_(0,2) = 0` with
//! `Re mu_(1,2) >= 0`); the normalized entries are invariants of the orbit,
//! and triangles of order `2N - 2` separate orbits for `N`-pixel images.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::cloud::PixelCloud;
use crate::error::{Error, Result};
use crate::moments::{binomial_f64, MomentTable};
use crate::triangle::{FrameTag, PascalTriangle};

/// Relative size below which `mu_(0,2)` or `mu_(1,2)` is treated as zero and
/// the rotation frame is declared degenerate.
pub const FRAME_DEGENERACY_TOLERANCE: f64 = 1e-9;
/// How far the rotation-branch discriminant must sit from a branch boundary
/// before frame-based orbit comparison is trusted.
pub const BRANCH_BOUNDARY_GUARD: f64 = 1e-3;

/// The group element that maps an image onto the moment cross-section:
/// `z -> lambda * (z + z0) * e^(i*theta0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingFrame {
    pub z0: Complex64,
    pub lambda: f64,
    pub theta0: f64,
    pub degenerate_rotation: bool,
    pub degenerate_scale: bool,
}

impl MovingFrame {
    pub fn identity() -> Self {
        Self {
            z0: Complex64::new(0.0, 0.0),
            lambda: 1.0,
            theta0: 0.0,
            degenerate_rotation: false,
            degenerate_scale: false,
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut x = a % tau;
    if x <= -std::f64::consts::PI {
        x += tau;
    } else if x > std::f64::consts::PI {
        x -= tau;
    }
    x
}

/// Signed angle from `x` to `y`, in `(-pi, pi]`.
pub fn angle_between(x: Complex64, y: Complex64) -> Result<f64> {
    if x.norm() == 0.0 || y.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(wrap_angle(y.arg() - x.arg()))
}

impl MomentTable {
    /// Moments of the image translated by `offset`:
    /// `mu~_(j,l) = sum_(s,t) C(j,s) C(l,t) mu_(s,t) offset^(j-s) conj(offset)^(l-t)`.
    pub fn translated(&self, offset: Complex64) -> MomentTable {
        let order = self.order();
        let mut pow = vec![Complex64::new(1.0, 0.0); order + 1];
        for p in 1..=order {
            pow[p] = pow[p - 1] * offset;
        }
        let mut out = self.clone();
        for j in 0..=order {
            for l in 0..=order {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 0..=j {
                    let bj = binomial_f64(j, s);
                    for t in 0..=l {
                        acc += self.entry(s, t)
                            * (bj * binomial_f64(l, t))
                            * pow[j - s]
                            * pow[l - t].conj();
                    }
                }
                out.set(j, l, acc);
            }
        }
        out
    }

    /// Translates by `-mu_(1,0)/mu_(0,0)` so the first moment vanishes.
    /// Returns the centralized grid and the frame translation `z0`.
    pub fn centralized(&self) -> Result<(MomentTable, Complex64)> {
        let mass = self.mu00();
        if mass <= 0.0 {
            return Err(Error::EmptyImage);
        }
        if self.order() < 1 {
            return Ok((self.clone(), Complex64::new(0.0, 0.0)));
        }
        let z0 = -self.entry(1, 0) / mass;
        Ok((self.translated(z0), z0))
    }

    /// Divides each `mu_(j,l)` by `mu_(1,1)^((j+l)/2)` so `mu_(1,1)` becomes 1.
    /// Returns the normalized grid and the frame scale `lambda = mu_(1,1)^(-1/2)`.
    pub fn scale_normalized(&self) -> Result<(MomentTable, f64)> {
        if self.order() < 1 {
            return Err(Error::DegenerateScale);
        }
        let mu11 = self.entry(1, 1).re;
        if mu11 <= 0.0 {
            return Err(Error::DegenerateScale);
        }
        let sqrt = mu11.sqrt();
        let mut out = self.clone();
        for j in 0..=self.order() {
            for l in 0..=self.order() {
                let n = j + l;
                // Integer power of mu11 where possible keeps mu_(1,1)/divisor
                // exactly 1.
                let divisor = mu11.powi((n / 2) as i32) * if n % 2 == 1 { sqrt } else { 1.0 };
                out.set(j, l, self.entry(j, l) / divisor);
            }
        }
        Ok((out, 1.0 / sqrt))
    }

    /// Moments of the image rotated counterclockwise by `theta`:
    /// `mu'_(j,l) = mu_(j,l) e^(i (j-l) theta)`.
    pub fn rotated(&self, theta: f64) -> MomentTable {
        let mut out = self.clone();
        for j in 0..=self.order() {
            for l in 0..=self.order() {
                let phase = Complex64::from_polar(1.0, (j as f64 - l as f64) * theta);
                out.set(j, l, self.entry(j, l) * phase);
            }
        }
        out
    }
}

/// One moment of the image scaled by `lambda1` horizontally and `lambda2`
/// vertically; needs the whole anti-diagonal of total degree `j + l`.
pub fn anisotropic_moment(
    table: &MomentTable,
    j: usize,
    l: usize,
    lambda1: f64,
    lambda2: f64,
) -> Result<Complex64> {
    for lambda in [lambda1, lambda2] {
        if lambda <= 0.0 || lambda.is_nan() {
            return Err(Error::NonPositiveScale { value: lambda });
        }
    }
    let n = j + l;
    if n > table.order() {
        return Err(Error::MomentUnavailable { j, l });
    }
    let sum = lambda1 + lambda2;
    let diff = lambda1 - lambda2;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 0..=j {
        let bj = binomial_f64(j, s);
        for t in 0..=l {
            let weight = bj
                * binomial_f64(l, t)
                * sum.powi((l - t + s) as i32)
                * diff.powi((j - s + t) as i32);
            acc += table.entry(s + t, n - s - t) * weight;
        }
    }
    Ok(acc / 2f64.powi(n as i32))
}

/// Grid of anisotropically scaled moments. Each output entry `(j, l)` draws
/// on the full anti-diagonal `j + l` of the source, so the output order is
/// half the input's.
pub fn anisotropic_scaled(table: &MomentTable, lambda1: f64, lambda2: f64) -> Result<MomentTable> {
    let out_order = table.order() / 2;
    let dim = out_order + 1;
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for j in 0..dim {
        for l in 0..dim {
            entries[j * dim + l] = anisotropic_moment(table, j, l, lambda1, lambda2)?;
        }
    }
    MomentTable::from_entries(out_order, entries)
}

/// The unwrapped rotation-branch discriminant
/// `arg(mu_(1,2)) - arg(mu_(0,2)) / 2`, or `None` when the frame is
/// degenerate (either moment too small relative to `mu_(1,1)`).
pub fn rotation_branch_discriminant(table: &MomentTable) -> Option<f64> {
    if table.order() < 2 {
        return None;
    }
    let mu11 = table.entry(1, 1).re.max(0.0);
    let mu02 = table.entry(0, 2);
    let mu12 = table.entry(1, 2);
    if mu02.norm() <= FRAME_DEGENERACY_TOLERANCE * mu11
        || mu12.norm() <= FRAME_DEGENERACY_TOLERANCE * mu11.powf(1.5)
    {
        return None;
    }
    Some(mu12.arg() - mu02.arg() / 2.0)
}

/// Distance of the branch discriminant from the nearest branch boundary.
pub fn rotation_branch_distance(table: &MomentTable) -> Option<f64> {
    use std::f64::consts::FRAC_PI_2;
    rotation_branch_discriminant(table).map(|delta| {
        [-3.0 * FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2, 3.0 * FRAC_PI_2]
            .iter()
            .map(|b| (delta - b).abs())
            .fold(f64::INFINITY, f64::min)
    })
}

pub(crate) fn rotation_angle_from_discriminant(phi_half: f64, delta: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    if (-FRAC_PI_2..=FRAC_PI_2).contains(&delta) {
        wrap_angle(phi_half)
    } else if delta > FRAC_PI_2 {
        wrap_angle(phi_half + PI)
    } else {
        wrap_angle(phi_half - PI)
    }
}

/// The rotation frame angle: `theta0` such that rotating the image by
/// `theta0` makes `mu_(0,2)` real nonnegative and `Re mu_(1,2) >= 0`.
///
/// Returns `(0, true)` when the discriminating moments vanish and the rule
/// does not apply.
pub fn rotation_frame_angle(table: &MomentTable) -> (f64, bool) {
    match rotation_branch_discriminant(table) {
        None => (0.0, true),
        Some(delta) => {
            let phi_half = table.entry(0, 2).arg() / 2.0;
            (rotation_angle_from_discriminant(phi_half, delta), false)
        }
    }
}

fn tag_set(tags: &[FrameTag]) -> BTreeSet<FrameTag> {
    tags.iter().copied().collect()
}

/// The invariantized triangle of `cloud` at `order`, normalizing the listed
/// group actions in the fixed order translation, scaling, rotation.
///
/// With no tags this is the plain triangle. Coordinates are pre-conditioned
/// (shifted/scaled at the cloud level) exactly when the corresponding group
/// is being normalized anyway, which keeps high-order entries well behaved
/// without changing the result.
pub fn invariant_triangle(
    cloud: &PixelCloud,
    order: usize,
    tags: &[FrameTag],
) -> Result<PascalTriangle> {
    let tags = tag_set(tags);
    if tags.is_empty() {
        let table = MomentTable::compute(cloud, order)?;
        return PascalTriangle::from_table(&table, order);
    }
    if order < 2 {
        return Err(Error::InsufficientOrder {
            needed: 2,
            available: order,
        });
    }
    if cloud.total_intensity() <= 0.0 {
        return Err(Error::EmptyImage);
    }

    let shift = if tags.contains(&FrameTag::Translation) {
        cloud.centroid()?
    } else {
        Complex64::new(0.0, 0.0)
    };
    let pre_scale = if tags.contains(&FrameTag::Scaling) {
        let extent = cloud.extent_about(shift);
        if extent > 0.0 {
            1.0 / extent
        } else {
            1.0
        }
    } else {
        1.0
    };
    let conditioned = cloud.map_locations(|z| (z - shift) * pre_scale);
    let mut table = MomentTable::compute(&conditioned, order)?;

    let mut frame = MovingFrame::identity();
    if tags.contains(&FrameTag::Translation) {
        let (next, z0_post) = table.centralized()?;
        table = next;
        frame.z0 = -shift + z0_post / pre_scale;
    }
    if tags.contains(&FrameTag::Scaling) {
        let (next, lambda_post) = table.scale_normalized()?;
        table = next;
        frame.lambda = pre_scale * lambda_post;
    }
    if tags.contains(&FrameTag::Rotation) {
        let (theta0, degenerate) = rotation_frame_angle(&table);
        frame.degenerate_rotation = degenerate;
        frame.theta0 = theta0;
        if !degenerate {
            table = table.rotated(theta0);
        }
    }

    Ok(PascalTriangle::from_table(&table, order)?.with_frame(tags, frame))
}

/// The group element relating two orbit-equivalent clouds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupWitness {
    Translation(Complex64),
    Scaling(f64),
    Rotation(f64),
}

/// Outcome of an orbit-equivalence test.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitVerdict {
    pub equivalent: bool,
    pub witness: Option<GroupWitness>,
    /// True when degenerate or boundary-adjacent frames forced a direct
    /// search instead of the frame comparison.
    pub used_fallback: bool,
}

fn triangles_match(a: &PascalTriangle, b: &PascalTriangle, tolerance: f64) -> bool {
    if a.order() != b.order() {
        return false;
    }
    for n in 0..=a.order() {
        for l in 0..=n {
            let x = a.entry(n, l);
            let y = b.entry(n, l);
            if (x - y).norm() > tolerance * (1.0 + x.norm() + y.norm()) {
                return false;
            }
        }
    }
    true
}

/// Decides whether `a` and `b` differ by an element of the given group, by
/// comparing invariant triangles of order `2N - 2` (`N` the larger pixel
/// count; the smaller image counts as zero-padded, which changes no moment).
pub fn orbits_equivalent(
    a: &PixelCloud,
    b: &PixelCloud,
    group: FrameTag,
    tolerance: f64,
) -> Result<OrbitVerdict> {
    let n = a.len().max(b.len());
    let order = if n >= 2 { 2 * n - 2 } else { 2 };

    let mass_a = a.total_intensity();
    let mass_b = b.total_intensity();
    if mass_a <= 0.0 || mass_b <= 0.0 {
        let equivalent = mass_a <= 0.0 && mass_b <= 0.0;
        return Ok(OrbitVerdict {
            equivalent,
            witness: equivalent.then(|| identity_witness(group)),
            used_fallback: false,
        });
    }

    if group == FrameTag::Rotation {
        let ta = MomentTable::compute(a, order)?;
        let tb = MomentTable::compute(b, order)?;
        let safe = |t: &MomentTable| {
            rotation_branch_distance(t).is_some_and(|d| d >= BRANCH_BOUNDARY_GUARD)
        };
        if !safe(&ta) || !safe(&tb) {
            return rotation_grid_fallback(a, b, order, tolerance);
        }
    }
    if group == FrameTag::Scaling {
        let ta = MomentTable::compute(a, order)?;
        let tb = MomentTable::compute(b, order)?;
        if ta.entry(1, 1).re <= 0.0 || tb.entry(1, 1).re <= 0.0 {
            // All mass at the origin on at least one side: scaling cannot
            // move it, so compare the raw triangles directly.
            let pa = PascalTriangle::from_table(&ta, order)?;
            let pb = PascalTriangle::from_table(&tb, order)?;
            let equivalent = triangles_match(&pa, &pb, tolerance);
            return Ok(OrbitVerdict {
                equivalent,
                witness: equivalent.then_some(GroupWitness::Scaling(1.0)),
                used_fallback: true,
            });
        }
    }

    let tri_a = invariant_triangle(a, order, &[group])?;
    let tri_b = invariant_triangle(b, order, &[group])?;
    let equivalent = triangles_match(&tri_a, &tri_b, tolerance);
    let witness = if equivalent {
        let fa = tri_a.frame().expect("tagged triangle has a frame");
        let fb = tri_b.frame().expect("tagged triangle has a frame");
        Some(match group {
            FrameTag::Translation => GroupWitness::Translation(fa.z0 - fb.z0),
            FrameTag::Scaling => GroupWitness::Scaling(fa.lambda / fb.lambda),
            FrameTag::Rotation => GroupWitness::Rotation(wrap_angle(fa.theta0 - fb.theta0)),
        })
    } else {
        None
    };
    Ok(OrbitVerdict {
        equivalent,
        witness,
        used_fallback: false,
    })
}

fn identity_witness(group: FrameTag) -> GroupWitness {
    match group {
        FrameTag::Translation => GroupWitness::Translation(Complex64::new(0.0, 0.0)),
        FrameTag::Scaling => GroupWitness::Scaling(1.0),
        FrameTag::Rotation => GroupWitness::Rotation(0.0),
    }
}

/// Direct search over rotation angles: 360 coarse samples, refined once
/// around the best candidate.
fn rotation_grid_fallback(
    a: &PixelCloud,
    b: &PixelCloud,
    order: usize,
    tolerance: f64,
) -> Result<OrbitVerdict> {
    let tb = MomentTable::compute(b, order)?;
    let tri_b = PascalTriangle::from_table(&tb, order)?;
    let table_a = MomentTable::compute(a, order)?;

    let defect = |phi: f64| -> Result<f64> {
        let rotated = table_a.rotated(phi);
        let tri = PascalTriangle::from_table(&rotated, order)?;
        let mut worst = 0.0f64;
        for n in 0..=order {
            for l in 0..=n {
                let x = tri.entry(n, l);
                let y = tri_b.entry(n, l);
                worst = worst.max((x - y).norm() / (1.0 + x.norm() + y.norm()));
            }
        }
        Ok(worst)
    };

    let samples = 360usize;
    let step = std::f64::consts::TAU / samples as f64;
    let mut best = (f64::INFINITY, 0.0f64);
    for k in 0..samples {
        let phi = wrap_angle(-std::f64::consts::PI + step * (k as f64 + 0.5));
        let d = defect(phi)?;
        if d < best.0 {
            best = (d, phi);
        }
    }
    let fine = 360usize;
    let fine_step = 2.0 * step / fine as f64;
    for k in 0..=fine {
        let phi = wrap_angle(best.1 - step + fine_step * k as f64);
        let d = defect(phi)?;
        if d < best.0 {
            best = (d, phi);
        }
    }
    // Golden-section descent on the bracket around the best fine sample.
    let golden = 0.381_966_011_250_105_1;
    let mut lo = best.1 - fine_step;
    let mut hi = best.1 + fine_step;
    while hi - lo > 1e-13 {
        let a = lo + golden * (hi - lo);
        let b = hi - golden * (hi - lo);
        let da = defect(wrap_angle(a))?;
        let db = defect(wrap_angle(b))?;
        if da < db {
            hi = b;
            if da < best.0 {
                best = (da, wrap_angle(a));
            }
        } else {
            lo = a;
            if db < best.0 {
                best = (db, wrap_angle(b));
            }
        }
    }
    let equivalent = best.0 <= tolerance;
    Ok(OrbitVerdict {
        equivalent,
        witness: equivalent.then_some(GroupWitness::Rotation(best.1)),
        used_fallback: true,
    })
}
