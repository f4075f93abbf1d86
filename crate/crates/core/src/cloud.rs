//! Discrete gray-scale images as weighted point clouds in the complex plane.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One pixel: a complex location and a nonnegative intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pixel {
    pub location: Complex64,
    pub intensity: f64,
}

/// A discrete image: a finite set of pixels.
///
/// Pixels are kept sorted lexicographically by `(Re z, Im z, intensity)` so
/// every downstream summation runs in a fixed order and results are
/// bit-reproducible regardless of input order. Zero-intensity pixels are
/// retained; they contribute nothing to moments but count toward the pixel
/// budget used by support-rank arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelCloud {
    pixels: Vec<Pixel>,
}

impl PixelCloud {
    /// Builds a cloud from `(location, intensity)` pairs.
    ///
    /// Rejects non-finite locations or intensities and negative intensities.
    pub fn new(pixels: impl IntoIterator<Item = (Complex64, f64)>) -> Result<Self> {
        let pixels = pixels
            .into_iter()
            .map(|(location, intensity)| Pixel {
                location,
                intensity,
            })
            .collect();
        Self::from_pixels(pixels)
    }

    pub fn from_pixels(mut pixels: Vec<Pixel>) -> Result<Self> {
        for (index, p) in pixels.iter().enumerate() {
            if !(p.location.re.is_finite() && p.location.im.is_finite() && p.intensity.is_finite())
            {
                return Err(Error::NonFinitePixel { index });
            }
            if p.intensity < 0.0 {
                return Err(Error::NegativeIntensity {
                    index,
                    intensity: p.intensity,
                });
            }
        }
        pixels.sort_by(|a, b| {
            a.location
                .re
                .total_cmp(&b.location.re)
                .then(a.location.im.total_cmp(&b.location.im))
                .then(a.intensity.total_cmp(&b.intensity))
        });
        Ok(Self { pixels })
    }

    pub fn empty() -> Self {
        Self { pixels: Vec::new() }
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Sum of all intensities (`mu_(0,0)`).
    pub fn total_intensity(&self) -> f64 {
        self.pixels.iter().map(|p| p.intensity).sum()
    }

    /// True when the sorted locations are pairwise distinct.
    ///
    /// Equal locations are adjacent after sorting, so one linear scan decides.
    pub fn has_distinct_locations(&self) -> bool {
        self.pixels
            .windows(2)
            .all(|w| w[0].location != w[1].location)
    }

    /// Intensity-weighted centroid `mu_(1,0) / mu_(0,0)`.
    pub fn centroid(&self) -> Result<Complex64> {
        let mass = self.total_intensity();
        if mass <= 0.0 {
            return Err(Error::ZeroTotalIntensity);
        }
        let first: Complex64 = self.pixels.iter().map(|p| p.location * p.intensity).sum();
        Ok(first / mass)
    }

    /// Largest distance from `center` to any pixel (zero-intensity included).
    pub fn extent_about(&self, center: Complex64) -> f64 {
        self.pixels
            .iter()
            .map(|p| (p.location - center).norm())
            .fold(0.0, f64::max)
    }

    /// Shifts the cloud by the centroid and rescales so `max |z| = 1`,
    /// returning the record needed to undo the map.
    ///
    /// A single-point cloud normalizes to the origin with the scale left at 1.
    pub fn normalized(&self) -> Result<(PixelCloud, AffineRecord)> {
        if self.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let shift = self.centroid()?;
        let extent = self.extent_about(shift);
        let scale = if extent > 0.0 { 1.0 / extent } else { 1.0 };
        let record = AffineRecord::new(shift, scale)?;
        let normalized = self.map_locations(|z| record.forward(z));
        Ok((normalized, record))
    }

    /// Applies `f` to every location, keeping intensities.
    pub fn map_locations(&self, f: impl Fn(Complex64) -> Complex64) -> PixelCloud {
        let pixels = self
            .pixels
            .iter()
            .map(|p| Pixel {
                location: f(p.location),
                intensity: p.intensity,
            })
            .collect();
        // Mapped locations stay finite for affine/rotation maps; re-sort only.
        PixelCloud::from_pixels(pixels).expect("mapped pixels stay valid")
    }

    pub fn translated(&self, offset: Complex64) -> PixelCloud {
        self.map_locations(|z| z + offset)
    }

    pub fn scaled(&self, factor: f64) -> PixelCloud {
        self.map_locations(|z| z * factor)
    }

    /// Scales x by `lambda1` and y by `lambda2`.
    pub fn scaled_axes(&self, lambda1: f64, lambda2: f64) -> PixelCloud {
        self.map_locations(|z| Complex64::new(lambda1 * z.re, lambda2 * z.im))
    }

    /// Rotates counterclockwise by `theta` about the origin.
    pub fn rotated(&self, theta: f64) -> PixelCloud {
        let phase = Complex64::from_polar(1.0, theta);
        self.map_locations(|z| z * phase)
    }

    /// Reflects about the line through the origin at angle `theta`.
    pub fn reflected(&self, theta: f64) -> PixelCloud {
        let phase = Complex64::from_polar(1.0, 2.0 * theta);
        self.map_locations(|z| z.conj() * phase)
    }

    /// Union of two clouds as multisets of pixels.
    pub fn union(&self, other: &PixelCloud) -> PixelCloud {
        let mut pixels = self.pixels.clone();
        pixels.extend_from_slice(&other.pixels);
        PixelCloud::from_pixels(pixels).expect("valid pixels stay valid")
    }
}

/// The affine map `z -> (z - shift) * scale` together with its inverse.
///
/// Used to pre-condition coordinates before high-order moment computations
/// and to map reconstruction results back to the original frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineRecord {
    pub shift: Complex64,
    pub scale: f64,
}

impl AffineRecord {
    pub fn new(shift: Complex64, scale: f64) -> Result<Self> {
        if scale <= 0.0 || scale.is_nan() {
            return Err(Error::NonPositiveScale { value: scale });
        }
        Ok(Self { shift, scale })
    }

    pub fn identity() -> Self {
        Self {
            shift: Complex64::new(0.0, 0.0),
            scale: 1.0,
        }
    }

    /// Original frame to normalized frame.
    pub fn forward(&self, z: Complex64) -> Complex64 {
        (z - self.shift) * self.scale
    }

    /// Normalized frame back to the original frame.
    pub fn restore(&self, z: Complex64) -> Complex64 {
        z / self.scale + self.shift
    }

    /// Applies the inverse map to a whole cloud.
    pub fn restore_cloud(&self, cloud: &PixelCloud) -> PixelCloud {
        cloud.map_locations(|z| self.restore(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_pixels() {
        assert!(matches!(
            PixelCloud::new([(c(f64::NAN, 0.0), 1.0)]),
            Err(Error::NonFinitePixel { index: 0 })
        ));
        assert!(matches!(
            PixelCloud::new([(c(0.0, 0.0), -0.5)]),
            Err(Error::NegativeIntensity { index: 0, .. })
        ));
    }

    #[test]
    fn sorting_is_input_order_independent() {
        let a = PixelCloud::new([(c(1.0, 0.0), 1.0), (c(-1.0, 2.0), 0.5), (c(1.0, -3.0), 2.0)])
            .unwrap();
        let b = PixelCloud::new([(c(1.0, -3.0), 2.0), (c(1.0, 0.0), 1.0), (c(-1.0, 2.0), 0.5)])
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_point_normalizes_to_origin() {
        let cloud = PixelCloud::new([(c(10.0, 10.0), 1.0)]).unwrap();
        let (norm, record) = cloud.normalized().unwrap();
        assert_eq!(norm.pixels()[0].location, c(0.0, 0.0));
        assert_eq!(record.shift, c(10.0, 10.0));
        assert_eq!(record.scale, 1.0);
    }

    #[test]
    fn two_point_normalization_by_hand() {
        let cloud = PixelCloud::new([(c(0.0, 0.0), 1.0), (c(4.0, 0.0), 1.0)]).unwrap();
        let (norm, record) = cloud.normalized().unwrap();
        assert_eq!(record.shift, c(2.0, 0.0));
        assert_eq!(record.scale, 0.5);
        let locs: Vec<_> = norm.pixels().iter().map(|p| p.location).collect();
        assert_eq!(locs, vec![c(-1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn normalization_round_trips() {
        let cloud = PixelCloud::new([
            (c(3.5, -2.0), 0.3),
            (c(-17.25, 4.0), 1.2),
            (c(0.125, 9.5), 0.7),
        ])
        .unwrap();
        let (norm, record) = cloud.normalized().unwrap();
        let back = record.restore_cloud(&norm);
        for (p, q) in cloud.pixels().iter().zip(back.pixels()) {
            assert!((p.location - q.location).norm() <= 1e-12);
            assert_eq!(p.intensity, q.intensity);
        }
    }

    #[test]
    fn distinctness_detects_duplicates() {
        let dup = PixelCloud::new([(c(1.0, 1.0), 1.0), (c(1.0, 1.0), 2.0)]).unwrap();
        assert!(!dup.has_distinct_locations());
        let ok = PixelCloud::new([(c(1.0, 1.0), 1.0), (c(1.0, 1.5), 2.0)]).unwrap();
        assert!(ok.has_distinct_locations());
    }

    #[test]
    fn zero_total_intensity_has_no_centroid() {
        let cloud = PixelCloud::new([(c(1.0, 0.0), 0.0)]).unwrap();
        assert_eq!(cloud.centroid(), Err(Error::ZeroTotalIntensity));
    }
}
