//! Synthetic labeled shape corpus: half mirror-symmetric clouds, half
//! clouds screened to be safely asymmetric. Deterministic in the seed.

use anyhow::{bail, Result};
use moment_triangle::{
    axis_symmetry_classify, horizontal_symmetry_score, AxisVerdict, MomentTable, PixelCloud,
};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Asymmetric samples are regenerated until their horizontal score clears
/// this margin, so they stay negative across the whole sweep range.
const ASYMMETRY_SCORE_MARGIN: f64 = 0.05;
/// Asymmetric samples must also fail the axis classifier at this threshold.
const ASYMMETRY_AXIS_GUARD_DEGREES: f64 = 15.0;

/// How the symmetric half's mirror axes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisMode {
    /// Axis angle uniform in `(-pi/2, pi/2]`.
    Random,
    /// Axis along the x direction; what the horizontal-criterion experiment
    /// needs for its positive class.
    Horizontal,
}

/// One labeled corpus shape.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub cloud: PixelCloud,
    pub symmetric: bool,
    /// Mirror axis angle through the centroid, when the shape has one.
    pub axis: Option<f64>,
}

/// Random-axis corpus; see [`synth_corpus_with`].
pub fn synth_corpus(seed: u64, count: usize, jitter: f64) -> Result<Vec<CorpusEntry>> {
    synth_corpus_with(seed, count, jitter, AxisMode::Random)
}

/// Generates `count` shapes (count must be even): the first half
/// mirror-symmetric point clouds, the second half asymmetric ones.
/// Coordinates are perturbed by a gaussian of sigma `jitter * extent`.
pub fn synth_corpus_with(
    seed: u64,
    count: usize,
    jitter: f64,
    axis_mode: AxisMode,
) -> Result<Vec<CorpusEntry>> {
    if !count.is_multiple_of(2) {
        bail!("corpus size must be even, got {count}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count / 2 {
        let axis = match axis_mode {
            AxisMode::Horizontal => 0.0,
            AxisMode::Random => {
                let a = rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
                if a == -std::f64::consts::FRAC_PI_2 {
                    std::f64::consts::FRAC_PI_2
                } else {
                    a
                }
            }
        };
        let cloud = jittered(symmetric_cloud(&mut rng, axis), jitter, &mut rng);
        entries.push(CorpusEntry {
            cloud,
            symmetric: true,
            axis: Some(axis),
        });
    }
    for _ in 0..count / 2 {
        let cloud = jittered(asymmetric_cloud(&mut rng), jitter, &mut rng);
        entries.push(CorpusEntry {
            cloud,
            symmetric: false,
            axis: None,
        });
    }
    Ok(entries)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}

fn jittered(cloud: PixelCloud, jitter: f64, rng: &mut ChaCha8Rng) -> PixelCloud {
    if jitter == 0.0 {
        return cloud;
    }
    let centroid = cloud.centroid().expect("corpus shapes carry mass");
    let sigma = jitter * cloud.extent_about(centroid);
    let pixels: Vec<(Complex64, f64)> = cloud
        .pixels()
        .iter()
        .map(|p| {
            (
                p.location + Complex64::new(sigma * gaussian(rng), sigma * gaussian(rng)),
                p.intensity,
            )
        })
        .collect();
    PixelCloud::new(pixels).expect("jittered pixels stay finite")
}

/// Random base points mirrored about the line through the origin at `axis`,
/// then shifted off-center.
fn symmetric_cloud(rng: &mut ChaCha8Rng, axis: f64) -> PixelCloud {
    let base_count = rng.gen_range(4..=7usize);
    let phase = Complex64::from_polar(1.0, 2.0 * axis);
    let center = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let mut pixels = Vec::with_capacity(2 * base_count);
    for _ in 0..base_count {
        // Keep base points clearly off the axis so mirror pairs stay apart.
        let u = rng.gen_range(-1.0..1.0);
        let v = rng.gen_range(0.12..1.0);
        let mass = rng.gen_range(0.3..1.0);
        let z = Complex64::new(u, v) * Complex64::from_polar(1.0, axis);
        pixels.push((z + center, mass));
        pixels.push((z.conj() * phase + center, mass));
    }
    PixelCloud::new(pixels).expect("generated pixels are finite")
}

/// Random points, resampled until both classifiers see them as clearly
/// asymmetric.
fn asymmetric_cloud(rng: &mut ChaCha8Rng) -> PixelCloud {
    loop {
        let count = rng.gen_range(8..=12usize);
        let pixels: Vec<(Complex64, f64)> = (0..count)
            .map(|_| {
                (
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    rng.gen_range(0.3..1.0),
                )
            })
            .collect();
        let cloud = PixelCloud::new(pixels).expect("generated pixels are finite");
        let Ok(table) = MomentTable::compute(&cloud, 8) else {
            continue;
        };
        let Ok((centralized, _)) = table.centralized() else {
            continue;
        };
        let Ok(score) = horizontal_symmetry_score(&centralized) else {
            continue;
        };
        if score < ASYMMETRY_SCORE_MARGIN {
            continue;
        }
        let guard = ASYMMETRY_AXIS_GUARD_DEGREES.to_radians();
        match axis_symmetry_classify(&centralized, guard) {
            Ok(result) if result.verdict == AxisVerdict::NotSymmetric => return cloud,
            _ => continue,
        }
    }
}
