//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `-- --nocapture` to see them).
//!
//! Criterion 1 exercises the full reconstruction round trip at triangle
//! order 2N-2 for every pixel count down to N = 2. Two-pixel images are NOT
//! determined by their order-2 triangle (a one-parameter family of clouds
//! shares it; see `two_pixel_clouds_share_their_order_two_triangle` in the
//! core crate), so those runs fail by mathematics, not by implementation;
//! the test reports them honestly. Every other criterion passes.

use std::time::Instant;

use moment_triangle::{
    check_generic_angles, compute_moment, covariance, detect_frs, effective_support,
    eigen_elongation, elongation, generic_angle_schedule, intensities_from_column,
    invariant_triangle, matching::pair_indices, radon_moment_direct, radon_moment_fourier,
    reconstruct_image, reflection_axis, rotation_branch_distance, row_from_samples, Error,
    FrameTag, MomentSample, MomentTable, PascalTriangle, PixelCloud,
};
use mtri_harness::{run_experiment, synth_corpus_with, AxisMode, ExperimentConfig, ExperimentMode};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random cloud with distinct locations in the unit disk (kept away from the
/// origin and from each other so the l = 1 column solve stays well posed)
/// and intensities in [0.1, 1).
fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> PixelCloud {
    let mut locations: Vec<Complex64> = Vec::with_capacity(n);
    while locations.len() < n {
        let z = c(rng.gen_range(-0.95..0.95), rng.gen_range(-0.95..0.95));
        if z.norm() <= 0.95 && z.norm() >= 0.05 && locations.iter().all(|w| (z - w).norm() >= 0.15)
        {
            locations.push(z);
        }
    }
    PixelCloud::new(locations.into_iter().map(|z| (z, rng.gen_range(0.1..1.0)))).unwrap()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}

fn cloud_matches(original: &PixelCloud, recovered: &PixelCloud) -> Result<(), String> {
    if original.len() != recovered.len() {
        return Err(format!(
            "pixel count {} vs {}",
            original.len(),
            recovered.len()
        ));
    }
    let a: Vec<Complex64> = original.pixels().iter().map(|p| p.location).collect();
    let b: Vec<Complex64> = recovered.pixels().iter().map(|p| p.location).collect();
    let perm = pair_indices(&a, &b);
    for (i, &j) in perm.iter().enumerate() {
        let loc_err = (a[i] - b[j]).norm();
        if loc_err > 1e-6 {
            return Err(format!("location error {loc_err:.3e}"));
        }
        let (rho_a, rho_b) = (
            original.pixels()[i].intensity,
            recovered.pixels()[j].intensity,
        );
        if (rho_a - rho_b).abs() > 1e-6 * rho_a {
            return Err(format!(
                "intensity error {:.3e}",
                (rho_a - rho_b).abs() / rho_a
            ));
        }
    }
    Ok(())
}

#[test]
fn acceptance_01_full_reconstruction_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut failures: Vec<(usize, String)> = Vec::new();
    for trial in 0..100usize {
        let n = 2 + trial % 9;
        let cloud = random_cloud(&mut rng, n);
        let order = 2 * n - 2;
        let result = MomentTable::compute(&cloud, order)
            .map_err(|e| e.to_string())
            .and_then(|t| PascalTriangle::from_table(&t, order).map_err(|e| e.to_string()))
            .and_then(|tri| reconstruct_image(&tri).map_err(|e| e.to_string()))
            .and_then(|back| cloud_matches(&cloud, &back));
        if let Err(reason) = result {
            failures.push((n, reason));
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "criterion 01 (full reconstruction round trip): FAIL — runtime {elapsed:?}"
    );
    if failures.is_empty() {
        println!(
            "criterion 01 (full reconstruction round trip): PASS — 100 clouds, N in 2..=10, \
             order 2N-2, {elapsed:?}"
        );
    } else {
        let mut by_n = std::collections::BTreeMap::new();
        for (n, _) in &failures {
            *by_n.entry(*n).or_insert(0usize) += 1;
        }
        println!(
            "criterion 01 (full reconstruction round trip): FAIL — {}/100 trials, by N: {:?}",
            failures.len(),
            by_n
        );
        panic!(
            "criterion 01: {}/100 trials failed (per-N counts {:?}; first: N={} {}). \
             A triangle of order 2N-2 does not determine a 2-pixel image: the clouds \
             {{(1,1),(-1,1)}} and {{(sqrt(r2/r1),r1),(-sqrt(r1/r2),r2)}} with r1+r2=2 share \
             every moment of total degree <= 2, so the N=2 runs above are unattainable as \
             specified; order 2N-1 recovers every pixel count (see the core round-trip suite).",
            failures.len(),
            by_n,
            failures[0].0,
            failures[0].1
        );
    }
}

#[test]
fn acceptance_02_known_location_intensity_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..100usize {
        let n = 2 + trial % 9;
        let cloud = random_cloud(&mut rng, n);
        let locations: Vec<Complex64> = cloud.pixels().iter().map(|p| p.location).collect();
        for l in [0usize, 1] {
            let column: Vec<Complex64> = (0..n).map(|j| compute_moment(&cloud, j, l)).collect();
            let solve = intensities_from_column(&locations, &column, l).unwrap();
            for (got, p) in solve.intensities.iter().zip(cloud.pixels()) {
                assert!(
                    (got - p.intensity).abs() <= 1e-8 * p.intensity,
                    "criterion 02: trial {trial} l={l} relative error {:.3e}",
                    (got - p.intensity).abs() / p.intensity
                );
            }
        }
    }
    println!(
        "criterion 02 (known-location intensity recovery): PASS — columns l=0 and l=1 \
         within 1e-8 relative on 100 clouds"
    );
}

#[test]
fn acceptance_03_radon_fourier_bridge() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let pixels: Vec<(Complex64, f64)> = (0..50)
        .map(|_| {
            (
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                rng.gen_range(0.1..1.0),
            )
        })
        .collect();
    let cloud = PixelCloud::new(pixels).unwrap();
    let table = MomentTable::compute(&cloud, 8).unwrap();
    let triangle = PascalTriangle::from_table(&table, 8).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        for n in 0..=8 {
            let direct = radon_moment_direct(&cloud, theta, n);
            let fourier = radon_moment_fourier(triangle.row(n), theta).unwrap();
            let err = (direct.value - fourier.value).abs() / (1.0 + direct.value.abs());
            worst = worst.max(err);
            assert!(
                err <= 1e-9,
                "criterion 03: n={n} theta={theta} error {err:.3e}"
            );
        }
    }
    println!(
        "criterion 03 (radon-fourier bridge): PASS — N=50, n<=8, 100 angles, \
         worst relative error {worst:.3e}"
    );
}

#[test]
fn acceptance_04_row_from_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let cloud = random_cloud(&mut rng, 6);
    let table = MomentTable::compute(&cloud, 8).unwrap();
    let triangle = PascalTriangle::from_table(&table, 8).unwrap();
    let mut worst = 0.0f64;
    for n in 0..=8usize {
        let schedule = generic_angle_schedule(n);
        assert!(check_generic_angles(&schedule, n));
        let samples: Vec<MomentSample> = schedule
            .into_iter()
            .map(|t| radon_moment_direct(&cloud, t, n))
            .collect();
        let solve = row_from_samples(n, &samples).unwrap();
        for (got, want) in solve.row.iter().zip(triangle.row(n)) {
            let err = (got - want).norm() / (1.0 + want.norm());
            worst = worst.max(err);
            assert!(err <= 1e-8, "criterion 04: row {n} error {err:.3e}");
        }
    }

    // Aliased angle sets must be rejected.
    let aliased: Vec<MomentSample> = [0.0, std::f64::consts::PI]
        .iter()
        .map(|&t| radon_moment_direct(&cloud, t, 1))
        .collect();
    assert_eq!(
        row_from_samples(1, &aliased),
        Err(Error::NonGenericAngles),
        "criterion 04: aliased angles accepted"
    );
    println!(
        "criterion 04 (row recovery from samples): PASS — rows 0..=8 within 1e-8 relative, \
         worst {worst:.3e}; non-generic sets rejected"
    );
}

fn random_cloud_away_from_branch_boundary(rng: &mut ChaCha8Rng, n: usize) -> PixelCloud {
    loop {
        let cloud = random_cloud(rng, n);
        let table = MomentTable::compute(&cloud, 2 * n - 2).unwrap();
        if rotation_branch_distance(&table).is_some_and(|d| d >= 1e-3) {
            return cloud;
        }
    }
}

fn triangles_relative_defect(a: &PascalTriangle, b: &PascalTriangle) -> f64 {
    let mut worst = 0.0f64;
    for n in 0..=a.order() {
        for l in 0..=n {
            let (x, y) = (a.entry(n, l), b.entry(n, l));
            worst = worst.max((x - y).norm() / (1.0 + x.norm() + y.norm()));
        }
    }
    worst
}

#[test]
fn acceptance_05_orbit_invariance_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for group in FrameTag::ALL {
        let mut worst_match = 0.0f64;
        let mut worst_break = f64::INFINITY;
        for trial in 0..100usize {
            let n = 3 + trial % 6;
            let order = 2 * n - 2;
            let cloud = match group {
                FrameTag::Rotation => random_cloud_away_from_branch_boundary(&mut rng, n),
                _ => random_cloud(&mut rng, n),
            };
            let moved = match group {
                FrameTag::Translation => {
                    cloud.translated(c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                }
                FrameTag::Scaling => cloud.scaled(rng.gen_range(0.3..3.0)),
                FrameTag::Rotation => {
                    cloud.rotated(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                }
            };
            let tri_a = invariant_triangle(&cloud, order, &[group]).unwrap();
            let tri_b = invariant_triangle(&moved, order, &[group]).unwrap();
            let defect = triangles_relative_defect(&tri_a, &tri_b);
            worst_match = worst_match.max(defect);
            assert!(
                defect <= 1e-8,
                "criterion 05: {group} trial {trial} defect {defect:.3e}"
            );

            // A 10% intensity change must break the match decisively.
            let mut pixels: Vec<(Complex64, f64)> = cloud
                .pixels()
                .iter()
                .map(|p| (p.location, p.intensity))
                .collect();
            pixels[trial % n].1 *= 1.1;
            let tweaked = PixelCloud::new(pixels).unwrap();
            let tri_c = invariant_triangle(&tweaked, order, &[group]).unwrap();
            let break_defect = triangles_relative_defect(&tri_a, &tri_c);
            worst_break = worst_break.min(break_defect);
            assert!(
                break_defect > 1e-4,
                "criterion 05: {group} trial {trial} perturbation only moved \
                 entries by {break_defect:.3e}"
            );
        }
        println!(
            "criterion 05 (orbit invariance, {group}): PASS — 100 pairs within 1e-8 \
             (worst {worst_match:.3e}); 10% intensity change breaks by >= {worst_break:.3e}"
        );
    }
}

#[test]
fn acceptance_06_elongation_extremes() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_line = 0.0f64;
    for _ in 0..100 {
        let anchor = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let direction = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::PI));
        let count = rng.gen_range(3..=8usize);
        let mut pixels = Vec::with_capacity(count);
        let mut offsets: Vec<f64> = Vec::new();
        while offsets.len() < count {
            let t = rng.gen_range(-1.0..1.0);
            if offsets.iter().all(|&u| (t - u).abs() > 1e-3) {
                offsets.push(t);
            }
        }
        for &t in &offsets {
            pixels.push((anchor + direction * t, rng.gen_range(0.1..1.0)));
        }
        let cloud = PixelCloud::new(pixels).unwrap();
        let table = MomentTable::compute(&cloud, 2)
            .unwrap()
            .centralized()
            .unwrap()
            .0;
        let e = elongation(&table).unwrap().unwrap();
        worst_line = worst_line.max((e - 1.0).abs());
        assert!(
            (e - 1.0).abs() <= 1e-9,
            "criterion 06: collinear cloud elongation {e}"
        );
    }

    let mut worst_fold = 0.0f64;
    for folds in [3usize, 4, 5] {
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let pixels: Vec<(Complex64, f64)> = (0..folds)
            .map(|k| {
                let a = phase + std::f64::consts::TAU * k as f64 / folds as f64;
                (Complex64::from_polar(1.0, a), 1.0)
            })
            .collect();
        let cloud = PixelCloud::new(pixels).unwrap();
        let table = MomentTable::compute(&cloud, 2)
            .unwrap()
            .centralized()
            .unwrap()
            .0;
        let e = elongation(&table).unwrap().unwrap();
        worst_fold = worst_fold.max(e);
        assert!(
            e <= 1e-12,
            "criterion 06: {folds}-fold pattern elongation {e}"
        );
    }
    println!(
        "criterion 06 (elongation extremes): PASS — collinear within {worst_line:.3e} of 1; \
         fold patterns at most {worst_fold:.3e}"
    );
}

fn five_fold_cloud() -> PixelCloud {
    let folds = 5usize;
    let mut pixels = Vec::new();
    for (radius, phase, mass) in [(0.9, 0.17, 0.6), (0.45, 0.83, 0.3)] {
        for k in 0..folds {
            let angle = phase + std::f64::consts::TAU * k as f64 / folds as f64;
            pixels.push((Complex64::from_polar(radius, angle), mass));
        }
    }
    PixelCloud::new(pixels).unwrap()
}

#[test]
fn acceptance_07_fold_moment_vanishing() {
    let cloud = five_fold_cloud();
    let table = MomentTable::compute(&cloud, 10)
        .unwrap()
        .centralized()
        .unwrap()
        .0;
    let mu11 = table.entry(1, 1).re;
    let sqrt_mu11 = mu11.sqrt();

    let mut worst_vanishing = 0.0f64;
    let mut smallest_surviving = f64::INFINITY;
    for j in 0..=10usize {
        for l in 0..=10usize {
            if j + l > 10 {
                continue;
            }
            let normalized = table.entry(j, l).norm() / sqrt_mu11.powi((j + l) as i32);
            if (l as i64 - j as i64).rem_euclid(5) != 0 {
                worst_vanishing = worst_vanishing.max(normalized);
                assert!(
                    normalized <= 1e-9,
                    "criterion 07: entry ({j},{l}) should vanish, got {normalized:.3e}"
                );
            } else {
                smallest_surviving = smallest_surviving.min(normalized);
                assert!(
                    normalized >= 1e-3,
                    "criterion 07: entry ({j},{l}) unexpectedly small: {normalized:.3e}"
                );
            }
        }
    }

    let folds = detect_frs(&table, 8, 1e-9).unwrap();
    assert!(
        folds.iter().any(|f| f.fold == 5),
        "criterion 07: fold 5 not reported"
    );
    println!(
        "criterion 07 (fold moment vanishing): PASS — off-fold entries <= {worst_vanishing:.3e}, \
         on-fold entries >= {smallest_surviving:.3e}, fold 5 detected"
    );
}

#[test]
fn acceptance_08_reflection_axis_detection() {
    let axis = std::f64::consts::PI / 6.0;
    let phase = Complex64::from_polar(1.0, 2.0 * axis);
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst_clean = 0.0f64;
    let mut worst_noisy = 0.0f64;
    for trial in 0..20 {
        let base_count = rng.gen_range(4..=7usize);
        let mut pixels = Vec::with_capacity(2 * base_count);
        for _ in 0..base_count {
            let u = rng.gen_range(-1.0..1.0);
            let v = rng.gen_range(0.15..1.0);
            let mass = rng.gen_range(0.3..1.0);
            let z = c(u, v) * Complex64::from_polar(1.0, axis);
            pixels.push((z, mass));
            pixels.push((z.conj() * phase, mass));
        }
        let cloud = PixelCloud::new(pixels.clone()).unwrap();
        let table = MomentTable::compute(&cloud, 8)
            .unwrap()
            .centralized()
            .unwrap()
            .0;
        let found = reflection_axis(&table, 1e-8)
            .unwrap()
            .unwrap_or_else(|| panic!("criterion 08: trial {trial} noiseless axis missed"));
        worst_clean = worst_clean.max((found - axis).abs());
        assert!(
            (found - axis).abs() <= 1e-6,
            "criterion 08: noiseless axis error {:.3e}",
            (found - axis).abs()
        );

        // Same shape with coordinate jitter sigma = 1e-3 * extent.
        let centroid = cloud.centroid().unwrap();
        let sigma = 1e-3 * cloud.extent_about(centroid);
        let noisy: Vec<(Complex64, f64)> = pixels
            .iter()
            .map(|&(z, m)| {
                (
                    z + c(sigma * gaussian(&mut rng), sigma * gaussian(&mut rng)),
                    m,
                )
            })
            .collect();
        let noisy_cloud = PixelCloud::new(noisy).unwrap();
        let table = MomentTable::compute(&noisy_cloud, 8)
            .unwrap()
            .centralized()
            .unwrap()
            .0;
        let found = reflection_axis(&table, 1e-8)
            .unwrap()
            .unwrap_or_else(|| panic!("criterion 08: trial {trial} noisy axis missed"));
        let error = (found - axis).abs();
        worst_noisy = worst_noisy.max(error);
        assert!(
            error <= 0.5f64.to_radians(),
            "criterion 08: noisy axis error {:.3e} rad",
            error
        );
    }
    println!(
        "criterion 08 (reflection axis): PASS — noiseless within {worst_clean:.3e} rad, \
         jittered within {worst_noisy:.3e} rad (< 0.5 deg)"
    );
}

#[test]
fn acceptance_09_classification_harness() {
    let config = ExperimentConfig::new(0.005, 0.15, 0.005, ExperimentMode::Horizontal);

    // Noiseless corpus: perfect at the operating point r = 0.07.
    let corpus: Vec<_> = synth_corpus_with(1, 40, 0.0, AxisMode::Horizontal)
        .unwrap()
        .into_iter()
        .map(|e| (e.cloud, e.symmetric))
        .collect();
    let result = run_experiment(&config, &corpus).unwrap();
    let at_operating_point = result
        .rows
        .iter()
        .find(|row| (row.threshold - 0.07).abs() < 1e-9)
        .expect("sweep visits r = 0.07");
    assert_eq!(
        at_operating_point.accuracy,
        Some(1.0),
        "criterion 09: noiseless accuracy at r = 0.07"
    );

    // Jittered corpus: at least 90% at the same operating point.
    let noisy: Vec<_> = synth_corpus_with(1, 40, 0.01, AxisMode::Horizontal)
        .unwrap()
        .into_iter()
        .map(|e| (e.cloud, e.symmetric))
        .collect();
    let noisy_result = run_experiment(&config, &noisy).unwrap();
    let noisy_at_point = noisy_result
        .rows
        .iter()
        .find(|row| (row.threshold - 0.07).abs() < 1e-9)
        .unwrap();
    let noisy_accuracy = noisy_at_point.accuracy.unwrap();
    assert!(
        noisy_accuracy >= 0.90,
        "criterion 09: jittered accuracy {noisy_accuracy}"
    );

    // Recall is monotone nondecreasing across the sweep.
    for rows in [&result.rows, &noisy_result.rows] {
        let mut last = -1.0;
        for row in rows.iter() {
            let recall = row.recall.expect("positives exist");
            assert!(
                recall >= last - 1e-15,
                "criterion 09: recall decreased at r = {}",
                row.threshold
            );
            last = recall;
        }
    }
    println!(
        "criterion 09 (classification harness): PASS — noiseless accuracy 1.00 at r=0.07, \
         jittered accuracy {noisy_accuracy:.3}, recall monotone over [0.005, 0.15]"
    );
}

#[test]
fn acceptance_10_covariance_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut worst_cov = 0.0f64;
    let mut worst_eigen = 0.0f64;
    for trial in 0..100usize {
        let n = 3 + trial % 8;
        let cloud = random_cloud(&mut rng, n);
        let table = MomentTable::compute(&cloud, 2)
            .unwrap()
            .centralized()
            .unwrap()
            .0;
        let sigma = covariance(&table).unwrap();

        let mass = cloud.total_intensity();
        let centroid = cloud.centroid().unwrap();
        let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
        for p in cloud.pixels() {
            let d = p.location - centroid;
            xx += d.re * d.re * p.intensity;
            xy += d.re * d.im * p.intensity;
            yy += d.im * d.im * p.intensity;
        }
        for (got, want) in [
            (sigma[(0, 0)], xx / mass),
            (sigma[(0, 1)], xy / mass),
            (sigma[(1, 1)], yy / mass),
        ] {
            worst_cov = worst_cov.max((got - want).abs());
            assert!(
                (got - want).abs() <= 1e-12,
                "criterion 10: covariance error {:.3e}",
                (got - want).abs()
            );
        }

        let direct = elongation(&table).unwrap().unwrap();
        let via_eigen = eigen_elongation(&sigma).unwrap();
        worst_eigen = worst_eigen.max((direct - via_eigen).abs());
        assert!(
            (direct - via_eigen).abs() <= 1e-10,
            "criterion 10: eigen route error {:.3e}",
            (direct - via_eigen).abs()
        );
    }
    println!(
        "criterion 10 (covariance identity): PASS — brute-force match within {worst_cov:.3e}, \
         eigenvalue route within {worst_eigen:.3e}, 100 clouds"
    );
}

#[test]
fn acceptance_11_support_detection() {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    for trial in 0..100usize {
        let s = 1 + trial % 8;
        let extra = rng.gen_range(0..=(12 - s));
        let n = s + extra;
        let base = random_cloud(&mut rng, n);
        // Zero out all but the first s intensities.
        let pixels: Vec<(Complex64, f64)> = base
            .pixels()
            .iter()
            .enumerate()
            .map(|(i, p)| (p.location, if i < s { p.intensity } else { 0.0 }))
            .collect();
        let cloud = PixelCloud::new(pixels).unwrap();
        let table = MomentTable::compute(&cloud, n - 1).unwrap();
        let estimate = effective_support(&table);
        assert_eq!(
            estimate.support, s,
            "criterion 11: trial {trial} (s={s}, N={n}) estimated {}",
            estimate.support
        );
    }
    println!(
        "criterion 11 (support detection): PASS — rank matched the nonzero pixel count on \
         all 100 trials (s <= 8, N <= 12)"
    );
}
