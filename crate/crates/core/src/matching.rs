//! Minimum-cost pairing of two equally sized point sets.
//!
//! Used to compare recovered locations against references: greedy
//! nearest-neighbor assignment, then pairwise-swap improvement until stable.
//! Ties break lexicographically so the result is deterministic.

use num_complex::Complex64;

/// Returns `perm` with `perm[i] = j` pairing `a[i]` with `b[j]`,
/// approximately minimizing the total distance.
///
/// Panics if the slices have different lengths.
pub fn pair_indices(a: &[Complex64], b: &[Complex64]) -> Vec<usize> {
    assert_eq!(a.len(), b.len(), "point sets must have equal size");
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }

    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, &p) in a.iter().enumerate() {
        for (j, &q) in b.iter().enumerate() {
            edges.push(((p - q).norm(), i, j));
        }
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut assigned = 0;
    for (_, i, j) in edges {
        if perm[i] == usize::MAX && !taken[j] {
            perm[i] = j;
            taken[j] = true;
            assigned += 1;
            if assigned == n {
                break;
            }
        }
    }

    // Swap pass: resolve greedy mistakes pair by pair.
    let mut improved = true;
    let mut rounds = 0;
    while improved && rounds < 100 {
        improved = false;
        rounds += 1;
        for i in 0..n {
            for k in (i + 1)..n {
                let current = (a[i] - b[perm[i]]).norm() + (a[k] - b[perm[k]]).norm();
                let swapped = (a[i] - b[perm[k]]).norm() + (a[k] - b[perm[i]]).norm();
                if swapped + 1e-15 < current {
                    perm.swap(i, k);
                    improved = true;
                }
            }
        }
    }
    perm
}

/// Total distance of the pairing returned by [`pair_indices`].
pub fn pairing_cost(a: &[Complex64], b: &[Complex64]) -> f64 {
    let perm = pair_indices(a, b);
    a.iter()
        .enumerate()
        .map(|(i, &p)| (p - b[perm[i]]).norm())
        .sum()
}

/// Largest single-point distance under the minimum-cost pairing.
pub fn pairing_max_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let perm = pair_indices(a, b);
    a.iter()
        .enumerate()
        .map(|(i, &p)| (p - b[perm[i]]).norm())
        .fold(0.0, f64::max)
}
