//! Brute-force reference implementations shared by the integration tests.
//! Each one is written independently of the library code it checks.

#![allow(dead_code)]

use levelset::geometry::DyadicCube;

pub fn sup_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Largest subset of `points` with pairwise sup-distance `> r`, by
/// exhaustive search over all subsets.
pub fn exact_packing_number(points: &[Vec<f64>], r: f64) -> usize {
    let n = points.len();
    assert!(n <= 16, "exhaustive packing is limited to 16 points");
    let mut conflict = vec![0u32; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && sup_dist(&points[i], &points[j]) <= r {
                conflict[i] |= 1 << j;
            }
        }
    }
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let ok = (0..n).all(|i| mask & (1 << i) == 0 || mask & conflict[i] == 0);
        if ok {
            best = best.max(mask.count_ones() as usize);
        }
    }
    best
}

/// Every depth-`depth` cube of `[0,1]^dim`, lexicographic by index.
pub fn all_cubes(dim: usize, depth: u32) -> Vec<DyadicCube> {
    let per_axis = 1u64 << depth;
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut k| {
            let mut idx = vec![0u64; dim];
            for j in (0..dim).rev() {
                idx[j] = k % per_axis;
                k /= per_axis;
            }
            DyadicCube::new(depth, idx).unwrap()
        })
        .collect()
}

/// Center of the depth-`depth` cube with the given index, computed directly.
pub fn center_of(depth: u32, index: &[u64]) -> Vec<f64> {
    let side = 1.0 / (1u64 << depth) as f64;
    index.iter().map(|&k| (k as f64 + 0.5) * side).collect()
}

/// Corner `b` (bit `j` selects the upper end on axis `j`) of a cube.
pub fn corner_of(depth: u32, index: &[u64], b: usize) -> Vec<f64> {
    let side = 1.0 / (1u64 << depth) as f64;
    index
        .iter()
        .enumerate()
        .map(|(j, &k)| (k as f64 + ((b >> j) & 1) as f64) * side)
        .collect()
}

/// Regular grid with `n` points per axis covering `[lo, lo + side]^d`.
pub fn cube_grid(lo: &[f64], side: f64, n: usize) -> Vec<Vec<f64>> {
    let d = lo.len();
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut k| {
            let mut x = vec![0.0; d];
            for j in (0..d).rev() {
                x[j] = lo[j] + side * (k % n) as f64 / (n - 1) as f64;
                k /= n;
            }
            x
        })
        .collect()
}

/// Tensor-product interpolant evaluated as an explicit weighted sum over
/// all corners.
pub fn interpolate_by_weights(depth: u32, index: &[u64], values: &[f64], x: &[f64]) -> f64 {
    let side = 1.0 / (1u64 << depth) as f64;
    let t: Vec<f64> = index
        .iter()
        .zip(x)
        .map(|(&k, &xj)| xj / side - k as f64)
        .collect();
    values
        .iter()
        .enumerate()
        .map(|(b, v)| {
            let w: f64 = t
                .iter()
                .enumerate()
                .map(|(j, &tj)| if (b >> j) & 1 == 1 { tj } else { 1.0 - tj })
                .product();
            v * w
        })
        .sum()
}

/// Depth-`i` cubes kept by the refinement rule, found without recursion:
/// a cube survives iff the test holds for it and every ancestor.
pub fn brute_force_retained(
    dim: usize,
    depth: u32,
    keeps: &dyn Fn(u32, &[u64]) -> bool,
) -> Vec<DyadicCube> {
    all_cubes(dim, depth)
        .into_iter()
        .filter(|c| {
            (1..=depth).all(|j| {
                let a = c.ancestor(j);
                keeps(j, a.index())
            })
        })
        .collect()
}
