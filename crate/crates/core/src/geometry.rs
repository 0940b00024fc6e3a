//! Dyadic hypercubes of `[0,1]^d` and sup-norm packings.
//!
//! A [`DyadicCube`] is stored as a depth and an integer index vector; its
//! corners are `index[j] / 2^depth`, which is exact in binary floating point
//! for every depth up to [`MAX_DEPTH`]. Nothing here accumulates rounding
//! error across refinement levels.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::GeometryError;

/// Deepest level at which all corner coordinates are exact `f64` values.
pub const MAX_DEPTH: u32 = 52;

/// A point of `R^d`.
pub type Point = Vec<f64>;

/// Sup-norm distance between two points of equal dimension.
pub fn sup_distance(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Closed dyadic hypercube `Π_j [index[j], index[j]+1] · 2^{-depth}`.
///
/// Ordering is lexicographic over `(depth, index)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    depth: u32,
    index: Vec<u64>,
}

impl DyadicCube {
    /// The unit cube `[0,1]^d`.
    pub fn root(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        DyadicCube {
            depth: 0,
            index: vec![0; dim],
        }
    }

    pub fn new(depth: u32, index: Vec<u64>) -> Result<Self, GeometryError> {
        if index.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        if depth > MAX_DEPTH {
            return Err(GeometryError::DepthLimitExceeded { depth });
        }
        let cells = 1u64 << depth;
        if let Some((axis, &k)) = index.iter().enumerate().find(|(_, &k)| k >= cells) {
            return Err(GeometryError::IndexOutOfRange {
                axis,
                index: k,
                depth,
            });
        }
        Ok(DyadicCube { depth, index })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn index(&self) -> &[u64] {
        &self.index
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// Side length `2^{-depth}`, which is also the sup-norm diameter.
    pub fn side(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    /// Lower corner.
    pub fn lower(&self) -> Point {
        let s = self.side();
        self.index.iter().map(|&k| k as f64 * s).collect()
    }

    /// Upper corner.
    pub fn upper(&self) -> Point {
        let s = self.side();
        self.index.iter().map(|&k| (k + 1) as f64 * s).collect()
    }

    pub fn center(&self) -> Point {
        let s = self.side();
        self.index.iter().map(|&k| (k as f64 + 0.5) * s).collect()
    }

    /// Vertex number `b`, where bit `j` of `b` selects the upper end of axis `j`.
    pub fn vertex(&self, b: usize) -> Point {
        let s = self.side();
        self.index
            .iter()
            .enumerate()
            .map(|(j, &k)| (k + ((b >> j) & 1) as u64) as f64 * s)
            .collect()
    }

    /// All `2^d` vertices in binary-counter order.
    pub fn vertices(&self) -> Vec<Point> {
        (0..1usize << self.dim()).map(|b| self.vertex(b)).collect()
    }

    /// Center, vertices and side length in one call.
    pub fn geometry(&self) -> (Point, Vec<Point>, f64) {
        (self.center(), self.vertices(), self.side())
    }

    /// Splits the cube into its `2^d` children, listed in binary-counter order
    /// (child `b` takes the upper half of axis `j` iff bit `j` of `b` is set).
    pub fn bisect(&self) -> Result<Vec<DyadicCube>, GeometryError> {
        if self.depth >= MAX_DEPTH {
            return Err(GeometryError::DepthLimitExceeded {
                depth: self.depth + 1,
            });
        }
        let d = self.dim();
        let children = (0..1usize << d)
            .map(|b| DyadicCube {
                depth: self.depth + 1,
                index: self
                    .index
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| 2 * k + ((b >> j) & 1) as u64)
                    .collect(),
            })
            .collect();
        Ok(children)
    }

    /// Ancestor at a shallower depth.
    pub fn ancestor(&self, depth: u32) -> DyadicCube {
        assert!(depth <= self.depth);
        let shift = self.depth - depth;
        DyadicCube {
            depth,
            index: self.index.iter().map(|&k| k >> shift).collect(),
        }
    }

    /// Parity class `Σ_j (index[j] mod 2) 2^j` of the checkerboard partition.
    pub fn checkerboard_class(&self) -> usize {
        self.index
            .iter()
            .enumerate()
            .map(|(j, &k)| ((k & 1) as usize) << j)
            .sum()
    }

    /// `inf_{x∈self, y∈other} ‖x−y‖_∞`. Exact for dyadic cubes.
    pub fn set_distance(&self, other: &DyadicCube) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let (lo_a, hi_a) = (self.lower(), self.upper());
        let (lo_b, hi_b) = (other.lower(), other.upper());
        (0..self.dim())
            .map(|j| (lo_b[j] - hi_a[j]).max(lo_a[j] - hi_b[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Closed containment with an absolute slack per coordinate.
    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let s = self.side();
        self.index.iter().zip(x).all(|(&k, &xj)| {
            let lo = k as f64 * s;
            let hi = (k + 1) as f64 * s;
            xj >= lo - slack && xj <= hi + slack
        })
    }

    /// Volume `2^{-d·depth}`.
    pub fn volume(&self) -> f64 {
        (-(self.depth as f64) * self.dim() as f64).exp2()
    }

    /// Local coordinates of `x` in `[0,1]^d` relative to this cube.
    pub(crate) fn local_coordinates(&self, x: &[f64]) -> Vec<f64> {
        let scale = (self.depth as f64).exp2();
        self.index
            .iter()
            .zip(x)
            .map(|(&k, &xj)| (xj * scale - k as f64).clamp(0.0, 1.0))
            .collect()
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "depth:{} idx:", self.depth)?;
        for (j, k) in self.index.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for DyadicCube {
    type Err = GeometryError;

    /// Parses `depth:i idx:k1,...,kd`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GeometryError::Parse(s.to_string());
        let mut fields = s.split_whitespace();
        let depth = fields
            .next()
            .and_then(|f| f.strip_prefix("depth:"))
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or_else(bad)?;
        let index = fields
            .next()
            .and_then(|f| f.strip_prefix("idx:"))
            .ok_or_else(bad)?
            .split(',')
            .map(|k| k.parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        if fields.next().is_some() {
            return Err(bad());
        }
        DyadicCube::new(depth, index)
    }
}

/// Free-function form of [`DyadicCube::bisect`].
pub fn bisect(cube: &DyadicCube) -> Result<Vec<DyadicCube>, GeometryError> {
    cube.bisect()
}

/// Free-function form of [`DyadicCube::checkerboard_class`].
pub fn checkerboard_class(cube: &DyadicCube) -> usize {
    cube.checkerboard_class()
}

/// A set of pairwise strictly `scale`-separated points.
#[derive(Clone, Debug, PartialEq)]
pub struct PackingResult {
    pub count: usize,
    pub witnesses: Vec<Point>,
    pub scale: f64,
}

/// Greedy maximal `r`-packing in the sup-norm.
///
/// Points are scanned in the order given; a point is kept iff it is at
/// sup-distance `> r` from every point kept so far. The result is a valid
/// packing and is maximal (every input point is within `r` of a witness), so
/// its size is a lower bound on the packing number of the input set.
pub fn greedy_packing(points: &[Point], r: f64) -> PackingResult {
    assert!(r > 0.0, "packing scale must be positive");
    let mut witnesses: Vec<Point> = Vec::new();
    let dim = points.first().map_or(0, Vec::len);

    if dim == 0 || dim > 6 {
        for p in points {
            if witnesses.iter().all(|w| sup_distance(w, p) > r) {
                witnesses.push(p.clone());
            }
        }
    } else {
        // Bucket witnesses on a grid of side r: a conflicting witness lies in
        // one of the 3^d neighbouring buckets.
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let offsets = neighbour_offsets(dim);
        for p in points {
            let key: Vec<i64> = p.iter().map(|&x| (x / r).floor() as i64).collect();
            let conflict = offsets.iter().any(|off| {
                let probe: Vec<i64> = key.iter().zip(off).map(|(k, o)| k + o).collect();
                buckets
                    .get(&probe)
                    .is_some_and(|ids| ids.iter().any(|&i| sup_distance(&witnesses[i], p) <= r))
            });
            if !conflict {
                buckets.entry(key).or_default().push(witnesses.len());
                witnesses.push(p.clone());
            }
        }
    }

    PackingResult {
        count: witnesses.len(),
        witnesses,
        scale: r,
    }
}

fn neighbour_offsets(dim: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-1..=1).map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o);
                    v
                })
            })
            .collect();
    }
    out
}

/// Upper bound `(⌊1/r⌋ + 1)^d` on the `r`-packing number of `[0,1]^d`.
/// Saturates at `u64::MAX`.
pub fn unit_cube_packing_bound(d: u32, r: f64) -> u64 {
    assert!(r > 0.0, "packing scale must be positive");
    let per_axis = (1.0 / r).floor();
    if per_axis >= u64::MAX as f64 {
        return u64::MAX;
    }
    (per_axis as u64 + 1).saturating_pow(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(depth: u32, index: &[u64]) -> DyadicCube {
        DyadicCube::new(depth, index.to_vec()).unwrap()
    }

    #[test]
    fn bisect_unit_interval() {
        let kids = DyadicCube::root(1).bisect().unwrap();
        assert_eq!(kids, vec![cube(1, &[0]), cube(1, &[1])]);
        assert_eq!(kids[0].upper(), vec![0.5]);
        assert_eq!(kids[1].lower(), vec![0.5]);
    }

    #[test]
    fn bisect_square_gives_four_halves() {
        let kids = DyadicCube::root(2).bisect().unwrap();
        assert_eq!(kids.len(), 4);
        assert!(kids.iter().all(|c| c.side() == 0.5));
    }

    #[test]
    fn bisect_doubles_indices() {
        let kids = cube(2, &[1, 3]).bisect().unwrap();
        assert_eq!(
            kids,
            vec![
                cube(3, &[2, 6]),
                cube(3, &[3, 6]),
                cube(3, &[2, 7]),
                cube(3, &[3, 7])
            ]
        );
    }

    #[test]
    fn bisect_at_depth_limit_fails() {
        let c = cube(MAX_DEPTH, &[0, 5]);
        assert!(matches!(
            c.bisect(),
            Err(GeometryError::DepthLimitExceeded { .. })
        ));
        assert!(DyadicCube::new(MAX_DEPTH + 1, vec![0]).is_err());
    }

    #[test]
    fn rejects_out_of_range_index() {
        assert!(matches!(
            DyadicCube::new(2, vec![4]),
            Err(GeometryError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn geometry_examples() {
        let (center, vertices, side) = cube(1, &[1]).geometry();
        assert_eq!(center, vec![0.75]);
        assert_eq!(vertices, vec![vec![0.5], vec![1.0]]);
        assert_eq!(side, 0.5);

        let (center, vertices, side) = DyadicCube::root(2).geometry();
        assert_eq!(center, vec![0.5, 0.5]);
        assert_eq!(
            vertices,
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 1.0]
            ]
        );
        assert_eq!(side, 1.0);

        assert_eq!(cube(3, &[5, 2]).center(), vec![0.6875, 0.3125]);
    }

    #[test]
    fn deep_corners_are_exact() {
        let c = cube(MAX_DEPTH, &[(1u64 << MAX_DEPTH) - 1]);
        assert_eq!(c.upper(), vec![1.0]);
        assert_eq!(c.lower()[0], 1.0 - f64::EPSILON);
    }

    #[test]
    fn checkerboard_classes() {
        let classes: Vec<_> = [[0, 0], [1, 0], [0, 1], [1, 1]]
            .iter()
            .map(|i| cube(1, i).checkerboard_class())
            .collect();
        assert_eq!(classes, vec![0, 1, 2, 3]);
        assert_eq!(cube(3, &[5]).checkerboard_class(), 1);
    }

    #[test]
    fn same_class_cubes_are_separated() {
        let a = cube(2, &[0, 0]);
        let b = cube(2, &[2, 0]);
        assert_eq!(a.checkerboard_class(), b.checkerboard_class());
        // [0,1/4]^2 vs [1/2,3/4]x[0,1/4]: gap on axis 0 is 1/2 - 1/4.
        assert_eq!(a.set_distance(&b), 0.25);
        assert_eq!(a.set_distance(&cube(2, &[1, 1])), 0.0);
    }

    #[test]
    fn display_and_parse_round_trip() {
        let c = cube(3, &[5, 2]);
        assert_eq!(c.to_string(), "depth:3 idx:5,2");
        assert_eq!("depth:3 idx:5,2".parse::<DyadicCube>().unwrap(), c);
        assert!("depth:3 idx:8".parse::<DyadicCube>().is_err());
        assert!("depth:x idx:1".parse::<DyadicCube>().is_err());
    }

    #[test]
    fn greedy_packing_examples() {
        let pts: Vec<Point> = [0.0, 0.3, 0.6, 0.9].iter().map(|&x| vec![x]).collect();
        assert_eq!(greedy_packing(&pts, 0.25).count, 4);

        let pts: Vec<Point> = [0.0, 0.1, 0.2].iter().map(|&x| vec![x]).collect();
        let res = greedy_packing(&pts, 0.15);
        assert_eq!(res.witnesses, vec![vec![0.0], vec![0.2]]);
        assert_eq!(res.count, 2);
    }

    #[test]
    fn greedy_packing_grid() {
        let mut pts = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                pts.push(vec![i as f64 / 3.0, j as f64 / 3.0]);
            }
        }
        // brute force: all distinct pairs are at least 1/3 apart
        for p in &pts {
            for q in &pts {
                if p != q {
                    assert!(sup_distance(p, q) >= 1.0 / 3.0 - 1e-15);
                }
            }
        }
        assert_eq!(greedy_packing(&pts, 0.3).count, 16);
    }

    #[test]
    fn high_dimensional_packing_uses_linear_scan() {
        let pts = vec![vec![0.0; 8], vec![0.5; 8], vec![0.55; 8]];
        assert_eq!(greedy_packing(&pts, 0.1).count, 2);
    }

    #[test]
    fn unit_cube_bound_examples() {
        assert_eq!(unit_cube_packing_bound(2, 0.3), 16);
        assert_eq!(unit_cube_packing_bound(1, 2.0), 1);
        assert_eq!(unit_cube_packing_bound(3, 0.5), 27);
    }
}
