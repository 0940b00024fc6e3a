//! Local approximators and the two shipped query strategies.
//!
//! * [`Bah`] queries each cube's center and approximates by a constant.
//! * [`Bag`] queries all `2^d` vertices and uses the multilinear interpolant.
//!
//! Vertex values are always stored in binary-counter order: vertex `b`
//! takes the upper end of axis `j` iff bit `j` of `b` is set. This order is
//! part of the output-set file format.

use crate::error::ApproxError;
use crate::geometry::{DyadicCube, Point};

/// Which set is being approximated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// `{f = a}`, predicate `|g − a| ≤ ρ`.
    #[default]
    LevelSet,
    /// `{f ≤ a}`, predicate `g − a ≤ ρ`.
    Sublevel,
    /// `{f ≥ a}`, predicate `a − g ≤ ρ`.
    Superlevel,
}

impl Mode {
    pub fn accepts(self, value: f64, level: f64, rho: f64) -> bool {
        match self {
            Mode::LevelSet => (value - level).abs() <= rho,
            Mode::Sublevel => value - level <= rho,
            Mode::Superlevel => level - value <= rho,
        }
    }

    /// Membership in the target set itself (`ρ = 0`).
    pub fn in_target(self, value: f64, level: f64) -> bool {
        self.accepts(value, level, 0.0)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::LevelSet => "level-set",
            Mode::Sublevel => "sublevel",
            Mode::Superlevel => "superlevel",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "level-set" | "levelset" | "level" => Ok(Mode::LevelSet),
            "sublevel" => Ok(Mode::Sublevel),
            "superlevel" => Ok(Mode::Superlevel),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// Surrogate `g_C` of the target function on one cube.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalApproximator {
    Constant(f64),
    Multilinear {
        cube: DyadicCube,
        vertex_values: Vec<f64>,
    },
}

impl LocalApproximator {
    pub fn multilinear(cube: DyadicCube, vertex_values: Vec<f64>) -> Result<Self, ApproxError> {
        let expected = 1usize << cube.dim();
        if vertex_values.len() != expected {
            return Err(ApproxError::VertexCount {
                expected,
                got: vertex_values.len(),
            });
        }
        Ok(LocalApproximator::Multilinear {
            cube,
            vertex_values,
        })
    }

    /// Evaluates the approximator at a point of its cube (1e−12 slack).
    pub fn eval(&self, x: &[f64]) -> Result<f64, ApproxError> {
        match self {
            LocalApproximator::Constant(v) => Ok(*v),
            LocalApproximator::Multilinear {
                cube,
                vertex_values,
            } => {
                if !cube.contains(x, 1e-12) {
                    return Err(ApproxError::OutOfCube {
                        point: x.to_vec(),
                        cube: cube.to_string(),
                    });
                }
                Ok(fold_multilinear(vertex_values, &cube.local_coordinates(x)))
            }
        }
    }

    /// Values this approximator is built from: one for a constant, `2^d`
    /// vertex values for a multilinear interpolant.
    pub fn values(&self) -> &[f64] {
        match self {
            LocalApproximator::Constant(v) => std::slice::from_ref(v),
            LocalApproximator::Multilinear { vertex_values, .. } => vertex_values,
        }
    }

    /// Whether some point of the owning cube satisfies the mode predicate.
    pub fn near_level(&self, level: f64, rho: f64, mode: Mode) -> bool {
        cube_near_level(self, level, rho, mode)
    }
}

/// Tensor-product interpolation by successive 1-D reductions, axis 0 first.
fn fold_multilinear(values: &[f64], t: &[f64]) -> f64 {
    let mut buf = values.to_vec();
    for &tj in t {
        let half = buf.len() / 2;
        for m in 0..half {
            // exact at tj ∈ {0, 1}
            buf[m] = (1.0 - tj) * buf[2 * m] + tj * buf[2 * m + 1];
        }
        buf.truncate(half);
    }
    buf[0]
}

/// Exact decision of `∃x ∈ C: predicate(g(x))` from the stored values.
///
/// A multilinear interpolant is a convex combination of its vertex values
/// and is continuous, so its range over the cube is exactly
/// `[min vertex, max vertex]`.
pub fn cube_near_level(g: &LocalApproximator, level: f64, rho: f64, mode: Mode) -> bool {
    let values = g.values();
    match mode {
        Mode::LevelSet => {
            if values.iter().any(|&v| (v - level).abs() <= rho) {
                return true;
            }
            let all_below = values.iter().all(|&v| v < level - rho);
            let all_above = values.iter().all(|&v| v > level + rho);
            // otherwise the values straddle the band
            !(all_below || all_above)
        }
        Mode::Sublevel => values.iter().copied().fold(f64::INFINITY, f64::min) <= level + rho,
        Mode::Superlevel => values.iter().copied().fold(f64::NEG_INFINITY, f64::max) >= level - rho,
    }
}

/// How a Bisect-and-Approximate run queries a cube and summarizes it.
pub trait Strategy: Send + Sync {
    fn name(&self) -> String;

    /// Number of query points per cube (`k`).
    fn queries_per_cube(&self, dim: usize) -> usize;

    /// Exactly `queries_per_cube` points, all inside the closed cube.
    fn pick_points(&self, cube: &DyadicCube) -> Vec<Point>;

    fn build_approximator(&self, cube: &DyadicCube, values: &[f64]) -> LocalApproximator;

    /// Retention test; must be exact or err towards `true`.
    fn near_level(&self, g: &LocalApproximator, level: f64, rho: f64, mode: Mode) -> bool {
        cube_near_level(g, level, rho, mode)
    }

    /// Tolerances `(b, β)` for which the approximators are accurate, if known.
    fn tolerances(&self, _dim: usize) -> Option<(f64, f64)> {
        None
    }
}

/// Center query, constant approximator. Paired with `k = 1, b = c, β = γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bah {
    pub c: f64,
    pub gamma: f64,
}

pub fn bah_strategy(c: f64, gamma: f64) -> Bah {
    Bah { c, gamma }
}

impl Strategy for Bah {
    fn name(&self) -> String {
        format!("bah(c={}, gamma={})", self.c, self.gamma)
    }

    fn queries_per_cube(&self, _dim: usize) -> usize {
        1
    }

    fn pick_points(&self, cube: &DyadicCube) -> Vec<Point> {
        vec![cube.center()]
    }

    fn build_approximator(&self, _cube: &DyadicCube, values: &[f64]) -> LocalApproximator {
        LocalApproximator::Constant(values[0])
    }

    fn tolerances(&self, _dim: usize) -> Option<(f64, f64)> {
        Some((self.c, self.gamma))
    }
}

/// Vertex queries, multilinear approximator. Paired with
/// `k = 2^d, b = c1·d, β = 1 + γ1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bag {
    pub c1: f64,
    pub gamma1: f64,
    pub dim: usize,
}

pub fn bag_strategy(c1: f64, gamma1: f64, dim: usize) -> Bag {
    Bag { c1, gamma1, dim }
}

impl Strategy for Bag {
    fn name(&self) -> String {
        format!("bag(c1={}, gamma1={})", self.c1, self.gamma1)
    }

    fn queries_per_cube(&self, dim: usize) -> usize {
        1 << dim
    }

    fn pick_points(&self, cube: &DyadicCube) -> Vec<Point> {
        cube.vertices()
    }

    fn build_approximator(&self, cube: &DyadicCube, values: &[f64]) -> LocalApproximator {
        LocalApproximator::Multilinear {
            cube: cube.clone(),
            vertex_values: values.to_vec(),
        }
    }

    fn tolerances(&self, dim: usize) -> Option<(f64, f64)> {
        Some((self.c1 * dim as f64, 1.0 + self.gamma1))
    }
}
