//! Black-box oracles and the library of test functions.
//!
//! An [`Oracle`] wraps a [`TestFunction`] and counts every metered call to
//! [`Oracle::eval`]. Algorithms only ever see values through `eval`; analytic
//! gradients and level-set samplers exist for verification code.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::OracleError;
use crate::geometry::Point;

/// Smoothness class a function is known to belong to (sup-norm throughout).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SmoothnessTag {
    /// `|f(x) − f(y)| ≤ c ‖x − y‖^γ`.
    Holder {
        c: f64,
        gamma: f64,
    },
    /// `‖∇f(x) − ∇f(y)‖ ≤ c1 ‖x − y‖^γ1`.
    GradHolder {
        c1: f64,
        gamma1: f64,
    },
    Unknown,
}

impl SmoothnessTag {
    pub fn holder(c: f64, gamma: f64) -> Result<Self, OracleError> {
        check_class(c, gamma)?;
        Ok(SmoothnessTag::Holder { c, gamma })
    }

    pub fn grad_holder(c1: f64, gamma1: f64) -> Result<Self, OracleError> {
        check_class(c1, gamma1)?;
        Ok(SmoothnessTag::GradHolder { c1, gamma1 })
    }
}

fn check_class(constant: f64, exponent: f64) -> Result<(), OracleError> {
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(OracleError::InvalidParameter(format!(
            "smoothness constant must be positive, got {constant}"
        )));
    }
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(OracleError::InvalidParameter(format!(
            "smoothness exponent must lie in (0, 1], got {exponent}"
        )));
    }
    Ok(())
}

/// A deterministic function on `[0,1]^d` plus whatever metadata is known
/// about it.
pub trait TestFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Point> {
        None
    }

    fn smoothness(&self) -> Vec<SmoothnessTag> {
        Vec::new()
    }

    fn is_convex(&self) -> bool {
        false
    }

    fn has_level_set_sampler(&self) -> bool {
        false
    }

    /// Up to `count` points `x ∈ [0,1]^d` with `|f(x) − level| ≤ 1e−12`.
    /// Returns `None` when no sampler is available.
    fn sample_level_set(
        &self,
        _level: f64,
        _count: usize,
        _rng: &mut dyn RngCore,
    ) -> Option<Vec<Point>> {
        None
    }
}

/// Query-counting wrapper around a [`TestFunction`].
pub struct Oracle {
    function: Arc<dyn TestFunction>,
    queries: AtomicU64,
}

impl Oracle {
    pub fn new<F: TestFunction + 'static>(function: F) -> Self {
        Self::from_arc(Arc::new(function))
    }

    pub fn from_arc(function: Arc<dyn TestFunction>) -> Self {
        Oracle {
            function,
            queries: AtomicU64::new(0),
        }
    }

    /// A bare black box with no metadata.
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(FnFunction { dim, f })
    }

    /// Metered evaluation: increments the query counter by one.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.function.value(x)
    }

    /// Evaluation for verification code; not counted as a query.
    pub fn value_unmetered(&self, x: &[f64]) -> f64 {
        self.function.value(x)
    }

    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset_query_count(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }

    pub fn dim(&self) -> usize {
        self.function.dim()
    }

    pub fn gradient(&self, x: &[f64]) -> Option<Point> {
        self.function.gradient(x)
    }

    pub fn smoothness(&self) -> Vec<SmoothnessTag> {
        self.function.smoothness()
    }

    /// First Hölder tag, as `(c, γ)`.
    pub fn holder(&self) -> Option<(f64, f64)> {
        self.smoothness().into_iter().find_map(|t| match t {
            SmoothnessTag::Holder { c, gamma } => Some((c, gamma)),
            _ => None,
        })
    }

    /// First gradient-Hölder tag, as `(c1, γ1)`.
    pub fn grad_holder(&self) -> Option<(f64, f64)> {
        self.smoothness().into_iter().find_map(|t| match t {
            SmoothnessTag::GradHolder { c1, gamma1 } => Some((c1, gamma1)),
            _ => None,
        })
    }

    pub fn is_convex(&self) -> bool {
        self.function.is_convex()
    }

    pub fn has_level_set_sampler(&self) -> bool {
        self.function.has_level_set_sampler()
    }

    pub fn sample_level_set(
        &self,
        level: f64,
        count: usize,
        rng: &mut dyn RngCore,
    ) -> Option<Vec<Point>> {
        self.function.sample_level_set(level, count, rng)
    }

    pub fn function(&self) -> &Arc<dyn TestFunction> {
        &self.function
    }
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("dim", &self.dim())
            .field("queries", &self.query_count())
            .field("smoothness", &self.smoothness())
            .finish()
    }
}

struct FnFunction<F> {
    dim: usize,
    f: F,
}

impl<F> TestFunction for FnFunction<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

fn uniform_point(dim: usize, rng: &mut dyn RngCore) -> Point {
    (0..dim).map(|_| rng.random::<f64>()).collect()
}

/// `f ≡ value`.
#[derive(Clone, Debug)]
pub struct Constant {
    pub dim: usize,
    pub value: f64,
}

impl TestFunction for Constant {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _x: &[f64]) -> f64 {
        self.value
    }

    fn gradient(&self, _x: &[f64]) -> Option<Point> {
        Some(vec![0.0; self.dim])
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn has_level_set_sampler(&self) -> bool {
        true
    }

    fn sample_level_set(
        &self,
        level: f64,
        count: usize,
        rng: &mut dyn RngCore,
    ) -> Option<Vec<Point>> {
        if level != self.value {
            return Some(Vec::new());
        }
        Some((0..count).map(|_| uniform_point(self.dim, rng)).collect())
    }
}

pub fn make_constant(dim: usize, value: f64) -> Oracle {
    Oracle::new(Constant { dim, value })
}

/// `f(x) = ⟨coeffs, x⟩ + offset`.
#[derive(Clone, Debug)]
pub struct Affine {
    coeffs: Vec<f64>,
    offset: f64,
    gradient_constant: f64,
}

impl Affine {
    pub fn new(coeffs: Vec<f64>, offset: f64) -> Result<Self, OracleError> {
        if coeffs.is_empty() || coeffs.iter().all(|&w| w == 0.0) {
            return Err(OracleError::InvalidParameter(
                "affine coefficients must not all be zero".into(),
            ));
        }
        Ok(Affine {
            coeffs,
            offset,
            gradient_constant: 1.0,
        })
    }

    /// Nominal gradient-Hölder constant carried in the smoothness tags
    /// (any positive value is valid since the gradient is constant).
    pub fn with_gradient_constant(mut self, c1: f64) -> Result<Self, OracleError> {
        check_class(c1, 1.0)?;
        self.gradient_constant = c1;
        Ok(self)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

impl TestFunction for Affine {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.offset
    }

    fn gradient(&self, _x: &[f64]) -> Option<Point> {
        Some(self.coeffs.clone())
    }

    fn smoothness(&self) -> Vec<SmoothnessTag> {
        let l1: f64 = self.coeffs.iter().map(|w| w.abs()).sum();
        vec![
            SmoothnessTag::Holder { c: l1, gamma: 1.0 },
            SmoothnessTag::GradHolder {
                c1: self.gradient_constant,
                gamma1: 1.0,
            },
        ]
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn has_level_set_sampler(&self) -> bool {
        true
    }

    /// Draws the free coordinates uniformly and solves for the coordinate
    /// with the largest coefficient; draws landing outside the cube are
    /// rejected.
    fn sample_level_set(
        &self,
        level: f64,
        count: usize,
        rng: &mut dyn RngCore,
    ) -> Option<Vec<Point>> {
        let d = self.dim();
        let pivot = (0..d)
            .max_by(|&i, &j| self.coeffs[i].abs().total_cmp(&self.coeffs[j].abs()))
            .unwrap();
        let mut out = Vec::with_capacity(count);
        let max_attempts = 1000 * count.max(1);
        for _ in 0..max_attempts {
            if out.len() == count {
                break;
            }
            let mut x = uniform_point(d, rng);
            let rest: f64 = (0..d)
                .filter(|&j| j != pivot)
                .map(|j| self.coeffs[j] * x[j])
                .sum();
            let xp = (level - self.offset - rest) / self.coeffs[pivot];
            if !(0.0..=1.0).contains(&xp) {
                continue;
            }
            x[pivot] = xp;
            if (self.value(&x) - level).abs() <= 1e-12 {
                out.push(x);
            }
        }
        Some(out)
    }
}

pub fn make_affine(coeffs: Vec<f64>, offset: f64) -> Result<Oracle, OracleError> {
    Ok(Oracle::new(Affine::new(coeffs, offset)?))
}

/// `f0(x) = a − 1/4 + ‖x − o‖₂²` with `o = (1/2, …, 1/2)`.
///
/// Its level set `{f0 = a}` is the Euclidean sphere of radius 1/2 about `o`.
#[derive(Clone, Debug)]
pub struct QuadraticBowl {
    pub level: f64,
    pub dim: usize,
}

impl TestFunction for QuadraticBowl {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|xi| (xi - 0.5) * (xi - 0.5)).sum();
        self.level - 0.25 + r2
    }

    fn gradient(&self, x: &[f64]) -> Option<Point> {
        Some(x.iter().map(|xi| 2.0 * (xi - 0.5)).collect())
    }

    fn smoothness(&self) -> Vec<SmoothnessTag> {
        vec![
            SmoothnessTag::GradHolder {
                c1: 2.0,
                gamma1: 1.0,
            },
            // |Σ (x_j − y_j)(x_j + y_j − 1)| ≤ d ‖x − y‖_∞ on the unit cube.
            SmoothnessTag::Holder {
                c: self.dim as f64,
                gamma: 1.0,
            },
        ]
    }

    fn is_convex(&self) -> bool {
        true
    }

    // In d = 1 the "sphere" is {0, 1}, on the boundary of the domain.
    fn has_level_set_sampler(&self) -> bool {
        self.dim >= 2
    }

    fn sample_level_set(
        &self,
        level: f64,
        count: usize,
        rng: &mut dyn RngCore,
    ) -> Option<Vec<Point>> {
        if self.dim < 2 {
            return None;
        }
        let r2 = level - (self.level - 0.25);
        if r2 < 0.0 {
            return Some(Vec::new());
        }
        let radius = r2.sqrt();
        let mut out = Vec::with_capacity(count);
        for _ in 0..1000 * count.max(1) {
            if out.len() == count {
                break;
            }
            let dir: Vec<f64> = (0..self.dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let x: Point = dir.iter().map(|v| 0.5 + radius * v / norm).collect();
            if x.iter().all(|xi| (0.0..=1.0).contains(xi))
                && (self.value(&x) - level).abs() <= 1e-12
            {
                out.push(x);
            }
        }
        Some(out)
    }
}

pub fn make_quadratic_f0(level: f64, dim: usize) -> Oracle {
    assert!(dim >= 1);
    Oracle::new(QuadraticBowl { level, dim })
}

/// `exp(−x²/(1−x²))` on `(−1, 1)`, zero elsewhere.
pub fn base_bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        let x2 = x * x;
        (-x2 / (1.0 - x2)).exp()
    } else {
        0.0
    }
}

fn base_bump_derivative(x: f64) -> f64 {
    if x.abs() < 1.0 {
        let s = 1.0 - x * x;
        base_bump(x) * (-2.0 * x / (s * s))
    } else {
        0.0
    }
}

/// `f(x) = α Π_j base_bump((x_j − z_j)/η)`, supported on the open sup-ball
/// of radius `η` around `z`.
#[derive(Clone, Debug)]
pub struct Bump {
    alpha: f64,
    eta: f64,
    center: Point,
    tags: Vec<SmoothnessTag>,
}

impl Bump {
    /// `z` must lie on the grid `{0, 2η, …, ⌊1/(2η)⌋·2η}^d`.
    pub fn new(alpha: f64, eta: f64, center: Point) -> Result<Self, OracleError> {
        if !(alpha > 0.0) {
            return Err(OracleError::InvalidParameter(format!(
                "bump amplitude must be positive, got {alpha}"
            )));
        }
        if !(eta > 0.0 && eta <= 0.25) {
            return Err(OracleError::InvalidParameter(format!(
                "bump scale must lie in (0, 1/4], got {eta}"
            )));
        }
        let last = bump_grid_last(eta);
        let on_grid = !center.is_empty()
            && center.iter().all(|&zj| {
                let k = zj / (2.0 * eta);
                let kr = k.round();
                (k - kr).abs() <= 1e-9 && kr >= 0.0 && kr <= last as f64
            });
        if !on_grid {
            return Err(OracleError::InvalidGridPoint(center));
        }
        Ok(Bump {
            alpha,
            eta,
            center,
            tags: Vec::new(),
        })
    }

    /// Attaches a smoothness certificate established elsewhere.
    pub fn with_tag(mut self, tag: SmoothnessTag) -> Self {
        self.tags.push(tag);
        self
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Largest grid multiple `⌊1/(2η)⌋`.
pub(crate) fn bump_grid_last(eta: f64) -> u64 {
    (1.0 / (2.0 * eta) + 1e-9).floor() as u64
}

impl TestFunction for Bump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.alpha
            * x.iter()
                .zip(&self.center)
                .map(|(xi, zi)| base_bump((xi - zi) / self.eta))
                .product::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Option<Point> {
        let t: Vec<f64> = x
            .iter()
            .zip(&self.center)
            .map(|(xi, zi)| (xi - zi) / self.eta)
            .collect();
        let vals: Vec<f64> = t.iter().map(|&s| base_bump(s)).collect();
        Some(
            (0..t.len())
                .map(|j| {
                    let others: f64 = vals
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, v)| v)
                        .product();
                    self.alpha * base_bump_derivative(t[j]) / self.eta * others
                })
                .collect(),
        )
    }

    fn smoothness(&self) -> Vec<SmoothnessTag> {
        self.tags.clone()
    }
}

pub fn make_bump_function(alpha: f64, eta: f64, center: Point) -> Result<Oracle, OracleError> {
    Ok(Oracle::new(Bump::new(alpha, eta, center)?))
}

/// `f(x) = max(0, 2ε − c ‖x − z‖_∞^γ)`.
#[derive(Clone, Debug)]
pub struct Spike {
    epsilon: f64,
    c: f64,
    gamma: f64,
    center: Point,
}

impl Spike {
    pub fn new(epsilon: f64, c: f64, gamma: f64, center: Point) -> Result<Self, OracleError> {
        if !(epsilon > 0.0) {
            return Err(OracleError::InvalidParameter(format!(
                "spike height parameter must be positive, got {epsilon}"
            )));
        }
        check_class(c, gamma)?;
        Ok(Spike {
            epsilon,
            c,
            gamma,
            center,
        })
    }
}

impl TestFunction for Spike {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = crate::geometry::sup_distance(x, &self.center);
        (2.0 * self.epsilon - self.c * r.powf(self.gamma)).max(0.0)
    }

    fn smoothness(&self) -> Vec<SmoothnessTag> {
        vec![SmoothnessTag::Holder {
            c: self.c,
            gamma: self.gamma,
        }]
    }
}

pub fn make_spike(epsilon: f64, c: f64, gamma: f64, center: Point) -> Result<Oracle, OracleError> {
    Ok(Oracle::new(Spike::new(epsilon, c, gamma, center)?))
}

/// Result of [`check_smoothness`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateReport {
    pub tag: SmoothnessTag,
    pub pairs: usize,
    pub violations: usize,
    /// Largest observed `|Δ| / (c‖x − y‖^γ)`; at most 1 when no violation.
    pub worst_ratio: f64,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `pairs` point pairs and tests the smoothness inequality of `tag`
/// on each: function values for Hölder tags, analytic gradients (sup-norm)
/// for gradient-Hölder tags.
///
/// Half the pairs are uniform on the cube, the other half are close pairs at
/// log-uniform distances in `[1e-5, 1e-1]`, where Hölder bounds with `γ < 1`
/// are tightest.
pub fn check_smoothness(
    oracle: &Oracle,
    tag: SmoothnessTag,
    pairs: usize,
    rng: &mut dyn RngCore,
) -> Result<CertificateReport, OracleError> {
    let (constant, exponent, on_gradient) = match tag {
        SmoothnessTag::Holder { c, gamma } => (c, gamma, false),
        SmoothnessTag::GradHolder { c1, gamma1 } => (c1, gamma1, true),
        SmoothnessTag::Unknown => {
            return Err(OracleError::InvalidParameter(
                "cannot certify an unknown smoothness class".into(),
            ))
        }
    };
    let d = oracle.dim();
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for p in 0..pairs {
        let x: Point = (0..d).map(|_| rng.random::<f64>()).collect();
        let y: Point = if p % 2 == 0 {
            (0..d).map(|_| rng.random::<f64>()).collect()
        } else {
            let scale = 10f64.powf(-1.0 - 4.0 * rng.random::<f64>());
            x.iter()
                .map(|v| (v + scale * (2.0 * rng.random::<f64>() - 1.0)).clamp(0.0, 1.0))
                .collect()
        };
        let dist = crate::geometry::sup_distance(&x, &y);
        if dist == 0.0 {
            continue;
        }
        let gap = if on_gradient {
            let (Some(gx), Some(gy)) = (oracle.gradient(&x), oracle.gradient(&y)) else {
                return Err(OracleError::InvalidParameter(
                    "gradient certificate needs an analytic gradient".into(),
                ));
            };
            crate::geometry::sup_distance(&gx, &gy)
        } else {
            (oracle.value_unmetered(&x) - oracle.value_unmetered(&y)).abs()
        };
        let bound = constant * dist.powf(exponent);
        worst_ratio = worst_ratio.max(gap / bound);
        if gap > bound * (1.0 + 1e-9) + 1e-12 {
            violations += 1;
        }
    }
    Ok(CertificateReport {
        tag,
        pairs,
        violations,
        worst_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn base_bump_values() {
        assert_eq!(base_bump(0.0), 1.0);
        assert_eq!(base_bump(1.0), 0.0);
        assert_eq!(base_bump(-1.0), 0.0);
        assert!((base_bump(0.5) - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((base_bump(0.5) - 0.716_531).abs() < 1e-6);
    }

    #[test]
    fn base_bump_derivative_matches_finite_difference() {
        for &x in &[-0.9, -0.5, -0.1, 0.0, 0.3, 0.77] {
            let h = 1e-6;
            let fd = (base_bump(x + h) - base_bump(x - h)) / (2.0 * h);
            assert!((fd - base_bump_derivative(x)).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn query_counter_counts_eval_only() {
        let o = make_constant(2, 1.0);
        for _ in 0..7 {
            o.eval(&[0.1, 0.2]);
        }
        o.value_unmetered(&[0.0, 0.0]);
        assert_eq!(o.query_count(), 7);
    }

    #[test]
    fn bump_examples() {
        let o = make_bump_function(1.5, 0.25, vec![0.5, 0.0]).unwrap();
        assert_eq!(o.eval(&[0.5, 0.0]), 1.5);
        assert_eq!(o.eval(&[0.75, 0.0]), 0.0);
        assert_eq!(o.eval(&[0.5, 0.3]), 0.0);

        let o = make_bump_function(1.0, 0.25, vec![0.0]).unwrap();
        assert!((o.eval(&[0.125]) - base_bump(0.5)).abs() < 1e-15);
    }

    #[test]
    fn bump_rejects_off_grid_centers() {
        assert!(matches!(
            make_bump_function(1.0, 0.25, vec![0.3]),
            Err(OracleError::InvalidGridPoint(_))
        ));
        // grid for η = 0.25 is {0, 0.5, 1}
        assert!(make_bump_function(1.0, 0.25, vec![1.0]).is_ok());
        assert!(make_bump_function(1.0, 0.3, vec![0.0]).is_err());
    }

    #[test]
    fn quadratic_examples() {
        let a = 0.7;
        let o = make_quadratic_f0(a, 2);
        assert!((o.eval(&[0.5, 0.5]) - (a - 0.25)).abs() < 1e-15);
        assert!((o.eval(&[1.0, 0.5]) - a).abs() < 1e-15);
        assert!((o.eval(&[0.9, 0.8]) - a).abs() < 1e-15);
        assert!(o.is_convex());
        assert_eq!(o.grad_holder(), Some((2.0, 1.0)));
        assert!(!make_quadratic_f0(a, 1).has_level_set_sampler());
    }

    #[test]
    fn affine_examples() {
        let o = make_affine(vec![1.0], 0.0).unwrap();
        assert_eq!(o.eval(&[0.5]), 0.5);
        assert_eq!(o.holder(), Some((1.0, 1.0)));
        assert!(make_affine(vec![0.0, 0.0], 1.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let o = make_affine(vec![1.0, 0.0], 0.0).unwrap();
        let pts = o.sample_level_set(0.5, 50, &mut rng).unwrap();
        assert_eq!(pts.len(), 50);
        assert!(pts.iter().all(|p| p[0] == 0.5));

        let o = make_affine(vec![1.0, 1.0], 0.0).unwrap();
        let pts = o.sample_level_set(1.0, 100, &mut rng).unwrap();
        assert_eq!(pts.len(), 100);
        assert!(pts.iter().all(|p| (p[0] + p[1] - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn spike_examples() {
        let o = make_spike(0.1, 1.0, 1.0, vec![0.5]).unwrap();
        assert!((o.eval(&[0.5]) - 0.2).abs() < 1e-15);
        assert!((o.eval(&[0.55]) - 0.15).abs() < 1e-12);
        // support boundary at sup-distance (2ε/c)^{1/γ}
        let o = make_spike(0.125, 1.0, 1.0, vec![0.5]).unwrap();
        assert_eq!(o.eval(&[0.75]), 0.0);
        assert_eq!(o.eval(&[0.25]), 0.0);
        assert!(o.eval(&[0.74]) > 0.0);
    }

    #[test]
    fn samplers_hit_the_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = make_quadratic_f0(0.0, 3);
        let pts = q.sample_level_set(0.0, 200, &mut rng).unwrap();
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|p| q.value_unmetered(p).abs() <= 1e-12));

        let c = make_constant(2, 0.3);
        assert_eq!(c.sample_level_set(0.3, 10, &mut rng).unwrap().len(), 10);
        assert!(c.sample_level_set(0.4, 10, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn smoothness_tag_validation() {
        assert!(SmoothnessTag::holder(1.0, 1.0).is_ok());
        assert!(SmoothnessTag::holder(0.0, 1.0).is_err());
        assert!(SmoothnessTag::grad_holder(1.0, 1.5).is_err());
        assert!(SmoothnessTag::grad_holder(1.0, 0.0).is_err());
    }

    #[test]
    fn smoothness_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = make_quadratic_f0(0.3, 2);
        for tag in q.smoothness() {
            let r = check_smoothness(&q, tag, 10_000, &mut rng).unwrap();
            assert!(r.passed(), "{r:?}");
        }
        // too small a constant is caught
        let bad = SmoothnessTag::Holder { c: 0.5, gamma: 1.0 };
        assert!(!check_smoothness(&q, bad, 10_000, &mut rng)
            .unwrap()
            .passed());
        assert!(check_smoothness(&q, SmoothnessTag::Unknown, 10, &mut rng).is_err());
    }
}
