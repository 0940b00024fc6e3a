//! Lower-bound harness: any deterministic algorithm that stops short of one
//! query per bump cell cannot tell `f ≡ 0` from a bump hidden in an
//! unqueried cell, so its output fails for one of the two.

use std::fmt;
use std::sync::Arc;

use crate::approximators::{bag_strategy, bah_strategy, Strategy};
use crate::blackbox::{bump_grid_last, make_constant, Bump, Oracle, SmoothnessTag};
use crate::engine::{BaConfig, BaLearner, StopCriterion};
use crate::error::AdversaryError;
use crate::geometry::{sup_distance, Point};
use crate::protocol::{run_protocol, AlwaysEmpty, AlwaysFull, LevelSetEstimate, QueryAlgorithm};
use crate::verification::{check_eps_approximation, CheckOptions};

fn check_inputs(eps: f64, d: usize, constant: f64, exponent: f64) -> Result<(), AdversaryError> {
    if !(eps > 0.0) || d == 0 || !(constant > 0.0) || !(exponent > 0.0 && exponent <= 1.0) {
        return Err(AdversaryError::InvalidParameter(format!(
            "need ε > 0, d ≥ 1, constant > 0 and exponent in (0, 1]; got ε={eps}, d={d}, \
             constant={constant}, exponent={exponent}"
        )));
    }
    Ok(())
}

/// Bump half-width making `2ε·Πf̃((x − z)/η)` `(c, γ)`-Hölder:
/// `η = (6εd·2^{1−γ}/c)^{1/γ}`.
///
/// Requires `ε < c/(3d·2^γ)` and a resulting `η ≤ ¼`.
pub fn bump_scale_holder(eps: f64, d: usize, c: f64, gamma: f64) -> Result<f64, AdversaryError> {
    check_inputs(eps, d, c, gamma)?;
    let d_f = d as f64;
    let eta = (6.0 * eps * d_f * (1.0 - gamma).exp2() / c).powf(1.0 / gamma);
    if eps >= c / (3.0 * d_f * gamma.exp2()) || eta > 0.25 {
        return Err(AdversaryError::AccuracyTooLarge { epsilon: eps, eta });
    }
    Ok(eta)
}

/// Bump half-width making `2ε·Πf̃((x − z)/η)` `(c₁, γ₁)`-gradient-Hölder:
/// `η = (132εd·2^{1−γ₁}/c₁)^{1/(1+γ₁)}`.
///
/// Requires `ε < c₁/(132d·2^{3+γ₁})`.
pub fn bump_scale_gradholder(
    eps: f64,
    d: usize,
    c1: f64,
    gamma1: f64,
) -> Result<f64, AdversaryError> {
    check_inputs(eps, d, c1, gamma1)?;
    let d_f = d as f64;
    let eta = (132.0 * eps * d_f * (1.0 - gamma1).exp2() / c1).powf(1.0 / (1.0 + gamma1));
    if eps >= c1 / (132.0 * d_f * (3.0 + gamma1).exp2()) || eta > 0.25 {
        return Err(AdversaryError::AccuracyTooLarge { epsilon: eps, eta });
    }
    Ok(eta)
}

/// Bump half-width for a smoothness class.
pub fn bump_scale(eps: f64, d: usize, class: SmoothnessTag) -> Result<f64, AdversaryError> {
    match class {
        SmoothnessTag::Holder { c, gamma } => bump_scale_holder(eps, d, c, gamma),
        SmoothnessTag::GradHolder { c1, gamma1 } => bump_scale_gradholder(eps, d, c1, gamma1),
        SmoothnessTag::Unknown => Err(AdversaryError::InvalidParameter(
            "a smoothness class is required".into(),
        )),
    }
}

/// `|Z| = (⌊1/(2η)⌋ + 1)^d`.
pub fn grid_size(eta: f64, d: usize) -> u64 {
    (bump_grid_last(eta) + 1).pow(d as u32)
}

/// The `index`-th point of `Z = {0, 2η, …}^d`, axis 0 varying slowest.
fn grid_center(mut index: u64, per_axis: u64, eta: f64, d: usize) -> Point {
    let mut z = vec![0.0; d];
    for j in (0..d).rev() {
        z[j] = (index % per_axis) as f64 * 2.0 * eta;
        index /= per_axis;
    }
    z
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailingBranch {
    /// `S_n` misses a point of `{f ≡ 0 = 0} = [0,1]^d`.
    Containment,
    /// `S_n` contains `z` while `f_z(z) = 2ε > ε`.
    Excess,
}

impl FailingBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            FailingBranch::Containment => "containment",
            FailingBranch::Excess => "excess",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub branch: FailingBranch,
    pub point: Point,
    /// Value at `point` of the function whose check fails.
    pub value: f64,
    /// The checker independently reported this failure.
    pub validated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    AlgorithmDefeated(Witness),
    BudgetSufficient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryReport {
    pub algorithm: String,
    pub budget: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub grid_size: u64,
    /// Queries actually made (an algorithm may stop early).
    pub queries_made: usize,
    pub unqueried_center: Option<Point>,
    pub verdict: Verdict,
}

impl AdversaryReport {
    pub fn defeated(&self) -> bool {
        matches!(self.verdict, Verdict::AlgorithmDefeated(_))
    }
}

fn fmt_point(x: &[f64]) -> String {
    x.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for AdversaryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "algorithm: {}", self.algorithm)?;
        writeln!(f, "budget: {}", self.budget)?;
        writeln!(f, "epsilon: {}", self.epsilon)?;
        writeln!(f, "eta: {}", self.eta)?;
        writeln!(f, "grid_size: {}", self.grid_size)?;
        writeln!(f, "queries_made: {}", self.queries_made)?;
        match &self.unqueried_center {
            Some(z) => writeln!(f, "witness_z: {}", fmt_point(z))?,
            None => writeln!(f, "witness_z: none")?,
        }
        match &self.verdict {
            Verdict::BudgetSufficient => writeln!(f, "verdict: budget-sufficient"),
            Verdict::AlgorithmDefeated(w) => {
                writeln!(f, "verdict: algorithm-defeated")?;
                writeln!(f, "failing_branch: {}", w.branch.as_str())?;
                writeln!(f, "failing_point: {}", fmt_point(&w.point))?;
                writeln!(f, "failing_value: {}", w.value)?;
                writeln!(f, "validated: {}", w.validated)
            }
        }
    }
}

/// Builds a fresh copy of an algorithm; called once per run so replays start
/// from the same state.
pub type AlgorithmFactory = Box<dyn Fn() -> Box<dyn QueryAlgorithm> + Send + Sync>;

pub struct NamedAlgorithm {
    pub name: String,
    pub factory: AlgorithmFactory,
}

fn learner_factory(dim: usize, strategy: Arc<dyn Strategy>) -> AlgorithmFactory {
    Box::new(move || {
        let config =
            BaConfig::for_strategy(&*strategy, dim, 0.0, StopCriterion::MaxDepth(u32::MAX))
                .expect("shipped strategies declare valid tolerances");
        Box::new(BaLearner::new(dim, config, strategy.clone()).expect("valid config"))
    })
}

/// BAH and BAG learners at level 0 with the class constants, plus the two
/// query-free baselines.
pub fn shipped_algorithms(dim: usize, class: SmoothnessTag) -> Vec<NamedAlgorithm> {
    let (c, g) = match class {
        SmoothnessTag::Holder { c, gamma } => (c, gamma),
        SmoothnessTag::GradHolder { c1, gamma1 } => (c1, gamma1),
        SmoothnessTag::Unknown => (1.0, 1.0),
    };
    vec![
        NamedAlgorithm {
            name: "bah".into(),
            factory: learner_factory(dim, Arc::new(bah_strategy(c, g))),
        },
        NamedAlgorithm {
            name: "bag".into(),
            factory: learner_factory(dim, Arc::new(bag_strategy(c, g, dim))),
        },
        NamedAlgorithm {
            name: "always-full".into(),
            factory: Box::new(move || Box::new(AlwaysFull { dim })),
        },
        NamedAlgorithm {
            name: "always-empty".into(),
            factory: Box::new(move || Box::new(AlwaysEmpty { dim })),
        },
    ]
}

#[derive(Clone, Debug, Default)]
pub struct AdversaryOptions {
    /// Defaults to `|Z| − 1`.
    pub budget: Option<usize>,
    /// Replaces the class-derived bump half-width.
    pub eta: Option<f64>,
    /// Points per axis of the grid on which `S_n = [0,1]^d` is tested.
    pub dense_grid: Option<usize>,
}

fn dense_grid_points(dim: usize, per_axis: usize) -> impl Iterator<Item = Point> {
    let total = per_axis.pow(dim as u32);
    (0..total).map(move |mut i| {
        let mut x = vec![0.0; dim];
        for j in (0..dim).rev() {
            x[j] = (i % per_axis) as f64 / (per_axis - 1) as f64;
            i /= per_axis;
        }
        x
    })
}

fn witness_check_options() -> CheckOptions {
    CheckOptions {
        grid_n: 2,
        level_samples: 0,
        random_points_per_cell: 0,
        ..CheckOptions::default()
    }
}

/// Runs the two-function indistinguishability argument against `algorithm`.
///
/// The algorithm is run against `f ≡ 0` for `n` queries, a grid center `z`
/// with no query in its open sup-ball of radius `η` is found, and the
/// algorithm is replayed against the bump `f_z = 2ε·Πf̃((x − z)/η)`. Both
/// runs see only zeros, so they must coincide and end with the same `S_n`,
/// which then fails for one of the two functions.
pub fn run_indistinguishability(
    algorithm: &NamedAlgorithm,
    eps: f64,
    class: SmoothnessTag,
    options: &AdversaryOptions,
) -> Result<AdversaryReport, AdversaryError> {
    let dim = (algorithm.factory)().dim();
    let eta = match options.eta {
        Some(eta) if eta > 0.0 && eta <= 0.25 => eta,
        Some(eta) => {
            return Err(AdversaryError::InvalidParameter(format!(
                "bump half-width must lie in (0, 1/4], got {eta}"
            )))
        }
        None => bump_scale(eps, dim, class)?,
    };
    let per_axis = bump_grid_last(eta) + 1;
    let z_count = grid_size(eta, dim);
    let budget = options
        .budget
        .unwrap_or_else(|| usize::try_from(z_count - 1).unwrap_or(usize::MAX));
    let mut report = AdversaryReport {
        algorithm: algorithm.name.clone(),
        budget,
        epsilon: eps,
        eta,
        grid_size: z_count,
        queries_made: 0,
        unqueried_center: None,
        verdict: Verdict::BudgetSufficient,
    };
    if budget as u64 >= z_count {
        return Ok(report);
    }

    let zero = make_constant(dim, 0.0);
    let mut first = (algorithm.factory)();
    let transcript = run_protocol(&mut *first, &zero, budget);
    report.queries_made = transcript.queries.len();

    let z = (0..z_count)
        .map(|i| grid_center(i, per_axis, eta, dim))
        .find(|z| transcript.queries.iter().all(|q| sup_distance(q, z) >= eta))
        .ok_or(AdversaryError::NoUnqueriedCell)?;
    let bump = constructed_bump(eps, eta, z.clone(), class)?;

    let mut replay = (algorithm.factory)();
    for (step, (q, v)) in transcript
        .queries
        .iter()
        .zip(&transcript.values)
        .enumerate()
    {
        let same = replay.next_query().is_some_and(|r| {
            r.len() == q.len() && r.iter().zip(q).all(|(a, b)| a.to_bits() == b.to_bits())
        });
        if !same {
            return Err(AdversaryError::NondeterministicAlgorithm { step });
        }
        let observed = bump.eval(q);
        if observed.to_bits() != v.to_bits() {
            // z was chosen away from every query; a nonzero value means the
            // cell search is wrong
            return Err(AdversaryError::NoUnqueriedCell);
        }
        replay.observe(observed);
    }
    if transcript.queries.len() < budget && replay.next_query().is_some() {
        return Err(AdversaryError::NondeterministicAlgorithm {
            step: transcript.queries.len(),
        });
    }
    let output: Arc<dyn LevelSetEstimate> = replay.output();

    let per_axis_dense = options.dense_grid.unwrap_or_else(|| {
        (2.0 * (1u64 << 20) as f64)
            .powf(1.0 / dim as f64)
            .clamp(2.0, 1025.0) as usize
    });
    let missing = std::iter::once(z.clone())
        .chain(dense_grid_points(dim, per_axis_dense))
        .find(|x| !output.contains(x));

    let witness = match missing {
        Some(p) => {
            let opts = CheckOptions {
                containment_probes: vec![p.clone()],
                ..witness_check_options()
            };
            let v = check_eps_approximation(&*output, &zero, 0.0, eps, &opts)?;
            let validated = !v.passed && v.containment_failures.iter().any(|(x, _)| *x == p);
            Witness {
                branch: FailingBranch::Containment,
                value: 0.0,
                point: p,
                validated,
            }
        }
        None => {
            let opts = CheckOptions {
                check_containment: false,
                excess_probes: vec![z.clone()],
                ..witness_check_options()
            };
            let v = check_eps_approximation(&*output, &bump, 0.0, eps, &opts)?;
            let validated = !v.passed && v.excess_failures.iter().any(|(x, _)| *x == z);
            Witness {
                branch: FailingBranch::Excess,
                value: bump.value_unmetered(&z),
                point: z.clone(),
                validated,
            }
        }
    };
    report.unqueried_center = Some(z);
    report.verdict = Verdict::AlgorithmDefeated(witness);
    Ok(report)
}

/// The bump the harness would hide at `z` for this class and accuracy.
pub fn constructed_bump(
    eps: f64,
    eta: f64,
    z: Point,
    class: SmoothnessTag,
) -> Result<Oracle, AdversaryError> {
    Ok(Oracle::new(Bump::new(2.0 * eps, eta, z)?.with_tag(class)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holder_scale_examples() {
        assert!(matches!(
            bump_scale_holder(0.05, 1, 1.0, 1.0),
            Err(AdversaryError::AccuracyTooLarge { .. })
        ));
        assert!((bump_scale_holder(0.04, 1, 1.0, 1.0).unwrap() - 0.24).abs() < 1e-12);
        let a = bump_scale_holder(0.02, 2, 1.0, 1.0).unwrap();
        let b = bump_scale_holder(0.01, 2, 1.0, 1.0).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!((bump_scale_holder(0.1, 1, 12.0, 1.0).unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(grid_size(0.05, 1), 11);
        assert_eq!(grid_size(0.1, 1), 6);
    }

    #[test]
    fn gradholder_scale_examples() {
        assert!((bump_scale_gradholder(0.01, 1, 132.0, 1.0).unwrap() - 0.1).abs() < 1e-12);
        let boundary = 132.0 / (132.0 * 16.0);
        assert!(matches!(
            bump_scale_gradholder(boundary, 1, 132.0, 1.0),
            Err(AdversaryError::AccuracyTooLarge { .. })
        ));
        let a = bump_scale_gradholder(0.004, 1, 132.0, 1.0).unwrap();
        let b = bump_scale_gradholder(0.001, 1, 132.0, 1.0).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_size_lower_bound() {
        for &eps in &[0.001, 0.004, 0.01, 0.03] {
            for d in 1..=3 {
                let (c, gamma) = (12.0, 1.0);
                let eta = bump_scale_holder(eps, d, c, gamma).unwrap();
                let bound =
                    (c / (12.0 * d as f64)).powf(d as f64 / gamma) * eps.powf(-(d as f64) / gamma);
                assert!(grid_size(eta, d) as f64 >= bound * (1.0 - 1e-12));
            }
        }
    }

    fn holder12() -> SmoothnessTag {
        SmoothnessTag::Holder {
            c: 12.0,
            gamma: 1.0,
        }
    }

    #[test]
    fn every_shipped_algorithm_is_defeated() {
        for alg in shipped_algorithms(1, holder12()) {
            let r = run_indistinguishability(&alg, 0.1, holder12(), &AdversaryOptions::default())
                .unwrap();
            let Verdict::AlgorithmDefeated(w) = &r.verdict else {
                panic!("{r}")
            };
            assert!(w.validated, "{r}");
            let z = r.unqueried_center.as_ref().unwrap();
            assert_eq!(r.budget, 10);
            let expected = if alg.name == "always-empty" {
                FailingBranch::Containment
            } else {
                FailingBranch::Excess
            };
            assert_eq!(w.branch, expected, "{r}");
            if w.branch == FailingBranch::Excess {
                assert_eq!(&w.point, z);
                assert!((w.value - 0.2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn budget_at_grid_size_is_sufficient() {
        let alg = &shipped_algorithms(1, holder12())[0];
        let opts = AdversaryOptions {
            budget: Some(11),
            ..Default::default()
        };
        let r = run_indistinguishability(alg, 0.1, holder12(), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::BudgetSufficient);
        assert!(r.unqueried_center.is_none());
    }

    struct Erratic {
        calls: std::sync::Arc<std::sync::atomic::AtomicU64>,
    }

    impl QueryAlgorithm for Erratic {
        fn dim(&self) -> usize {
            1
        }
        fn next_query(&mut self) -> Option<Point> {
            let k = self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            Some(vec![(k % 7) as f64 / 7.0])
        }
        fn observe(&mut self, _value: f64) {}
        fn output(&self) -> Arc<dyn LevelSetEstimate> {
            Arc::new(crate::protocol::FullCube { dim: 1 })
        }
    }

    #[test]
    fn nondeterminism_is_reported() {
        let calls = std::sync::Arc::new(std::sync::atomic::AtomicU64::new(0));
        let alg = NamedAlgorithm {
            name: "erratic".into(),
            factory: Box::new(move || {
                Box::new(Erratic {
                    calls: calls.clone(),
                })
            }),
        };
        let opts = AdversaryOptions {
            budget: Some(3),
            eta: Some(0.1),
            ..Default::default()
        };
        assert!(matches!(
            run_indistinguishability(&alg, 0.1, holder12(), &opts),
            Err(AdversaryError::NondeterministicAlgorithm { .. })
        ));
    }

    #[test]
    fn report_is_structured_text() {
        let alg = &shipped_algorithms(1, holder12())[2];
        let r =
            run_indistinguishability(alg, 0.1, holder12(), &AdversaryOptions::default()).unwrap();
        let text = r.to_string();
        assert!(text.contains("verdict: algorithm-defeated"));
        assert!(text.contains("failing_branch: excess"));
        assert!(text.contains("witness_z: 0\n"));
    }
}
