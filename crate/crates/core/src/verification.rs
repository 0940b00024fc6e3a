//! Ground-truth checks of ε-approximations, sample-complexity measurement,
//! rate fitting and near-level-set dimension estimation.
//!
//! A set `S` is an ε-approximation of `{f = a}` when
//! `{f = a} ⊆ S ⊆ {|f − a| ≤ ε}`. The first inclusion is checked on points
//! drawn from the oracle's analytic level-set sampler, the second on a
//! regular grid and on random points inside the cells of `S`. Neither check
//! is a certificate: both only see finitely many points.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::approximators::{Mode, Strategy};
use crate::blackbox::Oracle;
use crate::engine::{run_ba, BaConfig, RunTrace, StopCriterion};
use crate::error::VerificationError;
use crate::geometry::{greedy_packing, Point};
use crate::protocol::LevelSetEstimate;

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Grid points per axis for the excess check (`grid_n^d` points).
    pub grid_n: usize,
    /// Level-set samples for the containment check.
    pub level_samples: usize,
    /// Added to ε in the excess check to absorb evaluation noise.
    pub slack: f64,
    /// Random points drawn in every cell of the set...
    pub random_points_per_cell: usize,
    /// ...when the set has at most this many cells.
    pub random_cell_limit: usize,
    pub seed: u64,
    pub check_containment: bool,
    pub mode: Mode,
    /// Extra points known to lie in the target set.
    pub containment_probes: Vec<Point>,
    /// Extra points at which the excess condition is tested.
    pub excess_probes: Vec<Point>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            grid_n: 256,
            level_samples: 1000,
            slack: 1e-9,
            random_points_per_cell: 1000,
            random_cell_limit: 10_000,
            seed: 0,
            check_containment: true,
            mode: Mode::LevelSet,
            containment_probes: Vec::new(),
            excess_probes: Vec::new(),
        }
    }
}

impl CheckOptions {
    pub fn with_grid(mut self, grid_n: usize) -> Self {
        self.grid_n = grid_n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_random_points(mut self, per_cell: usize) -> Self {
        self.random_points_per_cell = per_cell;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckVerdict {
    pub passed: bool,
    /// Target-set points missing from `S`, with their `f` values.
    pub containment_failures: Vec<(Point, f64)>,
    /// Points of `S` where `f` is too far from the level, with their `f` values.
    pub excess_failures: Vec<(Point, f64)>,
    /// Spacing of the excess grid.
    pub grid_resolution: f64,
}

/// `index`-th point of the regular grid with `n` points per axis, axis 0
/// varying slowest (lexicographic order).
fn grid_point(mut index: usize, n: usize, dim: usize) -> Point {
    let step = 1.0 / (n - 1) as f64;
    let mut x = vec![0.0; dim];
    for j in (0..dim).rev() {
        x[j] = (index % n) as f64 * step;
        index /= n;
    }
    x
}

fn grid_len(n: usize, dim: usize) -> usize {
    n.checked_pow(dim as u32).expect("grid too large")
}

pub fn check_eps_approximation(
    set: &dyn LevelSetEstimate,
    oracle: &Oracle,
    level: f64,
    eps: f64,
    opts: &CheckOptions,
) -> Result<CheckVerdict, VerificationError> {
    let dim = oracle.dim();
    if opts.grid_n < 2 {
        return Err(VerificationError::DegenerateInput(
            "grid needs at least 2 points per axis".into(),
        ));
    }
    let mode = opts.mode;
    let n_grid = grid_len(opts.grid_n, dim);

    let mut containment_failures = Vec::new();
    if opts.check_containment {
        let mut targets: Vec<Point> = opts.containment_probes.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        match oracle.sample_level_set(level, opts.level_samples, &mut rng) {
            Some(pts) => targets.extend(pts),
            None if mode == Mode::LevelSet => return Err(VerificationError::NoLevelSetSampler),
            None => {}
        }
        if mode != Mode::LevelSet {
            // {f ≤ a} or {f ≥ a} is full-dimensional; use the grid
            targets.extend(
                (0..n_grid)
                    .into_par_iter()
                    .filter_map(|i| {
                        let x = grid_point(i, opts.grid_n, dim);
                        mode.in_target(oracle.value_unmetered(&x), level)
                            .then_some(x)
                    })
                    .collect::<Vec<_>>(),
            );
        }
        containment_failures = targets
            .into_par_iter()
            .filter(|x| !set.contains(x))
            .map(|x| {
                let v = oracle.value_unmetered(&x);
                (x, v)
            })
            .collect();
    }

    let bound = eps + opts.slack;
    let excess = |x: Point| -> Option<(Point, f64)> {
        if !set.contains(&x) {
            return None;
        }
        let v = oracle.value_unmetered(&x);
        (!mode.accepts(v, level, bound)).then_some((x, v))
    };

    let mut excess_failures: Vec<(Point, f64)> = opts
        .excess_probes
        .iter()
        .cloned()
        .filter_map(excess)
        .collect();
    excess_failures.extend(
        (0..n_grid)
            .into_par_iter()
            .filter_map(|i| excess(grid_point(i, opts.grid_n, dim)))
            .collect::<Vec<_>>(),
    );
    if opts.random_points_per_cell > 0 {
        if let Some(cells) = set.cells() {
            if cells.len() <= opts.random_cell_limit {
                let per_cell: Vec<Vec<(Point, f64)>> = cells
                    .par_iter()
                    .enumerate()
                    .map(|(ci, cell)| {
                        let mut rng = ChaCha8Rng::seed_from_u64(
                            opts.seed ^ (ci as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                        );
                        let lo = cell.lower();
                        let side = cell.side();
                        (0..opts.random_points_per_cell)
                            .filter_map(|_| {
                                let x: Point =
                                    lo.iter().map(|l| l + side * rng.random::<f64>()).collect();
                                excess(x)
                            })
                            .collect()
                    })
                    .collect();
                excess_failures.extend(per_cell.into_iter().flatten());
            }
        }
    }

    Ok(CheckVerdict {
        passed: containment_failures.is_empty() && excess_failures.is_empty(),
        containment_failures,
        excess_failures,
        grid_resolution: 1.0 / (opts.grid_n - 1) as f64,
    })
}

/// Verdict for every published set `S(1), …, S(m)` of a trace.
pub fn check_trace(
    trace: &RunTrace,
    oracle: &Oracle,
    eps: f64,
    opts: &CheckOptions,
) -> Result<Vec<CheckVerdict>, VerificationError> {
    let opts = CheckOptions {
        mode: trace.config.mode,
        ..opts.clone()
    };
    (1..=trace.completed_iterations())
        .map(|i| {
            let set = trace.output_set(i).unwrap();
            check_eps_approximation(&set, oracle, trace.config.level, eps, &opts)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleComplexity {
    /// Index of the first query whose output is the first set from which
    /// every later checked output passes.
    Finite {
        queries: u64,
        iteration: u32,
    },
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct ComplexityMeasurement {
    pub result: SampleComplexity,
    pub iterations_run: u32,
    pub total_queries: u64,
}

/// Runs the engine to `max_depth` iterations and finds the first iteration
/// `ι` such that `S(ι), …, S(max_depth)` all pass the ε check.
///
/// `S_n` is constant within an iteration, so the per-query definition is
/// recovered exactly: the answer is `n_{ι−1} + 1`, the first query made
/// while `S(ι)` is the output.
pub fn measure_sample_complexity(
    template: &BaConfig,
    oracle: &Oracle,
    strategy: &dyn Strategy,
    eps: f64,
    max_depth: u32,
    opts: &CheckOptions,
) -> Result<ComplexityMeasurement, VerificationError> {
    let config = template
        .clone()
        .with_stop(StopCriterion::MaxDepth(max_depth));
    let trace = run_ba(&config, oracle, strategy)?;
    let opts = CheckOptions {
        mode: config.mode,
        ..opts.clone()
    };
    let last = trace.completed_iterations();
    let mut first_ok = last + 1;
    for i in (1..=last).rev() {
        let set = trace.output_set(i).unwrap();
        let verdict = check_eps_approximation(&set, oracle, config.level, eps, &opts)?;
        if !verdict.passed {
            break;
        }
        first_ok = i;
    }
    let result = if first_ok > last {
        SampleComplexity::Unbounded
    } else {
        SampleComplexity::Finite {
            queries: trace.queries_after(first_ok - 1) + 1,
            iteration: first_ok,
        }
    };
    Ok(ComplexityMeasurement {
        result,
        iterations_run: last,
        total_queries: trace.total_queries(),
    })
}

/// Least-squares line of `log₂ n` against `log₂(1/ε)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(log₂(1/ε), log₂ n)` pairs.
    pub points: Vec<(f64, f64)>,
}

pub fn fit_rate(samples: &[(f64, f64)]) -> Result<RateFit, VerificationError> {
    let bad = |m: &str| Err(VerificationError::DegenerateInput(m.into()));
    if samples.len() < 3 {
        return bad("at least 3 samples are required");
    }
    if samples.iter().any(|&(e, n)| !(e > 0.0) || !(n >= 1.0)) {
        return bad("accuracies must be positive and counts at least 1");
    }
    let points: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(e, n)| ((1.0 / e).log2(), n.log2()))
        .collect();
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) || sxx == 0.0 {
        return bad("accuracies must be distinct");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points,
    })
}

/// Packing counts of inflated level sets at their own scale, and the fitted
/// exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct NlsEstimate {
    pub fit: RateFit,
    /// `(r, N̂({|f − a| ≤ r}, r))` per scale.
    pub counts: Vec<(f64, usize)>,
}

impl NlsEstimate {
    /// `scale,packing_count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,packing_count\n");
        for (r, n) in &self.counts {
            writeln!(out, "{r},{n}").unwrap();
        }
        out
    }
}

/// Estimates the near-level-set dimension: for each scale `r`, greedily
/// packs (at scale `r`, lexicographic grid order) the grid points with
/// `|f − a| ≤ r`, then fits `log₂ count` against `log₂(1/r)`.
pub fn estimate_nls_dimension(
    oracle: &Oracle,
    level: f64,
    scales: &[f64],
    grid_n: usize,
) -> Result<NlsEstimate, VerificationError> {
    if scales.len() < 4 {
        return Err(VerificationError::DegenerateInput(
            "at least 4 scales are required".into(),
        ));
    }
    if scales.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(VerificationError::DegenerateInput(
            "scales must lie in (0, 1)".into(),
        ));
    }
    let ratio = scales[1] / scales[0];
    if scales
        .windows(2)
        .any(|w| ((w[1] / w[0]) - ratio).abs() > 1e-9 * ratio.abs())
    {
        return Err(VerificationError::DegenerateInput(
            "scales must form a geometric sequence".into(),
        ));
    }
    if grid_n < 2 {
        return Err(VerificationError::DegenerateInput(
            "grid needs at least 2 points per axis".into(),
        ));
    }
    let dim = oracle.dim();
    let grid: Vec<(Point, f64)> = (0..grid_len(grid_n, dim))
        .into_par_iter()
        .map(|i| {
            let x = grid_point(i, grid_n, dim);
            let gap = (oracle.value_unmetered(&x) - level).abs();
            (x, gap)
        })
        .collect();
    let counts = scales
        .par_iter()
        .map(|&r| {
            let inflated: Vec<Point> = grid
                .iter()
                .filter(|(_, gap)| *gap <= r)
                .map(|(x, _)| x.clone())
                .collect();
            if inflated.is_empty() {
                return Err(VerificationError::EmptyInflatedSet { scale: r });
            }
            Ok((r, greedy_packing(&inflated, r).count))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let samples: Vec<(f64, f64)> = counts.iter().map(|&(r, n)| (r, n as f64)).collect();
    Ok(NlsEstimate {
        fit: fit_rate(&samples)?,
        counts,
    })
}

/// One accuracy of an ε-sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    /// Sample complexity, or total queries spent when unbounded.
    pub queries: u64,
    /// Qualifying iteration, or iterations run when unbounded.
    pub iterations: u32,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Fit over the rows that passed; `None` if fewer than 3 did.
    pub fit: Option<RateFit>,
}

impl SweepResult {
    /// `epsilon,queries,iterations,passed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,queries,iterations,passed\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                r.epsilon, r.queries, r.iterations, r.passed
            )
            .unwrap();
        }
        out
    }
}

/// `start, start·factor, …` (`count` terms).
pub fn geometric_sequence(start: f64, factor: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start * factor.powi(i as i32)).collect()
}

/// Measures the sample complexity at each accuracy, running each to
/// `iterations_needed(ε, b, β) + 1 + extra_depth` iterations, and fits the
/// rate exponent.
pub fn sweep_sample_complexity(
    template: &BaConfig,
    oracle: &Oracle,
    strategy: &dyn Strategy,
    epsilons: &[f64],
    extra_depth: u32,
    opts: &CheckOptions,
) -> Result<SweepResult, VerificationError> {
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let depth =
            crate::engine::iterations_needed(eps, template.tolerance_b, template.tolerance_beta)
                + 1
                + extra_depth;
        let m = measure_sample_complexity(template, oracle, strategy, eps, depth, opts)?;
        rows.push(match m.result {
            SampleComplexity::Finite { queries, iteration } => SweepRow {
                epsilon: eps,
                queries,
                iterations: iteration,
                passed: true,
            },
            SampleComplexity::Unbounded => SweepRow {
                epsilon: eps,
                queries: m.total_queries,
                iterations: m.iterations_run,
                passed: false,
            },
        });
    }
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.passed)
        .map(|r| (r.epsilon, r.queries as f64))
        .collect();
    let fit = if samples.len() >= 3 {
        Some(fit_rate(&samples)?)
    } else {
        None
    };
    Ok(SweepResult { rows, fit })
}
