//! The generic Bisect-and-Approximate engine.
//!
//! Iteration `i` publishes `S(i)` from the cubes retained at iteration
//! `i − 1` with threshold `ρ = b·2^{−β(i−1)}`, bisects those cubes, queries
//! `k` points in each child, builds a local approximator per child and keeps
//! the children whose approximator comes within `b·2^{−βi}` of the level
//! somewhere on the child.
//!
//! All query points of one iteration depend only on the cube list, so they
//! are evaluated as a batch (in parallel); cube lists are kept sorted by
//! `(depth, index)`, which makes traces independent of scheduling.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::approximators::{LocalApproximator, Mode, Strategy};
use crate::blackbox::{Oracle, SmoothnessTag};
use crate::error::EngineError;
use crate::geometry::{DyadicCube, Point};
use crate::protocol::{LevelSetEstimate, QueryAlgorithm};

/// When a run stops. The underlying loop is unbounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopCriterion {
    /// Run through iteration `iterations_needed(ε, b, β) + 1`.
    TargetAccuracy(f64),
    /// Run exactly this many iterations.
    MaxDepth(u32),
    /// Run whole iterations while the cumulative query count stays within
    /// the budget.
    MaxQueries(u64),
}

pub const DEFAULT_MAX_CUBES: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub struct BaConfig {
    pub level: f64,
    pub tolerance_b: f64,
    pub tolerance_beta: f64,
    pub queries_per_cube: usize,
    pub mode: Mode,
    pub stop: StopCriterion,
    /// Largest number of cubes a single iteration may create.
    pub max_cubes: usize,
}

impl BaConfig {
    pub fn new(level: f64, b: f64, beta: f64, k: usize, stop: StopCriterion) -> Self {
        BaConfig {
            level,
            tolerance_b: b,
            tolerance_beta: beta,
            queries_per_cube: k,
            mode: Mode::LevelSet,
            stop,
            max_cubes: DEFAULT_MAX_CUBES,
        }
    }

    /// Config with the tolerances and `k` a strategy declares for dimension `dim`.
    pub fn for_strategy(
        strategy: &dyn Strategy,
        dim: usize,
        level: f64,
        stop: StopCriterion,
    ) -> Result<Self, EngineError> {
        let (b, beta) = strategy.tolerances(dim).ok_or_else(|| {
            EngineError::InvalidConfig(format!(
                "strategy {} does not declare tolerances",
                strategy.name()
            ))
        })?;
        let config = BaConfig::new(level, b, beta, strategy.queries_per_cube(dim), stop);
        config.validate()?;
        Ok(config)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_max_cubes(mut self, max_cubes: usize) -> Self {
        self.max_cubes = max_cubes;
        self
    }

    pub fn with_stop(mut self, stop: StopCriterion) -> Self {
        self.stop = stop;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::InvalidConfig(msg));
        if !self.level.is_finite() {
            return bad(format!("level must be finite, got {}", self.level));
        }
        if !(self.tolerance_b > 0.0 && self.tolerance_b.is_finite()) {
            return bad(format!(
                "tolerance b must be positive, got {}",
                self.tolerance_b
            ));
        }
        if !(self.tolerance_beta > 0.0 && self.tolerance_beta.is_finite()) {
            return bad(format!(
                "tolerance beta must be positive, got {}",
                self.tolerance_beta
            ));
        }
        if self.queries_per_cube == 0 {
            return bad("queries per cube must be at least 1".into());
        }
        if self.max_cubes == 0 {
            return bad("max_cubes must be at least 1".into());
        }
        if let StopCriterion::TargetAccuracy(eps) = self.stop {
            if !(eps > 0.0) {
                return bad(format!("target accuracy must be positive, got {eps}"));
            }
        }
        Ok(())
    }

    /// `b·2^{−β·i}`.
    pub fn threshold(&self, i: u32) -> f64 {
        self.tolerance_b * (-self.tolerance_beta * i as f64).exp2()
    }

    /// Iteration count implied by the stop criterion, if bounded.
    pub fn iteration_limit(&self) -> Option<u32> {
        match self.stop {
            StopCriterion::MaxDepth(m) => Some(m),
            StopCriterion::TargetAccuracy(eps) => {
                Some(iterations_needed(eps, self.tolerance_b, self.tolerance_beta) + 1)
            }
            StopCriterion::MaxQueries(_) => None,
        }
    }
}

/// `max(0, ⌈(1/β) log₂(2b/ε)⌉)`.
pub fn iterations_needed(eps: f64, b: f64, beta: f64) -> u32 {
    assert!(eps > 0.0 && b > 0.0 && beta > 0.0);
    let raw = ((2.0 * b / eps).log2() / beta).ceil();
    if raw <= 0.0 {
        0
    } else {
        raw as u32
    }
}

/// Closed-form worst-case query bound for BAH (Hölder class) or BAG
/// (gradient-Hölder class). Zero when `ε ≥ 2b`.
pub fn worst_case_budget(class: SmoothnessTag, d: u32, eps: f64) -> Result<f64, EngineError> {
    let d_f = d as f64;
    match class {
        SmoothnessTag::Holder { c, gamma } => {
            if eps >= 2.0 * c {
                return Ok(0.0);
            }
            let e = d_f / gamma;
            Ok(2.0 * 8f64.powi(d as i32) * (2.0 * c).powf(e) / eps.powf(e))
        }
        SmoothnessTag::GradHolder { c1, gamma1 } => {
            let b = c1 * d_f;
            if eps >= 2.0 * b {
                return Ok(0.0);
            }
            let e = d_f / (1.0 + gamma1);
            Ok(2.0 * 16f64.powi(d as i32) * (2.0 * b).powf(e) / eps.powf(e))
        }
        SmoothnessTag::Unknown => Err(EngineError::UnknownSmoothness),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CubeRecord {
    pub cube: DyadicCube,
    pub approx: LocalApproximator,
}

/// `S(i)`: union over records of `{x ∈ C : predicate(g_C(x))}` with a
/// common threshold `ρ`.
#[derive(Clone, Debug)]
pub struct OutputSet {
    dim: usize,
    level: f64,
    rho: f64,
    mode: Mode,
    iteration: u32,
    records: Vec<CubeRecord>,
    lookup: HashMap<DyadicCube, usize>,
    depths: Vec<u32>,
}

impl OutputSet {
    pub fn new(
        dim: usize,
        level: f64,
        rho: f64,
        mode: Mode,
        iteration: u32,
        records: Vec<CubeRecord>,
    ) -> Self {
        let lookup = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.cube.clone(), i))
            .collect();
        let mut depths: Vec<u32> = records.iter().map(|r| r.cube.depth()).collect();
        depths.sort_unstable();
        depths.dedup();
        OutputSet {
            dim,
            level,
            rho,
            mode,
            iteration,
            records,
            lookup,
            depths,
        }
    }

    pub fn records(&self) -> &[CubeRecord] {
        &self.records
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn record_accepts(&self, record: &CubeRecord, x: &[f64]) -> bool {
        match record.approx.eval(x) {
            Ok(v) => self.mode.accepts(v, self.level, self.rho),
            Err(_) => false,
        }
    }

    /// Membership of `x`; points on shared faces are tested against every
    /// cube that contains them.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        if x.len() != self.dim || !x.iter().all(|v| (0.0..=1.0).contains(v)) {
            return false;
        }
        for &depth in &self.depths {
            let cells = 1u64 << depth;
            let scale = (depth as f64).exp2();
            let candidates: Vec<Vec<u64>> = x
                .iter()
                .map(|&xj| {
                    let s = xj * scale;
                    let k = s.floor() as u64;
                    let mut c = Vec::with_capacity(2);
                    if k < cells {
                        c.push(k);
                    }
                    if s == k as f64 && k > 0 {
                        c.push(k - 1);
                    }
                    c
                })
                .collect();
            let mut found = false;
            for_each_product(&candidates, &mut |index| {
                if found {
                    return;
                }
                let cube = DyadicCube::new(depth, index.to_vec()).expect("index in range");
                if let Some(&i) = self.lookup.get(&cube) {
                    found = self.record_accepts(&self.records[i], x);
                }
            });
            if found {
                return true;
            }
        }
        false
    }

    /// Text export: a header comment, then one record per line,
    /// `depth:i idx:k1,...,kd rho:r vals:v1,...`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# dim:{} level:{} mode:{} iteration:{} rho:{}",
            self.dim,
            self.level,
            self.mode.as_str(),
            self.iteration,
            self.rho
        )
        .unwrap();
        for r in &self.records {
            write!(out, "{} rho:{} vals:", r.cube, self.rho).unwrap();
            for (j, v) in r.approx.values().iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`OutputSet::to_text`] output. The header line is required.
    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or("missing '#' header line")?;
        let mut dim = None;
        let mut level = None;
        let mut mode = Mode::LevelSet;
        let mut iteration = 0;
        let mut rho = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once(':')
                .ok_or_else(|| format!("bad header field {field:?}"))?;
            let num = || value.parse::<f64>().map_err(|e| format!("{key}: {e}"));
            match key {
                "dim" => dim = Some(value.parse::<usize>().map_err(|e| e.to_string())?),
                "level" => level = Some(num()?),
                "mode" => mode = value.parse()?,
                "iteration" => iteration = value.parse::<u32>().map_err(|e| e.to_string())?,
                "rho" => rho = Some(num()?),
                _ => {}
            }
        }
        let dim = dim.ok_or("header lacks dim")?;
        let level = level.ok_or("header lacks level")?;
        let mut records = Vec::new();
        for line in lines {
            let line = line.trim();
            let (cube_part, rest) = line
                .split_once(" rho:")
                .ok_or_else(|| format!("record lacks rho: {line:?}"))?;
            let cube: DyadicCube = cube_part.parse().map_err(|e| format!("{e}"))?;
            if cube.dim() != dim {
                return Err(format!("record dimension mismatch: {line:?}"));
            }
            let (rho_txt, vals_txt) = rest
                .split_once(" vals:")
                .ok_or_else(|| format!("record lacks vals: {line:?}"))?;
            let r: f64 = rho_txt.parse().map_err(|e| format!("rho: {e}"))?;
            match rho {
                None => rho = Some(r),
                Some(prev) if prev != r => {
                    return Err(format!("records disagree on rho ({prev} vs {r})"))
                }
                _ => {}
            }
            let vals = vals_txt
                .split(',')
                .map(|v| v.parse::<f64>().map_err(|e| format!("vals: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            let approx = if vals.len() == 1 {
                LocalApproximator::Constant(vals[0])
            } else {
                LocalApproximator::multilinear(cube.clone(), vals).map_err(|e| e.to_string())?
            };
            records.push(CubeRecord { cube, approx });
        }
        let rho = rho.ok_or("no rho given")?;
        Ok(OutputSet::new(dim, level, rho, mode, iteration, records))
    }
}

fn for_each_product(choices: &[Vec<u64>], f: &mut dyn FnMut(&[u64])) {
    fn rec(choices: &[Vec<u64>], prefix: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
        if prefix.len() == choices.len() {
            f(prefix);
            return;
        }
        for &c in &choices[prefix.len()] {
            prefix.push(c);
            rec(choices, prefix, f);
            prefix.pop();
        }
    }
    rec(choices, &mut Vec::with_capacity(choices.len()), f)
}

impl LevelSetEstimate for OutputSet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.contains_point(x)
    }

    fn cells(&self) -> Option<Vec<DyadicCube>> {
        Some(self.records.iter().map(|r| r.cube.clone()).collect())
    }
}

/// One row of a run trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub iteration: u32,
    /// `|C'_i|`: cubes produced by bisection and queried in this iteration.
    pub cubes_bisected: usize,
    /// `|C_i|`.
    pub cubes_retained: usize,
    pub cumulative_queries: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// The configured number of iterations completed.
    Completed,
    /// The next iteration would exceed the query budget.
    QueryBudgetReached,
    /// No cube survived; further iterations would query nothing.
    Exhausted,
}

/// Everything needed to reconstruct any `S_n` of a run.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub dim: usize,
    pub config: BaConfig,
    /// Row 0 is the initialization.
    pub entries: Vec<TraceEntry>,
    /// `levels[i]` is `C_i` with its approximators.
    levels: Vec<Vec<CubeRecord>>,
    pub status: RunStatus,
}

impl RunTrace {
    pub fn completed_iterations(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    /// `C_i` with approximators, for `i ≤ completed_iterations()`.
    pub fn retained(&self, i: u32) -> &[CubeRecord] {
        &self.levels[i as usize]
    }

    pub fn retained_cubes(&self, i: u32) -> Vec<DyadicCube> {
        self.retained(i).iter().map(|r| r.cube.clone()).collect()
    }

    /// `S(i)` for `1 ≤ i ≤ completed_iterations() + 1`.
    pub fn output_set(&self, i: u32) -> Option<OutputSet> {
        if i == 0 || i > self.completed_iterations() + 1 {
            return None;
        }
        Some(OutputSet::new(
            self.dim,
            self.config.level,
            self.config.threshold(i - 1),
            self.config.mode,
            i,
            self.levels[(i - 1) as usize].clone(),
        ))
    }

    /// The last set the run actually output: `S(i)` for the final iteration,
    /// or `S(1) = [0,1]^d` if nothing ran.
    pub fn published_output_set(&self) -> OutputSet {
        self.output_set(self.completed_iterations().max(1)).unwrap()
    }

    /// Cumulative queries at the end of iteration `i`.
    pub fn queries_after(&self, i: u32) -> u64 {
        self.entries[i as usize].cumulative_queries
    }

    pub fn total_queries(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.cumulative_queries)
    }

    /// `iteration,i_cubes_bisected,cubes_retained,cumulative_queries`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("iteration,i_cubes_bisected,cubes_retained,cumulative_queries\n");
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{}",
                e.iteration, e.cubes_bisected, e.cubes_retained, e.cumulative_queries
            )
            .unwrap();
        }
        out
    }
}

/// Query points of one iteration, `k` consecutive points per cube.
#[derive(Clone, Debug)]
pub(crate) struct Batch {
    pub iteration: u32,
    pub cubes: Vec<DyadicCube>,
    pub points: Vec<Point>,
}

/// Cube-list state shared by the batch driver and the query-at-a-time
/// learner.
#[derive(Clone, Debug)]
pub(crate) struct Refinement {
    pub dim: usize,
    pub config: BaConfig,
    pub current: Vec<CubeRecord>,
    pub done: u32,
}

impl Refinement {
    pub fn new(dim: usize, config: BaConfig) -> Self {
        let root = CubeRecord {
            cube: DyadicCube::root(dim),
            approx: LocalApproximator::Constant(config.level),
        };
        Refinement {
            dim,
            config,
            current: vec![root],
            done: 0,
        }
    }

    /// `S(done + 1)`, the set published at the start of the next iteration.
    pub fn output_set(&self) -> OutputSet {
        OutputSet::new(
            self.dim,
            self.config.level,
            self.config.threshold(self.done),
            self.config.mode,
            self.done + 1,
            self.current.clone(),
        )
    }

    pub fn plan(&self, strategy: &dyn Strategy) -> Result<Batch, EngineError> {
        let iteration = self.done + 1;
        let requested = self.current.len() << self.dim;
        if requested > self.config.max_cubes {
            return Err(EngineError::CubeBudgetExceeded {
                iteration,
                requested,
                max_cubes: self.config.max_cubes,
            });
        }
        let mut cubes = Vec::with_capacity(requested);
        for r in &self.current {
            cubes.extend(r.cube.bisect()?);
        }
        cubes.sort_unstable();
        let k = self.config.queries_per_cube;
        let mut points = Vec::with_capacity(cubes.len() * k);
        for c in &cubes {
            let p = strategy.pick_points(c);
            if p.len() != k {
                return Err(EngineError::StrategyContract {
                    expected: k,
                    got: p.len(),
                });
            }
            points.extend(p);
        }
        Ok(Batch {
            iteration,
            cubes,
            points,
        })
    }

    pub fn complete(
        &mut self,
        strategy: &dyn Strategy,
        batch: Batch,
        values: &[f64],
    ) -> Result<(), EngineError> {
        debug_assert_eq!(values.len(), batch.points.len());
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(EngineError::OracleFailure {
                point: batch.points[j].clone(),
                value: values[j],
            });
        }
        let k = self.config.queries_per_cube;
        let rho = self.config.threshold(batch.iteration);
        let (level, mode) = (self.config.level, self.config.mode);
        self.current = batch
            .cubes
            .into_par_iter()
            .zip(values.par_chunks(k))
            .filter_map(|(cube, vals)| {
                let approx = strategy.build_approximator(&cube, vals);
                strategy
                    .near_level(&approx, level, rho, mode)
                    .then_some(CubeRecord { cube, approx })
            })
            .collect();
        self.done = batch.iteration;
        Ok(())
    }
}

/// Runs the engine until the stop criterion fires.
pub fn run_ba(
    config: &BaConfig,
    oracle: &Oracle,
    strategy: &dyn Strategy,
) -> Result<RunTrace, EngineError> {
    config.validate()?;
    let dim = oracle.dim();
    let k = strategy.queries_per_cube(dim);
    if k != config.queries_per_cube {
        return Err(EngineError::InvalidConfig(format!(
            "config asks for {} queries per cube but {} picks {k}",
            config.queries_per_cube,
            strategy.name()
        )));
    }
    let limit = config.iteration_limit();
    let mut state = Refinement::new(dim, config.clone());
    let mut entries = vec![TraceEntry {
        iteration: 0,
        cubes_bisected: 0,
        cubes_retained: 1,
        cumulative_queries: 0,
    }];
    let mut levels = vec![state.current.clone()];
    let mut cumulative = 0u64;
    let status = loop {
        if limit.is_some_and(|m| state.done >= m) {
            break RunStatus::Completed;
        }
        if state.current.is_empty() {
            break RunStatus::Exhausted;
        }
        let batch = state.plan(strategy)?;
        if let StopCriterion::MaxQueries(n_max) = config.stop {
            if cumulative + batch.points.len() as u64 > n_max {
                break RunStatus::QueryBudgetReached;
            }
        }
        let values: Vec<f64> = batch.points.par_iter().map(|p| oracle.eval(p)).collect();
        cumulative += values.len() as u64;
        let bisected = batch.cubes.len();
        state.complete(strategy, batch, &values)?;
        entries.push(TraceEntry {
            iteration: state.done,
            cubes_bisected: bisected,
            cubes_retained: state.current.len(),
            cumulative_queries: cumulative,
        });
        levels.push(state.current.clone());
    };
    Ok(RunTrace {
        dim,
        config: config.clone(),
        entries,
        levels,
        status,
    })
}

/// The engine as a query-at-a-time [`QueryAlgorithm`].
///
/// `S_n` switches to `S(i)` when the first query of iteration `i` is issued.
pub struct BaLearner {
    strategy: Arc<dyn Strategy>,
    state: Refinement,
    batch: Option<(Batch, Vec<f64>)>,
    published: Arc<OutputSet>,
    error: Option<EngineError>,
}

impl BaLearner {
    pub fn new(
        dim: usize,
        config: BaConfig,
        strategy: Arc<dyn Strategy>,
    ) -> Result<Self, EngineError> {
        config.validate()?;
        let state = Refinement::new(dim, config);
        let published = Arc::new(state.output_set());
        Ok(BaLearner {
            strategy,
            state,
            batch: None,
            published,
            error: None,
        })
    }

    /// Engine error that ended querying, if any.
    pub fn error(&self) -> Option<&EngineError> {
        self.error.as_ref()
    }

    pub fn current_output_set(&self) -> &OutputSet {
        &self.published
    }
}

impl QueryAlgorithm for BaLearner {
    fn dim(&self) -> usize {
        self.state.dim
    }

    fn next_query(&mut self) -> Option<Point> {
        if self.error.is_some() {
            return None;
        }
        if self.batch.is_none() {
            if self.state.current.is_empty() {
                return None;
            }
            match self.state.plan(&*self.strategy) {
                Ok(batch) => {
                    self.published = Arc::new(self.state.output_set());
                    self.batch = Some((batch, Vec::new()));
                }
                Err(e) => {
                    self.error = Some(e);
                    return None;
                }
            }
        }
        let (batch, values) = self.batch.as_ref().unwrap();
        Some(batch.points[values.len()].clone())
    }

    fn observe(&mut self, value: f64) {
        let Some((batch, values)) = self.batch.as_mut() else {
            return;
        };
        values.push(value);
        if values.len() == batch.points.len() {
            let (batch, values) = self.batch.take().unwrap();
            if let Err(e) = self.state.complete(&*self.strategy, batch, &values) {
                self.error = Some(e);
            }
        }
    }

    fn output(&self) -> Arc<dyn LevelSetEstimate> {
        self.published.clone()
    }
}
