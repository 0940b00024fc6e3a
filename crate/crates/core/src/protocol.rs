//! The sequential query protocol: pick a point, observe its value, output a
//! set. Anything implementing [`QueryAlgorithm`] can be driven by the
//! lower-bound harness.

use std::sync::Arc;

use crate::blackbox::Oracle;
use crate::geometry::{DyadicCube, Point};

/// A subset of `[0,1]^d` given by a membership test.
pub trait LevelSetEstimate: Send + Sync {
    fn dim(&self) -> usize;

    fn contains(&self, x: &[f64]) -> bool;

    /// Cubes covering the set, when the set is a union of cube pieces.
    fn cells(&self) -> Option<Vec<DyadicCube>> {
        None
    }
}

/// The whole unit cube.
#[derive(Clone, Copy, Debug)]
pub struct FullCube {
    pub dim: usize,
}

impl LevelSetEstimate for FullCube {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EmptySet {
    pub dim: usize,
}

impl LevelSetEstimate for EmptySet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, _x: &[f64]) -> bool {
        false
    }
}

/// A deterministic sequential learner.
///
/// The caller alternates `next_query` and `observe`; `output` may be called
/// at any time and returns the current `S_n`.
pub trait QueryAlgorithm {
    fn dim(&self) -> usize;

    /// The next point to query, or `None` if the algorithm stops querying.
    fn next_query(&mut self) -> Option<Point>;

    fn observe(&mut self, value: f64);

    fn output(&self) -> Arc<dyn LevelSetEstimate>;
}

/// Query/answer record of one protocol run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    pub queries: Vec<Point>,
    pub values: Vec<f64>,
}

/// Runs `algorithm` against `oracle` for at most `budget` rounds.
pub fn run_protocol(
    algorithm: &mut dyn QueryAlgorithm,
    oracle: &Oracle,
    budget: usize,
) -> Transcript {
    let mut transcript = Transcript::default();
    for _ in 0..budget {
        let Some(x) = algorithm.next_query() else {
            break;
        };
        let v = oracle.eval(&x);
        algorithm.observe(v);
        transcript.queries.push(x);
        transcript.values.push(v);
    }
    transcript
}

/// Guesses `[0,1]^d` without querying.
#[derive(Clone, Copy, Debug)]
pub struct AlwaysFull {
    pub dim: usize,
}

impl QueryAlgorithm for AlwaysFull {
    fn dim(&self) -> usize {
        self.dim
    }

    fn next_query(&mut self) -> Option<Point> {
        None
    }

    fn observe(&mut self, _value: f64) {}

    fn output(&self) -> Arc<dyn LevelSetEstimate> {
        Arc::new(FullCube { dim: self.dim })
    }
}

/// Guesses the empty set without querying.
#[derive(Clone, Copy, Debug)]
pub struct AlwaysEmpty {
    pub dim: usize,
}

impl QueryAlgorithm for AlwaysEmpty {
    fn dim(&self) -> usize {
        self.dim
    }

    fn next_query(&mut self) -> Option<Point> {
        None
    }

    fn observe(&mut self, _value: f64) {}

    fn output(&self) -> Arc<dyn LevelSetEstimate> {
        Arc::new(EmptySet { dim: self.dim })
    }
}
