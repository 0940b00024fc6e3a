//! Sequential approximation of level sets of black-box functions by
//! hierarchical bisection.
//!
//! The engine ([`engine::run_ba`]) refines a list of dyadic cubes of
//! `[0,1]^d`. Each new cube is queried through a pluggable
//! [`approximators::Strategy`], and cubes whose local approximator stays far
//! from the target level are discarded. Two strategies ship:
//! [`approximators::Bah`] for Hölder functions and [`approximators::Bag`]
//! for functions with Hölder gradients.
//!
//! [`verification`] checks outputs against the ε-approximation definition
//! and measures sample complexity. [`adversary`] runs the bump-function
//! lower-bound argument against any query algorithm.
//!
//! ```
//! use levelset::approximators::bag_strategy;
//! use levelset::blackbox::make_quadratic_f0;
//! use levelset::engine::{run_ba, BaConfig, StopCriterion};
//!
//! let oracle = make_quadratic_f0(0.0, 2);
//! let strategy = bag_strategy(2.0, 1.0, 2);
//! let config = BaConfig::for_strategy(&strategy, 2, 0.0, StopCriterion::TargetAccuracy(0.05)).unwrap();
//! let trace = run_ba(&config, &oracle, &strategy).unwrap();
//! let set = trace.published_output_set();
//! assert!(set.contains_point(&[1.0, 0.5]));
//! assert!(!set.contains_point(&[0.5, 0.5]));
//! ```

pub mod adversary;
pub mod approximators;
pub mod blackbox;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod protocol;
pub mod verification;

pub use approximators::{bag_strategy, bah_strategy, LocalApproximator, Mode, Strategy};
pub use blackbox::{Oracle, SmoothnessTag, TestFunction};
pub use engine::{iterations_needed, run_ba, BaConfig, OutputSet, RunTrace, StopCriterion};
pub use geometry::{DyadicCube, PackingResult, Point};

// The guide under book/ is compiled as doc tests so its snippets stay in
// sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/approximators.md")]
    mod approximators {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/adversary.md")]
    mod adversary {}
}
