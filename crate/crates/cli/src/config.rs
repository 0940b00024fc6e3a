//! Experiment configuration files.
//!
//! A config is a TOML document with scalar settings at the top level and one
//! table per concern. Every table except `[function]` is optional.
//!
//! ```toml
//! level = 0.3
//! mode = "level-set"          # level-set | sublevel | superlevel
//! max_cubes = 4194304
//! grid_n = 256                # verification grid points per axis
//! seed = 0                    # verification sampling only
//!
//! [function]
//! name = "quadratic"          # quadratic | affine | constant | bump | spike
//! dim = 2
//!
//! [algorithm]
//! name = "bag"                # bah (c, gamma) | bag (c1, gamma1)
//! c1 = 2.0
//! gamma1 = 1.0
//!
//! [stop]
//! target_accuracy = 0.05      # or max_depth = N, or max_queries = N
//! ```

use std::path::PathBuf;

use levelset::approximators::{bag_strategy, bah_strategy, Mode, Strategy};
use levelset::blackbox::{
    make_affine, make_bump_function, make_constant, make_quadratic_f0, make_spike, Oracle,
    SmoothnessTag,
};
use levelset::engine::{BaConfig, StopCriterion, DEFAULT_MAX_CUBES};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub level: f64,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_max_cubes")]
    pub max_cubes: usize,
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default)]
    pub seed: u64,
    pub function: FunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<AlgorithmSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nls: Option<NlsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pack: Option<PackSpec>,
}

fn default_mode() -> String {
    Mode::LevelSet.as_str().to_string()
}

fn default_max_cubes() -> usize {
    DEFAULT_MAX_CUBES
}

fn default_grid() -> usize {
    256
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    /// Overrides the strategy's tolerance scale `b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Overrides the strategy's tolerance rate `β`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_queries: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub start: f64,
    pub factor: f64,
    pub count: usize,
    /// Iterations run beyond `iterations_needed(ε) + 1` at each accuracy.
    #[serde(default)]
    pub extra_depth: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub output_set: PathBuf,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    pub epsilon: f64,
    /// `holder` (c, gamma) or `grad-holder` (c1, gamma1).
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// `bah`, `bag`, `always-full`, `always-empty` or `all`.
    #[serde(default = "default_algorithms")]
    pub algorithm: String,
}

fn default_algorithms() -> String {
    "all".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlsSpec {
    pub start: f64,
    pub factor: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackSpec {
    /// One point per line, coordinates separated by commas or whitespace.
    pub points: PathBuf,
    pub r: f64,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn need<T: Copy>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| config_err(format!("missing {what}")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks everything that can be checked without running anything.
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.level.is_finite() {
            return Err(config_err("level must be finite"));
        }
        self.mode()?;
        if self.grid_n < 2 {
            return Err(config_err("grid_n must be at least 2"));
        }
        let oracle = self.oracle()?;
        if self.algorithm.is_some() {
            let strategy = self.strategy(oracle.dim())?;
            self.ba_config(&*strategy, oracle.dim())?;
        }
        if let Some(s) = &self.sweep {
            if s.count < 3 {
                return Err(config_err("a sweep needs at least 3 accuracies"));
            }
            if !(s.start > 0.0 && s.factor > 0.0 && s.factor < 1.0) {
                return Err(config_err("sweep needs start > 0 and factor in (0, 1)"));
            }
        }
        if let Some(v) = &self.verify {
            if !(v.epsilon > 0.0) {
                return Err(config_err("verify.epsilon must be positive"));
            }
        }
        if let Some(a) = &self.adversary {
            self.adversary_class(a)?;
            if !(a.epsilon > 0.0) {
                return Err(config_err("adversary.epsilon must be positive"));
            }
        }
        if let Some(n) = &self.nls {
            if n.count < 4 || !(n.start > 0.0 && n.start < 1.0 && n.factor > 0.0 && n.factor < 1.0)
            {
                return Err(config_err(
                    "nls needs at least 4 scales, start in (0, 1) and factor in (0, 1)",
                ));
            }
        }
        if let Some(p) = &self.pack {
            if !(p.r > 0.0) {
                return Err(config_err("pack.r must be positive"));
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        self.mode.parse().map_err(config_err)
    }

    pub fn oracle(&self) -> Result<Oracle, CliError> {
        let f = &self.function;
        let bad = |e: levelset::error::OracleError| config_err(format!("function: {e}"));
        let dim = || -> Result<usize, CliError> {
            match f.dim {
                Some(d) if d >= 1 => Ok(d),
                Some(_) => Err(config_err("function.dim must be at least 1")),
                None => Err(config_err("missing function.dim")),
            }
        };
        let center = || -> Result<Vec<f64>, CliError> {
            f.center
                .clone()
                .ok_or_else(|| config_err("missing function.center"))
        };
        match f.name.as_str() {
            "quadratic" => Ok(make_quadratic_f0(self.level, dim()?)),
            "affine" => {
                let coeffs = f
                    .coeffs
                    .clone()
                    .ok_or_else(|| config_err("missing function.coeffs"))?;
                make_affine(coeffs, f.offset.unwrap_or(0.0)).map_err(bad)
            }
            "constant" => Ok(make_constant(dim()?, f.value.unwrap_or(self.level))),
            "bump" => make_bump_function(
                need(f.alpha, "function.alpha")?,
                need(f.eta, "function.eta")?,
                center()?,
            )
            .map_err(bad),
            "spike" => make_spike(
                need(f.epsilon, "function.epsilon")?,
                need(f.c, "function.c")?,
                need(f.gamma, "function.gamma")?,
                center()?,
            )
            .map_err(bad),
            other => Err(config_err(format!("unknown function {other:?}"))),
        }
    }

    pub fn strategy(&self, dim: usize) -> Result<Box<dyn Strategy>, CliError> {
        let a = self
            .algorithm
            .as_ref()
            .ok_or_else(|| config_err("missing [algorithm] table"))?;
        let check = |constant: f64, exponent: f64| -> Result<(), CliError> {
            SmoothnessTag::holder(constant, exponent)
                .map(|_| ())
                .map_err(|e| config_err(format!("algorithm: {e}")))
        };
        match a.name.as_str() {
            "bah" => {
                let (c, g) = (need(a.c, "algorithm.c")?, need(a.gamma, "algorithm.gamma")?);
                check(c, g)?;
                Ok(Box::new(bah_strategy(c, g)))
            }
            "bag" => {
                let (c, g) = (
                    need(a.c1, "algorithm.c1")?,
                    need(a.gamma1, "algorithm.gamma1")?,
                );
                check(c, g)?;
                Ok(Box::new(bag_strategy(c, g, dim)))
            }
            other => Err(config_err(format!("unknown algorithm {other:?}"))),
        }
    }

    pub fn stop(&self) -> Result<StopCriterion, CliError> {
        let Some(s) = &self.stop else {
            return Err(config_err("missing [stop] table"));
        };
        match (s.target_accuracy, s.max_depth, s.max_queries) {
            (Some(eps), None, None) => Ok(StopCriterion::TargetAccuracy(eps)),
            (None, Some(m), None) => Ok(StopCriterion::MaxDepth(m)),
            (None, None, Some(n)) => Ok(StopCriterion::MaxQueries(n)),
            _ => Err(config_err(
                "[stop] needs exactly one of target_accuracy, max_depth, max_queries",
            )),
        }
    }

    /// Engine configuration with the optional `b`/`β` overrides applied.
    pub fn ba_config(&self, strategy: &dyn Strategy, dim: usize) -> Result<BaConfig, CliError> {
        let a = self.algorithm.as_ref().expect("strategy built first");
        let stop = if self.stop.is_some() {
            self.stop()?
        } else {
            StopCriterion::MaxDepth(1)
        };
        let (b, beta) = strategy
            .tolerances(dim)
            .ok_or_else(|| config_err("strategy declares no tolerances"))?;
        let config = BaConfig::new(
            self.level,
            a.b.unwrap_or(b),
            a.beta.unwrap_or(beta),
            strategy.queries_per_cube(dim),
            stop,
        )
        .with_mode(self.mode()?)
        .with_max_cubes(self.max_cubes);
        config.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(config)
    }

    pub fn adversary_class(&self, a: &AdversarySpec) -> Result<SmoothnessTag, CliError> {
        let tag = match a.class.as_str() {
            "holder" => {
                SmoothnessTag::holder(need(a.c, "adversary.c")?, need(a.gamma, "adversary.gamma")?)
            }
            "grad-holder" => SmoothnessTag::grad_holder(
                need(a.c1, "adversary.c1")?,
                need(a.gamma1, "adversary.gamma1")?,
            ),
            other => return Err(config_err(format!("unknown smoothness class {other:?}"))),
        };
        tag.map_err(|e| config_err(format!("adversary: {e}")))
    }
}
