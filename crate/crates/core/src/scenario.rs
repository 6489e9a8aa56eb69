//! Named bundles of model, weight, kernel and bandwidth rule.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{builtin_function, MonotoneFunction, WeightMeasure};
use crate::kernel::KernelSpec;
use crate::mc::BandwidthRule;
use crate::model::{ModelKind, ModelSpec};

pub const SCENARIO_NAMES: &[&str] = &[
    "linear-regression",
    "lambda-a-regression",
    "quadratic-regression",
    "expdec-regression",
    "boundary-weighted",
    "linear-density",
];

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub model: ModelSpec,
    pub weight: WeightMeasure,
    pub kernel: KernelSpec,
    pub rule: BandwidthRule,
}

/// Printable summary of a [`Scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub function: String,
    pub kind: ModelKind,
    pub sigma: f64,
    pub weight: String,
    pub kernel: String,
    pub rule: BandwidthRule,
}

const DEFAULT_RULE: BandwidthRule = BandwidthRule::Power { c: 1.0, exponent: 0.2 };

/// Look up a scenario. `params` may override `sigma` (regression noise) and
/// the shape parameter `a` of the target where it has one.
pub fn scenario(name: &str, params: &HashMap<String, f64>) -> Result<Scenario> {
    let sigma = params.get("sigma").copied().unwrap_or(0.1);
    let a = params.get("a").copied();
    let with = |key: &str, v: Option<f64>| {
        let mut p = HashMap::new();
        if let Some(v) = v {
            p.insert(key.to_string(), v);
        }
        p
    };
    let regression = |lambda: MonotoneFunction| ModelSpec::regression(lambda, sigma);
    let (model, weight) = match name {
        "linear-regression" => (
            regression(MonotoneFunction::polynomial(vec![1.0, -a.unwrap_or(1.0)]))?,
            WeightMeasure::uniform(),
        ),
        "lambda-a-regression" => (
            regression(builtin_function("lambda_a", &with("a", Some(a.unwrap_or(0.0))))?)?,
            WeightMeasure::uniform(),
        ),
        "quadratic-regression" => (
            regression(builtin_function("quadratic", &with("a", a))?)?,
            WeightMeasure::uniform(),
        ),
        "expdec-regression" => (
            regression(builtin_function("expdec", &with("a", a))?)?,
            WeightMeasure::uniform(),
        ),
        "boundary-weighted" => (
            regression(MonotoneFunction::polynomial(vec![1.0, -a.unwrap_or(1.0)]))?,
            WeightMeasure::boundary(1.0),
        ),
        "linear-density" => {
            // 1 + s/2 - s x integrates to one for any slope s in [0, 2]
            let s = a.unwrap_or(1.0);
            (
                ModelSpec::density(MonotoneFunction::polynomial(vec![1.0 + 0.5 * s, -s]))?,
                WeightMeasure::uniform(),
            )
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(Scenario {
        name: name.to_string(),
        model,
        weight,
        kernel: KernelSpec::triweight(),
        rule: DEFAULT_RULE,
    })
}

impl Scenario {
    pub fn with_rule(mut self, rule: BandwidthRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_kernel(mut self, kernel: KernelSpec) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn info(&self) -> ScenarioInfo {
        ScenarioInfo {
            name: self.name.clone(),
            function: self.model.lambda.id().to_string(),
            kind: self.model.kind,
            sigma: self.model.sigma,
            weight: self.weight.name().to_string(),
            kernel: self.kernel.name().to_string(),
            rule: self.rule,
        }
    }
}
