//! The privacy planner: pick a bound from what is assumed about the data,
//! then add noise when the target ε is not met.

use crate::adversary::{bound_for_plan, delta_adversarial_plan, plan_for};
use crate::bound::{BoundConstants, BoundSource, Diagnostic, PrivacyBound};
use crate::error::{Error, Result};
use crate::model::{AdversaryModel, DataVectorSpec};
use crate::synergy::{laplace_baseline_variance, NoisePlan};
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlanPath {
    #[serde(rename = "standard-dp")]
    StandardDp,
    #[serde(rename = "noiseless-independent")]
    NoiselessIndependent,
    #[serde(rename = "noiseless-dependent")]
    NoiselessDependent,
    #[serde(rename = "noiseless+noise")]
    NoiselessPlusNoise,
}

impl fmt::Display for PlanPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanPath::StandardDp => "standard-dp",
            PlanPath::NoiselessIndependent => "noiseless-independent",
            PlanPath::NoiselessDependent => "noiseless-dependent",
            PlanPath::NoiselessPlusNoise => "noiseless+noise",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Target {
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

pub enum PlanInput<'a> {
    /// Nothing is assumed about the data; only its sensitivity is known.
    NoAssumptions { sensitivity: f64 },
    Data {
        spec: &'a DataVectorSpec,
        adversary: &'a AdversaryModel,
        /// Var of the uncompromised sum, needed when D > 1 and γ > 0.
        remaining_total_variance: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompromiseSummary {
    pub gamma: f64,
    pub selected: u64,
    pub taken_per_group: Vec<u64>,
    pub remaining_n: u64,
    pub remaining_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanReport {
    pub chosen_path: PlanPath,
    pub bounds: PrivacyBound,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_plan: Option<NoisePlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laplace_baseline_variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compromise: Option<CompromiseSummary>,
    /// Bound for the Γ that maximizes δ rather than ε. Supplementary only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_adversarial: Option<PrivacyBound>,
    pub diagnostics: Vec<Diagnostic>,
}

fn standard_dp(sensitivity: f64, target: Target, mut diagnostics: Vec<Diagnostic>, collapse: bool) -> Result<PlanReport> {
    let eps = target.epsilon.ok_or_else(|| {
        if collapse {
            Error::NoUncertainty
        } else {
            Error::invariant("target_epsilon", "standard-dp planning needs a target ε")
        }
    })?;
    let baseline = laplace_baseline_variance(sensitivity, eps)?;
    if collapse {
        diagnostics.push(Diagnostic::StandardDpCollapse);
    }
    Ok(PlanReport {
        chosen_path: PlanPath::StandardDp,
        bounds: PrivacyBound::new(eps, 0.0, BoundSource::Laplace),
        noise_plan: None,
        laplace_baseline_variance: Some(baseline),
        compromise: None,
        delta_adversarial: None,
        diagnostics,
    })
}

/// Walks the flowchart. Identical inputs give identical reports.
pub fn plan(input: PlanInput<'_>, target: Target, constants: BoundConstants) -> Result<PlanReport> {
    let (spec, adversary, rtv) = match input {
        PlanInput::NoAssumptions { sensitivity } => {
            if !(sensitivity.is_finite() && sensitivity > 0.0) {
                return Err(Error::invariant("sensitivity", "must be > 0"));
            }
            return standard_dp(sensitivity, target, Vec::new(), false);
        }
        PlanInput::Data {
            spec,
            adversary,
            remaining_total_variance,
        } => (spec, adversary, remaining_total_variance),
    };

    let mut diagnostics: Vec<Diagnostic> = spec
        .fitted_groups()
        .into_iter()
        .map(|group| Diagnostic::FittedDistribution { group })
        .collect();
    let compromise = plan_for(spec, adversary)?;
    let mut bounds = match bound_for_plan(spec, &compromise, constants, rtv) {
        Ok(b) => b,
        Err(Error::NoUncertainty) => {
            return standard_dp(spec.sensitivity(), target, diagnostics, true);
        }
        Err(e) => return Err(e),
    };
    if let Some(want) = target.delta {
        if bounds.delta > want {
            return Err(Error::DeltaNotImprovable {
                target: want,
                achieved: bounds.delta,
            });
        }
    }

    let independent = spec.dependency_bound() == 1;
    let mut chosen_path = if independent {
        PlanPath::NoiselessIndependent
    } else {
        PlanPath::NoiselessDependent
    };
    let mut noise_plan = None;
    if let Some(eps) = target.epsilon {
        if bounds.epsilon > eps {
            let variance = if independent {
                compromise.remaining_variance()
            } else {
                rtv.unwrap_or(spec.total_variance())
            };
            let np = NoisePlan::laplace(spec.sensitivity(), compromise.remaining_n(), variance, eps)?;
            bounds.epsilon = np.resulting_epsilon;
            bounds.push(Diagnostic::DeltaUnchangedByNoise);
            noise_plan = Some(np);
            chosen_path = PlanPath::NoiselessPlusNoise;
        }
    }

    let gamma = adversary.gamma();
    let delta_adversarial = if gamma > 0.0 {
        Some(delta_adversarial_plan(spec, gamma, constants, rtv)?.1)
    } else {
        None
    };
    diagnostics.extend(bounds.diagnostics.iter().cloned());
    let summary = (compromise.selected_count() > 0).then(|| CompromiseSummary {
        gamma,
        selected: compromise.selected_count(),
        taken_per_group: compromise.taken_per_group().to_vec(),
        remaining_n: compromise.remaining_n(),
        remaining_variance: compromise.remaining_variance(),
    });
    Ok(PlanReport {
        chosen_path,
        bounds,
        noise_plan,
        laplace_baseline_variance: None,
        compromise: summary,
        delta_adversarial,
        diagnostics,
    })
}
