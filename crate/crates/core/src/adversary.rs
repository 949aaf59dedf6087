//! Bounds against an adversary who knows the exact values of a γ-fraction of
//! the records, and selection of the compromised set Γ.
//!
//! Records within a group are interchangeable, so a plan is stored as the
//! number of records taken from each group. Derived plans take the lowest
//! indices of a group first.

use crate::bound::{BoundConstants, BoundSource, Diagnostic, PrivacyBound};
use crate::dependent::{stein_bound, DependentAggregate};
use crate::error::{Error, Result};
use crate::independent::{berry_esseen_bound, IndependentAggregate};
use crate::model::{compromised_count, AdversaryModel, DataVectorSpec};

const EXHAUSTIVE_MAX_N: u64 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CompromisePlan {
    gamma: f64,
    taken: Vec<u64>,
    explicit: Option<Vec<u64>>,
    n: u64,
    remaining_n: u64,
    remaining_variance: f64,
    remaining_sum_abs_third: f64,
    remaining_sum_fourth: Option<f64>,
}

impl CompromisePlan {
    fn from_taken(spec: &DataVectorSpec, gamma: f64, taken: Vec<u64>, explicit: Option<Vec<u64>>) -> Result<Self> {
        let selected: u64 = taken.iter().sum();
        let n = spec.n();
        if selected + 2 > n {
            return Err(Error::TooManyCompromised);
        }
        let (mut var, mut third, mut fourth) = (0.0, 0.0, Some(0.0));
        for (r, &t) in spec.records().iter().zip(&taken) {
            let left = (r.count() - t) as f64;
            let m = r.moments();
            var += left * m.variance;
            third += left * m.abs_third_central;
            fourth = match (fourth, m.fourth_central) {
                (Some(acc), Some(m4)) => Some(acc + left * m4),
                _ => None,
            };
        }
        Ok(CompromisePlan {
            gamma,
            taken,
            explicit,
            n,
            remaining_n: n - selected,
            remaining_variance: var,
            remaining_sum_abs_third: third,
            remaining_sum_fourth: fourth,
        })
    }

    /// Plan for an explicitly known compromised index set.
    pub fn explicit(spec: &DataVectorSpec, gamma: f64, indices: &[u64]) -> Result<Self> {
        AdversaryModel::new(spec.dependency_bound(), gamma, Some(indices.to_vec()))?
            .validate_for(spec.n())?;
        let mut taken = vec![0u64; spec.records().len()];
        for &i in indices {
            let g = spec.group_of(i).expect("validated index");
            taken[g] += 1;
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        Self::from_taken(spec, gamma, taken, Some(sorted))
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn selected_count(&self) -> u64 {
        self.taken.iter().sum()
    }

    /// Records taken from each group.
    pub fn taken_per_group(&self) -> &[u64] {
        &self.taken
    }

    /// Expanded indices of Γ, ascending.
    pub fn selected_indices(&self, spec: &DataVectorSpec) -> Vec<u64> {
        if let Some(ex) = &self.explicit {
            return ex.clone();
        }
        let mut out = Vec::with_capacity(self.selected_count() as usize);
        for (g, &t) in self.taken.iter().enumerate() {
            let start = spec.offset(g);
            out.extend(start..start + t);
        }
        out
    }

    pub fn remaining_n(&self) -> u64 {
        self.remaining_n
    }

    /// Σ Var Xᵢ over the uncompromised records.
    pub fn remaining_variance(&self) -> f64 {
        self.remaining_variance
    }

    pub fn remaining_sum_abs_third(&self) -> f64 {
        self.remaining_sum_abs_third
    }

    pub fn remaining_sum_fourth(&self) -> Result<f64> {
        self.remaining_sum_fourth
            .ok_or_else(|| Error::InsufficientMoments {
                what: "an uncompromised record group".into(),
                moment: "fourth central moment",
            })
    }
}

/// Γ = the ⌈γ·n⌉ records of largest variance (ties: larger E|X-μ|³, then input order).
pub fn worst_case_compromise(spec: &DataVectorSpec, gamma: f64) -> Result<CompromisePlan> {
    AdversaryModel::new(spec.dependency_bound(), gamma, None)?;
    let mut k = compromised_count(gamma, spec.n());
    if k + 2 > spec.n() {
        return Err(Error::TooManyCompromised);
    }
    let mut order: Vec<usize> = (0..spec.records().len()).collect();
    let moments: Vec<_> = spec.records().iter().map(|r| r.moments()).collect();
    order.sort_by(|&a, &b| {
        moments[b]
            .variance
            .total_cmp(&moments[a].variance)
            .then(moments[b].abs_third_central.total_cmp(&moments[a].abs_third_central))
            .then(a.cmp(&b))
    });
    let mut taken = vec![0u64; order.len()];
    for g in order {
        if k == 0 {
            break;
        }
        let t = k.min(spec.records()[g].count());
        taken[g] = t;
        k -= t;
    }
    CompromisePlan::from_taken(spec, gamma, taken, None)
}

/// Plan for the adversary model: its explicit Γ when given, the worst case otherwise.
pub fn plan_for(spec: &DataVectorSpec, adversary: &AdversaryModel) -> Result<CompromisePlan> {
    adversary.validate_for(spec.n())?;
    match adversary.compromised() {
        Some(set) => CompromisePlan::explicit(spec, adversary.gamma(), set),
        None => worst_case_compromise(spec, adversary.gamma()),
    }
}

pub fn independent_bound_compromised(
    spec: &DataVectorSpec,
    plan: &CompromisePlan,
    constants: BoundConstants,
) -> Result<PrivacyBound> {
    if spec.dependency_bound() != 1 {
        return Err(Error::Domain(format!(
            "the independent compromised bound needs dependency_bound = 1, got {}",
            spec.dependency_bound()
        )));
    }
    let m = plan.remaining_n;
    let agg = IndependentAggregate {
        n: m,
        mean_variance: plan.remaining_variance / m as f64,
        sum_abs_third: plan.remaining_sum_abs_third,
        sensitivity: spec.sensitivity(),
    };
    if plan.selected_count() == 0 {
        return berry_esseen_bound(&agg, spec.n(), constants.berry_esseen, BoundSource::BerryEsseen);
    }
    let mut bound = berry_esseen_bound(
        &agg,
        spec.n(),
        constants.berry_esseen,
        BoundSource::BerryEsseenCompromised,
    )?;
    bound.push(Diagnostic::TailUsesFullN {
        n: spec.n(),
        uncompromised: m,
    });
    Ok(bound)
}

/// `remaining_total_variance` is Var of the uncompromised sum, supplied by the
/// caller since covariances are not known to the tool.
pub fn dependent_bound_compromised(
    spec: &DataVectorSpec,
    plan: &CompromisePlan,
    remaining_total_variance: f64,
    constants: BoundConstants,
) -> Result<PrivacyBound> {
    let agg = DependentAggregate {
        n: plan.remaining_n,
        total_variance: remaining_total_variance,
        sum_abs_third: plan.remaining_sum_abs_third,
        sum_fourth: plan.remaining_sum_fourth()?,
        dependency_bound: spec.dependency_bound(),
        sensitivity: spec.sensitivity(),
    };
    let source = if plan.selected_count() == 0 {
        BoundSource::Stein
    } else {
        BoundSource::SteinCompromised
    };
    stein_bound(&agg, constants.stein, source)
}

/// Supplementary plan that searches for the Γ maximizing δ instead of ε.
/// Exhaustive over per-group take counts for n ≤ 20, greedy one record at a
/// time beyond that. `remaining_total_variance` is used for D > 1 and ignored
/// for independent data.
pub fn delta_adversarial_plan(
    spec: &DataVectorSpec,
    gamma: f64,
    constants: BoundConstants,
    remaining_total_variance: Option<f64>,
) -> Result<(CompromisePlan, PrivacyBound)> {
    AdversaryModel::new(spec.dependency_bound(), gamma, None)?;
    let k = compromised_count(gamma, spec.n());
    if k + 2 > spec.n() {
        return Err(Error::TooManyCompromised);
    }
    let caps: Vec<u64> = spec.records().iter().map(|r| r.count()).collect();
    let score = |taken: &[u64]| -> f64 {
        let plan = match CompromisePlan::from_taken(spec, gamma, taken.to_vec(), None) {
            Ok(p) => p,
            Err(_) => return f64::NEG_INFINITY,
        };
        match bound_for_plan(spec, &plan, constants, remaining_total_variance) {
            Ok(b) => b.delta,
            Err(Error::NoUncertainty) => f64::INFINITY,
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let best = if spec.n() <= EXHAUSTIVE_MAX_N {
        let mut best: Option<(f64, Vec<u64>)> = None;
        let mut current = vec![0u64; caps.len()];
        enumerate_takes(&caps, k, 0, &mut current, &mut |t| {
            let s = score(t);
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                best = Some((s, t.to_vec()));
            }
        });
        best.map(|(_, t)| t).unwrap_or_else(|| vec![0; caps.len()])
    } else {
        let mut taken = vec![0u64; caps.len()];
        for _ in 0..k {
            let mut pick: Option<(f64, usize)> = None;
            for g in 0..caps.len() {
                if taken[g] == caps[g] {
                    continue;
                }
                taken[g] += 1;
                let s = score(&taken);
                taken[g] -= 1;
                if pick.is_none_or(|(b, _)| s > b) {
                    pick = Some((s, g));
                }
            }
            match pick {
                Some((_, g)) => taken[g] += 1,
                None => break,
            }
        }
        taken
    };
    let plan = CompromisePlan::from_taken(spec, gamma, best, None)?;
    let bound = bound_for_plan(spec, &plan, constants, remaining_total_variance)?;
    Ok((plan, bound))
}

/// Bound matching the data's dependency structure for a given plan.
pub fn bound_for_plan(
    spec: &DataVectorSpec,
    plan: &CompromisePlan,
    constants: BoundConstants,
    remaining_total_variance: Option<f64>,
) -> Result<PrivacyBound> {
    if spec.dependency_bound() == 1 {
        independent_bound_compromised(spec, plan, constants)
    } else {
        let rtv = match (plan.selected_count(), remaining_total_variance) {
            (_, Some(v)) => v,
            (0, None) => spec.total_variance(),
            (_, None) => {
                return Err(Error::invariant(
                    "remaining_total_variance",
                    "required for dependent data with a compromised subset",
                ))
            }
        };
        dependent_bound_compromised(spec, plan, rtv, constants)
    }
}

fn enumerate_takes(
    caps: &[u64],
    left: u64,
    g: usize,
    current: &mut Vec<u64>,
    visit: &mut dyn FnMut(&[u64]),
) {
    if g == caps.len() {
        if left == 0 {
            visit(current);
        }
        return;
    }
    let rest: u64 = caps[g + 1..].iter().sum();
    let lo = left.saturating_sub(rest);
    for t in lo..=left.min(caps[g]) {
        current[g] = t;
        enumerate_takes(caps, left - t, g + 1, current, visit);
    }
    current[g] = 0;
}
