//! Berry–Esseen route for independent records.

use crate::bound::{
    gaussian_tail, normal_route_epsilon, BerryEsseenConstant, BoundSource, Diagnostic,
    PrivacyBound,
};
use crate::error::{Error, Result};
use crate::model::DataVectorSpec;

/// Moment summary of an independent data vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependentAggregate {
    pub n: u64,
    /// σ² = (Σ Var Xᵢ)/n
    pub mean_variance: f64,
    /// Σ E|Xᵢ − μᵢ|³
    pub sum_abs_third: f64,
    pub sensitivity: f64,
}

impl IndependentAggregate {
    pub fn from_spec(spec: &DataVectorSpec) -> Self {
        IndependentAggregate {
            n: spec.n(),
            mean_variance: spec.sum_variance() / spec.n() as f64,
            sum_abs_third: spec.sum_abs_third(),
            sensitivity: spec.sensitivity(),
        }
    }

    pub fn sum_variance(&self) -> f64 {
        self.n as f64 * self.mean_variance
    }

    fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invariant("n", format!("need n >= 2, got {}", self.n)));
        }
        if !(self.sensitivity.is_finite() && self.sensitivity > 0.0) {
            return Err(Error::invariant("sensitivity", "must be > 0"));
        }
        if !(self.sum_abs_third.is_finite() && self.sum_abs_third >= 0.0) {
            return Err(Error::invariant("sum_abs_third", "must be finite and >= 0"));
        }
        if !self.mean_variance.is_finite() || self.mean_variance < 0.0 {
            return Err(Error::invariant("mean_variance", "must be finite and >= 0"));
        }
        if self.mean_variance == 0.0 {
            return Err(Error::NoUncertainty);
        }
        Ok(())
    }
}

pub fn independent_bound(
    agg: &IndependentAggregate,
    constant: BerryEsseenConstant,
) -> Result<PrivacyBound> {
    berry_esseen_bound(agg, agg.n, constant, BoundSource::BerryEsseen)
}

/// Shared evaluation; `tail_n` is the n inside the 4/(5√n) term.
pub(crate) fn berry_esseen_bound(
    agg: &IndependentAggregate,
    tail_n: u64,
    constant: BerryEsseenConstant,
    source: BoundSource,
) -> Result<PrivacyBound> {
    agg.check()?;
    let sum_var = agg.sum_variance();
    let epsilon = normal_route_epsilon(agg.sensitivity, agg.n, sum_var);
    let tail = gaussian_tail(tail_n);
    let delta =
        constant.doubled() * agg.sum_abs_third / sum_var.powf(1.5) * (1.0 + epsilon.exp()) + tail;
    let mut bound = PrivacyBound::new(epsilon, delta, source);
    let sigma = sum_var.sqrt();
    if !gaussian_mechanism_check(sigma, tail, agg.sensitivity, epsilon) {
        bound.push(gaussian_diagnostic(sigma, tail, agg.sensitivity, epsilon));
    }
    Ok(bound)
}

/// True iff σ·ε/Δ > sqrt(2 ln(1.25/δ)), i.e. some c with c² > 2 ln(1.25/δ)
/// has σ >= cΔ/ε.
pub fn gaussian_mechanism_check(sigma: f64, delta: f64, sensitivity: f64, epsilon: f64) -> bool {
    sigma * epsilon / sensitivity > gaussian_requirement(delta)
}

fn gaussian_requirement(delta: f64) -> f64 {
    (2.0 * (1.25 / delta).ln()).max(0.0).sqrt()
}

pub(crate) fn gaussian_diagnostic(
    sigma: f64,
    delta: f64,
    sensitivity: f64,
    epsilon: f64,
) -> Diagnostic {
    Diagnostic::GaussianHypothesisUnmet {
        ratio: sigma * epsilon / sensitivity,
        required: gaussian_requirement(delta),
    }
}

/// Uniform CDF distance bound C·Σρ/(Σσ²)^{3/2} to the normal.
pub fn berry_esseen_distance(
    sum_abs_third: f64,
    sum_variance: f64,
    constant: BerryEsseenConstant,
) -> f64 {
    constant.single() * sum_abs_third / sum_variance.powf(1.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_one(n: u64) -> IndependentAggregate {
        IndependentAggregate {
            n,
            mean_variance: 4.0,
            sum_abs_third: 3.0 * n as f64,
            sensitivity: 30.0,
        }
    }

    #[test]
    fn example_one_at_ten_thousand() {
        let b = independent_bound(&example_one(10_000), BerryEsseenConstant::Rounded).unwrap();
        assert!(b.epsilon < 0.5 && b.delta < 0.05);
        assert!((b.epsilon - 0.455_228_138_815_543_9).abs() < 1e-13);
        assert!((b.delta - 0.018_821_438_643_611_15).abs() < 1e-13);
        assert!(!b.preconditions_ok, "gaussian step diagnostic should fire");
    }

    #[test]
    fn iid_half_bernoulli_eps() {
        let agg = IndependentAggregate {
            n: 10_000,
            mean_variance: 0.25,
            sum_abs_third: 10_000.0 * 0.125,
            sensitivity: 1.0,
        };
        let b = independent_bound(&agg, BerryEsseenConstant::Rounded).unwrap();
        assert!((b.epsilon - 0.060_697_085_175_405_85).abs() < 1e-14);
    }

    #[test]
    fn zero_variance_routes_to_standard_dp() {
        let mut agg = example_one(100);
        agg.mean_variance = 0.0;
        assert_eq!(
            independent_bound(&agg, BerryEsseenConstant::Rounded),
            Err(Error::NoUncertainty)
        );
    }

    #[test]
    fn tight_constant_is_smaller() {
        let a = independent_bound(&example_one(5000), BerryEsseenConstant::Rounded).unwrap();
        let b = independent_bound(&example_one(5000), BerryEsseenConstant::Tight).unwrap();
        assert_eq!(a.epsilon, b.epsilon);
        assert!(b.delta < a.delta);
    }

    #[test]
    fn gaussian_check_cases() {
        // 200·0.455/30 = 3.033 against sqrt(2 ln 156.25) = 3.178
        assert!(!gaussian_mechanism_check(200.0, 0.008, 30.0, 0.455));
        assert!(gaussian_mechanism_check(1e-6, 1.25, 1.0, 1.0));
        let a = gaussian_mechanism_check(3.0, 0.01, 1.0, 2.0);
        let b = gaussian_mechanism_check(300.0, 0.01, 100.0, 2.0);
        assert_eq!(a, b);
    }

    #[test]
    fn berry_esseen_distance_values() {
        let n = 100.0;
        let d = berry_esseen_distance(n / 8.0, n / 4.0, BerryEsseenConstant::Rounded);
        assert!((d - 0.056).abs() < 1e-15);
        assert_eq!(berry_esseen_distance(0.0, 3.0, BerryEsseenConstant::Rounded), 0.0);
        let d4 = berry_esseen_distance(400.0 / 8.0, 100.0, BerryEsseenConstant::Rounded);
        assert!((d / d4 - 2.0).abs() < 1e-12);
    }
}
