//! Stein-method route for locally dependent records.

use crate::bound::{
    gaussian_tail, normal_route_epsilon, BoundSource, Diagnostic, PrivacyBound, SteinConstant,
};
use crate::error::{Error, Result};
use crate::independent::{gaussian_diagnostic, gaussian_mechanism_check};
use crate::model::DataVectorSpec;
use std::f64::consts::PI;

/// Moment summary of a data vector with dependency neighbourhoods of size ≤ D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependentAggregate {
    pub n: u64,
    /// Var(Σ Xᵢ), or a lower bound for it.
    pub total_variance: f64,
    /// Σ E|Xᵢ − μᵢ|³ over the marginals.
    pub sum_abs_third: f64,
    /// Σ E(Xᵢ − μᵢ)⁴ over the marginals.
    pub sum_fourth: f64,
    pub dependency_bound: u64,
    pub sensitivity: f64,
}

impl DependentAggregate {
    pub fn from_spec(spec: &DataVectorSpec) -> Result<Self> {
        Ok(DependentAggregate {
            n: spec.n(),
            total_variance: spec.total_variance(),
            sum_abs_third: spec.sum_abs_third(),
            sum_fourth: spec.sum_fourth()?,
            dependency_bound: spec.dependency_bound(),
            sensitivity: spec.sensitivity(),
        })
    }

    fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invariant("n", format!("need n >= 2, got {}", self.n)));
        }
        if self.dependency_bound == 0 {
            return Err(Error::invariant("dependency_bound", "must be >= 1"));
        }
        if !(self.sensitivity.is_finite() && self.sensitivity > 0.0) {
            return Err(Error::invariant("sensitivity", "must be > 0"));
        }
        for (name, v) in [
            ("sum_abs_third", self.sum_abs_third),
            ("sum_fourth", self.sum_fourth),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invariant(name, "must be finite and >= 0"));
            }
        }
        if !self.total_variance.is_finite() || self.total_variance < 0.0 {
            return Err(Error::invariant("total_variance", "must be finite and >= 0"));
        }
        if self.total_variance == 0.0 {
            return Err(Error::NoUncertainty);
        }
        Ok(())
    }
}

/// c(ε) = 2(1 + e^ε)(2/π)^{1/4}
pub fn stein_prefactor(epsilon: f64) -> f64 {
    2.0 * (1.0 + epsilon.exp()) * kolmogorov_from_wasserstein(1.0)
}

pub fn dependent_bound(agg: &DependentAggregate, k: SteinConstant) -> Result<PrivacyBound> {
    stein_bound(agg, k, BoundSource::Stein)
}

pub(crate) fn stein_bound(
    agg: &DependentAggregate,
    k: SteinConstant,
    source: BoundSource,
) -> Result<PrivacyBound> {
    agg.check()?;
    let epsilon = normal_route_epsilon(agg.sensitivity, agg.n, agg.total_variance);
    let dw = stein_wasserstein_bound(agg, k);
    let tail = gaussian_tail(agg.n);
    let delta = stein_prefactor(epsilon) * dw.sqrt() + tail;
    let mut bound = PrivacyBound::new(epsilon, delta, source);
    bound.push(Diagnostic::SteinConstant {
        k: k.k(),
        alternative: k.alternative(),
    });
    let sigma = agg.total_variance.sqrt();
    if !gaussian_mechanism_check(sigma, tail, agg.sensitivity, epsilon) {
        bound.push(gaussian_diagnostic(sigma, tail, agg.sensitivity, epsilon));
    }
    Ok(bound)
}

/// Wasserstein distance bound between the standardized sum and N(0, 1):
/// D²/σ³·Σ E|X*|³ + D^{3/2}·√K/(σ²√π)·sqrt(Σ E X*⁴).
pub fn stein_wasserstein_bound(agg: &DependentAggregate, k: SteinConstant) -> f64 {
    let d = agg.dependency_bound as f64;
    let var = agg.total_variance;
    let sigma3 = var * var.sqrt();
    let third = d * d / sigma3 * agg.sum_abs_third;
    let fourth = d.powf(1.5) * f64::from(k.k()).sqrt() / (var * PI.sqrt()) * agg.sum_fourth.sqrt();
    third + fourth
}

/// d_K ≤ (2/π)^{1/4}·sqrt(d_W) against a standard normal.
pub fn kolmogorov_from_wasserstein(dw: f64) -> f64 {
    (2.0 / PI).powf(0.25) * dw.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern_half(n: u64) -> DependentAggregate {
        let nf = n as f64;
        DependentAggregate {
            n,
            total_variance: nf / 4.0,
            sum_abs_third: nf / 8.0,
            sum_fourth: nf / 16.0,
            dependency_bound: 1,
            sensitivity: 1.0,
        }
    }

    #[test]
    fn golden_four_hundred_bernoulli() {
        let b = dependent_bound(&bern_half(400), SteinConstant::K28).unwrap();
        assert!((b.epsilon - 0.244_774_683_068_081_65).abs() < 1e-14);
        assert!((b.delta - 1.856_135_291_570_826_5).abs() < 1e-12);
        assert!(b.is_vacuous());
        let b26 = dependent_bound(&bern_half(400), SteinConstant::K26).unwrap();
        assert!((b26.delta - 1.831_220_802_245_867_3).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_decays_like_inverse_root_n() {
        let a = stein_wasserstein_bound(&bern_half(100), SteinConstant::K28);
        let b = stein_wasserstein_bound(&bern_half(400), SteinConstant::K28);
        assert!((a / b - 2.0).abs() < 0.1);
    }

    #[test]
    fn wasserstein_zero_moments_and_monotone_in_d() {
        let mut agg = bern_half(100);
        agg.sum_abs_third = 0.0;
        agg.sum_fourth = 0.0;
        assert_eq!(stein_wasserstein_bound(&agg, SteinConstant::K28), 0.0);
        let mut prev = 0.0;
        for d in 1..6 {
            let mut a = bern_half(100);
            a.dependency_bound = d;
            let w = stein_wasserstein_bound(&a, SteinConstant::K28);
            assert!(w > prev);
            prev = w;
        }
    }

    #[test]
    fn kolmogorov_constant() {
        assert_eq!(kolmogorov_from_wasserstein(0.0), 0.0);
        assert!((kolmogorov_from_wasserstein(1.0) - 0.893_243_841_738_002_3).abs() < 1e-15);
        let (a, b, c) = (
            kolmogorov_from_wasserstein(0.1),
            kolmogorov_from_wasserstein(0.2),
            kolmogorov_from_wasserstein(0.3),
        );
        assert!(a < b && b < c);
        assert!(b - a > c - b);
    }

    #[test]
    fn prefactor_lower_bound_and_growth() {
        let floor = 2.0 * kolmogorov_from_wasserstein(1.0);
        let mut prev = floor * 2.0;
        for i in 1..50 {
            let c = stein_prefactor(i as f64 * 0.1);
            assert!(c > 2.0 * floor);
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn zero_variance_errors() {
        let mut agg = bern_half(10);
        agg.total_variance = 0.0;
        assert_eq!(dependent_bound(&agg, SteinConstant::K28), Err(Error::NoUncertainty));
    }

    #[test]
    fn always_reports_stein_constant() {
        let b = dependent_bound(&bern_half(1000), SteinConstant::K26).unwrap();
        assert!(b
            .diagnostics
            .contains(&Diagnostic::SteinConstant { k: 26, alternative: 28 }));
    }
}
