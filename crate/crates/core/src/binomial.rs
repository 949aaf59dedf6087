//! Bounds for the sum of i.i.d. Bernoulli records.
//!
//! Both directions reduce to the `p <= 1/2` case: for `p > 1/2` the roles of
//! `p` and `1 - p` swap, so every formula below runs on `q = min(p, 1 - p)`.

use crate::bound::{BoundSource, PrivacyBound};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialCase {
    n: u64,
    p: f64,
}

impl BinomialCase {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invariant("n", format!("need n >= 2, got {n}")));
        }
        if !(p.is_finite() && p > 0.0 && p < 1.0) {
            return Err(Error::invariant("p", format!("p must lie in (0, 1), got {p}")));
        }
        Ok(BinomialCase { n, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn minor(&self) -> f64 {
        self.p.min(1.0 - self.p)
    }

    /// P(sum = 0) + P(sum = n).
    pub fn extreme_mass(&self) -> f64 {
        let n = self.n as f64;
        (1.0 - self.p).powf(n) + self.p.powf(n)
    }

    /// Smallest δ the ε-given-δ direction accepts: the point where λ/n reaches min(p, 1-p).
    pub fn minimal_delta(&self) -> f64 {
        let q = self.minor();
        let chernoff = 2.0 * (-2.0 * self.n as f64 * q * q).exp();
        self.extreme_mass().max(chernoff)
    }
}

/// ε for a fixed δ, from λ/n = sqrt(ln(2/δ)/(2n)).
pub fn binomial_eps_given_delta(case: BinomialCase, delta: f64) -> Result<PrivacyBound> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("δ must be positive, got {delta}")));
    }
    let n = case.n as f64;
    let t = ((2.0 / delta).ln() / (2.0 * n)).sqrt();
    if delta < case.extreme_mass() || t >= case.minor() {
        return Err(Error::TailDominates {
            min_delta: case.minimal_delta(),
        });
    }
    let epsilon = ratio_eps(t, case.p);
    Ok(PrivacyBound::new(epsilon, delta, BoundSource::BinomialChernoff))
}

/// δ for a fixed ε: the Chernoff mass of the region where the consecutive
/// pmf ratio exceeds e^ε.
pub fn binomial_delta_given_eps(case: BinomialCase, epsilon: f64) -> Result<PrivacyBound> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Domain(format!("ε must be positive, got {epsilon}")));
    }
    let q = case.minor();
    let w = q / (1.0 - q);
    let a = epsilon.exp();
    let shrink = (a - 1.0) / (a + w);
    let delta = 2.0 * (-2.0 * case.n as f64 * q * q * shrink * shrink).exp();
    Ok(PrivacyBound::new(epsilon, delta, BoundSource::BinomialChernoff))
}

/// Upper bound on |ln P(X=u)/P(X=u±1)| for X ~ Bin(n, p) and u within λ of np.
pub fn pmf_ratio_eps(n: u64, p: f64, lambda: f64) -> Result<f64> {
    let nf = n as f64;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p must lie in (0, 1), got {p}")));
    }
    if nf * p - lambda <= 0.0 || nf * p + lambda >= nf {
        return Err(Error::Domain(format!(
            "need np - λ > 0 and np + λ < n (n = {n}, p = {p}, λ = {lambda})"
        )));
    }
    Ok(ratio_eps(lambda / nf, p))
}

/// t·(1/(1-p) + 1/(p - t)) for p <= 1/2, mirrored for p > 1/2, with t = λ/n.
fn ratio_eps(t: f64, p: f64) -> f64 {
    if p <= 0.5 {
        t * (1.0 / (1.0 - p) + 1.0 / (p - t))
    } else {
        t * (1.0 / p + 1.0 / ((1.0 - p) - t))
    }
}

/// Two-sided Chernoff–Hoeffding bound 2·exp(-2λ²/n) on P(|Bin(n,p) - np| >= λ).
pub fn chernoff_tail(n: u64, lambda: f64) -> f64 {
    2.0 * (-2.0 * lambda * lambda / n as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(n: u64, p: f64) -> BinomialCase {
        BinomialCase::new(n, p).unwrap()
    }

    #[test]
    fn eps_given_delta_reference_point() {
        // t = sqrt(ln 40 / 20000); ε = t·(2 + 1/(1/2 - t))
        let b = binomial_eps_given_delta(case(10_000, 0.5), 0.05).unwrap();
        assert!((b.epsilon - 0.055_082_435_522_271_63).abs() < 1e-14);
        assert_eq!(b.delta, 0.05);
        assert_eq!(b.source, BoundSource::BinomialChernoff);
    }

    #[test]
    fn eps_given_delta_mirrors() {
        for &(n, p, d) in &[(500, 0.2, 0.1), (2000, 0.35, 1e-3), (10_000, 0.1, 1e-6)] {
            let lo = binomial_eps_given_delta(case(n, p), d).unwrap().epsilon;
            let hi = binomial_eps_given_delta(case(n, 1.0 - p), d).unwrap().epsilon;
            assert!((lo - hi).abs() <= 1e-12 * lo, "{n} {p}: {lo} vs {hi}");
        }
    }

    #[test]
    fn eps_decreases_with_n() {
        let a = binomial_eps_given_delta(case(1000, 0.3), 0.01).unwrap().epsilon;
        let b = binomial_eps_given_delta(case(2000, 0.3), 0.01).unwrap().epsilon;
        assert!(b < a);
    }

    #[test]
    fn tail_dominates_reports_minimum() {
        let c = case(50, 0.05);
        let err = binomial_eps_given_delta(c, 0.01).unwrap_err();
        match err {
            Error::TailDominates { min_delta } => {
                let q = 0.05f64;
                let expect = (0.95f64.powi(50) + q.powi(50)).max(2.0 * (-2.0 * 50.0 * q * q).exp());
                assert!((min_delta - expect).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn delta_given_eps_reference_point() {
        let b = binomial_delta_given_eps(case(1000, 0.2), 1.0).unwrap();
        assert!((b.delta - 4.553_586_727_144_452e-12).abs() < 1e-24);
        assert!(!b.is_vacuous());
    }

    #[test]
    fn delta_given_eps_half_specialization() {
        for &(n, e) in &[(100u64, 0.3), (5000, 1.0), (77, 2.5)] {
            let got = binomial_delta_given_eps(case(n, 0.5), e).unwrap().delta;
            let r = (e.exp() - 1.0) / (e.exp() + 1.0);
            let want = 2.0 * (-(n as f64) / 2.0 * r * r).exp();
            assert!((got - want).abs() <= 1e-14 * want.max(1e-300));
        }
    }

    #[test]
    fn vacuous_delta_is_flagged_not_clamped() {
        let b = binomial_delta_given_eps(case(10, 0.05), 0.1).unwrap();
        assert!(b.delta > 1.0);
        assert!(b.is_vacuous());
    }

    #[test]
    fn pmf_ratio_values() {
        let e = pmf_ratio_eps(1000, 0.5, 100.0).unwrap();
        assert!((e - 0.45).abs() < 1e-14);
        let tiny = pmf_ratio_eps(1000, 0.3, 1e-9).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-10);
        assert!(pmf_ratio_eps(100, 0.3, 30.0).is_err());
        assert!(pmf_ratio_eps(100, 0.8, 20.0).is_err());
        assert!(pmf_ratio_eps(100, 0.3, 0.0).is_err());
    }

    #[test]
    fn chernoff_values() {
        assert_eq!(chernoff_tail(100, 0.0), 2.0);
        assert!((chernoff_tail(100, 20.0) - 2.0 * (-8.0f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn case_validation() {
        assert!(BinomialCase::new(1, 0.5).is_err());
        assert!(BinomialCase::new(10, 1.0).is_err());
        assert!(BinomialCase::new(10, 0.0).is_err());
    }
}
