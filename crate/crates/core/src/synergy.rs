//! Combining the data's own randomness with added noise.
//!
//! Noise enters only through its variance; δ is never improved here.

use crate::bound::normal_route_epsilon;
use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum NoiseFamily {
    GenericUnbiased,
    Laplace { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Required noise is at least the plain Laplace mechanism's.
    StandardDp,
    /// Some noise is needed, strictly less than plain Laplace.
    Synergy,
    /// The data alone meets the target.
    Noiseless,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoisePlan {
    pub noise_variance: f64,
    pub noise_family: NoiseFamily,
    pub resulting_epsilon: f64,
    pub baseline_laplace_variance: f64,
    pub regime: Regime,
}

impl NoisePlan {
    /// Laplace noise reaching `target_epsilon` on top of data with variance
    /// `total_variance` over `n` contributing records.
    pub fn laplace(sensitivity: f64, n: u64, total_variance: f64, target_epsilon: f64) -> Result<Self> {
        let noise_variance = required_noise_variance(sensitivity, n, total_variance, target_epsilon)?;
        let resulting_epsilon = eps_with_noise(sensitivity, n, total_variance, noise_variance)?;
        let baseline = laplace_baseline_variance(sensitivity, target_epsilon)?;
        Ok(NoisePlan {
            noise_variance,
            noise_family: NoiseFamily::Laplace {
                scale: (noise_variance / 2.0).sqrt(),
            },
            resulting_epsilon,
            baseline_laplace_variance: baseline,
            regime: classify(noise_variance, baseline),
        })
    }
}

pub fn classify(noise_variance: f64, baseline: f64) -> Regime {
    if noise_variance <= 0.0 {
        Regime::Noiseless
    } else if noise_variance < baseline {
        Regime::Synergy
    } else {
        Regime::StandardDp
    }
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::invariant("n", format!("need n >= 2, got {n}")));
    }
    Ok(())
}

/// ε = sqrt(Δ²·ln(n)/(σ² + σ_ξ²)).
pub fn eps_with_noise(sensitivity: f64, n: u64, total_variance: f64, noise_variance: f64) -> Result<f64> {
    check_n(n)?;
    if total_variance < 0.0 || noise_variance < 0.0 {
        return Err(Error::Domain("variances must be non-negative".into()));
    }
    let var = total_variance + noise_variance;
    if var <= 0.0 {
        return Err(Error::NoRandomness);
    }
    Ok(normal_route_epsilon(sensitivity, n, var))
}

/// Smallest noise variance reaching `target_epsilon`: max((Δ² ln n − ε²σ²)/ε², 0).
pub fn required_noise_variance(
    sensitivity: f64,
    n: u64,
    total_variance: f64,
    target_epsilon: f64,
) -> Result<f64> {
    check_n(n)?;
    if !(target_epsilon > 0.0 && target_epsilon.is_finite()) {
        return Err(Error::Domain(format!("target ε must be positive, got {target_epsilon}")));
    }
    if total_variance < 0.0 {
        return Err(Error::Domain("variances must be non-negative".into()));
    }
    if total_variance > 0.0 && normal_route_epsilon(sensitivity, n, total_variance) <= target_epsilon {
        return Ok(0.0);
    }
    let e2 = target_epsilon * target_epsilon;
    let need = (sensitivity * sensitivity * (n as f64).ln() - e2 * total_variance) / e2;
    // Rounding must not zero the noise while the data-only ε still misses the target.
    Ok(need.max(f64::MIN_POSITIVE))
}

/// ε after adding Lap(Δ/ε₂) noise to data whose own guarantee is ε₁.
pub fn eps_with_laplace(eps_data: f64, eps_lap: f64, n: u64) -> Result<f64> {
    check_n(n)?;
    if !(eps_data > 0.0 && eps_lap > 0.0) {
        return Err(Error::Domain("both ε values must be positive".into()));
    }
    let ln_n = (n as f64).ln();
    let (a, b) = (eps_data * eps_data, eps_lap * eps_lap);
    Ok((a * b * ln_n / (2.0 * a + b * ln_n)).sqrt())
}

/// Variance 2Δ²/ε² of the Lap(Δ/ε) noise the plain mechanism would add.
pub fn laplace_baseline_variance(sensitivity: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("ε must be positive, got {epsilon}")));
    }
    Ok(2.0 * sensitivity * sensitivity / (epsilon * epsilon))
}

/// Boundaries of the three regimes over n for data whose variance grows as
/// `variance_per_record · n`: the last n where plain Laplace is as cheap, and
/// the first n needing no noise. Found by scanning n upward from 2.
pub fn regime_boundaries(
    sensitivity: f64,
    variance_per_record: f64,
    target_epsilon: f64,
    n_max: u64,
) -> Result<Vec<(u64, Regime)>> {
    let baseline = laplace_baseline_variance(sensitivity, target_epsilon)?;
    let mut changes = Vec::new();
    let mut last: Option<Regime> = None;
    for n in 2..=n_max {
        let v = required_noise_variance(sensitivity, n, variance_per_record * n as f64, target_epsilon)?;
        let r = classify(v, baseline);
        if last != Some(r) {
            changes.push((n, r));
            last = Some(r);
        }
    }
    Ok(changes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_reduces_to_data_eps() {
        let e = eps_with_noise(3.0, 500, 40.0, 0.0).unwrap();
        assert_eq!(e, normal_route_epsilon(3.0, 500, 40.0));
    }

    #[test]
    fn reference_point() {
        let e = eps_with_noise(10.0, 10_000, 1e3, 1e3).unwrap();
        assert!((e - 0.678_614_042_441_511_2).abs() < 1e-14);
        assert!(eps_with_noise(10.0, 100, 0.0, 0.0).unwrap_err() == Error::NoRandomness);
    }

    #[test]
    fn eps_decreases_in_noise() {
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let e = eps_with_noise(5.0, 1000, 10.0, k as f64 * 50.0).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn required_noise_example_profile() {
        for &n in &[10u64, 1000, 300_000, 400_000] {
            let got = required_noise_variance(10.0, n, n as f64 / 10.0, 0.2).unwrap();
            let want = (2500.0 * (n as f64).ln() - n as f64 / 10.0).max(0.0);
            assert!((got - want).abs() <= 1e-9 * want.max(1.0));
        }
    }

    #[test]
    fn required_noise_round_trips() {
        let v = required_noise_variance(4.0, 2000, 30.0, 0.3).unwrap();
        assert!(v > 0.0);
        let e = eps_with_noise(4.0, 2000, 30.0, v).unwrap();
        assert!((e - 0.3).abs() < 1e-12);
        assert_eq!(required_noise_variance(1.0, 2000, 1e6, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn laplace_composition_limits() {
        let e1 = 0.8;
        let big = eps_with_laplace(e1, 1e9, 1000).unwrap();
        assert!((big - e1).abs() < 1e-9);
        assert!(eps_with_laplace(e1, 0.5, 1000).unwrap() < e1);
    }

    #[test]
    fn baseline() {
        assert_eq!(laplace_baseline_variance(10.0, 0.2).unwrap(), 2.0 * 100.0 / (0.2 * 0.2));
        assert!((laplace_baseline_variance(10.0, 0.2).unwrap() - 5000.0).abs() < 1e-9);
        let a = laplace_baseline_variance(3.0, 0.7).unwrap();
        let b = laplace_baseline_variance(6.0, 0.7).unwrap();
        assert!((b / a - 4.0).abs() < 1e-15);
    }

    #[test]
    fn plan_regimes() {
        let p = NoisePlan::laplace(10.0, 1000, 100.0, 0.2).unwrap();
        assert_eq!(p.regime, Regime::StandardDp);
        assert!((p.resulting_epsilon - 0.2).abs() < 1e-12);
        let p = NoisePlan::laplace(10.0, 1_000_000, 100_000.0, 0.2).unwrap();
        assert_eq!(p.regime, Regime::Noiseless);
        assert_eq!(p.noise_variance, 0.0);
        match p.noise_family {
            NoiseFamily::Laplace { scale } => assert_eq!(scale, 0.0),
            _ => unreachable!(),
        }
    }
}
