//! Data series behind the published figures, keyed by figure number.

use crate::binomial::{binomial_delta_given_eps, BinomialCase};
use crate::bound::BerryEsseenConstant;
use crate::error::{Error, Result};
use crate::independent::{independent_bound, IndependentAggregate};
use crate::synergy::{laplace_baseline_variance, regime_boundaries, required_noise_variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// δ(n) of the binomial bound, ε = 0.5, p = 0.95.
    BinomialHighP,
    /// δ(n) of the binomial bound, ε = 1, p = 0.2.
    BinomialLowP,
    /// ε(n) for independent records with Δ = 30, σ² = 4, Σρ = 3n.
    IndependentEpsilon,
    /// δ(n) for the same profile.
    IndependentDelta,
    /// Required noise variance against the plain Laplace baseline.
    NoiseSynergy,
}

impl Figure {
    pub fn from_id(id: u32) -> Result<Figure> {
        match id {
            1 => Ok(Figure::BinomialHighP),
            2 => Ok(Figure::BinomialLowP),
            3 => Ok(Figure::IndependentEpsilon),
            4 => Ok(Figure::IndependentDelta),
            6 => Ok(Figure::NoiseSynergy),
            _ => Err(Error::Domain(format!(
                "unknown figure id {id}; expected one of 1, 2, 3, 4, 6"
            ))),
        }
    }

    pub fn id(self) -> u32 {
        match self {
            Figure::BinomialHighP => 1,
            Figure::BinomialLowP => 2,
            Figure::IndependentEpsilon => 3,
            Figure::IndependentDelta => 4,
            Figure::NoiseSynergy => 6,
        }
    }
}

/// Parameters for one figure. Unused fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveParams {
    pub n_min: u64,
    pub n_max: u64,
    pub points: usize,
    pub epsilon: f64,
    pub p: f64,
    pub sensitivity: f64,
    /// Per-record variance; for the noise figure the data variance is this times n.
    pub variance: f64,
    /// Per-record E|X-μ|³.
    pub abs_third: f64,
    pub berry_esseen: BerryEsseenConstant,
}

impl CurveParams {
    pub fn defaults(fig: Figure) -> CurveParams {
        let base = CurveParams {
            n_min: 100,
            n_max: 100_000,
            points: 200,
            epsilon: 0.5,
            p: 0.95,
            sensitivity: 30.0,
            variance: 4.0,
            abs_third: 3.0,
            berry_esseen: BerryEsseenConstant::default(),
        };
        match fig {
            Figure::BinomialHighP => base,
            Figure::BinomialLowP => CurveParams {
                n_max: 10_000,
                epsilon: 1.0,
                p: 0.2,
                ..base
            },
            Figure::IndependentEpsilon | Figure::IndependentDelta => CurveParams {
                n_min: 1_000,
                n_max: 1_000_000,
                ..base
            },
            Figure::NoiseSynergy => CurveParams {
                n_max: 1_000_000,
                epsilon: 0.2,
                sensitivity: 10.0,
                variance: 0.1,
                ..base
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// Column names; the first is always `n`.
    pub header: Vec<&'static str>,
    pub rows: Vec<(u64, Vec<f64>)>,
}

/// Roughly `points` integers spread evenly in log scale over [lo, hi],
/// strictly increasing, both ends included.
pub fn log_spaced(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    if lo >= hi || points < 2 {
        return vec![lo.max(1)];
    }
    let (a, b) = ((lo.max(1) as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .collect();
    out[0] = lo.max(1);
    *out.last_mut().unwrap() = hi;
    out.dedup();
    out
}

pub fn emit_curve(fig: Figure, params: &CurveParams) -> Result<Curve> {
    if params.n_min < 2 || params.n_min >= params.n_max {
        return Err(Error::invariant(
            "n_range",
            format!("need 2 <= n_min < n_max, got [{}, {}]", params.n_min, params.n_max),
        ));
    }
    let mut ns = log_spaced(params.n_min, params.n_max, params.points);
    let mut header = vec!["n", "value"];
    let mut rows = Vec::with_capacity(ns.len());
    match fig {
        Figure::BinomialHighP | Figure::BinomialLowP => {
            for n in ns {
                let b = binomial_delta_given_eps(BinomialCase::new(n, params.p)?, params.epsilon)?;
                rows.push((n, vec![b.delta]));
            }
        }
        Figure::IndependentEpsilon | Figure::IndependentDelta => {
            for n in ns {
                let agg = IndependentAggregate {
                    n,
                    mean_variance: params.variance,
                    sum_abs_third: params.abs_third * n as f64,
                    sensitivity: params.sensitivity,
                };
                let b = independent_bound(&agg, params.berry_esseen)?;
                let v = if fig == Figure::IndependentEpsilon {
                    b.epsilon
                } else {
                    b.delta
                };
                rows.push((n, vec![v]));
            }
        }
        Figure::NoiseSynergy => {
            header.push("baseline");
            let baseline = laplace_baseline_variance(params.sensitivity, params.epsilon)?;
            let changes = regime_boundaries(
                params.sensitivity,
                params.variance,
                params.epsilon,
                params.n_max,
            )?;
            for (n, _) in changes {
                for m in [n - 1, n] {
                    if m >= params.n_min && m <= params.n_max {
                        ns.push(m);
                    }
                }
            }
            ns.sort_unstable();
            ns.dedup();
            for n in ns {
                let v = required_noise_variance(
                    params.sensitivity,
                    n,
                    params.variance * n as f64,
                    params.epsilon,
                )?;
                rows.push((n, vec![v, baseline]));
            }
        }
    }
    if rows.iter().flat_map(|r| &r.1).any(|v| !v.is_finite()) {
        return Err(Error::Domain("curve produced a non-finite value".into()));
    }
    Ok(Curve { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synergy::{classify, Regime};

    #[test]
    fn log_spacing_is_strict() {
        let v = log_spaced(100, 100_000, 200);
        assert_eq!(v[0], 100);
        assert_eq!(*v.last().unwrap(), 100_000);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        let small = log_spaced(2, 10, 200);
        assert_eq!(small, (2..=10).collect::<Vec<_>>());
    }

    #[test]
    fn decreasing_figures() {
        for id in [1, 2, 3, 4] {
            let fig = Figure::from_id(id).unwrap();
            let c = emit_curve(fig, &CurveParams::defaults(fig)).unwrap();
            assert!(c.rows.windows(2).all(|w| w[1].1[0] < w[0].1[0]), "figure {id}");
        }
    }

    #[test]
    fn figure_three_at_ten_thousand() {
        let fig = Figure::IndependentEpsilon;
        let mut p = CurveParams::defaults(fig);
        p.n_min = 1000;
        p.n_max = 10_000;
        let c = emit_curve(fig, &p).unwrap();
        let last = c.rows.last().unwrap();
        assert_eq!(last.0, 10_000);
        assert!((last.1[0] - 0.455_228_138_815_543_9).abs() < 1e-12);
    }

    #[test]
    fn noise_figure_regimes_in_order() {
        let fig = Figure::NoiseSynergy;
        let c = emit_curve(fig, &CurveParams::defaults(fig)).unwrap();
        assert_eq!(c.header, vec!["n", "value", "baseline"]);
        let regimes: Vec<Regime> = c.rows.iter().map(|r| classify(r.1[0], r.1[1])).collect();
        let mut seen = regimes.clone();
        seen.dedup();
        assert_eq!(seen, vec![Regime::StandardDp, Regime::Synergy, Regime::Noiseless]);
        assert!(c.rows.iter().all(|r| r.1[1] == c.rows[0].1[1]));
        assert!((c.rows[0].1[1] - 5000.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_figure() {
        assert!(Figure::from_id(5).is_err());
        assert!(Figure::from_id(7).is_err());
    }
}
