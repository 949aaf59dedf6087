//! Post-processing check: coarsening the released sum never increases δ.

use super::{adjacent_pmfs, OracleConfig};
use crate::error::{Error, Result};
use crate::model::{DataVectorSpec, DistributionSpec};
use serde::Serialize;

/// Deterministic maps applied to the released sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "map", rename_all = "kebab-case")]
pub enum ValueMap {
    Identity,
    /// Round to the nearest multiple of `step`.
    Round { step: f64 },
    /// Floor into buckets of width `width`.
    Bucket { width: f64 },
    /// 1 when the sum is at least `at`, else 0.
    Threshold { at: f64 },
    Constant { value: f64 },
}

impl ValueMap {
    pub fn apply(&self, v: f64) -> f64 {
        match *self {
            ValueMap::Identity => v,
            ValueMap::Round { step } => (v / step).round() * step,
            ValueMap::Bucket { width } => (v / width).floor() * width,
            ValueMap::Threshold { at } => {
                if v >= at {
                    1.0
                } else {
                    0.0
                }
            }
            ValueMap::Constant { value } => value,
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            ValueMap::Round { step: w } | ValueMap::Bucket { width: w } if !(w > 0.0 && w.is_finite()) => {
                Err(Error::Domain(format!("map width must be positive, got {w}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PostprocessOutcome {
    pub original_delta: f64,
    pub mapped_delta: f64,
}

impl PostprocessOutcome {
    pub fn holds(&self) -> bool {
        self.mapped_delta <= self.original_delta + 1e-12
    }
}

pub fn postprocess_deltas(
    spec: &DataVectorSpec,
    epsilon: f64,
    map: ValueMap,
    insert: Option<&DistributionSpec>,
    cfg: &OracleConfig,
) -> Result<PostprocessOutcome> {
    map.check()?;
    let laws = adjacent_pmfs(spec, insert, cfg)?;
    let mapped = laws.map_values(|v| map.apply(v))?;
    Ok(PostprocessOutcome {
        original_delta: laws.delta(epsilon).delta,
        mapped_delta: mapped.delta(epsilon).delta,
    })
}

/// True iff δ of the mapped laws is within 1e-12 of δ of the originals or below.
pub fn postprocess_check(spec: &DataVectorSpec, epsilon: f64, map: ValueMap) -> Result<bool> {
    Ok(postprocess_deltas(spec, epsilon, map, None, &OracleConfig::default())?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(n: u64, p: f64) -> DataVectorSpec {
        DataVectorSpec::independent(vec![DistributionSpec::bernoulli(p, n).unwrap()], 1.0).unwrap()
    }

    #[test]
    fn identity_and_constant() {
        let spec = bin(40, 0.3);
        let cfg = OracleConfig::default();
        let id = postprocess_deltas(&spec, 0.5, ValueMap::Identity, None, &cfg).unwrap();
        assert_eq!(id.original_delta, id.mapped_delta);
        let c = postprocess_deltas(&spec, 0.5, ValueMap::Constant { value: 3.0 }, None, &cfg).unwrap();
        assert_eq!(c.mapped_delta, 0.0);
        assert!(c.holds());
    }

    #[test]
    fn rounding_binomial_hundred() {
        assert!(postprocess_check(&bin(100, 0.5), 0.5, ValueMap::Round { step: 10.0 }).unwrap());
    }

    #[test]
    fn rejects_zero_width() {
        assert!(postprocess_check(&bin(10, 0.5), 0.5, ValueMap::Bucket { width: 0.0 }).is_err());
    }
}
