//! TOML configuration ingestion.
//!
//! Three stages, each with its own error: TOML syntax ([`Error::ConfigParse`]),
//! the schema of keys and types ([`Error::ConfigSchema`]), and domain
//! invariants ([`Error::Invariant`] naming the field path).

use crate::error::{Error, Result};
use crate::model::{AdversaryModel, DataVectorSpec, DependencyBlock, DistributionSpec, Family};
use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    records: Vec<RawRecord>,
    sensitivity: Option<f64>,
    #[serde(default = "one")]
    dependency_bound: u64,
    #[serde(default)]
    gamma: f64,
    total_variance: Option<f64>,
    remaining_total_variance: Option<f64>,
    compromised: Option<Vec<u64>>,
    #[serde(default)]
    dependency_blocks: Vec<RawBlock>,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    family: String,
    #[serde(default = "one")]
    count: u64,
    #[serde(default)]
    params: toml::Table,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    indices: Vec<usize>,
    outcomes: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BernoulliParams {
    p: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscreteParams {
    values: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentParams {
    mean: f64,
    variance: f64,
    abs_third: f64,
    fourth: Option<f64>,
    support_bounds: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmpiricalParams {
    data: Vec<f64>,
}

/// Validated contents of a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub spec: DataVectorSpec,
    pub adversary: AdversaryModel,
    pub remaining_total_variance: Option<f64>,
}

fn params<T: DeserializeOwned>(table: &toml::Table, path: &str) -> Result<T> {
    toml::Value::Table(table.clone())
        .try_into()
        .map_err(|e: toml::de::Error| Error::ConfigSchema(format!("{path}.params: {}", e.message())))
}

/// Re-anchors a record-level error at `records[g]` and names the group.
fn in_group(err: Error, g: usize) -> Error {
    match err {
        Error::Invariant { path, reason } => Error::Invariant {
            path: path.replacen("records", &format!("records[{g}]"), 1),
            reason: format!("record group {g}: {reason}"),
        },
        other => other,
    }
}

fn record(raw: &RawRecord, g: usize) -> Result<DistributionSpec> {
    let path = format!("records[{g}]");
    let family = match raw.family.as_str() {
        "bernoulli" => {
            let p: BernoulliParams = params(&raw.params, &path)?;
            Family::Bernoulli { p: p.p }
        }
        "discrete" => {
            let p: DiscreteParams = params(&raw.params, &path)?;
            if p.values.len() != p.probs.len() {
                return Err(Error::ConfigSchema(format!(
                    "{path}.params: {} values but {} probs",
                    p.values.len(),
                    p.probs.len()
                )));
            }
            Family::Discrete {
                support: p.values.into_iter().zip(p.probs).collect(),
            }
        }
        "moments" => {
            let p: MomentParams = params(&raw.params, &path)?;
            Family::Moments {
                mean: p.mean,
                variance: p.variance,
                abs_third: p.abs_third,
                fourth: p.fourth,
                bounds: p.support_bounds.map(|[a, b]| (a, b)),
            }
        }
        "empirical" => {
            let p: EmpiricalParams = params(&raw.params, &path)?;
            return DistributionSpec::fit_empirical(&p.data, raw.count).map_err(|e| in_group(e, g));
        }
        other => {
            return Err(Error::ConfigSchema(format!(
                "{path}.family: unknown family `{other}`, expected one of bernoulli, discrete, moments, empirical"
            )))
        }
    };
    DistributionSpec::new(family, raw.count).map_err(|e| in_group(e, g))
}

fn block(raw: RawBlock, b: usize) -> Result<DependencyBlock> {
    let path = format!("dependency_blocks[{b}]");
    if raw.outcomes.len() != raw.probs.len() {
        return Err(Error::ConfigSchema(format!(
            "{path}: {} outcomes but {} probs",
            raw.outcomes.len(),
            raw.probs.len()
        )));
    }
    DependencyBlock::new(raw.indices, raw.outcomes.into_iter().zip(raw.probs).collect()).map_err(|e| match e {
        Error::Invariant { path: p, reason } => Error::Invariant {
            path: p.replacen("dependency_blocks", &path, 1),
            reason,
        },
        other => other,
    })
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<Config> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string().trim_end().to_string()))?;
    let raw: RawConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::ConfigSchema(e.message().to_string()))?;

    let records = raw
        .records
        .iter()
        .enumerate()
        .map(|(g, r)| record(r, g))
        .collect::<Result<Vec<_>>>()?;
    let blocks = raw
        .dependency_blocks
        .into_iter()
        .enumerate()
        .map(|(b, r)| block(r, b))
        .collect::<Result<Vec<_>>>()?;
    let spec = DataVectorSpec::builder(records)
        .maybe_sensitivity(raw.sensitivity)
        .dependency_bound(raw.dependency_bound)
        .maybe_total_variance(raw.total_variance)
        .blocks(blocks)
        .build()?;
    let adversary = AdversaryModel::new(raw.dependency_bound, raw.gamma, raw.compromised)?;
    adversary.validate_for(spec.n())?;
    if let Some(v) = raw.remaining_total_variance {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invariant("remaining_total_variance", format!("must be > 0, got {v}")));
        }
    }
    Ok(Config {
        spec,
        adversary,
        remaining_total_variance: raw.remaining_total_variance,
    })
}

/// Reads and validates a configuration file. I/O failures count as parse errors.
pub fn ingest_config(path: &std::path::Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = parse_config(
            r#"
sensitivity = 1
[[records]]
family = "bernoulli"
count = 100
params = { p = 0.2 }
"#,
        )
        .unwrap();
        assert_eq!(c.spec.n(), 100);
        assert_eq!(c.adversary.gamma(), 0.0);
        assert_eq!(c.adversary.dependency_bound(), 1);
    }

    #[test]
    fn stage_errors_are_distinct() {
        assert!(matches!(parse_config("records = [ "), Err(Error::ConfigParse(_))));
        assert!(matches!(
            parse_config("bogus = 1\n[[records]]\nfamily = \"bernoulli\"\nparams = { p = 0.5 }"),
            Err(Error::ConfigSchema(_))
        ));
        assert!(matches!(
            parse_config("[[records]]\nfamily = \"bernoulli\"\nparams = { q = 0.5 }"),
            Err(Error::ConfigSchema(_))
        ));
        assert!(matches!(
            parse_config("[[records]]\nfamily = \"poisson\"\nparams = { p = 0.5 }"),
            Err(Error::ConfigSchema(_))
        ));
    }

    #[test]
    fn bad_probabilities_name_the_group() {
        let err = parse_config(
            r#"
[[records]]
family = "bernoulli"
params = { p = 0.5 }
[[records]]
family = "discrete"
params = { values = [0, 1], probs = [0.5, 0.49] }
"#,
        )
        .unwrap_err();
        match err {
            Error::Invariant { path, reason } => {
                assert!(path.starts_with("records[1]"), "{path}");
                assert!(reason.contains("record group 1"), "{reason}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn dependent_needs_total_variance() {
        let err = parse_config(
            "dependency_bound = 3\n[[records]]\nfamily = \"bernoulli\"\ncount = 9\nparams = { p = 0.5 }",
        )
        .unwrap_err();
        assert_eq!(
            err.to_string(),
            "total_variance: total_variance required when dependency_bound > 1"
        );
    }

    #[test]
    fn blocks_and_moments() {
        let c = parse_config(
            r#"
dependency_bound = 2
total_variance = 3.0
sensitivity = 5
[[records]]
family = "bernoulli"
count = 4
params = { p = 0.5 }
[[records]]
family = "moments"
count = 2
params = { mean = 0, variance = 1, abs_third = 1.5, fourth = 3, support_bounds = [-5, 5] }
[[dependency_blocks]]
indices = [0, 1]
outcomes = [[0, 0], [1, 1]]
probs = [0.5, 0.5]
"#,
        )
        .unwrap();
        assert_eq!(c.spec.blocks().len(), 1);
        assert_eq!(c.spec.n(), 6);
    }
}
