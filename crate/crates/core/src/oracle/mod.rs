//! Ground-truth δ for the sum mechanism on small discrete instances.
//!
//! The exact path convolves record laws on a fixed value grid and takes the
//! hockey-stick divergence between the sum over `X` and the sum over every
//! adjacent vector, in both directions. The sampling path in [`mc`] covers
//! instances that are too large to enumerate.

pub mod mc;
mod pmf;
pub mod postprocess;

pub use pmf::{hockey_stick_delta, DiscretePmf, DEFAULT_RESOLUTION, DEFAULT_SUPPORT_CAP};

use crate::error::{Error, Result};
use crate::model::{DataVectorSpec, DistributionSpec, Family};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub resolution: f64,
    pub support_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            resolution: DEFAULT_RESOLUTION,
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }
}

/// How a neighbour differs from the base vector. Removal of any free record
/// of an i.i.d. group yields the same law, so one representative index is
/// kept per group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "direction", rename_all = "kebab-case")]
pub enum AdjacencyCase {
    Remove { index: u64 },
    /// The inserted record is appended at `position` (= n).
    Insert { position: u64 },
}

/// Worst adjacency case found for one ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactDelta {
    pub delta: f64,
    pub case: AdjacencyCase,
    /// True when the worst direction compares the base law against the neighbour.
    pub base_first: bool,
}

/// Law of the sum over `X` together with the law over every adjacent vector.
#[derive(Debug, Clone)]
pub struct NeighbourPmfs {
    pub base: DiscretePmf,
    pub neighbours: Vec<(AdjacencyCase, DiscretePmf)>,
}

impl NeighbourPmfs {
    /// Tight δ at `epsilon`: maximum over neighbours and both directions.
    pub fn delta(&self, epsilon: f64) -> ExactDelta {
        let mut best = ExactDelta {
            delta: 0.0,
            case: self
                .neighbours
                .first()
                .map(|c| c.0)
                .unwrap_or(AdjacencyCase::Insert { position: 0 }),
            base_first: true,
        };
        for (case, nb) in &self.neighbours {
            for (base_first, d) in [
                (true, hockey_stick_delta(&self.base, nb, epsilon)),
                (false, hockey_stick_delta(nb, &self.base, epsilon)),
            ] {
                if d > best.delta {
                    best = ExactDelta {
                        delta: d,
                        case: *case,
                        base_first,
                    };
                }
            }
        }
        best
    }

    /// Same as [`delta`](Self::delta) after pushing every law through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64 + Copy) -> Result<NeighbourPmfs> {
        Ok(NeighbourPmfs {
            base: self.base.map_values(f)?,
            neighbours: self
                .neighbours
                .iter()
                .map(|(c, p)| Ok((*c, p.map_values(f)?)))
                .collect::<Result<_>>()?,
        })
    }
}

/// One independent piece of the sum, with the laws left after removing
/// one of its records.
struct Component {
    law: DiscretePmf,
    removals: Vec<(u64, DiscretePmf)>,
}

fn exact_atoms(spec: &DistributionSpec, group: usize) -> Result<Vec<(f64, f64)>> {
    spec.family().atoms().ok_or(Error::NotEnumerable {
        group,
        family: spec.family().name(),
    })
}

/// Bin(c, p) weights for k = 0..=c by the ratio recurrence in log space.
fn binomial_weights(c: u64, p: f64) -> Vec<f64> {
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut logs = Vec::with_capacity(c as usize + 1);
    let mut cur = c as f64 * lq;
    logs.push(cur);
    for k in 0..c {
        cur += ((c - k) as f64 / (k + 1) as f64).ln() + lp - lq;
        logs.push(cur);
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Laws of the sum of `c - 1` and `c` i.i.d. copies.
fn group_power(
    spec: &DistributionSpec,
    group: usize,
    c: u64,
    cfg: &OracleConfig,
) -> Result<(DiscretePmf, DiscretePmf)> {
    let zero = DiscretePmf::point(0.0, cfg.resolution)?;
    if let Family::Bernoulli { p } = spec.family() {
        if c as usize >= cfg.support_cap {
            return Err(Error::OracleTooLarge {
                points: c as usize + 1,
                cap: cfg.support_cap,
            });
        }
        let law = |m: u64| {
            let atoms: Vec<(f64, f64)> = binomial_weights(m, *p)
                .into_iter()
                .enumerate()
                .map(|(k, w)| (k as f64, w))
                .collect();
            DiscretePmf::from_atoms(&atoms, cfg.resolution)
        };
        return Ok((law(c - 1)?, law(c)?));
    }
    let atom = DiscretePmf::from_atoms(&exact_atoms(spec, group)?, cfg.resolution)?;
    let mut prev = zero;
    for _ in 1..c {
        prev = prev.convolve(&atom, cfg.support_cap)?;
    }
    let full = prev.convolve(&atom, cfg.support_cap)?;
    Ok((prev, full))
}

fn build_components(
    spec: &DataVectorSpec,
    fixed: &[(u64, f64)],
    cfg: &OracleConfig,
) -> Result<(Vec<Component>, f64)> {
    let n = spec.n();
    let mut in_block = vec![false; n as usize];
    for b in spec.blocks() {
        for &i in b.indices() {
            in_block[i] = true;
        }
    }
    let mut is_fixed = vec![false; n as usize];
    let mut shift = 0.0;
    for &(i, v) in fixed {
        if i >= n {
            return Err(Error::invariant("compromised", format!("index {i} out of range 0..{n}")));
        }
        if in_block[i as usize] {
            return Err(Error::Domain(format!(
                "compromised index {i} lies in a dependency block; the oracle cannot condition a joint law"
            )));
        }
        if is_fixed[i as usize] {
            return Err(Error::invariant("compromised", format!("index {i} listed twice")));
        }
        if !v.is_finite() {
            return Err(Error::Domain(format!("compromised value {v} is not finite")));
        }
        is_fixed[i as usize] = true;
        shift += v;
    }

    let mut comps = Vec::new();
    for (g, rec) in spec.records().iter().enumerate() {
        let start = spec.offset(g);
        let free: Vec<u64> = (start..start + rec.count())
            .filter(|&i| !in_block[i as usize] && !is_fixed[i as usize])
            .collect();
        if free.is_empty() {
            continue;
        }
        let (minus_one, law) = group_power(rec, g, free.len() as u64, cfg)?;
        comps.push(Component {
            law,
            removals: vec![(free[0], minus_one)],
        });
    }

    for block in spec.blocks() {
        let sum_law = |skip: Option<usize>| {
            let atoms: Vec<(f64, f64)> = block
                .outcomes()
                .iter()
                .map(|(vals, p)| {
                    let s: f64 = vals
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| Some(k) != skip)
                        .map(|(_, v)| v)
                        .sum();
                    (s, *p)
                })
                .collect();
            DiscretePmf::from_atoms(&atoms, cfg.resolution)
        };
        let law = sum_law(None)?;
        let removals = block
            .indices()
            .iter()
            .enumerate()
            .map(|(k, &i)| Ok((i as u64, sum_law(Some(k))?)))
            .collect::<Result<Vec<_>>>()?;
        comps.push(Component { law, removals });
    }
    Ok((comps, shift))
}

fn assemble(
    comps: Vec<Component>,
    shift: f64,
    insert: Option<&DiscretePmf>,
    position: u64,
    cfg: &OracleConfig,
) -> Result<NeighbourPmfs> {
    let cap = cfg.support_cap;
    let zero = DiscretePmf::point(shift, cfg.resolution)?;
    let m = comps.len();
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(zero.clone());
    for c in &comps {
        let next = prefix.last().unwrap().convolve(&c.law, cap)?;
        prefix.push(next);
    }
    let unit = DiscretePmf::point(0.0, cfg.resolution)?;
    let mut suffix = vec![unit; m + 1];
    for j in (0..m).rev() {
        suffix[j] = comps[j].law.convolve(&suffix[j + 1], cap)?;
    }
    let base = prefix[m].clone();
    let mut neighbours = Vec::new();
    for (j, c) in comps.iter().enumerate() {
        for (index, removed) in &c.removals {
            let law = prefix[j].convolve(removed, cap)?.convolve(&suffix[j + 1], cap)?;
            neighbours.push((AdjacencyCase::Remove { index: *index }, law));
        }
    }
    if let Some(ins) = insert {
        neighbours.push((AdjacencyCase::Insert { position }, base.convolve(ins, cap)?));
    }
    Ok(NeighbourPmfs { base, neighbours })
}

fn insert_law(
    spec: &DataVectorSpec,
    insert: Option<&DistributionSpec>,
    cfg: &OracleConfig,
) -> Result<DiscretePmf> {
    let (rec, group) = match insert {
        Some(r) => (r, usize::MAX),
        None => (&spec.records()[0], 0),
    };
    DiscretePmf::from_atoms(&exact_atoms(rec, group)?, cfg.resolution)
}

/// Exact law of Σ Xᵢ.
pub fn exact_sum_pmf(spec: &DataVectorSpec) -> Result<DiscretePmf> {
    exact_sum_pmf_with(spec, &OracleConfig::default())
}

pub fn exact_sum_pmf_with(spec: &DataVectorSpec, cfg: &OracleConfig) -> Result<DiscretePmf> {
    let (comps, shift) = build_components(spec, &[], cfg)?;
    let mut acc = DiscretePmf::point(shift, cfg.resolution)?;
    for c in &comps {
        acc = acc.convolve(&c.law, cfg.support_cap)?;
    }
    Ok(acc)
}

/// Base and neighbour laws. `insert` defaults to the first record group's law.
pub fn adjacent_pmfs(
    spec: &DataVectorSpec,
    insert: Option<&DistributionSpec>,
    cfg: &OracleConfig,
) -> Result<NeighbourPmfs> {
    conditioned_adjacent_pmfs(spec, &[], insert, cfg)
}

/// As [`adjacent_pmfs`], with the records in `fixed` pinned to known values.
/// Pinned records contribute a constant shift and are never removed.
pub fn conditioned_adjacent_pmfs(
    spec: &DataVectorSpec,
    fixed: &[(u64, f64)],
    insert: Option<&DistributionSpec>,
    cfg: &OracleConfig,
) -> Result<NeighbourPmfs> {
    let ins = insert_law(spec, insert, cfg)?;
    let (comps, shift) = build_components(spec, fixed, cfg)?;
    assemble(comps, shift, Some(&ins), spec.n(), cfg)
}

/// Tight δ at `epsilon` over removal of every index, the given insertion, and
/// both directions.
pub fn exact_np_delta(
    spec: &DataVectorSpec,
    epsilon: f64,
    insert: Option<&DistributionSpec>,
) -> Result<f64> {
    Ok(exact_np_delta_detail(spec, epsilon, insert, &OracleConfig::default())?.delta)
}

pub fn exact_np_delta_detail(
    spec: &DataVectorSpec,
    epsilon: f64,
    insert: Option<&DistributionSpec>,
    cfg: &OracleConfig,
) -> Result<ExactDelta> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::Domain(format!("ε must be >= 0, got {epsilon}")));
    }
    Ok(adjacent_pmfs(spec, insert, cfg)?.delta(epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DependencyBlock;

    fn bern(p: f64, c: u64) -> DistributionSpec {
        DistributionSpec::bernoulli(p, c).unwrap()
    }

    fn choose(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn three_coins() {
        let spec = DataVectorSpec::independent(vec![bern(0.5, 3)], 1.0).unwrap();
        let pmf = exact_sum_pmf(&spec).unwrap();
        let want = [(0.0, 0.125), (1.0, 0.375), (2.0, 0.375), (3.0, 0.125)];
        assert_eq!(pmf.len(), 4);
        for ((v, p), (wv, wp)) in pmf.atoms().zip(want) {
            assert_eq!(v, wv);
            assert!((p - wp).abs() < 1e-15);
        }
    }

    #[test]
    fn binomial_closed_form() {
        let spec = DataVectorSpec::independent(vec![bern(0.3, 100)], 1.0).unwrap();
        let pmf = exact_sum_pmf(&spec).unwrap();
        assert_eq!(pmf.len(), 101);
        for (v, p) in pmf.atoms() {
            let k = v as u64;
            let want = choose(100, k) * 0.3f64.powi(k as i32) * 0.7f64.powi(100 - k as i32);
            assert!((p - want).abs() < 1e-12, "k={k}: {p} vs {want}");
        }
    }

    #[test]
    fn comonotone_pair_block() {
        let block = DependencyBlock::new(vec![0, 1], vec![(vec![0.0, 0.0], 0.5), (vec![1.0, 1.0], 0.5)])
            .unwrap();
        let spec = DataVectorSpec::builder(vec![bern(0.5, 2)])
            .sensitivity(1.0)
            .dependency_bound(2)
            .total_variance(1.0)
            .blocks(vec![block])
            .build()
            .unwrap();
        let got: Vec<_> = exact_sum_pmf(&spec).unwrap().atoms().collect();
        assert_eq!(got, vec![(0.0, 0.5), (2.0, 0.5)]);
    }

    #[test]
    fn point_masses_give_delta_one() {
        let recs = vec![
            DistributionSpec::discrete(vec![(1.0, 1.0)], 1).unwrap(),
            DistributionSpec::discrete(vec![(2.0, 1.0)], 1).unwrap(),
            DistributionSpec::discrete(vec![(5.0, 1.0)], 1).unwrap(),
        ];
        let spec = DataVectorSpec::independent(recs, 5.0).unwrap();
        for eps in [0.1, 1.0, 10.0] {
            assert_eq!(exact_np_delta(&spec, eps, None).unwrap(), 1.0);
        }
    }

    #[test]
    fn iid_removals_collapse_to_one_case() {
        let spec = DataVectorSpec::independent(vec![bern(0.4, 30)], 1.0).unwrap();
        let nb = adjacent_pmfs(&spec, None, &OracleConfig::default()).unwrap();
        assert_eq!(nb.neighbours.len(), 2);
        assert_eq!(nb.neighbours[0].0, AdjacencyCase::Remove { index: 0 });
    }

    #[test]
    fn moments_only_is_not_enumerable() {
        let m = DistributionSpec::new(
            Family::Moments {
                mean: 0.0,
                variance: 1.0,
                abs_third: 1.0,
                fourth: None,
                bounds: None,
            },
            5,
        )
        .unwrap();
        let spec = DataVectorSpec::independent(vec![m], 1.0).unwrap();
        assert!(matches!(exact_sum_pmf(&spec), Err(Error::NotEnumerable { group: 0, .. })));
    }

    #[test]
    fn conditioning_shifts_and_skips_pinned() {
        let spec = DataVectorSpec::independent(vec![bern(0.5, 4)], 1.0).unwrap();
        let cfg = OracleConfig::default();
        let nb = conditioned_adjacent_pmfs(&spec, &[(0, 1.0), (1, 0.0)], None, &cfg).unwrap();
        let got: Vec<_> = nb.base.atoms().collect();
        assert_eq!(got, vec![(1.0, 0.25), (2.0, 0.5), (3.0, 0.25)]);
        assert_eq!(nb.neighbours[0].0, AdjacencyCase::Remove { index: 2 });
    }
}
