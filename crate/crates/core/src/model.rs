//! Domain types for the randomized data vector and per-record moment computation.
//!
//! Records sharing one distribution are stored as a single group with a count,
//! so a vector of a million identical Bernoulli records costs one entry.
//! Record indices refer to the expanded vector: group `g` covers the half-open
//! range `offset(g)..offset(g) + count(g)`.

use crate::error::{Error, Result};

const PROB_SUM_TOL: f64 = 1e-12;
const TOTAL_VARIANCE_REL_TOL: f64 = 1e-9;
const BLOCK_MARGINAL_TOL: f64 = 1e-9;

/// Law of a single record.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Bernoulli {
        p: f64,
    },
    /// Finite support as `(value, probability)` pairs.
    Discrete {
        support: Vec<(f64, f64)>,
    },
    /// Only the moments are known. `abs_third` is E|X-μ|³ and `fourth` is E(X-μ)⁴.
    Moments {
        mean: f64,
        variance: f64,
        abs_third: f64,
        fourth: Option<f64>,
        bounds: Option<(f64, f64)>,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Bernoulli { .. } => "bernoulli",
            Family::Discrete { .. } => "discrete",
            Family::Moments { .. } => "moments",
        }
    }

    /// Closed interval containing the support, if known.
    pub fn support_bounds(&self) -> Option<(f64, f64)> {
        match self {
            Family::Bernoulli { .. } => Some((0.0, 1.0)),
            Family::Discrete { support } => {
                let lo = support.iter().map(|&(v, _)| v).fold(f64::INFINITY, f64::min);
                let hi = support
                    .iter()
                    .map(|&(v, _)| v)
                    .fold(f64::NEG_INFINITY, f64::max);
                Some((lo, hi))
            }
            Family::Moments { bounds, .. } => *bounds,
        }
    }

    /// Atoms of the law when it is finite and explicit.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Family::Bernoulli { p } => Some(vec![(0.0, 1.0 - p), (1.0, *p)]),
            Family::Discrete { support } => Some(support.clone()),
            Family::Moments { .. } => None,
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        match self {
            Family::Bernoulli { p } => {
                if !(p.is_finite() && *p > 0.0 && *p < 1.0) {
                    return Err(Error::invariant(
                        format!("{path}.params.p"),
                        format!("bernoulli p must lie in (0, 1), got {p}"),
                    ));
                }
            }
            Family::Discrete { support } => {
                if support.is_empty() {
                    return Err(Error::invariant(
                        format!("{path}.params.support"),
                        "discrete support is empty",
                    ));
                }
                for (k, &(v, q)) in support.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::invariant(
                            format!("{path}.params.support[{k}]"),
                            format!("support value {v} is not finite"),
                        ));
                    }
                    if !(q.is_finite() && q >= 0.0) {
                        return Err(Error::invariant(
                            format!("{path}.params.support[{k}]"),
                            format!("probability {q} is negative or not finite"),
                        ));
                    }
                }
                let total: f64 = support.iter().map(|&(_, q)| q).sum();
                if (total - 1.0).abs() > PROB_SUM_TOL {
                    return Err(Error::invariant(
                        format!("{path}.params.support"),
                        format!("probabilities sum to {total}, expected 1"),
                    ));
                }
            }
            Family::Moments {
                mean,
                variance,
                abs_third,
                fourth,
                bounds,
            } => {
                let check = |name: &str, x: f64, ok: bool, why: &str| -> Result<()> {
                    if x.is_finite() && ok {
                        Ok(())
                    } else {
                        Err(Error::invariant(
                            format!("{path}.params.{name}"),
                            format!("{why}, got {x}"),
                        ))
                    }
                };
                check("mean", *mean, true, "mean must be finite")?;
                check("variance", *variance, *variance > 0.0, "variance must be > 0")?;
                check("abs_third", *abs_third, *abs_third >= 0.0, "abs_third must be >= 0")?;
                if let Some(m4) = fourth {
                    let floor = variance * variance;
                    check(
                        "fourth",
                        *m4,
                        *m4 >= floor * (1.0 - 1e-12),
                        "fourth central moment must be >= variance²",
                    )?;
                }
                if let Some((a, b)) = bounds {
                    if !(a.is_finite() && b.is_finite() && a < b && *mean >= *a && *mean <= *b) {
                        return Err(Error::invariant(
                            format!("{path}.params.support_bounds"),
                            format!("bounds [{a}, {b}] must be finite, ordered and contain the mean"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One group of identically distributed records.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    family: Family,
    count: u64,
    fitted: bool,
}

impl DistributionSpec {
    pub fn new(family: Family, count: u64) -> Result<Self> {
        Self::validated(family, count, false, "records")
    }

    pub fn bernoulli(p: f64, count: u64) -> Result<Self> {
        Self::new(Family::Bernoulli { p }, count)
    }

    pub fn discrete(support: Vec<(f64, f64)>, count: u64) -> Result<Self> {
        Self::new(Family::Discrete { support }, count)
    }

    /// Empirical pmf of a raw data column. The result is an estimate of the
    /// record law and is marked as fitted.
    pub fn fit_empirical(data: &[f64], count: u64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invariant("records.params.data", "empirical data is empty"));
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::invariant(
                "records.params.data",
                format!("data value {bad} is not finite"),
            ));
        }
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        let total = sorted.len() as f64;
        let mut support: Vec<(f64, f64)> = Vec::new();
        let mut run = 0usize;
        for (i, &v) in sorted.iter().enumerate() {
            run += 1;
            if i + 1 == sorted.len() || sorted[i + 1] != v {
                support.push((v, run as f64 / total));
                run = 0;
            }
        }
        Self::validated(Family::Discrete { support }, count, true, "records")
    }

    pub(crate) fn validated(family: Family, count: u64, fitted: bool, path: &str) -> Result<Self> {
        if count == 0 {
            return Err(Error::invariant(
                format!("{path}.count"),
                "count must be a positive integer",
            ));
        }
        family.validate(path)?;
        Ok(DistributionSpec {
            family,
            count,
            fitted,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// True when the law was estimated from raw data rather than declared.
    pub fn is_fitted(&self) -> bool {
        self.fitted
    }

    pub fn with_count(&self, count: u64) -> Result<Self> {
        Self::validated(self.family.clone(), count, self.fitted, "records")
    }

    pub fn moments(&self) -> MomentSummary {
        central_moments(self)
    }
}

/// Central moments of one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    /// E|X - μ|³
    pub abs_third_central: f64,
    /// E(X - μ)⁴; absent for moments-only records that did not declare it.
    pub fourth_central: Option<f64>,
}

impl MomentSummary {
    pub fn fourth(&self, what: &str) -> Result<f64> {
        self.fourth_central.ok_or_else(|| Error::InsufficientMoments {
            what: what.to_string(),
            moment: "fourth central moment",
        })
    }
}

pub fn central_moments(spec: &DistributionSpec) -> MomentSummary {
    match spec.family() {
        Family::Bernoulli { p } => {
            let q = 1.0 - p;
            let pq = p * q;
            MomentSummary {
                mean: *p,
                variance: pq,
                abs_third_central: pq * (q * q + p * p),
                fourth_central: Some(pq * (q * q * q + p * p * p)),
            }
        }
        Family::Discrete { support } => discrete_moments(support),
        Family::Moments {
            mean,
            variance,
            abs_third,
            fourth,
            ..
        } => MomentSummary {
            mean: *mean,
            variance: *variance,
            abs_third_central: *abs_third,
            fourth_central: *fourth,
        },
    }
}

fn discrete_moments(support: &[(f64, f64)]) -> MomentSummary {
    let mean: f64 = support.iter().map(|&(v, q)| q * v).sum();
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &(v, q) in support {
        let d = (v - mean).abs();
        let d2 = d * d;
        m2 += q * d2;
        m3 += q * d2 * d;
        m4 += q * d2 * d2;
    }
    MomentSummary {
        mean,
        variance: m2,
        abs_third_central: m3,
        fourth_central: Some(m4),
    }
}

/// Explicit joint law of a set of mutually dependent records.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencyBlock {
    indices: Vec<usize>,
    outcomes: Vec<(Vec<f64>, f64)>,
}

impl DependencyBlock {
    /// `outcomes` lists joint values (ordered like `indices`) with their probabilities.
    pub fn new(indices: Vec<usize>, outcomes: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let block = DependencyBlock { indices, outcomes };
        block.validate_shape("dependency_blocks")?;
        Ok(block)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn outcomes(&self) -> &[(Vec<f64>, f64)] {
        &self.outcomes
    }

    fn validate_shape(&self, path: &str) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::invariant(format!("{path}.indices"), "block is empty"));
        }
        let mut seen = self.indices.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invariant(
                format!("{path}.indices"),
                "block lists an index twice",
            ));
        }
        if self.outcomes.is_empty() {
            return Err(Error::invariant(format!("{path}.outcomes"), "no joint outcomes"));
        }
        for (k, (vals, q)) in self.outcomes.iter().enumerate() {
            if vals.len() != self.indices.len() {
                return Err(Error::invariant(
                    format!("{path}.outcomes[{k}]"),
                    format!("outcome has {} values for {} indices", vals.len(), self.indices.len()),
                ));
            }
            if vals.iter().any(|v| !v.is_finite()) || !(q.is_finite() && *q >= 0.0) {
                return Err(Error::invariant(
                    format!("{path}.outcomes[{k}]"),
                    "outcome values must be finite and probability non-negative",
                ));
            }
        }
        let total: f64 = self.outcomes.iter().map(|(_, q)| q).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::invariant(
                format!("{path}.probs"),
                format!("joint probabilities sum to {total}, expected 1"),
            ));
        }
        Ok(())
    }

    /// Marginal law of the `k`-th member as merged `(value, prob)` atoms.
    pub fn marginal(&self, k: usize) -> Vec<(f64, f64)> {
        let mut atoms: Vec<(f64, f64)> = self.outcomes.iter().map(|(v, q)| (v[k], *q)).collect();
        merge_atoms(&mut atoms);
        atoms
    }
}

/// Sorts atoms by value and merges equal values.
pub(crate) fn merge_atoms(atoms: &mut Vec<(f64, f64)>) {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for &(v, q) in atoms.iter() {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += q,
            _ => out.push((v, q)),
        }
    }
    *atoms = out;
}

/// The full data-vector model handed to the bounds and the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DataVectorSpec {
    records: Vec<DistributionSpec>,
    offsets: Vec<u64>,
    n: u64,
    sensitivity: f64,
    dependency_bound: u64,
    total_variance: f64,
    blocks: Vec<DependencyBlock>,
}

#[derive(Debug, Clone, Default)]
pub struct DataVectorBuilder {
    records: Vec<DistributionSpec>,
    sensitivity: Option<f64>,
    dependency_bound: u64,
    total_variance: Option<f64>,
    blocks: Vec<DependencyBlock>,
}

impl DataVectorBuilder {
    pub fn sensitivity(mut self, delta: f64) -> Self {
        self.sensitivity = Some(delta);
        self
    }

    pub fn dependency_bound(mut self, d: u64) -> Self {
        self.dependency_bound = d;
        self
    }

    pub fn total_variance(mut self, v: f64) -> Self {
        self.total_variance = Some(v);
        self
    }

    pub fn maybe_total_variance(mut self, v: Option<f64>) -> Self {
        self.total_variance = v;
        self
    }

    pub fn maybe_sensitivity(mut self, delta: Option<f64>) -> Self {
        self.sensitivity = delta;
        self
    }

    pub fn blocks(mut self, blocks: Vec<DependencyBlock>) -> Self {
        self.blocks = blocks;
        self
    }

    pub fn build(self) -> Result<DataVectorSpec> {
        if self.records.is_empty() {
            return Err(Error::invariant("records", "at least one record group is required"));
        }
        let mut offsets = Vec::with_capacity(self.records.len());
        let mut n = 0u64;
        for r in &self.records {
            offsets.push(n);
            n += r.count();
        }
        let d = self.dependency_bound;
        if d == 0 {
            return Err(Error::invariant("dependency_bound", "must be an integer >= 1"));
        }

        let sup_abs = sup_abs_value(&self.records);
        let sensitivity = match (self.sensitivity, sup_abs) {
            (Some(s), _) if !(s.is_finite() && s > 0.0) => {
                return Err(Error::invariant("sensitivity", format!("must be > 0, got {s}")));
            }
            (Some(s), Some(sup)) if s < sup => {
                return Err(Error::invariant(
                    "sensitivity",
                    format!("{s} is below the largest |value| {sup} a single record can contribute"),
                ));
            }
            (Some(s), _) => s,
            (None, Some(sup)) if sup > 0.0 => sup,
            (None, Some(_)) => {
                return Err(Error::invariant(
                    "sensitivity",
                    "all supports are {0}; sensitivity must be supplied",
                ));
            }
            (None, None) => {
                return Err(Error::invariant(
                    "sensitivity",
                    "required when some record has unbounded support",
                ));
            }
        };

        let summed: f64 = self
            .records
            .iter()
            .map(|r| r.count() as f64 * r.moments().variance)
            .sum();
        let total_variance = if d == 1 {
            match self.total_variance {
                Some(v) if (v - summed).abs() > TOTAL_VARIANCE_REL_TOL * summed.abs().max(v.abs()) => {
                    return Err(Error::invariant(
                        "total_variance",
                        format!("independent records sum to variance {summed}, config says {v}"),
                    ));
                }
                _ => summed,
            }
        } else {
            match self.total_variance {
                None => {
                    return Err(Error::invariant(
                        "total_variance",
                        "total_variance required when dependency_bound > 1",
                    ));
                }
                Some(v) if !(v.is_finite() && v > 0.0) => {
                    return Err(Error::invariant("total_variance", format!("must be > 0, got {v}")));
                }
                Some(v) => v,
            }
        };

        let spec = DataVectorSpec {
            records: self.records,
            offsets,
            n,
            sensitivity,
            dependency_bound: d,
            total_variance,
            blocks: self.blocks,
        };
        spec.validate_blocks()?;
        Ok(spec)
    }
}

fn sup_abs_value(records: &[DistributionSpec]) -> Option<f64> {
    let mut sup = 0.0f64;
    for r in records {
        let (a, b) = r.family().support_bounds()?;
        sup = sup.max(a.abs()).max(b.abs());
    }
    Some(sup)
}

impl DataVectorSpec {
    pub fn builder(records: Vec<DistributionSpec>) -> DataVectorBuilder {
        DataVectorBuilder {
            records,
            dependency_bound: 1,
            ..Default::default()
        }
    }

    /// Independent records with the given sensitivity.
    pub fn independent(records: Vec<DistributionSpec>, sensitivity: f64) -> Result<Self> {
        Self::builder(records).sensitivity(sensitivity).build()
    }

    pub fn records(&self) -> &[DistributionSpec] {
        &self.records
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn dependency_bound(&self) -> u64 {
        self.dependency_bound
    }

    /// Variance of the sum (derived for independent data, declared otherwise).
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn blocks(&self) -> &[DependencyBlock] {
        &self.blocks
    }

    /// First expanded index of group `g`.
    pub fn offset(&self, g: usize) -> u64 {
        self.offsets[g]
    }

    /// Group containing expanded record `index`.
    pub fn group_of(&self, index: u64) -> Option<usize> {
        if index >= self.n {
            return None;
        }
        Some(self.offsets.partition_point(|&o| o <= index) - 1)
    }

    pub fn sum_variance(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.count() as f64 * r.moments().variance)
            .sum()
    }

    pub fn sum_abs_third(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.count() as f64 * r.moments().abs_third_central)
            .sum()
    }

    pub fn sum_fourth(&self) -> Result<f64> {
        let mut total = 0.0;
        for (g, r) in self.records.iter().enumerate() {
            total += r.count() as f64 * r.moments().fourth(&format!("record group {g}"))?;
        }
        Ok(total)
    }

    /// Indices of record groups whose law was fitted from raw data.
    pub fn fitted_groups(&self) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_fitted())
            .map(|(g, _)| g)
            .collect()
    }

    fn validate_blocks(&self) -> Result<()> {
        let mut used = std::collections::HashSet::new();
        for (b, block) in self.blocks.iter().enumerate() {
            let path = format!("dependency_blocks[{b}]");
            block.validate_shape(&path)?;
            if block.indices.len() as u64 > self.dependency_bound {
                return Err(Error::invariant(
                    format!("{path}.indices"),
                    format!(
                        "block has {} records, above dependency_bound {}",
                        block.indices.len(),
                        self.dependency_bound
                    ),
                ));
            }
            for (k, &i) in block.indices.iter().enumerate() {
                let Some(g) = self.group_of(i as u64) else {
                    return Err(Error::invariant(
                        format!("{path}.indices[{k}]"),
                        format!("index {i} out of range for n = {}", self.n),
                    ));
                };
                if !used.insert(i) {
                    return Err(Error::invariant(
                        format!("{path}.indices[{k}]"),
                        format!("index {i} appears in more than one block"),
                    ));
                }
                if let Some(mut declared) = self.records[g].family().atoms() {
                    merge_atoms(&mut declared);
                    if !atoms_close(&declared, &block.marginal(k)) {
                        return Err(Error::invariant(
                            format!("{path}.outcomes"),
                            format!("marginal of index {i} disagrees with record group {g}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn atoms_close(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    let strip = |x: &[(f64, f64)]| -> Vec<(f64, f64)> {
        x.iter().copied().filter(|&(_, q)| q > BLOCK_MARGINAL_TOL).collect()
    };
    let (a, b) = (strip(a), strip(b));
    a.len() == b.len()
        && a.iter().zip(&b).all(|(x, y)| {
            (x.0 - y.0).abs() <= BLOCK_MARGINAL_TOL * x.0.abs().max(1.0)
                && (x.1 - y.1).abs() <= BLOCK_MARGINAL_TOL
        })
}

/// Adversary knowledge: dependency bound `D`, compromised fraction `γ`, and
/// optionally the exact compromised index set.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryModel {
    dependency_bound: u64,
    gamma: f64,
    compromised: Option<Vec<u64>>,
}

impl AdversaryModel {
    pub fn new(dependency_bound: u64, gamma: f64, compromised: Option<Vec<u64>>) -> Result<Self> {
        if dependency_bound == 0 {
            return Err(Error::invariant("dependency_bound", "must be an integer >= 1"));
        }
        if !(gamma.is_finite() && (0.0..1.0).contains(&gamma)) {
            return Err(Error::invariant("gamma", format!("must lie in [0, 1), got {gamma}")));
        }
        Ok(AdversaryModel {
            dependency_bound,
            gamma,
            compromised,
        })
    }

    pub fn dependency_bound(&self) -> u64 {
        self.dependency_bound
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn compromised(&self) -> Option<&[u64]> {
        self.compromised.as_deref()
    }

    /// Checks the model against a data vector of `n` records.
    pub fn validate_for(&self, n: u64) -> Result<()> {
        if let Some(set) = &self.compromised {
            let cap = compromised_count(self.gamma, n);
            if set.len() as u64 > cap {
                return Err(Error::invariant(
                    "compromised",
                    format!("{} indices exceed ⌈γ·n⌉ = {cap}", set.len()),
                ));
            }
            let mut sorted = set.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invariant("compromised", "index listed twice"));
            }
            if let Some(bad) = sorted.iter().find(|&&i| i >= n) {
                return Err(Error::invariant(
                    "compromised",
                    format!("index {bad} out of range for n = {n}"),
                ));
            }
        }
        if compromised_count(self.gamma, n) >= n {
            return Err(Error::invariant("gamma", "γ·n leaves no uncompromised record"));
        }
        Ok(())
    }
}

/// ⌈γ·n⌉, ignoring floating-point residue just above an integer.
pub fn compromised_count(gamma: f64, n: u64) -> u64 {
    let raw = gamma * n as f64;
    let rounded = raw.round();
    if (raw - rounded).abs() <= 1e-9 * raw.abs().max(1.0) {
        rounded as u64
    } else {
        raw.ceil() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn bernoulli_half_moments() {
        let m = DistributionSpec::bernoulli(0.5, 1).unwrap().moments();
        assert_eq!(m.mean, 0.5);
        assert_eq!(m.variance, 0.25);
        assert_eq!(m.abs_third_central, 0.125);
        assert_eq!(m.fourth_central, Some(0.0625));
    }

    #[test]
    fn bernoulli_point_two_matches_two_point_enumeration() {
        let m = DistributionSpec::bernoulli(0.2, 1).unwrap().moments();
        let e = discrete_moments(&[(0.0, 0.8), (1.0, 0.2)]);
        assert!(close(m.variance, 0.16, 1e-15));
        assert!(close(m.abs_third_central, 0.1088, 1e-15));
        assert!(close(m.fourth_central.unwrap(), 0.0832, 1e-15));
        assert!(close(m.abs_third_central, e.abs_third_central, 1e-15));
        assert!(close(m.fourth_central.unwrap(), e.fourth_central.unwrap(), 1e-15));
    }

    #[test]
    fn point_mass_has_zero_moments() {
        let m = DistributionSpec::discrete(vec![(0.0, 1.0)], 1).unwrap().moments();
        assert_eq!((m.mean, m.variance, m.abs_third_central), (0.0, 0.0, 0.0));
        assert_eq!(m.fourth_central, Some(0.0));
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(DistributionSpec::bernoulli(0.0, 1).is_err());
        assert!(DistributionSpec::bernoulli(1.0, 1).is_err());
        assert!(DistributionSpec::bernoulli(0.3, 0).is_err());
        let err = DistributionSpec::discrete(vec![(0.0, 0.5), (1.0, 0.49)], 1).unwrap_err();
        assert!(matches!(err, Error::Invariant { .. }));
        let bad_m4 = Family::Moments {
            mean: 0.0,
            variance: 2.0,
            abs_third: 1.0,
            fourth: Some(3.0),
            bounds: None,
        };
        assert!(DistributionSpec::new(bad_m4, 1).is_err());
    }

    #[test]
    fn missing_fourth_moment_is_reported() {
        let fam = Family::Moments {
            mean: 0.0,
            variance: 4.0,
            abs_third: 3.0,
            fourth: None,
            bounds: None,
        };
        let spec = DataVectorSpec::independent(vec![DistributionSpec::new(fam, 10).unwrap()], 30.0)
            .unwrap();
        assert!(matches!(
            spec.sum_fourth(),
            Err(Error::InsufficientMoments { .. })
        ));
    }

    #[test]
    fn empirical_fit_is_flagged() {
        let s = DistributionSpec::fit_empirical(&[1.0, 2.0, 2.0, 3.0], 4).unwrap();
        assert!(s.is_fitted());
        assert_eq!(
            s.family(),
            &Family::Discrete {
                support: vec![(1.0, 0.25), (2.0, 0.5), (3.0, 0.25)]
            }
        );
    }

    #[test]
    fn sensitivity_rules() {
        let recs = vec![DistributionSpec::discrete(vec![(-3.0, 0.5), (2.0, 0.5)], 5).unwrap()];
        let spec = DataVectorSpec::builder(recs.clone()).build().unwrap();
        assert_eq!(spec.sensitivity(), 3.0);
        assert!(DataVectorSpec::independent(recs, 2.5).is_err());
        let unbounded = Family::Moments {
            mean: 0.0,
            variance: 1.0,
            abs_third: 1.0,
            fourth: None,
            bounds: None,
        };
        let recs = vec![DistributionSpec::new(unbounded, 3).unwrap()];
        assert!(DataVectorSpec::builder(recs.clone()).build().is_err());
        assert!(DataVectorSpec::independent(recs, 1.0).is_ok());
    }

    #[test]
    fn total_variance_rules() {
        let recs = vec![DistributionSpec::bernoulli(0.5, 8).unwrap()];
        let spec = DataVectorSpec::builder(recs.clone()).build().unwrap();
        assert_eq!(spec.total_variance(), 2.0);
        assert!(DataVectorSpec::builder(recs.clone())
            .total_variance(2.5)
            .build()
            .is_err());
        let err = DataVectorSpec::builder(recs.clone())
            .dependency_bound(3)
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("total_variance required"));
        let dep = DataVectorSpec::builder(recs)
            .dependency_bound(3)
            .total_variance(5.0)
            .build()
            .unwrap();
        assert_eq!(dep.total_variance(), 5.0);
    }

    #[test]
    fn block_checks() {
        let recs = vec![DistributionSpec::bernoulli(0.5, 6).unwrap()];
        let joint = vec![(vec![0.0, 0.0, 0.0], 0.5), (vec![1.0, 1.0, 1.0], 0.5)];
        let ok = DependencyBlock::new(vec![0, 1, 2], joint.clone()).unwrap();
        assert!(DataVectorSpec::builder(recs.clone())
            .dependency_bound(3)
            .total_variance(4.5)
            .blocks(vec![ok.clone()])
            .build()
            .is_ok());
        // too large for D = 2
        assert!(DataVectorSpec::builder(recs.clone())
            .dependency_bound(2)
            .total_variance(4.5)
            .blocks(vec![ok])
            .build()
            .is_err());
        // marginal mismatch
        let skew = vec![(vec![0.0, 0.0, 0.0], 0.7), (vec![1.0, 1.0, 1.0], 0.3)];
        let bad = DependencyBlock::new(vec![0, 1, 2], skew).unwrap();
        assert!(DataVectorSpec::builder(recs)
            .dependency_bound(3)
            .total_variance(4.5)
            .blocks(vec![bad])
            .build()
            .is_err());
    }

    #[test]
    fn group_lookup() {
        let recs = vec![
            DistributionSpec::bernoulli(0.5, 3).unwrap(),
            DistributionSpec::bernoulli(0.2, 2).unwrap(),
        ];
        let spec = DataVectorSpec::independent(recs, 1.0).unwrap();
        assert_eq!(spec.n(), 5);
        assert_eq!(spec.group_of(0), Some(0));
        assert_eq!(spec.group_of(2), Some(0));
        assert_eq!(spec.group_of(3), Some(1));
        assert_eq!(spec.group_of(5), None);
    }

    #[test]
    fn compromised_count_ignores_float_residue() {
        assert_eq!(compromised_count(0.3, 10), 3);
        assert_eq!(compromised_count(0.25, 12), 3);
        assert_eq!(compromised_count(0.31, 10), 4);
        assert_eq!(compromised_count(0.0, 10), 0);
    }

    #[test]
    fn adversary_validation() {
        assert!(AdversaryModel::new(1, 1.0, None).is_err());
        let adv = AdversaryModel::new(1, 0.2, Some(vec![0, 1, 2])).unwrap();
        assert!(adv.validate_for(10).is_err());
        let adv = AdversaryModel::new(1, 0.2, Some(vec![0, 9])).unwrap();
        assert!(adv.validate_for(10).is_ok());
        assert!(adv.validate_for(9).is_err());
    }
}
