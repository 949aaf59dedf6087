//! Sampling estimate of δ for instances too large to enumerate.
//!
//! Sums are drawn per adjacency case and histogrammed on a shared
//! Freedman–Diaconis grid. The hockey-stick divergence on the histogram is
//! cross-fitted: the worst set comes from one half of the draws and is scored
//! on the other. Coarsening and a mis-chosen set bias it down, the max over
//! cases and directions biases it up. It is never used to certify a bound.

use crate::bound::Diagnostic;
use crate::error::{Error, Result};
use crate::model::{DataVectorSpec, DistributionSpec, Family};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

pub const MIN_SAMPLES: u64 = 10_000;
const CHUNK: u64 = 2048;
const BOOTSTRAP_REPLICATES: usize = 200;
const BOOTSTRAP_STREAM: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Half-width of the 95% percentile-bootstrap interval.
    pub ci95: f64,
    pub samples: u64,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
enum Law {
    Bernoulli(f64),
    Atoms(Vec<(f64, f64)>),
}

#[derive(Debug, Clone)]
enum Part {
    Iid { law: Law, count: u64 },
    /// Outcome sums of a dependency block with cumulative probabilities.
    Joint { sums: Vec<f64>, cumulative: Vec<f64> },
}

impl Part {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Part::Iid { count: 0, .. } => 0.0,
            Part::Iid {
                law: Law::Bernoulli(p),
                count,
            } => draw_binomial(rng, *count, *p) as f64,
            Part::Iid {
                law: Law::Atoms(atoms),
                count,
            } => {
                let mut left = *count;
                let mut mass = 1.0;
                let mut total = 0.0;
                for (k, &(v, q)) in atoms.iter().enumerate() {
                    if left == 0 {
                        break;
                    }
                    let x = if k + 1 == atoms.len() || mass <= q {
                        left
                    } else {
                        draw_binomial(rng, left, q / mass)
                    };
                    total += v * x as f64;
                    left -= x;
                    mass -= q;
                }
                total
            }
            Part::Joint { sums, cumulative } => {
                let u: f64 = rng.random();
                let k = cumulative.partition_point(|&c| c <= u).min(sums.len() - 1);
                sums[k]
            }
        }
    }
}

fn draw_binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    Binomial::new(n, p.clamp(0.0, 1.0))
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

fn law_of(rec: &DistributionSpec, group: usize, diags: &mut Vec<Diagnostic>) -> Law {
    match rec.family() {
        Family::Bernoulli { p } => Law::Bernoulli(*p),
        Family::Discrete { support } => Law::Atoms(support.clone()),
        Family::Moments { mean, variance, .. } => {
            let d = Diagnostic::SurrogateSampling { group };
            if !diags.contains(&d) {
                diags.push(d);
            }
            let s = variance.sqrt();
            Law::Atoms(vec![(mean - s, 0.5), (mean + s, 0.5)])
        }
    }
}

fn joint(outcomes: &[(Vec<f64>, f64)], skip: Option<usize>) -> Part {
    let mut sums = Vec::with_capacity(outcomes.len());
    let mut cumulative = Vec::with_capacity(outcomes.len());
    let mut acc = 0.0;
    for (vals, p) in outcomes {
        acc += p;
        sums.push(
            vals.iter()
                .enumerate()
                .filter(|&(k, _)| Some(k) != skip)
                .map(|(_, v)| v)
                .sum(),
        );
        cumulative.push(acc);
    }
    Part::Joint { sums, cumulative }
}

/// Base configuration followed by one configuration per adjacency case.
fn configurations(
    spec: &DataVectorSpec,
    insert: Option<&DistributionSpec>,
    diags: &mut Vec<Diagnostic>,
) -> Vec<Vec<Part>> {
    let mut in_block = vec![0u64; spec.records().len()];
    for b in spec.blocks() {
        for &i in b.indices() {
            in_block[spec.group_of(i as u64).expect("validated block index")] += 1;
        }
    }
    let mut base = Vec::new();
    let mut group_parts = Vec::new();
    for (g, rec) in spec.records().iter().enumerate() {
        let count = rec.count() - in_block[g];
        if count > 0 {
            group_parts.push(base.len());
            base.push(Part::Iid {
                law: law_of(rec, g, diags),
                count,
            });
        }
    }
    let mut block_parts = Vec::new();
    for b in spec.blocks() {
        block_parts.push(base.len());
        base.push(joint(b.outcomes(), None));
    }

    let mut configs = vec![base.clone()];
    for &j in &group_parts {
        let mut c = base.clone();
        if let Part::Iid { count, .. } = &mut c[j] {
            *count -= 1;
        }
        configs.push(c);
    }
    for (b, &j) in spec.blocks().iter().zip(&block_parts) {
        for k in 0..b.indices().len() {
            let mut c = base.clone();
            c[j] = joint(b.outcomes(), Some(k));
            configs.push(c);
        }
    }
    let (rec, group) = match insert {
        Some(r) => (r, usize::MAX),
        None => (&spec.records()[0], 0),
    };
    let mut c = base;
    c.push(Part::Iid {
        law: law_of(rec, group, diags),
        count: 1,
    });
    configs.push(c);
    configs
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_sums(parts: &[Part], samples: u64, seed: u64, case: u64) -> Vec<f64> {
    let chunks = samples.div_ceil(CHUNK);
    let pieces: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, (case << 32) | c);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .map(|_| parts.iter().map(|p| p.sample(&mut rng)).sum())
                .collect()
        })
        .collect();
    pieces.concat()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Two samples binned on a common Freedman–Diaconis grid.
struct Binned {
    p: Vec<u32>,
    q: Vec<u32>,
    bins: usize,
}

impl Binned {
    fn new(a: &[f64], b: &[f64]) -> Binned {
        let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        pooled.sort_by(f64::total_cmp);
        let lo = pooled[0];
        let range = pooled[pooled.len() - 1] - lo;
        let iqr = quantile(&pooled, 0.75) - quantile(&pooled, 0.25);
        let mut h = 2.0 * iqr / (pooled.len() as f64).cbrt();
        if h.is_nan() || h <= 0.0 {
            h = if range > 0.0 {
                range / (pooled.len() as f64).sqrt()
            } else {
                1.0
            };
        }
        let id = |x: f64| ((x - lo) / h).floor() as i64;
        let mut keys: Vec<i64> = pooled.iter().map(|&x| id(x)).collect();
        keys.dedup();
        let index = |x: f64| keys.binary_search(&id(x)).expect("bin present") as u32;
        Binned {
            p: a.iter().map(|&x| index(x)).collect(),
            q: b.iter().map(|&x| index(x)).collect(),
            bins: keys.len(),
        }
    }

    fn counts(&self, idx: &[u32]) -> Vec<f64> {
        let mut c = vec![0.0; self.bins];
        for &i in idx {
            c[i as usize] += 1.0;
        }
        let total = idx.len() as f64;
        c.iter_mut().for_each(|x| *x /= total);
        c
    }

    /// Cross-fitted hockey-stick estimate: the worst set is picked on one half
    /// of each sample and its mass difference measured on the other half, in
    /// both fold orders and both directions.
    fn two_sided(&self, p_idx: &[u32], q_idx: &[u32], scale: f64) -> f64 {
        let (pa, pb) = p_idx.split_at(p_idx.len() / 2);
        let (qa, qb) = q_idx.split_at(q_idx.len() / 2);
        let (pa, pb, qa, qb) = (self.counts(pa), self.counts(pb), self.counts(qa), self.counts(qb));
        let fold = |p1: &[f64], q1: &[f64], p2: &[f64], q2: &[f64]| {
            let (mut fwd, mut bwd) = (0.0, 0.0);
            for x in 0..self.bins {
                if p1[x] > scale * q1[x] {
                    fwd += p2[x] - scale * q2[x];
                }
                if q1[x] > scale * p1[x] {
                    bwd += q2[x] - scale * p2[x];
                }
            }
            (fwd, bwd)
        };
        let (f1, b1) = fold(&pa, &qa, &pb, &qb);
        let (f2, b2) = fold(&pb, &qb, &pa, &qa);
        (0.5 * (f1 + f2)).max(0.5 * (b1 + b2)).max(0.0)
    }
}

fn positions(len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..len).map(|_| rng.random_range(0..len)).collect()
}

/// Histogram estimate of the tight δ at `epsilon`, max over adjacency cases
/// and both directions, with a 95% bootstrap half-width. Deterministic in
/// `seed` regardless of thread count.
pub fn mc_estimate_delta(
    spec: &DataVectorSpec,
    epsilon: f64,
    insert: Option<&DistributionSpec>,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::invariant(
            "samples",
            format!("need at least {MIN_SAMPLES} samples, got {samples}"),
        ));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::Domain(format!("ε must be >= 0, got {epsilon}")));
    }
    let mut diagnostics = Vec::new();
    let configs = configurations(spec, insert, &mut diagnostics);
    let draws: Vec<Vec<f64>> = configs
        .iter()
        .enumerate()
        .map(|(k, parts)| draw_sums(parts, samples, seed, k as u64))
        .collect();
    let scale = epsilon.exp();
    let pairs: Vec<Binned> = draws[1..].iter().map(|d| Binned::new(&draws[0], d)).collect();
    let estimate = pairs
        .iter()
        .map(|b| b.two_sided(&b.p, &b.q, scale))
        .fold(0.0, f64::max);

    let mut reps: Vec<f64> = (0..BOOTSTRAP_REPLICATES as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, BOOTSTRAP_STREAM | r);
            // The base sample is shared by every pair, so resample it once.
            let base = positions(draws[0].len(), &mut rng);
            pairs
                .iter()
                .map(|b| {
                    let p: Vec<u32> = base.iter().map(|&i| b.p[i]).collect();
                    let q: Vec<u32> = positions(b.q.len(), &mut rng).into_iter().map(|i| b.q[i]).collect();
                    b.two_sided(&p, &q, scale)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    reps.sort_by(f64::total_cmp);
    let mid = quantile(&reps, 0.5);
    let ci95 = (quantile(&reps, 0.975) - mid).max(mid - quantile(&reps, 0.025));
    Ok(McEstimate {
        estimate,
        ci95,
        samples,
        diagnostics,
    })
}
