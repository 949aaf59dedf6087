use crate::error::{Error, Result};
use std::collections::HashMap;

/// Grid spacing used to canonicalize real support values.
pub const DEFAULT_RESOLUTION: f64 = 1e-9;
/// Largest support (or dense convolution buffer) the exact oracle accepts.
pub const DEFAULT_SUPPORT_CAP: usize = 2_000_000;

/// Finite-support pmf with values snapped to a fixed grid.
///
/// Values are stored as integer multiples of `resolution`, strictly
/// increasing, so sums of values compare exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePmf {
    resolution: f64,
    ticks: Vec<i64>,
    probs: Vec<f64>,
}

fn quantize(v: f64, resolution: f64) -> Result<i64> {
    let t = (v / resolution).round();
    if !t.is_finite() || t.abs() > 4.0e18 {
        return Err(Error::Domain(format!(
            "value {v} does not fit the oracle grid at resolution {resolution}"
        )));
    }
    Ok(t as i64)
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl DiscretePmf {
    /// Builds a pmf from `(value, prob)` pairs, merging values that land on
    /// the same grid point. Probabilities must be non-negative and sum to 1
    /// within 1e-12.
    pub fn from_atoms(atoms: &[(f64, f64)], resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Domain(format!("resolution must be positive, got {resolution}")));
        }
        let mut q: Vec<(i64, f64)> = Vec::with_capacity(atoms.len());
        for &(v, p) in atoms {
            if !(p.is_finite() && p >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("bad atom ({v}, {p})")));
            }
            q.push((quantize(v, resolution)?, p));
        }
        let total: f64 = q.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self::from_ticks(q, resolution))
    }

    pub fn point(value: f64, resolution: f64) -> Result<Self> {
        Self::from_atoms(&[(value, 1.0)], resolution)
    }

    fn from_ticks(mut q: Vec<(i64, f64)>, resolution: f64) -> Self {
        q.sort_unstable_by_key(|a| a.0);
        let mut ticks: Vec<i64> = Vec::with_capacity(q.len());
        let mut probs: Vec<f64> = Vec::with_capacity(q.len());
        for (t, p) in q {
            if ticks.last() == Some(&t) {
                *probs.last_mut().unwrap() += p;
            } else {
                ticks.push(t);
                probs.push(p);
            }
        }
        DiscretePmf {
            resolution,
            ticks,
            probs,
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `(value, prob)` atoms in increasing value order.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ticks
            .iter()
            .zip(&self.probs)
            .map(|(&t, &p)| (t as f64 * self.resolution, p))
    }

    /// Probability of the grid point nearest `value`.
    pub fn prob_at(&self, value: f64) -> f64 {
        let Ok(t) = quantize(value, self.resolution) else {
            return 0.0;
        };
        match self.ticks.binary_search(&t) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    /// Law of the sum of two independent variables.
    pub fn convolve(&self, other: &DiscretePmf, cap: usize) -> Result<DiscretePmf> {
        assert_eq!(self.resolution, other.resolution, "mixed oracle grids");
        if self.is_empty() || other.is_empty() {
            return Ok(DiscretePmf {
                resolution: self.resolution,
                ticks: Vec::new(),
                probs: Vec::new(),
            });
        }
        let (a, b) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let a0 = a.ticks[0];
        let b0 = b.ticks[0];
        let mut step = 0i64;
        for &t in a.ticks.iter().skip(1) {
            step = gcd(step, t - a0);
        }
        for &t in b.ticks.iter().skip(1) {
            step = gcd(step, t - b0);
        }
        let step = step.max(1);
        let span_a = (a.ticks[a.len() - 1] - a0) / step;
        let span_b = (b.ticks[b.len() - 1] - b0) / step;
        let dense_len = span_a as u128 + span_b as u128 + 1;

        let q: Vec<(i64, f64)> = if dense_len <= cap as u128 {
            let mut buf = vec![0.0f64; dense_len as usize];
            let ia: Vec<usize> = a.ticks.iter().map(|&t| ((t - a0) / step) as usize).collect();
            for (&tb, &pb) in b.ticks.iter().zip(&b.probs) {
                let off = ((tb - b0) / step) as usize;
                for (&i, &pa) in ia.iter().zip(&a.probs) {
                    buf[i + off] += pa * pb;
                }
            }
            buf.into_iter()
                .enumerate()
                .filter(|&(_, p)| p > 0.0)
                .map(|(i, p)| (a0 + b0 + i as i64 * step, p))
                .collect()
        } else {
            let mut acc: HashMap<i64, f64> = HashMap::new();
            for (&tb, &pb) in b.ticks.iter().zip(&b.probs) {
                for (&ta, &pa) in a.ticks.iter().zip(&a.probs) {
                    *acc.entry(ta + tb).or_insert(0.0) += pa * pb;
                }
                if acc.len() > cap {
                    return Err(Error::OracleTooLarge {
                        points: acc.len(),
                        cap,
                    });
                }
            }
            acc.into_iter().filter(|&(_, p)| p > 0.0).collect()
        };
        if q.len() > cap {
            return Err(Error::OracleTooLarge {
                points: q.len(),
                cap,
            });
        }
        Ok(Self::from_ticks(q, self.resolution))
    }

    /// Push-forward through a deterministic map on values.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<DiscretePmf> {
        let mut q = Vec::with_capacity(self.len());
        for (v, p) in self.atoms() {
            q.push((quantize(f(v), self.resolution)?, p));
        }
        Ok(Self::from_ticks(q, self.resolution))
    }

    /// Law of X + c.
    pub fn shift(&self, c: f64) -> Result<DiscretePmf> {
        let dc = quantize(c, self.resolution)?;
        Ok(DiscretePmf {
            resolution: self.resolution,
            ticks: self.ticks.iter().map(|t| t + dc).collect(),
            probs: self.probs.clone(),
        })
    }
}

/// Σ_x max(p(x) − e^ε·q(x), 0) over the union of both supports.
pub fn hockey_stick_delta(p: &DiscretePmf, q: &DiscretePmf, epsilon: f64) -> f64 {
    assert_eq!(p.resolution, q.resolution, "mixed oracle grids");
    let scale = epsilon.exp();
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0.0;
    while i < p.len() {
        while j < q.len() && q.ticks[j] < p.ticks[i] {
            j += 1;
        }
        let qx = if j < q.len() && q.ticks[j] == p.ticks[i] {
            q.probs[j]
        } else {
            0.0
        };
        let d = p.probs[i] - scale * qx;
        if d > 0.0 {
            total += d;
        }
        i += 1;
    }
    total
}
