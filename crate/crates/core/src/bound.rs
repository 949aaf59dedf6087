//! The `(ε, δ)` result type, the diagnostics attached to it, and the tunable
//! constants of the normal-approximation bounds.

use crate::numfmt::sig12;
use serde::Serialize;
use std::fmt;

/// Which bound produced a [`PrivacyBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    /// i.i.d. Bernoulli data, Chernoff tail plus consecutive pmf ratio.
    BinomialChernoff,
    /// Independent data via the Berry–Esseen normal approximation.
    BerryEsseen,
    /// Locally dependent data via Stein's method.
    Stein,
    /// Berry–Esseen bound with a compromised subset removed.
    BerryEsseenCompromised,
    /// Stein bound with a compromised subset removed.
    SteinCompromised,
    /// Plain Laplace mechanism, no distributional assumptions.
    Laplace,
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundSource::BinomialChernoff => "binomial-chernoff",
            BoundSource::BerryEsseen => "berry-esseen",
            BoundSource::Stein => "stein",
            BoundSource::BerryEsseenCompromised => "berry-esseen-compromised",
            BoundSource::SteinCompromised => "stein-compromised",
            BoundSource::Laplace => "laplace",
        };
        f.write_str(s)
    }
}

/// Conditions a report must surface whenever they are triggered.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Diagnostic {
    /// δ ≥ 1: formally valid, carries no information.
    VacuousDelta { delta: f64 },
    /// The Gaussian-mechanism step needs σ·ε/Δ > sqrt(2 ln(1.25/δ₂)); it does not hold here.
    GaussianHypothesisUnmet { ratio: f64, required: f64 },
    /// Stein constant in use; the alternative is selectable.
    SteinConstant { k: u32, alternative: u32 },
    /// The compromised independent bound keeps the 4/(5√n) tail at the full n.
    TailUsesFullN { n: u64, uncompromised: u64 },
    /// A record law was estimated from raw data.
    FittedDistribution { group: usize },
    /// Sampling used a two-point surrogate for a moments-only record.
    SurrogateSampling { group: usize },
    /// The uncompromised records carry no variance; only standard DP applies.
    StandardDpCollapse,
    /// Added noise improved ε; δ is the unmodified data-only value.
    DeltaUnchangedByNoise,
}

impl Diagnostic {
    /// Diagnostics that mean a proof step's hypothesis is not met.
    pub fn breaks_precondition(&self) -> bool {
        matches!(self, Diagnostic::GaussianHypothesisUnmet { .. })
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::VacuousDelta { delta } => {
                write!(f, "vacuous δ: {} >= 1, the guarantee carries no information", sig12(*delta))
            }
            Diagnostic::GaussianHypothesisUnmet { ratio, required } => write!(
                f,
                "gaussian step hypothesis unmet: σ·ε/Δ = {} is not above sqrt(2 ln(1.25/δ₂)) = {}",
                sig12(*ratio),
                sig12(*required)
            ),
            Diagnostic::SteinConstant { k, alternative } => write!(
                f,
                "Stein constant K = {k} under the square root (K = {alternative} selectable via --stein-k)"
            ),
            Diagnostic::TailUsesFullN { n, uncompromised } => write!(
                f,
                "independent compromised bound uses the 4/(5√n) tail with n = {n}; the dependent variant uses the {uncompromised} uncompromised records"
            ),
            Diagnostic::FittedDistribution { group } => write!(
                f,
                "record group {group} was fitted from raw data: estimate only, not rigorous"
            ),
            Diagnostic::SurrogateSampling { group } => write!(
                f,
                "record group {group} has moments only; sampled as the two-point law μ ± σ"
            ),
            Diagnostic::StandardDpCollapse => f.write_str(
                "no adversarial uncertainty: the uncompromised sum has zero variance, falling back to standard DP"
            ),
            Diagnostic::DeltaUnchangedByNoise => {
                f.write_str("added noise lowers ε only; δ is the data-only value")
            }
        }
    }
}

/// An `(ε, δ)` pair. δ is reported raw; values ≥ 1 are flagged, never clamped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivacyBound {
    pub epsilon: f64,
    pub delta: f64,
    pub source: BoundSource,
    pub preconditions_ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl PrivacyBound {
    pub(crate) fn new(epsilon: f64, delta: f64, source: BoundSource) -> Self {
        let mut bound = PrivacyBound {
            epsilon,
            delta,
            source,
            preconditions_ok: true,
            diagnostics: Vec::new(),
        };
        if delta >= 1.0 {
            bound.push(Diagnostic::VacuousDelta { delta });
        }
        bound
    }

    pub fn is_vacuous(&self) -> bool {
        self.delta >= 1.0
    }

    pub(crate) fn push(&mut self, d: Diagnostic) {
        if d.breaks_precondition() {
            self.preconditions_ok = false;
        }
        self.diagnostics.push(d);
    }
}

/// Berry–Esseen constant `C` in sup|F_n − Φ| ≤ C·Σρ/(Σσ²)^{3/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BerryEsseenConstant {
    /// C = 0.56, giving the 1.12 factor of the published bound.
    #[default]
    Rounded,
    /// C = 0.5591.
    Tight,
}

impl BerryEsseenConstant {
    pub fn single(self) -> f64 {
        match self {
            BerryEsseenConstant::Rounded => 0.56,
            BerryEsseenConstant::Tight => 0.5591,
        }
    }

    /// The 2C factor multiplying the moment ratio in δ.
    pub fn doubled(self) -> f64 {
        match self {
            BerryEsseenConstant::Rounded => 1.12,
            BerryEsseenConstant::Tight => 1.1182,
        }
    }
}

/// Constant `K` in the D^{3/2}·√K/(σ²√π) term of the Stein bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum SteinConstant {
    #[default]
    K28,
    K26,
}

impl SteinConstant {
    pub fn k(self) -> u32 {
        match self {
            SteinConstant::K28 => 28,
            SteinConstant::K26 => 26,
        }
    }

    pub fn alternative(self) -> u32 {
        match self {
            SteinConstant::K28 => 26,
            SteinConstant::K26 => 28,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct BoundConstants {
    pub berry_esseen: BerryEsseenConstant,
    pub stein: SteinConstant,
}

/// The Gaussian-mechanism tail δ₂ = 4/(5√n), fixed rather than optimized.
pub fn gaussian_tail(n: u64) -> f64 {
    4.0 / (5.0 * (n as f64).sqrt())
}

/// ε = sqrt(Δ²·ln(n) / variance), shared by every normal-approximation route.
pub(crate) fn normal_route_epsilon(sensitivity: f64, n: u64, variance: f64) -> f64 {
    (sensitivity * sensitivity * (n as f64).ln() / variance).sqrt()
}
