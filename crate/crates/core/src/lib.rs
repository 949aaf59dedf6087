//! Explicit `(ε, δ)` noiseless-privacy bounds for the sum of a random data
//! vector, with an exact oracle that measures the true δ on small instances.

pub mod adversary;
pub mod binomial;
pub mod bound;
pub mod config;
pub mod curves;
pub mod dependent;
pub mod error;
pub mod independent;
pub mod model;
pub mod numfmt;
pub mod oracle;
pub mod plan;
pub mod synergy;

pub use bound::{BerryEsseenConstant, BoundConstants, BoundSource, Diagnostic, PrivacyBound, SteinConstant};
pub use error::{Error, Result};
pub use model::{AdversaryModel, DataVectorSpec, DependencyBlock, DistributionSpec, Family, MomentSummary};
