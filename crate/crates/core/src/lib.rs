//! Certified exponential bounds for the tail of the supremum of an
//! inhomogeneous random walk, Lundberg-type bounds for ruin in inhomogeneous
//! renewal risk models, and Monte Carlo checks that the bounds dominate.
//!
//! Modules, bottom-up:
//!
//! * [`dists`]: symbolic distributions and their moment functionals.
//! * [`seqmodel`]: sequences of distributions indexed by `i ≥ 1`, Cesàro
//!   averages and certified suprema of those averages.
//! * [`bounds`]: feasibility, the tail-bound constants, optimization over δ,
//!   and the direct Chernoff series.
//! * [`riskmodel`]: renewal risk models, the separate-sequence constants,
//!   the classical adjustment coefficient.
//! * [`mc`]: seeded, parallel Monte Carlo estimators with exact binomial
//!   intervals, and domination reports.
//! * [`reference`]: four reference models with their published constants.

pub mod bounds;
pub mod dists;
pub mod mc;
pub mod numerics;
pub mod reference;
pub mod riskmodel;
pub mod seqmodel;

pub use bounds::{BoundCertificate, TheoremConstants};
pub use dists::{DistributionSpec, Functional, FunctionalKind};
pub use seqmodel::{AverageCertificate, SequenceSpec};
