//! Sequences `i ↦ ξᵢ` of independent, non-identically distributed variables.
//!
//! A [`SequenceSpec`] carries enough structure (eventual periodicity, or a
//! two-point weighted family whose functionals are monotone in `i`) for the
//! supremum of Cesàro averages over an infinite index range to be computed
//! from finitely many values. See [`certify`] for the arguments.

mod certify;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dists::{DistError, DistributionSpec, Functional, FunctionalKind};
use crate::numerics::CompensatedSum;

pub use certify::{derive_constants, suggest_b, AttainedAt, AverageCertificate, DerivedConstants};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("invalid sequence: {0}")]
    Invalid(String),
    #[error("index must be at least 1")]
    ZeroIndex,
    #[error("{functional} is infinite at index {index}")]
    Infinite { functional: String, index: usize },
    #[error("values of {functional} are not monotone after index {index}: f({index}) = {left}, f({next}) = {right}", next = index + 1)]
    NonMonotone {
        functional: String,
        index: usize,
        left: f64,
        right: f64,
    },
    #[error("supremum of averages of {functional} over n >= {b} cannot be certified: sequence has no declared structure or limit")]
    CertificateOpen { functional: String, b: usize },
    #[error("condition (i) fails: sup over n >= {b} of the average mean is {sup_mean} (must be negative)")]
    NonNegativeDrift { b: usize, sup_mean: f64 },
    #[error("exponential moment {functional} is infinite (h too large)")]
    InfiniteMoment { functional: String },
    #[error("no b <= {horizon} with negative supremum of average means")]
    NoNegativeDrift { horizon: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Weight `numerator / (i + offset)` of the perturbation at index `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicWeight {
    pub numerator: f64,
    pub offset: f64,
}

impl HarmonicWeight {
    pub fn at(&self, i: usize) -> f64 {
        self.numerator / (i as f64 + self.offset)
    }
}

/// `ξᵢ ~ (1 − w(i))·base + w(i)·perturbation` with `w(i)` decreasing to 0.
///
/// Every functional is affine in `w(i)`, hence monotone in `i` with limit
/// equal to its value on `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPair {
    pub base: DistributionSpec,
    pub perturbation: DistributionSpec,
    pub weight: HarmonicWeight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "snake_case")]
pub enum SequenceStructure {
    /// `preperiod[0..P]` for `i ≤ P`, then `cycle` repeated.
    EventuallyPeriodic {
        #[serde(default)]
        preperiod: Vec<DistributionSpec>,
        cycle: Vec<DistributionSpec>,
    },
    /// `prefix[0..P]` for `i ≤ P`, then the weighted family at the global index `i`.
    Parametric {
        #[serde(default)]
        prefix: Vec<DistributionSpec>,
        family: WeightedPair,
    },
    /// `minuend(i) − scale·subtrahend(i)` with no structure of its own.
    Paired {
        minuend: Box<SequenceSpec>,
        scale: f64,
        subtrahend: Box<SequenceSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Slot {
    Prefix(usize),
    Cycle(usize),
    Base,
    Perturbation,
    Index(usize),
}

type KindKey = (u8, u64);

#[derive(Debug, Default)]
struct Cache {
    values: RwLock<HashMap<(KindKey, Slot), f64>>,
    prefix_sums: RwLock<HashMap<Vec<KindKey>, Vec<f64>>>,
}

/// A rule `i ↦ DistributionSpec` for `i ≥ 1` plus an evaluation horizon `N₀`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SequenceDef", into = "SequenceDef")]
pub struct SequenceSpec {
    structure: SequenceStructure,
    horizon: usize,
    cache: Arc<Cache>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SequenceDef {
    horizon: usize,
    #[serde(flatten)]
    structure: SequenceStructure,
}

impl TryFrom<SequenceDef> for SequenceSpec {
    type Error = SeqError;
    fn try_from(def: SequenceDef) -> Result<Self, SeqError> {
        SequenceSpec::new(def.structure, def.horizon)
    }
}

impl From<SequenceSpec> for SequenceDef {
    fn from(s: SequenceSpec) -> Self {
        SequenceDef {
            horizon: s.horizon,
            structure: s.structure,
        }
    }
}

impl PartialEq for SequenceSpec {
    fn eq(&self, other: &Self) -> bool {
        self.horizon == other.horizon && self.structure == other.structure
    }
}

impl SequenceSpec {
    pub fn new(structure: SequenceStructure, horizon: usize) -> Result<Self, SeqError> {
        let spec = Self {
            structure,
            horizon,
            cache: Arc::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn periodic(
        preperiod: Vec<DistributionSpec>,
        cycle: Vec<DistributionSpec>,
        horizon: usize,
    ) -> Result<Self, SeqError> {
        Self::new(SequenceStructure::EventuallyPeriodic { preperiod, cycle }, horizon)
    }

    /// The same distribution at every index.
    pub fn iid(dist: DistributionSpec, horizon: usize) -> Result<Self, SeqError> {
        Self::periodic(Vec::new(), vec![dist], horizon)
    }

    pub fn parametric(prefix: Vec<DistributionSpec>, family: WeightedPair, horizon: usize) -> Result<Self, SeqError> {
        Self::new(SequenceStructure::Parametric { prefix, family }, horizon)
    }

    pub fn paired(minuend: SequenceSpec, scale: f64, subtrahend: SequenceSpec) -> Result<Self, SeqError> {
        let horizon = minuend.horizon.max(subtrahend.horizon);
        Self::new(
            SequenceStructure::Paired {
                minuend: Box::new(minuend),
                scale,
                subtrahend: Box::new(subtrahend),
            },
            horizon,
        )
    }

    pub fn structure(&self) -> &SequenceStructure {
        &self.structure
    }

    /// Evaluation horizon `N₀`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn with_horizon(&self, horizon: usize) -> Result<Self, SeqError> {
        Self::new(self.structure.clone(), horizon)
    }

    fn validate(&self) -> Result<(), SeqError> {
        if self.horizon == 0 {
            return Err(SeqError::Invalid("horizon must be at least 1".into()));
        }
        match &self.structure {
            SequenceStructure::EventuallyPeriodic { preperiod, cycle } => {
                if cycle.is_empty() {
                    return Err(SeqError::Invalid("cycle must be nonempty".into()));
                }
                let need = preperiod.len() + 2 * cycle.len();
                if self.horizon < need {
                    return Err(SeqError::Invalid(format!(
                        "horizon {} must be at least preperiod + 2·cycle = {need}",
                        self.horizon
                    )));
                }
                for d in preperiod.iter().chain(cycle) {
                    d.validate()?;
                }
            }
            SequenceStructure::Parametric { prefix, family } => {
                let first = prefix.len() + 1;
                let w = family.weight;
                if !(w.numerator > 0.0 && w.numerator.is_finite() && w.offset.is_finite()) {
                    return Err(SeqError::Invalid(format!("invalid weight rule {w:?}")));
                }
                if first as f64 + w.offset <= 0.0 || w.at(first) > 1.0 {
                    return Err(SeqError::Invalid(format!(
                        "weight {}/(i + {}) must lie in (0, 1] from index {first}",
                        w.numerator, w.offset
                    )));
                }
                if self.horizon < prefix.len() + 2 {
                    return Err(SeqError::Invalid(format!(
                        "horizon {} must exceed the prefix length {} by at least 2",
                        self.horizon,
                        prefix.len()
                    )));
                }
                for d in prefix.iter().chain([&family.base, &family.perturbation]) {
                    d.validate()?;
                }
            }
            SequenceStructure::Paired { scale, .. } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(SeqError::Invalid(format!("scale must be positive, got {scale}")));
                }
            }
        }
        Ok(())
    }

    /// Distribution of `ξᵢ`, `i ≥ 1`.
    pub fn dist_at(&self, i: usize) -> Result<DistributionSpec, SeqError> {
        if i == 0 {
            return Err(SeqError::ZeroIndex);
        }
        Ok(match &self.structure {
            SequenceStructure::EventuallyPeriodic { preperiod, cycle } => {
                if i <= preperiod.len() {
                    preperiod[i - 1].clone()
                } else {
                    cycle[(i - preperiod.len() - 1) % cycle.len()].clone()
                }
            }
            SequenceStructure::Parametric { prefix, family } => {
                if i <= prefix.len() {
                    prefix[i - 1].clone()
                } else {
                    let w = family.weight.at(i);
                    DistributionSpec::mixture([(1.0 - w, family.base.clone()), (w, family.perturbation.clone())])
                }
            }
            SequenceStructure::Paired {
                minuend,
                scale,
                subtrahend,
            } => DistributionSpec::difference(minuend.dist_at(i)?, *scale, subtrahend.dist_at(i)?),
        })
    }

    /// Every distinct distribution the rule can produce (mixture components for
    /// parametric families), for validation and diagnostics.
    pub fn building_blocks(&self) -> Vec<DistributionSpec> {
        match &self.structure {
            SequenceStructure::EventuallyPeriodic { preperiod, cycle } => preperiod.iter().chain(cycle).cloned().collect(),
            SequenceStructure::Parametric { prefix, family } => prefix
                .iter()
                .chain([&family.base, &family.perturbation])
                .cloned()
                .collect(),
            SequenceStructure::Paired { minuend, subtrahend, .. } => {
                let mut v = minuend.building_blocks();
                v.extend(subtrahend.building_blocks());
                v
            }
        }
    }

    fn slot_value(&self, kind: FunctionalKind, slot: Slot) -> Result<f64, SeqError> {
        let key = (kind.cache_key(), slot);
        if let Some(v) = self.cache.values.read().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let dist = match (&self.structure, &key.1) {
            (SequenceStructure::EventuallyPeriodic { preperiod, .. }, Slot::Prefix(k)) => preperiod[*k].clone(),
            (SequenceStructure::EventuallyPeriodic { cycle, .. }, Slot::Cycle(k)) => cycle[*k].clone(),
            (SequenceStructure::Parametric { prefix, .. }, Slot::Prefix(k)) => prefix[*k].clone(),
            (SequenceStructure::Parametric { family, .. }, Slot::Base) => family.base.clone(),
            (SequenceStructure::Parametric { family, .. }, Slot::Perturbation) => family.perturbation.clone(),
            (_, Slot::Index(i)) => self.dist_at(*i)?,
            _ => unreachable!("slot does not belong to this structure"),
        };
        let v = dist.evaluate(kind)?;
        self.cache.values.write().expect("cache lock").insert(key, v);
        Ok(v)
    }

    /// `E g(ξᵢ)` for one functional kind.
    pub fn kind_value(&self, kind: FunctionalKind, i: usize) -> Result<f64, SeqError> {
        if i == 0 {
            return Err(SeqError::ZeroIndex);
        }
        match &self.structure {
            SequenceStructure::EventuallyPeriodic { preperiod, cycle } => {
                if i <= preperiod.len() {
                    self.slot_value(kind, Slot::Prefix(i - 1))
                } else {
                    self.slot_value(kind, Slot::Cycle((i - preperiod.len() - 1) % cycle.len()))
                }
            }
            SequenceStructure::Parametric { prefix, family } => {
                if i <= prefix.len() {
                    return self.slot_value(kind, Slot::Prefix(i - 1));
                }
                let w = family.weight.at(i);
                let base = self.slot_value(kind, Slot::Base)?;
                let pert = self.slot_value(kind, Slot::Perturbation)?;
                if base.is_infinite() || pert.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                Ok(base + w * (pert - base))
            }
            SequenceStructure::Paired { .. } => self.slot_value(kind, Slot::Index(i)),
        }
    }

    /// `E g(ξᵢ)` for a (possibly combined) functional.
    pub fn value(&self, f: &Functional, i: usize) -> Result<f64, SeqError> {
        let mut total = 0.0;
        for kind in f.terms() {
            total += self.kind_value(*kind, i)?;
        }
        Ok(total)
    }

    /// Prefix sums `S(0..=n)` of `i ↦ E g(ξᵢ)`, extended and cached on demand.
    fn prefix_sums(&self, f: &Functional, n: usize) -> Result<Vec<f64>, SeqError> {
        let key: Vec<KindKey> = f.terms().iter().map(FunctionalKind::cache_key).collect();
        if let Some(sums) = self.cache.prefix_sums.read().expect("cache lock").get(&key) {
            if sums.len() > n {
                return Ok(sums[..=n].to_vec());
            }
        }
        let mut sums = vec![0.0];
        let mut acc = CompensatedSum::new();
        for i in 1..=n {
            acc.add(self.value(f, i)?);
            sums.push(acc.value());
        }
        let mut cache = self.cache.prefix_sums.write().expect("cache lock");
        let entry = cache.entry(key).or_default();
        if entry.len() < sums.len() {
            *entry = sums.clone();
        }
        Ok(sums)
    }

    /// Cesàro average `(1/n) Σ_{i≤n} E g(ξᵢ)`.
    pub fn average(&self, f: &Functional, n: usize) -> Result<f64, SeqError> {
        if n == 0 {
            return Err(SeqError::ZeroIndex);
        }
        let sums = self.prefix_sums(f, n)?;
        Ok(sums[n] / n as f64)
    }

    /// Cesàro averages for `n = 1..=n_max` (index 0 of the result is `n = 1`).
    pub fn averages(&self, f: &Functional, n_max: usize) -> Result<Vec<f64>, SeqError> {
        let sums = self.prefix_sums(f, n_max)?;
        Ok((1..=n_max).map(|n| sums[n] / n as f64).collect())
    }

    /// Draws `ξᵢ`.
    pub fn sample_at<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> f64 {
        debug_assert!(i >= 1);
        match &self.structure {
            SequenceStructure::EventuallyPeriodic { preperiod, cycle } => {
                if i <= preperiod.len() {
                    preperiod[i - 1].sample(rng)
                } else {
                    cycle[(i - preperiod.len() - 1) % cycle.len()].sample(rng)
                }
            }
            SequenceStructure::Parametric { prefix, family } => {
                if i <= prefix.len() {
                    prefix[i - 1].sample(rng)
                } else if rng.random::<f64>() < family.weight.at(i) {
                    family.perturbation.sample(rng)
                } else {
                    family.base.sample(rng)
                }
            }
            SequenceStructure::Paired {
                minuend,
                scale,
                subtrahend,
            } => {
                let z = minuend.sample_at(i, rng);
                let t = subtrahend.sample_at(i, rng);
                z - scale * t
            }
        }
    }
}

#[cfg(test)]
mod tests;
