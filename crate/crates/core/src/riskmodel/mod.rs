//! Inhomogeneous renewal risk model `R(t) = u + pt − Σ_{i ≤ Θ(t)} Zᵢ`.
//!
//! Ruin happens iff the walk with increments `ξᵢ = Zᵢ − pθᵢ` exceeds `u`, so
//! the walk bounds apply directly. This module also reads the constants
//! `(α, β, ϰ, ϵ, γ, ν₁, ν₂)` off the claim and inter-occurrence sequences
//! separately, and computes the classical adjustment coefficient for the
//! homogeneous model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{certify, optimize_delta, tail_bound, BoundCertificate, BoundError, DeltaObjective, TheoremConstants};
use crate::dists::{DistError, DistributionSpec, Functional, FunctionalKind};
use crate::numerics::brent_root;
use crate::seqmodel::{AverageCertificate, SeqError, SequenceSpec, SequenceStructure, WeightedPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error("invalid risk model: {0}")]
    Invalid(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("net profit condition fails: E Z − p E θ = {0} is not negative")]
    NetProfit(f64),
    #[error("infeasible δ = {delta}: Δ̂ = {hat_delta} is not positive")]
    InfeasibleDelta { delta: f64, hat_delta: f64 },
    #[error("model is not fully degenerate")]
    NotDegenerate,
}

/// Premium rate, claim sizes and inter-occurrence times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RiskModelDef", into = "RiskModelDef")]
pub struct RiskModelSpec {
    p: f64,
    claims: SequenceSpec,
    interarrivals: SequenceSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RiskModelDef {
    p: f64,
    claims: SequenceSpec,
    interarrivals: SequenceSpec,
}

impl TryFrom<RiskModelDef> for RiskModelSpec {
    type Error = RiskError;
    fn try_from(d: RiskModelDef) -> Result<Self, RiskError> {
        RiskModelSpec::new(d.p, d.claims, d.interarrivals)
    }
}

impl From<RiskModelSpec> for RiskModelDef {
    fn from(m: RiskModelSpec) -> Self {
        RiskModelDef {
            p: m.p,
            claims: m.claims,
            interarrivals: m.interarrivals,
        }
    }
}

impl RiskModelSpec {
    pub fn new(p: f64, claims: SequenceSpec, interarrivals: SequenceSpec) -> Result<Self, RiskError> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(RiskError::Invalid(format!("premium rate must be positive, got {p}")));
        }
        for d in claims.building_blocks() {
            if matches!(d, DistributionSpec::Difference { .. }) || d.support_min() < 0.0 {
                return Err(RiskError::Invalid(format!("claim distribution {d:?} is not supported on [0, ∞)")));
            }
        }
        for d in interarrivals.building_blocks() {
            if matches!(d, DistributionSpec::Difference { .. }) || d.support_min() < 0.0 {
                return Err(RiskError::Invalid(format!(
                    "inter-occurrence distribution {d:?} is not supported on [0, ∞)"
                )));
            }
            if d.atom_at(0.0) >= 1.0 {
                return Err(RiskError::Invalid(format!("inter-occurrence distribution {d:?} is degenerate at 0")));
            }
        }
        Ok(Self {
            p,
            claims,
            interarrivals,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn claims(&self) -> &SequenceSpec {
        &self.claims
    }

    pub fn interarrivals(&self) -> &SequenceSpec {
        &self.interarrivals
    }

    /// Draws `(Zᵢ, θᵢ)`.
    pub fn sample_pair<R: rand::Rng + ?Sized>(&self, i: usize, rng: &mut R) -> (f64, f64) {
        let z = self.claims.sample_at(i, rng);
        let t = self.interarrivals.sample_at(i, rng);
        (z, t)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn periodic_parts(s: &SequenceSpec) -> Option<(usize, usize)> {
    match s.structure() {
        SequenceStructure::EventuallyPeriodic { preperiod, cycle } => Some((preperiod.len(), cycle.len())),
        _ => None,
    }
}

/// `ξᵢ = Zᵢ − pθᵢ`, keeping a certifiable structure when the inputs allow it:
/// two eventually periodic inputs give an eventually periodic sequence, and a
/// weighted-pair input against an eventually constant one stays a weighted pair.
/// Anything else becomes an unstructured paired sequence, for which only finite
/// ranges can be evaluated.
pub fn to_increment_sequence(m: &RiskModelSpec) -> Result<SequenceSpec, RiskError> {
    let (z, th, p) = (&m.claims, &m.interarrivals, m.p);
    let diff = |i: usize| -> Result<DistributionSpec, SeqError> {
        Ok(DistributionSpec::difference(z.dist_at(i)?, p, th.dist_at(i)?))
    };
    let horizon = z.horizon().max(th.horizon());
    if let (Some((pz, lz)), Some((pt, lt))) = (periodic_parts(z), periodic_parts(th)) {
        let pre = pz.max(pt);
        let len = lz / gcd(lz, lt) * lt;
        let preperiod = (1..=pre).map(diff).collect::<Result<Vec<_>, _>>()?;
        let cycle = (pre + 1..=pre + len).map(diff).collect::<Result<Vec<_>, _>>()?;
        return Ok(SequenceSpec::periodic(preperiod, cycle, horizon.max(pre + 2 * len))?);
    }
    let constant_after = |s: &SequenceSpec| match s.structure() {
        SequenceStructure::EventuallyPeriodic { preperiod, cycle } if cycle.len() == 1 => {
            Some((preperiod.len(), cycle[0].clone()))
        }
        _ => None,
    };
    let pair = |s: &SequenceSpec| match s.structure() {
        SequenceStructure::Parametric { prefix, family } => Some((prefix.len(), family.clone())),
        _ => None,
    };
    let family = if let (Some((pz, f)), Some((pt, t))) = (pair(z), constant_after(th)) {
        Some((
            pz.max(pt),
            WeightedPair {
                base: DistributionSpec::difference(f.base, p, t.clone()),
                perturbation: DistributionSpec::difference(f.perturbation, p, t),
                weight: f.weight,
            },
        ))
    } else if let (Some((pz, c)), Some((pt, f))) = (constant_after(z), pair(th)) {
        Some((
            pz.max(pt),
            WeightedPair {
                base: DistributionSpec::difference(c.clone(), p, f.base),
                perturbation: DistributionSpec::difference(c, p, f.perturbation),
                weight: f.weight,
            },
        ))
    } else {
        None
    };
    if let Some((pre, family)) = family {
        let prefix = (1..=pre).map(diff).collect::<Result<Vec<_>, _>>()?;
        return Ok(SequenceSpec::parametric(prefix, family, horizon.max(pre + 2))?);
    }
    Ok(SequenceSpec::paired(z.clone(), p, th.clone())?)
}

/// `(α, β, ϰ, ϵ, γ, ν₁, ν₂)` for the separate-sequence bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryTwoConstants {
    pub alpha: f64,
    pub beta: usize,
    pub kappa: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub nu1: f64,
    pub nu2: f64,
}

impl CorollaryTwoConstants {
    pub fn validate(&self) -> Result<(), RiskError> {
        let ok = self.alpha > 0.0
            && self.beta >= 1
            && self.kappa > 0.0
            && self.epsilon >= 0.0
            && self.gamma > 0.0
            && self.nu1 >= 1.0
            && self.nu2 >= 1.0
            && [self.alpha, self.kappa, self.epsilon, self.gamma, self.nu1, self.nu2]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(RiskError::Parameter(format!("invalid constants {self:?}")))
        }
    }
}

/// Constants together with the certificates they were read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedCorollaryTwo {
    pub constants: CorollaryTwoConstants,
    pub drift: AverageCertificate,
    pub interarrival_trunc: AverageCertificate,
    pub claim_exp: AverageCertificate,
    pub claim_exp_head: AverageCertificate,
}

pub fn derive_corollary2_inputs(
    m: &RiskModelSpec,
    gamma: f64,
    kappa: f64,
    beta: usize,
) -> Result<DerivedCorollaryTwo, RiskError> {
    if !(gamma > 0.0 && gamma.is_finite() && kappa > 0.0 && kappa.is_finite()) {
        return Err(RiskError::Parameter(format!("γ and ϰ must be positive, got {gamma}, {kappa}")));
    }
    if beta == 0 {
        return Err(RiskError::Parameter("β must be at least 1".into()));
    }
    let increments = to_increment_sequence(m)?;
    let drift = increments.sup_tail_average(&FunctionalKind::Mean.into(), beta)?;
    if drift.upper() >= 0.0 {
        return Err(SeqError::NonNegativeDrift {
            b: beta,
            sup_mean: drift.upper(),
        }
        .into());
    }
    let trunc = m.interarrivals.sup_tail_average(
        &FunctionalKind::InterarrivalTrunc {
            threshold: kappa / m.p,
        }
        .into(),
        beta,
    )?;
    let exp: Functional = FunctionalKind::ExpMoment { gamma }.into();
    let infinite = |e: SeqError| match e {
        SeqError::Infinite { .. } => SeqError::InfiniteMoment {
            functional: exp.to_string(),
        },
        other => other,
    };
    let claim_exp = m.claims.sup_tail_average(&exp, beta).map_err(infinite)?;
    let claim_exp_head = m.claims.head_max_certificate(&exp, beta).map_err(infinite)?;
    let constants = CorollaryTwoConstants {
        alpha: -drift.upper(),
        beta,
        kappa,
        epsilon: trunc.upper().max(0.0),
        gamma,
        nu1: claim_exp.upper().max(1.0),
        nu2: claim_exp_head.upper().max(1.0),
    };
    Ok(DerivedCorollaryTwo {
        constants,
        drift,
        interarrival_trunc: trunc,
        claim_exp,
        claim_exp_head,
    })
}

/// `a = α, b = β, c = ϰ, h = γ, d₁ = 1 + ν₁, d₂ = 1 + ν₂, ε = pϵ`.
pub fn map_to_theorem(c2c: &CorollaryTwoConstants, p: f64) -> TheoremConstants {
    TheoremConstants {
        a: c2c.alpha,
        b: c2c.beta,
        c: c2c.kappa,
        epsilon: p * c2c.epsilon,
        h: c2c.gamma,
        d1: 1.0 + c2c.nu1,
        d2: 1.0 + c2c.nu2,
    }
}

/// `Δ̂ = α − pϵ − δγ(1 + ν₁)·max{ϰ²/2, 2/γ²}`.
pub fn hat_delta(c2c: &CorollaryTwoConstants, p: f64, delta: f64) -> f64 {
    let big_m = f64::max(c2c.kappa * c2c.kappa / 2.0, 2.0 / (c2c.gamma * c2c.gamma));
    c2c.alpha - p * c2c.epsilon - delta * c2c.gamma * (1.0 + c2c.nu1) * big_m
}

/// `c₂ = ((1+ν₂)/ν₂)((1+ν₂)^{β−1} − 1) + e^{−δγΔ̂β}/(1 − e^{−δγΔ̂})`, written out as stated
/// rather than through the theorem's `S(b, d₂)`.
pub fn c2_constant(c2c: &CorollaryTwoConstants, p: f64, delta: f64) -> Result<f64, RiskError> {
    c2c.validate()?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(BoundError::DeltaRange(delta).into());
    }
    let hd = hat_delta(c2c, p, delta);
    if hd <= 0.0 {
        return Err(RiskError::InfeasibleDelta { delta, hat_delta: hd });
    }
    let d2 = 1.0 + c2c.nu2;
    let head = d2 / c2c.nu2 * (d2.powi(c2c.beta as i32 - 1) - 1.0);
    let q = delta * c2c.gamma * hd;
    Ok(head + (-q * c2c.beta as f64).exp() / -(-q).exp_m1())
}

/// Certificate of the ruin bound `min{1, c₂e^{−δγu}}`.
pub fn corollary_two_certificate(c2c: &CorollaryTwoConstants, p: f64, delta: f64) -> Result<BoundCertificate, RiskError> {
    c2c.validate()?;
    Ok(certify(&map_to_theorem(c2c, p), delta)?)
}

/// `ψ(u) ≤ min{1, c₂ e^{−δγu}}`.
pub fn lundberg_bound(m: &RiskModelSpec, c2c: &CorollaryTwoConstants, delta: f64, u: f64) -> Result<f64, RiskError> {
    c2c.validate()?;
    if !(u >= 0.0) {
        return Err(RiskError::Parameter(format!("u must be nonnegative, got {u}")));
    }
    Ok(tail_bound(&map_to_theorem(c2c, m.p), delta, u)?)
}

/// Positive root `R` of `E e^{y(Z − pθ)} = 1`, or `None` when the moment generating function
/// diverges before reaching 1 or no crossing exists.
pub fn adjustment_coefficient(
    claim: &DistributionSpec,
    interarrival: &DistributionSpec,
    p: f64,
) -> Result<Option<f64>, RiskError> {
    const START: f64 = 1e-6;
    const CAP: f64 = 1e6;
    claim.validate()?;
    interarrival.validate()?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(RiskError::Parameter(format!("premium rate must be positive, got {p}")));
    }
    let drift = claim.evaluate(FunctionalKind::Mean)? - p * interarrival.evaluate(FunctionalKind::Mean)?;
    if drift >= 0.0 {
        return Err(RiskError::NetProfit(drift));
    }
    let phi = |y: f64| -> f64 {
        let mz = claim.evaluate(FunctionalKind::Mgf { y }).unwrap_or(f64::INFINITY);
        let mt = interarrival.evaluate(FunctionalKind::Mgf { y: -p * y }).unwrap_or(f64::INFINITY);
        mz.ln() + mt.ln()
    };
    let mut lo = 0.0;
    let mut y = START;
    let hi = loop {
        let v = phi(y);
        if v.is_infinite() {
            // locate the first crossing, if any, between the last finite point and the blow-up
            let (mut a, mut b) = (lo, y);
            let mut found = None;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let vm = phi(mid);
                if vm.is_finite() && vm > 0.0 {
                    found = Some(mid);
                    break;
                } else if vm.is_finite() {
                    a = mid;
                } else {
                    b = mid;
                }
                if b - a <= f64::EPSILON * b {
                    break;
                }
            }
            match found {
                Some(h) => {
                    lo = a;
                    break h;
                }
                None => return Ok(None),
            }
        }
        if v > 0.0 {
            break y;
        }
        lo = y;
        y *= 2.0;
        if y > CAP {
            return Ok(None);
        }
    };
    let lo = if lo == 0.0 { START * 1e-3 } else { lo };
    let r = brent_root(phi, lo, hi, 1e-12).map_err(|e| RiskError::Parameter(e.to_string()))?;
    Ok(Some(r))
}

/// Running maximum `sup_{n≥1} Σ_{i≤n} ξᵢ` of a model whose claims and inter-occurrence times
/// are all point masses.
pub fn degenerate_running_max(m: &RiskModelSpec) -> Result<f64, RiskError> {
    let inc = to_increment_sequence(m)?;
    let SequenceStructure::EventuallyPeriodic { preperiod, cycle } = inc.structure() else {
        return Err(RiskError::NotDegenerate);
    };
    if !preperiod.iter().chain(cycle).all(DistributionSpec::is_degenerate) {
        return Err(RiskError::NotDegenerate);
    }
    let point = |d: &DistributionSpec| match d {
        DistributionSpec::Degenerate { point } => *point,
        _ => unreachable!(),
    };
    let cycle_sum: f64 = cycle.iter().map(point).sum();
    if cycle_sum > 0.0 {
        return Ok(f64::INFINITY);
    }
    // once the cycle sum is nonpositive, the first pass through the cycle holds the maximum
    let mut s = 0.0;
    let mut best = f64::NEG_INFINITY;
    for d in preperiod.iter().chain(cycle) {
        s += point(d);
        best = best.max(s);
    }
    Ok(best)
}

/// `ψ(u)` for a fully degenerate model: 1 if the running maximum exceeds `u`, else 0.
pub fn exact_ruin_degenerate(m: &RiskModelSpec, u: f64) -> Result<u8, RiskError> {
    if !(u >= 0.0) {
        return Err(RiskError::Parameter(format!("u must be nonnegative, got {u}")));
    }
    Ok(u8::from(degenerate_running_max(m)? > u))
}

const KAPPA_LEVELS: [f64; 7] = [0.5, 0.75, 0.9, 0.95, 0.99, 0.999, 1.0];

/// Candidate `ϰ`: `p` times upper quantiles of every inter-occurrence distribution.
pub fn kappa_grid(m: &RiskModelSpec) -> Vec<f64> {
    let mut out: Vec<f64> = m
        .interarrivals
        .building_blocks()
        .iter()
        .flat_map(|d| KAPPA_LEVELS.map(|q| m.p * d.quantile(q)))
        .filter(|k| k.is_finite() && *k > 0.0)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSearchResult {
    pub kappa: f64,
    pub constants: CorollaryTwoConstants,
    pub certificate: BoundCertificate,
    pub bound_at_u: f64,
}

/// Tries each `ϰ`, optimizes δ at `u`, and keeps the smallest bound. Infeasible candidates are
/// skipped.
pub fn kappa_grid_search(
    m: &RiskModelSpec,
    gamma: f64,
    beta: usize,
    u: f64,
    kappas: &[f64],
) -> Result<KappaSearchResult, RiskError> {
    let mut best: Option<KappaSearchResult> = None;
    let mut last_err = RiskError::Parameter("empty ϰ grid".into());
    for &kappa in kappas {
        let attempt = derive_corollary2_inputs(m, gamma, kappa, beta).and_then(|d| {
            let cert = optimize_delta(&map_to_theorem(&d.constants, m.p), DeltaObjective::AtPoint { x: u })?;
            Ok((d.constants, cert))
        });
        match attempt {
            Ok((constants, certificate)) => {
                let v = certificate.bound(u);
                if best.as_ref().is_none_or(|b| v < b.bound_at_u) {
                    best = Some(KappaSearchResult {
                        kappa,
                        constants,
                        certificate,
                        bound_at_u: v,
                    });
                }
            }
            Err(e) => last_err = e,
        }
    }
    best.ok_or(last_err)
}

#[cfg(test)]
mod tests;
