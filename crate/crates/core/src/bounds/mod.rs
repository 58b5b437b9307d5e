//! Exponential tail bound `P(M∞ > x) ≤ min{1, c₁ e^{−δhx}}` for the supremum
//! `M∞` of an inhomogeneous random walk.
//!
//! Given `(a, b, c, ε, h, d₁, d₂)` and `δ ∈ (0, 1/2]` with margin
//! `Δ = a − ε − δ·h·d₁·max{c²/2, 2/h²} > 0`, the prefactor is
//! `c₁ = S(b, d₂) + e^{−δhΔb}/(1 − e^{−δhΔ})`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dists::FunctionalKind;
use crate::numerics::{minimize_bracketed, CompensatedSum};
use crate::seqmodel::{derive_constants, SeqError, SequenceSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
    #[error("infeasible: a = {a} does not exceed ε = {epsilon}")]
    NoMargin { a: f64, epsilon: f64 },
    #[error("infeasible δ = {delta}: Δ = {capital_delta} is not positive (δ_max = {delta_max})")]
    InfeasibleDelta {
        delta: f64,
        capital_delta: f64,
        delta_max: f64,
    },
    #[error("δ = {0} outside (0, 1/2]")]
    DeltaRange(f64),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("moment generating function of ξ_{index} diverges at y = {y}")]
    DivergentMgf { index: usize, y: f64 },
    #[error("geometric tail ratio {ratio} is not below 1 at y = {y}")]
    TailDiverges { ratio: f64, y: f64 },
    #[error(transparent)]
    Sequence(#[from] SeqError),
}

/// `(a, b, c, ε, h, d₁, d₂)` for the tail-bound theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    pub a: f64,
    pub b: usize,
    pub c: f64,
    pub epsilon: f64,
    pub h: f64,
    pub d1: f64,
    pub d2: f64,
}

impl TheoremConstants {
    pub fn validate(&self) -> Result<(), BoundError> {
        let bad = |msg: String| Err(BoundError::InvalidConstants(msg));
        let finite = [self.a, self.c, self.epsilon, self.h, self.d1, self.d2]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return bad(format!("non-finite constant in {self:?}"));
        }
        if self.a <= 0.0 {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if self.b == 0 {
            return bad("b must be at least 1".into());
        }
        if self.c <= 0.0 {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if self.epsilon < 0.0 {
            return bad(format!("ε must be nonnegative, got {}", self.epsilon));
        }
        if self.h <= 0.0 {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if self.d1 < 1.0 || self.d2 < 1.0 {
            return bad(format!("d₁, d₂ must be at least 1, got {}, {}", self.d1, self.d2));
        }
        Ok(())
    }

    /// `max{c²/2, 2/h²}`
    pub fn big_m(&self) -> f64 {
        (self.c * self.c / 2.0).max(2.0 / (self.h * self.h))
    }
}

/// Supremum of admissible δ: `min(1/2, (a − ε)/(h·d₁·M))`. Admissible δ lie strictly below it
/// unless it equals 1/2.
pub fn max_feasible_delta(k: &TheoremConstants) -> Result<f64, BoundError> {
    k.validate()?;
    if k.a <= k.epsilon {
        return Err(BoundError::NoMargin {
            a: k.a,
            epsilon: k.epsilon,
        });
    }
    Ok(((k.a - k.epsilon) / (k.h * k.d1 * k.big_m())).min(0.5))
}

/// `Δ = a − ε − δ·h·d₁·M`; may be nonpositive.
pub fn capital_delta(k: &TheoremConstants, delta: f64) -> f64 {
    k.a - k.epsilon - delta * k.h * k.d1 * k.big_m()
}

/// `S(b, d₂) = d₂(d₂^{b−1} − 1)/(d₂ − 1)`, or `b − 1` when `d₂ = 1`.
pub fn s_factor(b: usize, d2: f64) -> f64 {
    if b <= 1 {
        return 0.0;
    }
    let t = d2 - 1.0;
    if t == 0.0 {
        return (b - 1) as f64;
    }
    // d₂^{b−1} − 1 = expm1((b−1)·ln(1+t)), continuous as t → 0
    d2 * ((b - 1) as f64 * t.ln_1p()).exp_m1() / t
}

fn check_delta(k: &TheoremConstants, delta: f64) -> Result<f64, BoundError> {
    k.validate()?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(BoundError::DeltaRange(delta));
    }
    let cd = capital_delta(k, delta);
    if cd <= 0.0 {
        return Err(BoundError::InfeasibleDelta {
            delta,
            capital_delta: cd,
            delta_max: max_feasible_delta(k).unwrap_or(0.0),
        });
    }
    Ok(cd)
}

/// `c₁ = S(b, d₂) + e^{−δhΔb}/(1 − e^{−δhΔ})`.
pub fn c1_constant(k: &TheoremConstants, delta: f64) -> Result<f64, BoundError> {
    let cd = check_delta(k, delta)?;
    Ok(c1_from_parts(k.b, k.d2, delta * k.h * cd))
}

fn c1_from_parts(b: usize, d2: f64, q: f64) -> f64 {
    s_factor(b, d2) + (-q * b as f64).exp() / -(-q).exp_m1()
}

/// `min{1, c₁ e^{−δhx}}`.
pub fn tail_bound(k: &TheoremConstants, delta: f64, x: f64) -> Result<f64, BoundError> {
    Ok(certify(k, delta)?.bound(x))
}

/// Everything needed to evaluate and audit the bound for one δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub delta: f64,
    pub capital_delta: f64,
    pub big_m: f64,
    pub s: f64,
    pub c1: f64,
    /// `δh`
    pub rate: f64,
    /// `ln(c₁)/rate`, the largest `x` at which the cap is active.
    pub crossover_x: f64,
}

impl BoundCertificate {
    pub fn bound(&self, x: f64) -> f64 {
        if self.c1 >= 1.0 && x <= self.crossover_x {
            return 1.0;
        }
        (self.c1.ln() - self.rate * x).exp().min(1.0)
    }

    /// `c₁ e^{−δhx}` without the cap.
    pub fn uncapped(&self, x: f64) -> f64 {
        (self.c1.ln() - self.rate * x).exp()
    }
}

pub fn certify(k: &TheoremConstants, delta: f64) -> Result<BoundCertificate, BoundError> {
    let cd = check_delta(k, delta)?;
    let rate = delta * k.h;
    let s = s_factor(k.b, k.d2);
    let c1 = c1_from_parts(k.b, k.d2, rate * cd);
    Ok(BoundCertificate {
        delta,
        capital_delta: cd,
        big_m: k.big_m(),
        s,
        c1,
        rate,
        crossover_x: c1.ln() / rate,
    })
}

/// What δ should optimize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "objective", rename_all = "snake_case")]
pub enum DeltaObjective {
    /// Minimize `c₁(δ)e^{−δhx}` at one point.
    AtPoint { x: f64 },
    /// Largest decay rate, `δ = (1 − 10⁻³)·δ_max`.
    AsymptoticRate,
}

const ASYMPTOTIC_MARGIN: f64 = 1e-3;
const OPEN_END: f64 = 1e-12;

pub fn optimize_delta(k: &TheoremConstants, objective: DeltaObjective) -> Result<BoundCertificate, BoundError> {
    let dmax = max_feasible_delta(k)?;
    // at δ = 1/2 < (a−ε)/(h d₁ M) the endpoint itself is admissible
    let hi = if capital_delta(k, dmax) > 0.0 {
        dmax
    } else {
        dmax * (1.0 - OPEN_END)
    };
    match objective {
        DeltaObjective::AsymptoticRate => certify(k, (1.0 - ASYMPTOTIC_MARGIN) * dmax),
        DeltaObjective::AtPoint { x } => {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(BoundError::Argument(format!("x must be finite and nonnegative, got {x}")));
            }
            let objective = |d: f64| {
                let q = d * k.h * capital_delta(k, d);
                if q <= 0.0 {
                    return f64::INFINITY;
                }
                c1_from_parts(k.b, k.d2, q).ln() - d * k.h * x
            };
            const COARSE: usize = 256;
            let point = |j: usize| hi * j as f64 / COARSE as f64;
            let best = (1..=COARSE)
                .min_by(|&i, &j| objective(point(i)).total_cmp(&objective(point(j))))
                .expect("nonempty grid");
            let lo = point(best - 1).max(hi * 1e-15);
            let up = point((best + 1).min(COARSE));
            let (d, fd) = minimize_bracketed(objective, lo, up, 1e-9);
            let d = if objective(point(best)) < fd { point(best) } else { d };
            certify(k, d)
        }
    }
}

/// `e^{−yx}(Σ_{n≤N} Π_{i≤n} E e^{yξᵢ} + r^{N+1}/(1 − r))` with
/// `r = exp(y(−a + ε + y·d₁·M))`.
///
/// This is the Chernoff bound summed over `n` before the geometric closure,
/// and is never larger than `c₁e^{−yx}` at `y = δh`. It is not capped at 1.
pub fn direct_chernoff_bound(
    seq: &SequenceSpec,
    k: &TheoremConstants,
    y: f64,
    x: f64,
    n_terms: usize,
) -> Result<f64, BoundError> {
    k.validate()?;
    if !(y > 0.0 && y <= k.h / 2.0 * (1.0 + 1e-12)) {
        return Err(BoundError::Argument(format!("y = {y} must lie in (0, h/2] with h = {}", k.h)));
    }
    if n_terms < k.b {
        return Err(BoundError::Argument(format!("N = {n_terms} must be at least b = {}", k.b)));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(BoundError::Argument(format!("x must be finite and nonnegative, got {x}")));
    }
    let log_ratio = y * (-k.a + k.epsilon + y * k.d1 * k.big_m());
    if log_ratio >= 0.0 {
        return Err(BoundError::TailDiverges {
            ratio: log_ratio.exp(),
            y,
        });
    }
    let mgf = FunctionalKind::Mgf { y };
    let mut log_prod = CompensatedSum::new();
    let mut total = CompensatedSum::new();
    for i in 1..=n_terms {
        let m = seq.kind_value(mgf, i)?;
        if !m.is_finite() {
            return Err(BoundError::DivergentMgf { index: i, y });
        }
        log_prod.add(m.ln());
        total.add((log_prod.value() - y * x).exp());
    }
    let tail = (log_ratio * (n_terms + 1) as f64 - y * x).exp() / -log_ratio.exp_m1();
    total.add(tail);
    Ok(total.value())
}

/// Result of scanning `c` for the tightest bound at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CSearchResult {
    pub c: f64,
    pub constants: TheoremConstants,
    pub certificate: BoundCertificate,
    pub bound_at_x: f64,
}

/// Tries each `c` in `grid`, derives the constants, optimizes δ at `x`, and keeps the smallest
/// bound. Candidates that are infeasible are skipped; an error is returned if all are.
pub fn grid_search_c(seq: &SequenceSpec, h: f64, b: usize, grid: &[f64], x: f64) -> Result<CSearchResult, BoundError> {
    let mut best: Option<CSearchResult> = None;
    let mut last_err = BoundError::Argument("empty c grid".into());
    for &c in grid {
        let attempt = derive_constants(seq, h, c, b)
            .map_err(BoundError::from)
            .and_then(|d| Ok((d.constants, optimize_delta(&d.constants, DeltaObjective::AtPoint { x })?)));
        match attempt {
            Ok((constants, certificate)) => {
                let value = certificate.bound(x);
                if best.as_ref().is_none_or(|b| value < b.bound_at_x) {
                    best = Some(CSearchResult {
                        c,
                        constants,
                        certificate,
                        bound_at_x: value,
                    });
                }
            }
            Err(e) => last_err = e,
        }
    }
    best.ok_or(last_err)
}
