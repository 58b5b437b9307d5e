//! Certified suprema of Cesàro averages over `n ≥ b`.
//!
//! Write `A(n) = S(n)/n` for the average of `f(1..=n)`.
//!
//! *Eventually periodic.* With preperiod `P`, cycle length `L` and cycle mean
//! `m̄`, for `n ≥ P` we have `S(n) = n·m̄ + C_r` where `C_r` depends only on
//! `r = (n − P) mod L`. Along a residue class `A(n) = m̄ + C_r/n` is strictly
//! decreasing when `C_r > 0` (peak at the first admissible `n`) and increases
//! to `m̄` otherwise. The supremum is therefore a maximum over finitely many
//! values and `m̄`, and is exact.
//!
//! *Weighted pair.* `f(i) = f_base + w(i)(f_pert − f_base)` for `i > P`, so
//! `f` is monotone with limit `f_base`. `A(n+1) − A(n) = (f(n+1) − A(n))/(n+1)`.
//! If `f` is nonincreasing and `f(n₁+1) ≤ A(n₁)` for some `n₁ ≥ P`, then `A` is
//! nonincreasing from `n₁` on and the supremum is a finite maximum. If no such
//! `n₁ ≤ N` is found, every `A(n)` with `n > N` is at most `f(N+1)`, which gives
//! the error budget. If `f` is nondecreasing, `A(n) ≤ f(n) ≤ f_base` eventually
//! and `A(n) → f_base`, so the supremum is `max(max_{[b,N]} A, f_base)`.

use serde::{Deserialize, Serialize};

use crate::bounds::TheoremConstants;
use crate::dists::{Functional, FunctionalKind};

use super::{SeqError, SequenceSpec, SequenceStructure};

/// Where a supremum or maximum is reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttainedAt {
    Index(usize),
    /// Approached as `n → ∞` and not attained.
    Limit,
    /// Empty index range (head maximum with `b = 1`).
    Empty,
}

impl std::fmt::Display for AttainedAt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttainedAt::Index(n) => write!(f, "n = {n}"),
            AttainedAt::Limit => f.write_str("limit"),
            AttainedAt::Empty => f.write_str("empty range"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageCertificate {
    pub value: f64,
    pub attained_at: AttainedAt,
    pub horizon_used: usize,
    /// The true value lies in `[value, value + error_budget]`.
    pub error_budget: f64,
}

impl AverageCertificate {
    /// Certified upper bound `value + error_budget`.
    pub fn upper(&self) -> f64 {
        self.value + self.error_budget
    }
}

/// Theorem constants together with the certificates they were read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub constants: TheoremConstants,
    pub drift: AverageCertificate,
    pub truncation: AverageCertificate,
    pub tail_exp: AverageCertificate,
    pub head_exp: AverageCertificate,
}

/// Running best `(value, index)`; ties keep the smaller index.
struct Best {
    value: f64,
    at: AttainedAt,
}

impl Best {
    fn new() -> Self {
        Best {
            value: f64::NEG_INFINITY,
            at: AttainedAt::Empty,
        }
    }
    fn offer(&mut self, value: f64, at: AttainedAt) {
        if value > self.value {
            self.value = value;
            self.at = at;
        }
    }
}

fn check_finite(seq: &SequenceSpec, f: &Functional, sums: &[f64]) -> Result<(), SeqError> {
    if let Some(n) = sums.iter().position(|s| !s.is_finite()) {
        let index = (1..=n).find(|&i| !seq.value(f, i).map(f64::is_finite).unwrap_or(false)).unwrap_or(n);
        return Err(SeqError::Infinite {
            functional: f.to_string(),
            index,
        });
    }
    Ok(())
}

impl SequenceSpec {
    /// Certified `sup_{n ≥ b} (1/n) Σ_{i≤n} E g(ξᵢ)`.
    pub fn sup_tail_average(&self, f: &Functional, b: usize) -> Result<AverageCertificate, SeqError> {
        if b == 0 {
            return Err(SeqError::ZeroIndex);
        }
        f.validate().map_err(SeqError::Parameter)?;
        match &self.structure {
            SequenceStructure::EventuallyPeriodic { preperiod, cycle } => {
                self.periodic_sup(f, b, preperiod.len(), cycle.len())
            }
            SequenceStructure::Parametric { prefix, .. } => self.parametric_sup(f, b, prefix.len()),
            SequenceStructure::Paired { .. } => Err(SeqError::CertificateOpen {
                functional: f.to_string(),
                b,
            }),
        }
    }

    fn periodic_sup(&self, f: &Functional, b: usize, p: usize, l: usize) -> Result<AverageCertificate, SeqError> {
        let start = b.max(p).max(1);
        // first n >= start in each residue class
        let last = start + l - 1;
        let sums = self.prefix_sums(f, last.max(p + l))?;
        check_finite(self, f, &sums)?;
        let cycle_total = sums[p + l] - sums[p];
        let mean = cycle_total / l as f64;
        let mut best = Best::new();
        for n in b..start {
            best.offer(sums[n] / n as f64, AttainedAt::Index(n));
        }
        let mut limit_needed = false;
        for n in start..=last {
            // C_r = S(n) − n·m̄, evaluated at the representative P + r
            let r = (n - p) % l;
            let c = sums[p + r] - (p + r) as f64 * mean;
            if c >= 0.0 {
                best.offer(sums[n] / n as f64, AttainedAt::Index(n));
            } else {
                limit_needed = true;
            }
        }
        if limit_needed {
            best.offer(mean, AttainedAt::Limit);
        }
        Ok(AverageCertificate {
            value: best.value,
            attained_at: best.at,
            horizon_used: last,
            error_budget: 0.0,
        })
    }

    fn parametric_sup(&self, f: &Functional, b: usize, p: usize) -> Result<AverageCertificate, SeqError> {
        let SequenceStructure::Parametric { family, .. } = &self.structure else {
            unreachable!()
        };
        let first = p + 1;
        let horizon = self.horizon.max(b).max(first + 1);
        // limit and direction from the two mixture components
        let mut limit = 0.0;
        let mut slope = 0.0;
        for kind in f.terms() {
            let base = family.base.evaluate(*kind)?;
            let pert = family.perturbation.evaluate(*kind)?;
            if !(base.is_finite() && pert.is_finite()) {
                return Err(SeqError::Infinite {
                    functional: kind.to_string(),
                    index: first,
                });
            }
            limit += base;
            slope += pert - base;
        }
        let nonincreasing = slope > 0.0;
        let sums = self.prefix_sums(f, horizon + 1)?;
        check_finite(self, f, &sums)?;
        let value_at = |i: usize| sums[i] - sums[i - 1];
        let tol = 1e-12 * (1.0 + limit.abs() + slope.abs());
        for i in first..=horizon {
            let step = value_at(i + 1) - value_at(i);
            let bad = if nonincreasing { step > tol } else { step < -tol };
            if bad {
                return Err(SeqError::NonMonotone {
                    functional: f.to_string(),
                    index: i,
                    left: value_at(i),
                    right: value_at(i + 1),
                });
            }
        }
        let avg = |n: usize| sums[n] / n as f64;
        let mut best = Best::new();
        if nonincreasing {
            let n1 = (p.max(1)..=horizon).find(|&n| value_at(n + 1) <= avg(n));
            if let Some(n1) = n1 {
                let end = b.max(n1);
                for n in b..=end {
                    best.offer(avg(n), AttainedAt::Index(n));
                }
                return Ok(AverageCertificate {
                    value: best.value,
                    attained_at: best.at,
                    horizon_used: end,
                    error_budget: 0.0,
                });
            }
            for n in b..=horizon {
                best.offer(avg(n), AttainedAt::Index(n));
            }
            best.offer(limit, AttainedAt::Limit);
            let budget = (value_at(horizon + 1) - best.value).max(0.0);
            Ok(AverageCertificate {
                value: best.value,
                attained_at: best.at,
                horizon_used: horizon,
                error_budget: budget,
            })
        } else {
            for n in b..=horizon {
                best.offer(avg(n), AttainedAt::Index(n));
            }
            best.offer(limit, AttainedAt::Limit);
            Ok(AverageCertificate {
                value: best.value,
                attained_at: best.at,
                horizon_used: horizon,
                error_budget: 0.0,
            })
        }
    }

    /// `max_{1 ≤ n ≤ b−1}` of the averages, with `attained_at = Empty` and value 1 when `b = 1`.
    pub fn head_max_certificate(&self, f: &Functional, b: usize) -> Result<AverageCertificate, SeqError> {
        if b == 0 {
            return Err(SeqError::ZeroIndex);
        }
        if b == 1 {
            return Ok(AverageCertificate {
                value: 1.0,
                attained_at: AttainedAt::Empty,
                horizon_used: 0,
                error_budget: 0.0,
            });
        }
        let sums = self.prefix_sums(f, b - 1)?;
        check_finite(self, f, &sums)?;
        let mut best = Best::new();
        for n in 1..b {
            best.offer(sums[n] / n as f64, AttainedAt::Index(n));
        }
        Ok(AverageCertificate {
            value: best.value,
            attained_at: best.at,
            horizon_used: b - 1,
            error_budget: 0.0,
        })
    }

    /// `max_{1 ≤ n ≤ b−1}` of the averages; 1 for the empty range `b = 1`.
    pub fn max_head_average(&self, f: &Functional, b: usize) -> Result<f64, SeqError> {
        Ok(self.head_max_certificate(f, b)?.value)
    }
}

/// Reads `(a, ε, d₁, d₂)` off the sequence for given `(h, c, b)`.
pub fn derive_constants(seq: &SequenceSpec, h: f64, c: f64, b: usize) -> Result<DerivedConstants, SeqError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(SeqError::Parameter(format!("h must be positive, got {h}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(SeqError::Parameter(format!("c must be positive, got {c}")));
    }
    if b == 0 {
        return Err(SeqError::ZeroIndex);
    }
    let drift = seq.sup_tail_average(&FunctionalKind::Mean.into(), b)?;
    if drift.upper() >= 0.0 {
        return Err(SeqError::NonNegativeDrift {
            b,
            sup_mean: drift.upper(),
        });
    }
    let truncation = seq.sup_tail_average(&FunctionalKind::TruncAbsBelow { c }.into(), b)?;
    let combined = Functional::negprob_plus_exp(h);
    let infinite = |e: SeqError| match e {
        SeqError::Infinite { .. } => SeqError::InfiniteMoment {
            functional: combined.to_string(),
        },
        other => other,
    };
    let tail_exp = seq.sup_tail_average(&combined, b).map_err(infinite)?;
    let head_exp = seq.head_max_certificate(&combined, b).map_err(infinite)?;
    let constants = TheoremConstants {
        a: -drift.upper(),
        b,
        c,
        epsilon: truncation.upper().max(0.0),
        h,
        d1: tail_exp.upper().max(1.0),
        d2: head_exp.upper().max(1.0),
    };
    Ok(DerivedConstants {
        constants,
        drift,
        truncation,
        tail_exp,
        head_exp,
    })
}

/// Smallest `b ≤ N₀` with `sup_{n ≥ b}` of the average means negative.
pub fn suggest_b(seq: &SequenceSpec) -> Result<usize, SeqError> {
    let mean: Functional = FunctionalKind::Mean.into();
    let negative = |b: usize| -> Result<bool, SeqError> { Ok(seq.sup_tail_average(&mean, b)?.upper() < 0.0) };
    let horizon = seq.horizon();
    if !negative(horizon)? {
        return Err(SeqError::NoNegativeDrift { horizon });
    }
    // the supremum is nonincreasing in b, so the predicate is monotone
    let (mut lo, mut hi) = (1usize, horizon);
    if negative(lo)? {
        return Ok(lo);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if negative(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
