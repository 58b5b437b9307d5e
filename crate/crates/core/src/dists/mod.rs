//! Symbolic real-valued distributions and the moment functionals the
//! random-walk bounds are built from.
//!
//! Every family in [`DistributionSpec`] has closed forms for all
//! [`FunctionalKind`]s. [`evaluate`] uses them directly, except for
//! [`DistributionSpec::Difference`], where `Z − s·θ` is handled by conditioning
//! on `θ`: the inner functional is closed-form and the outer expectation is an
//! adaptive quadrature. [`evaluate_quadrature`] integrates everything against
//! densities instead and is kept as an independent cross-check.

mod analytic;
mod functional;
mod numeric;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{QuadError, QuadOptions};

pub use functional::{Functional, FunctionalKind};

const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("malformed distribution: {0}")]
    Malformed(String),
    #[error("invalid functional: {0}")]
    InvalidFunctional(String),
    #[error("functional {functional} is not supported for {what}")]
    Unsupported { functional: String, what: String },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub dist: DistributionSpec,
}

/// A real-valued distribution from a small closed family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Degenerate {
        point: f64,
    },
    FiniteDiscrete {
        atoms: Vec<Atom>,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Density `rate·e^{−rate·(x−shift)}` on `[shift, ∞)`.
    ShiftedExponential {
        rate: f64,
        shift: f64,
    },
    /// Erlang (Gamma with shape 2), density `rate²·x·e^{−rate·x}` on `[0, ∞)`.
    ErlangTwo {
        rate: f64,
    },
    Mixture {
        components: Vec<Component>,
    },
    /// Law of `Z − scale·θ` for independent `Z ~ minuend`, `θ ~ subtrahend`.
    Difference {
        minuend: Box<DistributionSpec>,
        scale: f64,
        subtrahend: Box<DistributionSpec>,
    },
}

impl DistributionSpec {
    pub fn degenerate(point: f64) -> Self {
        Self::Degenerate { point }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        Self::Uniform { lo, hi }
    }

    pub fn exponential(rate: f64) -> Self {
        Self::ShiftedExponential { rate, shift: 0.0 }
    }

    pub fn shifted_exponential(rate: f64, shift: f64) -> Self {
        Self::ShiftedExponential { rate, shift }
    }

    pub fn erlang_two(rate: f64) -> Self {
        Self::ErlangTwo { rate }
    }

    pub fn finite_discrete(atoms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Self::FiniteDiscrete {
            atoms: atoms.into_iter().map(|(value, prob)| Atom { value, prob }).collect(),
        }
    }

    pub fn mixture(components: impl IntoIterator<Item = (f64, DistributionSpec)>) -> Self {
        Self::Mixture {
            components: components
                .into_iter()
                .map(|(weight, dist)| Component { weight, dist })
                .collect(),
        }
    }

    /// Law of `minuend − scale·subtrahend`. Two point masses collapse to a point mass.
    pub fn difference(minuend: DistributionSpec, scale: f64, subtrahend: DistributionSpec) -> Self {
        match (&minuend, &subtrahend) {
            (Self::Degenerate { point: z }, Self::Degenerate { point: t }) => Self::degenerate(z - scale * t),
            _ => Self::Difference {
                minuend: Box::new(minuend),
                scale,
                subtrahend: Box::new(subtrahend),
            },
        }
    }

    /// Claim law with survival function `e^{−x}(1 + x/i)` on `[0, ∞)`:
    /// the mixture `(i−1)/i · Exp(1) + 1/i · Erlang(2, 1)`.
    pub fn exponential_linear_tail(i: usize) -> Self {
        assert!(i >= 1, "index starts at 1");
        let w = 1.0 / i as f64;
        Self::mixture([(1.0 - w, Self::exponential(1.0)), (w, Self::erlang_two(1.0))])
    }

    pub fn validate(&self) -> Result<(), DistError> {
        let bad = |msg: String| Err(DistError::Malformed(msg));
        match self {
            Self::Degenerate { point } => {
                if !point.is_finite() {
                    return bad(format!("degenerate point must be finite, got {point}"));
                }
            }
            Self::FiniteDiscrete { atoms } => {
                if atoms.is_empty() {
                    return bad("finite discrete distribution has no atoms".into());
                }
                for a in atoms {
                    if !a.value.is_finite() || !a.prob.is_finite() || a.prob < 0.0 {
                        return bad(format!("invalid atom ({}, {})", a.value, a.prob));
                    }
                }
                let total: f64 = atoms.iter().map(|a| a.prob).sum();
                if (total - 1.0).abs() > PROB_SUM_TOL {
                    return bad(format!("atom probabilities sum to {total}, not 1"));
                }
            }
            Self::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!("uniform requires finite lo < hi, got [{lo}, {hi}]"));
                }
            }
            Self::ShiftedExponential { rate, shift } => {
                if !(rate.is_finite() && *rate > 0.0 && shift.is_finite()) {
                    return bad(format!("shifted exponential requires rate > 0, got rate {rate}, shift {shift}"));
                }
            }
            Self::ErlangTwo { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad(format!("Erlang-2 requires rate > 0, got {rate}"));
                }
            }
            Self::Mixture { components } => {
                if components.is_empty() {
                    return bad("mixture has no components".into());
                }
                for c in components {
                    if !c.weight.is_finite() || c.weight < 0.0 {
                        return bad(format!("invalid mixture weight {}", c.weight));
                    }
                    c.dist.validate()?;
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > PROB_SUM_TOL {
                    return bad(format!("mixture weights sum to {total}, not 1"));
                }
            }
            Self::Difference {
                minuend,
                scale,
                subtrahend,
            } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad(format!("difference scale must be positive, got {scale}"));
                }
                if minuend.contains_difference() || subtrahend.contains_difference() {
                    return bad("difference components may not themselves be differences".into());
                }
                minuend.validate()?;
                subtrahend.validate()?;
            }
        }
        Ok(())
    }

    fn contains_difference(&self) -> bool {
        match self {
            Self::Difference { .. } => true,
            Self::Mixture { components } => components.iter().any(|c| c.dist.contains_difference()),
            _ => false,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Self::Degenerate { .. })
    }

    /// Smallest point of the support (`−∞` when unbounded below).
    pub fn support_min(&self) -> f64 {
        match self {
            Self::Degenerate { point } => *point,
            Self::FiniteDiscrete { atoms } => atoms
                .iter()
                .filter(|a| a.prob > 0.0)
                .map(|a| a.value)
                .fold(f64::INFINITY, f64::min),
            Self::Uniform { lo, .. } => *lo,
            Self::ShiftedExponential { shift, .. } => *shift,
            Self::ErlangTwo { .. } => 0.0,
            Self::Mixture { components } => components
                .iter()
                .filter(|c| c.weight > 0.0)
                .map(|c| c.dist.support_min())
                .fold(f64::INFINITY, f64::min),
            Self::Difference {
                minuend,
                scale,
                subtrahend,
            } => minuend.support_min() - scale * subtrahend.support_max(),
        }
    }

    /// Largest point of the support (`+∞` when unbounded above).
    pub fn support_max(&self) -> f64 {
        match self {
            Self::Degenerate { point } => *point,
            Self::FiniteDiscrete { atoms } => atoms
                .iter()
                .filter(|a| a.prob > 0.0)
                .map(|a| a.value)
                .fold(f64::NEG_INFINITY, f64::max),
            Self::Uniform { hi, .. } => *hi,
            Self::ShiftedExponential { .. } | Self::ErlangTwo { .. } => f64::INFINITY,
            Self::Mixture { components } => components
                .iter()
                .filter(|c| c.weight > 0.0)
                .map(|c| c.dist.support_max())
                .fold(f64::NEG_INFINITY, f64::max),
            Self::Difference {
                minuend,
                scale,
                subtrahend,
            } => minuend.support_max() - scale * subtrahend.support_min(),
        }
    }

    /// Probability of the single point `x`.
    pub fn atom_at(&self, x: f64) -> f64 {
        match self {
            Self::Degenerate { point } => f64::from(u8::from(*point == x)),
            Self::FiniteDiscrete { atoms } => atoms.iter().filter(|a| a.value == x).map(|a| a.prob).sum(),
            Self::Uniform { .. } | Self::ShiftedExponential { .. } | Self::ErlangTwo { .. } => 0.0,
            Self::Mixture { components } => components.iter().map(|c| c.weight * c.dist.atom_at(x)).sum(),
            Self::Difference { .. } => 0.0,
        }
    }

    /// Support endpoints and atoms: the points where functionals of a shifted
    /// copy stop being smooth in the shift.
    pub fn knots(&self) -> Vec<f64> {
        let mut out = match self {
            Self::Degenerate { point } => vec![*point],
            Self::FiniteDiscrete { atoms } => atoms.iter().map(|a| a.value).collect(),
            Self::Uniform { lo, hi } => vec![*lo, *hi],
            Self::ShiftedExponential { shift, .. } => vec![*shift],
            Self::ErlangTwo { .. } => vec![0.0],
            Self::Mixture { components } => components.iter().flat_map(|c| c.dist.knots()).collect(),
            Self::Difference { .. } => Vec::new(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Cumulative distribution function `P(X ≤ x)` (non-difference families).
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Degenerate { point } => f64::from(u8::from(*point <= x)),
            Self::FiniteDiscrete { atoms } => atoms.iter().filter(|a| a.value <= x).map(|a| a.prob).sum(),
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::ShiftedExponential { rate, shift } => {
                if x <= *shift {
                    0.0
                } else {
                    -(-rate * (x - shift)).exp_m1()
                }
            }
            Self::ErlangTwo { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1() - rate * x * (-rate * x).exp()
                }
            }
            Self::Mixture { components } => components.iter().map(|c| c.weight * c.dist.cdf(x)).sum(),
            Self::Difference {
                minuend,
                scale,
                subtrahend,
            } => {
                // P(Z − sθ ≤ x) = E_θ P(Z − x − sθ ≤ 0)
                let f = FunctionalKind::NegProb;
                let g = |t: f64| analytic::shifted(minuend, -x - scale * t, f);
                let bps: Vec<f64> = numeric::conditioning_breakpoints(minuend, *scale, f)
                    .into_iter()
                    .map(|t| t - x / scale)
                    .collect();
                numeric::expect_over(subtrahend, &g, &bps, 0.0, QuadOptions::default()).unwrap_or(f64::NAN)
            }
        }
    }

    /// Generalized inverse of the CDF, `inf{x : F(x) ≥ q}`, by bisection.
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let (mut lo, mut hi) = (self.support_min(), self.support_max());
        if q <= 0.0 {
            return lo;
        }
        if !hi.is_finite() {
            let mut width = 1.0;
            hi = lo.max(0.0) + width;
            while self.cdf(hi) < q && width < 1e12 {
                width *= 2.0;
                hi = lo.max(0.0) + width;
            }
        }
        if !lo.is_finite() {
            lo = hi - 1.0;
            while self.cdf(lo) >= q {
                lo -= 2.0 * (hi - lo);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= q {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // bisection stops just above an atom; report the atom itself
        let snap = 1e-9 * (1.0 + hi.abs());
        self.knots()
            .into_iter()
            .find(|k| *k <= hi && *k >= hi - snap && self.cdf(*k) >= q)
            .unwrap_or(hi)
    }

    /// Draws one value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Degenerate { point } => *point,
            Self::FiniteDiscrete { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.prob;
                    if u < acc {
                        return a.value;
                    }
                }
                atoms.iter().rev().find(|a| a.prob > 0.0).map_or(atoms[0].value, |a| a.value)
            }
            Self::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Self::ShiftedExponential { rate, shift } => {
                let e: f64 = Exp1.sample(rng);
                shift + e / rate
            }
            Self::ErlangTwo { rate } => {
                let e1: f64 = Exp1.sample(rng);
                let e2: f64 = Exp1.sample(rng);
                (e1 + e2) / rate
            }
            Self::Mixture { components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for c in components {
                    acc += c.weight;
                    if u < acc {
                        return c.dist.sample(rng);
                    }
                }
                let last = components.iter().rev().find(|c| c.weight > 0.0).unwrap_or(&components[0]);
                last.dist.sample(rng)
            }
            Self::Difference {
                minuend,
                scale,
                subtrahend,
            } => {
                let z = minuend.sample(rng);
                let t = subtrahend.sample(rng);
                z - scale * t
            }
        }
    }

    pub fn evaluate(&self, f: FunctionalKind) -> Result<f64, DistError> {
        evaluate(self, f)
    }
}

fn check(dist: &DistributionSpec, f: FunctionalKind) -> Result<(), DistError> {
    f.validate().map_err(DistError::InvalidFunctional)?;
    dist.validate()
}

/// Evaluates a moment functional, returning `+∞` for divergent exponential moments.
pub fn evaluate(dist: &DistributionSpec, f: FunctionalKind) -> Result<f64, DistError> {
    check(dist, f)?;
    evaluate_unchecked(dist, f)
}

fn evaluate_unchecked(dist: &DistributionSpec, f: FunctionalKind) -> Result<f64, DistError> {
    match dist {
        DistributionSpec::Difference {
            minuend,
            scale,
            subtrahend,
        } => difference_functional(minuend, *scale, subtrahend, f),
        DistributionSpec::Mixture { components } if components.iter().any(|c| c.dist.contains_difference()) => {
            let mut total = 0.0;
            for c in components.iter().filter(|c| c.weight > 0.0) {
                let v = evaluate_unchecked(&c.dist, f)?;
                if v.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                total += c.weight * v;
            }
            Ok(total)
        }
        _ => Ok(analytic::shifted(dist, 0.0, f)),
    }
}

/// Functional of `Z − p·θ` for independent `Z`, `θ`.
///
/// Mean and exponential moments factor exactly; truncated functionals are
/// computed by conditioning on `θ` (closed form in `Z`, quadrature in `θ`).
pub fn evaluate_difference(
    z: &DistributionSpec,
    p: f64,
    theta: &DistributionSpec,
    f: FunctionalKind,
) -> Result<f64, DistError> {
    let d = DistributionSpec::Difference {
        minuend: Box::new(z.clone()),
        scale: p,
        subtrahend: Box::new(theta.clone()),
    };
    check(&d, f)?;
    difference_functional(z, p, theta, f)
}

fn difference_functional(
    z: &DistributionSpec,
    p: f64,
    theta: &DistributionSpec,
    f: FunctionalKind,
) -> Result<f64, DistError> {
    match f {
        FunctionalKind::Mean => Ok(analytic::shifted(z, 0.0, f) - p * analytic::shifted(theta, 0.0, f)),
        FunctionalKind::Mgf { y } | FunctionalKind::ExpMoment { gamma: y } => {
            let mz = analytic::shifted(z, 0.0, FunctionalKind::Mgf { y });
            let mt = analytic::shifted(theta, 0.0, FunctionalKind::Mgf { y: -p * y });
            if mz.is_infinite() || mt.is_infinite() {
                Ok(f64::INFINITY)
            } else {
                Ok(mz * mt)
            }
        }
        FunctionalKind::TruncAbsBelow { .. } | FunctionalKind::NegProb | FunctionalKind::ExpPlus { .. } => {
            if analytic::shifted(z, 0.0, f).is_infinite() {
                return Ok(f64::INFINITY);
            }
            let g = |t: f64| analytic::shifted(z, -p * t, f);
            let bps = numeric::conditioning_breakpoints(z, p, f);
            numeric::expect_over(theta, &g, &bps, 0.0, QuadOptions::with_rel_tol(1e-10))
        }
        FunctionalKind::InterarrivalTrunc { .. } => Err(DistError::Unsupported {
            functional: f.to_string(),
            what: "difference distributions".into(),
        }),
    }
}

/// Evaluates a functional by quadrature against densities only (no closed forms).
pub fn evaluate_quadrature(dist: &DistributionSpec, f: FunctionalKind) -> Result<f64, DistError> {
    check(dist, f)?;
    quadrature_unchecked(dist, f)
}

fn quadrature_unchecked(dist: &DistributionSpec, f: FunctionalKind) -> Result<f64, DistError> {
    let opts = QuadOptions::with_rel_tol(1e-11);
    match dist {
        DistributionSpec::Difference {
            minuend,
            scale,
            subtrahend,
        } => {
            if matches!(f, FunctionalKind::InterarrivalTrunc { .. }) {
                return Err(DistError::Unsupported {
                    functional: f.to_string(),
                    what: "difference distributions".into(),
                });
            }
            numeric::difference(minuend, *scale, subtrahend, f, opts)
        }
        DistributionSpec::Mixture { components } => {
            let mut total = 0.0;
            for c in components.iter().filter(|c| c.weight > 0.0) {
                let v = quadrature_unchecked(&c.dist, f)?;
                if v.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                total += c.weight * v;
            }
            Ok(total)
        }
        _ => numeric::shifted(dist, 0.0, f, opts),
    }
}
