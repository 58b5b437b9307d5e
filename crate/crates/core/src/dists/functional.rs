use serde::{Deserialize, Serialize};

/// A moment functional `E g(X)` of a single distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalKind {
    /// `E X`
    Mean,
    /// `E(|X| 1{X <= -c})`
    TruncAbsBelow { c: f64 },
    /// `P(X <= 0)`
    NegProb,
    /// `E(e^{hX} 1{X > 0})`
    ExpPlus { h: f64 },
    /// `E e^{yX}`, any real `y`
    Mgf { y: f64 },
    /// `E(X 1{X >= threshold})`; used on inter-occurrence times with threshold `ϰ/p`
    InterarrivalTrunc { threshold: f64 },
    /// `E e^{γX}` for `γ > 0`
    ExpMoment { gamma: f64 },
}

impl FunctionalKind {
    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be a positive finite number, got {v}"))
            }
        };
        match *self {
            FunctionalKind::TruncAbsBelow { c } => positive("c", c),
            FunctionalKind::ExpPlus { h } => positive("h", h),
            FunctionalKind::ExpMoment { gamma } => positive("gamma", gamma),
            FunctionalKind::Mgf { y } if !y.is_finite() => Err(format!("y must be finite, got {y}")),
            FunctionalKind::InterarrivalTrunc { threshold } if !threshold.is_finite() => {
                Err(format!("threshold must be finite, got {threshold}"))
            }
            _ => Ok(()),
        }
    }

    /// Integrand `g(x)` of the functional.
    pub fn integrand(&self, x: f64) -> f64 {
        match *self {
            FunctionalKind::Mean => x,
            FunctionalKind::TruncAbsBelow { c } => {
                if x <= -c {
                    -x
                } else {
                    0.0
                }
            }
            FunctionalKind::NegProb => {
                if x <= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionalKind::ExpPlus { h } => {
                if x > 0.0 {
                    (h * x).exp()
                } else {
                    0.0
                }
            }
            FunctionalKind::Mgf { y } => (y * x).exp(),
            FunctionalKind::InterarrivalTrunc { threshold } => {
                if x >= threshold {
                    x
                } else {
                    0.0
                }
            }
            FunctionalKind::ExpMoment { gamma } => (gamma * x).exp(),
        }
    }

    /// Points where the integrand has a jump or kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            FunctionalKind::TruncAbsBelow { c } => vec![-c],
            FunctionalKind::NegProb | FunctionalKind::ExpPlus { .. } => vec![0.0],
            FunctionalKind::InterarrivalTrunc { threshold } => vec![threshold],
            _ => Vec::new(),
        }
    }

    /// Exponential growth rate of the integrand as `x → +∞`.
    pub fn growth_rate(&self) -> f64 {
        match *self {
            FunctionalKind::ExpPlus { h } => h,
            FunctionalKind::Mgf { y } => y.max(0.0),
            FunctionalKind::ExpMoment { gamma } => gamma,
            _ => 0.0,
        }
    }

    /// Stable key for caching; parameters are compared bitwise.
    pub(crate) fn cache_key(&self) -> (u8, u64) {
        match *self {
            FunctionalKind::Mean => (0, 0),
            FunctionalKind::TruncAbsBelow { c } => (1, c.to_bits()),
            FunctionalKind::NegProb => (2, 0),
            FunctionalKind::ExpPlus { h } => (3, h.to_bits()),
            FunctionalKind::Mgf { y } => (4, y.to_bits()),
            FunctionalKind::InterarrivalTrunc { threshold } => (5, threshold.to_bits()),
            FunctionalKind::ExpMoment { gamma } => (6, gamma.to_bits()),
        }
    }
}

/// A sum of functionals evaluated on the same distribution, e.g. the
/// `P(ξ ≤ 0) + E(e^{hξ} 1{ξ > 0})` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    terms: Vec<FunctionalKind>,
}

impl Functional {
    pub fn new(terms: Vec<FunctionalKind>) -> Self {
        assert!(!terms.is_empty(), "a functional needs at least one term");
        Self { terms }
    }

    /// `P(ξ ≤ 0) + E(e^{hξ} 1{ξ > 0})`
    pub fn negprob_plus_exp(h: f64) -> Self {
        Self::new(vec![FunctionalKind::NegProb, FunctionalKind::ExpPlus { h }])
    }

    pub fn terms(&self) -> &[FunctionalKind] {
        &self.terms
    }

    pub fn validate(&self) -> Result<(), String> {
        self.terms.iter().try_for_each(FunctionalKind::validate)
    }
}

impl From<FunctionalKind> for Functional {
    fn from(kind: FunctionalKind) -> Self {
        Self { terms: vec![kind] }
    }
}

impl std::fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FunctionalKind::Mean => write!(f, "E X"),
            FunctionalKind::TruncAbsBelow { c } => write!(f, "E(|X| 1{{X <= -{c}}})"),
            FunctionalKind::NegProb => write!(f, "P(X <= 0)"),
            FunctionalKind::ExpPlus { h } => write!(f, "E(e^({h} X) 1{{X > 0}})"),
            FunctionalKind::Mgf { y } => write!(f, "E e^({y} X)"),
            FunctionalKind::InterarrivalTrunc { threshold } => write!(f, "E(X 1{{X >= {threshold}}})"),
            FunctionalKind::ExpMoment { gamma } => write!(f, "E e^({gamma} X)"),
        }
    }
}

impl std::fmt::Display for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
