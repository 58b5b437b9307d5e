//! Closed-form functionals of `X + shift` for every non-difference family.
//!
//! Divergent exponential moments come back as `+∞`.

use super::{DistributionSpec, FunctionalKind};

pub(crate) fn shifted(dist: &DistributionSpec, shift: f64, f: FunctionalKind) -> f64 {
    match dist {
        DistributionSpec::Degenerate { point } => f.integrand(point + shift),
        DistributionSpec::FiniteDiscrete { atoms } => atoms
            .iter()
            .filter(|a| a.prob > 0.0)
            .map(|a| a.prob * f.integrand(a.value + shift))
            .sum(),
        DistributionSpec::Uniform { lo, hi } => uniform(lo + shift, hi + shift, f),
        DistributionSpec::ShiftedExponential { rate, shift: loc } => exponential(*rate, loc + shift, f),
        DistributionSpec::ErlangTwo { rate } => erlang_two(*rate, shift, f),
        DistributionSpec::Mixture { components } => {
            let mut total = 0.0;
            for c in components.iter().filter(|c| c.weight > 0.0) {
                let v = shifted(&c.dist, shift, f);
                if v.is_infinite() {
                    return f64::INFINITY;
                }
                total += c.weight * v;
            }
            total
        }
        DistributionSpec::Difference { .. } => {
            unreachable!("difference distributions are evaluated by conditioning")
        }
    }
}

fn uniform(lo: f64, hi: f64, f: FunctionalKind) -> f64 {
    let len = hi - lo;
    match f {
        FunctionalKind::Mean => 0.5 * (lo + hi),
        FunctionalKind::TruncAbsBelow { c } => {
            let t = -c;
            if lo >= t {
                0.0
            } else {
                let m = hi.min(t);
                // ∫_lo^m (-x) dx / len
                (lo - m) * (lo + m) / (2.0 * len)
            }
        }
        FunctionalKind::NegProb => ((hi.min(0.0) - lo) / len).clamp(0.0, 1.0),
        FunctionalKind::ExpPlus { h } => {
            if hi <= 0.0 {
                0.0
            } else {
                let q = lo.max(0.0);
                (h * q).exp() * (h * (hi - q)).exp_m1() / (h * len)
            }
        }
        FunctionalKind::Mgf { y } => uniform_mgf(lo, len, y),
        FunctionalKind::ExpMoment { gamma } => uniform_mgf(lo, len, gamma),
        FunctionalKind::InterarrivalTrunc { threshold } => {
            if threshold >= hi {
                0.0
            } else {
                let q = lo.max(threshold);
                (hi - q) * (hi + q) / (2.0 * len)
            }
        }
    }
}

fn uniform_mgf(lo: f64, len: f64, y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        (y * lo).exp() * (y * len).exp_m1() / (y * len)
    }
}

/// `X = loc + E/rate`, `E ~ Exp(1)`.
fn exponential(rate: f64, loc: f64, f: FunctionalKind) -> f64 {
    match f {
        FunctionalKind::Mean => loc + 1.0 / rate,
        FunctionalKind::TruncAbsBelow { c } => {
            let t = -c;
            if loc >= t {
                0.0
            } else {
                // E(X 1{X <= t}) = (loc + 1/rate) - (t + 1/rate) e^{-rate (t - loc)}
                let partial = (loc + 1.0 / rate) - (t + 1.0 / rate) * (-rate * (t - loc)).exp();
                -partial
            }
        }
        FunctionalKind::NegProb => {
            if loc > 0.0 {
                0.0
            } else {
                -(rate * loc).exp_m1()
            }
        }
        FunctionalKind::ExpPlus { h } => {
            if h >= rate {
                f64::INFINITY
            } else {
                let q = loc.max(0.0);
                rate * (rate * loc + (h - rate) * q).exp() / (rate - h)
            }
        }
        FunctionalKind::Mgf { y } => exponential_mgf(rate, loc, y),
        FunctionalKind::ExpMoment { gamma } => exponential_mgf(rate, loc, gamma),
        FunctionalKind::InterarrivalTrunc { threshold } => {
            let q = loc.max(threshold);
            (q + 1.0 / rate) * (-rate * (q - loc)).exp()
        }
    }
}

fn exponential_mgf(rate: f64, loc: f64, y: f64) -> f64 {
    if y >= rate {
        f64::INFINITY
    } else {
        (y * loc).exp() * rate / (rate - y)
    }
}

/// `Y = X + shift` with `X` Erlang(2, rate), density `rate² x e^{-rate x}` on `[0, ∞)`.
fn erlang_two(rate: f64, shift: f64, f: FunctionalKind) -> f64 {
    // P(X <= u) for u > 0
    let cdf = |u: f64| -(-rate * u).exp_m1() - rate * u * (-rate * u).exp();
    // E(X 1{X > u}) for u >= 0
    let upper_mean = |u: f64| (-rate * u).exp() * (rate * rate * u * u + 2.0 * rate * u + 2.0) / rate;
    match f {
        FunctionalKind::Mean => 2.0 / rate + shift,
        FunctionalKind::TruncAbsBelow { c } => {
            let u = -c - shift;
            if u <= 0.0 {
                0.0
            } else {
                // E((-X - shift) 1{X <= u}) = -shift F(u) - E(X 1{X <= u})
                let lower_mean = 2.0 / rate - upper_mean(u);
                -shift * cdf(u) - lower_mean
            }
        }
        FunctionalKind::NegProb => {
            let u = -shift;
            if u <= 0.0 {
                0.0
            } else {
                cdf(u)
            }
        }
        FunctionalKind::ExpPlus { h } => {
            if h >= rate {
                return f64::INFINITY;
            }
            let k = rate - h;
            let u = -shift;
            if u <= 0.0 {
                (h * shift).exp() * (rate / k).powi(2)
            } else {
                // e^{h shift} rate² ∫_u^∞ x e^{-k x} dx, with h·shift - k·u = -rate·u
                rate * rate * (-rate * u).exp() * (u / k + 1.0 / (k * k))
            }
        }
        FunctionalKind::Mgf { y } => erlang_mgf(rate, shift, y),
        FunctionalKind::ExpMoment { gamma } => erlang_mgf(rate, shift, gamma),
        FunctionalKind::InterarrivalTrunc { threshold } => {
            let v = threshold - shift;
            if v <= 0.0 {
                2.0 / rate + shift
            } else {
                upper_mean(v) + shift * (-rate * v).exp() * (1.0 + rate * v)
            }
        }
    }
}

fn erlang_mgf(rate: f64, shift: f64, y: f64) -> f64 {
    if y >= rate {
        f64::INFINITY
    } else {
        (y * shift).exp() * (rate / (rate - y)).powi(2)
    }
}
