//! Quadrature evaluation of functionals.
//!
//! Every family is integrated against its density, so these routines are an
//! independent route to the closed forms in `analytic`. The conditioning
//! helper [`expect_over`] is also used by the analytic path for differences,
//! where only the outer integral over the subtrahend needs quadrature.

use crate::numerics::{integrate, integrate_semi_infinite, QuadOptions};

use super::{DistError, DistributionSpec, FunctionalKind};

/// `E g(T)` for a non-difference distribution of `T`.
///
/// `breakpoints` are points in `t` where `g` may jump or kink; `decay_slack`
/// is the exponential growth rate of `g` as `t → ∞` (must be below any
/// exponential rate of `T`).
pub(crate) fn expect_over<G: Fn(f64) -> f64>(
    dist: &DistributionSpec,
    g: &G,
    breakpoints: &[f64],
    growth: f64,
    opts: QuadOptions,
) -> Result<f64, DistError> {
    match dist {
        DistributionSpec::Degenerate { point } => Ok(g(*point)),
        DistributionSpec::FiniteDiscrete { atoms } => Ok(atoms
            .iter()
            .filter(|a| a.prob > 0.0)
            .map(|a| a.prob * g(a.value))
            .sum()),
        DistributionSpec::Uniform { lo, hi } => {
            let len = hi - lo;
            Ok(integrate(|t| g(t) / len, *lo, *hi, breakpoints, opts)?)
        }
        DistributionSpec::ShiftedExponential { rate, shift } => {
            if growth >= *rate {
                return Ok(f64::INFINITY);
            }
            let (rate, loc) = (*rate, *shift);
            Ok(integrate_semi_infinite(
                |t| g(t) * rate * (-rate * (t - loc)).exp(),
                loc,
                rate - growth,
                breakpoints,
                opts,
            )?)
        }
        DistributionSpec::ErlangTwo { rate } => {
            if growth >= *rate {
                return Ok(f64::INFINITY);
            }
            let rate = *rate;
            Ok(integrate_semi_infinite(
                |t| g(t) * rate * rate * t * (-rate * t).exp(),
                0.0,
                rate - growth,
                breakpoints,
                opts,
            )?)
        }
        DistributionSpec::Mixture { components } => {
            let mut total = 0.0;
            for c in components.iter().filter(|c| c.weight > 0.0) {
                let v = expect_over(&c.dist, g, breakpoints, growth, opts)?;
                if v.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                total += c.weight * v;
            }
            Ok(total)
        }
        DistributionSpec::Difference { .. } => Err(DistError::Malformed(
            "nested difference distributions are not supported".into(),
        )),
    }
}

/// Functional of `X + shift` by direct quadrature against the density of `X`.
pub(crate) fn shifted(
    dist: &DistributionSpec,
    shift: f64,
    f: FunctionalKind,
    opts: QuadOptions,
) -> Result<f64, DistError> {
    let bps: Vec<f64> = f.breakpoints().iter().map(|b| b - shift).collect();
    expect_over(dist, &|x| f.integrand(x + shift), &bps, f.growth_rate(), opts)
}

/// Functional of `Z - scale·θ` by nested quadrature: inner over `Z`, outer over `θ`.
pub(crate) fn difference(
    minuend: &DistributionSpec,
    scale: f64,
    subtrahend: &DistributionSpec,
    f: FunctionalKind,
    opts: QuadOptions,
) -> Result<f64, DistError> {
    let inner_opts = QuadOptions {
        rel_tol: opts.rel_tol * 1e-2,
        ..opts
    };
    // divergence of the inner moment does not depend on the shift
    if shifted(minuend, 0.0, f, inner_opts)?.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let failure = std::cell::RefCell::new(None);
    let g = |t: f64| match shifted(minuend, -scale * t, f, inner_opts) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let bps = conditioning_breakpoints(minuend, scale, f);
    // e^{y(Z - scale θ)} grows in θ only for y < 0
    let growth = match f {
        FunctionalKind::Mgf { y } if y < 0.0 => -y * scale,
        _ => 0.0,
    };
    let value = expect_over(subtrahend, &g, &bps, growth, opts)?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Values of `θ` at which `t ↦ E g(Z - scale·t)` may fail to be smooth.
pub(crate) fn conditioning_breakpoints(minuend: &DistributionSpec, scale: f64, f: FunctionalKind) -> Vec<f64> {
    let knots = minuend.knots();
    let mut out = Vec::new();
    for tau in f.breakpoints() {
        for k in &knots {
            out.push((k - tau) / scale);
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
