//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are bisected in order of largest local error estimate until the
//! summed estimate falls below `max(abs_tol, rel_tol * |I|)`. Known kinks and
//! jumps of the integrand should be passed as breakpoints so that every
//! initial panel is smooth.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use super::CompensatedSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of panels kept in the work list.
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-15,
            max_panels: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature on [{lo}, {hi}] did not converge: estimate {estimate:e}, error {error:e} after {panels} panels")]
    NotConverged {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
        panels: usize,
    },
    #[error("integrand returned a non-finite value at x = {at}")]
    NonFinite { at: f64 },
    #[error("semi-infinite integral from {start} failed to decay within {panels} panels")]
    TailNotDecaying { start: f64, panels: usize },
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Panel, QuadError> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { at: center });
    }
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { at: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { at: x2 });
        }
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Panel {
        lo,
        hi,
        value,
        error,
    })
}

fn initial_nodes(lo: f64, hi: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut nodes: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > lo && *b < hi)
        .collect();
    nodes.push(lo);
    nodes.push(hi);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// Integrates `f` over `[lo, hi]`, splitting first at `breakpoints`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<f64, QuadError> {
    if hi <= lo {
        return Ok(0.0);
    }
    let nodes = initial_nodes(lo, hi, breakpoints);
    let mut heap = BinaryHeap::new();
    let (mut total, mut error) = (0.0, 0.0);
    for w in nodes.windows(2) {
        let panel = kronrod_panel(&f, w[0], w[1])?;
        total += panel.value;
        error += panel.error;
        heap.push(panel);
    }
    loop {
        if error <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            // running totals drift under repeated updates; recompute once
            let exact_error: f64 = heap.iter().map(|p| p.error).sum();
            let exact_total = heap.iter().map(|p| p.value).collect::<CompensatedSum>().value();
            if exact_error <= opts.abs_tol.max(opts.rel_tol * exact_total.abs()) {
                return Ok(exact_total);
            }
            total = exact_total;
            error = exact_error;
        }
        let worst = heap.pop().expect("work list is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if heap.len() + 2 > opts.max_panels || mid <= worst.lo || mid >= worst.hi {
            heap.push(worst);
            return Err(QuadError::NotConverged {
                lo,
                hi,
                estimate: total,
                error,
                panels: heap.len(),
            });
        }
        let left = kronrod_panel(&f, worst.lo, mid)?;
        let right = kronrod_panel(&f, mid, worst.hi)?;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// Integrates `f` over `[start, ∞)` for an integrand with an exponential
/// envelope `exp(-decay * x)`.
///
/// The half-line is consumed in panels of width `1/decay` (after the last
/// breakpoint) until a panel's contribution drops below `1e-17` of the running
/// absolute total for several consecutive panels.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    decay: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<f64, QuadError> {
    const MAX_PANELS: usize = 100_000;
    const QUIET_PANELS: usize = 8;
    let width = 1.0 / decay;
    let last_break = breakpoints
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > start)
        .fold(start, f64::max);

    let mut total = CompensatedSum::new();
    let mut abs_total = 0.0;
    let mut lo = start;
    if last_break > start {
        let head = integrate(&f, start, last_break, breakpoints, opts)?;
        total.add(head);
        abs_total += head.abs();
        lo = last_break;
    }
    let mut quiet = 0;
    for _ in 0..MAX_PANELS {
        let hi = lo + width;
        let piece = integrate(&f, lo, hi, &[], opts)?;
        total.add(piece);
        abs_total += piece.abs();
        if piece.abs() <= 1e-17 * abs_total || (abs_total == 0.0 && piece == 0.0) {
            quiet += 1;
            if quiet >= QUIET_PANELS {
                return Ok(total.value());
            }
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    Err(QuadError::TailNotDecaying {
        start,
        panels: MAX_PANELS,
    })
}
