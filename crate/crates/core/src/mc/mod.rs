//! Monte Carlo estimates of `P(max_{n ≤ H} Sₙ > x)` and of ruin probabilities,
//! with exact binomial intervals.
//!
//! Trial `k` draws from its own ChaCha8 stream (seed, stream `k`), so hit
//! counts do not depend on how trials are spread over threads. One path per
//! trial serves every threshold in a grid, which couples the estimates.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::bounds::BoundCertificate;
use crate::riskmodel::RiskModelSpec;
use crate::seqmodel::SequenceSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("invalid simulation plan: {0}")]
    Plan(String),
    #[error("certified bound violated at {} of {} thresholds", .0.violations().len(), .0.rows.len())]
    Domination(Box<DominationReport>),
}

pub const DEFAULT_CONFIDENCE: f64 = 0.99;

fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub trials: u64,
    /// Maximum number of increments per trial.
    pub horizon: usize,
    pub threshold: f64,
    pub seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence_level: f64,
    /// For ruin: stop a trial once the accumulated inter-occurrence times exceed this time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_horizon: Option<f64>,
}

impl SimulationPlan {
    pub fn new(trials: u64, horizon: usize, threshold: f64, seed: u64) -> Self {
        Self {
            trials,
            horizon,
            threshold,
            seed,
            confidence_level: DEFAULT_CONFIDENCE,
            time_horizon: None,
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.trials == 0 {
            return Err(McError::Plan("trials must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(McError::Plan("horizon must be at least 1".into()));
        }
        if !self.threshold.is_finite() {
            return Err(McError::Plan(format!("threshold must be finite, got {}", self.threshold)));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(McError::Plan(format!(
                "confidence level must lie in (0, 1), got {}",
                self.confidence_level
            )));
        }
        if let Some(t) = self.time_horizon {
            if !(t > 0.0) {
                return Err(McError::Plan(format!("time horizon must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationEstimate {
    pub threshold: f64,
    pub hits: u64,
    pub trials: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence_level: f64,
}

impl SimulationEstimate {
    fn new(threshold: f64, hits: u64, trials: u64, level: f64) -> Self {
        let (ci_low, ci_high) = clopper_pearson(hits, trials, level);
        Self {
            threshold,
            hits,
            trials,
            point: hits as f64 / trials as f64,
            ci_low,
            ci_high,
            confidence_level: level,
        }
    }
}

/// Two-sided exact (Clopper–Pearson) interval for a binomial proportion.
pub fn clopper_pearson(hits: u64, trials: u64, level: f64) -> (f64, f64) {
    assert!(hits <= trials && trials > 0);
    let tail = (1.0 - level) / 2.0;
    let (k, n) = (hits as f64, trials as f64);
    let low = if hits == 0 {
        0.0
    } else {
        beta_quantile(k, n - k + 1.0, tail)
    };
    let high = if hits == trials {
        1.0
    } else {
        beta_quantile(k + 1.0, n - k, 1.0 - tail)
    };
    let point = k / n;
    (low.min(point), high.max(point))
}

/// Inverse of the regularized incomplete beta function by bisection.
fn beta_quantile(a: f64, b: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Per-trial random stream: ChaCha8 keyed by the plan seed, stream number = trial index.
#[derive(Debug, Clone)]
pub struct RandomStream(ChaCha8Rng);

impl RandomStream {
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Self(rng)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Counts, for each threshold, the trials whose path maximum exceeds it.
/// `path_max(rng, stop)` returns the maximum, or any value above `stop` once exceeded.
fn count_exceedances<F>(plan: &SimulationPlan, thresholds: &[f64], path_max: F) -> Result<Vec<SimulationEstimate>, McError>
where
    F: Fn(&mut RandomStream, f64) -> f64 + Sync,
{
    plan.validate()?;
    if thresholds.iter().any(|x| !x.is_finite()) {
        return Err(McError::Plan("thresholds must be finite".into()));
    }
    if thresholds.is_empty() {
        return Ok(Vec::new());
    }
    let stop = thresholds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let counts = (0..plan.trials)
        .into_par_iter()
        .fold(
            || vec![0u64; thresholds.len()],
            |mut acc, trial| {
                let mut rng = RandomStream::for_trial(plan.seed, trial);
                let m = path_max(&mut rng, stop);
                for (c, x) in acc.iter_mut().zip(thresholds) {
                    if m > *x {
                        *c += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; thresholds.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(thresholds
        .iter()
        .zip(counts)
        .map(|(x, hits)| SimulationEstimate::new(*x, hits, plan.trials, plan.confidence_level))
        .collect())
}

/// `P(max_{1 ≤ n ≤ H} Sₙ > x)` for every `x` in `thresholds`, from one path per trial.
pub fn simulate_sup_grid(
    seq: &SequenceSpec,
    thresholds: &[f64],
    plan: &SimulationPlan,
) -> Result<Vec<SimulationEstimate>, McError> {
    count_exceedances(plan, thresholds, |rng, stop| {
        let mut s = 0.0;
        let mut best = f64::NEG_INFINITY;
        for i in 1..=plan.horizon {
            s += seq.sample_at(i, rng);
            if s > best {
                best = s;
                if best > stop {
                    break;
                }
            }
        }
        best
    })
}

/// `P(max_{1 ≤ n ≤ H} Sₙ > plan.threshold)`, a lower estimate of `P(M∞ > x)`.
pub fn simulate_sup(seq: &SequenceSpec, plan: &SimulationPlan) -> Result<SimulationEstimate, McError> {
    Ok(simulate_sup_grid(seq, &[plan.threshold], plan)?[0])
}

/// Ruin within `plan.horizon` claims (and before `plan.time_horizon`, if set) for every initial
/// surplus in `levels`.
pub fn simulate_ruin_grid(
    m: &RiskModelSpec,
    levels: &[f64],
    plan: &SimulationPlan,
) -> Result<Vec<SimulationEstimate>, McError> {
    if levels.iter().any(|u| *u < 0.0) {
        return Err(McError::Plan("initial surplus must be nonnegative".into()));
    }
    let p = m.p();
    let time_cap = plan.time_horizon.unwrap_or(f64::INFINITY);
    count_exceedances(plan, levels, |rng, stop| {
        let mut s = 0.0;
        let mut t = 0.0;
        let mut best = f64::NEG_INFINITY;
        for i in 1..=plan.horizon {
            let (z, theta) = m.sample_pair(i, rng);
            t += theta;
            if t > time_cap {
                break;
            }
            s += z - p * theta;
            if s > best {
                best = s;
                if best > stop {
                    break;
                }
            }
        }
        best
    })
}

/// `ψ(u)` estimate at `plan.threshold`.
pub fn simulate_ruin(m: &RiskModelSpec, u: f64, plan: &SimulationPlan) -> Result<SimulationEstimate, McError> {
    Ok(simulate_ruin_grid(m, &[u], plan)?[0])
}

/// What to simulate for a domination report.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Walk(&'a SequenceSpec),
    Risk(&'a RiskModelSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationRow {
    pub threshold: f64,
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    /// `bound − ci_low`; negative means the bound is violated.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub rows: Vec<DominationRow>,
    pub horizon: usize,
    pub seed: u64,
    pub confidence_level: f64,
}

impl DominationReport {
    pub fn violations(&self) -> Vec<&DominationRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Simulates every grid point and checks `ci_low ≤ bound`. Any violation is an error carrying the
/// full report.
pub fn bound_domination_report(
    target: Target<'_>,
    certificate: &BoundCertificate,
    grid: &[f64],
    plan: &SimulationPlan,
) -> Result<DominationReport, McError> {
    let estimates = match target {
        Target::Walk(seq) => simulate_sup_grid(seq, grid, plan)?,
        Target::Risk(m) => simulate_ruin_grid(m, grid, plan)?,
    };
    check_domination(&estimates, certificate, plan)
}

/// Compares existing estimates with a certificate; any `ci_low > bound` is an error.
pub fn check_domination(
    estimates: &[SimulationEstimate],
    certificate: &BoundCertificate,
    plan: &SimulationPlan,
) -> Result<DominationReport, McError> {
    let rows: Vec<DominationRow> = estimates
        .iter()
        .map(|e| {
            let bound = certificate.bound(e.threshold);
            DominationRow {
                threshold: e.threshold,
                hits: e.hits,
                trials: e.trials,
                estimate: e.point,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
                bound,
                margin: bound - e.ci_low,
                pass: e.ci_low <= bound,
            }
        })
        .collect();
    let report = DominationReport {
        rows,
        horizon: plan.horizon,
        seed: plan.seed,
        confidence_level: plan.confidence_level,
    };
    if report.all_pass() {
        Ok(report)
    } else {
        Err(McError::Domination(Box::new(report)))
    }
}

/// Warning text when the horizon is short relative to the drift: the maximum of a walk with
/// average drift `−a` typically occurs within `O(x/a)` steps.
pub fn horizon_advisory(a: f64, threshold: f64, horizon: usize) -> Option<String> {
    let need = 10.0 * threshold / a;
    (a > 0.0 && (horizon as f64) < need).then(|| {
        format!("horizon {horizon} is below 10·x/a = {need:.0}; the estimate may miss late exceedances")
    })
}
