//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ruinbound::bounds::{capital_delta, certify, direct_chernoff_bound, max_feasible_delta, tail_bound};
use ruinbound::dists::{evaluate, evaluate_quadrature, DistributionSpec as D, FunctionalKind as K};
use ruinbound::mc::{check_domination, simulate_ruin, simulate_ruin_grid, simulate_sup_grid, SimulationPlan};
use ruinbound::reference::*;
use ruinbound::riskmodel::{
    adjustment_coefficient, c2_constant, derive_corollary2_inputs, exact_ruin_degenerate, hat_delta, lundberg_bound,
    map_to_theorem, to_increment_sequence, CorollaryTwoConstants, RiskModelSpec,
};
use ruinbound::seqmodel::{derive_constants, SequenceSpec};

const GOLDEN_TIME: Duration = Duration::from_secs(1);
const DOMINANCE_TIME: Duration = Duration::from_secs(10);
const MC_TIME: Duration = Duration::from_secs(120);
const MARGIN_TOL: f64 = 1e-12;
const EX2_DELTA_TOL: f64 = 1e-5;
const DOMINANCE_REL_TOL: f64 = 1e-9;
const ORACLE_REL_TOL: f64 = 1e-8;
const FORMULA_REL_TOL: f64 = 1e-12;
const ROOT_MGF_TOL: f64 = 1e-10;
const ROOT_SCAN_TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            notes: Vec::new(),
        }
    }
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.pass = false;
            self.notes.push(format!("FAILED: {what}"));
        } else {
            self.notes.push(what);
        }
    }
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let d = derive_constants(&example1_sequence(), 0.8, 2.0, 7).expect("derivable constants");
    let k = d.constants;
    o.require(k.a == 1.0 / 7.0, format!("a = {} (exactly 1/7)", k.a));
    o.require(k.epsilon == 0.0, format!("ε = {}", k.epsilon));
    o.require(k.d1 <= 1.79, format!("d₁ = {:.6} ≤ 1.79", k.d1));
    o.require(k.d2 <= 2.48, format!("d₂ = {:.6} ≤ 2.48", k.d2));
    let pk = example1_constants();
    let cd = capital_delta(&pk, EXAMPLE1_DELTA);
    o.require((cd - 1.0 / 14.0).abs() <= MARGIN_TOL, format!("Δ = {cd:.15}"));
    let c = certify(&pk, EXAMPLE1_DELTA).expect("feasible");
    o.require((c.rate - 4.0 / 315.0).abs() <= 1e-15, format!("rate = {:.10}", c.rate));
    o.require((1490.0..=1502.0).contains(&c.c1), format!("c₁ = {:.4} in [1490, 1502]", c.c1));
    o.require(
        (575.0..=579.0).contains(&c.crossover_x),
        format!("crossover = {:.3} in [575, 579]", c.crossover_x),
    );
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let k = example2_constants();
    let dm = max_feasible_delta(&k).expect("feasible");
    o.require((dm - 10.0 / 117.0).abs() <= MARGIN_TOL, format!("δ_max = {dm:.15}"));
    let cd = capital_delta(&k, EXAMPLE2_DELTA);
    o.require((cd - 0.11528).abs() <= EX2_DELTA_TOL, format!("Δ = {cd:.7}"));
    let c = certify(&k, EXAMPLE2_DELTA).expect("feasible");
    o.require((175.0..=178.0).contains(&c.c1), format!("c₁ = {:.4} in [175, 178]", c.c1));
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let m = example3_model();
    let d = derive_corollary2_inputs(&m, 1.0 / 3.0, 6.0, 1).expect("derivable constants");
    let k = d.constants;
    o.require(k.alpha == 2.0, format!("α = {}", k.alpha));
    o.require(k.epsilon == 0.0, format!("ϵ = {}", k.epsilon));
    o.require(k.nu1 <= 2.4, format!("ν₁ = {:.6} ≤ 2.4", k.nu1));
    o.require(k.nu2 == 1.0, format!("ν₂ = {}", k.nu2));
    let pk = example3_constants();
    let (fast, slow) = (EXAMPLE3_DELTAS[0], EXAMPLE3_DELTAS[1]);
    let hd = hat_delta(&pk, m.p(), fast);
    o.require((hd - 0.2).abs() <= MARGIN_TOL, format!("Δ̂(9/102) = {hd:.15}"));
    let c2 = c2_constant(&pk, m.p(), fast).expect("feasible");
    o.require((169.0..=170.0).contains(&c2), format!("c₂(9/102) = {c2:.4} in [169, 170]"));
    let hd = hat_delta(&pk, m.p(), slow);
    o.require((hd - 1.0).abs() <= MARGIN_TOL, format!("Δ̂(5/102) = {hd:.15}"));
    let c2 = c2_constant(&pk, m.p(), slow).expect("feasible");
    o.require((60.0..=61.0).contains(&c2), format!("c₂(5/102) = {c2:.4} in [60, 61]"));
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let m = example4_model();
    let plan = SimulationPlan::new(1_000, 100, 0.0, 42);
    for (u, want) in [(0.0, 1u8), (10.0, 1), (17.99, 1), (18.0, 0), (100.0, 0)] {
        let exact = exact_ruin_degenerate(&m, u).expect("degenerate model");
        let sim = simulate_ruin(&m, u, &plan).expect("valid plan");
        o.require(
            exact == want && sim.point == f64::from(want),
            format!("ψ({u}) exact = {exact}, simulated = {}", sim.point),
        );
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let ex3 = to_increment_sequence(&example3_model()).expect("increments");
    let p3 = example3_model().p();
    let cases: Vec<(&str, SequenceSpec, _, f64)> = vec![
        ("example 1", example1_sequence(), example1_constants(), EXAMPLE1_DELTA),
        ("example 2", example2_sequence(), example2_constants(), EXAMPLE2_DELTA),
        ("example 3, δ = 9/102", ex3.clone(), map_to_theorem(&example3_constants(), p3), EXAMPLE3_DELTAS[0]),
        ("example 3, δ = 5/102", ex3, map_to_theorem(&example3_constants(), p3), EXAMPLE3_DELTAS[1]),
    ];
    for (name, seq, k, delta) in cases {
        let cert = certify(&k, delta).expect("feasible");
        let mut worst = f64::NEG_INFINITY;
        let mut ok = true;
        for j in 0..50 {
            let x = 1000.0 * j as f64 / 49.0;
            let direct = direct_chernoff_bound(&seq, &k, cert.rate, x, 500).expect("series");
            let prefactor = cert.uncapped(x);
            let capped = tail_bound(&k, delta, x).expect("feasible");
            ok &= direct <= prefactor * (1.0 + DOMINANCE_REL_TOL);
            ok &= direct.min(1.0) <= capped * (1.0 + DOMINANCE_REL_TOL);
            worst = worst.max(direct / prefactor);
        }
        o.require(ok, format!("{name}: max direct / (c₁e^(-δhx)) = {worst:.6} over 50 points"));
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let plan = SimulationPlan::new(100_000, 10_000, 0.0, 42);
    let walks = [
        ("example 1", example1_sequence(), example1_constants(), EXAMPLE1_DELTA, 100.0),
        ("example 2", example2_sequence(), example2_constants(), EXAMPLE2_DELTA, 20.0),
    ];
    for (name, seq, k, delta, step) in walks {
        let grid: Vec<f64> = (0..10).map(|j| step * j as f64).collect();
        let est = simulate_sup_grid(&seq, &grid, &plan).expect("valid plan");
        let cert = certify(&k, delta).expect("feasible");
        match check_domination(&est, &cert, &plan) {
            Ok(r) => {
                let min_margin = r.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
                o.require(true, format!("{name}: 10 points dominated, smallest margin {min_margin:.4}"));
            }
            Err(e) => o.require(false, format!("{name}: {e}")),
        }
    }
    let m = example3_model();
    let grid: Vec<f64> = (0..10).map(|j| 25.0 * j as f64).collect();
    let est = simulate_ruin_grid(&m, &grid, &plan).expect("valid plan");
    for delta in EXAMPLE3_DELTAS {
        let cert = certify(&map_to_theorem(&example3_constants(), m.p()), delta).expect("feasible");
        match check_domination(&est, &cert, &plan) {
            Ok(r) => {
                let min_margin = r.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
                o.require(
                    true,
                    format!("example 3, δ = {delta:.5}: 10 points dominated, smallest margin {min_margin:.4}"),
                );
            }
            Err(e) => o.require(false, format!("example 3, δ = {delta:.5}: {e}")),
        }
    }
    o
}

fn oracle_grid() -> Vec<D> {
    vec![
        D::uniform(0.0, 2.0),
        D::uniform(-2.0, 0.0),
        D::uniform(1.0, 3.0),
        D::uniform(-1.5, 2.5),
        D::uniform(-3.0, -1.0),
        D::uniform(0.5, 4.0),
        D::shifted_exponential(1.0, -2.0),
        D::exponential(1.0),
        D::shifted_exponential(2.5, 0.3),
        D::shifted_exponential(1.5, -0.4),
        D::shifted_exponential(3.0, -0.1),
        D::erlang_two(1.0),
        D::erlang_two(2.5),
        D::erlang_two(1.5),
        D::exponential_linear_tail(5),
        D::exponential_linear_tail(2),
        D::exponential_linear_tail(20),
        D::mixture([(0.3, D::uniform(0.0, 1.0)), (0.7, D::exponential(2.0))]),
        D::mixture([(0.5, D::erlang_two(3.0)), (0.5, D::shifted_exponential(2.0, -1.0))]),
        D::mixture([(0.2, D::uniform(-2.0, 2.0)), (0.8, D::erlang_two(2.0))]),
    ]
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let functionals = [
        K::Mean,
        K::TruncAbsBelow { c: 0.5 },
        K::TruncAbsBelow { c: 2.0 },
        K::NegProb,
        K::ExpPlus { h: 0.3 },
        K::ExpPlus { h: 0.8 },
        K::Mgf { y: -0.7 },
        K::Mgf { y: 0.4 },
        K::InterarrivalTrunc { threshold: 1.5 },
        K::ExpMoment { gamma: 0.25 },
    ];
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for d in oracle_grid() {
        for f in functionals {
            let a = evaluate(&d, f).expect("closed form");
            let q = evaluate_quadrature(&d, f).expect("quadrature");
            cases += 1;
            if a.is_infinite() || q.is_infinite() {
                ok &= a == q;
                continue;
            }
            let err = (a - q).abs() / (1.0 + a.abs());
            worst = worst.max(err);
            ok &= err <= ORACLE_REL_TOL;
        }
    }
    o.require(ok && cases == 200, format!("{cases} analytic/quadrature pairs, worst scaled error {worst:.2e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut tested = 0;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    while tested < 100 {
        let c = CorollaryTwoConstants {
            alpha: rng.random_range(0.1..5.0),
            beta: rng.random_range(1..12),
            kappa: rng.random_range(0.1..8.0),
            epsilon: rng.random_range(0.0..0.5),
            gamma: rng.random_range(0.05..2.0),
            nu1: rng.random_range(1.0..4.0),
            nu2: rng.random_range(1.0..4.0),
        };
        let p = rng.random_range(0.5..3.0);
        let Ok(dm) = max_feasible_delta(&map_to_theorem(&c, p)) else { continue };
        let delta = dm * rng.random_range(0.02..0.98);
        let u = rng.random_range(0.0..2000.0);
        let m = RiskModelSpec::new(
            p,
            SequenceSpec::iid(D::exponential(1.0), 4).unwrap(),
            SequenceSpec::iid(D::uniform(1.0, 3.0), 4).unwrap(),
        )
        .unwrap();
        let lb = lundberg_bound(&m, &c, delta, u).expect("feasible");
        let via_theorem = tail_bound(&map_to_theorem(&c, p), delta, u).expect("feasible");
        let c2 = c2_constant(&c, p, delta).expect("feasible");
        let via_c2 = (c2.ln() - delta * c.gamma * u).exp().min(1.0);
        let rel = |x: f64, y: f64| if x == y { 0.0 } else { (x - y).abs() / x.abs().max(y.abs()) };
        let err = rel(lb, via_theorem).max(rel(lb, via_c2));
        worst = worst.max(err);
        ok &= err <= FORMULA_REL_TOL;
        tested += 1;
    }
    o.require(ok, format!("100 random feasible configurations, worst relative gap {worst:.2e}"));
    o
}

/// Dense scan of `ln E e^{yZ} + ln E e^{−2yθ}` by quadrature, then bisection on the bracket.
fn scan_root(z: &D, t: &D, p: f64, y_max: f64) -> Option<f64> {
    let phi = |y: f64| {
        evaluate_quadrature(z, K::Mgf { y }).unwrap().ln() + evaluate_quadrature(t, K::Mgf { y: -p * y }).unwrap().ln()
    };
    let n = 50_000;
    let mut prev = 0.0;
    for j in 1..n {
        let y = y_max * j as f64 / n as f64;
        if phi(y) > 0.0 {
            let (mut a, mut b) = (prev, y);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if phi(mid) > 0.0 {
                    b = mid
                } else {
                    a = mid
                }
            }
            return Some(0.5 * (a + b));
        }
        prev = y;
    }
    None
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let (z, t, p) = (D::exponential(1.0), D::exponential(1.0), 2.0);
    let r = adjustment_coefficient(&z, &t, p).expect("net profit holds").expect("root exists");
    let mgf = evaluate(&z, K::Mgf { y: r }).unwrap() * evaluate(&t, K::Mgf { y: -p * r }).unwrap();
    o.require((mgf - 1.0).abs() <= ROOT_MGF_TOL, format!("R = {r:.12}, |E e^(R(Z−2θ)) − 1| = {:.2e}", (mgf - 1.0).abs()));
    let scan = scan_root(&z, &t, p, 0.999).expect("scan finds a root");
    o.require((r - scan).abs() <= ROOT_SCAN_TOL, format!("grid scan root {scan:.9}"));
    let m = RiskModelSpec::new(
        p,
        SequenceSpec::iid(z, 4).unwrap(),
        SequenceSpec::iid(t, 4).unwrap(),
    )
    .unwrap();
    let mut ok = true;
    let mut checked = 0;
    let mut fastest: f64 = 0.0;
    for gamma in [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9] {
        for kappa in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let Ok(d) = derive_corollary2_inputs(&m, gamma, kappa, 1) else { continue };
            let Ok(dm) = max_feasible_delta(&map_to_theorem(&d.constants, p)) else { continue };
            checked += 1;
            fastest = fastest.max(dm * gamma);
            ok &= dm * gamma <= r;
        }
    }
    o.require(ok && checked > 0, format!("{checked} feasible (γ, ϰ): largest δγ = {fastest:.6} ≤ R"));
    o
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("example 1 golden constants", criterion_1, GOLDEN_TIME),
        ("example 2 golden constants", criterion_2, GOLDEN_TIME),
        ("example 3 golden constants", criterion_3, GOLDEN_TIME),
        ("example 4 exact ruin", criterion_4, GOLDEN_TIME),
        ("direct Chernoff series dominated", criterion_5, DOMINANCE_TIME),
        ("Monte Carlo domination", criterion_6, MC_TIME),
        ("oracle equivalence", criterion_7, Duration::MAX),
        ("adjustment coefficient baseline", criterion_8, Duration::MAX),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if elapsed > *limit {
            outcome.require(false, format!("runtime {elapsed:.2?} exceeds {limit:.0?}"));
        }
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {}: {name} ({elapsed:.2?})", i + 1);
        for n in &outcome.notes {
            println!("      {n}");
        }
        if !outcome.pass {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("acceptance: all 8 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 8 criteria fail");
        ExitCode::FAILURE
    }
}
