use super::*;
use crate::bounds::s_factor;
use crate::dists::{evaluate_quadrature, DistributionSpec as D, FunctionalKind as K};
use crate::reference::{example3_constants, example3_model, example4_model};
use rand::{Rng, SeedableRng};

#[test]
fn example4_increments() {
    let inc = to_increment_sequence(&example4_model()).unwrap();
    let want = [9.0, 9.0, -1.0, -1.0, -1.0, -1.0];
    for (i, w) in want.iter().enumerate() {
        assert_eq!(inc.dist_at(i + 1).unwrap(), D::degenerate(*w));
    }
    assert!(matches!(inc.structure(), SequenceStructure::EventuallyPeriodic { .. }));
}

#[test]
fn example3_increments_keep_structure() {
    let inc = to_increment_sequence(&example3_model()).unwrap();
    assert!(matches!(inc.structure(), SequenceStructure::Parametric { .. }));
    assert_eq!(
        inc.dist_at(1).unwrap(),
        D::difference(D::degenerate(0.0), 2.0, D::uniform(1.0, 3.0))
    );
    assert_eq!(inc.kind_value(K::Mean, 1).unwrap(), -4.0);
    assert_eq!(inc.average(&K::Mean.into(), 4).unwrap(), -2.0);
    for i in [5, 6, 17, 300] {
        let direct = inc.dist_at(i).unwrap().evaluate(K::Mean).unwrap();
        assert!((direct - (-3.0 + 1.0 / i as f64)).abs() < 1e-12);
        assert!((inc.kind_value(K::Mean, i).unwrap() - direct).abs() < 1e-12);
    }
}

#[test]
fn zero_claims_give_negated_interarrivals() {
    let claims = SequenceSpec::iid(D::degenerate(0.0), 10).unwrap();
    let th = SequenceSpec::iid(D::uniform(1.0, 3.0), 10).unwrap();
    let m = RiskModelSpec::new(1.0, claims, th).unwrap();
    let inc = to_increment_sequence(&m).unwrap();
    let d = inc.dist_at(3).unwrap();
    assert_eq!(d.evaluate(K::Mean).unwrap(), -2.0);
    assert!((d.cdf(-2.5) - 0.25).abs() < 1e-12);
}

#[test]
fn mismatched_structures_fall_back_to_pairs() {
    let claims = SequenceSpec::iid(D::exponential(1.0), 10).unwrap();
    let th = SequenceSpec::parametric(
        vec![],
        WeightedPair {
            base: D::uniform(1.0, 3.0),
            perturbation: D::uniform(0.0, 1.0),
            weight: crate::seqmodel::HarmonicWeight {
                numerator: 1.0,
                offset: 1.0,
            },
        },
        10,
    )
    .unwrap();
    let claims2 = SequenceSpec::parametric(
        vec![],
        WeightedPair {
            base: D::exponential(1.0),
            perturbation: D::erlang_two(1.0),
            weight: crate::seqmodel::HarmonicWeight {
                numerator: 1.0,
                offset: 0.0,
            },
        },
        10,
    )
    .unwrap();
    let m = RiskModelSpec::new(2.0, claims.clone(), th.clone()).unwrap();
    assert!(matches!(
        to_increment_sequence(&m).unwrap().structure(),
        SequenceStructure::Parametric { .. }
    ));
    let m = RiskModelSpec::new(2.0, claims2, th).unwrap();
    let inc = to_increment_sequence(&m).unwrap();
    assert!(matches!(inc.structure(), SequenceStructure::Paired { .. }));
    assert!(inc.max_head_average(&K::Mean.into(), 5).is_ok());
}

#[test]
fn lcm_of_cycles() {
    let claims = SequenceSpec::periodic(vec![D::degenerate(1.0)], vec![D::degenerate(0.0), D::degenerate(2.0)], 10).unwrap();
    let th = SequenceSpec::periodic(
        vec![],
        vec![D::degenerate(1.0), D::degenerate(2.0), D::degenerate(3.0)],
        10,
    )
    .unwrap();
    let m = RiskModelSpec::new(1.0, claims.clone(), th.clone()).unwrap();
    let inc = to_increment_sequence(&m).unwrap();
    let SequenceStructure::EventuallyPeriodic { preperiod, cycle } = inc.structure() else {
        panic!()
    };
    assert_eq!((preperiod.len(), cycle.len()), (1, 6));
    for i in 1..40 {
        let z = claims.dist_at(i).unwrap().evaluate(K::Mean).unwrap();
        let t = th.dist_at(i).unwrap().evaluate(K::Mean).unwrap();
        assert_eq!(inc.kind_value(K::Mean, i).unwrap(), z - t);
    }
}

#[test]
fn invalid_models_rejected() {
    let neg = SequenceSpec::iid(D::uniform(-1.0, 1.0), 10).unwrap();
    let ok = SequenceSpec::iid(D::uniform(1.0, 3.0), 10).unwrap();
    assert!(RiskModelSpec::new(1.0, neg, ok.clone()).is_err());
    let zero = SequenceSpec::iid(D::degenerate(0.0), 10).unwrap();
    assert!(RiskModelSpec::new(1.0, ok.clone(), zero).is_err());
    assert!(RiskModelSpec::new(0.0, ok.clone(), ok).is_err());
}

#[test]
fn example3_corollary_constants() {
    let d = derive_corollary2_inputs(&example3_model(), 1.0 / 3.0, 6.0, 1).unwrap();
    let k = d.constants;
    assert_eq!(k.alpha, 2.0);
    assert_eq!(k.epsilon, 0.0);
    let nu1 = (2.0 + 2.0 * (4.0f64 / 3.0).exp()) / 4.0;
    assert!((k.nu1 - nu1).abs() < 1e-12 && k.nu1 <= 2.4);
    assert_eq!(k.nu2, 1.0);
}

#[test]
fn trivial_corollary_inputs() {
    let claims = SequenceSpec::iid(D::degenerate(1.0), 10).unwrap();
    let th = SequenceSpec::iid(D::degenerate(1.0), 10).unwrap();
    let m = RiskModelSpec::new(2.0, claims, th).unwrap();
    let k = derive_corollary2_inputs(&m, 0.7, 1.0, 1).unwrap().constants;
    assert_eq!(k.alpha, 1.0);

    let th = SequenceSpec::iid(D::uniform(1.0, 3.0), 10).unwrap();
    let m = RiskModelSpec::new(2.0, SequenceSpec::iid(D::degenerate(1.0), 10).unwrap(), th).unwrap();
    assert_eq!(derive_corollary2_inputs(&m, 0.5, 6.0, 1).unwrap().constants.epsilon, 0.0);
}

#[test]
fn mapping_matches_statement() {
    let k = map_to_theorem(&example3_constants(), 2.0);
    assert_eq!((k.a, k.b, k.c, k.epsilon, k.h, k.d1, k.d2), (2.0, 1, 6.0, 0.0, 1.0 / 3.0, 3.4, 2.0));
    let mut c = example3_constants();
    c.beta = 5;
    let k = map_to_theorem(&c, 2.0);
    assert!((s_factor(5, k.d2) - 2.0 * (2f64.powi(4) - 1.0)).abs() < 1e-12 * 30.0);
}

#[test]
fn example3_bounds() {
    let m = example3_model();
    let k = example3_constants();
    let c2 = c2_constant(&k, 2.0, 9.0 / 102.0).unwrap();
    assert!((169.0..=170.0).contains(&c2), "{c2}");
    assert!((hat_delta(&k, 2.0, 9.0 / 102.0) - 0.2).abs() < 1e-12);
    let c2 = c2_constant(&k, 2.0, 5.0 / 102.0).unwrap();
    assert!((60.0..=61.0).contains(&c2), "{c2}");
    assert_eq!(lundberg_bound(&m, &k, 9.0 / 102.0, 0.0).unwrap(), 1.0);
    assert!(lundberg_bound(&m, &k, 0.1, 10.0).is_err());
}

#[test]
fn c2_formula_matches_mapped_prefactor() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut tested = 0;
    while tested < 100 {
        let c = CorollaryTwoConstants {
            alpha: rng.random_range(0.1..5.0),
            beta: rng.random_range(1..10),
            kappa: rng.random_range(0.1..8.0),
            epsilon: rng.random_range(0.0..0.5),
            gamma: rng.random_range(0.05..2.0),
            nu1: rng.random_range(1.0..4.0),
            nu2: rng.random_range(1.0..4.0),
        };
        let p = rng.random_range(0.5..3.0);
        let Ok(dm) = max_feasible_delta_c2(&c, p) else { continue };
        let delta = dm * rng.random_range(0.05..0.95);
        let direct = c2_constant(&c, p, delta).unwrap();
        let cert = corollary_two_certificate(&c, p, delta).unwrap();
        assert!((direct - cert.c1).abs() <= 1e-12 * direct, "{direct} vs {}", cert.c1);
        tested += 1;
    }
}

fn max_feasible_delta_c2(c: &CorollaryTwoConstants, p: f64) -> Result<f64, BoundError> {
    crate::bounds::max_feasible_delta(&map_to_theorem(c, p))
}

#[test]
fn direct_route_at_least_as_tight_on_example3() {
    let m = example3_model();
    let k = example3_constants();
    let inc = to_increment_sequence(&m).unwrap();
    let direct = crate::seqmodel::derive_constants(&inc, k.gamma, k.kappa, k.beta).unwrap().constants;
    for delta in [9.0 / 102.0, 5.0 / 102.0] {
        for j in 0..40 {
            let u = 25.0 * j as f64;
            let mapped = lundberg_bound(&m, &k, delta, u).unwrap();
            let own = crate::bounds::tail_bound(&direct, delta, u).unwrap();
            assert!(own <= mapped * (1.0 + 1e-9), "u = {u}: {own} > {mapped}");
        }
    }
}

/// Dense scan of `ln M_Z(y) + ln M_θ(−py)` by quadrature, refined by bisection on the scan bracket.
fn scan_root(z: &D, t: &D, p: f64, y_max: f64) -> Option<f64> {
    let phi = |y: f64| {
        evaluate_quadrature(z, K::Mgf { y }).unwrap().ln() + evaluate_quadrature(t, K::Mgf { y: -p * y }).unwrap().ln()
    };
    let n = 20_000;
    let mut prev = 1e-9;
    for j in 1..n {
        let y = y_max * j as f64 / n as f64;
        let v = phi(y);
        if !v.is_finite() {
            return None;
        }
        if v > 0.0 {
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

#[test]
fn adjustment_coefficient_exponential() {
    let (z, t) = (D::exponential(1.0), D::exponential(1.0));
    let r = adjustment_coefficient(&z, &t, 2.0).unwrap().unwrap();
    assert!((r - 0.5).abs() < 1e-10);
    let mgf = z.evaluate(K::Mgf { y: r }).unwrap() * t.evaluate(K::Mgf { y: -2.0 * r }).unwrap();
    assert!((mgf - 1.0).abs() <= 1e-10);
    let scan = scan_root(&z, &t, 2.0, 0.999).unwrap();
    assert!((r - scan).abs() < 1e-6);
}

#[test]
fn adjustment_coefficient_other_models() {
    let cases = [
        (D::uniform(0.0, 2.0), D::uniform(1.0, 3.0), 1.0),
        (D::erlang_two(2.0), D::exponential(0.5), 0.7),
        (D::finite_discrete([(0.0, 0.5), (3.0, 0.5)]), D::uniform(0.5, 1.5), 2.0),
    ];
    for (z, t, p) in cases {
        let r = adjustment_coefficient(&z, &t, p).unwrap().unwrap();
        let mgf = z.evaluate(K::Mgf { y: r }).unwrap() * t.evaluate(K::Mgf { y: -p * r }).unwrap();
        assert!((mgf - 1.0).abs() <= 1e-10, "{mgf}");
        let cap = match z {
            D::ErlangTwo { rate } => rate * 0.9999,
            _ => 5.0,
        };
        let scan = scan_root(&z, &t, p, cap).unwrap();
        assert!((r - scan).abs() < 1e-6, "{r} vs {scan}");
    }
}

#[test]
fn adjustment_coefficient_none_cases() {
    assert_eq!(
        adjustment_coefficient(&D::degenerate(0.0), &D::exponential(1.0), 1.0).unwrap(),
        None
    );
    // a tiny exponential component still forces a crossing below its rate
    let z = D::mixture([(0.99, D::degenerate(0.0)), (0.01, D::exponential(1.0))]);
    let r = adjustment_coefficient(&z, &D::degenerate(10.0), 2.0).unwrap().unwrap();
    assert!(r < 1.0);
    assert!(matches!(
        adjustment_coefficient(&D::degenerate(5.0), &D::degenerate(1.0), 2.0),
        Err(RiskError::NetProfit(_))
    ));
}

#[test]
fn corollary_rate_below_adjustment_coefficient() {
    let z = D::exponential(1.0);
    let t = D::exponential(1.0);
    let r = adjustment_coefficient(&z, &t, 2.0).unwrap().unwrap();
    let claims = SequenceSpec::iid(z, 10).unwrap();
    let th = SequenceSpec::iid(t, 10).unwrap();
    let m = RiskModelSpec::new(2.0, claims, th).unwrap();
    for gamma in [0.1, 0.3, 0.5, 0.9] {
        for kappa in [1.0, 2.0, 4.0] {
            let Ok(d) = derive_corollary2_inputs(&m, gamma, kappa, 1) else { continue };
            let Ok(dm) = max_feasible_delta_c2(&d.constants, 2.0) else { continue };
            assert!(dm * gamma <= r);
        }
    }
}

#[test]
fn degenerate_ruin() {
    let m = example4_model();
    assert_eq!(degenerate_running_max(&m).unwrap(), 18.0);
    for (u, want) in [(0.0, 1), (10.0, 1), (17.5, 1), (17.99, 1), (18.0, 0), (20.0, 0), (100.0, 0)] {
        assert_eq!(exact_ruin_degenerate(&m, u).unwrap(), want, "u = {u}");
    }
    let mut prev = 1;
    for j in 0..400 {
        let v = exact_ruin_degenerate(&m, j as f64 * 0.1).unwrap();
        assert!(v <= prev);
        prev = v;
    }
    let zero = RiskModelSpec::new(
        1.0,
        SequenceSpec::iid(D::degenerate(0.0), 4).unwrap(),
        SequenceSpec::iid(D::degenerate(1.0), 4).unwrap(),
    )
    .unwrap();
    assert_eq!(exact_ruin_degenerate(&zero, 0.0).unwrap(), 0);
    assert!(matches!(exact_ruin_degenerate(&example3_model(), 1.0), Err(RiskError::NotDegenerate)));
}

#[test]
fn kappa_grid_from_quantiles() {
    let m = example3_model();
    let g = kappa_grid(&m);
    assert!(g.contains(&6.0) && g.contains(&4.0));
    let best = kappa_grid_search(&m, 1.0 / 3.0, 1, 200.0, &g).unwrap();
    assert!(best.bound_at_u <= lundberg_bound(&m, &example3_constants(), 9.0 / 102.0, 200.0).unwrap());
}

#[test]
fn serde_round_trip() {
    let m = example3_model();
    let s = serde_json::to_string(&m).unwrap();
    let back: RiskModelSpec = serde_json::from_str(&s).unwrap();
    assert_eq!(m, back);
}
