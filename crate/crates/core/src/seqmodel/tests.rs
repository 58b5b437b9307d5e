use super::*;
use crate::dists::{DistributionSpec as D, Functional, FunctionalKind as K};
use proptest::prelude::*;

fn ex1() -> SequenceSpec {
    SequenceSpec::periodic(
        vec![],
        vec![D::uniform(0.0, 2.0), D::uniform(-2.0, 0.0), D::shifted_exponential(1.0, -2.0)],
        10_000,
    )
    .unwrap()
}

fn ex2() -> SequenceSpec {
    SequenceSpec::parametric(
        vec![],
        WeightedPair {
            base: D::degenerate(-1.0),
            perturbation: D::degenerate(1.0),
            weight: HarmonicWeight {
                numerator: 1.0,
                offset: 1.0,
            },
        },
        10_000,
    )
    .unwrap()
}

fn ex3_claims() -> SequenceSpec {
    SequenceSpec::parametric(
        vec![D::degenerate(0.0), D::degenerate(0.0), D::degenerate(4.0), D::degenerate(4.0)],
        WeightedPair {
            base: D::exponential(1.0),
            perturbation: D::erlang_two(1.0),
            weight: HarmonicWeight {
                numerator: 1.0,
                offset: 0.0,
            },
        },
        10_000,
    )
    .unwrap()
}

/// Brute force over `[b, n_max]` by direct evaluation of every index.
fn brute_sup(seq: &SequenceSpec, f: &Functional, b: usize, n_max: usize) -> f64 {
    let mut s = 0.0;
    let mut best = f64::NEG_INFINITY;
    for n in 1..=n_max {
        let d = seq.dist_at(n).unwrap();
        s += f.terms().iter().map(|k| d.evaluate(*k).unwrap()).sum::<f64>();
        if n >= b {
            best = best.max(s / n as f64);
        }
    }
    best
}

#[test]
fn ex1_mean_average_at_seven() {
    let s = ex1();
    assert_eq!(s.average(&K::Mean.into(), 7).unwrap(), -1.0 / 7.0);
}

#[test]
fn ex1_drift_certificate() {
    let c = ex1().sup_tail_average(&K::Mean.into(), 7).unwrap();
    assert_eq!(c.value, -1.0 / 7.0);
    assert_eq!(c.attained_at, AttainedAt::Index(7));
    assert_eq!(c.error_budget, 0.0);
}

#[test]
fn ex1_condition_three_and_four() {
    let s = ex1();
    let f = Functional::negprob_plus_exp(0.8);
    let tail = s.sup_tail_average(&f, 7).unwrap();
    assert!(tail.value < 1.79 && tail.error_budget == 0.0, "{tail:?}");
    // per-residue values of P(ξ ≤ 0) + E(e^{hξ}1{ξ > 0})
    let v1 = 0.625 * (1.6f64.exp() - 1.0);
    let v2 = 1.0;
    let v3 = (1.0 - (-2.0f64).exp()) + 5.0 * (-2.0f64).exp();
    let oracle = (3.0 * v1 + 2.0 * v2 + 2.0 * v3) / 7.0;
    assert!((tail.value - oracle).abs() < 1e-12, "{} vs {oracle}", tail.value);
    let head = s.max_head_average(&f, 7).unwrap();
    assert!((head - v1).abs() < 1e-12 && head < 2.48);
}

#[test]
fn ex2_drift_and_head() {
    let s = ex2();
    let c = s.sup_tail_average(&K::Mean.into(), 3).unwrap();
    assert!((c.value + 5.0 / 18.0).abs() < 1e-15, "{c:?}");
    assert_eq!(c.attained_at, AttainedAt::Index(3));
    let f = Functional::negprob_plus_exp(1.0);
    let e = std::f64::consts::E;
    let head = s.max_head_average(&f, 3).unwrap();
    assert!((head - (e + 1.0) / 2.0).abs() < 1e-14);
    let tail = s.sup_tail_average(&f, 3).unwrap();
    assert!((tail.value - (13.0 * e + 23.0) / 36.0).abs() < 1e-14, "{tail:?}");
    assert_eq!(tail.error_budget, 0.0);
}

#[test]
fn ex3_exp_moment_at_four() {
    let s = ex3_claims();
    let c = s.sup_tail_average(&K::ExpMoment { gamma: 1.0 / 3.0 }.into(), 1).unwrap();
    let oracle = (2.0 + 2.0 * (4.0f64 / 3.0).exp()) / 4.0;
    assert!((c.value - oracle).abs() < 1e-12 && c.value <= 2.4);
    assert_eq!(c.attained_at, AttainedAt::Index(4));
}

#[test]
fn mgf_zero_average_is_one() {
    for s in [ex1(), ex2(), ex3_claims()] {
        for n in [1, 2, 5, 77] {
            assert!((s.average(&K::Mgf { y: 0.0 }.into(), n).unwrap() - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn prefix_sums_match_direct_summation() {
    let f: Functional = K::Mean.into();
    for s in [ex1(), ex2(), ex3_claims()] {
        let avgs = s.averages(&f, 10_000).unwrap();
        let mut direct = 0.0;
        for n in 1..=10_000 {
            direct += s.dist_at(n).unwrap().evaluate(K::Mean).unwrap();
            assert!((avgs[n - 1] - direct / n as f64).abs() <= 1e-12, "n = {n}");
        }
    }
}

#[test]
fn periodic_certificate_matches_brute_force() {
    let cases = vec![
        ex1(),
        SequenceSpec::periodic(vec![D::degenerate(3.0)], vec![D::degenerate(-1.0), D::degenerate(0.5)], 20).unwrap(),
        SequenceSpec::periodic(
            vec![D::degenerate(-2.0), D::degenerate(5.0)],
            vec![D::degenerate(1.0), D::degenerate(-2.0), D::degenerate(-2.0), D::degenerate(2.5)],
            20,
        )
        .unwrap(),
        SequenceSpec::iid(D::uniform(-1.0, 0.5), 5).unwrap(),
    ];
    let fs: Vec<Functional> = vec![K::Mean.into(), Functional::negprob_plus_exp(0.5), K::TruncAbsBelow { c: 1.0 }.into()];
    for s in &cases {
        let SequenceStructure::EventuallyPeriodic { preperiod, cycle } = s.structure() else {
            unreachable!()
        };
        let span = 10 * (preperiod.len() + cycle.len());
        for f in &fs {
            let mean: f64 = cycle.iter().map(|d| f.terms().iter().map(|k| d.evaluate(*k).unwrap()).sum::<f64>()).sum::<f64>()
                / cycle.len() as f64;
            for b in 1..=span / 2 {
                let c = s.sup_tail_average(f, b).unwrap();
                let brute = brute_sup(s, f, b, span).max(mean);
                assert_eq!(c.error_budget, 0.0);
                assert!((c.value - brute).abs() < 1e-12, "b = {b}, f = {f}: {} vs {brute}", c.value);
            }
        }
    }
}

#[test]
fn parametric_certificate_matches_long_brute_force() {
    let fs: Vec<Functional> = vec![K::Mean.into(), Functional::negprob_plus_exp(0.5), K::ExpMoment { gamma: 0.3 }.into()];
    for s in [ex2(), ex3_claims()] {
        for f in &fs {
            for b in [1, 2, 3, 5, 9] {
                let c = s.sup_tail_average(f, b).unwrap();
                let brute = brute_sup(&s, f, b, 3000);
                assert!(c.upper() + 1e-12 >= brute, "certificate below brute force");
                if c.attained_at != AttainedAt::Limit {
                    assert!((c.value - brute).abs() < 1e-12, "{f} b={b}: {c:?} vs {brute}");
                }
            }
        }
    }
}

#[test]
fn nondecreasing_family_approaches_limit() {
    // f(i) = −2/(i+1) increases to 0
    let s = SequenceSpec::parametric(
        vec![],
        WeightedPair {
            base: D::degenerate(0.0),
            perturbation: D::degenerate(-2.0),
            weight: HarmonicWeight {
                numerator: 1.0,
                offset: 1.0,
            },
        },
        100,
    )
    .unwrap();
    let c = s.sup_tail_average(&K::Mean.into(), 1).unwrap();
    assert_eq!(c.value, 0.0);
    assert_eq!(c.attained_at, AttainedAt::Limit);
}

#[test]
fn open_certificate_reports_budget() {
    // f(i) = 1/(i+1) nonincreasing from a low start: averages rise after a negative prefix
    let s = SequenceSpec::parametric(
        vec![D::degenerate(-1000.0)],
        WeightedPair {
            base: D::degenerate(0.0),
            perturbation: D::degenerate(1.0),
            weight: HarmonicWeight {
                numerator: 1.0,
                offset: 1.0,
            },
        },
        10,
    )
    .unwrap();
    let c = s.sup_tail_average(&K::Mean.into(), 1).unwrap();
    assert!(c.error_budget > 0.0);
    assert!(c.upper() >= brute_sup(&s, &K::Mean.into(), 1, 5000));
}

#[test]
fn paired_sequences_cannot_certify_tails() {
    let s = SequenceSpec::paired(ex1(), 1.0, ex2()).unwrap();
    assert!(matches!(
        s.sup_tail_average(&K::Mean.into(), 3),
        Err(SeqError::CertificateOpen { .. })
    ));
    assert!(s.max_head_average(&K::Mean.into(), 3).is_ok());
}

#[test]
fn head_max_empty_range_is_one() {
    assert_eq!(ex1().max_head_average(&Functional::negprob_plus_exp(0.8), 1).unwrap(), 1.0);
    let c = ex2().head_max_certificate(&K::Mean.into(), 1).unwrap();
    assert_eq!(c.attained_at, AttainedAt::Empty);
}

#[test]
fn derive_constants_examples() {
    let d = derive_constants(&ex1(), 0.8, 2.0, 7).unwrap();
    let k = d.constants;
    assert_eq!(k.a, 1.0 / 7.0);
    assert_eq!(k.epsilon, 0.0);
    assert!(k.d1 <= 1.79 && k.d2 <= 2.48, "{k:?}");

    let d = derive_constants(&ex2(), 1.0, 1.1, 3).unwrap();
    let k = d.constants;
    assert!((k.a - 5.0 / 18.0).abs() < 1e-15);
    assert_eq!(k.epsilon, 0.0);
    assert!(k.d1 <= 1.625);
    assert!((k.d2 - (std::f64::consts::E + 1.0) / 2.0).abs() < 1e-14);

    let s = SequenceSpec::iid(D::degenerate(-1.0), 10).unwrap();
    let k = derive_constants(&s, 1.0, 2.0, 1).unwrap().constants;
    assert_eq!((k.a, k.epsilon, k.d1, k.d2), (1.0, 0.0, 1.0, 1.0));
}

#[test]
fn derive_constants_errors() {
    let s = SequenceSpec::iid(D::degenerate(1.0), 10).unwrap();
    assert!(matches!(derive_constants(&s, 1.0, 1.0, 1), Err(SeqError::NonNegativeDrift { .. })));
    let s = SequenceSpec::iid(D::shifted_exponential(1.0, -3.0), 10).unwrap();
    assert!(matches!(derive_constants(&s, 1.5, 1.0, 1), Err(SeqError::InfiniteMoment { .. })));
}

#[test]
fn derived_constants_hold_at_random_indices() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for (s, h, c, b) in [(ex1(), 0.8, 2.0, 7), (ex2(), 1.0, 1.1, 3), (ex3_claims(), 0.3, 1.0, 1)] {
        let Ok(d) = derive_constants(&s, h, c, b) else { continue };
        let k = d.constants;
        for _ in 0..200 {
            let n = rng.random_range(1..=5000usize);
            let (mut m, mut t, mut e) = (0.0, 0.0, 0.0);
            for i in 1..=n {
                let dist = s.dist_at(i).unwrap();
                m += dist.evaluate(K::Mean).unwrap();
                t += dist.evaluate(K::TruncAbsBelow { c }).unwrap();
                e += dist.evaluate(K::NegProb).unwrap() + dist.evaluate(K::ExpPlus { h }).unwrap();
            }
            let (m, t, e) = (m / n as f64, t / n as f64, e / n as f64);
            let tol = 1e-12;
            if n >= b {
                assert!(m <= -k.a + tol && t <= k.epsilon + tol && e <= k.d1 + tol, "n = {n}");
            } else {
                assert!(e <= k.d2 + tol, "n = {n}");
            }
        }
    }
}

/// Smallest b with a negative supremum, by brute force over a long window.
fn brute_suggest(s: &SequenceSpec, window: usize) -> usize {
    let f: Functional = K::Mean.into();
    (1..window).find(|&b| brute_sup(s, &f, b, window) < 0.0).unwrap()
}

#[test]
fn suggest_b_matches_brute_force() {
    assert_eq!(suggest_b(&ex1()).unwrap(), brute_suggest(&ex1(), 600));
    assert_eq!(suggest_b(&ex1()).unwrap(), 5);
    assert_eq!(suggest_b(&ex2()).unwrap(), brute_suggest(&ex2(), 600));
    assert_eq!(suggest_b(&ex2()).unwrap(), 2);
    assert_eq!(suggest_b(&SequenceSpec::iid(D::degenerate(-1.0), 4).unwrap()).unwrap(), 1);
    assert!(suggest_b(&SequenceSpec::iid(D::degenerate(0.0), 4).unwrap()).is_err());
}

#[test]
fn invalid_specs_rejected() {
    assert!(SequenceSpec::periodic(vec![], vec![], 10).is_err());
    assert!(SequenceSpec::periodic(vec![D::degenerate(0.0)], vec![D::degenerate(0.0); 3], 6).is_err());
    assert!(SequenceSpec::iid(D::uniform(1.0, 0.0), 10).is_err());
    let bad = WeightedPair {
        base: D::degenerate(0.0),
        perturbation: D::degenerate(1.0),
        weight: HarmonicWeight {
            numerator: 3.0,
            offset: 0.0,
        },
    };
    assert!(SequenceSpec::parametric(vec![], bad, 10).is_err());
}

#[test]
fn serde_round_trip() {
    for s in [ex1(), ex2(), ex3_claims()] {
        let json = serde_json::to_string(&s).unwrap();
        let back: SequenceSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
    }
}

#[test]
fn sampling_follows_index_law() {
    use rand::SeedableRng;
    let s = ex2();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let n = 200_000;
    let hits = (0..n).filter(|_| s.sample_at(1, &mut rng) == 1.0).count();
    let p = hits as f64 / n as f64;
    let se = (0.25 / n as f64).sqrt();
    assert!((p - 0.5).abs() < 4.0 * se);
}

proptest! {
    #[test]
    fn sup_tail_nonincreasing_in_b(b in 1usize..40, which in 0usize..3) {
        let s = [ex1(), ex2(), ex3_claims()][which].clone();
        let f: Functional = K::Mean.into();
        let c0 = s.sup_tail_average(&f, b).unwrap();
        let c1 = s.sup_tail_average(&f, b + 1).unwrap();
        prop_assert!(c1.upper() <= c0.upper() + 1e-15);
    }
}
