use proptest::prelude::*;

use zetalab::constants::{
    heuristic_combination_count, montgomery_limit, ng_constant_b, zeta_prime_minus_one,
};
use zetalab::eli::{
    eli_bounds, min_combination_brute, min_combination_mitm, pigeonhole_small_combination,
    EliInstance,
};
use zetalab::zero_data::ZeroSource;
use zetalab::{Error, ZeroTable};

const G: [f64; 6] = [
    14.134_725_141_734_693,
    21.022_039_638_771_555,
    25.010_857_580_145_688,
    30.424_876_125_859_513,
    32.935_061_587_739_19,
    37.586_178_158_825_671,
];

/// Smallest `|Σ ℓ_j g_j|` over nonzero `ℓ ∈ [-L, L]^m`, by plain odometer.
fn naive_min(g: &[f64], l: i64) -> f64 {
    let m = g.len();
    let mut c = vec![-l; m];
    let mut best = f64::INFINITY;
    loop {
        if c.iter().any(|&x| x != 0) {
            let v: f64 = c.iter().zip(g).map(|(&a, &b)| a as f64 * b).sum();
            best = best.min(v.abs());
        }
        let mut i = 0;
        loop {
            if i == m {
                return best;
            }
            c[i] += 1;
            if c[i] <= l {
                break;
            }
            c[i] = -l;
            i += 1;
        }
    }
}

#[test]
fn brute_and_mitm_match_odometer() {
    for m in 1..=5 {
        for l in 1..=3 {
            let inst = EliInstance::new(G[..m].to_vec(), 1e-12, l).unwrap();
            let want = naive_min(&G[..m], l);
            let b = min_combination_brute(&inst).unwrap();
            let mm = min_combination_mitm(&inst).unwrap();
            assert!((b.value() - want).abs() < 1e-10, "m={m} L={l}");
            assert!((mm.value() - want).abs() < 1e-10, "m={m} L={l}");
            assert_eq!(b.coeffs, mm.coeffs);
            let first = b.coeffs.iter().find(|&&x| x != 0).unwrap();
            assert!(*first > 0);
        }
    }
}

#[test]
fn exact_relation_is_a_hard_error() {
    let inst = EliInstance::new(vec![1.0, 2.0, 3.5], 1e-12, 2).unwrap();
    assert!(matches!(min_combination_brute(&inst), Err(Error::ZeroCombination { .. })));
    assert!(matches!(min_combination_mitm(&inst), Err(Error::ZeroCombination { .. })));
    assert!(matches!(pigeonhole_small_combination(&inst), Err(Error::ZeroCombination { .. })));
}

#[test]
fn pigeonhole_respects_box_bound() {
    let inst = EliInstance::new(G[..5].to_vec(), 1e-12, 1).unwrap();
    let p = pigeonhole_small_combination(&inst).unwrap();
    let sum: f64 = G[..5].iter().sum();
    let bound = sum / (2f64.powi(5) - 1.0);
    assert!((p.box_bound.unwrap() - bound).abs() < 1e-12);
    assert!(p.value() <= bound);
    assert!(p.coeffs.iter().all(|c| c.abs() <= 1));
}

#[test]
fn certified_results_clear_weak_bound() {
    for m in 2..=6 {
        let inst = EliInstance::new(G[..m].to_vec(), 1e-12, m as i64).unwrap();
        let r = min_combination_mitm(&inst).unwrap();
        assert!(r.certified);
        let b = eli_bounds(G[m - 1], 0.1).unwrap();
        assert!(r.value_lo >= b.weak);
        assert_eq!(r.weak_bound, b.weak);
    }
}

#[test]
fn bounds_ordering_flag() {
    assert!(!eli_bounds(10.0, 0.1).unwrap().strong_below_weak);
    assert!(eli_bounds(100.0, 0.1).unwrap().strong_below_weak);
    assert!(eli_bounds(1.0, 0.1).is_err());
    assert!(eli_bounds(10.0, 1.5).is_err());
}

#[test]
fn instance_validation() {
    assert!(EliInstance::new(vec![], 1e-9, 1).is_err());
    assert!(EliInstance::new(vec![1.0], 1e-3, 1).is_err());
    assert!(EliInstance::new(vec![1.0], 1e-9, 0).is_err());
}

/// `log A = 1/12 - ζ'(-1)` and `log A = (γ_E + log 2π)/12 - ζ'(2)/(2π²)` give
/// `ζ'(-1)` from `ζ'(2) = -Σ log n / n²`.
#[test]
fn zeta_prime_minus_one_via_zeta_prime_two() {
    let n = 100_000u32;
    let f = |x: f64| x.ln() / (x * x);
    let df = |x: f64| (1.0 - 2.0 * x.ln()) / (x * x * x);
    let nf = n as f64;
    let head: f64 = (2..n).rev().map(|k| f(k as f64)).sum();
    let tail = (nf.ln() + 1.0) / nf + 0.5 * f(nf) - df(nf) / 12.0;
    let zp2 = -(head + tail);
    let euler_gamma = 0.577_215_664_901_532_9;
    let pi = std::f64::consts::PI;
    let log_a = (euler_gamma + (2.0 * pi).ln()) / 12.0 - zp2 / (2.0 * pi * pi);
    let oracle = 1.0 / 12.0 - log_a;
    let r = zeta_prime_minus_one(1e-10).unwrap();
    assert!((r.value - oracle).abs() < 1e-10, "{} vs {oracle}", r.value);
}

#[test]
fn ng_intervals_nest_and_hit_value() {
    let a = ng_constant_b(2_000, 40).unwrap();
    let b = ng_constant_b(50_000, 40).unwrap();
    assert!(a.interval().0 <= b.interval().0 && b.interval().1 <= a.interval().1);
    assert!((b.value - 0.26739).abs() < 5e-5);
}

#[test]
fn misc_constants() {
    assert!((montgomery_limit() - 0.159_154_943_091_895_3).abs() < 1e-15);
    let t = ZeroTable::new(G.to_vec(), 1e-12, None, ZeroSource::File, 40.0).unwrap();
    let c = heuristic_combination_count(40.0, &t).unwrap();
    assert_eq!(c.n, 6);
    assert!((c.log_count - 6.0 * 12f64.ln()).abs() < 1e-12);
    assert!(heuristic_combination_count(50.0, &t).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mitm_equals_brute(g in proptest::collection::vec(1.0f64..50.0, 1..6), l in 1i64..4) {
        let inst = EliInstance::new(g.clone(), 1e-12, l).unwrap();
        match (min_combination_brute(&inst), min_combination_mitm(&inst)) {
            (Ok(b), Ok(m)) => {
                prop_assert!((b.value() - m.value()).abs() < 1e-11);
                prop_assert!((b.value() - naive_min(&g, l)).abs() < 1e-10);
            }
            (Err(Error::ZeroCombination { .. }), Err(Error::ZeroCombination { .. })) => {}
            (b, m) => prop_assert!(false, "brute {b:?} vs mitm {m:?}"),
        }
    }
}
