use std::f64::consts::PI;

use proptest::prelude::*;

use zetalab::fejer::{fejer_k, kernel_transform, pair_min_sum, smooth_f, triangle, triangular_sum, SmoothingPlan};
use zetalab::zero_data::ZeroSource;
use zetalab::zero_sums::{j_minus_k, log_grid, partial_stats};
use zetalab::{make_weights, WeightKind, ZeroTable};

const G: [f64; 6] = [
    14.134_725_141_734_693,
    21.022_039_638_771_555,
    25.010_857_580_145_688,
    30.424_876_125_859_513,
    32.935_061_587_739_19,
    37.586_178_158_825_671,
];
const ZP: [f64; 6] = [0.793_160_433_7, 1.136_841_666, 1.371_721_202, 1.303_163_4, 1.279_514_6, 1.451_512_4];

fn table() -> ZeroTable {
    ZeroTable::new(G.to_vec(), 1e-12, Some(ZP.to_vec()), ZeroSource::File, 40.0).unwrap()
}

#[test]
fn pnt_exact_weights_are_inverse_moduli() {
    let w = make_weights(WeightKind::PntExact, &table()).unwrap();
    for (g, m) in G.iter().zip(w.moduli()) {
        assert!((m - 1.0 / (0.25 + g * g).sqrt()).abs() < 1e-15);
    }
}

#[test]
fn pnt_sine_is_two_sine_over_gamma() {
    let w = make_weights(WeightKind::PntSine, &table()).unwrap();
    for t in [0.3, 1.7, -4.2] {
        let direct: f64 = G.iter().map(|g| 2.0 * (g * t).sin() / g).sum();
        assert!((w.eval_f(t, 40.0).unwrap() - direct).abs() < 1e-13);
    }
}

#[test]
fn mobius_weights_use_zeta_prime() {
    let w = make_weights(WeightKind::Mobius, &table()).unwrap();
    for ((g, zp), m) in G.iter().zip(ZP).zip(w.moduli()) {
        assert!((m - 1.0 / ((0.25 + g * g).sqrt() * zp)).abs() < 1e-14);
    }
    let bare = ZeroTable::new(G.to_vec(), 1e-12, None, ZeroSource::File, 40.0).unwrap();
    assert!(make_weights(WeightKind::Mobius, &bare).is_err());
}

#[test]
fn j_minus_one_counts_reciprocals() {
    let r = j_minus_k(&table(), 1.0, 40.0).unwrap();
    let direct: f64 = ZP.iter().map(|z| z.powi(-2)).sum();
    assert!((r.value - direct).abs() < 1e-12);
}

#[test]
fn partial_stats_are_monotone() {
    let w = make_weights(WeightKind::PntExact, &table()).unwrap();
    let r = partial_stats(&w, &[15.0, 26.0, 40.0], 0.5).unwrap();
    assert!(r.h_values.windows(2).all(|p| p[1] >= p[0]));
}

#[test]
fn fejer_kernel_and_triangle() {
    assert_eq!(fejer_k(0.0), 1.0);
    assert!(fejer_k(1.0).abs() < 1e-15);
    assert!((fejer_k(0.5) - 4.0 / (PI * PI)).abs() < 1e-15);
    assert_eq!(triangle(0.25), 0.75);
    assert_eq!(triangle(-2.0), 0.0);
}

#[test]
fn kernel_transform_is_triangle() {
    // closed form: ∫ h K(hu) cos(γu) du = max(0, 1 - γ/T) over the real line
    let plan = SmoothingPlan::new(30.0, 400.0, 1e-9).unwrap();
    for g in [0.0, 5.0, 14.13, 25.0, 29.9, 31.0, 45.0] {
        let q = kernel_transform(g, &plan).unwrap();
        let exact = triangle(g / 30.0);
        assert!(
            (q.value - exact).abs() <= q.error + plan.outside_mass_bound(),
            "γ = {g}: {} vs {exact}",
            q.value
        );
    }
}

#[test]
fn smoothing_reproduces_triangular_sum() {
    let w = make_weights(WeightKind::PntExact, &table()).unwrap();
    let plan = SmoothingPlan::new(33.0, 60.0, 1e-8).unwrap();
    for t in [0.0, 0.8, 2.5] {
        let s = smooth_f(&w, t, &plan, 40.0).unwrap();
        let tri = triangular_sum(&w, t, 33.0, 40.0).unwrap();
        assert!((s.value - tri).abs() <= s.error_bound());
    }
}

#[test]
fn window_condition_is_enforced_on_request() {
    let w = make_weights(WeightKind::PntExact, &table()).unwrap();
    let plan = SmoothingPlan::new(33.0, 5.0, 1e-8).unwrap().enforcing_window();
    assert!(smooth_f(&w, 0.0, &plan, 40.0).is_err());
    assert!(SmoothingPlan::new(33.0, 5.0, 1e-3).is_err());
}

#[test]
fn pair_sum_against_double_loop() {
    let w = make_weights(WeightKind::PntExact, &table()).unwrap();
    let m = w.moduli();
    let mut direct = 0.0;
    for i in 0..G.len() {
        for j in 0..G.len() {
            let d = (G[i] - G[j]).abs();
            direct += m[i] * m[j] * if d < 1.0 { 1.0 } else { 1.0 / d };
        }
    }
    assert!((pair_min_sum(&w, 0.0, 40.0).unwrap() - direct).abs() < 1e-14);
}

#[test]
fn log_grid_endpoints() {
    let g = log_grid(100.0, 1e4, 5);
    assert_eq!(g.len(), 5);
    assert!((g[0] - 100.0).abs() < 1e-9 && (g[4] - 1e4).abs() < 1e-9);
    assert!((g[2] - 1000.0).abs() < 1e-9);
}

proptest! {
    #[test]
    fn phi_is_f_at_log(x in 2.0f64..1e6) {
        let w = make_weights(WeightKind::PntExact, &table()).unwrap();
        prop_assert_eq!(w.eval_phi(x, 40.0).unwrap(), w.eval_f(x.ln(), 40.0).unwrap());
    }

    #[test]
    fn sine_weights_give_odd_sum(t in -50.0f64..50.0) {
        let w = make_weights(WeightKind::PntSine, &table()).unwrap();
        let a = w.eval_f(t, 40.0).unwrap();
        let b = w.eval_f(-t, 40.0).unwrap();
        prop_assert!((a + b).abs() < 1e-13);
    }

    #[test]
    fn sum_is_bounded_by_h(t in -100.0f64..100.0, cut in 14.2f64..40.0) {
        let w = make_weights(WeightKind::Mobius, &table()).unwrap();
        prop_assert!(w.eval_f(t, cut).unwrap().abs() <= w.h(cut) + 1e-15);
    }
}
