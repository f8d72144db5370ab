use std::f64::consts::PI;

use proptest::prelude::*;

use zetalab::random_model::{
    bessel_i0, empirical_cos_moment, exact_log_mgf, log_bessel_i0, moment_grid, random_moment,
    sample_model, RandomModelConfig,
};
use zetalab::tail::{
    empirical_tails, eta_as_printed, eta_constant, eta_convergent, predicted_tail, sample_tail,
    EtaOutcome, EtaVariant, TailSide,
};
use zetalab::zero_data::ZeroSource;
use zetalab::{make_weights, GridSpec, WeightKind, ZeroTable};

const G: [f64; 4] = [
    14.134_725_141_734_693,
    21.022_039_638_771_555,
    25.010_857_580_145_688,
    30.424_876_125_859_513,
];

fn sine() -> zetalab::WeightSequence {
    let t = ZeroTable::new(G.to_vec(), 1e-12, None, ZeroSource::File, 31.0).unwrap();
    make_weights(WeightKind::PntSine, &t).unwrap()
}

/// `(1/π) ∫₀^π e^{t cos θ} dθ`, trapezoid rule.
fn i0_integral(t: f64) -> f64 {
    let n = 600;
    let h = PI / n as f64;
    let mut s = 0.5 * (t.exp() + (-t).exp());
    for k in 1..n {
        s += (t * (k as f64 * h).cos()).exp();
    }
    s * h / PI
}

/// `2^{-k} #{δ : Σ δ_j a_j = 0}` over small integers.
fn sign_count(a: &[i64]) -> f64 {
    let k = a.len();
    let hits = (0..1u32 << k)
        .filter(|mask| {
            a.iter()
                .enumerate()
                .map(|(j, &x)| if mask >> j & 1 == 1 { -x } else { x })
                .sum::<i64>()
                == 0
        })
        .count();
    hits as f64 / (1u64 << k) as f64
}

#[test]
fn bessel_matches_integral_representation() {
    for k in 0..=300 {
        let t = k as f64 * 0.1;
        let a = bessel_i0(t).unwrap();
        let b = i0_integral(t);
        assert!((a - b).abs() <= 1e-12 * b, "t = {t}");
    }
}

#[test]
fn bessel_lower_bound() {
    for k in 0..=500 {
        let t = k as f64 * 0.1;
        assert!(bessel_i0(t).unwrap() >= (t / 2.0).exp() / 6.0);
    }
}

#[test]
fn log_mgf_is_sum_of_log_bessel() {
    let w = sine();
    let direct: f64 = G.iter().map(|g| i0_integral(1.5 * 2.0 / g).ln()).sum();
    assert!((exact_log_mgf(&w, 31.0, 1.5).unwrap() - direct).abs() < 1e-13);
}

#[test]
fn moments_match_symbolic_count() {
    // index i stands for 1000^i, so only per-zero cancellation gives 0
    for idx in [vec![0, 0], vec![0, 1, 2], vec![1, 1, 1, 1], vec![0, 0, 1, 1], vec![2, 3, 2, 3, 0, 0]] {
        let g: Vec<f64> = idx.iter().map(|&i| G[i]).collect();
        let a: Vec<i64> = idx.iter().map(|&i| 1000i64.pow(i as u32)).collect();
        assert_eq!(random_moment(&g, 1e-9).unwrap(), sign_count(&a), "{idx:?}");
    }
}

#[test]
fn accidental_relation_is_a_precision_error() {
    assert!(matches!(random_moment(&[1.0, 2.0, 3.0], 1e-9), Err(zetalab::Error::Precision(_))));
}

#[test]
fn single_cosine_average_closed_form() {
    let x = 500.0;
    for (g, b) in [(G[0], 0.0), (G[1], 0.7)] {
        let grid = moment_grid(&[g], x).unwrap();
        let got = empirical_cos_moment(&[g], &[b], x, &grid).unwrap();
        let exact = ((g * x + b).sin() - (g + b).sin()) / (g * (x - 1.0));
        assert!((got.value - exact).abs() < 1e-10);
    }
}

#[test]
fn squared_cosine_average_closed_form() {
    let (g, x) = (G[2], 300.0);
    let grid = moment_grid(&[g, g], x).unwrap();
    let got = empirical_cos_moment(&[g, g], &[0.0, 0.0], x, &grid).unwrap();
    let exact = 0.5 + ((2.0 * g * x).sin() - (2.0 * g).sin()) / (4.0 * g * (x - 1.0));
    assert!((got.value - exact).abs() < 1e-10);
}

#[test]
fn samples_have_model_variance() {
    let w = sine();
    let s = sample_model(&w, RandomModelConfig { t: 31.0, n_samples: 100_000, seed: 3 }).unwrap();
    let v = s.sample_variance();
    assert!((v / s.variance - 1.0).abs() < 0.02);
    assert!(s.mean().abs() < 4.0 * (s.variance / 1e5).sqrt());
    let h = s.histogram(-s.h, s.h, 10);
    assert_eq!(h.iter().sum::<usize>(), 100_000);
}

#[test]
fn sampling_is_reproducible_across_thread_counts() {
    let w = sine();
    let cfg = RandomModelConfig { t: 31.0, n_samples: 9_000, seed: 11 };
    let a = sample_model(&w, cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let b = pool.install(|| sample_model(&w, cfg).unwrap());
    assert_eq!(a.values, b.values);
}

#[test]
fn model_tails_are_symmetric() {
    let w = sine();
    let s = sample_model(&w, RandomModelConfig { t: 31.0, n_samples: 50_000, seed: 5 }).unwrap();
    for v in [0.0, 0.05, 0.1, 0.2] {
        let up = sample_tail(&s, v, TailSide::Upper);
        let lo = sample_tail(&s, v, TailSide::Lower);
        let se = (up.stderr.powi(2) + lo.stderr.powi(2)).sqrt();
        assert!((up.fraction - lo.fraction).abs() <= 4.0 * se + 1e-12);
    }
}

#[test]
fn empirical_tails_match_single_level_runs() {
    let w = sine();
    let grid = GridSpec::new(1.0, 300.0, 3000, 8).unwrap();
    let levels = [0.3, 0.0, 0.1];
    let many = empirical_tails(&w, 31.0, &levels, &grid, TailSide::Lower).unwrap();
    for (v, e) in levels.iter().zip(&many) {
        let one = empirical_tails(&w, 31.0, &[*v], &grid, TailSide::Lower).unwrap()[0];
        assert_eq!(e.v, *v);
        assert!((e.fraction - one.fraction).abs() < 1e-14);
    }
}

#[test]
fn predicted_tail_decreases() {
    let a = predicted_tail(1.0, -1.09).unwrap();
    let b = predicted_tail(2.0, -1.09).unwrap();
    assert!(a > b && b > 0.0);
    assert!(predicted_tail(0.5, -1.0).is_err());
}

#[test]
fn eta_is_stable_and_printed_variant_grows() {
    let a = eta_convergent(1e-10, 500.0).unwrap();
    let b = eta_convergent(1e-10, 4000.0).unwrap();
    assert!((a.value - b.value).abs() <= a.error_bound + b.error_bound);
    assert!((a.value + 1.089_326_522).abs() < 1e-8);
    let r = eta_as_printed(&[50.0, 500.0, 5000.0], 1e-8).unwrap();
    assert!(r.values.windows(2).all(|v| v[1] > v[0]));
    assert!(r.slopes.iter().all(|s| (s - 1.0).abs() < 0.05));
    assert!(matches!(eta_constant(EtaVariant::Convergent, 1e-9).unwrap(), EtaOutcome::Convergent(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_bessel_matches_integral(t in 0.0f64..40.0) {
        let b = i0_integral(t).ln();
        prop_assert!((log_bessel_i0(t) - b).abs() <= 1e-13 * b.abs().max(1e-10) + 1e-15, "t={} got {} want {}", t, log_bessel_i0(t), b);
    }

    #[test]
    fn tails_are_monotone(a in 0.0f64..0.4, b in 0.0f64..0.4) {
        let w = sine();
        let grid = GridSpec::new(1.0, 100.0, 500, 8).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t = empirical_tails(&w, 31.0, &[lo, hi], &grid, TailSide::Upper).unwrap();
        prop_assert!(t[1].fraction <= t[0].fraction);
    }
}
