use num_complex::Complex64;
use proptest::prelude::*;

use zetalab::zero_data::{count_check, parse_zero_table, zeta_prime_moduli, StepPolicy, ZeroSource};
use zetalab::zeta::hardy_z;
use zetalab::{compute_zeros, load_zero_table, Error, ZeroTable};

/// ζ(s) from the alternating series with Borwein's acceleration
/// (Chebyshev weights `d_k`), valid for `Re s > 0`.
fn zeta_borwein(s: Complex64, n: usize) -> Complex64 {
    let nf = n as f64;
    let mut d = vec![0.0; n + 1];
    let mut term = 1.0 / nf;
    let mut acc = term;
    d[0] = nf * acc;
    for i in 1..=n {
        let i_f = i as f64;
        term *= 4.0 * (nf + i_f - 1.0) * (nf - i_f + 1.0) / ((2.0 * i_f - 1.0) * (2.0 * i_f));
        acc += term;
        d[i] = nf * acc;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kk = Complex64::new(k as f64 + 1.0, 0.0);
        sum += sign * (d[k] - d[n]) * kk.powc(-s);
    }
    let eta = -sum / d[n];
    let two = Complex64::new(2.0, 0.0);
    eta / (1.0 - two.powc(1.0 - s))
}

const ODLYZKO: [f64; 10] = [
    14.134_725_141_734_693_790,
    21.022_039_638_771_554_993,
    25.010_857_580_145_688_763,
    30.424_876_125_859_513_210,
    32.935_061_587_739_189_691,
    37.586_178_158_825_671_257,
    40.918_719_012_147_495_187,
    43.327_073_280_914_999_519,
    48.005_150_881_167_159_727,
    49.773_832_477_672_302_181,
];

#[test]
fn borwein_oracle_sanity() {
    let z2 = zeta_borwein(Complex64::new(2.0, 0.0), 40);
    assert!((z2.re - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
}

#[test]
fn computed_zeros_match_reference_table() {
    let z = compute_zeros(55.0, 1e-12).unwrap();
    assert_eq!(z.count_upto(50.0), 10);
    assert_eq!(z.source(), ZeroSource::Computed);
    for (g, r) in z.ordinates().iter().zip(ODLYZKO) {
        assert!((g - r).abs() < 1e-9, "{g} vs {r}");
    }
}

#[test]
fn computed_zeros_are_zeros_of_oracle() {
    let z = compute_zeros(60.0, 1e-12).unwrap();
    for &g in z.ordinates() {
        let v = zeta_borwein(Complex64::new(0.5, g), 80);
        assert!(v.norm() < 1e-9, "|zeta(1/2 + i{g})| = {}", v.norm());
    }
}

#[test]
fn zeta_prime_moduli_match_oracle_difference() {
    let z = zeta_prime_moduli(&compute_zeros(40.0, 1e-12).unwrap(), StepPolicy::Adaptive).unwrap();
    let m = z.zprime_moduli().unwrap();
    for (&g, &mg) in z.ordinates().iter().zip(m) {
        let h = 1e-5;
        let a = zeta_borwein(Complex64::new(0.5, g + h), 80);
        let b = zeta_borwein(Complex64::new(0.5, g - h), 80);
        let d = ((a - b) / (2.0 * h)).norm();
        assert!((d - mg).abs() < 1e-6 * d, "{g}: {d} vs {mg}");
    }
}

#[test]
fn counts_follow_smooth_estimate() {
    let z = compute_zeros(300.0, 1e-10).unwrap();
    assert_eq!(z.count_upto(100.0), 29);
    assert_eq!(z.count_upto(200.0), 79);
    for t in 20..=300 {
        assert!(count_check(&z, t as f64).unwrap().deviation.abs() <= 2.0);
    }
}

#[test]
fn table_round_trips_through_text() {
    let z = zeta_prime_moduli(&compute_zeros(50.0, 1e-12).unwrap(), StepPolicy::Adaptive).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.txt");
    z.save(&path).unwrap();
    let back = load_zero_table(&path, 50.0).unwrap();
    assert_eq!(back.ordinates(), z.ordinates());
    assert_eq!(back.zprime_moduli(), z.zprime_moduli());
    assert_eq!(back.coverage(), z.coverage());
    assert_eq!(back.digest(), z.digest());
}

#[test]
fn parser_rejects_bad_input() {
    let here = std::path::Path::new("t.txt");
    let e = parse_zero_table("14.1\nabc\n", 100.0, here).unwrap_err();
    assert!(matches!(e, Error::Parse { line: 2, .. }));
    let e = parse_zero_table("14.1 1.0\n21.0\n", 100.0, here).unwrap_err();
    assert!(matches!(e, Error::Parse { line: 2, .. }));
    assert!(parse_zero_table("21.0\n14.1\n", 100.0, here).is_err());
    let t = parse_zero_table("# abs_error=1e-6\n14.1\n21.0\n25.0\n", 22.0, here).unwrap();
    assert_eq!(t.len(), 2);
    assert_eq!(t.abs_error(), 1e-6);
    assert_eq!(t.coverage(), 22.0);
}

#[test]
fn coverage_is_enforced() {
    let t = ZeroTable::new(ODLYZKO[..3].to_vec(), 1e-9, None, ZeroSource::File, 26.0).unwrap();
    assert!(count_check(&t, 30.0).is_err());
    assert!(count_check(&t, 26.0).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn hardy_z_modulus_matches_oracle(t in 10.0f64..80.0) {
        let z = hardy_z(t).value;
        let zeta = zeta_borwein(Complex64::new(0.5, t), 90).norm();
        prop_assert!((z.abs() - zeta).abs() < 1e-9 * zeta.max(1.0), "t={} Z={} zeta={}", t, z, zeta);
    }
}
