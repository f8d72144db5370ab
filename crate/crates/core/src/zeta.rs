//! ζ(s) by Euler–Maclaurin summation with an explicit remainder bound, the
//! Riemann–Siegel theta function and the Hardy Z function.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

/// Number of Euler–Maclaurin correction terms available.
const MAX_EM_TERMS: usize = 80;

/// `B_{2k} / (2k)!` for `k = 1..=MAX_EM_TERMS`, via `2 (-1)^{k+1} ζ(2k) / (2π)^{2k}`.
fn bernoulli_ratios() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (1..=MAX_EM_TERMS)
            .map(|k| {
                let z = zeta_even(2 * k as u32);
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                // (2π)^{-2k} computed in log space to avoid underflow issues.
                sign * 2.0 * z * (-(2.0 * k as f64) * (2.0 * PI).ln()).exp()
            })
            .collect()
    })
}

/// ζ(n) for even n ≥ 2 by direct summation plus a tail correction.
fn zeta_even(n: u32) -> f64 {
    if n == 2 {
        return PI * PI / 6.0;
    }
    let s = n as f64;
    let cut = 64u32;
    let mut sum = 0.0;
    for k in (1..cut).rev() {
        sum += (k as f64).powf(-s);
    }
    let c = cut as f64;
    // Σ_{k≥c} k^{-s} ≈ c^{1-s}/(s-1) + c^{-s}/2 + s c^{-s-1}/12
    sum + c.powf(1.0 - s) / (s - 1.0) + 0.5 * c.powf(-s) + s * c.powf(-s - 1.0) / 12.0
}

/// Bernoulli numbers `B_{2k}` for the Stirling series, `k = 1..=10`.
pub(crate) const STIRLING_B: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Principal branch of log Γ(z) for `Re z > 0`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    assert!(z.re > 0.0, "ln_gamma requires Re z > 0");
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let mut series = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln();
    let w2 = w * w;
    let mut pow = w;
    for (k, b) in STIRLING_B.iter().enumerate() {
        let k = (k + 1) as f64;
        series += b / (2.0 * k * (2.0 * k - 1.0)) / pow;
        pow *= w2;
    }
    series - shift
}

/// Riemann–Siegel theta function `θ(t) = arg Γ(1/4 + it/2) - (t/2) log π`.
pub fn theta(t: f64) -> f64 {
    ln_gamma(Complex64::new(0.25, 0.5 * t)).im - 0.5 * t * PI.ln()
}

/// Value of ζ(s) with a bound on its absolute error.
#[derive(Clone, Copy, Debug)]
pub struct ZetaValue {
    pub value: Complex64,
    pub error: f64,
}

struct NTable {
    ln_n: Vec<f64>,
    inv_sqrt_n: Vec<f64>,
}

fn n_table(n: usize) -> &'static NTable {
    static TABLE: OnceLock<NTable> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let cap = 4096usize;
        NTable {
            ln_n: (0..cap).map(|k| if k == 0 { 0.0 } else { (k as f64).ln() }).collect(),
            inv_sqrt_n: (0..cap)
                .map(|k| if k == 0 { 0.0 } else { 1.0 / (k as f64).sqrt() })
                .collect(),
        }
    });
    assert!(n < t.ln_n.len(), "Euler–Maclaurin cutoff {n} beyond table");
    t
}

/// Euler–Maclaurin cutoff used for height `t`: `N ≥ |t|/π` keeps the
/// smallest correction term below `e^{-0.68πN}`.
fn em_cutoff(t: f64) -> usize {
    ((t.abs() / PI).ceil() as usize).max(24)
}

/// ζ(s) for `s = σ + it` by Euler–Maclaurin summation with cutoff `N`
/// chosen so that the correction series converges geometrically. The
/// remainder after `M` corrections is bounded by
/// `|s + 2M + 1| / (σ + 2M + 1) · |T_{M+1}|`.
pub fn zeta_em(s: Complex64) -> ZetaValue {
    let n = em_cutoff(s.im);
    let nf = n as f64;
    let mut head = Complex64::new(0.0, 0.0);
    if (s.re - 0.5).abs() < 1e-15 && n < 4096 {
        let tab = n_table(n);
        for k in (1..n).rev() {
            head += Complex64::from_polar(tab.inv_sqrt_n[k], -s.im * tab.ln_n[k]);
        }
    } else {
        for k in (1..n).rev() {
            let kf = k as f64;
            head += (-s * kf.ln()).exp();
        }
    }
    let ln_n = nf.ln();
    let n_pow = (-s * ln_n).exp(); // N^{-s}
    let mut sum = head + n_pow * nf / (s - 1.0) + 0.5 * n_pow;

    let b = bernoulli_ratios();
    // term_k = b_k · s(s+1)…(s+2k-2) · N^{-s-2k+1}, with the rising factorial
    // and the power of N carried together to avoid overflow.
    let mut w = s * n_pow / nf;
    let inv_n2 = 1.0 / (nf * nf);
    let mut error = f64::INFINITY;
    let mut prev_abs = f64::INFINITY;
    for k in 1..=MAX_EM_TERMS {
        let term = b[k - 1] * w;
        let ta = term.norm();
        let m = (k - 1) as f64;
        let factor = (s + 2.0 * m + 1.0).norm() / (s.re + 2.0 * m + 1.0);
        // Remainder after k-1 corrections is bounded by `factor * |T_k|`.
        error = error.min(factor * ta);
        if ta > prev_abs || ta <= 1e-17 * sum.norm() {
            break;
        }
        sum += term;
        prev_abs = ta;
        let kf = k as f64;
        w *= (s + 2.0 * kf - 1.0) * (s + 2.0 * kf) * inv_n2;
    }
    let rounding = 4.0 * f64::EPSILON * (n as f64).sqrt() * (1.0 + sum.norm());
    ZetaValue {
        value: sum,
        error: error + rounding,
    }
}

/// Hardy Z function value with its absolute error bound.
#[derive(Clone, Copy, Debug)]
pub struct HardyZ {
    pub value: f64,
    pub error: f64,
}

/// `Z(t) = e^{iθ(t)} ζ(1/2 + it)`, real for real `t`.
pub fn hardy_z(t: f64) -> HardyZ {
    let z = zeta_em(Complex64::new(0.5, t));
    let th = theta(t);
    let rot = Complex64::from_polar(1.0, th);
    let phase_err = f64::EPSILON * th.abs().max(1.0) * z.value.norm();
    HardyZ {
        value: (rot * z.value).re,
        error: z.error + phase_err,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_known_values() {
        // Γ(1/2) = √π, Γ(5) = 24
        let a = ln_gamma(Complex64::new(0.5, 0.0));
        assert!((a.re - PI.sqrt().ln()).abs() < 1e-14 && a.im.abs() < 1e-15);
        let b = ln_gamma(Complex64::new(5.0, 0.0));
        assert!((b.re - 24f64.ln()).abs() < 1e-13);
        // |Γ(1/2 + iy)|² = π / cosh(πy)
        let y = 3.7;
        let c = ln_gamma(Complex64::new(0.5, y));
        assert!((2.0 * c.re - (PI / (PI * y).cosh()).ln()).abs() < 1e-12);
    }

    #[test]
    fn theta_matches_asymptotic_series() {
        for t in [30.0, 100.0, 1000.0] {
            let asym = 0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0
                + 1.0 / (48.0 * t)
                + 7.0 / (5760.0 * t * t * t);
            assert!((theta(t) - asym).abs() < 1e-8 * t.max(1.0), "t = {t}");
        }
    }

    #[test]
    fn zeta_at_real_points() {
        let z2 = zeta_em(Complex64::new(2.0, 0.0));
        assert!((z2.value.re - PI * PI / 6.0).abs() < 1e-13);
        let zh = zeta_em(Complex64::new(0.5, 0.0));
        assert!((zh.value.re + 1.460_354_508_809_586_8).abs() < 1e-13);
        let zm = zeta_em(Complex64::new(-1.0, 0.0));
        assert!((zm.value.re + 1.0 / 12.0).abs() < 1e-13);
    }

    #[test]
    fn hardy_z_is_real_and_small_at_first_zero() {
        let z = zeta_em(Complex64::new(0.5, 14.134_725_141_734_693));
        let rot = Complex64::from_polar(1.0, theta(14.134_725_141_734_693));
        assert!((rot * z.value).im.abs() < 1e-12);
        assert!(hardy_z(14.134_725_141_734_693).value.abs() < 1e-12);
        assert!(hardy_z(10.0).value < 0.0);
    }

    #[test]
    fn error_bound_is_small_at_desk_heights() {
        for t in [15.0, 250.0, 2500.0, 9999.0] {
            let z = hardy_z(t);
            assert!(z.error < 1e-9, "t = {t}: {}", z.error);
        }
    }
}
