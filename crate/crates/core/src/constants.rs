//! Named constants: the conjectured `1/(2π)` limit, `ζ'(-1)`, Ng's constant
//! `B` and the count of bounded integer combinations of ordinates.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};
use crate::numeric::CompensatedSum;
use crate::sieve::primes_up_to;
use crate::zero_data::ZeroTable;
use crate::zeta::STIRLING_B;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub name: String,
    pub value: f64,
    pub error_bound: f64,
    pub inputs: BTreeMap<String, f64>,
}

impl ConstantReport {
    pub fn interval(&self) -> (f64, f64) {
        (self.value - self.error_bound, self.value + self.error_bound)
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.error_bound
    }
}

/// `1/(2π)`.
pub fn montgomery_limit() -> f64 {
    1.0 / (2.0 * PI)
}

/// `log A` (Glaisher–Kinkelin) from
/// `Σ_{k≤n} k log k - (n²/2 + n/2 + 1/12) log n + n²/4
///  + Σ_{j≥2} B_{2j} / (2j(2j-1)(2j-2)) n^{2-2j}`,
/// returning the value and the size of the first omitted term.
fn log_glaisher(n: u32, terms: usize) -> (f64, f64) {
    let nf = n as f64;
    let head: CompensatedSum = (2..=n).map(|k| k as f64 * (k as f64).ln()).collect();
    let mut s = head;
    s.add(-(nf * nf / 2.0 + nf / 2.0 + 1.0 / 12.0) * nf.ln());
    s.add(nf * nf / 4.0);
    let term = |j: usize| {
        let b = STIRLING_B[j - 1];
        let jj = 2.0 * j as f64;
        b / (jj * (jj - 1.0) * (jj - 2.0)) * nf.powf(2.0 - jj)
    };
    for j in 2..2 + terms {
        s.add(term(j));
    }
    (s.value(), term(2 + terms).abs())
}

/// `ζ'(-1) = 1/12 - log A`.
pub fn zeta_prime_minus_one(tol: f64) -> Result<ConstantReport> {
    if !(tol >= 1e-10) {
        return Err(out_of_range("tol", format!("{tol} < 1e-10")));
    }
    let (n, terms) = (16u32, 6usize);
    let (log_a, trunc) = log_glaisher(n, terms);
    let rounding = 64.0 * f64::EPSILON * (n as f64).powi(2) * (n as f64).ln();
    let mut inputs = BTreeMap::new();
    inputs.insert("n".into(), n as f64);
    inputs.insert("bernoulli_terms".into(), terms as f64);
    Ok(ConstantReport {
        name: "zeta_prime(-1)".into(),
        value: 1.0 / 12.0 - log_a,
        error_bound: trunc + rounding,
        inputs,
    })
}

/// `a_k = Γ(k - 1/2) / (k! Γ(-1/2))`, via `a₀ = 1`, `a_k = a_{k-1}(k - 3/2)/k`.
pub fn gamma_ratio_coeffs(k_max: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(k_max + 2);
    a.push(1.0);
    for k in 1..=k_max + 1 {
        a.push(a[k - 1] * (k as f64 - 1.5) / k as f64);
    }
    a
}

/// `log((1 - 1/p)^{1/4} Σ_{k≤K} a_k² p^{-k})`.
pub fn ng_log_local_factor(p: f64, a: &[f64], k_max: usize) -> f64 {
    let x = 1.0 / p;
    let mut pk = 1.0;
    let mut s = 0.0;
    for ak in &a[1..=k_max] {
        pk *= x;
        s += ak * ak * pk;
    }
    0.25 * (-x).ln_1p() + s.ln_1p()
}

/// Ng's constant
/// `B = (8/(5√π)) e^{3ζ'(-1) - (11/12) log 2} Π_p (1-1/p)^{1/4} Σ_k a_k² p^{-k}`.
///
/// Each local log factor is `-(9/64) p^{-2} + O(p^{-3})`, bounded in absolute
/// value by `(9/64 + 1/P) p^{-2}` for `p > P`, and `Σ_{p>P} p^{-2} < 1/P`.
/// The tail is centred at `-(9/64)/(P log P)` with radius `(9/64 + 1/P)/P`.
pub fn ng_constant_b(p_max: u64, k_max: usize) -> Result<ConstantReport> {
    if p_max < 1000 {
        return Err(out_of_range("p_max", format!("{p_max} < 1000")));
    }
    if k_max < 30 {
        return Err(out_of_range("k_max", format!("{k_max} < 30")));
    }
    let k_max = k_max.min(200);
    let a = gamma_ratio_coeffs(k_max);
    let primes = primes_up_to(p_max);
    let logs: Vec<f64> = primes
        .par_iter()
        .map(|&p| ng_log_local_factor(p as f64, &a, k_max))
        .collect();
    let product_log: CompensatedSum = logs.iter().copied().collect();

    let pf = p_max as f64;
    let c = 9.0 / 64.0 + 1.0 / pf;
    let tail_center = -(9.0 / 64.0) / (pf * pf.ln());
    let tail_radius = c / pf;
    // Σ_{k>K} a_k² p^{-k} ≤ a_{K+1}² p^{-K-1}/(1-1/p), summed over p ≤ twice the p = 2 term
    let ak1 = a[k_max + 1];
    let k_err = 4.0 * ak1 * ak1 * 2f64.powi(-(k_max as i32 + 1));

    let zp = zeta_prime_minus_one(1e-10)?;
    let log_pref = (8.0 / (5.0 * PI.sqrt())).ln() + 3.0 * zp.value - 11.0 / 12.0 * 2f64.ln();
    let log_b = log_pref + product_log.value() + tail_center;
    let rounding = 1e-15 * (primes.len() as f64).sqrt() + 8.0 * f64::EPSILON * log_b.abs();
    let log_err = tail_radius + k_err + 3.0 * zp.error_bound + rounding;
    let value = log_b.exp();
    let mut inputs = BTreeMap::new();
    inputs.insert("p_max".into(), pf);
    inputs.insert("k_max".into(), k_max as f64);
    inputs.insert("primes".into(), primes.len() as f64);
    Ok(ConstantReport {
        name: "ng_B".into(),
        value,
        error_bound: value * log_err.exp_m1(),
        inputs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationCount {
    #[serde(rename = "T")]
    pub t: f64,
    /// `N(T)`
    pub n: usize,
    /// `N log(2N)`, the log of `(2N)^N`.
    pub log_count: f64,
    /// `T (log T)² / (2π)`
    pub comparison: f64,
    pub ratio: f64,
}

/// `log (2N(T))^{N(T)}` against `T (log T)²/(2π)`.
pub fn heuristic_combination_count(t: f64, table: &ZeroTable) -> Result<CombinationCount> {
    if !(t > 1.0) {
        return Err(out_of_range("T", format!("{t} ≤ 1")));
    }
    table.ensure_covers(t)?;
    let n = table.count_upto(t);
    let log_count = if n == 0 {
        0.0
    } else {
        n as f64 * (2.0 * n as f64).ln()
    };
    let comparison = t * t.ln().powi(2) / (2.0 * PI);
    Ok(CombinationCount {
        t,
        n,
        log_count,
        comparison,
        ratio: log_count / comparison,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn montgomery() {
        assert!((montgomery_limit() * 2.0 * PI - 1.0).abs() < 1e-16);
        assert!(montgomery_limit() > 0.159154 && montgomery_limit() < 0.159156);
    }

    #[test]
    fn zeta_prime_value() {
        let r = zeta_prime_minus_one(1e-10).unwrap();
        assert!((r.value + 0.165_421_143_700_450_9).abs() < 1e-12);
        assert!(r.error_bound < 1e-10);
        assert!(1.0 / 12.0 - r.value > 0.0);
        assert!(zeta_prime_minus_one(1e-11).is_err());
    }

    #[test]
    fn gamma_ratio_recurrence() {
        let a = gamma_ratio_coeffs(3);
        assert_eq!(a[..4], [1.0, -0.5, -0.125, -0.0625]);
    }

    #[test]
    fn local_factor_second_order() {
        let a = gamma_ratio_coeffs(60);
        let p = 1e4;
        let l = ng_log_local_factor(p, &a, 60);
        assert!((l * p * p + 9.0 / 64.0).abs() < 1e-3);
    }

    #[test]
    fn ng_preconditions() {
        assert!(ng_constant_b(999, 60).is_err());
        assert!(ng_constant_b(1000, 29).is_err());
    }

    #[test]
    fn report_round_trip() {
        let r = zeta_prime_minus_one(1e-10).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ConstantReport>(&s).unwrap(), r);
    }
}
