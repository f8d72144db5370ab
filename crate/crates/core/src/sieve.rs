//! Exact arithmetic ground truth: von Mangoldt `Λ(n)`, Chebyshev `ψ(x)`,
//! Möbius `μ(n)`, Mertens `M(x)`, computed with segmented sieves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};
use crate::numeric::CompensatedSum;

/// Largest argument accepted by [`psi`] and [`mertens`].
pub const MAX_X: f64 = 1e9;

/// Default number of integers per sieve segment.
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SieveConfig {
    pub segment_len: usize,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_len: DEFAULT_SEGMENT_LEN,
        }
    }
}

/// All primes `≤ n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn check_x(x: f64) -> Result<u64> {
    if !(1.0..=MAX_X).contains(&x) {
        return Err(out_of_range("x", format!("{x} not in [1, 1e9]")));
    }
    Ok(x.floor() as u64)
}

/// Segments `[lo, hi)` covering `[start, end]`.
fn segments(start: u64, end: u64, len: usize) -> Vec<(u64, u64)> {
    let len = len.max(1) as u64;
    let mut out = Vec::new();
    let mut lo = start;
    while lo <= end {
        let hi = (lo + len).min(end + 1);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

/// Primality flags for `[lo, hi)` given all primes `≤ sqrt(hi)`.
fn prime_flags(lo: u64, hi: u64, base: &[u64]) -> Vec<bool> {
    let mut is_prime = vec![true; (hi - lo) as usize];
    for n in lo..hi.min(2) {
        is_prime[(n - lo) as usize] = false;
    }
    for &p in base {
        if p * p >= hi {
            break;
        }
        let mut m = (p * p).max(lo.div_ceil(p) * p);
        while m < hi {
            is_prime[(m - lo) as usize] = false;
            m += p;
        }
    }
    is_prime
}

/// Largest `k` with `p^k ≤ n`.
fn max_exponent(p: u64, n: u64) -> u32 {
    let mut k = 0;
    let mut pk = 1u64;
    while pk <= n / p {
        pk *= p;
        k += 1;
    }
    k
}

/// `ψ(x) = Σ_{n≤x} Λ(n)`.
pub fn psi(x: f64) -> Result<f64> {
    psi_with(x, SieveConfig::default())
}

/// `ψ(x)` with an explicit segment size. Each prime `p ≤ x` contributes
/// `k·log p` with `k = ⌊log_p x⌋`; per-segment compensated sums are merged in
/// segment order.
pub fn psi_with(x: f64, cfg: SieveConfig) -> Result<f64> {
    let n = check_x(x)?;
    if n < 2 {
        return Ok(0.0);
    }
    let base = primes_up_to(isqrt(n) + 1);
    let total = segments(2, n, cfg.segment_len)
        .into_par_iter()
        .map(|(lo, hi)| {
            let flags = prime_flags(lo, hi, &base);
            let mut s = CompensatedSum::new();
            for (i, &f) in flags.iter().enumerate() {
                if f {
                    let p = lo + i as u64;
                    s.add(max_exponent(p, n) as f64 * (p as f64).ln());
                }
            }
            s
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(CompensatedSum::new(), CompensatedSum::merge);
    Ok(total.value())
}

/// `μ(n)` for `n ∈ [lo, hi)` given all primes `≤ sqrt(hi)`.
fn mobius_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<i8> {
    let len = (hi - lo) as usize;
    let mut mu = vec![1i8; len];
    let mut prod = vec![1u64; len];
    for &p in base {
        if p * p >= hi && p >= hi {
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        while m < hi {
            let i = (m - lo) as usize;
            mu[i] = -mu[i];
            prod[i] *= p;
            m += p;
        }
        let p2 = p * p;
        let mut m = lo.div_ceil(p2) * p2;
        while m < hi {
            mu[(m - lo) as usize] = 0;
            m += p2;
        }
    }
    for i in 0..len {
        let n = lo + i as u64;
        if mu[i] != 0 && prod[i] != n {
            mu[i] = -mu[i];
        }
    }
    if lo == 0 {
        mu[0] = 0;
    }
    mu
}

/// `M(x) = Σ_{n≤x} μ(n)`.
pub fn mertens(x: f64) -> Result<i64> {
    mertens_with(x, SieveConfig::default())
}

pub fn mertens_with(x: f64, cfg: SieveConfig) -> Result<i64> {
    let n = check_x(x)?;
    let base = primes_up_to(isqrt(n) + 1);
    let total = segments(1, n, cfg.segment_len)
        .into_par_iter()
        .map(|(lo, hi)| {
            mobius_segment(lo, hi, &base)
                .iter()
                .map(|&m| m as i64)
                .sum::<i64>()
        })
        .sum();
    Ok(total)
}

/// Which normalized error term to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorTerm {
    /// `(ψ(x) - x)/√x`
    Pnt,
    /// `M(x)/√x`
    Mobius,
}

pub fn normalized_error(kind: ErrorTerm, x: f64) -> Result<f64> {
    if x < 2.0 {
        return Err(out_of_range("x", format!("{x} < 2")));
    }
    Ok(match kind {
        ErrorTerm::Pnt => (psi(x)? - x) / x.sqrt(),
        ErrorTerm::Mobius => mertens(x)? as f64 / x.sqrt(),
    })
}

/// `Λ(n)` and `μ(n)` on the closed block `[n_lo, n_hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArithBlock {
    pub n_lo: u64,
    pub n_hi: u64,
    lambda: Vec<f64>,
    mu: Vec<i8>,
}

impl ArithBlock {
    pub fn compute(n_lo: u64, n_hi: u64) -> Result<Self> {
        if n_lo < 1 || n_hi < n_lo || n_hi as f64 > MAX_X {
            return Err(out_of_range("block", format!("[{n_lo}, {n_hi}]")));
        }
        let base = primes_up_to(isqrt(n_hi) + 1);
        let hi = n_hi + 1;
        let mu = mobius_segment(n_lo, hi, &base);
        let flags = prime_flags(n_lo, hi, &base);
        let mut lambda = vec![0.0; (hi - n_lo) as usize];
        for (i, &f) in flags.iter().enumerate() {
            if f {
                lambda[i] = ((n_lo + i as u64) as f64).ln();
            }
        }
        // Higher powers of small primes.
        for &p in &base {
            let lp = (p as f64).ln();
            let mut pk = p * p;
            while pk <= n_hi {
                if pk >= n_lo {
                    lambda[(pk - n_lo) as usize] = lp;
                }
                if pk > n_hi / p {
                    break;
                }
                pk *= p;
            }
        }
        Ok(Self {
            n_lo,
            n_hi,
            lambda,
            mu,
        })
    }

    pub fn lambda(&self, n: u64) -> f64 {
        self.lambda[(n - self.n_lo) as usize]
    }

    pub fn mu(&self, n: u64) -> i8 {
        self.mu[(n - self.n_lo) as usize]
    }

    pub fn lambda_values(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu_values(&self) -> &[i8] {
        &self.mu
    }
}

/// Prefix tables `ψ(n)` and `M(n)` for `n ≤ n_max`, for evaluating many
/// arguments at once.
#[derive(Clone, Debug)]
pub struct ArithPrefix {
    block: ArithBlock,
    psi: Vec<f64>,
    mertens: Vec<i64>,
}

impl ArithPrefix {
    pub fn up_to(n_max: u64) -> Result<Self> {
        let block = ArithBlock::compute(1, n_max.max(1))?;
        let mut psi = Vec::with_capacity(block.lambda.len() + 1);
        let mut mertens = Vec::with_capacity(block.mu.len() + 1);
        psi.push(0.0);
        mertens.push(0);
        let mut s = CompensatedSum::new();
        let mut m = 0i64;
        for (l, mu) in block.lambda.iter().zip(&block.mu) {
            s.add(*l);
            m += *mu as i64;
            psi.push(s.value());
            mertens.push(m);
        }
        Ok(Self { block, psi, mertens })
    }

    pub fn n_max(&self) -> u64 {
        self.block.n_hi
    }

    fn index(&self, x: f64) -> Result<usize> {
        if !(x >= 0.0) || x.floor() as u64 > self.block.n_hi {
            return Err(out_of_range(
                "x",
                format!("{x} outside prefix table [0, {}]", self.block.n_hi),
            ));
        }
        Ok(x.floor() as usize)
    }

    pub fn psi(&self, x: f64) -> Result<f64> {
        Ok(self.psi[self.index(x)?])
    }

    pub fn mertens(&self, x: f64) -> Result<i64> {
        Ok(self.mertens[self.index(x)?])
    }

    pub fn block(&self) -> &ArithBlock {
        &self.block
    }

    /// Distance from `x` to the nearest integer `n ≤ n_max` at which the
    /// chosen summatory function jumps.
    pub fn distance_to_jump(&self, kind: ErrorTerm, x: f64) -> f64 {
        let is_jump = |n: u64| match kind {
            ErrorTerm::Pnt => self.block.lambda(n) > 0.0,
            ErrorTerm::Mobius => self.block.mu(n) != 0,
        };
        let center = x.round().clamp(1.0, self.block.n_hi as f64) as u64;
        let mut best = f64::INFINITY;
        for r in 0..64u64 {
            for n in [center.saturating_sub(r), center + r] {
                if n >= 1 && n <= self.block.n_hi && is_jump(n) {
                    best = best.min((x - n as f64).abs());
                }
            }
            if (r as f64) > best + 1.0 {
                break;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(psi(1.5).unwrap(), 0.0);
        let want = 3.0 * 2f64.ln() + 2.0 * 3f64.ln() + 5f64.ln() + 7f64.ln();
        assert!((psi(10.0).unwrap() - want).abs() < 1e-12);
        assert_eq!(mertens(2.0).unwrap(), 0);
        assert_eq!(mertens(10.0).unwrap(), -1);
        assert_eq!(mertens(100.0).unwrap(), 1);
        assert_eq!(normalized_error(ErrorTerm::Mobius, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn range_errors() {
        assert!(psi(0.5).is_err());
        assert!(psi(2e9).is_err());
        assert!(mertens(0.0).is_err());
        assert!(normalized_error(ErrorTerm::Pnt, 1.5).is_err());
    }

    #[test]
    fn block_matches_definitions() {
        let b = ArithBlock::compute(1, 50).unwrap();
        assert_eq!(b.mu(1), 1);
        assert_eq!(b.mu(30), -1);
        assert_eq!(b.mu(12), 0);
        assert_eq!(b.lambda(1), 0.0);
        assert_eq!(b.lambda(32), 2f64.ln());
        assert_eq!(b.lambda(49), 7f64.ln());
        assert_eq!(b.lambda(47), 47f64.ln());
        assert_eq!(b.lambda(12), 0.0);
    }

    #[test]
    fn known_large_values() {
        // M(10^6) = 212; ψ(10^6) from an independent prime-power enumeration
        assert_eq!(mertens(1e6).unwrap(), 212);
        assert!((psi(1e6).unwrap() - 999_586.597_495_6).abs() < 1e-6);
    }

    #[test]
    fn distance_to_jump() {
        let p = ArithPrefix::up_to(200).unwrap();
        assert!((p.distance_to_jump(ErrorTerm::Pnt, 100.0) - 1.0).abs() < 1e-12); // 101 prime
        assert!(p.distance_to_jump(ErrorTerm::Pnt, 121.2) < 0.3); // 121 = 11²
    }
}
