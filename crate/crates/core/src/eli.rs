//! Small nonzero integer combinations `Σ ℓ_γ γ` of zero ordinates.
//!
//! Every reported value carries an outward-rounded enclosure computed from
//! the ordinate enclosures `[γ - e, γ + e]`. A combination whose enclosure
//! contains zero is never reported as a minimum: it is an error.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::numeric::Interval;
use crate::zero_data::ZeroTable;

/// Largest search space for [`min_combination_brute`].
pub const BRUTE_LIMIT: f64 = 1e8;

/// Largest half-space for [`min_combination_mitm`].
pub const MITM_LIMIT: f64 = 1e8;

/// Entries held in memory per half by [`min_combination_mitm`].
pub const MITM_MEMORY: usize = 20_000_000;

/// Largest `m log(L+1)` accepted by [`pigeonhole_small_combination`].
pub const PIGEONHOLE_LOG_LIMIT: f64 = 60.0;

/// Subset sums held in memory by [`pigeonhole_small_combination`].
pub const PIGEONHOLE_MEMORY: usize = 50_000_000;

/// Largest ordinate error accepted for a search.
pub const MAX_ABS_ERROR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliInstance {
    pub ordinates: Vec<f64>,
    pub abs_error: f64,
    #[serde(rename = "L")]
    pub l: i64,
    /// Largest ordinate, used for the bounds.
    #[serde(rename = "T")]
    pub t: f64,
}

impl EliInstance {
    pub fn new(ordinates: Vec<f64>, abs_error: f64, l: i64) -> Result<Self> {
        if ordinates.is_empty() {
            return Err(out_of_range("m", "at least one ordinate is required"));
        }
        if l < 1 {
            return Err(out_of_range("L", format!("{l} < 1")));
        }
        if !(abs_error > 0.0 && abs_error <= MAX_ABS_ERROR) {
            return Err(out_of_range(
                "abs_error",
                format!("{abs_error} not in (0, {MAX_ABS_ERROR}]"),
            ));
        }
        let t = ordinates.iter().fold(0.0f64, |a, &b| a.max(b));
        Ok(Self {
            ordinates,
            abs_error,
            l,
            t,
        })
    }

    /// The first `m` ordinates of `table` with coefficient bound `l`.
    pub fn from_table(table: &ZeroTable, m: usize, l: i64) -> Result<Self> {
        if m == 0 || m > table.len() {
            return Err(out_of_range("m", format!("{m} not in [1, {}]", table.len())));
        }
        Self::new(table.ordinates()[..m].to_vec(), table.abs_error(), l)
    }

    /// Coefficient bound `L = N(γ_m) = m` for an `m`-zero prefix.
    pub fn conjecture_bound(table: &ZeroTable, m: usize) -> Result<Self> {
        Self::from_table(table, m, m as i64)
    }

    pub fn m(&self) -> usize {
        self.ordinates.len()
    }

    fn enclosure(&self, coeffs: &[i64]) -> Interval {
        coeffs
            .iter()
            .zip(&self.ordinates)
            .fold(Interval::point(0.0), |acc, (&c, &g)| {
                acc.add(Interval::around(g, self.abs_error).scale(c))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EliMethod {
    Brute,
    Mitm,
    Pigeonhole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliResult {
    pub coeffs: Vec<i64>,
    /// Enclosure of `|Σ ℓ_γ γ|`.
    pub value_lo: f64,
    pub value_hi: f64,
    pub method: EliMethod,
    pub weak_bound: f64,
    pub strong_bound: f64,
    /// The enclosure is separated from zero and from the runner-up.
    pub certified: bool,
    /// Box-principle bound, for pigeonhole results.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub box_bound: Option<f64>,
}

impl EliResult {
    pub fn value(&self) -> f64 {
        0.5 * (self.value_lo + self.value_hi)
    }
}

/// `(weak, strong)` bounds: `e^{-T^{1+ε}}` and
/// `exp(-(1+ε)/(2π) T (log T)²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliBounds {
    #[serde(rename = "T")]
    pub t: f64,
    pub epsilon: f64,
    pub weak: f64,
    pub strong: f64,
    /// Whether `strong ≤ weak` at this `T`.
    pub strong_below_weak: bool,
}

pub fn eli_bounds(t: f64, epsilon: f64) -> Result<EliBounds> {
    if !(t >= 2.0) {
        return Err(out_of_range("T", format!("{t} < 2")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(out_of_range("epsilon", format!("{epsilon} not in (0, 1)")));
    }
    let weak = (-t.powf(1.0 + epsilon)).exp();
    let strong = (-(1.0 + epsilon) / (2.0 * PI) * t * t.ln().powi(2)).exp();
    Ok(EliBounds {
        t,
        epsilon,
        weak,
        strong,
        strong_below_weak: strong <= weak,
    })
}

/// Default `ε` for the bounds attached to results.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Candidate with its floating value `|Σ ℓγ|`.
#[derive(Clone, Debug)]
struct Cand {
    value: f64,
    coeffs: Vec<i64>,
}

fn cand_cmp(a: &Cand, b: &Cand) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then_with(|| a.coeffs.cmp(&b.coeffs))
}

/// Flips the sign so that the first nonzero coefficient is positive.
fn normalize(coeffs: &mut [i64]) {
    if let Some(&c) = coeffs.iter().find(|&&c| c != 0) {
        if c < 0 {
            coeffs.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

/// Keeps the `KEEP` best distinct candidates.
#[derive(Clone, Debug, Default)]
struct Best {
    items: Vec<Cand>,
}

const KEEP: usize = 8;

impl Best {
    fn worst(&self) -> f64 {
        if self.items.len() < KEEP {
            f64::INFINITY
        } else {
            self.items[KEEP - 1].value
        }
    }

    fn offer(&mut self, value: f64, coeffs: &[i64]) {
        if value > self.worst() {
            return;
        }
        let c = Cand {
            value,
            coeffs: coeffs.to_vec(),
        };
        match self.items.binary_search_by(|x| cand_cmp(x, &c)) {
            Ok(_) => {}
            Err(pos) => {
                self.items.insert(pos, c);
                self.items.truncate(KEEP);
            }
        }
    }

    fn merge(mut self, other: Best) -> Best {
        for c in other.items {
            self.offer(c.value, &c.coeffs);
        }
        self
    }
}

fn finish(inst: &EliInstance, best: Best, method: EliMethod) -> Result<EliResult> {
    let mut scored: Vec<(Interval, Vec<i64>)> = best
        .items
        .into_iter()
        .map(|c| (inst.enclosure(&c.coeffs), c.coeffs))
        .collect();
    if scored.is_empty() {
        return Err(Error::Validation("search produced no candidates".into()));
    }
    for (iv, coeffs) in &scored {
        if iv.contains_zero() {
            return Err(Error::ZeroCombination {
                coeffs: coeffs.clone(),
            });
        }
    }
    scored.sort_by(|a, b| {
        a.0.abs()
            .lo
            .total_cmp(&b.0.abs().lo)
            .then_with(|| a.1.cmp(&b.1))
    });
    scored.dedup_by(|a, b| a.1 == b.1);
    let best = scored[0].0.abs();
    let separated = scored
        .get(1)
        .map(|(iv, _)| best.hi < iv.abs().lo)
        .unwrap_or(true);
    let b = eli_bounds(inst.t.max(2.0), DEFAULT_EPSILON)?;
    Ok(EliResult {
        coeffs: scored[0].1.clone(),
        value_lo: best.lo,
        value_hi: best.hi,
        method,
        weak_bound: b.weak,
        strong_bound: b.strong,
        certified: best.lo > 0.0 && separated,
        box_bound: None,
    })
}

fn search_space(base: i64, m: usize) -> f64 {
    (base as f64).powi(m as i32)
}

/// Global minimum of `|Σ ℓ_i γ_i|` over nonzero `ℓ ∈ [-L, L]^m` by
/// exhaustive enumeration with the first nonzero coefficient positive.
pub fn min_combination_brute(inst: &EliInstance) -> Result<EliResult> {
    let m = inst.m();
    let l = inst.l;
    if search_space(2 * l + 1, m) > BRUTE_LIMIT {
        return Err(Error::Budget(format!(
            "(2L+1)^m = {:e} exceeds {BRUTE_LIMIT:e}; use the meet-in-the-middle search",
            search_space(2 * l + 1, m)
        )));
    }
    let g = &inst.ordinates;

    fn dfs(g: &[f64], l: i64, i: usize, partial: f64, lead: bool, coeffs: &mut Vec<i64>, best: &mut Best) {
        if i == g.len() {
            if !lead {
                best.offer(partial.abs(), coeffs);
            }
            return;
        }
        let lo = if lead { 0 } else { -l };
        for c in lo..=l {
            coeffs[i] = c;
            dfs(g, l, i + 1, partial + c as f64 * g[i], lead && c == 0, coeffs, best);
        }
        coeffs[i] = 0;
    }

    // Split on the first coefficient: 0 keeps the sign constraint, c > 0
    // frees the remaining coordinates.
    let best = (0..=l)
        .into_par_iter()
        .map(|c0| {
            let mut coeffs = vec![0i64; m];
            coeffs[0] = c0;
            let mut best = Best::default();
            dfs(g, l, 1, c0 as f64 * g[0], c0 == 0, &mut coeffs, &mut best);
            best
        })
        .reduce(Best::default, Best::merge);
    finish(inst, best, EliMethod::Brute)
}

/// Decodes a mixed-radix index into coefficients `c - offset`, `c ∈ [0, base)`.
fn decode_into(idx: usize, base: usize, offset: i64, out: &mut [i64]) {
    let mut r = idx;
    for c in out.iter_mut() {
        *c = (r % base) as i64 - offset;
        r /= base;
    }
}

/// Sums `Σ ℓ_i g_i` over all `ℓ ∈ [-L, L]^k`, sorted, with their codes.
fn half_sums(g: &[f64], l: i64) -> (Vec<f64>, Vec<u32>) {
    let base = (2 * l + 1) as usize;
    let n = base.pow(g.len() as u32);
    let mut entries: Vec<(f64, u32)> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let mut r = idx;
            let mut s = 0.0;
            for gi in g {
                let c = (r % base) as i64 - l;
                r /= base;
                s += c as f64 * gi;
            }
            (s, idx as u32)
        })
        .collect();
    entries.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    entries.into_iter().unzip()
}

/// Meet-in-the-middle: split the ordinates into halves `A`, `B`, sort the
/// sums of `B`, and for each sum `a` of `A` inspect the sums of `B` nearest
/// to `-a`.
pub fn min_combination_mitm(inst: &EliInstance) -> Result<EliResult> {
    let m = inst.m();
    let l = inst.l;
    let half = m.div_ceil(2);
    let space = search_space(2 * l + 1, half);
    if space > MITM_LIMIT {
        return Err(Error::Budget(format!("(2L+1)^⌈m/2⌉ = {space:e} exceeds {MITM_LIMIT:e}")));
    }
    if space > MITM_MEMORY as f64 {
        return Err(Error::Budget(format!(
            "{space:e} entries per half exceed the memory budget of {MITM_MEMORY}"
        )));
    }
    let (ga, gb) = inst.ordinates.split_at(half);
    let base = (2 * l + 1) as usize;
    let (b_sums, b_codes) = half_sums(gb, l);
    let b_zero = b_codes[b_sums.partition_point(|&s| s < 0.0)] as usize;
    let na = base.pow(half as u32);
    const CHUNK: usize = 1 << 14;
    let best = (0..na.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut best = Best::default();
            let mut coeffs = vec![0i64; m];
            let mut scratch = vec![0i64; m];
            for idx in chunk * CHUNK..((chunk + 1) * CHUNK).min(na) {
                decode_into(idx, base, l, &mut coeffs[..half]);
                // (a, b) and (-a, -b) give the same value: keep A vectors
                // whose first nonzero coefficient is positive, plus A = 0.
                let lead = coeffs[..half].iter().find(|&&c| c != 0).copied();
                if lead.is_some_and(|c| c < 0) {
                    continue;
                }
                let a: f64 = coeffs[..half].iter().zip(ga).map(|(&c, g)| c as f64 * g).sum();
                let pos = b_sums.partition_point(|&s| s < -a);
                // With A = 0 the window must reach past the zero vector of B.
                let reach = if lead.is_none() { KEEP + 3 } else { 3 };
                for j in pos.saturating_sub(reach)..(pos + reach).min(b_sums.len()) {
                    let code = b_codes[j] as usize;
                    if lead.is_none() && code == b_zero {
                        continue;
                    }
                    let v = (a + b_sums[j]).abs();
                    if v > best.worst() {
                        continue;
                    }
                    scratch[..half].copy_from_slice(&coeffs[..half]);
                    decode_into(code, base, l, &mut scratch[half..]);
                    normalize(&mut scratch);
                    best.offer(v, &scratch);
                }
            }
            best
        })
        .reduce(Best::default, Best::merge);
    finish(inst, best, EliMethod::Mitm)
}

/// Sorts the `(L+1)^m` sums `Σ c_i γ_i` with `c ∈ [0, L]^m` and returns the
/// difference of the closest pair, a combination with coefficients in
/// `[-L, L]` no larger than `L Σγ_i / ((L+1)^m - 1)`.
pub fn pigeonhole_small_combination(inst: &EliInstance) -> Result<EliResult> {
    let m = inst.m();
    let l = inst.l;
    let log_size = m as f64 * ((l + 1) as f64).ln();
    if log_size > PIGEONHOLE_LOG_LIMIT {
        return Err(Error::Budget(format!("m log(L+1) = {log_size} exceeds {PIGEONHOLE_LOG_LIMIT}")));
    }
    let count = search_space(l + 1, m);
    if count > PIGEONHOLE_MEMORY as f64 {
        return Err(Error::Budget(format!(
            "(L+1)^m = {count:e} exceeds the memory budget of {PIGEONHOLE_MEMORY}"
        )));
    }
    let base = (l + 1) as usize;
    let n = count as usize;
    let g = &inst.ordinates;
    let decode = |idx: usize| -> Vec<i64> {
        let mut r = idx;
        (0..m)
            .map(|_| {
                let c = (r % base) as i64;
                r /= base;
                c
            })
            .collect()
    };
    let mut sums: Vec<(f64, u32)> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let s: f64 = decode(idx).iter().zip(g).map(|(&c, g)| c as f64 * g).sum();
            (s, idx as u32)
        })
        .collect();
    sums.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut best = Best::default();
    for w in sums.windows(2) {
        let gap = w[1].0 - w[0].0;
        if gap <= best.worst() {
            let (a, b) = (decode(w[1].1 as usize), decode(w[0].1 as usize));
            let mut d: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            normalize(&mut d);
            best.offer(gap, &d);
        }
    }
    let mut r = finish(inst, best, EliMethod::Pigeonhole)?;
    let total: f64 = g.iter().sum::<f64>() * l as f64;
    r.box_bound = Some(total / (count - 1.0));
    Ok(r)
}
