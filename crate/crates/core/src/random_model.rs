//! The random model `Σ_{γ≤T} |r_γ| cos θ_γ` with independent phases uniform
//! on `[-π, π]`, its moment generating function `Π I₀(s|r_γ|)`, exact mixed
//! cosine moments, and the matching time averages of `F(t, T)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::numeric::{CompensatedSum, GridSpec, Interval};
use crate::zero_sums::WeightSequence;

/// Largest `|t|` accepted by [`bessel_i0`].
pub const BESSEL_MAX: f64 = 700.0;

/// Largest multiset accepted by the moment routines.
pub const MAX_MOMENT_ORDER: usize = 20;

/// `I₀(t) = Σ (t/2)^{2k} / (k!)²`.
pub fn bessel_i0(t: f64) -> Result<f64> {
    if !(t.abs() <= BESSEL_MAX) {
        return Err(Error::Overflow(format!("I0({t}) outside |t| ≤ {BESSEL_MAX}")));
    }
    let q = 0.25 * t * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < sum * 1e-17 && k > q.sqrt() {
            break;
        }
        k += 1.0;
    }
    Ok(sum)
}

/// `log I₀(t)` for any real `t`; switches to the large-argument expansion
/// above [`BESSEL_MAX`].
pub fn log_bessel_i0(t: f64) -> f64 {
    let t = t.abs();
    if t <= 2.0 {
        // I₀ - 1 summed without the leading 1 keeps full relative accuracy.
        let q = 0.25 * t * t;
        let mut term = 1.0;
        let mut sum = 0.0;
        let mut k = 1.0;
        while term > 1e-18 {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        return sum.ln_1p();
    }
    if t <= BESSEL_MAX {
        return bessel_i0(t).expect("in range").ln();
    }
    // I₀(t) ~ e^t/√(2πt) Σ ((2k-1)!!)² / (k! (8t)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..20 {
        let c = (2 * k - 1) as f64;
        term *= c * c / (8.0 * k as f64 * t);
        sum += term;
        if term < 1e-17 {
            break;
        }
    }
    t - 0.5 * (2.0 * PI * t).ln() + sum.ln()
}

fn check_mgf_range(w: &WeightSequence, cutoff: f64, s: f64) -> Result<()> {
    w.ensure_covers(cutoff)?;
    let (_, m, _) = w.truncated(cutoff);
    let top = m.iter().fold(0.0f64, |a, &b| a.max(b));
    if (s * top).abs() > BESSEL_MAX {
        return Err(Error::Overflow(format!("s·max|r| = {} exceeds {BESSEL_MAX}", s * top)));
    }
    Ok(())
}

/// `E exp(s Σ|r_γ| cos θ_γ) = Π_{γ≤T} I₀(s|r_γ|)`.
pub fn exact_mgf(w: &WeightSequence, cutoff: f64, s: f64) -> Result<f64> {
    let l = exact_log_mgf(w, cutoff, s)?;
    if l > f64::MAX.ln() {
        return Err(Error::Overflow(format!("log mgf = {l}")));
    }
    Ok(l.exp())
}

/// `Σ_{γ≤T} log I₀(s|r_γ|)`.
pub fn exact_log_mgf(w: &WeightSequence, cutoff: f64, s: f64) -> Result<f64> {
    check_mgf_range(w, cutoff, s)?;
    let (_, m, _) = w.truncated(cutoff);
    Ok(m.iter().map(|r| log_bessel_i0(s * r)).collect::<CompensatedSum>().value())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomModelConfig {
    #[serde(rename = "T")]
    pub t: f64,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub config: RandomModelConfig,
    /// `H(T)`, a bound on every value.
    pub h: f64,
    /// `Σ|r_γ|²/2`, the model variance.
    pub variance: f64,
}

const SAMPLE_CHUNK: usize = 4096;

/// Draws `n_samples` values of `Σ_{γ≤T} |r_γ| cos θ_γ`.
///
/// The generator is ChaCha8 keyed by `seed`; sample `i` consumes the
/// keystream words starting at `2·n·i` (one `u64` per zero), so the value of
/// every sample depends only on `(seed, i)` and parallel runs match serial.
pub fn sample_model(w: &WeightSequence, config: RandomModelConfig) -> Result<SampleSet> {
    if config.n_samples == 0 {
        return Err(out_of_range("n_samples", "must be at least 1"));
    }
    w.ensure_covers(config.t)?;
    let (_, m, _) = w.truncated(config.t);
    let n = m.len();
    let n_chunks = config.n_samples.div_ceil(SAMPLE_CHUNK);
    let values: Vec<f64> = (0..n_chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let i0 = c * SAMPLE_CHUNK;
            let i1 = (i0 + SAMPLE_CHUNK).min(config.n_samples);
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_word_pos((2 * n * i0) as u128);
            (i0..i1)
                .map(|_| {
                    let mut s = CompensatedSum::new();
                    for r in m {
                        let theta = PI * (2.0 * rng.random::<f64>() - 1.0);
                        s.add(r * theta.cos());
                    }
                    s.value()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(SampleSet {
        values,
        config,
        h: m.iter().sum(),
        variance: 0.5 * m.iter().map(|r| r * r).sum::<f64>(),
    })
}

impl SampleSet {
    pub fn mean(&self) -> f64 {
        self.values.iter().copied().collect::<CompensatedSum>().value() / self.values.len() as f64
    }

    /// Unbiased sample variance.
    pub fn sample_variance(&self) -> f64 {
        let mu = self.mean();
        let n = self.values.len() as f64;
        self.values
            .iter()
            .map(|v| (v - mu) * (v - mu))
            .collect::<CompensatedSum>()
            .value()
            / (n - 1.0).max(1.0)
    }

    /// Counts per bin of width `(hi - lo)/bins` on `[lo, hi)`.
    pub fn histogram(&self, lo: f64, hi: f64, bins: usize) -> Vec<usize> {
        let mut out = vec![0; bins];
        let width = (hi - lo) / bins as f64;
        for v in &self.values {
            let b = ((v - lo) / width).floor();
            if b >= 0.0 && (b as usize) < bins {
                out[b as usize] += 1;
            }
        }
        out
    }
}

/// `E Π cos θ_{γ_j}` for a multiset of ordinates (distinct ordinates carry
/// independent phases; repeated ones share a phase), i.e.
/// `2^{-k} #{δ ∈ {±1}^k : Σ δ_j γ_j = 0}`.
///
/// Sign vectors whose integer coefficients on the distinct ordinates all
/// vanish count exactly. Any other combination must be certified nonzero by
/// interval arithmetic with radius `abs_error` per ordinate, otherwise a
/// precision error is returned.
pub fn random_moment(gammas: &[f64], abs_error: f64) -> Result<f64> {
    let k = gammas.len();
    if k > MAX_MOMENT_ORDER {
        return Err(out_of_range("multiset", format!("{k} > {MAX_MOMENT_ORDER} elements")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let mut distinct: Vec<f64> = gammas.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let idx: Vec<usize> = gammas
        .iter()
        .map(|g| distinct.iter().position(|d| d == g).expect("present"))
        .collect();
    let enclosures: Vec<Interval> = distinct.iter().map(|&g| Interval::around(g, abs_error)).collect();
    let mut count = 0u64;
    let mut coeffs = vec![0i64; distinct.len()];
    for mask in 0u64..(1u64 << k) {
        coeffs.iter_mut().for_each(|c| *c = 0);
        for (j, &d) in idx.iter().enumerate() {
            coeffs[d] += if mask >> j & 1 == 1 { -1 } else { 1 };
        }
        if coeffs.iter().all(|&c| c == 0) {
            count += 1;
            continue;
        }
        let value = coeffs
            .iter()
            .zip(&enclosures)
            .fold(Interval::point(0.0), |acc, (&c, e)| acc.add(e.scale(c)));
        if value.contains_zero() {
            return Err(Error::Precision(format!(
                "combination {coeffs:?} of {distinct:?} cannot be separated from 0 at abs_error {abs_error}"
            )));
        }
    }
    Ok(count as f64 / (1u64 << k) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeAverage {
    pub value: f64,
    /// Difference from the same average on a grid with half the panels.
    pub error: f64,
}

/// Default grid for `(1/X)∫₁^X Π cos(γ_j t + β_j) dt`.
pub fn moment_grid(ordinates: &[f64], x: f64) -> Result<GridSpec> {
    GridSpec::for_frequency(1.0, x, ordinates.iter().map(|g| g.abs()).sum::<f64>())
}

fn check_moment_grid(grid: &GridSpec, x: f64) -> Result<()> {
    if grid.lo != 1.0 || grid.hi != x {
        return Err(out_of_range(
            "grid",
            format!("[{}, {}] does not cover [1, {x}]", grid.lo, grid.hi),
        ));
    }
    Ok(())
}

/// Sums many series at once: plain partial sums flushed into compensated
/// totals every `FLUSH` additions.
#[derive(Clone, Debug)]
struct BatchSum {
    partial: Vec<f64>,
    total: Vec<CompensatedSum>,
    count: usize,
}

const FLUSH: usize = 64;

impl BatchSum {
    fn new(n: usize) -> Self {
        Self {
            partial: vec![0.0; n],
            total: vec![CompensatedSum::new(); n],
            count: 0,
        }
    }

    fn tick(&mut self) {
        self.count += 1;
        if self.count == FLUSH {
            self.flush();
        }
    }

    fn flush(&mut self) {
        for (t, p) in self.total.iter_mut().zip(self.partial.iter_mut()) {
            t.add(*p);
            *p = 0.0;
        }
        self.count = 0;
    }

    fn merge(mut self, mut other: Self) -> Self {
        self.flush();
        other.flush();
        for (a, b) in self.total.iter_mut().zip(other.total) {
            *a = a.merge(b);
        }
        self
    }

    fn values(mut self) -> Vec<f64> {
        self.flush();
        self.total.iter().map(|t| t.value()).collect()
    }
}

/// Time averages of `Π_{j∈S} cos(γ_j t + β_j)` over `grid` for several index
/// multisets `S` at once. Products are built from their sorted prefixes, one
/// multiplication per multiset and node.
pub fn empirical_cos_moments(
    ordinates: &[f64],
    phases: &[f64],
    multisets: &[Vec<usize>],
    grid: &GridSpec,
) -> Result<Vec<TimeAverage>> {
    if ordinates.len() != phases.len() {
        return Err(Error::Validation("ordinates and phases differ in length".into()));
    }
    for s in multisets {
        if s.len() > MAX_MOMENT_ORDER || s.iter().any(|&i| i >= ordinates.len()) {
            return Err(out_of_range("multiset", format!("{s:?}")));
        }
    }
    // Every nonempty sorted prefix of every multiset, shortest first.
    let mut prefixes: Vec<Vec<usize>> = multisets
        .iter()
        .flat_map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            (1..=s.len()).map(move |k| s[..k].to_vec())
        })
        .collect();
    prefixes.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    prefixes.dedup();
    // (parent slot or usize::MAX for a single factor, last index)
    let steps: Vec<(usize, usize)> = prefixes
        .iter()
        .map(|p| {
            let last = *p.last().expect("nonempty");
            let parent = if p.len() == 1 {
                usize::MAX
            } else {
                prefixes.binary_search_by(|q| {
                    q.len().cmp(&(p.len() - 1)).then_with(|| q[..].cmp(&p[..p.len() - 1]))
                })
                .expect("prefix present")
            };
            (parent, last)
        })
        .collect();
    let slot_of = |s: &Vec<usize>| -> Option<usize> {
        if s.is_empty() {
            return None;
        }
        let mut s = s.clone();
        s.sort_unstable();
        prefixes
            .binary_search_by(|q| q.len().cmp(&s.len()).then_with(|| q[..].cmp(&s[..])))
            .ok()
    };
    let n = prefixes.len();
    let run = |g: &GridSpec| {
        let sums = g.reduce_phasors(
            ordinates,
            phases,
            || (BatchSum::new(n), vec![0.0; n]),
            |(acc, prod), _t, w, ph| {
                for (k, &(parent, last)) in steps.iter().enumerate() {
                    let c = ph[last].re;
                    prod[k] = if parent == usize::MAX { c } else { prod[parent] * c };
                }
                for (a, p) in acc.partial.iter_mut().zip(prod.iter()) {
                    *a += w * p;
                }
                acc.tick();
            },
            |a, b| (a.0.merge(b.0), a.1),
        );
        sums.0.values().into_iter().map(|v| v / g.length()).collect::<Vec<f64>>()
    };
    let fine = run(grid);
    let coarse = run(&grid.coarsened());
    Ok(multisets
        .iter()
        .map(|s| match slot_of(s) {
            Some(k) => TimeAverage {
                value: fine[k],
                error: (fine[k] - coarse[k]).abs(),
            },
            None => TimeAverage {
                value: 1.0,
                error: 0.0,
            },
        })
        .collect())
}

/// `(1/(X-1)) ∫₁^X Π_j cos(γ_j t + β_j) dt` on `grid`.
pub fn empirical_cos_moment(
    ordinates: &[f64],
    phases: &[f64],
    x: f64,
    grid: &GridSpec,
) -> Result<TimeAverage> {
    check_moment_grid(grid, x)?;
    let all: Vec<usize> = (0..ordinates.len()).collect();
    Ok(empirical_cos_moments(ordinates, phases, &[all], grid)?[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgfComparison {
    pub s: f64,
    pub empirical: f64,
    pub exact: f64,
    pub relative_gap: f64,
    /// Grid-refinement error of `empirical`.
    pub grid_error: f64,
}

/// Default grid for time averages of functions of `F(t, T)` on `[2, X]`.
pub fn mgf_grid(w: &WeightSequence, cutoff: f64, x: f64) -> Result<GridSpec> {
    let (g, _, _) = w.truncated(cutoff);
    GridSpec::for_frequency(2.0, x, g.last().copied().unwrap_or(1.0))
}

/// `(1/X) ∫₂^X exp(s F(t, T)) dt` for several `s` in one pass, compared with
/// [`exact_mgf`].
pub fn empirical_mgf_many(
    w: &WeightSequence,
    cutoff: f64,
    s_values: &[f64],
    grid: &GridSpec,
) -> Result<Vec<MgfComparison>> {
    for &s in s_values {
        check_mgf_range(w, cutoff, s)?;
    }
    let (g, m, b) = w.truncated(cutoff);
    let n = s_values.len();
    let run = |grid: &GridSpec| {
        let sums = grid.reduce_phasors(
            g,
            b,
            || vec![CompensatedSum::new(); n],
            |acc, _t, wt, ph| {
                let f: f64 = ph.iter().zip(m).map(|(p, r)| r * p.re).sum();
                for (a, &s) in acc.iter_mut().zip(s_values) {
                    a.add(wt * (s * f).exp());
                }
            },
            |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
        );
        sums.into_iter().map(|s| s.value() / grid.length()).collect::<Vec<f64>>()
    };
    let fine = run(grid);
    let coarse = run(&grid.coarsened());
    s_values
        .iter()
        .zip(fine.into_iter().zip(coarse))
        .map(|(&s, (e, c))| {
            let exact = exact_mgf(w, cutoff, s)?;
            Ok(MgfComparison {
                s,
                empirical: e,
                exact,
                relative_gap: e / exact - 1.0,
                grid_error: (e - c).abs(),
            })
        })
        .collect()
}

pub fn empirical_mgf(w: &WeightSequence, cutoff: f64, s: f64, grid: &GridSpec) -> Result<MgfComparison> {
    Ok(empirical_mgf_many(w, cutoff, &[s], grid)?[0])
}
