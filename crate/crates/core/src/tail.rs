//! Tail frequencies of `F(t, T)` over `t ∈ [1, X]`, the predicted doubly
//! exponential tail and the constant `η` that appears in it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};
use crate::numeric::{breakpoints, integrate_pieces, CompensatedSum, GridSpec, QuadRule};
use crate::random_model::{log_bessel_i0, SampleSet};
use crate::zero_sums::WeightSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSide {
    /// `F > V`
    Upper,
    /// `F < -V`
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    #[serde(rename = "V")]
    pub v: f64,
    pub side: TailSide,
    pub fraction: f64,
    /// Length of the time range; `None` for model samples.
    #[serde(rename = "X")]
    pub x: Option<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    pub stderr: f64,
    /// Grid spacing exceeds `0.01/γ_max`.
    pub coarse_grid: bool,
}

/// Grid with node spacing `0.01/γ_max` on `[1, X]`.
pub fn tail_grid(w: &WeightSequence, cutoff: f64, x: f64) -> Result<GridSpec> {
    let (g, _, _) = w.truncated(cutoff);
    GridSpec::resolving(1.0, x, g.last().copied().unwrap_or(1.0), 0.08, 8)
}

/// Measure fractions `meas{t : F(t,T) > V}/X` (or `F < -V`) for every `V`
/// in one pass over `grid`.
pub fn empirical_tails(
    w: &WeightSequence,
    cutoff: f64,
    levels: &[f64],
    grid: &GridSpec,
    side: TailSide,
) -> Result<Vec<TailEstimate>> {
    w.ensure_covers(cutoff)?;
    let (g, m, b) = w.truncated(cutoff);
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&i, &j| levels[i].total_cmp(&levels[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| levels[i]).collect();
    let n = sorted.len();
    // bucket[k] collects weight of nodes exceeding exactly the k smallest levels
    let buckets = grid.reduce_phasors(
        g,
        b,
        || vec![CompensatedSum::new(); n + 1],
        |acc, _t, wt, ph| {
            let f: f64 = ph.iter().zip(m).map(|(p, r)| r * p.re).sum();
            let s = match side {
                TailSide::Upper => f,
                TailSide::Lower => -f,
            };
            let k = sorted.partition_point(|&v| v < s);
            acc[k].add(wt);
        },
        |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
    );
    let len = grid.length();
    let mut above = vec![0.0; n];
    let mut run = CompensatedSum::new();
    for k in (1..=n).rev() {
        run = run.merge(buckets[k]);
        above[k - 1] = (run.value() / len).clamp(0.0, 1.0);
    }
    let gmin = g.first().copied().unwrap_or(1.0);
    let gmax = g.last().copied().unwrap_or(1.0);
    let n_eff = (len * gmin / (2.0 * PI)).max(1.0);
    let coarse = grid.resolution() > 0.01 / gmax * (1.0 + 1e-9);
    let mut out = vec![None; n];
    for (pos, &i) in order.iter().enumerate() {
        let p = above[pos];
        out[i] = Some(TailEstimate {
            v: levels[i],
            side,
            fraction: p,
            x: Some(grid.hi),
            t: cutoff,
            stderr: (p * (1.0 - p) / n_eff).sqrt(),
            coarse_grid: coarse,
        });
    }
    Ok(out.into_iter().map(|e| e.expect("every level filled")).collect())
}

pub fn empirical_tail(
    w: &WeightSequence,
    cutoff: f64,
    v: f64,
    grid: &GridSpec,
    side: TailSide,
) -> Result<TailEstimate> {
    Ok(empirical_tails(w, cutoff, &[v], grid, side)?[0])
}

/// Fraction of model draws beyond `V` with its binomial standard error.
pub fn sample_tail(samples: &SampleSet, v: f64, side: TailSide) -> TailEstimate {
    let hits = samples
        .values
        .iter()
        .filter(|&&s| match side {
            TailSide::Upper => s > v,
            TailSide::Lower => s < -v,
        })
        .count();
    let n = samples.values.len() as f64;
    let p = hits as f64 / n;
    TailEstimate {
        v,
        side,
        fraction: p,
        x: None,
        t: samples.config.t,
        stderr: (p * (1.0 - p) / n).sqrt(),
        coarse_grid: false,
    }
}

/// `exp(-e^{-η-1} √(2πV) exp(√(2πV)))`.
pub fn predicted_tail(v: f64, eta: f64) -> Result<f64> {
    if !(v >= 1.0) {
        return Err(out_of_range("V", format!("{v} < 1")));
    }
    let w = (2.0 * PI * v).sqrt();
    Ok((-(-eta - 1.0).exp() * w * w.exp()).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaVariant {
    /// `∫₀¹ log I₀(u)/u² du + ∫₁^∞ (log I₀(u) - u)/u² du`
    Convergent,
    /// `∫₀¹ log I₀(u)/u² du + ∫₁^∞ (log I₀(u) - 1)/u² du`, which diverges.
    AsPrinted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaValue {
    pub value: f64,
    pub error_bound: f64,
    /// Quadrature runs on `[1, U]`; `[U, ∞)` is handled analytically.
    pub cutoff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub cutoffs: Vec<f64>,
    /// Truncated integral up to each cutoff.
    pub values: Vec<f64>,
    /// `(value[i+1] - value[i]) / log(cutoff[i+1]/cutoff[i])`; tends to 1.
    pub slopes: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum EtaOutcome {
    Convergent(EtaValue),
    AsPrinted(DivergenceReport),
}

/// Default `U` for [`eta_convergent`].
pub const ETA_CUTOFF: f64 = 1000.0;

fn head_integral(tol: f64) -> Result<(f64, f64)> {
    let f = |u: f64| {
        if u == 0.0 {
            0.25
        } else {
            log_bessel_i0(u) / (u * u)
        }
    };
    let q = integrate_pieces(&f, &[0.0, 0.5, 1.0], tol, QuadRule::AdaptiveSimpson)?;
    Ok((q.value, q.error))
}

/// `[1, U]` split at powers of two.
fn body_breaks(u: f64) -> Vec<f64> {
    let mut anchors = Vec::new();
    let mut a = 2.0;
    while a < u {
        anchors.push(a);
        a *= 2.0;
    }
    breakpoints(1.0, u, &anchors, f64::INFINITY)
}

/// `η` with the second integrand `log I₀(u) - u`, integrating to `U` and
/// adding `-(log(2πU)+1)/(2U) + 1/(16U²) + 1/(48U³)` for `[U, ∞)`, which
/// comes from `log I₀(u) - u = -½log(2πu) + 1/(8u) + 1/(16u²) + O(u⁻³)`.
pub fn eta_convergent(tol: f64, cutoff: f64) -> Result<EtaValue> {
    if !(tol >= 1e-10) {
        return Err(out_of_range("tol", format!("{tol} < 1e-10")));
    }
    if !(cutoff >= 50.0) {
        return Err(out_of_range("cutoff", format!("{cutoff} < 50")));
    }
    let (head, e1) = head_integral(0.25 * tol)?;
    let f = |u: f64| (log_bessel_i0(u) - u) / (u * u);
    let body = integrate_pieces(&f, &body_breaks(cutoff), 0.25 * tol, QuadRule::AdaptiveSimpson)?;
    let u = cutoff;
    let tail = -((2.0 * PI * u).ln() + 1.0) / (2.0 * u) + 1.0 / (16.0 * u * u) + 1.0 / (48.0 * u * u * u);
    // next expansion coefficient is about 0.065, integrated: 0.0163/U⁴
    let tail_err = 0.04 / u.powi(4);
    let value = head + body.value + tail;
    let rounding = 64.0 * f64::EPSILON * (head.abs() + body.value.abs() + tail.abs());
    Ok(EtaValue {
        value,
        error_bound: e1 + body.error + tail_err + rounding,
        cutoff,
    })
}

/// The second integral with integrand `log I₀(u) - 1` truncated at each
/// cutoff. The values grow like `log U`, so no limit is reported.
pub fn eta_as_printed(cutoffs: &[f64], tol: f64) -> Result<DivergenceReport> {
    if cutoffs.windows(2).any(|w| !(w[1] > w[0])) || cutoffs.iter().any(|&u| !(u > 1.0)) {
        return Err(out_of_range("cutoffs", format!("{cutoffs:?} must be ascending and > 1")));
    }
    let (head, _) = head_integral(0.25 * tol)?;
    let f = |u: f64| (log_bessel_i0(u) - 1.0) / (u * u);
    let values = cutoffs
        .iter()
        .map(|&u| {
            let q = integrate_pieces(&f, &body_breaks(u), 0.5 * tol, QuadRule::AdaptiveSimpson)?;
            Ok(head + q.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let slopes = cutoffs
        .windows(2)
        .zip(values.windows(2))
        .map(|(c, v)| (v[1] - v[0]) / (c[1] / c[0]).ln())
        .collect();
    Ok(DivergenceReport {
        cutoffs: cutoffs.to_vec(),
        values,
        slopes,
    })
}

pub fn eta_constant(variant: EtaVariant, tol: f64) -> Result<EtaOutcome> {
    match variant {
        EtaVariant::Convergent => Ok(EtaOutcome::Convergent(eta_convergent(tol, ETA_CUTOFF)?)),
        EtaVariant::AsPrinted => Ok(EtaOutcome::AsPrinted(eta_as_printed(&[1e2, 1e3, 1e4], tol)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zero_data::{ZeroSource, ZeroTable};
    use crate::zero_sums::{make_weights, WeightKind};

    const G: [f64; 3] = [14.134_725_141_734_693, 21.022_039_638_771_555, 25.010_857_580_145_688];

    fn sine() -> WeightSequence {
        let t = ZeroTable::new(G.to_vec(), 1e-12, None, ZeroSource::File, 30.0).unwrap();
        make_weights(WeightKind::PntSine, &t).unwrap()
    }

    #[test]
    fn extreme_levels() {
        let w = sine();
        let h = w.h(30.0);
        let grid = GridSpec::new(1.0, 200.0, 2000, 4).unwrap();
        let e = empirical_tails(&w, 30.0, &[h * 1.01, -h * 1.01, 0.0], &grid, TailSide::Upper).unwrap();
        assert_eq!(e[0].fraction, 0.0);
        assert!((e[1].fraction - 1.0).abs() < 1e-12);
        assert!(e[0].coarse_grid);
        assert_eq!(e[2].v, 0.0);
    }

    #[test]
    fn predicted_tail_shape() {
        assert!(predicted_tail(0.5, 0.0).is_err());
        let a = predicted_tail(1.0, 0.1).unwrap();
        let b = predicted_tail(2.0, 0.1).unwrap();
        assert!(0.0 < b && b < a && a < 1.0);
    }

    #[test]
    fn eta_integrand_limit() {
        let u = 1e-4;
        assert!((log_bessel_i0(u) / (u * u) - 0.25).abs() < 1e-8);
    }

    #[test]
    fn eta_arguments_checked() {
        assert!(eta_convergent(1e-12, 1000.0).is_err());
        assert!(eta_as_printed(&[10.0, 5.0], 1e-8).is_err());
    }
}
