//! Fejér-kernel smoothing of `F(t, Y)`.
//!
//! With `K(u) = (sin πu / πu)²` and `h = T/2π`, the kernel `h K(hu)` has
//! Fourier transform `k(γ/T)` where `k(t) = max(0, 1 - |t|)`. Smoothing
//! `F(·, Y)` over the whole line therefore multiplies each term by
//! `max(0, 1 - γ/T)`; over `[-Z, Z]` the difference is bounded by the kernel
//! mass outside the window.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::numeric::{breakpoints, integrate_pieces, CompensatedSum, GridSpec, QuadResult, QuadRule};
use crate::zero_sums::WeightSequence;

/// `K(u) = (sin πu / πu)²`, with `K(0) = 1`.
pub fn fejer_k(u: f64) -> f64 {
    let x = PI * u;
    if x.abs() < 1e-4 {
        // Taylor: 1 - x²/3 + 2x⁴/45
        let x2 = x * x;
        return 1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 45.0;
    }
    let s = x.sin() / x;
    s * s
}

/// `k(t) = max(0, 1 - |t|)`.
pub fn triangle(t: f64) -> f64 {
    (1.0 - t.abs()).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingPlan {
    /// Kernel scale: the kernel is `(T/2π) K(Tu/2π)`.
    #[serde(rename = "T")]
    pub t: f64,
    /// Integration window `[-Z, Z]`.
    #[serde(rename = "Z")]
    pub z: f64,
    pub quad_tol: f64,
    pub quad_rule: QuadRule,
    /// Require `Z ≥ (log Y)^A` for the weights in use.
    pub enforce_window: bool,
}

impl SmoothingPlan {
    pub fn new(t: f64, z: f64, quad_tol: f64) -> Result<Self> {
        let plan = Self {
            t,
            z,
            quad_tol,
            quad_rule: QuadRule::default(),
            enforce_window: false,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_rule(mut self, rule: QuadRule) -> Self {
        self.quad_rule = rule;
        self
    }

    pub fn enforcing_window(mut self) -> Self {
        self.enforce_window = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) {
            return Err(out_of_range("T", format!("{} must be positive", self.t)));
        }
        if !(self.z > 0.0) {
            return Err(out_of_range("Z", format!("{} must be positive", self.z)));
        }
        if !(1e-12..=1e-4).contains(&self.quad_tol) {
            return Err(out_of_range("quad_tol", format!("{} not in [1e-12, 1e-4]", self.quad_tol)));
        }
        Ok(())
    }

    /// `h = T/2π`.
    pub fn h(&self) -> f64 {
        self.t / (2.0 * PI)
    }

    /// Kernel nulls `u = 2πm/T` inside `(-Z, Z)`.
    fn nulls(&self) -> Vec<f64> {
        let step = 2.0 * PI / self.t;
        let m = (self.z / step).floor() as i64;
        (-m..=m).filter(|&j| j != 0).map(|j| j as f64 * step).collect()
    }

    /// Bound on `∫_{|u|>Z} h K(hu) du`, from `K(u) ≤ 1/(πu)²`, in the form
    /// `(2π)²/(π² T Z)`.
    pub fn outside_mass_bound(&self) -> f64 {
        (2.0 * PI).powi(2) / (PI * PI * self.t * self.z)
    }

    /// The sharper bound `4/(π T Z)` from the same estimate.
    pub fn outside_mass_sharp(&self) -> f64 {
        4.0 / (PI * self.t * self.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothedValue {
    pub value: f64,
    pub quad_error: f64,
    /// `H(Y)` times the outside-mass bound.
    pub tail_bound: f64,
}

impl SmoothedValue {
    pub fn error_bound(&self) -> f64 {
        self.quad_error + self.tail_bound
    }
}

fn check_window(w: &WeightSequence, plan: &SmoothingPlan, y: f64) -> Result<()> {
    if plan.enforce_window && y > 1.0 {
        let need = y.ln().powf(w.exponent);
        if plan.z < need {
            return Err(Error::Config(format!(
                "Z = {} is below (log Y)^A = {need}",
                plan.z
            )));
        }
    }
    Ok(())
}

/// `∫_{-Z}^{Z} h K(hu) F(t+u, Y) du` by direct quadrature, with breakpoints at
/// the kernel nulls and pieces no wider than one radian of the fastest term.
pub fn smooth_f(w: &WeightSequence, t: f64, plan: &SmoothingPlan, y: f64) -> Result<SmoothedValue> {
    plan.validate()?;
    w.ensure_covers(y)?;
    check_window(w, plan, y)?;
    let h = plan.h();
    let (g, _, _) = w.truncated(y);
    let omega = g.last().copied().unwrap_or(1.0).max(plan.t);
    let breaks = breakpoints(-plan.z, plan.z, &plan.nulls(), 1.0 / omega);
    let f = |u: f64| h * fejer_k(h * u) * w.f_unchecked(t + u, y);
    let q = integrate_pieces(&f, &breaks, plan.quad_tol, plan.quad_rule)?;
    Ok(SmoothedValue {
        value: q.value,
        quad_error: q.error,
        tail_bound: w.h(y) * plan.outside_mass_bound(),
    })
}

/// `Re Σ_{0<γ≤Y} e^{i(γt+β_γ)} |r_γ| max(0, 1 - γ/T)`.
pub fn triangular_sum(w: &WeightSequence, t: f64, cap: f64, y: f64) -> Result<f64> {
    w.ensure_covers(y)?;
    let (g, m, b) = w.truncated(y.min(cap));
    let mut s = CompensatedSum::new();
    for ((g, m), b) in g.iter().zip(m).zip(b) {
        s.add(m * triangle(g / cap) * (g * t + b).cos());
    }
    Ok(s.value())
}

/// `Σ_{X1<γ1,γ2≤X2} |r_{γ1} r_{γ2}| min(1, 1/|γ1-γ2|)`, diagonal included.
pub fn pair_min_sum(w: &WeightSequence, x1: f64, x2: f64) -> Result<f64> {
    if !(x1 < x2) {
        return Err(out_of_range("pair range", format!("X1 = {x1} ≥ X2 = {x2}")));
    }
    w.ensure_covers(x2)?;
    let (g, m, _) = w.window(x1, x2);
    let rows: Vec<CompensatedSum> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let mut s = CompensatedSum::new();
            s.add(m[i] * m[i]);
            for j in i + 1..g.len() {
                let d = (g[j] - g[i]).abs();
                s.add(2.0 * m[i] * m[j] * if d > 1.0 { 1.0 / d } else { 1.0 });
            }
            s
        })
        .collect();
    Ok(rows
        .into_iter()
        .fold(CompensatedSum::new(), CompensatedSum::merge)
        .value())
}

type KernelKey = (u64, u64, u64, u64, QuadRule);

fn kernel_cache() -> &'static RwLock<HashMap<KernelKey, QuadResult>> {
    static CACHE: OnceLock<RwLock<HashMap<KernelKey, QuadResult>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `∫_{-Z}^{Z} h K(hu) cos(γu) du` (the kernel is even, so this is the full
/// transform), cached by `(γ, h, Z, tol, rule)`.
pub fn kernel_transform(gamma: f64, plan: &SmoothingPlan) -> Result<QuadResult> {
    let key = (
        gamma.to_bits(),
        plan.t.to_bits(),
        plan.z.to_bits(),
        plan.quad_tol.to_bits(),
        plan.quad_rule,
    );
    if let Some(v) = kernel_cache().read().expect("kernel cache poisoned").get(&key) {
        return Ok(*v);
    }
    let h = plan.h();
    let nulls: Vec<f64> = plan.nulls().into_iter().filter(|&u| u > 0.0).collect();
    let breaks = breakpoints(0.0, plan.z, &nulls, 1.0 / gamma.max(plan.t));
    let f = |u: f64| 2.0 * h * fejer_k(h * u) * (gamma * u).cos();
    let q = integrate_pieces(&f, &breaks, plan.quad_tol, plan.quad_rule)?;
    kernel_cache()
        .write()
        .expect("kernel cache poisoned")
        .entry(key)
        .or_insert(q);
    Ok(q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailMoment {
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "Y2")]
    pub y2: f64,
    pub value: f64,
    /// Propagated kernel quadrature error.
    pub kernel_error: f64,
}

/// Grid average of `|Σ_{Y<γ≤Y2} r_γ e^{iγt} κ(γ)|²`, where `κ(γ)` is the
/// truncated kernel transform, i.e. the smoothed tail `ε(t, Y, Y2)`.
pub fn smoothed_tail_second_moment(
    w: &WeightSequence,
    y: f64,
    y2: f64,
    plan: &SmoothingPlan,
    grid: &GridSpec,
) -> Result<TailMoment> {
    plan.validate()?;
    let zero = TailMoment {
        y,
        y2,
        value: 0.0,
        kernel_error: 0.0,
    };
    if y2 <= y {
        return Ok(zero);
    }
    w.ensure_covers(y2)?;
    let (g, m, b) = w.window(y, y2);
    if g.is_empty() {
        return Ok(zero);
    }
    let kern: Vec<QuadResult> = g
        .par_iter()
        .map(|&g| kernel_transform(g, plan))
        .collect::<Result<_>>()?;
    let amp: Vec<f64> = m.iter().zip(&kern).map(|(m, k)| m * k.value).collect();
    let s: f64 = amp.iter().map(|a| a.abs()).sum();
    let e: f64 = m.iter().zip(&kern).map(|(m, k)| m * k.error).sum();
    let acc = grid.reduce_phasors(
        g,
        b,
        CompensatedSum::new,
        |acc, _t, wt, ph| {
            let z: Complex64 = ph.iter().zip(&amp).map(|(p, a)| p * a).sum();
            acc.add(wt * z.norm_sqr());
        },
        CompensatedSum::merge,
    );
    Ok(TailMoment {
        y,
        y2,
        value: acc.value() / grid.length(),
        kernel_error: 2.0 * s * e + e * e,
    })
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
    fn kernel_values() {
        assert_eq!(fejer_k(0.0), 1.0);
        assert!(fejer_k(1.0) < 1e-30);
        assert!((fejer_k(0.5) - 4.0 / (PI * PI)).abs() < 1e-15);
        assert!((fejer_k(1e-5) - fejer_k(-1e-5)).abs() < 1e-18);
        assert_eq!(triangle(0.0), 1.0);
        assert_eq!(triangle(1.5), 0.0);
    }

    #[test]
    fn plan_validation() {
        assert!(SmoothingPlan::new(10.0, 1.0, 1e-3).is_err());
        assert!(SmoothingPlan::new(10.0, 0.0, 1e-6).is_err());
        let p = SmoothingPlan::new(10.0, 5.0, 1e-6).unwrap().enforcing_window();
        assert!(matches!(smooth_f(&sine(), 0.0, &p, 30.0), Err(Error::Config(_))));
        assert!(p.outside_mass_sharp() < p.outside_mass_bound());
    }

    #[test]
    fn triangular_below_first_ordinate() {
        assert_eq!(triangular_sum(&sine(), 1.0, 14.0, 30.0).unwrap(), 0.0);
    }

    #[test]
    fn kernel_transform_is_triangle() {
        let p = SmoothingPlan::new(30.0, 60.0, 1e-9).unwrap();
        let k = kernel_transform(G[0], &p).unwrap();
        let tail = p.outside_mass_sharp();
        assert!((k.value - triangle(G[0] / 30.0)).abs() < tail + 1e-8);
    }

    #[test]
    fn pair_sum_conventions() {
        let w = sine();
        assert_eq!(pair_min_sum(&w, 15.0, 16.0).unwrap(), 0.0);
        let r2 = w.moduli()[1];
        assert!((pair_min_sum(&w, 15.0, 22.0).unwrap() - r2 * r2).abs() < 1e-18);
        assert!(pair_min_sum(&w, 22.0, 15.0).is_err());
    }

    #[test]
    fn tail_moment_empty() {
        let p = SmoothingPlan::new(30.0, 10.0, 1e-8).unwrap();
        let grid = GridSpec::new(1.0, 100.0, 100, 4).unwrap();
        let r = smoothed_tail_second_moment(&sine(), 30.0, 20.0, &p, &grid).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
