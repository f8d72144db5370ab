//! Shared numerical building blocks: compensated summation, outward-rounded
//! intervals, Gauss–Legendre rules, time-average grids and adaptive quadrature.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(mut self, other: CompensatedSum) -> Self {
        self.add(other.sum);
        self.add(other.comp);
        self
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator of reals.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Closed interval `[lo, hi]` with outward rounding on every operation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// Enclosure `[x - radius, x + radius]`, rounded outward.
    pub fn around(x: f64, radius: f64) -> Self {
        Self {
            lo: (x - radius).next_down(),
            hi: (x + radius).next_up(),
        }
    }

    pub fn add(self, other: Interval) -> Self {
        Self {
            lo: (self.lo + other.lo).next_down(),
            hi: (self.hi + other.hi).next_up(),
        }
    }

    pub fn scale(self, k: i64) -> Self {
        let k = k as f64;
        let (a, b) = (self.lo * k, self.hi * k);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if k == 0.0 {
            return Self::point(0.0);
        }
        Self {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    /// Enclosure of `|x|` for `x` in the interval.
    pub fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Self {
                lo: -self.hi,
                hi: -self.lo,
            }
        } else {
            Self {
                lo: 0.0,
                hi: self.hi.max(-self.lo),
            }
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl10() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(10))
}

/// Composite Gauss–Legendre sampling grid on `[lo, hi]`, used for every
/// empirical time average `(1/(hi - lo)) ∫ f(t) dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub panels: usize,
    pub order: usize,
}

/// Panels per parallel work item; fixed so that results do not depend on
/// the thread count.
const CHUNK_PANELS: usize = 4096;

impl GridSpec {
    pub fn new(lo: f64, hi: f64, panels: usize, order: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(out_of_range("grid", format!("[{lo}, {hi}] is empty")));
        }
        if panels == 0 || !(1..=32).contains(&order) {
            return Err(out_of_range(
                "grid",
                format!("panels = {panels}, order = {order}"),
            ));
        }
        Ok(Self {
            lo,
            hi,
            panels,
            order,
        })
    }

    /// Grid whose panels each span at most `radians_per_panel` of the
    /// oscillation `e^{i omega_max t}`.
    pub fn resolving(
        lo: f64,
        hi: f64,
        omega_max: f64,
        radians_per_panel: f64,
        order: usize,
    ) -> Result<Self> {
        let omega = omega_max.abs().max(1e-3);
        let panels = ((hi - lo) * omega / radians_per_panel).ceil().max(1.0) as usize;
        Self::new(lo, hi, panels, order)
    }

    /// Default grid for time averages of trigonometric sums with top
    /// frequency `omega_max`: 8-point panels spanning 4 radians each.
    pub fn for_frequency(lo: f64, hi: f64, omega_max: f64) -> Result<Self> {
        Self::resolving(lo, hi, omega_max, 4.0, 8)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn panel_width(&self) -> f64 {
        self.length() / self.panels as f64
    }

    /// Mean distance between consecutive nodes.
    pub fn resolution(&self) -> f64 {
        self.panel_width() / self.order as f64
    }

    pub fn node_count(&self) -> usize {
        self.panels * self.order
    }

    /// Same interval and rule with half as many panels (at least one).
    pub fn coarsened(&self) -> Self {
        Self {
            panels: (self.panels / 2).max(1),
            ..*self
        }
    }

    /// Visits every node `(t, w)` together with the phasors
    /// `e^{i(freqs[j] t + phases[j])}`. Work is split into fixed chunks that
    /// run in parallel; chunk accumulators are merged in index order, so the
    /// result is bit-identical for any thread count.
    pub fn reduce_phasors<A, I, V, M>(
        &self,
        freqs: &[f64],
        phases: &[f64],
        init: I,
        visit: V,
        merge: M,
    ) -> A
    where
        A: Send,
        I: Fn() -> A + Sync,
        V: Fn(&mut A, f64, f64, &[Complex64]) + Sync,
        M: Fn(A, A) -> A,
    {
        assert_eq!(freqs.len(), phases.len());
        let (x, w) = gauss_legendre(self.order);
        let h = self.panel_width();
        let offsets: Vec<f64> = x.iter().map(|&xi| 0.5 * h * (xi + 1.0)).collect();
        let weights: Vec<f64> = w.iter().map(|&wi| 0.5 * h * wi).collect();
        let j = freqs.len();
        let node_rot: Vec<Complex64> = offsets
            .iter()
            .flat_map(|&d| freqs.iter().map(move |&f| Complex64::from_polar(1.0, f * d)))
            .collect();
        let step: Vec<Complex64> = freqs
            .iter()
            .map(|&f| Complex64::from_polar(1.0, f * h))
            .collect();
        let n_chunks = self.panels.div_ceil(CHUNK_PANELS);

        let partials: Vec<A> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let p0 = c * CHUNK_PANELS;
                let p1 = (p0 + CHUNK_PANELS).min(self.panels);
                let mut acc = init();
                let mut base: Vec<Complex64> = freqs
                    .iter()
                    .zip(phases)
                    .map(|(&f, &b)| Complex64::from_polar(1.0, f * (self.lo + p0 as f64 * h) + b))
                    .collect();
                let mut ph = vec![Complex64::new(0.0, 0.0); j];
                for p in p0..p1 {
                    let left = self.lo + p as f64 * h;
                    for (k, (&d, &wk)) in offsets.iter().zip(&weights).enumerate() {
                        let rot = &node_rot[k * j..(k + 1) * j];
                        for ((dst, b), r) in ph.iter_mut().zip(&base).zip(rot) {
                            *dst = b * r;
                        }
                        visit(&mut acc, left + d, wk, &ph);
                    }
                    for (b, s) in base.iter_mut().zip(&step) {
                        *b *= s;
                    }
                }
                acc
            })
            .collect();
        let mut it = partials.into_iter();
        let first = it.next().expect("grid has at least one panel");
        it.fold(first, merge)
    }

    /// Average of a real function of `t` over the grid.
    pub fn average<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> f64 {
        let s = self.reduce_phasors(
            &[],
            &[],
            CompensatedSum::new,
            |acc, t, w, _| acc.add(w * f(t)),
            CompensatedSum::merge,
        );
        s.value() / self.length()
    }
}

/// Quadrature scheme for finite integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadRule {
    #[default]
    AdaptiveSimpson,
    GaussPanels,
}

/// Value of a numerical integral with an estimate of its absolute error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

const MAX_DEPTH: u32 = 40;

struct Adaptive<'a, F> {
    f: &'a F,
    failed: bool,
}

impl<F: Fn(f64) -> f64> Adaptive<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn simpson(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth == 0 || (m - a) <= f64::EPSILON * a.abs() {
            if depth == 0 && delta.abs() > 15.0 * tol {
                self.failed = true;
            }
            return (left + right + delta / 15.0, delta.abs() / 15.0);
        }
        let (lv, le) = self.simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
        let (rv, re) = self.simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        (lv + rv, le + re)
    }

    fn gauss_piece(&self, a: f64, b: f64) -> f64 {
        let (x, w) = gl10();
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        h * x
            .iter()
            .zip(w)
            .map(|(&xi, &wi)| wi * (self.f)(c + h * xi))
            .sum::<f64>()
    }

    fn gauss(&mut self, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let left = self.gauss_piece(a, m);
        let right = self.gauss_piece(m, b);
        let delta = (left + right - whole).abs();
        if delta <= tol || depth == 0 {
            if depth == 0 && delta > tol {
                self.failed = true;
            }
            // The split estimate is far more accurate than `delta`; report
            // `delta` as a conservative bound.
            return (left + right, delta);
        }
        let (lv, le) = self.gauss(a, m, left, 0.5 * tol, depth - 1);
        let (rv, re) = self.gauss(m, b, right, 0.5 * tol, depth - 1);
        (lv + rv, le + re)
    }
}

/// Integrates `f` over consecutive pieces `[breaks[i], breaks[i+1]]`,
/// giving each piece a share of `tol` proportional to its width.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    tol: f64,
    rule: QuadRule,
) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let total = breaks[breaks.len() - 1] - breaks[0];
    let mut driver = Adaptive { f, failed: false };
    let mut value = CompensatedSum::new();
    let mut error = 0.0;
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b <= a {
            continue;
        }
        let piece_tol = tol * (b - a) / total;
        let (v, e) = match rule {
            QuadRule::AdaptiveSimpson => {
                let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
                let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
                driver.simpson(a, b, fa, fm, fb, whole, piece_tol, MAX_DEPTH)
            }
            QuadRule::GaussPanels => {
                let whole = driver.gauss_piece(a, b);
                driver.gauss(a, b, whole, piece_tol, MAX_DEPTH / 2)
            }
        };
        value.add(v);
        error += e;
    }
    let value = value.value();
    if driver.failed || !value.is_finite() {
        return Err(Error::Quadrature {
            estimate: value,
            error,
        });
    }
    Ok(QuadResult { value, error })
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, rule: QuadRule) -> Result<QuadResult> {
    integrate_pieces(f, &[a, b], tol, rule)
}

/// Breakpoints covering `[a, b]` that include every point of `nulls`
/// inside the interval and keep each piece no wider than `max_width`.
pub fn breakpoints(a: f64, b: f64, nulls: &[f64], max_width: f64) -> Vec<f64> {
    let mut anchors = vec![a];
    anchors.extend(nulls.iter().copied().filter(|&x| x > a && x < b));
    anchors.push(b);
    let mut out = Vec::with_capacity(anchors.len());
    out.push(a);
    for w in anchors.windows(2) {
        let n = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
        for i in 1..=n {
            out.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 4, 8, 10, 16] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "n={n} deg={deg}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn interval_operations_enclose() {
        let a = Interval::around(0.1, 1e-12);
        let s = a.scale(3).add(Interval::point(-0.3));
        assert!(s.contains_zero());
        assert!(s.width() < 1e-11);
        let b = Interval::new(-2.0, 1.0).abs();
        assert_eq!((b.lo, b.hi), (0.0, 2.0));
    }

    #[test]
    fn grid_average_of_cosine_matches_closed_form() {
        let g = GridSpec::for_frequency(1.0, 1000.0, 3.0).unwrap();
        let got = g.reduce_phasors(
            &[3.0],
            &[0.4],
            CompensatedSum::new,
            |acc, _, w, ph| acc.add(w * ph[0].re),
            CompensatedSum::merge,
        );
        let want = ((3.0f64 * 1000.0 + 0.4).sin() - (3.0f64 + 0.4).sin()) / 3.0;
        assert!((got.value() - want).abs() < 1e-9);
    }

    #[test]
    fn adaptive_rules_agree() {
        let f = |x: f64| (5.0 * x).sin() * (-x * x).exp();
        let a = integrate(&f, -1.0, 2.0, 1e-10, QuadRule::AdaptiveSimpson).unwrap();
        let b = integrate(&f, -1.0, 2.0, 1e-10, QuadRule::GaussPanels).unwrap();
        assert!((a.value - b.value).abs() < 1e-9);
    }

    #[test]
    fn breakpoints_respect_nulls_and_width() {
        let b = breakpoints(-1.0, 1.0, &[-0.5, 0.25, 3.0], 0.3);
        assert!(b.contains(&-0.5) && b.contains(&0.25));
        assert!(b.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.3 + 1e-12));
        assert_eq!(*b.last().unwrap(), 1.0);
    }
}
