//! Weighted cosine sums over zeros: `F(t, T) = Σ_{γ≤T} |r_γ| cos(γt + β_γ)`,
//! `Φ_X(x) = F(log x, X)`, growth diagnostics for the weights, negative
//! moments of `|ζ'(ρ)|`, and truncated explicit formulas against the sieve.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::numeric::CompensatedSum;
use crate::sieve::{ArithPrefix, ErrorTerm};
use crate::zero_data::{wrap_phase, zeta_prime_arg, ZeroTable};
use crate::zeta::zeta_em;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `r_γ = 1/ρ`
    PntExact,
    /// `|r_γ| = 2/γ`, `β_γ = -π/2`, so `F` is `2 Σ sin(γt)/γ`
    PntSine,
    /// `r_γ = 1/(ρ ζ'(ρ))`
    Mobius,
}

impl WeightKind {
    /// Exponent `A` with `H(T) ≍ (log T)^A`.
    pub fn exponent(self) -> f64 {
        match self {
            WeightKind::PntExact | WeightKind::PntSine => 2.0,
            WeightKind::Mobius => 1.25,
        }
    }

    /// Overall sign of the zero sum in the explicit formula.
    pub fn sign(self) -> f64 {
        match self {
            WeightKind::PntExact | WeightKind::PntSine => -1.0,
            WeightKind::Mobius => 1.0,
        }
    }

    /// Factor mapping `F` to the explicit-formula approximation of the
    /// normalized error. The conjugate pairing doubles `Re Σ x^{iγ} r_γ`;
    /// `PntSine` already carries the 2 in its moduli.
    pub fn explicit_scale(self) -> f64 {
        match self {
            WeightKind::PntExact => -2.0,
            WeightKind::PntSine => -1.0,
            WeightKind::Mobius => 2.0,
        }
    }

    pub fn error_term(self) -> ErrorTerm {
        match self {
            WeightKind::PntExact | WeightKind::PntSine => ErrorTerm::Pnt,
            WeightKind::Mobius => ErrorTerm::Mobius,
        }
    }
}

/// Moduli `|r_γ|` and phases `β_γ ∈ (-π, π]` aligned with a zero table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    pub kind: WeightKind,
    ordinates: Vec<f64>,
    moduli: Vec<f64>,
    phases: Vec<f64>,
    pub sign: f64,
    #[serde(rename = "A")]
    pub exponent: f64,
    coverage: f64,
}

/// Builds `r_γ` for every ordinate of `table`.
pub fn make_weights(kind: WeightKind, table: &ZeroTable) -> Result<WeightSequence> {
    let g = table.ordinates();
    let (moduli, phases): (Vec<f64>, Vec<f64>) = match kind {
        WeightKind::PntExact => g
            .iter()
            .map(|&g| ((0.25 + g * g).sqrt().recip(), -(2.0 * g).atan()))
            .unzip(),
        WeightKind::PntSine => g.iter().map(|&g| (2.0 / g, -0.5 * PI)).unzip(),
        WeightKind::Mobius => {
            let zp = table.zprime_moduli().ok_or_else(|| {
                Error::Config("mobius weights need |ζ'(ρ)| values in the zero table".into())
            })?;
            let args: Vec<f64> = g
                .par_iter()
                .map(|&g| zeta_prime_arg(g))
                .collect::<Result<_>>()?;
            g.iter()
                .zip(zp)
                .zip(&args)
                .map(|((&g, &d), &arg)| {
                    let m = 1.0 / ((0.25 + g * g).sqrt() * d);
                    (m, wrap_phase(-(2.0 * g).atan() - arg))
                })
                .unzip()
        }
    };
    Ok(WeightSequence {
        kind,
        ordinates: g.to_vec(),
        moduli,
        phases,
        sign: kind.sign(),
        exponent: kind.exponent(),
        coverage: table.coverage(),
    })
}

impl WeightSequence {
    /// Builds a sequence from explicit parts.
    pub fn from_parts(
        kind: WeightKind,
        ordinates: Vec<f64>,
        moduli: Vec<f64>,
        phases: Vec<f64>,
        coverage: f64,
    ) -> Result<Self> {
        if ordinates.len() != moduli.len() || ordinates.len() != phases.len() {
            return Err(Error::Validation("weight parts have different lengths".into()));
        }
        Ok(Self {
            kind,
            ordinates,
            moduli,
            phases: phases.into_iter().map(wrap_phase).collect(),
            sign: kind.sign(),
            exponent: kind.exponent(),
            coverage,
        })
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    /// Number of zeros with `γ ≤ t`.
    pub fn count_upto(&self, t: f64) -> usize {
        self.ordinates.partition_point(|&g| g <= t)
    }

    pub(crate) fn ensure_covers(&self, t: f64) -> Result<()> {
        if t > self.coverage {
            return Err(out_of_range(
                "cutoff",
                format!("T = {t} exceeds weight coverage {}", self.coverage),
            ));
        }
        Ok(())
    }

    /// Zeros with `γ ≤ t` as `(ordinates, moduli, phases)`.
    pub fn truncated(&self, t: f64) -> (&[f64], &[f64], &[f64]) {
        let n = self.count_upto(t);
        (&self.ordinates[..n], &self.moduli[..n], &self.phases[..n])
    }

    /// Zeros with `lo < γ ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> (&[f64], &[f64], &[f64]) {
        let a = self.count_upto(lo);
        let b = self.count_upto(hi).max(a);
        (&self.ordinates[a..b], &self.moduli[a..b], &self.phases[a..b])
    }

    /// `H(T) = Σ_{γ≤T} |r_γ|`.
    pub fn h(&self, t: f64) -> f64 {
        let (_, m, _) = self.truncated(t);
        m.iter().copied().collect::<CompensatedSum>().value()
    }

    /// `F(t, T)` without range checks.
    pub(crate) fn f_unchecked(&self, t: f64, cutoff: f64) -> f64 {
        let (g, m, b) = self.truncated(cutoff);
        let mut s = CompensatedSum::new();
        for ((g, m), b) in g.iter().zip(m).zip(b) {
            s.add(m * (g * t + b).cos());
        }
        s.value()
    }

    /// `F(t, T) = Σ_{0<γ≤T} |r_γ| cos(γt + β_γ)`.
    pub fn eval_f(&self, t: f64, cutoff: f64) -> Result<f64> {
        self.ensure_covers(cutoff)?;
        Ok(self.f_unchecked(t, cutoff))
    }

    /// `Φ_X(x) = Re Σ_{0<γ≤X} x^{iγ} r_γ = F(log x, X)`.
    pub fn eval_phi(&self, x: f64, cutoff: f64) -> Result<f64> {
        if !(x >= 2.0) {
            return Err(out_of_range("x", format!("{x} < 2")));
        }
        self.eval_f(x.ln(), cutoff)
    }

    /// Explicit-formula approximation of the normalized error at `x`
    /// (`(ψ(x)-x)/√x` or `M(x)/√x`) from zeros up to `cutoff`.
    pub fn explicit_sum(&self, x: f64, cutoff: f64) -> Result<f64> {
        Ok(self.kind.explicit_scale() * self.eval_phi(x, cutoff)?)
    }
}

/// Growth of `H`, `L`, `Q` along a grid of cutoffs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub t_grid: Vec<f64>,
    pub h_values: Vec<f64>,
    pub l_values: Vec<f64>,
    pub q_values: Vec<f64>,
    /// Least-squares slope of `log H` against `log log T` over the upper half
    /// of the grid.
    pub fitted_a: f64,
    /// Same fit against `log log(T/2π)`, the scale on which `N(T)` grows.
    pub fitted_a_shifted: f64,
    /// `H(T)/(log T)^A`
    pub ratio_h: Vec<f64>,
    /// `L(T)/(T (log T)^A)`
    pub ratio_l: Vec<f64>,
    /// `Q(T)/T^θ`
    pub ratio_q: Vec<f64>,
    pub theta: f64,
    /// `1 ≤ θ < 3 - √3`
    pub theta_ok: bool,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Computes `H(T) = Σ|r_γ|`, `L(T) = Σγ|r_γ|` and `Q(T) = Σγ²|r_γ|²` on `t_grid`.
pub fn partial_stats(w: &WeightSequence, t_grid: &[f64], theta: f64) -> Result<AssumptionReport> {
    if t_grid.is_empty() {
        return Err(out_of_range("T grid", "empty"));
    }
    if t_grid.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(out_of_range("T grid", "not ascending"));
    }
    if t_grid[0] <= 1.0 {
        return Err(out_of_range("T grid", format!("{} must exceed 1", t_grid[0])));
    }
    w.ensure_covers(*t_grid.last().unwrap())?;

    let mut h = Vec::with_capacity(t_grid.len());
    let mut l = Vec::with_capacity(t_grid.len());
    let mut q = Vec::with_capacity(t_grid.len());
    let (mut sh, mut sl, mut sq) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    let mut idx = 0;
    for &t in t_grid {
        while idx < w.len() && w.ordinates[idx] <= t {
            let (g, m) = (w.ordinates[idx], w.moduli[idx]);
            sh.add(m);
            sl.add(g * m);
            sq.add(g * g * m * m);
            idx += 1;
        }
        h.push(sh.value());
        l.push(sl.value());
        q.push(sq.value());
    }
    let a = w.exponent;
    let ratio_h = t_grid.iter().zip(&h).map(|(t, h)| h / t.ln().powf(a)).collect();
    let ratio_l = t_grid
        .iter()
        .zip(&l)
        .map(|(t, l)| l / (t * t.ln().powf(a)))
        .collect();
    let ratio_q = t_grid.iter().zip(&q).map(|(t, q)| q / t.powf(theta)).collect();

    let start = t_grid.len() / 2;
    let fit = |scale: f64| {
        let pts: Vec<(f64, f64)> = t_grid[start..]
            .iter()
            .zip(&h[start..])
            .filter(|(t, h)| **h > 0.0 && *t / scale > std::f64::consts::E)
            .map(|(t, h)| ((t / scale).ln().ln(), h.ln()))
            .collect();
        if pts.len() >= 2 {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            ls_slope(&x, &y)
        } else {
            f64::NAN
        }
    };
    let fitted_a = fit(1.0);
    let fitted_a_shifted = fit(2.0 * PI);
    Ok(AssumptionReport {
        t_grid: t_grid.to_vec(),
        h_values: h,
        l_values: l,
        q_values: q,
        fitted_a,
        fitted_a_shifted,
        ratio_h,
        ratio_l,
        ratio_q,
        theta,
        theta_ok: (1.0..3.0 - 3f64.sqrt()).contains(&theta),
    })
}

/// `J_{-k}(T)` and its ratio to `T (log T)^{(k-1)²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JkValue {
    pub k: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub value: f64,
    pub normalized: f64,
}

/// `J_{-k}(T) = Σ_{0<γ≤T} |ζ'(ρ)|^{-2k}`.
pub fn j_minus_k(table: &ZeroTable, k: f64, t: f64) -> Result<JkValue> {
    if !(0.0..=2.0).contains(&k) {
        return Err(out_of_range("k", format!("{k} not in [0, 2]")));
    }
    let zp = table
        .zprime_moduli()
        .ok_or_else(|| Error::Config("J_{-k} needs |ζ'(ρ)| values in the zero table".into()))?;
    table.ensure_covers(t)?;
    let n = table.count_upto(t);
    let value = if k == 0.0 {
        n as f64
    } else {
        zp[..n].iter().map(|d| d.powf(-2.0 * k)).collect::<CompensatedSum>().value()
    };
    let normalized = if t > 1.0 {
        value / (t * t.ln().powf((k - 1.0) * (k - 1.0)))
    } else {
        f64::NAN
    };
    Ok(JkValue {
        k,
        t,
        value,
        normalized,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub x: f64,
    pub sieve: f64,
    pub zero_sum: f64,
    pub diff: f64,
    /// Inside the exclusion window around a jump of the summatory function.
    pub excluded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub kind: WeightKind,
    #[serde(rename = "T")]
    pub t: f64,
    pub jump_window: f64,
    pub known_terms: bool,
    pub rows: Vec<CompareRow>,
    pub max_abs_diff: f64,
    pub rms_diff: f64,
    pub n_used: usize,
}

/// Default half-width of the exclusion window around jumps: prime powers for
/// `ψ`, squarefree integers for `M` (which jump at most integers).
pub fn default_jump_window(term: ErrorTerm) -> f64 {
    match term {
        ErrorTerm::Pnt => 0.5,
        ErrorTerm::Mobius => 0.1,
    }
}

/// Terms of the explicit formula that do not depend on the nontrivial zeros,
/// divided by `√x`:
/// `-log 2π - ½ log(1 - x⁻²)` for `ψ`, and
/// `-2 + Σ_n (-1)^{n-1} (2π/x)^{2n} / ((2n)! n ζ(2n+1))` for `M`.
pub fn known_explicit_terms(term: ErrorTerm, x: f64) -> f64 {
    let v = match term {
        ErrorTerm::Pnt => -(2.0 * PI).ln() - 0.5 * (-1.0 / (x * x)).ln_1p(),
        ErrorTerm::Mobius => {
            let q = (2.0 * PI / x).powi(2);
            let mut s = -2.0;
            let mut pw = 1.0;
            let mut fact = 1.0;
            for n in 1..=12 {
                pw *= q;
                fact *= ((2 * n - 1) * (2 * n)) as f64;
                let z = zeta_em(Complex64::new((2 * n + 1) as f64, 0.0)).value.re;
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                s += sign * pw / (fact * n as f64 * z);
            }
            s
        }
    };
    v / x.sqrt()
}

/// Compares sieve values of the normalized error with the truncated zero sum
/// on `x_grid`. Statistics skip points within `jump_window` of a jump. With
/// `known_terms`, [`known_explicit_terms`] is added to the zero sum.
pub fn explicit_formula_compare(
    w: &WeightSequence,
    x_grid: &[f64],
    t: f64,
    prefix: &ArithPrefix,
    jump_window: f64,
    known_terms: bool,
) -> Result<CompareReport> {
    w.ensure_covers(t)?;
    let term = w.kind.error_term();
    let rows: Vec<CompareRow> = x_grid
        .par_iter()
        .map(|&x| -> Result<CompareRow> {
            if x < 2.0 {
                return Err(out_of_range("x", format!("{x} < 2")));
            }
            let sieve = match term {
                ErrorTerm::Pnt => (prefix.psi(x)? - x) / x.sqrt(),
                ErrorTerm::Mobius => prefix.mertens(x)? as f64 / x.sqrt(),
            };
            let known = if known_terms { known_explicit_terms(term, x) } else { 0.0 };
            let zero_sum = w.kind.explicit_scale() * w.f_unchecked(x.ln(), t) + known;
            Ok(CompareRow {
                x,
                sieve,
                zero_sum,
                diff: sieve - zero_sum,
                excluded: prefix.distance_to_jump(term, x) < jump_window,
            })
        })
        .collect::<Result<_>>()?;
    let used: Vec<f64> = rows.iter().filter(|r| !r.excluded).map(|r| r.diff).collect();
    let max_abs_diff = used.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let rms_diff = if used.is_empty() {
        f64::NAN
    } else {
        (used.iter().map(|d| d * d).sum::<f64>() / used.len() as f64).sqrt()
    };
    Ok(CompareReport {
        kind: w.kind,
        t,
        jump_window,
        known_terms,
        n_used: used.len(),
        rows,
        max_abs_diff,
        rms_diff,
    })
}

/// `n` points log-spaced on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zero_data::ZeroSource;

    const G: [f64; 3] = [14.134_725_141_734_693, 21.022_039_638_771_555, 25.010_857_580_145_688];

    fn table() -> ZeroTable {
        ZeroTable::new(G.to_vec(), 1e-12, None, ZeroSource::File, 30.0).unwrap()
    }

    #[test]
    fn weights_follow_definitions() {
        let t = table();
        let s = make_weights(WeightKind::PntSine, &t).unwrap();
        assert!((s.moduli()[0] - 0.141_496).abs() < 1e-6);
        assert_eq!(s.phases()[0], -0.5 * PI);
        let e = make_weights(WeightKind::PntExact, &t).unwrap();
        assert!((e.moduli()[0] - 0.070_703_527_731_812).abs() < 1e-12);
        assert_eq!(e.sign, -1.0);
        assert!(matches!(make_weights(WeightKind::Mobius, &t), Err(Error::Config(_))));
    }

    #[test]
    fn f_at_zero_and_bounds() {
        let w = make_weights(WeightKind::PntSine, &table()).unwrap();
        assert!(w.eval_f(0.0, 20.0).unwrap().abs() < 1e-17);
        for t in [0.3, 1.0, 7.7, 123.4] {
            assert!(w.eval_f(t, 30.0).unwrap().abs() <= w.h(30.0));
        }
        assert!(w.eval_f(1.0, 31.0).is_err());
    }

    #[test]
    fn phi_below_first_ordinate_is_empty() {
        let w = make_weights(WeightKind::PntExact, &table()).unwrap();
        assert_eq!(w.eval_phi(10.0, 14.0).unwrap(), 0.0);
        assert!(w.eval_phi(1.5, 30.0).is_err());
    }

    #[test]
    fn partial_stats_rejects_bad_grids() {
        let w = make_weights(WeightKind::PntSine, &table()).unwrap();
        assert!(partial_stats(&w, &[20.0, 15.0], 1.2).is_err());
        assert!(partial_stats(&w, &[20.0, 40.0], 1.2).is_err());
        let r = partial_stats(&w, &[15.0, 22.0, 30.0], 1.2).unwrap();
        assert!(r.theta_ok);
        assert!(!partial_stats(&w, &[15.0, 30.0], 1.3).unwrap().theta_ok);
    }

    #[test]
    fn jk_needs_moduli() {
        assert!(matches!(j_minus_k(&table(), 0.5, 30.0), Err(Error::Config(_))));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(100.0, 1e4, 200);
        assert_eq!(g.len(), 200);
        assert!((g[0] - 100.0).abs() < 1e-9 && (g[199] - 1e4).abs() < 1e-6);
    }
}
