//! Tables of zeta zero ordinates: computation from sign changes of the Hardy
//! Z function, ingestion from text files, counting checks and `|ζ'(ρ)|`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::zeta::{hardy_z, theta};

/// Default ordinate error for files without an `abs_error` header.
pub const DEFAULT_FILE_ABS_ERROR: f64 = 1e-9;

/// Step of the sign-change scan.
pub const SCAN_STEP: f64 = 0.05;

/// Largest permitted deviation between the zero count and its smooth estimate.
pub const MAX_COUNT_DEVIATION: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroSource {
    Computed,
    File,
}

/// Ascending positive zero ordinates with a uniform error bound and,
/// optionally, the moduli `|ζ'(1/2 + iγ)|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
    abs_error: f64,
    zprime_moduli: Option<Vec<f64>>,
    source: ZeroSource,
    /// Height up to which the table is known to be complete.
    coverage: f64,
}

impl ZeroTable {
    pub fn new(
        ordinates: Vec<f64>,
        abs_error: f64,
        zprime_moduli: Option<Vec<f64>>,
        source: ZeroSource,
        coverage: f64,
    ) -> Result<Self> {
        if !(abs_error > 0.0 && abs_error.is_finite()) {
            return Err(Error::Validation(format!("abs_error must be positive, got {abs_error}")));
        }
        if let Some(&first) = ordinates.first() {
            if !(first > 14.0) {
                return Err(Error::Validation(format!(
                    "first ordinate {first} does not exceed 14"
                )));
            }
        }
        if let Some(i) = ordinates.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Validation(format!(
                "ordinates not strictly ascending at index {}: {} then {}",
                i + 1,
                ordinates[i],
                ordinates[i + 1]
            )));
        }
        if let Some(m) = &zprime_moduli {
            if m.len() != ordinates.len() {
                return Err(Error::Validation(format!(
                    "{} |ζ'| values for {} ordinates",
                    m.len(),
                    ordinates.len()
                )));
            }
            if let Some(i) = m.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::Validation(format!(
                    "|ζ'(ρ)| at index {i} is {} (zeros are assumed simple)",
                    m[i]
                )));
            }
        }
        let last = ordinates.last().copied().unwrap_or(0.0);
        Ok(Self {
            ordinates,
            abs_error,
            zprime_moduli,
            source,
            coverage: coverage.max(last),
        })
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn abs_error(&self) -> f64 {
        self.abs_error
    }

    pub fn zprime_moduli(&self) -> Option<&[f64]> {
        self.zprime_moduli.as_deref()
    }

    pub fn source(&self) -> ZeroSource {
        self.source
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

    /// `N(T) = #{γ ≤ T}`, inclusive at `T`.
    pub fn count_upto(&self, t: f64) -> usize {
        self.ordinates.partition_point(|&g| g <= t)
    }

    /// Table restricted to its first `m` ordinates.
    pub fn prefix(&self, m: usize) -> ZeroTable {
        let m = m.min(self.len());
        let coverage = if m < self.len() {
            // Complete up to (but excluding) the next ordinate.
            self.ordinates[m].next_down()
        } else {
            self.coverage
        };
        ZeroTable {
            ordinates: self.ordinates[..m].to_vec(),
            abs_error: self.abs_error,
            zprime_moduli: self.zprime_moduli.as_ref().map(|v| v[..m].to_vec()),
            source: self.source,
            coverage,
        }
    }

    pub(crate) fn ensure_covers(&self, t: f64) -> Result<()> {
        if t > self.coverage {
            return Err(out_of_range(
                "cutoff",
                format!("T = {t} exceeds table coverage {}", self.coverage),
            ));
        }
        Ok(())
    }

    /// Serializes in the zero-table text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# abs_error={:e}", self.abs_error);
        let _ = writeln!(out, "# coverage={}", self.coverage);
        for (i, g) in self.ordinates.iter().enumerate() {
            match &self.zprime_moduli {
                Some(m) => {
                    let _ = writeln!(out, "{g} {}", m[i]);
                }
                None => {
                    let _ = writeln!(out, "{g}");
                }
            }
        }
        out
    }

    /// Writes the table atomically (temporary file + rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_text().as_bytes())
    }

    /// SHA-256 digest of the text serialization, used in output headers.
    pub fn digest(&self) -> String {
        crate::io::sha256_hex(self.to_text().as_bytes())
    }
}

/// Riemann–von Mangoldt main term `(T/2π) log(T/2π) - T/2π + 7/8`.
pub fn smooth_count(t: f64) -> f64 {
    let x = t / (2.0 * PI);
    x * x.ln() - x + 0.875
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountCheck {
    #[serde(rename = "T")]
    pub t: f64,
    pub observed: usize,
    pub smooth_estimate: f64,
    pub deviation: f64,
}

/// Compares `N(T)` with the smooth estimate.
pub fn count_check(table: &ZeroTable, t: f64) -> Result<CountCheck> {
    if !(t > 0.0) {
        return Err(out_of_range("T", format!("{t} must be positive")));
    }
    table.ensure_covers(t)?;
    let observed = table.count_upto(t);
    let smooth_estimate = smooth_count(t);
    Ok(CountCheck {
        t,
        observed,
        smooth_estimate,
        deviation: observed as f64 - smooth_estimate,
    })
}

fn z_value(t: f64) -> f64 {
    hardy_z(t).value
}

/// Shrinks a sign-change bracket to width `tol`, returning its midpoint.
fn bisect(mut a: f64, mut b: f64, mut za: f64, tol: f64) -> f64 {
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let zm = z_value(m);
        if zm == 0.0 {
            return m;
        }
        if (zm > 0.0) == (za > 0.0) {
            a = m;
            za = zm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Looks for a hidden pair of zeros near a grid point where `|Z|` has a
/// local minimum without a sign change. Returns the brackets found.
fn refine_dip(a: f64, b: f64, sign: f64) -> Vec<(f64, f64)> {
    // Minimize sign·Z on [a, b] by golden-section search.
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (sign * z_value(x1), sign * z_value(x2));
    for _ in 0..60 {
        if f1.min(f2) < 0.0 || hi - lo < 1e-10 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = sign * z_value(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = sign * z_value(x2);
        }
    }
    let (xm, fm) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    if fm < 0.0 {
        vec![(a, xm), (xm, b)]
    } else {
        Vec::new()
    }
}

/// Brackets of sign changes of Z on `[lo, hi]` found by scanning with `step`.
fn scan_brackets(lo: f64, hi: f64, step: f64) -> Vec<(f64, f64)> {
    let n = ((hi - lo) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| (lo + i as f64 * step).min(hi)).collect();
    // Evaluate Z on the grid in fixed-size chunks (deterministic).
    let values: Vec<f64> = grid
        .par_chunks(256)
        .flat_map_iter(|c| c.iter().map(|&t| z_value(t)).collect::<Vec<_>>())
        .collect();

    let mut brackets = Vec::new();
    for i in 0..n {
        let (za, zb) = (values[i], values[i + 1]);
        if za == 0.0 {
            brackets.push((grid[i] - 0.5 * step, grid[i] + 0.5 * step));
            continue;
        }
        if (za > 0.0) != (zb > 0.0) && zb != 0.0 {
            brackets.push((grid[i], grid[i + 1]));
        }
    }
    // Local minima of |Z| without a sign change may hide a close pair.
    let dips: Vec<(f64, f64, f64)> = (1..n)
        .filter(|&i| {
            let (a, m, b) = (values[i - 1], values[i], values[i + 1]);
            a != 0.0
                && (a > 0.0) == (m > 0.0)
                && (m > 0.0) == (b > 0.0)
                && m.abs() < a.abs()
                && m.abs() < b.abs()
        })
        .map(|i| (grid[i - 1], grid[i + 1], values[i].signum()))
        .collect();
    let extra: Vec<(f64, f64)> = dips
        .par_iter()
        .flat_map_iter(|&(a, b, s)| refine_dip(a, b, s))
        .collect();
    if !extra.is_empty() {
        // A refined pair replaces nothing: the scan saw no sign change there.
        brackets.extend(extra);
        brackets.sort_by(|x, y| x.0.total_cmp(&y.0));
    }
    brackets
}

/// Computes all zero ordinates in `(0, t_max]` from sign changes of the
/// Hardy Z function, each bracketed to width `target_error`.
pub fn compute_zeros(t_max: f64, target_error: f64) -> Result<ZeroTable> {
    if !(20.0..=1e4).contains(&t_max) {
        return Err(out_of_range("t_max", format!("{t_max} not in [20, 1e4]")));
    }
    if !(1e-12..=1e-4).contains(&target_error) {
        return Err(out_of_range(
            "target_error",
            format!("{target_error} not in [1e-12, 1e-4]"),
        ));
    }
    // Z has no zeros below 14; start the scan a little lower.
    let brackets = scan_brackets(10.0, t_max, SCAN_STEP);
    let mut ordinates: Vec<f64> = brackets
        .par_iter()
        .map(|&(a, b)| bisect(a, b, z_value(a), target_error))
        .collect();
    ordinates.retain(|&g| g <= t_max);
    ordinates.dedup_by(|b, a| (*b - *a).abs() <= target_error);

    let table = ZeroTable::new(ordinates, target_error, None, ZeroSource::Computed, t_max)?;
    verify_counts(&table)?;
    Ok(table)
}

/// Checks `|N(T) - smooth(T)| ≤ 3` on a unit grid up to the coverage.
pub fn verify_counts(table: &ZeroTable) -> Result<()> {
    let top = table.coverage();
    let mut t = 1.0;
    while t <= top {
        let c = count_check(table, t)?;
        if c.deviation.abs() > MAX_COUNT_DEVIATION {
            return Err(Error::CountMismatch {
                t,
                found: c.observed,
                expected: c.smooth_estimate,
            });
        }
        t += 1.0;
    }
    let c = count_check(table, top)?;
    if c.deviation.abs() > MAX_COUNT_DEVIATION {
        return Err(Error::CountMismatch {
            t: top,
            found: c.observed,
            expected: c.smooth_estimate,
        });
    }
    Ok(())
}

/// Parses the zero-table text format, keeping ordinates `≤ t_max`.
pub fn parse_zero_table(text: &str, t_max: f64, origin: &Path) -> Result<ZeroTable> {
    let mut abs_error = DEFAULT_FILE_ABS_ERROR;
    let mut declared_coverage: Option<f64> = None;
    let mut ordinates = Vec::new();
    let mut moduli: Vec<f64> = Vec::new();
    let mut columns: Option<usize> = None;
    let mut truncated = false;
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("abs_error=") {
                abs_error = v
                    .trim()
                    .parse()
                    .map_err(|e| err(line_no, format!("bad abs_error {v:?}: {e}")))?;
            } else if let Some(v) = comment.strip_prefix("coverage=") {
                declared_coverage = Some(
                    v.trim()
                        .parse()
                        .map_err(|e| err(line_no, format!("bad coverage {v:?}: {e}")))?,
                );
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() > 2 {
            return Err(err(line_no, format!("expected 1 or 2 columns, found {}", fields.len())));
        }
        match columns {
            None => columns = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(err(line_no, format!("expected {c} columns, found {}", fields.len())))
            }
            _ => {}
        }
        let g: f64 = fields[0]
            .parse()
            .map_err(|e| err(line_no, format!("bad ordinate {:?}: {e}", fields[0])))?;
        if !g.is_finite() {
            return Err(err(line_no, format!("non-finite ordinate {:?}", fields[0])));
        }
        if let Some(&prev) = ordinates.last() {
            if !(g > prev) {
                return Err(Error::Validation(format!(
                    "line {line_no}: ordinate {g} does not exceed previous {prev}"
                )));
            }
        }
        if g > t_max {
            truncated = true;
            break;
        }
        ordinates.push(g);
        if let Some(m) = fields.get(1) {
            moduli.push(
                m.parse()
                    .map_err(|e| err(line_no, format!("bad |ζ'| value {m:?}: {e}")))?,
            );
        }
    }
    let last = ordinates.last().copied().unwrap_or(0.0);
    let coverage = if truncated {
        t_max
    } else {
        declared_coverage.map_or(last, |c| c.min(t_max).max(last))
    };
    let moduli = (columns == Some(2)).then_some(moduli);
    ZeroTable::new(ordinates, abs_error, moduli, ZeroSource::File, coverage)
}

/// Reads a zero table file, keeping ordinates `≤ t_max`.
pub fn load_zero_table(path: &Path, t_max: f64) -> Result<ZeroTable> {
    let text = std::fs::read_to_string(path)?;
    parse_zero_table(&text, t_max, path)
}

/// Location of the zero-table cache, from `ZETALAB_CACHE_DIR`.
pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("ZETALAB_CACHE_DIR").map(PathBuf::from)
}

/// `compute_zeros` backed by the on-disk cache when `ZETALAB_CACHE_DIR` is set.
pub fn compute_zeros_cached(t_max: f64, target_error: f64) -> Result<ZeroTable> {
    let Some(dir) = cache_dir() else {
        return compute_zeros(t_max, target_error);
    };
    let path = dir.join(format!("zeros_tmax{t_max}_err{target_error:e}.txt"));
    if path.exists() {
        let mut table = load_zero_table(&path, t_max)?;
        table.source = ZeroSource::Computed;
        return Ok(table);
    }
    let table = compute_zeros(t_max, target_error)?;
    std::fs::create_dir_all(&dir)?;
    table.save(&path)?;
    Ok(table)
}

/// Step-size policy for the finite-difference derivative of Z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepPolicy {
    /// Step scaled to the local oscillation rate of Z.
    #[default]
    Adaptive,
    /// Fixed initial step.
    Fixed(f64),
}

/// Signed `Z'(t)` with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

/// `Z'(t)` by central differences at steps `h, h/2, h/4` followed by two
/// rounds of Richardson extrapolation.
pub fn z_derivative(t: f64, h: f64) -> Derivative {
    let d = |h: f64| (z_value(t + h) - z_value(t - h)) / (2.0 * h);
    let (d1, d2, d3) = (d(h), d(0.5 * h), d(0.25 * h));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    let r = (16.0 * r2 - r1) / 15.0;
    let z_err = hardy_z(t).error;
    Derivative {
        value: r,
        error: (r - r2).abs() + 4.0 * z_err / h,
    }
}

/// Initial difference step at height `t` for the given policy.
pub fn derivative_step(t: f64, policy: StepPolicy) -> f64 {
    match policy {
        StepPolicy::Adaptive => 0.2 / (1.0 + 0.5 * (t / (2.0 * PI)).ln().max(0.0)),
        StepPolicy::Fixed(h) => h,
    }
}

/// Relative accuracy targeted for `|ζ'(ρ)|`.
pub const ZPRIME_REL_TOL: f64 = 1e-6;

/// Smallest `|Z'(γ)|` accepted as a simple zero.
pub const MIN_ZPRIME: f64 = 1e-8;

/// Signed `Z'(γ)`, refining the step until the relative error target is met.
pub fn zprime_at(gamma: f64, policy: StepPolicy) -> Result<Derivative> {
    let mut h = derivative_step(gamma, policy);
    let mut best = z_derivative(gamma, h);
    for _ in 0..4 {
        if best.error <= ZPRIME_REL_TOL * best.value.abs() {
            break;
        }
        h *= 0.5;
        let next = z_derivative(gamma, h);
        if next.error < best.error {
            best = next;
        }
    }
    if best.value.abs() < MIN_ZPRIME {
        return Err(Error::MultipleZero {
            t: gamma,
            derivative: best.value.abs(),
        });
    }
    Ok(best)
}

/// Fills `|ζ'(1/2 + iγ)| = |Z'(γ)|` for every ordinate.
pub fn zeta_prime_moduli(table: &ZeroTable, policy: StepPolicy) -> Result<ZeroTable> {
    if table.abs_error > 1e-8 {
        return Err(Error::Precision(format!(
            "ordinates known to {:e}; |ζ'(ρ)| needs abs_error ≤ 1e-8",
            table.abs_error
        )));
    }
    let moduli: Vec<f64> = table
        .ordinates
        .par_iter()
        .map(|&g| zprime_at(g, policy).map(|d| d.value.abs()))
        .collect::<Result<_>>()?;
    let mut out = table.clone();
    out.zprime_moduli = Some(moduli);
    Ok(out)
}

/// `arg ζ'(ρ)` at `ρ = 1/2 + iγ`. From `ζ(1/2+it) = e^{-iθ(t)} Z(t)` one gets
/// `ζ'(ρ) = -i e^{-iθ(γ)} Z'(γ)`, so only the sign of `Z'(γ)` is needed.
pub fn zeta_prime_arg(gamma: f64) -> Result<f64> {
    let d = zprime_at(gamma, StepPolicy::Adaptive)?;
    let base = -0.5 * PI - theta(gamma);
    let arg = if d.value > 0.0 { base } else { base + PI };
    Ok(wrap_phase(arg))
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x.rem_euclid(two_pi);
    if y > PI {
        y -= two_pi;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, t_max: f64) -> Result<ZeroTable> {
        parse_zero_table(text, t_max, Path::new("test.txt"))
    }

    #[test]
    fn parses_and_filters_by_height() {
        let t = parse("14.134725141734\n21.022039638771\n", 20.0).unwrap();
        assert_eq!(t.ordinates(), &[14.134725141734]);
        assert_eq!(t.abs_error(), DEFAULT_FILE_ABS_ERROR);
        assert_eq!(t.coverage(), 20.0);
    }

    #[test]
    fn empty_file_is_valid() {
        let t = parse("", 100.0).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn descending_file_is_rejected() {
        assert!(matches!(parse("21.0\n14.1\n", 100.0), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_line_reports_its_number() {
        match parse("# abs_error=1e-10\n14.1347\nfoo\n", 100.0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_and_second_column() {
        let t = parse("# abs_error=1e-12\n14.134725 0.7932\n21.02204 1.1368\n", 30.0).unwrap();
        assert_eq!(t.abs_error(), 1e-12);
        assert_eq!(t.zprime_moduli().unwrap(), &[0.7932, 1.1368]);
    }

    #[test]
    fn mixed_column_counts_are_rejected() {
        assert!(parse("14.2 0.7\n21.0\n", 30.0).is_err());
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(ZeroTable::new(vec![13.0], 1e-9, None, ZeroSource::File, 20.0).is_err());
        assert!(ZeroTable::new(vec![14.5], 0.0, None, ZeroSource::File, 20.0).is_err());
        assert!(ZeroTable::new(vec![14.5], 1e-9, Some(vec![0.0]), ZeroSource::File, 20.0).is_err());
        assert!(ZeroTable::new(vec![14.5], 1e-9, Some(vec![1.0, 2.0]), ZeroSource::File, 20.0).is_err());
    }

    #[test]
    fn count_check_is_inclusive_and_range_checked() {
        let t = parse("14.5\n21.0\n", 30.0).unwrap();
        assert_eq!(count_check(&t, 14.5).unwrap().observed, 1);
        assert_eq!(count_check(&t, 14.4).unwrap().observed, 0);
        assert!(count_check(&t, 31.0).is_err());
        assert!(count_check(&t, 0.0).is_err());
    }

    #[test]
    fn compute_rejects_bad_arguments() {
        assert!(compute_zeros(10.0, 1e-8).is_err());
        assert!(compute_zeros(100.0, 1e-2).is_err());
        assert!(compute_zeros(2e4, 1e-8).is_err());
    }

    #[test]
    fn wrap_phase_range() {
        for x in [-10.0, -PI, 0.0, PI, 7.0, 100.0] {
            let y = wrap_phase(x);
            assert!(y > -PI - 1e-15 && y <= PI + 1e-15);
            assert!(((x - y) / (2.0 * PI)).fract().abs() < 1e-9 || ((x - y) / (2.0 * PI)).fract().abs() > 1.0 - 1e-9);
        }
    }
}
