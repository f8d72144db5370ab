//! One handler per subcommand.

use serde_json::json;

use zetalab::constants::{
    heuristic_combination_count, montgomery_limit, ng_constant_b, zeta_prime_minus_one,
};
use zetalab::eli::{
    eli_bounds, min_combination_brute, min_combination_mitm, pigeonhole_small_combination,
    EliInstance,
};
use zetalab::fejer::{
    pair_min_sum, smooth_f, smoothed_tail_second_moment, triangular_sum, SmoothingPlan,
};
use zetalab::random_model::{
    empirical_cos_moments, empirical_mgf_many, mgf_grid, random_moment, sample_model,
    RandomModelConfig,
};
use zetalab::sieve::ArithPrefix;
use zetalab::tail::{
    empirical_tails, eta_as_printed, eta_convergent, predicted_tail, tail_grid, EtaOutcome,
    TailSide, ETA_CUTOFF,
};
use zetalab::zero_data::{
    compute_zeros_cached, count_check, smooth_count, verify_counts, zeta_prime_moduli, StepPolicy,
};
use zetalab::zero_sums::{
    default_jump_window, explicit_formula_compare, j_minus_k, log_grid, partial_stats,
};
use zetalab::{load_zero_table, GridSpec, Result, WeightKind, WeightSequence, ZeroTable};

use crate::output::{Body, Format, Table};
use crate::{
    Command, ConstCmd, EliArgs, EliCmd, EtaKind, FejerCmd, Kind, ModelCmd, PlanArgs, Side,
    SieveCmd, SumsCmd, TailsCmd, XGrid, ZeroArgs, ZerosCmd,
};

pub struct Run {
    pub body: Body,
    pub default_format: Format,
    pub seed: Option<u64>,
    pub zeros_digest: Option<String>,
}

impl Run {
    fn table(t: Table) -> Self {
        Self {
            body: Body::Table(t),
            default_format: Format::Csv,
            seed: None,
            zeros_digest: None,
        }
    }

    fn record(body: Body) -> Self {
        Self {
            body,
            default_format: Format::Json,
            seed: None,
            zeros_digest: None,
        }
    }

    fn with_zeros(mut self, z: &ZeroTable) -> Self {
        self.zeros_digest = Some(z.digest());
        self
    }

    fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Loads `--zeros`, or computes zeros up to `--t-max` (default `need`).
fn zeros(src: &ZeroArgs, need: f64, zprime: bool) -> Result<ZeroTable> {
    let table = match &src.zeros {
        Some(p) => load_zero_table(p, src.t_max.unwrap_or(f64::INFINITY))?,
        None => compute_zeros_cached(src.t_max.unwrap_or(need.max(20.0)), src.err)?,
    };
    if zprime && table.zprime_moduli().is_none() {
        return zeta_prime_moduli(&table, StepPolicy::Adaptive);
    }
    Ok(table)
}

fn weights(src: &ZeroArgs, kind: Kind, need: f64) -> Result<(ZeroTable, WeightSequence)> {
    let table = zeros(src, need, kind == Kind::Mobius)?;
    let w = zetalab::make_weights(kind.into(), &table)?;
    Ok((table, w))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn plan(p: &PlanArgs) -> Result<SmoothingPlan> {
    let plan = SmoothingPlan::new(p.t, p.z, p.tol)?;
    Ok(if p.enforce_window { plan.enforcing_window() } else { plan })
}

pub fn run(cmd: Command) -> Result<Run> {
    match cmd {
        Command::Zeros(c) => zeros_cmd(c),
        Command::Sieve(c) => sieve_cmd(c),
        Command::Sums(c) => sums_cmd(c),
        Command::Fejer(c) => fejer_cmd(c),
        Command::Model(c) => model_cmd(c),
        Command::Tails(c) => tails_cmd(c),
        Command::Eli(c) => eli_cmd(c),
        Command::Const(c) => const_cmd(c),
    }
}

fn zeros_cmd(c: ZerosCmd) -> Result<Run> {
    match c {
        ZerosCmd::Compute { t_max, err, zprime } => {
            let mut t = compute_zeros_cached(t_max, err)?;
            if zprime {
                t = zeta_prime_moduli(&t, StepPolicy::Adaptive)?;
            }
            let mut run = Run::table(Table::new(&[]));
            run.body = Body::Raw(t.to_text());
            Ok(run.with_zeros(&t))
        }
        ZerosCmd::Load { zeros, t_max } => {
            let t = load_zero_table(&zeros, t_max.unwrap_or(f64::INFINITY))?;
            let first: Vec<f64> = t.ordinates().iter().take(5).copied().collect();
            let v = json!({
                "path": zeros.display().to_string(),
                "count": t.len(),
                "coverage": t.coverage(),
                "abs_error": t.abs_error(),
                "has_zprime": t.zprime_moduli().is_some(),
                "first": first,
                "digest": t.digest(),
            });
            Ok(Run::record(Body::Record(v)).with_zeros(&t))
        }
        ZerosCmd::Check { src } => {
            let t = zeros(&src, 100.0, false)?;
            let mut tab = Table::new(&["T", "N", "smooth", "deviation"]);
            let top = t.coverage().floor() as u64;
            for k in 1..=top {
                let c = count_check(&t, k as f64)?;
                tab.push(vec![c.t.into(), c.observed.into(), c.smooth_estimate.into(), c.deviation.into()]);
            }
            let verdict = match verify_counts(&t) {
                Ok(()) => "count check passed".to_string(),
                Err(e) => format!("count check failed: {e}"),
            };
            tab.notes.push(verdict);
            Ok(Run::table(tab).with_zeros(&t))
        }
    }
}

fn sieve_cmd(c: SieveCmd) -> Result<Run> {
    let (grid, mobius) = match c {
        SieveCmd::Psi { grid } => (grid, false),
        SieveCmd::Mertens { grid } => (grid, true),
    };
    let XGrid { x_min, x_max, n } = grid;
    if !(x_min >= 2.0 && x_max >= x_min) {
        return Err(zetalab::Error::Validation(format!("need 2 ≤ x_min ≤ x_max, got {x_min}, {x_max}")));
    }
    let prefix = ArithPrefix::up_to(x_max.floor() as u64)?;
    let mut tab = if mobius {
        Table::new(&["x", "M", "M_over_sqrt_x"])
    } else {
        Table::new(&["x", "psi", "E"])
    };
    for x in log_grid(x_min, x_max, n) {
        if mobius {
            let m = prefix.mertens(x)?;
            tab.push(vec![x.into(), m.into(), (m as f64 / x.sqrt()).into()]);
        } else {
            let p = prefix.psi(x)?;
            tab.push(vec![x.into(), p.into(), ((p - x) / x.sqrt()).into()]);
        }
    }
    Ok(Run::table(tab))
}

fn sums_cmd(c: SumsCmd) -> Result<Run> {
    match c {
        SumsCmd::Eval { src, kind, cutoff, t_min, t_hi, n } => {
            let (z, w) = weights(&src, kind, cutoff)?;
            let mut tab = Table::new(&["t", "F"]);
            for t in linspace(t_min, t_hi, n) {
                tab.push(vec![t.into(), w.eval_f(t, cutoff)?.into()]);
            }
            Ok(Run::table(tab).with_zeros(&z))
        }
        SumsCmd::Assumptions { src, kind, t_grid, theta } => {
            let need = t_grid.last().copied().unwrap_or(100.0);
            let (z, w) = weights(&src, kind, need)?;
            let r = partial_stats(&w, &t_grid, theta)?;
            let mut tab = Table::new(&["T", "H", "L", "Q", "H_ratio", "L_ratio", "Q_ratio"]);
            for i in 0..r.t_grid.len() {
                tab.push(vec![
                    r.t_grid[i].into(),
                    r.h_values[i].into(),
                    r.l_values[i].into(),
                    r.q_values[i].into(),
                    r.ratio_h[i].into(),
                    r.ratio_l[i].into(),
                    r.ratio_q[i].into(),
                ]);
            }
            tab.notes.push(format!("fitted A = {} (log log(T/2pi) fit: {})", r.fitted_a, r.fitted_a_shifted));
            tab.notes.push(format!("theta = {} in [1, 3 - sqrt 3): {}", r.theta, r.theta_ok));
            Ok(Run::table(tab).with_zeros(&z))
        }
        SumsCmd::Jk { src, k, t_grid } => {
            let need = t_grid.last().copied().unwrap_or(100.0);
            let z = zeros(&src, need, true)?;
            let mut tab = Table::new(&["T", "J", "normalized"]);
            for t in t_grid {
                let r = j_minus_k(&z, k, t)?;
                tab.push(vec![r.t.into(), r.value.into(), r.normalized.into()]);
            }
            Ok(Run::table(tab).with_zeros(&z))
        }
        SumsCmd::Compare { src, kind, cutoff, grid, jump_window, zeros_only } => {
            let (z, w) = weights(&src, kind, cutoff)?;
            let wk: WeightKind = kind.into();
            let prefix = ArithPrefix::up_to(grid.x_max.floor() as u64)?;
            let xs = log_grid(grid.x_min, grid.x_max, grid.n);
            let win = jump_window.unwrap_or_else(|| default_jump_window(wk.error_term()));
            let r = explicit_formula_compare(&w, &xs, cutoff, &prefix, win, !zeros_only)?;
            let mut tab = Table::new(&["x", "sieve", "zerosum", "diff", "excluded"]);
            for row in &r.rows {
                tab.push(vec![row.x.into(), row.sieve.into(), row.zero_sum.into(), row.diff.into(), row.excluded.into()]);
            }
            tab.notes.push(format!("rms = {}, max = {}, points used = {}", r.rms_diff, r.max_abs_diff, r.n_used));
            Ok(Run::table(tab).with_zeros(&z))
        }
    }
}

fn fejer_cmd(c: FejerCmd) -> Result<Run> {
    match c {
        FejerCmd::Smooth { src, kind, plan: p, y, t_min, t_hi, n } => {
            let (z, w) = weights(&src, kind, y)?;
            let plan = plan(&p)?;
            let mut tab = Table::new(&["t", "smoothed", "error_bound"]);
            for t in linspace(t_min, t_hi, n) {
                let s = smooth_f(&w, t, &plan, y)?;
                tab.push(vec![t.into(), s.value.into(), s.error_bound().into()]);
            }
            Ok(Run::table(tab).with_zeros(&z))
        }
        FejerCmd::Identity { src, kind, plan: p, y, t_min, t_hi, n } => {
            let (z, w) = weights(&src, kind, y)?;
            let plan = plan(&p)?;
            let mut tab = Table::new(&["t", "smoothed", "triangular", "diff", "quad_error", "tail_bound", "holds"]);
            for t in linspace(t_min, t_hi, n) {
                let s = smooth_f(&w, t, &plan, y)?;
                let tri = triangular_sum(&w, t, plan.t, y)?;
                let d = (s.value - tri).abs();
                tab.push(vec![
                    t.into(),
                    s.value.into(),
                    tri.into(),
                    d.into(),
                    s.quad_error.into(),
                    s.tail_bound.into(),
                    (d <= plan.quad_tol + s.tail_bound).into(),
                ]);
            }
            Ok(Run::table(tab).with_zeros(&z))
        }
        FejerCmd::Pairs { src, kind, x1, x2 } => {
            let (z, w) = weights(&src, kind, x2)?;
            let mut tab = Table::new(&["X1", "X2", "pair_sum"]);
            tab.push(vec![x1.into(), x2.into(), pair_min_sum(&w, x1, x2)?.into()]);
            Ok(Run::table(tab).with_zeros(&z))
        }
        FejerCmd::Tailmoment { src, kind, plan: p, y, y2, x } => {
            let (z, w) = weights(&src, kind, y2)?;
            let plan = plan(&p)?;
            let grid = GridSpec::for_frequency(1.0, x, y2)?;
            let r = smoothed_tail_second_moment(&w, y, y2, &plan, &grid)?;
            let mut tab = Table::new(&["Y", "Y2", "second_moment", "kernel_error"]);
            tab.push(vec![r.y.into(), r.y2.into(), r.value.into(), r.kernel_error.into()]);
            Ok(Run::table(tab).with_zeros(&z))
        }
    }
}

fn multisets(m: usize, max_size: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, max: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(m, max, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, max_size, 0, &mut Vec::new(), &mut out);
    out
}

fn model_cmd(c: ModelCmd) -> Result<Run> {
    match c {
        ModelCmd::Sample { src, kind, cutoff, samples, seed, bins } => {
            let (z, w) = weights(&src, kind, cutoff)?;
            let s = sample_model(&w, RandomModelConfig { t: cutoff, n_samples: samples, seed })?;
            let counts = s.histogram(-s.h, s.h, bins);
            let width = 2.0 * s.h / bins as f64;
            let mut tab = Table::new(&["bin_lo", "bin_hi", "count"]);
            for (i, c) in counts.iter().enumerate() {
                let lo = -s.h + width * i as f64;
                tab.push(vec![lo.into(), (lo + width).into(), (*c).into()]);
            }
            tab.notes.push(format!(
                "mean = {}, sample variance = {}, model variance = {}",
                s.mean(),
                s.sample_variance(),
                s.variance
            ));
            Ok(Run::table(tab).with_zeros(&z).with_seed(seed))
        }
        ModelCmd::Mgf { src, kind, cutoff, x, s } => {
            let (z, w) = weights(&src, kind, cutoff)?;
            let grid = mgf_grid(&w, cutoff, x)?;
            let r = empirical_mgf_many(&w, cutoff, &s, &grid)?;
            let mut tab = Table::new(&["s", "empirical", "exact", "relative_gap", "grid_error"]);
            for c in r {
                tab.push(vec![c.s.into(), c.empirical.into(), c.exact.into(), c.relative_gap.into(), c.grid_error.into()]);
            }
            Ok(Run::table(tab).with_zeros(&z))
        }
        ModelCmd::Moments { src, m, max_size, x } => {
            let mut need = 30.0;
            while smooth_count(need) < m as f64 + 2.0 {
                need *= 1.5;
            }
            let z = zeros(&src, need, false)?;
            if z.len() < m {
                return Err(zetalab::Error::Validation(format!("table has {} zeros, need {m}", z.len())));
            }
            let g = z.ordinates()[..m].to_vec();
            let sets = multisets(m, max_size);
            let top = g.last().copied().unwrap_or(1.0) * max_size as f64;
            let grid = GridSpec::for_frequency(1.0, x, top)?;
            let emp = empirical_cos_moments(&g, &vec![0.0; m], &sets, &grid)?;
            let mut tab = Table::new(&["multiset", "empirical", "exact", "diff", "grid_error"]);
            for (s, e) in sets.iter().zip(emp) {
                let gs: Vec<f64> = s.iter().map(|&i| g[i]).collect();
                let exact = random_moment(&gs, z.abs_error())?;
                let label = s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ");
                tab.push(vec![label.into(), e.value.into(), exact.into(), (e.value - exact).into(), e.error.into()]);
            }
            Ok(Run::table(tab).with_zeros(&z))
        }
    }
}

fn tails_cmd(c: TailsCmd) -> Result<Run> {
    match c {
        TailsCmd::Empirical { src, kind, cutoff, x, levels, side } => {
            let (z, w) = weights(&src, kind, cutoff)?;
            let h = w.h(cutoff);
            let vs: Vec<f64> = (0..levels).map(|i| h * i as f64 / levels.max(1) as f64).collect();
            let grid = tail_grid(&w, cutoff, x)?;
            let side = match side {
                Side::Upper => TailSide::Upper,
                Side::Lower => TailSide::Lower,
            };
            let eta = eta_convergent(1e-10, ETA_CUTOFF)?.value;
            let est = empirical_tails(&w, cutoff, &vs, &grid, side)?;
            let mut tab = Table::new(&["V", "fraction", "stderr", "predicted"]);
            for e in est {
                let p = if e.v >= 1.0 { predicted_tail(e.v, eta)? } else { f64::NAN };
                tab.push(vec![e.v.into(), e.fraction.into(), e.stderr.into(), p.into()]);
            }
            Ok(Run::table(tab).with_zeros(&z))
        }
        TailsCmd::Predicted { v, eta } => {
            let eta = match eta {
                Some(e) => e,
                None => eta_convergent(1e-10, ETA_CUTOFF)?.value,
            };
            let mut tab = Table::new(&["V", "predicted"]);
            for v in v {
                tab.push(vec![v.into(), predicted_tail(v, eta)?.into()]);
            }
            tab.notes.push(format!("eta = {eta}"));
            Ok(Run::table(tab))
        }
        TailsCmd::Eta { variant, tol } => {
            let out = match variant {
                EtaKind::Convergent => EtaOutcome::Convergent(eta_convergent(tol, ETA_CUTOFF)?),
                EtaKind::AsPrinted => EtaOutcome::AsPrinted(eta_as_printed(&[1e2, 1e3, 1e4], tol.max(1e-9))?),
            };
            Ok(Run::record(Body::record(&out)?))
        }
    }
}

fn eli_instance(a: &EliArgs) -> Result<(ZeroTable, EliInstance)> {
    let mut need = 30.0;
    while smooth_count(need) < a.m as f64 + 2.0 {
        need *= 1.5;
    }
    let z = zeros(&a.src, need, false)?;
    let inst = EliInstance::from_table(&z, a.m, a.l.unwrap_or(a.m as i64))?;
    Ok((z, inst))
}

fn eli_cmd(c: EliCmd) -> Result<Run> {
    let (z, r) = match c {
        EliCmd::Bounds { t, epsilon } => return Ok(Run::record(Body::record(&eli_bounds(t, epsilon)?)?)),
        EliCmd::Brute(a) => {
            let (z, inst) = eli_instance(&a)?;
            (z, min_combination_brute(&inst)?)
        }
        EliCmd::Mitm(a) => {
            let (z, inst) = eli_instance(&a)?;
            (z, min_combination_mitm(&inst)?)
        }
        EliCmd::Pigeonhole(a) => {
            let (z, inst) = eli_instance(&a)?;
            (z, pigeonhole_small_combination(&inst)?)
        }
    };
    let mut v = serde_json::to_value(&r)?;
    v["value"] = json!(r.value());
    Ok(Run::record(Body::Record(v)).with_zeros(&z))
}

fn const_cmd(c: ConstCmd) -> Result<Run> {
    match c {
        ConstCmd::Montgomery => Ok(Run::record(Body::Record(json!({
            "name": "montgomery_limit",
            "value": montgomery_limit(),
            "error_bound": 0.0,
        })))),
        ConstCmd::ZetaPrime { tol } => Ok(Run::record(Body::record(&zeta_prime_minus_one(tol)?)?)),
        ConstCmd::NgB { p_max, k_max } => Ok(Run::record(Body::record(&ng_constant_b(p_max, k_max)?)?)),
        ConstCmd::Heuristic { src, t } => {
            let z = zeros(&src, t, false)?;
            let r = heuristic_combination_count(t, &z)?;
            Ok(Run::record(Body::record(&r)?).with_zeros(&z))
        }
    }
}
