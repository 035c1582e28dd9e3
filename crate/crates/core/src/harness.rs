//! Experiment drivers and metrics: trapezoidal global error, rates of
//! convergence, the estimate-to-error ratio, scheme comparison, and CSV
//! emission.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::adaptive::{
    integrate_adaptive, integrate_fixed, AdaptiveConfig, IntegrationTrace, Method, TraceRecord, ERR_FLOOR,
};
use crate::bpl::{BplFlow, DEFAULT_GAUSS_POINTS};
use crate::flows::RungeKutta;
use crate::problems::ProblemSpec;
use crate::{norm, Error, Result};

/// Builds a method from a scheme identifier.
///
/// Accepted: the tableau names (`rk1`, `rk2`, `rk2:<alpha>`, `rk4`, `grk2`,
/// `lobattoIIIA3`, `bs3`, `dop5`) and `bpl<p>` (e.g. `bpl5`), optionally
/// prefixed by `composed-`. Uncomposed `bs3`/`dop5` run as embedded pairs.
pub fn build_method(scheme: &str, composed: bool) -> Result<Method> {
    let (name, composed) = match scheme.strip_prefix("composed-") {
        Some(rest) => (rest, true),
        None => (scheme, composed),
    };
    if let Some(order) = name.strip_prefix("bpl") {
        let p: usize = order
            .parse()
            .map_err(|_| Error::UnknownScheme(scheme.to_string()))?;
        let flow = BplFlow::new(p, DEFAULT_GAUSS_POINTS)?;
        return if composed { Method::composed(flow) } else { Ok(Method::base(flow)) };
    }
    let (tab, alpha) = match name.split_once(':') {
        Some((tab, a)) => {
            let a: f64 = a
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad alpha in '{scheme}'")))?;
            (tab, Some(a))
        }
        None => (name, None),
    };
    let rk = RungeKutta::by_name(tab, alpha)?;
    if composed {
        Method::composed(rk)
    } else if rk.tableau().has_embedded() {
        Method::embedded(rk)
    } else {
        Ok(Method::base(rk))
    }
}

/// Quadrature weights of the trapezoid rule on the step sequence `taus`,
/// dropping the initial node: `(h_n + h_{n+1})/2` inside, `h_N/2` at the end.
/// With a uniform `τ` these are `τ, …, τ, τ/2`.
pub fn trapezoid_weights(taus: &[f64]) -> Vec<f64> {
    let n = taus.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                0.5 * (taus[i] + taus[i + 1])
            } else {
                0.5 * taus[i]
            }
        })
        .collect()
}

/// `Σ w_n e_n` with [`trapezoid_weights`].
pub fn trapezoid_sum(values: &[f64], taus: &[f64]) -> f64 {
    trapezoid_weights(taus).iter().zip(values).map(|(w, v)| w * v).sum()
}

/// Trapezoidal global error of an annotated trace.
pub fn global_error(trace: &IntegrationTrace) -> Result<f64> {
    let errs = exact_errors(trace)?;
    Ok(trapezoid_sum(&errs, &trace.taus()))
}

fn exact_errors(trace: &IntegrationTrace) -> Result<Vec<f64>> {
    trace
        .records
        .iter()
        .map(|r| {
            r.exact_err
                .ok_or_else(|| Error::BadTrace(format!("no exact error at t = {}", r.t)))
        })
        .collect()
}

/// `log10(e_{j+1}/e_j) / log10(τ_{j+1}/τ_j)`; NaN where an error is not
/// positive.
pub fn roc_sequence(errors: &[f64], taus: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != taus.len() {
        return Err(Error::InvalidParameter(format!(
            "{} errors for {} step sizes",
            errors.len(),
            taus.len()
        )));
    }
    Ok(errors
        .windows(2)
        .zip(taus.windows(2))
        .map(|(e, t)| {
            if e[0] > 0.0 && e[1] > 0.0 {
                (e[1] / e[0]).log10() / (t[1] / t[0]).log10()
            } else {
                f64::NAN
            }
        })
        .collect())
}

/// Trapezoid integral of `exact_n / estimate_n` over the run, divided by
/// the total time when `normalize` is set (so identical sequences give 1).
/// Estimates are floored at [`ERR_FLOOR`].
pub fn global_ratio(exact: &[f64], estimates: &[f64], taus: &[f64], normalize: bool) -> f64 {
    let ratios: Vec<f64> = exact
        .iter()
        .zip(estimates)
        .map(|(e, s)| (e / s.max(ERR_FLOOR)).abs())
        .collect();
    let total = trapezoid_sum(&ratios, taus);
    if normalize {
        total / trapezoid_weights(taus).iter().sum::<f64>()
    } else {
        total
    }
}

fn floored_estimates(trace: &IntegrationTrace) -> Vec<f64> {
    trace
        .records
        .iter()
        .map(|r| r.err_est.max(ERR_FLOOR * (1.0 + norm(&r.state))))
        .collect()
}

/// [`global_ratio`] of an annotated trace: accumulated errors against the
/// trace's own estimates.
pub fn trace_global_ratio(trace: &IntegrationTrace, normalize: bool) -> Result<f64> {
    let errs = exact_errors(trace)?;
    Ok(global_ratio(&errs, &floored_estimates(trace), &trace.taus(), normalize))
}

/// [`global_ratio`] with per-step local errors (see [`local_errors`]) in
/// place of accumulated ones.
pub fn trace_local_ratio(trace: &IntegrationTrace, spec: &ProblemSpec, normalize: bool) -> Result<f64> {
    let errs = local_errors(trace, spec)?;
    Ok(global_ratio(&errs, &floored_estimates(trace), &trace.taus(), normalize))
}

/// Per-step local errors: each step is redone from the trace's own previous
/// state with the problem's reference method.
pub fn local_errors(trace: &IntegrationTrace, spec: &ProblemSpec) -> Result<Vec<f64>> {
    (0..trace.records.len())
        .into_par_iter()
        .map(|n| {
            let (t, y) = if n == 0 {
                (trace.t0, trace.y0.as_slice())
            } else {
                let prev = &trace.records[n - 1];
                (prev.t, prev.state.as_slice())
            };
            let r = &trace.records[n];
            let reference = spec.local_reference(t, y, r.tau)?;
            let diff: Vec<f64> = r.state.iter().zip(&reference).map(|(a, b)| a - b).collect();
            Ok(norm(&diff))
        })
        .collect()
}

/// `|log10(estimate / error)|` over steps whose error is at least `floor`.
pub fn log_ratios(estimates: &[f64], errors: &[f64], floor: f64) -> Vec<f64> {
    estimates
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e >= floor)
        .map(|(s, e)| (s / e).log10().abs())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scheme: String,
    pub problem: String,
    pub taus: Vec<f64>,
    pub global_errors: Vec<f64>,
    pub roc_values: Vec<f64>,
    pub rhs_eval_counts: Vec<usize>,
    pub wall_times: Vec<f64>,
}

fn run_fixed(method: &Method, spec: &ProblemSpec, tau: f64) -> Result<IntegrationTrace> {
    let mut trace = integrate_fixed(method, spec.system(), spec.t0, &spec.y0, tau, spec.t_end).into_result()?;
    spec.annotate(&mut trace)?;
    Ok(trace)
}

/// Fixed-step runs over `taus` (strictly decreasing), concurrently.
pub fn run_convergence_study(method: &Method, spec: &ProblemSpec, taus: &[f64]) -> Result<ConvergenceReport> {
    if taus.is_empty() || taus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("step sizes must be strictly decreasing".into()));
    }
    let runs: Vec<(f64, usize, f64)> = taus
        .par_iter()
        .map(|&tau| {
            let trace = run_fixed(method, spec, tau)?;
            Ok((global_error(&trace)?, trace.total_rhs_evals, trace.wall_time))
        })
        .collect::<Result<_>>()?;
    let global_errors: Vec<f64> = runs.iter().map(|r| r.0).collect();
    Ok(ConvergenceReport {
        scheme: method.name(),
        problem: spec.name.clone(),
        taus: taus.to_vec(),
        roc_values: roc_sequence(&global_errors, taus)?,
        global_errors,
        rhs_eval_counts: runs.iter().map(|r| r.1).collect(),
        wall_times: runs.iter().map(|r| r.2).collect(),
    })
}

/// Grid of a comparison: fixed step sizes or adaptive tolerances.
#[derive(Debug, Clone, PartialEq)]
pub enum ComparisonMode {
    Fixed(Vec<f64>),
    /// `(tol, tau0)` pairs.
    Adaptive(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scheme: String,
    /// Step size for fixed runs, tolerance for adaptive ones.
    pub setting: f64,
    pub steps: usize,
    pub global_error: f64,
    /// Unnormalized ratio of local errors to estimates; NaN when the scheme
    /// has no estimate.
    pub ratio: f64,
    pub rhs_evals: usize,
    pub wall_time: f64,
}

/// Runs every scheme on every grid point of `mode`.
pub fn run_comparison(schemes: &[&str], spec: &ProblemSpec, mode: &ComparisonMode) -> Result<Vec<ComparisonRow>> {
    let methods: Vec<Method> = schemes.iter().map(|s| build_method(s, false)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = match mode {
        ComparisonMode::Fixed(v) => (0..methods.len()).flat_map(|m| (0..v.len()).map(move |k| (m, k))).collect(),
        ComparisonMode::Adaptive(v) => (0..methods.len()).flat_map(|m| (0..v.len()).map(move |k| (m, k))).collect(),
    };
    jobs.par_iter()
        .map(|&(m, k)| {
            let method = &methods[m];
            let (setting, trace) = match mode {
                ComparisonMode::Fixed(taus) => (taus[k], run_fixed(method, spec, taus[k])?),
                ComparisonMode::Adaptive(cfgs) => {
                    let (tol, tau0) = cfgs[k];
                    let cfg = AdaptiveConfig::new(tol, tau0, spec.t0, spec.t_end);
                    let mut trace = integrate_adaptive(method, spec.system(), spec.t0, &spec.y0, &cfg).into_result()?;
                    spec.annotate(&mut trace)?;
                    (tol, trace)
                }
            };
            let ratio = if method.controller_order().is_some() {
                trace_local_ratio(&trace, spec, false)?
            } else {
                f64::NAN
            };
            Ok(ComparisonRow {
                scheme: method.name(),
                setting,
                steps: trace.accepted,
                global_error: global_error(&trace)?,
                ratio,
                rhs_evals: trace.total_rhs_evals,
                wall_time: trace.wall_time,
            })
        })
        .collect()
}

/// Shortest decimal that parses back to the same `f64`; exponent notation
/// outside `[1e−5, 1e16)`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `t,tau,y_0,…,y_{d−1},err_est,exact_err`, one row per record.
pub fn write_trace_csv<W: Write>(out: W, trace: &IntegrationTrace) -> Result<()> {
    let d = trace.records.first().map_or(trace.y0.len(), |r| r.state.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "tau".to_string()];
    header.extend((0..d).map(|i| format!("y_{i}")));
    header.extend(["err_est".to_string(), "exact_err".to_string()]);
    w.write_record(&header)?;
    for r in &trace.records {
        let mut row = vec![format_f64(r.t), format_f64(r.tau)];
        row.extend(r.state.iter().map(|&v| format_f64(v)));
        row.push(format_f64(r.err_est));
        row.push(r.exact_err.map(format_f64).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses [`write_trace_csv`] output. The initial state is not part of the
/// format, so the returned trace starts at `t_1 − τ_1` with an empty `y0`.
pub fn read_trace_csv<R: Read>(input: R) -> Result<IntegrationTrace> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    let cols = header.len();
    if cols < 4 || &header[0] != "t" || &header[1] != "tau" || &header[cols - 2] != "err_est" || &header[cols - 1] != "exact_err" {
        return Err(Error::BadTrace("unexpected header".into()));
    }
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::BadTrace(format!("'{s}' is not a number")))
    };
    let mut records = Vec::new();
    for row in rd.records() {
        let row = row?;
        if row.len() != cols {
            return Err(Error::BadTrace("ragged row".into()));
        }
        let exact = &row[cols - 1];
        records.push(TraceRecord {
            t: num(&row[0])?,
            tau: num(&row[1])?,
            state: (2..cols - 2).map(|i| num(&row[i])).collect::<Result<_>>()?,
            err_est: num(&row[cols - 2])?,
            rhs_evals: 0,
            attempts: 1,
            exact_err: if exact.is_empty() { None } else { Some(num(exact)?) },
        });
    }
    let t0 = records.first().map_or(0.0, |r| r.t - r.tau);
    Ok(IntegrationTrace {
        t0,
        y0: Vec::new(),
        accepted: records.len(),
        records,
        total_rhs_evals: 0,
        wall_time: 0.0,
        failure: None,
    })
}

pub fn write_convergence_csv<W: Write>(out: W, report: &ConvergenceReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau", "global_error", "roc", "rhs_evals", "wall_time"])?;
    for (i, &tau) in report.taus.iter().enumerate() {
        let roc = if i == 0 { String::new() } else { format_f64(report.roc_values[i - 1]) };
        w.write_record([
            format_f64(tau),
            format_f64(report.global_errors[i]),
            roc,
            report.rhs_eval_counts[i].to_string(),
            format_f64(report.wall_times[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison_csv<W: Write>(out: W, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "setting", "steps", "global_error", "ratio", "rhs_evals", "wall_time"])?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            format_f64(r.setting),
            r.steps.to_string(),
            format_f64(r.global_error),
            format_f64(r.ratio),
            r.rhs_evals.to_string(),
            format_f64(r.wall_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}
