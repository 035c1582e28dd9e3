//! Time-marching drivers: fixed steps, imaginary-part adaptive steps, and
//! residual-controlled steps for the Borel–Padé–Laplace flow.

use std::cell::Cell;
use std::time::Instant;

use crate::bpl::BplFlow;
use crate::composition::{ComposedFlow, OneStepFlow};
use crate::flows::RungeKutta;
use crate::{complexify, norm, Error, OdeSystem, Result, C64};

/// Estimates are floored at `ERR_FLOOR · (1 + ‖y‖)` before entering the step
/// update, so an exact step cannot produce an infinite step ratio.
pub const ERR_FLOOR: f64 = 1e-16;

/// Consecutive steps at `tau_min` before the run is declared stalled.
pub const STALL_STEPS: usize = 100;

/// `C·τ·(tol/err)^{1/(p+1)}`, unclamped.
pub fn update_step(tau: f64, tol: f64, err: f64, p: usize, safety: f64) -> f64 {
    safety * tau * (tol / err).powf(1.0 / (p as f64 + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub tol: f64,
    pub safety: f64,
    pub tau0: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub growth_cap: f64,
    pub t_end: f64,
}

impl AdaptiveConfig {
    /// Defaults: safety 0.9, growth cap 5, `tau_min = 1e−12`,
    /// `tau_max = t_end − t0`.
    pub fn new(tol: f64, tau0: f64, t0: f64, t_end: f64) -> Self {
        Self {
            tol,
            safety: 0.9,
            tau0,
            tau_min: 1e-12,
            tau_max: t_end - t0,
            growth_cap: 5.0,
            t_end,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad("safety factor must lie in (0, 1]");
        }
        if !(self.growth_cap > 1.0) {
            return bad("growth cap must exceed 1");
        }
        if !(self.tau_min > 0.0 && self.tau_min <= self.tau0 && self.tau0 <= self.tau_max) {
            return bad("need 0 < tau_min <= tau0 <= tau_max");
        }
        if !self.t_end.is_finite() {
            return bad("t_end must be finite");
        }
        Ok(())
    }

    /// [`update_step`] limited to `[τ/growth_cap, τ·growth_cap]` and then to
    /// `[tau_min, tau_max]`.
    pub fn next_step(&self, tau: f64, err: f64, p: usize) -> f64 {
        let raw = update_step(tau, self.tol, err, p, self.safety);
        let capped = if raw.is_nan() {
            tau / self.growth_cap
        } else {
            raw.clamp(tau / self.growth_cap, tau * self.growth_cap)
        };
        capped.clamp(self.tau_min, self.tau_max)
    }
}

/// State after one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub tau: f64,
    pub state: Vec<f64>,
    pub err_est: f64,
    pub rhs_evals: usize,
    /// Flow or residual evaluations spent on this step (1 unless the step
    /// size was searched).
    pub attempts: usize,
    pub exact_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationTrace {
    pub t0: f64,
    pub y0: Vec<f64>,
    pub records: Vec<TraceRecord>,
    pub accepted: usize,
    pub total_rhs_evals: usize,
    /// Seconds.
    pub wall_time: f64,
    /// Set when the run stopped early; records hold everything up to it.
    pub failure: Option<Error>,
}

impl IntegrationTrace {
    fn start(t0: f64, y0: &[f64]) -> Self {
        Self {
            t0,
            y0: y0.to_vec(),
            records: Vec::new(),
            accepted: 0,
            total_rhs_evals: 0,
            wall_time: 0.0,
            failure: None,
        }
    }

    fn push(&mut self, rec: TraceRecord) {
        self.accepted += 1;
        self.total_rhs_evals += rec.rhs_evals;
        self.records.push(rec);
    }

    pub fn final_time(&self) -> f64 {
        self.records.last().map_or(self.t0, |r| r.t)
    }

    pub fn final_state(&self) -> &[f64] {
        self.records.last().map_or(&self.y0, |r| &r.state)
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn taus(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.tau).collect()
    }

    /// Fills `exact_err = ‖y_n − y(t_n)‖` wherever `exact` has a value.
    pub fn annotate_exact(&mut self, mut exact: impl FnMut(f64) -> Option<Vec<f64>>) {
        for r in &mut self.records {
            r.exact_err = exact(r.t).map(|e| {
                let diff: Vec<f64> = r.state.iter().zip(&e).map(|(a, b)| a - b).collect();
                norm(&diff)
            });
        }
    }

    /// The trace itself, or its failure.
    pub fn into_result(self) -> Result<Self> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

/// What a single step produced, in real arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodStep {
    pub state: Vec<f64>,
    pub err_est: f64,
    pub rhs_evals: usize,
}

/// A steppable scheme: a plain base flow, its complex composition, or an
/// embedded Runge–Kutta pair.
pub enum Method {
    Base(Box<dyn OneStepFlow>),
    Composed(ComposedFlow<Box<dyn OneStepFlow>>),
    Embedded(RungeKutta),
}

impl std::fmt::Debug for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("Method").field(&self.name()).finish()
    }
}

impl Method {
    pub fn base(flow: impl OneStepFlow + 'static) -> Self {
        Self::Base(Box::new(flow))
    }

    pub fn composed(flow: impl OneStepFlow + 'static) -> Result<Self> {
        ComposedFlow::new(Box::new(flow) as Box<dyn OneStepFlow>).map(Self::Composed)
    }

    /// Fails unless the tableau carries embedded weights.
    pub fn embedded(rk: RungeKutta) -> Result<Self> {
        if !rk.tableau().has_embedded() {
            return Err(Error::InvalidParameter(format!(
                "{} has no embedded weights",
                rk.tableau().name
            )));
        }
        Ok(Self::Embedded(rk))
    }

    pub fn name(&self) -> String {
        match self {
            Self::Base(f) => f.name(),
            Self::Composed(c) => c.name(),
            Self::Embedded(rk) => rk.tableau().name.clone(),
        }
    }

    /// Order of the propagated approximation.
    pub fn order(&self) -> usize {
        match self {
            Self::Base(f) => f.order(),
            Self::Composed(c) => c.order() + 1,
            Self::Embedded(rk) => rk.tableau().order,
        }
    }

    /// The `p` in the step-update exponent `1/(p+1)`, if the method
    /// produces an estimate.
    pub fn controller_order(&self) -> Option<usize> {
        match self {
            Self::Base(_) => None,
            Self::Composed(c) => Some(c.order()),
            Self::Embedded(rk) => rk.tableau().order_star,
        }
    }

    pub fn step(&self, prob: &dyn OdeSystem, t: f64, y: &[f64], tau: f64) -> Result<MethodStep> {
        match self {
            Self::Base(f) => {
                let out = f.step(prob, C64::new(t, 0.0), &complexify(y), C64::new(tau, 0.0))?;
                Ok(MethodStep {
                    state: out.state.iter().map(|z| z.re).collect(),
                    err_est: 0.0,
                    rhs_evals: out.rhs_evaluations,
                })
            }
            Self::Composed(c) => {
                let out = c.step(prob, t, y, tau)?;
                Ok(MethodStep {
                    state: out.approx,
                    err_est: out.err_est,
                    rhs_evals: out.rhs_evaluations,
                })
            }
            Self::Embedded(rk) => {
                let out = rk.embedded_step(prob, t, y, tau)?;
                Ok(MethodStep {
                    state: out.high,
                    err_est: out.est,
                    rhs_evals: out.rhs_evaluations,
                })
            }
        }
    }
}

fn floored(err: f64, y: &[f64]) -> f64 {
    err.max(ERR_FLOOR * (1.0 + norm(y)))
}

/// Uniform steps of size `tau` from `t0` to `t_end`. When `tau` does not
/// divide the interval (within 1e−9 relative), the last step is shortened.
pub fn integrate_fixed(
    method: &Method,
    prob: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    tau: f64,
    t_end: f64,
) -> IntegrationTrace {
    let clock = Instant::now();
    let mut trace = IntegrationTrace::start(t0, y0);
    let span = t_end - t0;
    if !(tau > 0.0) || !(span >= 0.0) {
        trace.failure = Some(Error::InvalidParameter(format!(
            "need tau > 0 and t_end >= t0, got tau = {tau} on [{t0}, {t_end}]"
        )));
        return trace;
    }
    let ratio = span / tau;
    let whole = ratio.round();
    let n_steps = if (ratio - whole).abs() <= 1e-9 * ratio.max(1.0) {
        whole as usize
    } else {
        ratio.ceil() as usize
    };
    let mut y = y0.to_vec();
    let mut t = t0;
    for n in 1..=n_steps {
        let t_next = if n == n_steps { t_end } else { t0 + n as f64 * tau };
        let h = t_next - t;
        match method.step(prob, t, &y, h) {
            Ok(out) => {
                y = out.state;
                trace.push(TraceRecord {
                    t: t_next,
                    tau: h,
                    state: y.clone(),
                    err_est: out.err_est,
                    rhs_evals: out.rhs_evals,
                    attempts: 1,
                    exact_err: None,
                });
                t = t_next;
            }
            Err(e) => {
                trace.failure = Some(e);
                break;
            }
        }
    }
    trace.wall_time = clock.elapsed().as_secs_f64();
    trace
}

/// Accept-always adaptive stepping driven by the method's own estimate.
///
/// Every step is kept; the next size follows [`AdaptiveConfig::next_step`]
/// from the floored estimate, and the final step is shortened to land on
/// `t_end`.
pub fn integrate_adaptive(
    method: &Method,
    prob: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    cfg: &AdaptiveConfig,
) -> IntegrationTrace {
    let clock = Instant::now();
    let mut trace = IntegrationTrace::start(t0, y0);
    if let Err(e) = cfg.validate() {
        trace.failure = Some(e);
        return trace;
    }
    let Some(p) = method.controller_order() else {
        trace.failure = Some(Error::InvalidParameter(format!(
            "{} has no error estimate to adapt on",
            method.name()
        )));
        return trace;
    };
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut tau = cfg.tau0;
    let mut at_floor = 0;
    while cfg.t_end - t > cfg.tau_min {
        let remaining = cfg.t_end - t;
        let last = tau >= remaining - cfg.tau_min;
        let h = if last { remaining } else { tau };
        let out = match method.step(prob, t, &y, h) {
            Ok(out) => out,
            Err(e) => {
                trace.failure = Some(e);
                break;
            }
        };
        let err = floored(out.err_est, &out.state);
        y = out.state;
        t = if last { cfg.t_end } else { t + h };
        trace.push(TraceRecord {
            t,
            tau: h,
            state: y.clone(),
            err_est: err,
            rhs_evals: out.rhs_evals,
            attempts: 1,
            exact_err: None,
        });
        tau = cfg.next_step(h, err, p);
        if tau <= cfg.tau_min {
            at_floor += 1;
            if at_floor >= STALL_STEPS {
                trace.failure = Some(Error::StiffnessStall { t, steps: at_floor });
                break;
            }
        } else {
            at_floor = 0;
        }
    }
    trace.wall_time = clock.elapsed().as_secs_f64();
    trace
}

/// Settings for residual-controlled BPL stepping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualConfig {
    pub tol: f64,
    pub tau_start: f64,
    /// Multiplicative search factor `C > 1`.
    pub growth: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub t_end: f64,
    /// Upper bound on residual evaluations per step.
    pub max_trials: usize,
}

impl ResidualConfig {
    pub fn new(tol: f64, tau_start: f64, t0: f64, t_end: f64) -> Self {
        Self {
            tol,
            tau_start,
            growth: 1.1,
            tau_min: 1e-12,
            tau_max: t_end - t0,
            t_end,
            max_trials: 400,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if !(self.growth > 1.0) {
            return Err(Error::InvalidParameter("growth factor must exceed 1".into()));
        }
        if !(self.tau_min > 0.0 && self.tau_min <= self.tau_start && self.tau_start <= self.tau_max) {
            return Err(Error::InvalidParameter("need 0 < tau_min <= tau_start <= tau_max".into()));
        }
        Ok(())
    }
}

/// Residual-controlled BPL stepping.
///
/// Each step expands the solution once at `(t, y)`. Starting from the
/// previous step size, `τ` grows by `growth` while the residual stays below
/// `tol` and the last admissible value is accepted; if the starting `τ`
/// already fails, it shrinks by the same factor until the residual passes
/// or `tau_min` is reached.
pub fn integrate_residual_bpl(
    flow: &BplFlow,
    prob: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    cfg: &ResidualConfig,
) -> IntegrationTrace {
    let clock = Instant::now();
    let mut trace = IntegrationTrace::start(t0, y0);
    if let Err(e) = cfg.validate() {
        trace.failure = Some(e);
        return trace;
    }
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut tau = cfg.tau_start;
    let mut at_floor = 0;
    while cfg.t_end - t > cfg.tau_min {
        let remaining = cfg.t_end - t;
        let exp = match flow.expand(prob, C64::new(t, 0.0), &complexify(&y)) {
            Ok(exp) => exp,
            Err(e) => {
                trace.failure = Some(e);
                break;
            }
        };
        let trials = Cell::new(0);
        let residual = |h: f64| -> Option<f64> {
            trials.set(trials.get() + 1);
            exp.residual(prob, C64::new(h, 0.0), flow.rule()).ok()
        };
        let limit = remaining.min(cfg.tau_max);
        let mut h = tau.min(limit);
        let mut res = residual(h);
        if res.is_some_and(|r| r < cfg.tol) {
            while h < limit && trials.get() < cfg.max_trials {
                let trial = (h * cfg.growth).min(limit);
                match residual(trial) {
                    Some(r) if r < cfg.tol => {
                        h = trial;
                        res = Some(r);
                    }
                    _ => break,
                }
            }
        } else {
            while h > cfg.tau_min && trials.get() < cfg.max_trials {
                h = (h / cfg.growth).max(cfg.tau_min);
                res = residual(h);
                if res.is_some_and(|r| r < cfg.tol) {
                    break;
                }
            }
        }
        let state = match exp.flow(C64::new(h, 0.0), flow.rule()) {
            Ok(s) => s,
            Err(e) => {
                trace.failure = Some(e);
                break;
            }
        };
        y = state.iter().map(|z| z.re).collect();
        if y.iter().any(|v| !v.is_finite()) {
            trace.failure = Some(Error::NonFiniteRhs { t });
            break;
        }
        let last = h >= remaining - cfg.tau_min;
        t = if last { cfg.t_end } else { t + h };
        trace.push(TraceRecord {
            t,
            tau: h,
            state: y.clone(),
            err_est: res.unwrap_or(f64::INFINITY),
            rhs_evals: exp.rhs_evaluations() + trials.get(),
            attempts: trials.get(),
            exact_err: None,
        });
        if !last {
            tau = h;
        }
        if h <= cfg.tau_min {
            at_floor += 1;
            if at_floor >= STALL_STEPS {
                trace.failure = Some(Error::StiffnessStall { t, steps: at_floor });
                break;
            }
        } else {
            at_floor = 0;
        }
    }
    trace.wall_time = clock.elapsed().as_secs_f64();
    trace
}
