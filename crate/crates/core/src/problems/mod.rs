//! Benchmark registry: right-hand sides with jets and Jacobians, exact or
//! reference solutions, first integrals, and Lambert W.

pub mod kronrod;
mod lambert;
mod systems;

use std::collections::BTreeMap;

pub use lambert::{lambert_w, lambert_w_exp};
pub use systems::{Cubic, DuffingVdP, Example1, Lambert, Linear, LotkaVolterra};

use crate::adaptive::IntegrationTrace;
use crate::flows::RungeKutta;
use crate::{complexify, Error, OdeSystem, Result, C64};

pub type Params = BTreeMap<String, f64>;

/// Every name accepted by [`make_problem`].
pub const PROBLEM_NAMES: [&str; 7] = [
    "cubic",
    "example1",
    "lambert",
    "lotkaVolterra",
    "duffingVdP",
    "oscillator",
    "linear",
];

/// Fine fixed-step integration standing in for an exact solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMethod {
    pub scheme: String,
    pub tau: f64,
}

impl ReferenceMethod {
    pub fn new(scheme: &str, tau: f64) -> Self {
        Self {
            scheme: scheme.to_string(),
            tau,
        }
    }

    /// State at `t1` from `(t0, y0)`, in equal steps no longer than `tau`.
    pub fn propagate(&self, sys: &dyn OdeSystem, t0: f64, y0: &[f64], t1: f64) -> Result<Vec<f64>> {
        let rk = RungeKutta::by_name(&self.scheme, None)?;
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(y0.to_vec());
        }
        let n = ((span.abs() / self.tau) - 1e-9).ceil().max(1.0) as usize;
        let h = C64::new(span / n as f64, 0.0);
        let mut y = complexify(y0);
        for k in 0..n {
            let t = C64::new(t0 + span * k as f64 / n as f64, 0.0);
            y = rk.step(sys, t, &y, h)?.state;
        }
        Ok(y.iter().map(|z| z.re).collect())
    }
}

/// A benchmark problem with its defaults.
pub struct ProblemSpec {
    pub name: String,
    pub params: Params,
    pub t0: f64,
    pub t_end: f64,
    pub y0: Vec<f64>,
    pub reference: ReferenceMethod,
    system: Box<dyn OdeSystem + Send>,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .field("y0", &self.y0)
            .finish()
    }
}

impl ProblemSpec {
    pub fn system(&self) -> &dyn OdeSystem {
        self.system.as_ref()
    }

    pub fn has_exact(&self) -> bool {
        self.system.exact_solution(self.t0).is_some()
    }

    /// Exact values where a closed form exists, otherwise the reference
    /// integration from `(t0, y0)`. `times` must be nondecreasing.
    pub fn truth_at(&self, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.has_exact() {
            return times
                .iter()
                .map(|&t| {
                    self.system
                        .exact_solution(t)
                        .ok_or_else(|| Error::InvalidParameter(format!("no exact value at t = {t}")))
                })
                .collect();
        }
        let mut out = Vec::with_capacity(times.len());
        let (mut t, mut y) = (self.t0, self.y0.clone());
        for &target in times {
            if target < t {
                return Err(Error::InvalidParameter("reference times must be nondecreasing".into()));
            }
            y = self.reference.propagate(self.system(), t, &y, target)?;
            t = target;
            out.push(y.clone());
        }
        Ok(out)
    }

    /// Reference flow over one step from an arbitrary state: the local
    /// error of a step from `(t, y)` is measured against this.
    pub fn local_reference(&self, t: f64, y: &[f64], tau: f64) -> Result<Vec<f64>> {
        self.reference.propagate(self.system(), t, y, t + tau)
    }

    /// Sets `exact_err` on every record against [`Self::truth_at`].
    pub fn annotate(&self, trace: &mut IntegrationTrace) -> Result<()> {
        let truth = self.truth_at(&trace.times())?;
        let mut it = truth.into_iter();
        trace.annotate_exact(|_| it.next());
        Ok(())
    }
}

/// `|F(y_n) − F(y₀)|` for every record.
pub fn first_integral_drift(trace: &IntegrationTrace, sys: &dyn OdeSystem) -> Result<Vec<f64>> {
    let f = |y: &[f64]| {
        sys.first_integral(y)
            .unwrap_or_else(|| Err(Error::NoInvariant(sys.label().to_string())))
    };
    let f0 = f(&trace.y0)?;
    trace.records.iter().map(|r| Ok((f(&r.state)? - f0).abs())).collect()
}

fn canonical(name: &str) -> Option<&'static str> {
    let n = name.to_ascii_lowercase().replace(['-', '_'], "");
    Some(match n.as_str() {
        "cubic" => "cubic",
        "example1" => "example1",
        "lambert" => "lambert",
        "lotkavolterra" | "lv" => "lotkaVolterra",
        "duffingvdp" | "duffing" => "duffingVdP",
        "oscillator" => "oscillator",
        "linear" => "linear",
        _ => return None,
    })
}

fn defaults(name: &str) -> Params {
    let entries: &[(&str, f64)] = match name {
        "cubic" => &[("y0", 1.0), ("t0", 0.0), ("t_end", 2.0)],
        "example1" => &[("lambda", 1.0), ("y0", 1.0), ("t0", 0.0), ("t_end", 5.0 * std::f64::consts::PI)],
        "lambert" => &[("delta", 0.01), ("t0", 0.0)],
        "lotkaVolterra" => &[
            ("alpha", 1.0),
            ("beta", 1.0),
            ("delta", 1.0),
            ("eta", 1.0),
            ("u0", 2.0),
            ("v0", 1.0),
            ("t0", 0.0),
            ("t_end", 20.0),
        ],
        "duffingVdP" => &[
            ("r", 0.3),
            ("g", 0.0),
            ("a", -1.0),
            ("b", 1.0),
            ("c", 0.2),
            ("w", 1.2),
            ("u0", 1.0),
            ("v0", 0.0),
            ("t0", 0.0),
            ("t_end", 100.0),
        ],
        "oscillator" => &[
            ("r", 0.0),
            ("g", 0.0),
            ("a", 1.0),
            ("b", 1.0),
            ("c", 0.0),
            ("w", 1.0),
            ("u0", 1.0),
            ("v0", 0.0),
            ("t0", 0.0),
            ("t_end", 20.0),
        ],
        "linear" => &[("lambda", -1.0), ("y0", 1.0), ("t0", 0.0), ("t_end", 1.0)],
        _ => &[],
    };
    entries.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Builds a registry problem. `overrides` may set any default parameter,
/// including `t0` and `t_end`; an unknown key is an error.
pub fn make_problem(name: &str, overrides: &Params) -> Result<ProblemSpec> {
    let name = canonical(name).ok_or_else(|| Error::UnknownProblem(name.to_string()))?;
    let overrides: Params = overrides
        .iter()
        .map(|(k, &v)| (k.strip_prefix("problem.").unwrap_or(k).to_string(), v))
        .collect();
    let mut params = defaults(name);
    if name == "lambert" {
        let delta = overrides.get("delta").copied().unwrap_or(params["delta"]);
        params.insert("t_end".into(), 2.0 / delta);
    }
    for (key, &v) in &overrides {
        match params.get_mut(key) {
            Some(slot) => *slot = v,
            None => {
                return Err(Error::InvalidParameter(format!("{name} has no parameter '{key}'")));
            }
        }
    }
    if let Some((k, v)) = params.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{k} = {v} is not finite")));
    }
    let p = |k: &str| params[k];
    let (t0, t_end) = (p("t0"), p("t_end"));
    if t_end < t0 {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} precedes t0 = {t0}")));
    }
    let fine = ReferenceMethod::new("dop5", 1e-3);
    let (system, y0, reference): (Box<dyn OdeSystem + Send>, Vec<f64>, ReferenceMethod) = match name {
        "cubic" => (Box::new(Cubic { y0: p("y0") }), vec![p("y0")], fine),
        "linear" => (
            Box::new(Linear {
                lambda: p("lambda"),
                y0: p("y0"),
            }),
            vec![p("y0")],
            fine,
        ),
        "example1" => {
            if p("lambda") == 0.0 {
                return Err(Error::InvalidParameter("example1 needs lambda != 0".into()));
            }
            let sys = Example1 {
                lambda: p("lambda"),
                y0: p("y0"),
            };
            (Box::new(sys), vec![p("y0")], fine)
        }
        "lambert" => {
            let delta = p("delta");
            if !(delta > 0.0 && delta <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "lambert needs 0 < delta <= 1, got {delta}"
                )));
            }
            (Box::new(Lambert { delta }), vec![delta], fine)
        }
        "lotkaVolterra" => (
            Box::new(LotkaVolterra {
                alpha: p("alpha"),
                beta: p("beta"),
                delta: p("delta"),
                eta: p("eta"),
            }),
            vec![p("u0"), p("v0")],
            ReferenceMethod::new("rk4", 1e-5),
        ),
        _ => (
            Box::new(DuffingVdP {
                r: p("r"),
                g: p("g"),
                a: p("a"),
                b: p("b"),
                c: p("c"),
                w: p("w"),
            }),
            vec![p("u0"), p("v0")],
            ReferenceMethod::new("grk2", 1e-3),
        ),
    };
    Ok(ProblemSpec {
        name: name.to_string(),
        params,
        t0,
        t_end,
        y0,
        reference,
        system,
    })
}

/// Contents of a flat `key = value` problem file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemConfig {
    pub name: Option<String>,
    pub params: Params,
}

/// Parses lines like `problem.lambda = 1.0`; `#` starts a comment and the
/// `problem.` prefix is optional. `name` is the one non-numeric key.
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let mut cfg = ProblemConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim();
        let key = key.strip_prefix("problem.").unwrap_or(key);
        let value = value.trim();
        if key == "name" {
            cfg.name = Some(value.to_string());
            continue;
        }
        let v: f64 = value.parse().map_err(|_| {
            Error::InvalidParameter(format!("line {}: '{value}' is not a number", lineno + 1))
        })?;
        cfg.params.insert(key.to_string(), v);
    }
    Ok(cfg)
}
