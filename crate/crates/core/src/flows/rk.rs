use nalgebra::{DMatrix, DVector};

use super::ButcherTableau;
use crate::composition::OneStepFlow;
use crate::{cnorm, complexify, Error, OdeSystem, Result, C64};

/// Settings of the Newton solver used for implicit stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Residual tolerance, relative to `1 + ‖K‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Central-difference step is `fd_step · (1 + |y_k|)`.
    pub fd_step: f64,
    /// Run Newton even when the tableau is explicit.
    pub force: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            fd_step: 1e-7,
            force: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: Vec<C64>,
    pub rhs_evaluations: usize,
    pub newton_iterations: usize,
}

/// High-order result of an embedded pair and `‖y − y*‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedStep {
    pub high: Vec<f64>,
    pub est: f64,
    pub rhs_evaluations: usize,
}

struct Stages {
    k: Vec<Vec<C64>>,
    rhs_evaluations: usize,
    newton_iterations: usize,
}

/// A Runge–Kutta method driven by a [`ButcherTableau`].
#[derive(Debug, Clone)]
pub struct RungeKutta {
    tableau: ButcherTableau,
    newton: NewtonOptions,
}

impl RungeKutta {
    pub fn new(tableau: ButcherTableau) -> Self {
        Self {
            tableau,
            newton: NewtonOptions::default(),
        }
    }

    pub fn by_name(name: &str, alpha: Option<f64>) -> Result<Self> {
        ButcherTableau::by_name(name, alpha).map(Self::new)
    }

    pub fn with_newton(mut self, newton: NewtonOptions) -> Self {
        self.newton = newton;
        self
    }

    pub fn tableau(&self) -> &ButcherTableau {
        &self.tableau
    }

    /// One step `y + τ Σ b_i K_i` from `(t, y)`.
    pub fn step(&self, prob: &dyn OdeSystem, t: C64, y: &[C64], tau: C64) -> Result<StepResult> {
        let stages = self.stages(prob, t, y, tau)?;
        Ok(StepResult {
            state: combine(y, tau, &self.tableau.b, &stages.k),
            rhs_evaluations: stages.rhs_evaluations,
            newton_iterations: stages.newton_iterations,
        })
    }

    /// Step with the `b` weights and estimate `‖τ Σ (b_i − b*_i) K_i‖` from
    /// the same stages.
    pub fn embedded_step(
        &self,
        prob: &dyn OdeSystem,
        t: f64,
        y: &[f64],
        tau: f64,
    ) -> Result<EmbeddedStep> {
        let b_star = self.tableau.b_star.as_ref().ok_or_else(|| {
            Error::InvalidParameter(format!("{} has no embedded weights", self.tableau.name))
        })?;
        let yc = complexify(y);
        let tau = C64::new(tau, 0.0);
        let stages = self.stages(prob, C64::new(t, 0.0), &yc, tau)?;
        let high = combine(&yc, tau, &self.tableau.b, &stages.k);
        let diff: Vec<f64> = self
            .tableau
            .b
            .iter()
            .zip(b_star)
            .map(|(b, bs)| b - bs)
            .collect();
        let zero = vec![C64::new(0.0, 0.0); y.len()];
        let delta = combine(&zero, tau, &diff, &stages.k);
        Ok(EmbeddedStep {
            high: high.iter().map(|z| z.re).collect(),
            est: cnorm(&delta),
            rhs_evaluations: stages.rhs_evaluations,
        })
    }

    fn stages(&self, prob: &dyn OdeSystem, t: C64, y: &[C64], tau: C64) -> Result<Stages> {
        if tau == C64::new(0.0, 0.0) {
            return Err(Error::InvalidParameter("step size must be nonzero".into()));
        }
        if self.tableau.is_explicit() && !self.newton.force {
            self.explicit_stages(prob, t, y, tau)
        } else {
            self.newton_stages(prob, t, y, tau)
        }
    }

    fn explicit_stages(&self, prob: &dyn OdeSystem, t: C64, y: &[C64], tau: C64) -> Result<Stages> {
        let tab = &self.tableau;
        let d = y.len();
        let mut k: Vec<Vec<C64>> = Vec::with_capacity(tab.stages());
        let mut arg = vec![C64::new(0.0, 0.0); d];
        for i in 0..tab.stages() {
            arg.copy_from_slice(y);
            for (j, kj) in k.iter().enumerate() {
                let a = tab.a[i][j];
                if a != 0.0 {
                    let w = tau * a;
                    for (x, kx) in arg.iter_mut().zip(kj) {
                        *x += w * kx;
                    }
                }
            }
            let mut ki = vec![C64::new(0.0, 0.0); d];
            eval(prob, t + tau * tab.c[i], &arg, &mut ki)?;
            k.push(ki);
        }
        Ok(Stages {
            k,
            rhs_evaluations: tab.stages(),
            newton_iterations: 0,
        })
    }

    /// Newton iteration on the stacked system `K_i − f(t + c_i τ, y + τ Σ a_ij K_j) = 0`.
    fn newton_stages(&self, prob: &dyn OdeSystem, t: C64, y: &[C64], tau: C64) -> Result<Stages> {
        let tab = &self.tableau;
        let (s, d) = (tab.stages(), y.len());
        let opts = &self.newton;
        let zero = C64::new(0.0, 0.0);

        let mut f0 = vec![zero; d];
        eval(prob, t, y, &mut f0)?;
        let mut evals = 1;
        let mut k: Vec<Vec<C64>> = vec![f0; s];
        let mut last_update = f64::INFINITY;
        let mut residual = f64::INFINITY;

        for iter in 0..=opts.max_iter {
            let args: Vec<Vec<C64>> = (0..s).map(|i| stage_argument(tab, i, y, tau, &k)).collect();
            let mut g = DVector::from_element(s * d, zero);
            let mut fi = vec![zero; d];
            for i in 0..s {
                eval(prob, t + tau * tab.c[i], &args[i], &mut fi)?;
                evals += 1;
                for r in 0..d {
                    g[i * d + r] = k[i][r] - fi[r];
                }
            }
            residual = g.norm();
            let scale = 1.0 + k.iter().map(|ki| cnorm(ki)).fold(0.0, f64::max);
            if residual <= opts.tol * scale || last_update <= 4.0 * f64::EPSILON * scale {
                return Ok(Stages {
                    k,
                    rhs_evaluations: evals,
                    newton_iterations: iter,
                });
            }
            if iter == opts.max_iter {
                break;
            }

            let mut m = DMatrix::from_element(s * d, s * d, zero);
            for i in 0..s {
                let ti = t + tau * tab.c[i];
                let jac = match prob.jacobian(ti, &args[i]) {
                    Some(j) => j,
                    None => {
                        evals += 2 * d;
                        fd_jacobian(prob, ti, &args[i], opts.fd_step)?
                    }
                };
                for j in 0..s {
                    let a = tab.a[i][j];
                    for r in 0..d {
                        for c in 0..d {
                            let mut v = -tau * a * jac[(r, c)];
                            if i == j && r == c {
                                v += 1.0;
                            }
                            m[(i * d + r, j * d + c)] = v;
                        }
                    }
                }
            }
            let delta = m.lu().solve(&g).ok_or(Error::StageSolveFailure {
                residual,
                iterations: iter,
            })?;
            for i in 0..s {
                for r in 0..d {
                    k[i][r] -= delta[i * d + r];
                }
            }
            last_update = delta.norm();
            if !last_update.is_finite() {
                break;
            }
        }
        Err(Error::StageSolveFailure {
            residual,
            iterations: opts.max_iter,
        })
    }
}

impl OneStepFlow for RungeKutta {
    fn order(&self) -> usize {
        self.tableau.order
    }

    fn name(&self) -> String {
        self.tableau.name.clone()
    }

    fn step(&self, prob: &dyn OdeSystem, t: C64, y: &[C64], tau: C64) -> Result<StepResult> {
        RungeKutta::step(self, prob, t, y, tau)
    }
}

fn stage_argument(tab: &ButcherTableau, i: usize, y: &[C64], tau: C64, k: &[Vec<C64>]) -> Vec<C64> {
    let mut arg = y.to_vec();
    for (j, kj) in k.iter().enumerate() {
        let a = tab.a[i][j];
        if a != 0.0 {
            let w = tau * a;
            for (x, kx) in arg.iter_mut().zip(kj) {
                *x += w * kx;
            }
        }
    }
    arg
}

fn combine(y: &[C64], tau: C64, weights: &[f64], k: &[Vec<C64>]) -> Vec<C64> {
    let mut out = y.to_vec();
    for (w, ki) in weights.iter().zip(k) {
        if *w != 0.0 {
            let tw = tau * w;
            for (o, kx) in out.iter_mut().zip(ki) {
                *o += tw * kx;
            }
        }
    }
    out
}

pub(crate) fn eval(prob: &dyn OdeSystem, t: C64, y: &[C64], out: &mut [C64]) -> Result<()> {
    prob.rhs(t, y, out);
    if out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteRhs { t: t.re })
    }
}

fn fd_jacobian(prob: &dyn OdeSystem, t: C64, y: &[C64], rel: f64) -> Result<DMatrix<C64>> {
    let d = y.len();
    let mut jac = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    let mut yp = y.to_vec();
    let mut fp = vec![C64::new(0.0, 0.0); d];
    let mut fm = fp.clone();
    for c in 0..d {
        let h = rel * (1.0 + y[c].norm());
        yp[c] = y[c] + h;
        eval(prob, t, &yp, &mut fp)?;
        yp[c] = y[c] - h;
        eval(prob, t, &yp, &mut fm)?;
        yp[c] = y[c];
        for r in 0..d {
            jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}
