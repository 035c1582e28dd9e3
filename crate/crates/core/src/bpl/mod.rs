//! Borel–Padé–Laplace one-step integrator.
//!
//! From `(t, y)`: Taylor coefficients `Y_k` of the solution by jet
//! arithmetic, Borel transform `Σ Y_{k+1} ξ^k / k!`, a Padé approximant
//! `Pd` of that series, and the Laplace integral back to the time domain
//! evaluated with Gauss–Laguerre quadrature:
//! `Φ_τ(y) = y + τ Σ_i ω_i Pd(ξ_i τ)`.

mod jet;
mod pade;
mod quadrature;

pub use jet::TaylorJet;
pub use pade::{pade_approximant, PadeApproximant};
pub use quadrature::{gauss_laguerre, QuadratureRule};

use crate::composition::OneStepFlow;
use crate::flows::StepResult;
use crate::{cnorm, Error, OdeSystem, Result, C64};

pub const DEFAULT_GAUSS_POINTS: usize = 20;

/// Below this `|r(ξ_i τ)|` the contour is considered to hit a pole.
const POLE_THRESHOLD: f64 = 1e-13;

/// `Y_0 … Y_p` of the solution through `(t, y)`, each a state-sized vector.
pub fn taylor_coefficients(prob: &dyn OdeSystem, t: C64, y: &[C64], p: usize) -> Result<Vec<Vec<C64>>> {
    let d = y.len();
    let mut coeffs: Vec<Vec<C64>> = vec![y.to_vec()];
    for k in 0..p {
        let tj = TaylorJet::variable(t, k);
        let yj: Vec<TaylorJet> = (0..d)
            .map(|i| TaylorJet::new(coeffs.iter().map(|c| c[i]).collect()))
            .collect();
        let f = prob
            .jet_rhs(&tj, &yj)
            .ok_or_else(|| Error::UnsupportedProblem(prob.label().to_string()))?;
        let next: Vec<C64> = f.iter().map(|fi| fi.coeff(k) / (k as f64 + 1.0)).collect();
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteRhs { t: t.re });
        }
        coeffs.push(next);
    }
    Ok(coeffs)
}

/// `out_k = Y_{k+1} / k!` for `k = 0 … p−1`.
pub fn borel_transform(series: &[C64]) -> Vec<C64> {
    let mut fact = 1.0;
    series
        .iter()
        .skip(1)
        .enumerate()
        .map(|(k, &y)| {
            if k > 0 {
                fact *= k as f64;
            }
            y / fact
        })
        .collect()
}

/// Near-diagonal degrees `(ceil((p−1)/2), floor((p−1)/2))` for the
/// length-`p` Borel series.
pub fn pade_degrees(p: usize) -> (usize, usize) {
    let m = p.saturating_sub(1);
    (m.div_ceil(2), m / 2)
}

/// Resummed expansion at one `(t, y)`, reusable for any `τ`.
#[derive(Debug, Clone)]
pub struct BplExpansion {
    t: C64,
    y: Vec<C64>,
    components: Vec<PadeApproximant>,
    rhs_evaluations: usize,
}

impl BplExpansion {
    pub fn new(prob: &dyn OdeSystem, t: C64, y: &[C64], p: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidOrder(p));
        }
        let coeffs = taylor_coefficients(prob, t, y, p)?;
        let (dq, dr) = pade_degrees(p);
        let components = (0..y.len())
            .map(|i| {
                let series: Vec<C64> = coeffs.iter().map(|c| c[i]).collect();
                pade_approximant(&borel_transform(&series), dq, dr)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            t,
            y: y.to_vec(),
            components,
            rhs_evaluations: p,
        })
    }

    pub fn components(&self) -> &[PadeApproximant] {
        &self.components
    }

    pub fn rhs_evaluations(&self) -> usize {
        self.rhs_evaluations
    }

    /// `Φ_τ(y)` and `dΦ_τ(y)/dτ`.
    pub fn flow_and_derivative(&self, tau: C64, rule: &QuadratureRule) -> Result<(Vec<C64>, Vec<C64>)> {
        let mut state = self.y.clone();
        let mut deriv = vec![C64::new(0.0, 0.0); self.y.len()];
        for (i, pd) in self.components.iter().enumerate() {
            let mut sum = C64::new(0.0, 0.0);
            let mut dsum = C64::new(0.0, 0.0);
            for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
                let x = tau * xi;
                if pd.denominator_at(x).norm() < POLE_THRESHOLD {
                    return Err(Error::PoleOnContour);
                }
                let (v, dv) = pd.eval_with_derivative(x);
                sum += w * v;
                dsum += w * (v + x * dv);
            }
            state[i] += tau * sum;
            deriv[i] = dsum;
        }
        Ok((state, deriv))
    }

    pub fn flow(&self, tau: C64, rule: &QuadratureRule) -> Result<Vec<C64>> {
        self.flow_and_derivative(tau, rule).map(|(s, _)| s)
    }

    /// `‖dΦ_τ/dτ − f(t + τ, Φ_τ)‖`.
    pub fn residual(&self, prob: &dyn OdeSystem, tau: C64, rule: &QuadratureRule) -> Result<f64> {
        let (state, deriv) = self.flow_and_derivative(tau, rule)?;
        let mut f = vec![C64::new(0.0, 0.0); state.len()];
        crate::flows::eval_rhs(prob, self.t + tau, &state, &mut f)?;
        let diff: Vec<C64> = deriv.iter().zip(&f).map(|(a, b)| a - b).collect();
        Ok(cnorm(&diff))
    }
}

/// One BPL step of truncation order `p`.
pub fn bpl_step(
    prob: &dyn OdeSystem,
    t: C64,
    y: &[C64],
    tau: C64,
    p: usize,
    rule: &QuadratureRule,
) -> Result<Vec<C64>> {
    if tau.norm() == 0.0 {
        return Err(Error::InvalidParameter("step size must be nonzero".into()));
    }
    BplExpansion::new(prob, t, y, p)?.flow(tau, rule)
}

pub fn bpl_residual(
    prob: &dyn OdeSystem,
    t: C64,
    y: &[C64],
    tau: C64,
    p: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    BplExpansion::new(prob, t, y, p)?.residual(prob, tau, rule)
}

/// The BPL integrator as a [`OneStepFlow`], composable like any other.
#[derive(Debug, Clone)]
pub struct BplFlow {
    order: usize,
    rule: QuadratureRule,
}

impl BplFlow {
    pub fn new(order: usize, gauss_points: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidOrder(order));
        }
        Ok(Self {
            order,
            rule: gauss_laguerre(gauss_points)?,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn expand(&self, prob: &dyn OdeSystem, t: C64, y: &[C64]) -> Result<BplExpansion> {
        BplExpansion::new(prob, t, y, self.order)
    }
}

impl OneStepFlow for BplFlow {
    fn order(&self) -> usize {
        self.order
    }

    fn name(&self) -> String {
        format!("bpl{}", self.order)
    }

    fn step(&self, prob: &dyn OdeSystem, t: C64, y: &[C64], tau: C64) -> Result<StepResult> {
        let exp = self.expand(prob, t, y)?;
        Ok(StepResult {
            state: exp.flow(tau, &self.rule)?,
            rhs_evaluations: exp.rhs_evaluations(),
            newton_iterations: 0,
        })
    }
}
