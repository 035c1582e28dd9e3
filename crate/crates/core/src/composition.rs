//! Complex double composition `Ψ_τ = Φ_{γ₂τ} ∘ Φ_{γ₁τ}`.
//!
//! With `γ₁ + γ₂ = 1` and `γ₁^{p+1} + γ₂^{p+1} = 0`, the real part of
//! `Ψ_τ(y)` is an order `p + 1` approximation and `Ĉ·‖Im Ψ_τ(y)‖` is
//! asymptotically equivalent to its local error.

use std::f64::consts::PI;

use crate::flows::StepResult;
use crate::{cnorm, complexify, Error, OdeSystem, Result, C64};

/// A one-step method `Φ_τ` of known order, evaluable at complex `t` and `τ`.
pub trait OneStepFlow: Sync {
    fn order(&self) -> usize;
    fn name(&self) -> String;
    fn step(&self, prob: &dyn OdeSystem, t: C64, y: &[C64], tau: C64) -> Result<StepResult>;
}

impl<F: OneStepFlow + ?Sized> OneStepFlow for Box<F> {
    fn order(&self) -> usize {
        (**self).order()
    }

    fn name(&self) -> String {
        (**self).name()
    }

    fn step(&self, prob: &dyn OdeSystem, t: C64, y: &[C64], tau: C64) -> Result<StepResult> {
        (**self).step(prob, t, y, tau)
    }
}

/// Composition weights for a base method of order `p`, and the error
/// constant `Ĉ = max(Ĉ₁, Ĉ₂)` scaling the imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionCoefficients {
    pub p: usize,
    pub gamma1: C64,
    pub gamma2: C64,
    pub c_hat: f64,
    pub c_hat1: f64,
    pub c_hat2: f64,
}

impl CompositionCoefficients {
    pub fn new(p: usize) -> Result<Self> {
        let (gamma1, gamma2) = gamma_coefficients(p)?;
        let (c_hat1, c_hat2, c_hat) = error_constant(p, gamma1, gamma2)?;
        Ok(Self {
            p,
            gamma1,
            gamma2,
            c_hat,
            c_hat1,
            c_hat2,
        })
    }

    /// The same pair applied in the opposite order.
    pub fn swapped(&self) -> Self {
        Self {
            gamma1: self.gamma2,
            gamma2: self.gamma1,
            ..*self
        }
    }
}

/// `γ₁ = 1/2 + (i/2)·sin(π/(p+1)) / (1 + cos(π/(p+1)))`, `γ₂ = 1 − γ₁`.
pub fn gamma_coefficients(p: usize) -> Result<(C64, C64)> {
    if p < 1 {
        return Err(Error::InvalidOrder(p));
    }
    let theta = PI / (p as f64 + 1.0);
    let g1 = C64::new(0.5, 0.5 * theta.sin() / (1.0 + theta.cos()));
    Ok((g1, C64::new(1.0, 0.0) - g1))
}

/// Returns `(Ĉ₁, Ĉ₂, Ĉ)`, taking `C_{p+2}/C_{p+1} ≈ p + 2` and absolute
/// values of both ratios.
pub fn error_constant(p: usize, g1: C64, g2: C64) -> Result<(f64, f64, f64)> {
    let n = p as i32 + 1;
    let first = g2 * g1.powi(n);
    let second = g1 * g2.powi(n);
    let tail = g1.powi(n + 1) + g2.powi(n + 1);
    let tiny = 1e-300;
    if first.im.abs() < tiny || second.im.abs() < tiny {
        return Err(Error::DegenerateCoefficients);
    }
    let c1 = (first.re / first.im).abs();
    let c2 = (second.re / second.im + (p as f64 + 2.0) * tail.re / second.im).abs();
    Ok((c1, c2, c1.max(c2)))
}

/// Output of one composed step from a real state.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedStepOutput {
    /// `Re Ψ_τ(y)`.
    pub approx: Vec<f64>,
    /// `Ĉ·‖Im Ψ_τ(y)‖₂`, unfloored.
    pub err_est: f64,
    pub raw_complex: Vec<C64>,
    pub rhs_evaluations: usize,
}

/// A base flow together with its composition coefficients.
#[derive(Debug, Clone)]
pub struct ComposedFlow<F> {
    base: F,
    coeffs: CompositionCoefficients,
}

impl<F: OneStepFlow> ComposedFlow<F> {
    pub fn new(base: F) -> Result<Self> {
        let coeffs = CompositionCoefficients::new(base.order())?;
        Ok(Self { base, coeffs })
    }

    /// Uses explicit coefficients, e.g. [`CompositionCoefficients::swapped`].
    pub fn with_coefficients(base: F, coeffs: CompositionCoefficients) -> Self {
        Self { base, coeffs }
    }

    pub fn base(&self) -> &F {
        &self.base
    }

    pub fn coefficients(&self) -> &CompositionCoefficients {
        &self.coeffs
    }

    /// Order of the base flow.
    pub fn order(&self) -> usize {
        self.coeffs.p
    }

    pub fn name(&self) -> String {
        format!("composed-{}", self.base.name())
    }

    /// `Φ_{γ₂τ}(Φ_{γ₁τ}(y))`; the second substep starts at time `t + γ₁τ`.
    pub fn step(&self, prob: &dyn OdeSystem, t: f64, y: &[f64], tau: f64) -> Result<ComposedStepOutput> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {tau}")));
        }
        let t = C64::new(t, 0.0);
        let tau = C64::new(tau, 0.0);
        let CompositionCoefficients { gamma1, gamma2, .. } = self.coeffs;
        let first = self.base.step(prob, t, &complexify(y), gamma1 * tau)?;
        let second = self.base.step(prob, t + gamma1 * tau, &first.state, gamma2 * tau)?;
        let raw = second.state;
        let imag: Vec<C64> = raw.iter().map(|z| C64::new(0.0, z.im)).collect();
        Ok(ComposedStepOutput {
            approx: raw.iter().map(|z| z.re).collect(),
            err_est: self.coeffs.c_hat * cnorm(&imag),
            raw_complex: raw,
            rhs_evaluations: first.rhs_evaluations + second.rhs_evaluations,
        })
    }
}
