//! Benchmark right-hand sides, each written once for complex states and once
//! for Taylor jets.

use nalgebra::DMatrix;

use super::kronrod;
use super::lambert::lambert_w_exp;
use crate::bpl::TaylorJet;
use crate::{Error, OdeSystem, Result, C64};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `y' = −y³`, exact `y = y₀/√(1 + 2y₀²t)`.
#[derive(Debug, Clone)]
pub struct Cubic {
    pub y0: f64,
}

impl OdeSystem for Cubic {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, _t: C64, y: &[C64], dy: &mut [C64]) {
        dy[0] = -y[0] * y[0] * y[0];
    }

    fn jacobian(&self, _t: C64, y: &[C64]) -> Option<DMatrix<C64>> {
        Some(DMatrix::from_element(1, 1, -3.0 * y[0] * y[0]))
    }

    fn jet_rhs(&self, _t: &TaylorJet, y: &[TaylorJet]) -> Option<Vec<TaylorJet>> {
        Some(vec![-y[0].powi(3)])
    }

    fn exact_solution(&self, t: f64) -> Option<Vec<f64>> {
        let y0 = self.y0;
        Some(vec![y0 / (1.0 + 2.0 * y0 * y0 * t).sqrt()])
    }

    fn label(&self) -> &str {
        "cubic"
    }
}

/// `y' = λy`.
#[derive(Debug, Clone)]
pub struct Linear {
    pub lambda: f64,
    pub y0: f64,
}

impl OdeSystem for Linear {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, _t: C64, y: &[C64], dy: &mut [C64]) {
        dy[0] = y[0] * self.lambda;
    }

    fn jacobian(&self, _t: C64, _y: &[C64]) -> Option<DMatrix<C64>> {
        Some(DMatrix::from_element(1, 1, c(self.lambda)))
    }

    fn jet_rhs(&self, _t: &TaylorJet, y: &[TaylorJet]) -> Option<Vec<TaylorJet>> {
        Some(vec![&y[0] * self.lambda])
    }

    fn exact_solution(&self, t: f64) -> Option<Vec<f64>> {
        Some(vec![self.y0 * (self.lambda * t).exp()])
    }

    fn label(&self) -> &str {
        "linear"
    }
}

/// `y' = e^{−λy} + sin t`.
///
/// With `u = e^{λy}` the equation is linear in `u`, which gives
/// `y = λ⁻¹ log(λt + (λ²g(t) + e^{λ(1+y₀)}) e^{−λ cos t})`,
/// `g(t) = ∫₀ᵗ s sin s e^{λ cos s} ds`.
#[derive(Debug, Clone)]
pub struct Example1 {
    pub lambda: f64,
    pub y0: f64,
}

impl Example1 {
    /// Absolute tolerance for `g(t)`.
    pub const QUAD_TOL: f64 = 1e-13;

    pub fn g(&self, t: f64) -> Result<f64> {
        let l = self.lambda;
        kronrod::integrate(|s| s * s.sin() * (l * s.cos()).exp(), 0.0, t, Self::QUAD_TOL)
    }

    pub fn solution_with_g(&self, t: f64, g: f64) -> f64 {
        let l = self.lambda;
        let inner = l * t + (l * l * g + (l * (1.0 + self.y0)).exp()) * (-l * t.cos()).exp();
        inner.ln() / l
    }
}

impl OdeSystem for Example1 {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, t: C64, y: &[C64], dy: &mut [C64]) {
        dy[0] = (-self.lambda * y[0]).exp() + t.sin();
    }

    fn jacobian(&self, _t: C64, y: &[C64]) -> Option<DMatrix<C64>> {
        let l = self.lambda;
        Some(DMatrix::from_element(1, 1, -l * (-l * y[0]).exp()))
    }

    fn jet_rhs(&self, t: &TaylorJet, y: &[TaylorJet]) -> Option<Vec<TaylorJet>> {
        Some(vec![(&y[0] * -self.lambda).exp() + t.sin()])
    }

    fn exact_solution(&self, t: f64) -> Option<Vec<f64>> {
        let g = self.g(t).ok()?;
        Some(vec![self.solution_with_g(t, g)])
    }

    fn label(&self) -> &str {
        "example1"
    }
}

/// `y' = y² − y³`, `y(0) = δ`; exact `y = 1/(W(d e^{d−t}) + 1)` with
/// `d = 1/δ − 1`.
#[derive(Debug, Clone)]
pub struct Lambert {
    pub delta: f64,
}

impl OdeSystem for Lambert {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, _t: C64, y: &[C64], dy: &mut [C64]) {
        let y2 = y[0] * y[0];
        dy[0] = y2 - y2 * y[0];
    }

    fn jacobian(&self, _t: C64, y: &[C64]) -> Option<DMatrix<C64>> {
        Some(DMatrix::from_element(1, 1, 2.0 * y[0] - 3.0 * y[0] * y[0]))
    }

    fn jet_rhs(&self, _t: &TaylorJet, y: &[TaylorJet]) -> Option<Vec<TaylorJet>> {
        let y2 = &y[0] * &y[0];
        Some(vec![&y2 - &y2 * &y[0]])
    }

    fn exact_solution(&self, t: f64) -> Option<Vec<f64>> {
        let d = 1.0 / self.delta - 1.0;
        let w = if d == 0.0 { 0.0 } else { lambert_w_exp(d.ln() + d - t) };
        Some(vec![1.0 / (w + 1.0)])
    }

    fn label(&self) -> &str {
        "lambert"
    }
}

/// Predator–prey system `u' = αu − βuv`, `v' = −δv + ηuv`.
#[derive(Debug, Clone)]
pub struct LotkaVolterra {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub eta: f64,
}

impl OdeSystem for LotkaVolterra {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: C64, y: &[C64], dy: &mut [C64]) {
        let uv = y[0] * y[1];
        dy[0] = self.alpha * y[0] - self.beta * uv;
        dy[1] = -self.delta * y[1] + self.eta * uv;
    }

    fn jacobian(&self, _t: C64, y: &[C64]) -> Option<DMatrix<C64>> {
        let (u, v) = (y[0], y[1]);
        Some(DMatrix::from_row_slice(
            2,
            2,
            &[
                self.alpha - self.beta * v,
                -self.beta * u,
                self.eta * v,
                -self.delta + self.eta * u,
            ],
        ))
    }

    fn jet_rhs(&self, _t: &TaylorJet, y: &[TaylorJet]) -> Option<Vec<TaylorJet>> {
        let uv = &y[0] * &y[1];
        Some(vec![
            &y[0] * self.alpha - &uv * self.beta,
            &uv * self.eta - &y[1] * self.delta,
        ])
    }

    /// `F = βv + ηu − α log v − δ log u`.
    fn first_integral(&self, y: &[f64]) -> Option<Result<f64>> {
        let (u, v) = (y[0], y[1]);
        if !(u > 0.0 && v > 0.0) {
            return Some(Err(Error::InvariantUndefined(y.to_vec())));
        }
        Some(Ok(self.beta * v + self.eta * u - self.alpha * v.ln() - self.delta * u.ln()))
    }

    fn label(&self) -> &str {
        "lotkaVolterra"
    }
}

/// `ü + (r + g u²)u̇ + a u + b u³ = c cos(wt)` as a system in `(u, v = u̇)`.
#[derive(Debug, Clone)]
pub struct DuffingVdP {
    pub r: f64,
    pub g: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub w: f64,
}

impl DuffingVdP {
    pub fn is_hamiltonian(&self) -> bool {
        self.r == 0.0 && self.g == 0.0 && self.c == 0.0
    }
}

impl OdeSystem for DuffingVdP {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, t: C64, y: &[C64], dy: &mut [C64]) {
        let (u, v) = (y[0], y[1]);
        dy[0] = v;
        dy[1] = -(self.r + self.g * u * u) * v - self.a * u - self.b * u * u * u
            + self.c * (self.w * t).cos();
    }

    fn jacobian(&self, _t: C64, y: &[C64]) -> Option<DMatrix<C64>> {
        let (u, v) = (y[0], y[1]);
        Some(DMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0),
                c(1.0),
                -2.0 * self.g * u * v - self.a - 3.0 * self.b * u * u,
                -(self.r + self.g * u * u),
            ],
        ))
    }

    fn jet_rhs(&self, t: &TaylorJet, y: &[TaylorJet]) -> Option<Vec<TaylorJet>> {
        let (u, v) = (&y[0], &y[1]);
        let u2 = u * u;
        let damping = (&u2 * self.g + self.r) * v;
        let restoring = u * self.a + &u2 * u * self.b;
        let forcing = (t * self.w).cos() * self.c;
        Some(vec![v.clone(), forcing - damping - restoring])
    }

    /// `H = v²/2 + a u²/2 + b u⁴/4`, conserved only without damping and
    /// forcing.
    fn first_integral(&self, y: &[f64]) -> Option<Result<f64>> {
        if !self.is_hamiltonian() {
            return None;
        }
        let (u, v) = (y[0], y[1]);
        Some(Ok(0.5 * v * v + 0.5 * self.a * u * u + 0.25 * self.b * u.powi(4)))
    }

    fn label(&self) -> &str {
        "duffingVdP"
    }
}
