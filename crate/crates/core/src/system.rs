use nalgebra::DMatrix;

use crate::bpl::TaylorJet;
use crate::{Result, C64};

/// Right-hand side of `dy/dt = f(t, y)`, extended to complex time and state.
///
/// Every benchmark is built from analytic expressions, so evaluating at a
/// complex `t` or `y` is the natural continuation of the real problem.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, t: C64, y: &[C64], dy: &mut [C64]);

    /// Exact `∂f/∂y`. Implicit stages fall back to finite differences when
    /// this returns `None`.
    fn jacobian(&self, _t: C64, _y: &[C64]) -> Option<DMatrix<C64>> {
        None
    }

    /// `f` evaluated on truncated power series, for Taylor-based flows.
    fn jet_rhs(&self, _t: &TaylorJet, _y: &[TaylorJet]) -> Option<Vec<TaylorJet>> {
        None
    }

    fn exact_solution(&self, _t: f64) -> Option<Vec<f64>> {
        None
    }

    /// First integral, when the problem has one. The inner result reports
    /// states where it is undefined.
    fn first_integral(&self, _y: &[f64]) -> Option<Result<f64>> {
        None
    }

    fn label(&self) -> &str;
}

/// Closure-backed system, handy for one-off problems and tests.
pub struct FnSystem<F> {
    dim: usize,
    f: F,
    label: String,
}

impl<F> FnSystem<F>
where
    F: Fn(C64, &[C64], &mut [C64]) + Sync,
{
    pub fn new(dim: usize, label: impl Into<String>, f: F) -> Self {
        Self {
            dim,
            f,
            label: label.into(),
        }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: Fn(C64, &[C64], &mut [C64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: C64, y: &[C64], dy: &mut [C64]) {
        (self.f)(t, y, dy)
    }

    fn label(&self) -> &str {
        &self.label
    }
}
