//! Complex double composition of one-step ODE integrators.
//!
//! Applying a one-step method of order `p` twice, with the conjugate complex
//! substeps `γ₁τ` and `γ₂τ = (1 − γ₁)τ`, gives a complex state whose real part
//! is an order `p + 1` approximation and whose imaginary part, scaled by a
//! constant `Ĉ`, estimates the local error of that approximation. The crate
//! provides:
//!
//! - [`flows`]: generic explicit/implicit Runge–Kutta stepping over complex
//!   states, with a tableau library and embedded pairs (BS3, DOP5).
//! - [`composition`]: composition coefficients, the error constant and the
//!   composed step.
//! - [`adaptive`]: fixed-step and adaptive drivers, including residual-based
//!   stepping for the Borel–Padé–Laplace integrator.
//! - [`stability`]: stability functions of base and composed schemes, region
//!   rasterization and real-axis boundary location.
//! - [`bpl`]: the Borel–Padé–Laplace integrator (Taylor jets, Borel
//!   transform, Padé approximants, Gauss–Laguerre quadrature).
//! - [`problems`]: benchmark problems, Lambert W, first integrals.
//! - [`harness`]: global error, rates of convergence, global ratio, studies,
//!   and CSV emission.

pub mod adaptive;
pub mod bpl;
pub mod composition;
mod error;
pub mod flows;
pub mod harness;
pub mod problems;
pub mod stability;
mod system;

pub use adaptive::{AdaptiveConfig, IntegrationTrace, Method, TraceRecord};
pub use bpl::{BplFlow, TaylorJet};
pub use composition::{CompositionCoefficients, ComposedFlow, ComposedStepOutput, OneStepFlow};
pub use error::{Error, Result};
pub use flows::{ButcherTableau, RungeKutta, StepResult};
pub use problems::{make_problem, ProblemSpec};
pub use stability::StabilityGrid;
pub use system::{FnSystem, OdeSystem};

/// Complex scalar used for every state and time argument.
pub type C64 = num_complex::Complex64;

/// Euclidean norm of a real vector.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean norm of a complex vector.
pub fn cnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Embeds a real vector into complex space.
pub fn complexify(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}
