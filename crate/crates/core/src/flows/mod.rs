//! Runge–Kutta stepping over complex-extended states.

mod rk;
mod tableau;

pub(crate) use rk::eval as eval_rhs;
pub use rk::{EmbeddedStep, NewtonOptions, RungeKutta, StepResult};
pub use tableau::{ButcherTableau, SCHEME_NAMES};
