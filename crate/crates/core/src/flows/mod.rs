//! The Toda and symmetrization fields, the linear chart dynamics, and the
//! reference integrator.

mod fields;
mod integrator;
mod trajectory;

pub use fields::{
    chart_flow_exact, chart_linear_field, sym_field, toda_field, toda_field_direct, Field,
    MAX_EXPONENT,
};
pub use integrator::{
    integrate, integrate_backward, integrate_with, limit_point, state_at, IntegratorConfig,
    INITIAL_STEP, MIN_STEP,
};
pub use trajectory::{Diagnostics, Trajectory};
