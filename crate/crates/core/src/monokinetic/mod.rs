//! Zero-range continuum limits: expansion coefficients and their checks,
//! mono-kinetic fields in one and two dimensions, and line chains.

mod coefficients;
mod expansion;
mod field1d;
mod line;
mod polar;

pub use coefficients::{coeff_b_kernel, coeff_line, coeff_rank};
pub use expansion::{
    expansion_check, expansion_line, expansion_line_rank, expansion_space, log_log_slope, ExpansionKind,
    ExpansionResult, LineProblem, LineRankProblem, SpaceProblem,
};
pub use field1d::{
    fourier_mode, measured_phase_speed, pde_rhs_1d, pde_run_1d, pde_step_1d, pde_step_1d_with_cfl,
    transverse_wave, FieldDerivative, FieldParams, MonokineticField1D, DEFAULT_CFL, RHO_FLOOR_REL,
};
pub use line::{
    line_rhs, step_chain, traveling_curve, ArcCurve, ChainBoundary, ChainDerivative, LineChain, LineParams,
    TravelingCurve, DEGENERATE_STRETCH,
};
pub use polar::{annulus_profile, CORE_DENSITY_REL, polar_residual, polar_rhs, polar_rotating_state, PolarField2D, PolarGrid, PolarResidual};
