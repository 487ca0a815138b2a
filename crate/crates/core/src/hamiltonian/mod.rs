//! Hamiltonian systems on `ℝⁿ* × ℝⁿ`: flows, variational flows, Jacobi curves,
//! reduction by the energy level, canonical connections and field curvature.
//!
//! The Hamiltonian field is `H⃗ = (−H_y, H_x)` in the `z = (x, y)` layout, and the
//! Jacobi curve at `z0` is `t ↦ Γ(0, t)⁻¹ · vertical`.

mod connection;
mod flow;
mod poly;
mod reduce;
mod system;

pub use connection::{
    connection_hamiltonian, connection_identity_residual, connection_ode2, curvature_operator_field,
    hamiltonian_identity_residual, monotonicity_test, poisson_hxx, LegendreReport, PolynomialField, SecondOrderField,
    REGULARITY_TOL,
};
pub use flow::{flow, jacobi_curve, variational_flow, Trajectory, VariationalFlow, BLOWUP_CAP, FLOW_FD_FLOOR};
pub use poly::Polynomial;
pub use reduce::{reduced_jacobi_curve, CurvatureGap, LineReduction, ReducedJacobiCurve, TANGENT_TOL};
pub use system::{
    phase_point, Family, Hamiltonian, HamiltonianSystem, Metric, Natural, Pendulum, PolynomialHamiltonian, Potential,
    THIRD_FD_STEP,
};
