//! Excited-state amplitude C₁(t): Laplace-domain residue solution, direct
//! time-integration oracle, reduced density matrix and time-local rates.

pub mod cubic;
pub mod oracle;
pub mod state;
pub mod trace;

pub use cubic::{solve_cubic, CubicRoots};
pub use oracle::{amplitude_oracle, OracleMode, OracleTrace};
pub use state::{decay_and_shift, density_matrix, trace_distance_between, QubitState, Rates};
pub use trace::{amplitude_analytic, amplitude_analytic_refined, analytic_model, uniform_grid, AmplitudeTrace, ExponentialSum};
