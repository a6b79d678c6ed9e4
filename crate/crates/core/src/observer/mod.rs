//! High-gain observer in the output-derivative coordinates and the numerical
//! left inverse `φ` of `𝓗_q`.

mod config;
mod phi;
mod rhs;

pub use config::{hurwitz_gains, is_hurwitz, max_root_real_part, ObserverConfig};
pub use phi::{phi_invert, PhiProblem, PhiResult, PHI_GRADIENT_TOL, PHI_MAX_ITERATIONS, PHI_RESIDUAL_TOL};
pub use rhs::{observer_rhs, simulate_observer, ObserverRun, ObserverSample};
