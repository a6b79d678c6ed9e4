//! Post-hoc diagnostics on simulated arcs.

mod arc;
mod fit;

pub use arc::{
    containment, estimation_error, fit_arc_series, lyapunov_trace, state_norms, summarize, ArcSummary, Containment,
    FitWindows,
};
pub use fit::{fit_rate, peak_envelope, DecayFit, FitWindow, MIN_FIT_SAMPLES};
