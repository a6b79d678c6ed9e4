//! Taylor-jet arithmetic and the output-derivative maps built on it.

mod dual;
mod jet;
mod observability;
mod scalar;

pub use dual::Dual;
pub use jet::{binomial, Jet, VecJet};
pub use observability::{
    cal_h, cal_h_jacobian, cal_h_with_jacobian, hk, output_jet, scaled_input_jet, ConstantInput, InputSignal,
    ObservabilityStack, MAX_JET_ORDER,
};
pub use scalar::Scalar;
