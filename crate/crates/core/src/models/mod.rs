//! System descriptions, working compacts, saturation and benchmarks.

mod builtin;
mod compact;
mod expr;
mod les;
mod sat;
mod system;

pub use builtin::{builtin_system, BuiltinInstance, Recommended, BUILTIN_NAMES};
pub use compact::{default_lambda_grid, lambda_grid_max, linspace, tensor, BoxSet, CompactSpec, LAMBDA_BAR_MARGIN};
pub use expr::Expr;
pub use les::{verify_state_feedback_les, LesReport, LesTrajectory};
pub(crate) use les::norm;
pub use sat::SatMap;
pub use system::SystemModel;
