//! Control templates: representation, normalization, isometries,
//! certification and randomized search.

mod certify;
mod isometry;
mod poly;
mod search;

pub use certify::{certify_template, CertificationReport, GridParams, GridSummary, Witness, WitnessKind};
pub use isometry::{
    haar_orthogonal, isometry_from, isometry_update, operator_norm, orthogonal_samples, orthogonality_defect,
    orthonormalize,
};
pub use poly::{normalize_template, ControlTemplate, PolyInput};
pub use search::{search_template, SearchOutcome, SearchParams};
