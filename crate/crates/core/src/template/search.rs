use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{certify_template, normalize_template, CertificationReport, ControlTemplate, GridParams, PolyInput};
use crate::error::{LabError, Result};
use crate::models::{CompactSpec, SystemModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    /// Polynomial degree of the perturbed candidates.
    pub degree: usize,
    /// Total candidates including the base (attempt 0).
    pub attempts: usize,
    pub seed: u64,
    /// Half-width of the uniform coefficient noise at attempt 1.
    pub radius: f64,
    /// The half-width decreases linearly to `radius * final_fraction`.
    pub final_fraction: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self { degree: 2, attempts: 100, seed: 0, radius: 1.0, final_fraction: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found { template: ControlTemplate, report: CertificationReport, attempt: usize },
    Failed { best: ControlTemplate, report: CertificationReport, attempts: usize },
}

impl SearchOutcome {
    pub fn template(&self) -> &ControlTemplate {
        match self {
            SearchOutcome::Found { template, .. } => template,
            SearchOutcome::Failed { best, .. } => best,
        }
    }

    pub fn report(&self) -> &CertificationReport {
        match self {
            SearchOutcome::Found { report, .. } | SearchOutcome::Failed { report, .. } => report,
        }
    }

    pub fn found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }
}

/// Randomized search for a certified template near `base`.
///
/// Attempt 0 certifies `base` itself. Each later attempt adds uniform noise to
/// every normalized-time coefficient of `base` (padded to `degree`),
/// renormalizes so that `v*(0) = e₁` and certifies. The first certified
/// candidate is returned; otherwise the candidate with the best
/// `(rho2, rho1)` margins.
pub fn search_template(
    system: &SystemModel,
    spec: &CompactSpec,
    base: &ControlTemplate,
    q: usize,
    grid: &GridParams,
    params: &SearchParams,
) -> Result<SearchOutcome> {
    if params.attempts == 0 {
        return Err(LabError::Config("search needs at least one attempt".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(ControlTemplate, CertificationReport)> = None;
    for attempt in 0..params.attempts {
        let candidate = if attempt == 0 {
            base.clone()
        } else {
            let frac = if params.attempts > 2 { (attempt - 1) as f64 / (params.attempts - 2) as f64 } else { 0.0 };
            let radius = params.radius * (1.0 - frac * (1.0 - params.final_fraction));
            let coeffs = base
                .coeffs()
                .iter()
                .map(|poly| {
                    (0..=params.degree.max(poly.len() - 1))
                        .map(|j| poly.get(j).copied().unwrap_or(0.0) + rng.random_range(-radius..=radius))
                        .collect()
                })
                .collect();
            match normalize_template(&PolyInput::new(base.horizon(), coeffs)?) {
                Ok(t) => t,
                Err(LabError::ZeroTemplate) => continue,
                Err(e) => return Err(e),
            }
        };
        let report = certify_template(system, spec, &candidate, q, grid)?;
        if report.passed {
            let mut template = candidate;
            template.order = Some(q);
            return Ok(SearchOutcome::Found { template, report, attempt });
        }
        let better = best.as_ref().is_none_or(|(_, b)| report.margin_key() > b.margin_key());
        if better {
            best = Some((candidate, report));
        }
    }
    let (best, report) = best.expect("at least one candidate certified");
    Ok(SearchOutcome::Failed { best, report, attempts: params.attempts })
}
