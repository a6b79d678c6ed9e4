//! Run configuration: a TOML file with typed sections. Unknown keys are
//! rejected.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hybrid::{HybridState, IntegratorParams, LoopVariant};
use crate::models::{builtin_system, BoxSet, CompactSpec, Expr, SystemModel};
use crate::observer::{hurwitz_gains, ObserverConfig};
use crate::template::{normalize_template, ControlTemplate, GridParams, PolyInput, SearchParams};

/// A scalar or a list of scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub builtin: Option<String>,
    pub name: Option<String>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub f: Option<Vec<String>>,
    pub h: Option<Vec<String>>,
    pub lambda: Option<Vec<String>>,
    pub lyapunov: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecSection {
    pub inner: Option<BoxSection>,
    pub outer: Option<BoxSection>,
    pub lambda_bar: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSection {
    /// Per-channel polynomial coefficients in normalized time `t / T`.
    pub coeffs: Option<Vec<Vec<f64>>>,
    pub horizon: Option<f64>,
    /// Rescale and rotate `coeffs` so that the template starts at `e₁`.
    #[serde(default)]
    pub normalize: bool,
    pub search: Option<SearchParams>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSection {
    pub q: Option<usize>,
    pub gains: Option<Vec<f64>>,
    pub theta: Option<OneOrMany>,
    pub delta: Option<OneOrMany>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub step: Option<f64>,
    pub stride: Option<usize>,
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub x: Option<Vec<f64>>,
    pub z: Option<Vec<f64>>,
    pub s: Option<f64>,
    pub mu: Option<f64>,
    /// Row-major `p × p`.
    pub r: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Replaces the seeds of the certification grid and the search.
    pub seed: Option<u64>,
    /// Loop simulated by `simulate`.
    pub variant: Option<LoopVariant>,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub spec: SpecSection,
    #[serde(default)]
    pub template: TemplateSection,
    #[serde(default)]
    pub observer: ObserverSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub init: InitSection,
    pub certify: Option<GridParams>,
    #[serde(default)]
    pub outputs: OutputsSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            LabError::Config(msg) => LabError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// Fully validated run, ready for the numerics.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub system: SystemModel,
    pub spec: CompactSpec,
    pub template: ControlTemplate,
    pub q: usize,
    pub gains: Vec<f64>,
    pub thetas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub integrator: IntegratorParams,
    pub t_end: f64,
    pub init: HybridState,
    pub grid: GridParams,
    pub search: SearchParams,
    pub seed: u64,
    pub variant: LoopVariant,
    pub bad_input: Option<Vec<f64>>,
}

impl Resolved {
    pub fn observer(&self, theta: f64, delta: f64) -> Result<ObserverConfig> {
        ObserverConfig::new(self.q, self.gains.clone(), theta, delta)
    }

    /// The single `(θ, Δ)` pair for commands that do not sweep.
    pub fn single_observer(&self) -> Result<ObserverConfig> {
        if self.thetas.len() != 1 || self.deltas.len() != 1 {
            return Err(LabError::Config("theta and delta must be single values here; use `sweep` for lists".into()));
        }
        self.observer(self.thetas[0], self.deltas[0])
    }

    /// Initial state with the timer clipped to `[0, Δ]`.
    pub fn init_for(&self, delta: f64, with_observer: bool) -> HybridState {
        let mut s = self.init.clone();
        s.s = s.s.min(delta);
        if !with_observer {
            s.z.clear();
        }
        s
    }
}

fn parse_exprs(src: &Option<Vec<String>>, what: &str) -> Result<Vec<Expr>> {
    src.as_ref()
        .ok_or_else(|| LabError::Config(format!("inline system needs `{what}`")))?
        .iter()
        .map(|s| Expr::parse(s))
        .collect()
}

fn box_of(b: &BoxSection) -> Result<BoxSet> {
    BoxSet::new(b.lo.clone(), b.hi.clone())
}

pub fn resolve(cfg: &RunConfig, seed_override: Option<u64>) -> Result<Resolved> {
    let sys = &cfg.system;
    let builtin = match &sys.builtin {
        Some(name) => {
            let inline = sys.name.is_some() || sys.n.is_some() || sys.p.is_some() || sys.f.is_some();
            if inline || sys.h.is_some() || sys.lambda.is_some() || sys.lyapunov.is_some() {
                return Err(LabError::Config("give either `system.builtin` or an inline system, not both".into()));
            }
            Some(builtin_system(name)?)
        }
        None => None,
    };
    let system = match &builtin {
        Some(inst) => inst.system.clone(),
        None => {
            let (Some(n), Some(p)) = (sys.n, sys.p) else {
                return Err(LabError::Config("inline system needs `n` and `p` (or use `builtin`)".into()));
            };
            let model = SystemModel::new(
                sys.name.as_deref().unwrap_or("custom"),
                n,
                p,
                parse_exprs(&sys.f, "f")?,
                parse_exprs(&sys.h, "h")?,
                parse_exprs(&sys.lambda, "lambda")?,
            )?;
            match &sys.lyapunov {
                Some(v) => model.with_lyapunov(Expr::parse(v)?)?,
                None => match model.quadratic_lyapunov() {
                    Some(v) => model.clone().with_lyapunov(v).unwrap_or(model),
                    None => model,
                },
            }
        }
    };
    system.check_normalization(1e-12)?;
    let (n, p, m) = (system.n(), system.p(), system.m());

    let spec = match (&cfg.spec.inner, &cfg.spec.outer, &builtin) {
        (None, None, Some(inst)) => match cfg.spec.lambda_bar {
            Some(l) => CompactSpec::with_lambda_bar(inst.spec.inner.clone(), inst.spec.outer.clone(), l)?,
            None => inst.spec.clone(),
        },
        (Some(inner), Some(outer), _) => match cfg.spec.lambda_bar {
            Some(l) => CompactSpec::with_lambda_bar(box_of(inner)?, box_of(outer)?, l)?,
            None => CompactSpec::new(&system, box_of(inner)?, box_of(outer)?)?,
        },
        _ => return Err(LabError::Config("`spec` needs both `inner` and `outer` boxes".into())),
    };
    if spec.n() != n {
        return Err(LabError::Config(format!("spec boxes have dimension {}, system has n = {n}", spec.n())));
    }

    let rec = builtin.as_ref().map(|b| &b.recommended);
    let tpl_cfg = &cfg.template;
    let horizon = tpl_cfg.horizon.or(rec.map(|r| r.horizon)).unwrap_or(1.0);
    let template = match (&tpl_cfg.coeffs, rec) {
        (Some(coeffs), _) => {
            let poly = PolyInput::new(horizon, coeffs.clone())?;
            if tpl_cfg.normalize {
                normalize_template(&poly)?
            } else {
                ControlTemplate::new(poly)?
            }
        }
        (None, Some(r)) => ControlTemplate::new(PolyInput::new(horizon, r.template.clone())?)?,
        (None, None) => ControlTemplate::constant(p, horizon)?,
    };
    if template.p() != p {
        return Err(LabError::Config(format!("template has {} channels, system has p = {p}", template.p())));
    }

    let obs = &cfg.observer;
    let q = obs
        .q
        .or(rec.map(|r| r.q))
        .ok_or_else(|| LabError::Config("`observer.q` is required for inline systems".into()))?;
    if m * (q + 1) < n {
        return Err(LabError::Config(format!("m(q+1) = {} < n = {n}", m * (q + 1))));
    }
    let gains = obs.gains.clone().unwrap_or_else(|| hurwitz_gains(q));
    let thetas = obs
        .theta
        .as_ref()
        .map(OneOrMany::values)
        .or(rec.map(|r| vec![r.theta]))
        .ok_or_else(|| LabError::Config("`observer.theta` is required for inline systems".into()))?;
    let deltas = obs
        .delta
        .as_ref()
        .map(OneOrMany::values)
        .or(rec.map(|r| vec![r.delta]))
        .ok_or_else(|| LabError::Config("`observer.delta` is required for inline systems".into()))?;
    if thetas.is_empty() || deltas.is_empty() {
        return Err(LabError::Config("theta and delta lists must not be empty".into()));
    }
    for &theta in &thetas {
        for &delta in &deltas {
            ObserverConfig::new(q, gains.clone(), theta, delta)?.check_horizon(template.horizon())?;
        }
    }

    let theta_max = thetas.iter().copied().fold(1.0, f64::max);
    let integrator = IntegratorParams {
        step: cfg.integrator.step.unwrap_or(0.05 / theta_max),
        stride: cfg.integrator.stride.unwrap_or(10),
    };
    integrator.validate()?;
    if integrator.step > 0.1 / theta_max {
        log::warn!("integrator step {} exceeds 0.1/θ = {} for the observer", integrator.step, 0.1 / theta_max);
    }
    let t_end = cfg.integrator.t_end.unwrap_or(10.0);
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(LabError::Config(format!("t_end must be positive, got {t_end}")));
    }

    let init = &cfg.init;
    let x = init.x.clone().ok_or_else(|| LabError::Config("`init.x` is required".into()))?;
    if x.len() != n {
        return Err(LabError::Config(format!("init.x has length {}, expected {n}", x.len())));
    }
    let z = init.z.clone().unwrap_or_else(|| vec![0.0; m * (q + 1)]);
    if z.len() != m * (q + 1) {
        return Err(LabError::Config(format!("init.z has length {}, expected {}", z.len(), m * (q + 1))));
    }
    let r = match &init.r {
        Some(flat) if flat.len() == p * p => DMatrix::from_row_slice(p, p, flat),
        Some(flat) => return Err(LabError::Config(format!("init.r has {} entries, expected {}", flat.len(), p * p))),
        None => DMatrix::identity(p, p),
    };
    if crate::template::orthogonality_defect(&r) > 1e-9 {
        return Err(LabError::Config("init.r is not orthogonal".into()));
    }
    let s = init.s.unwrap_or(0.0);
    let delta_min = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    if !(0.0..=delta_min).contains(&s) {
        return Err(LabError::Config(format!("init.s = {s} must lie in [0, Δ]")));
    }
    let mu = init.mu.unwrap_or(0.0);
    if !(0.0..=spec.lambda_bar).contains(&mu) {
        return Err(LabError::Config(format!("init.mu = {mu} must lie in [0, λ̄ = {}]", spec.lambda_bar)));
    }
    let state = HybridState { x, z, s, mu, r };

    let seed = seed_override.or(cfg.seed).unwrap_or(0);
    let mut grid = cfg.certify.clone().unwrap_or_default();
    grid.seed = seed;
    let mut search = tpl_cfg.search.clone().unwrap_or_default();
    search.seed = seed;

    Ok(Resolved {
        system,
        spec,
        template,
        q,
        gains,
        thetas,
        deltas,
        integrator,
        t_end,
        init: state,
        grid,
        search,
        seed,
        variant: cfg.variant.unwrap_or(LoopVariant::Templated),
        bad_input: builtin.and_then(|b| b.bad_input),
    })
}
