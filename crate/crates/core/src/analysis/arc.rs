use serde::{Deserialize, Serialize};

use super::{fit_rate, DecayFit, FitWindow};
use crate::hybrid::{HybridArc, LoopVariant};
use crate::jets::cal_h;
use crate::models::{norm, CompactSpec, SystemModel};
use crate::template::ControlTemplate;

/// `(t, |x|)` at every recorded sample.
pub fn state_norms(arc: &HybridArc) -> Vec<(f64, f64)> {
    arc.samples().map(|s| (s.t, norm(&s.state.x))).collect()
}

/// `(t, |z − 𝓗_q(x, s, μRv*)|)` at every recorded sample; empty for loops
/// without an observer. A non-finite stack gives an infinite error.
pub fn estimation_error(arc: &HybridArc, system: &SystemModel, template: &ControlTemplate) -> Vec<(f64, f64)> {
    let Some(q) = arc.q else {
        return Vec::new();
    };
    arc.samples()
        .map(|s| {
            let st = &s.state;
            let e = match cal_h(system, &st.x, st.s, template, st.mu, &st.r, q) {
                Ok(stack) => norm(&st.z.iter().zip(&stack.values).map(|(a, b)| a - b).collect::<Vec<_>>()),
                Err(_) => f64::INFINITY,
            };
            (s.t, e)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    pub contained: bool,
    /// Largest per-axis excursion relative to the outer box half-widths; 1
    /// is the boundary.
    pub max_excursion: f64,
    pub first_escape: Option<f64>,
}

/// Whether `x` stays in the outer box along the arc.
pub fn containment(arc: &HybridArc, spec: &CompactSpec) -> Containment {
    let mut max_excursion: f64 = 0.0;
    let mut first_escape = None;
    for s in arc.samples() {
        let e = spec.outer.relative_excursion(&s.state.x);
        max_excursion = max_excursion.max(e);
        if e > 1.0 && first_escape.is_none() {
            first_escape = Some(s.t);
        }
    }
    if first_escape.is_none() {
        first_escape = arc.flags.escape_time;
    }
    Containment { contained: first_escape.is_none(), max_excursion, first_escape }
}

/// `(t, V(x))` when the system carries a Lyapunov function.
pub fn lyapunov_trace(arc: &HybridArc, system: &SystemModel) -> Option<Vec<(f64, f64)>> {
    system.has_lyapunov().then(|| arc.samples().filter_map(|s| Some((s.t, system.lyapunov(&s.state.x)?.0))).collect())
}

/// Exponential fit over the second half of the arc with one envelope bin
/// per sampling period. `None` when the series vanishes on the window or
/// the window is too short.
pub fn fit_arc_series(series: &[(f64, f64)], arc: &HybridArc) -> (Option<DecayFit>, FitWindow) {
    let window = FitWindow::second_half(0.0, arc.last_sample().map_or(arc.t_end, |s| s.t), arc.delta);
    if series.iter().filter(|(t, _)| *t >= window.start && *t <= window.end).all(|(_, v)| *v == 0.0) {
        return (None, window);
    }
    (fit_rate(series, window).ok().filter(|f| f.nu.is_finite()), window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitWindows {
    pub x: FitWindow,
    pub e: Option<FitWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSummary {
    pub variant: LoopVariant,
    pub nu_x: Option<f64>,
    pub nu_e: Option<f64>,
    pub contained: bool,
    pub max_excursion: f64,
    pub first_escape: Option<f64>,
    pub clamp_events: usize,
    pub phi_failures: usize,
    pub fit_windows: FitWindows,
    pub final_x_norm: f64,
    pub initial_x_norm: f64,
}

pub fn summarize(arc: &HybridArc, spec: &CompactSpec, system: &SystemModel, template: &ControlTemplate) -> ArcSummary {
    let xs = state_norms(arc);
    let (fx, wx) = fit_arc_series(&xs, arc);
    let (nu_e, we) = if arc.q.is_some() {
        let es = estimation_error(arc, system, template);
        let (fe, we) = fit_arc_series(&es, arc);
        (fe.map(|f| f.nu), Some(we))
    } else {
        (None, None)
    };
    let c = containment(arc, spec);
    ArcSummary {
        variant: arc.variant,
        nu_x: fx.map(|f| f.nu),
        nu_e,
        contained: c.contained,
        max_excursion: c.max_excursion,
        first_escape: c.first_escape,
        clamp_events: arc.flags.clamp_events,
        phi_failures: arc.flags.phi_failures,
        fit_windows: FitWindows { x: wx, e: we },
        final_x_norm: xs.last().map_or(0.0, |v| v.1),
        initial_x_norm: xs.first().map_or(0.0, |v| v.1),
    }
}
