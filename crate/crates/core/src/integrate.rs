//! Classical fixed-step Runge–Kutta.

fn axpy(y: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One RK4 step of `ẏ = rhs(t, y)`.
pub fn rk4_step(rhs: &mut impl FnMut(f64, &[f64]) -> Vec<f64>, t: f64, y: &[f64], h: f64) -> Vec<f64> {
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, &k1, 0.5 * h));
    let k3 = rhs(t + 0.5 * h, &axpy(y, &k2, 0.5 * h));
    let k4 = rhs(t + h, &axpy(y, &k3, h));
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Step sizes covering `[t0, t1]` with steps of at most `h`; the last one
/// is shortened so the grid lands exactly on `t1`.
pub fn aligned_steps(t0: f64, t1: f64, h: f64) -> Vec<f64> {
    let span = t1 - t0;
    if span <= 0.0 {
        return Vec::new();
    }
    let full = (span / h).floor() as usize;
    let mut steps = vec![h; full];
    let rest = span - full as f64 * h;
    // Drop slivers left by rounding in span / h.
    if rest > 1e-12 * h.max(span) {
        steps.push(rest);
    } else if full == 0 {
        steps.push(span);
    }
    steps
}

/// Integrates over `[t0, t1]` and returns `(t, y)` at every step, including
/// the initial point. Stops early on a non-finite state.
pub fn integrate(
    mut rhs: impl FnMut(f64, &[f64]) -> Vec<f64>,
    t0: f64,
    y0: &[f64],
    t1: f64,
    h: f64,
) -> Vec<(f64, Vec<f64>)> {
    let mut out = vec![(t0, y0.to_vec())];
    let mut t = t0;
    let mut y = y0.to_vec();
    let steps = aligned_steps(t0, t1, h);
    let last = steps.len();
    for (k, dt) in steps.into_iter().enumerate() {
        y = rk4_step(&mut rhs, t, &y, dt);
        t = if k + 1 == last { t1 } else { t + dt };
        let finite = y.iter().all(|v| v.is_finite());
        out.push((t, y.clone()));
        if !finite {
            break;
        }
    }
    out
}
