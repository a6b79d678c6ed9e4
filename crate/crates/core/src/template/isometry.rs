//! Orthogonal matrices aligning the first basis vector with a given input.
//!
//! `𝓡₀(u)` is the set of `R ∈ O(p)` with `R (|u|, 0, …, 0)ᵀ = u`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Below this norm the in-plane complement of two directions is treated as
/// zero (collinear inputs).
const COLLINEAR_TOL: f64 = 1e-12;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Member of `𝓡₀(u0)`: identity when `u0` is zero or already along `e₁`,
/// otherwise a Householder reflection mapping `e₁` onto `u0 / |u0|`.
pub fn isometry_from(u0: &[f64]) -> DMatrix<f64> {
    let p = u0.len();
    let r = norm(u0);
    let eye = DMatrix::identity(p, p);
    if r == 0.0 {
        return eye;
    }
    let w: Vec<f64> = u0.iter().map(|x| x / r).collect();
    if w[0] == 1.0 && w[1..].iter().all(|x| *x == 0.0) {
        return eye;
    }
    if w[0] <= 0.0 {
        // H = I - 2vvᵀ/|v|², v = e₁ - w, swaps e₁ and w.
        let mut v = w.iter().map(|x| -x).collect::<Vec<_>>();
        v[0] += 1.0;
        householder(&v)
    } else {
        // v = e₁ + w avoids cancellation; H e₁ = -w, so flip the first column.
        let mut v = w.clone();
        v[0] += 1.0;
        let mut h = householder(&v);
        h.column_mut(0).neg_mut();
        h
    }
}

fn householder(v: &[f64]) -> DMatrix<f64> {
    let p = v.len();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    DMatrix::from_fn(p, p, |i, j| f64::from(u8::from(i == j)) - 2.0 * v[i] * v[j] / vv)
}

/// Member of `𝓡₀(u_new)` close to `r_prev ∈ 𝓡₀(u_prev)`:
/// `‖ |u_prev| r_prev − |u_new| r_new ‖ ≤ |u_prev − u_new|`.
///
/// For two non-zero inputs the update is the planar rotation taking
/// `u_prev/|u_prev|` to `u_new/|u_new|` in the plane they span, applied on the
/// left of `r_prev`.
pub fn isometry_update(u_prev: &[f64], r_prev: &DMatrix<f64>, u_new: &[f64]) -> DMatrix<f64> {
    let p = u_new.len();
    let (na, nb) = (norm(u_prev), norm(u_new));
    if nb == 0.0 {
        return r_prev.clone();
    }
    if na == 0.0 {
        return isometry_from(u_new);
    }
    if p == 1 {
        return DMatrix::from_element(1, 1, u_new[0].signum());
    }
    let a = DVector::from_iterator(p, u_prev.iter().map(|x| x / na));
    let b = DVector::from_iterator(p, u_new.iter().map(|x| x / nb));
    let cos = a.dot(&b).clamp(-1.0, 1.0);
    let perp = &b - &a * cos;
    let perp_norm = perp.norm();
    let (w2, sin) = if perp_norm > COLLINEAR_TOL {
        (&perp / perp_norm, perp_norm)
    } else if cos > 0.0 {
        return r_prev.clone();
    } else {
        (completing_direction(&a), 0.0)
    };
    let cos = if perp_norm > COLLINEAR_TOL { cos } else { -1.0 };
    let w1 = a;
    // G = I + (cosψ − 1)(w1w1ᵀ + w2w2ᵀ) + sinψ (w2w1ᵀ − w1w2ᵀ)
    let plane = &w1 * w1.transpose() + &w2 * w2.transpose();
    let skew = &w2 * w1.transpose() - &w1 * w2.transpose();
    let g = DMatrix::identity(p, p) + plane * (cos - 1.0) + skew * sin;
    orthonormalize(&(g * r_prev))
}

/// Unit vector orthogonal to `a` (p ≥ 2).
fn completing_direction(a: &DVector<f64>) -> DVector<f64> {
    // Coordinate axis least aligned with a, then Gram–Schmidt.
    let k = (0..a.len())
        .min_by(|&i, &j| a[i].abs().partial_cmp(&a[j].abs()).unwrap())
        .unwrap_or(0);
    let mut e = DVector::zeros(a.len());
    e[k] = 1.0;
    let v = &e - a * a.dot(&e);
    let n = v.norm();
    v / n
}

/// Nearest orthogonal matrix (polar factor).
pub fn orthonormalize(r: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = r.clone().svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => u * vt,
        _ => r.clone(),
    }
}

/// `max |RᵀR − I|`.
pub fn orthogonality_defect(r: &DMatrix<f64>) -> f64 {
    let d = r.transpose() * r - DMatrix::identity(r.ncols(), r.ncols());
    d.amax()
}

/// Operator 2-norm.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    a.clone().singular_values().max()
}

/// Deterministic sample of `O(p)`.
///
/// * `p = 1`: `{+1, −1}`.
/// * `p = 2`: `structured` rotations by `2πk/structured` and the same
///   rotations composed with a reflection, plus `random` Haar draws.
/// * `p ≥ 3`: `±I`, plus `random` Haar draws.
///
/// Haar draws orthogonalize a Gaussian matrix by QR with the sign of the
/// diagonal of `R` absorbed into `Q`.
pub fn orthogonal_samples(p: usize, structured: usize, random: usize, seed: u64) -> Vec<DMatrix<f64>> {
    if p == 1 {
        return vec![DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, -1.0)];
    }
    let mut out = Vec::new();
    if p == 2 {
        let count = structured.max(1);
        for k in 0..count {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            let (s, c) = ang.sin_cos();
            out.push(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]));
            out.push(DMatrix::from_row_slice(2, 2, &[c, s, s, -c]));
        }
    } else {
        out.push(DMatrix::identity(p, p));
        out.push(-DMatrix::<f64>::identity(p, p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        out.push(haar_orthogonal(p, &mut rng));
    }
    out
}

pub fn haar_orthogonal(p: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}
