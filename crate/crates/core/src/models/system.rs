use nalgebra::{DMatrix, DVector};

use super::Expr;
use crate::error::{LabError, Result};
use crate::jets::{Dual, Scalar};

/// Analytic control system `ẋ = f(x, u)`, `y = h(x)` with a state feedback
/// `λ` and an optional Lyapunov function `V`.
///
/// All maps are expression trees, so they evaluate on any [`Scalar`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    name: String,
    n: usize,
    p: usize,
    f: Vec<Expr>,
    h: Vec<Expr>,
    lambda: Vec<Expr>,
    lyapunov: Option<Expr>,
}

impl SystemModel {
    pub fn new(name: &str, n: usize, p: usize, f: Vec<Expr>, h: Vec<Expr>, lambda: Vec<Expr>) -> Result<Self> {
        if n == 0 || p == 0 || h.is_empty() {
            return Err(LabError::Dimension("n, p and m must all be positive".into()));
        }
        if f.len() != n {
            return Err(LabError::Dimension(format!("f has {} components, n = {n}", f.len())));
        }
        if lambda.len() != p {
            return Err(LabError::Dimension(format!("lambda has {} components, p = {p}", lambda.len())));
        }
        let check = |what: &str, e: &Expr, inputs_allowed: bool| -> Result<()> {
            let (xs, us) = e.max_indices();
            if xs.is_some_and(|i| i >= n) {
                return Err(LabError::Dimension(format!("{what} references x{} but n = {n}", xs.unwrap() + 1)));
            }
            match us {
                Some(i) if !inputs_allowed => {
                    Err(LabError::Dimension(format!("{what} must not depend on the input (found u{})", i + 1)))
                }
                Some(i) if i >= p => Err(LabError::Dimension(format!("{what} references u{} but p = {p}", i + 1))),
                _ => Ok(()),
            }
        };
        for e in &f {
            check("f", e, true)?;
        }
        for e in &h {
            check("h", e, false)?;
        }
        for e in &lambda {
            check("lambda", e, false)?;
        }
        Ok(Self { name: name.to_string(), n, p, f, h, lambda, lyapunov: None })
    }

    pub fn with_lyapunov(mut self, v: Expr) -> Result<Self> {
        let (xs, us) = v.max_indices();
        if xs.is_some_and(|i| i >= self.n) || us.is_some() {
            return Err(LabError::Dimension("Lyapunov function must depend on the state only".into()));
        }
        self.lyapunov = Some(v);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.h.len()
    }

    pub fn f<S: Scalar>(&self, x: &[S], u: &[S]) -> Vec<S> {
        self.f.iter().map(|e| e.eval(x, u)).collect()
    }

    pub fn h<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.h.iter().map(|e| e.eval(x, &[])).collect()
    }

    pub fn lambda<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.lambda.iter().map(|e| e.eval(x, &[])).collect()
    }

    pub fn has_lyapunov(&self) -> bool {
        self.lyapunov.is_some()
    }

    /// `V(x)` and its gradient.
    pub fn lyapunov(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let v = self.lyapunov.as_ref()?;
        let xd: Vec<Dual> = x.iter().enumerate().map(|(i, xi)| Dual::variable(*xi, i, self.n)).collect();
        let val = v.eval(&xd, &[]);
        Some((val.value, (0..self.n).map(|i| val.partial(i)).collect()))
    }

    /// Checks `f(0, 0) = 0`, `h(0) = 0` and `λ(0) = 0` within `tol`.
    pub fn check_normalization(&self, tol: f64) -> Result<()> {
        let zx = vec![0.0; self.n];
        let zu = vec![0.0; self.p];
        let bad = |what: &str, v: Vec<f64>| -> Result<()> {
            if v.iter().any(|c| !(c.abs() <= tol)) {
                return Err(LabError::Config(format!("{what} does not vanish at the origin: {v:?}")));
            }
            Ok(())
        };
        bad("f(0, 0)", self.f(&zx, &zu))?;
        bad("h(0)", self.h(&zx))?;
        bad("lambda(0)", self.lambda(&zx))
    }

    /// Jacobians `(∂f/∂x, ∂f/∂u, ∂h/∂x, ∂λ/∂x)` at the origin.
    pub fn linearization(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let width = self.n + self.p;
        let xd: Vec<Dual> = (0..self.n).map(|i| Dual::variable(0.0, i, width)).collect();
        let ud: Vec<Dual> = (0..self.p).map(|i| Dual::variable(0.0, self.n + i, width)).collect();
        let fx = self.f(&xd, &ud);
        let hx = self.h(&xd);
        let lx = self.lambda(&xd);
        let a = DMatrix::from_fn(self.n, self.n, |i, j| fx[i].partial(j));
        let b = DMatrix::from_fn(self.n, self.p, |i, j| fx[i].partial(self.n + j));
        let c = DMatrix::from_fn(self.m(), self.n, |i, j| hx[i].partial(j));
        let k = DMatrix::from_fn(self.p, self.n, |i, j| lx[i].partial(j));
        (a, b, c, k)
    }

    /// Quadratic Lyapunov function `xᵀPx` of the linearized closed loop,
    /// `A_clᵀP + PA_cl = -I`. `None` when the linear system is singular.
    pub fn quadratic_lyapunov(&self) -> Option<Expr> {
        let (a, b, _, k) = self.linearization();
        let acl = &a + &b * &k;
        let n = self.n;
        let eye = DMatrix::<f64>::identity(n, n);
        // vec(AᵀP + PA) = (I ⊗ Aᵀ + Aᵀ ⊗ I) vec(P), column-major vec.
        let at = acl.transpose();
        let op = eye.kronecker(&at) + at.kronecker(&eye);
        let rhs = DVector::from_iterator(n * n, (-&eye).iter().copied());
        let sol = op.lu().solve(&rhs)?;
        let pm = DMatrix::from_column_slice(n, n, sol.as_slice());
        let pm = (&pm + pm.transpose()) * 0.5;
        let mut terms: Option<Expr> = None;
        for i in 0..n {
            for j in 0..n {
                let c = pm[(i, j)];
                if c == 0.0 {
                    continue;
                }
                let t = Expr::constant(c) * Expr::state(i) * Expr::state(j);
                terms = Some(match terms {
                    None => t,
                    Some(acc) => acc + t,
                });
            }
        }
        Some(terms.unwrap_or(Expr::constant(0.0)))
    }
}
