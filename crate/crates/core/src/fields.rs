//! Black-box C¹ vector fields and scalar functions on ℝⁿ.
//!
//! Evaluators must be pure; fields are cheap to clone (`Arc`-backed) and safe
//! to evaluate from several threads.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::geometry::GeometricStructure;

pub type VectorFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
pub type MatrixFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;
pub type RealFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;

/// Relative finite-difference step used when a field has no analytic Jacobian.
pub const FD_RELATIVE_STEP: f64 = 1e-6;

#[derive(Clone)]
pub struct NumericVectorField {
    dimension: usize,
    eval: Arc<VectorFn>,
    jacobian: Option<Arc<MatrixFn>>,
    label: String,
}

impl fmt::Debug for NumericVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericVectorField")
            .field("dimension", &self.dimension)
            .field("label", &self.label)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl NumericVectorField {
    pub fn new(
        dimension: usize,
        label: impl Into<String>,
        eval: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dimension,
            eval: Arc::new(eval),
            jacobian: None,
            label: label.into(),
        }
    }

    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Raw evaluation; no dimension or finiteness checks.
    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.eval)(x)
    }

    pub fn try_eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dimension, x.len())?;
        let y = (self.eval)(x);
        check_dim(self.dimension, y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!(
                "field '{}' at {:?}",
                self.label,
                x.as_slice()
            )));
        }
        Ok(y)
    }

    /// Analytic Jacobian when available, otherwise central differences with
    /// step `1e-6 · max(1, |xᵢ|)` per coordinate.
    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_dim(self.dimension, x.len())?;
        match &self.jacobian {
            Some(j) => {
                let m = j(x);
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteValue(format!(
                        "Jacobian of '{}' at {:?}",
                        self.label,
                        x.as_slice()
                    )));
                }
                Ok(m)
            }
            None => central_difference(self, x, |xi| FD_RELATIVE_STEP * xi.abs().max(1.0)),
        }
    }

    /// The field `x ↦ −X(x)`, whose flow is the time reversal of this one.
    pub fn reversed(&self) -> Self {
        let f = self.eval.clone();
        let mut out = Self::new(self.dimension, format!("-({})", self.label), move |x| -f(x));
        if let Some(j) = self.jacobian.clone() {
            out.jacobian = Some(Arc::new(move |x: &DVector<f64>| -j(x)));
        }
        out
    }

    /// `x ↦ M X(x)` for a constant matrix `M`.
    pub fn premultiplied(&self, m: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        check_dim(self.dimension, m.nrows())?;
        check_dim(self.dimension, m.ncols())?;
        let f = self.eval.clone();
        let m1 = m.clone();
        let mut out = Self::new(self.dimension, label, move |x| &m1 * f(x));
        if let Some(j) = self.jacobian.clone() {
            out.jacobian = Some(Arc::new(move |x: &DVector<f64>| &m * j(x)));
        }
        Ok(out)
    }
}

/// Central-difference Jacobian with a fixed step: column `i` is
/// `(X(x + h eᵢ) − X(x − h eᵢ)) / 2h`.
pub fn fd_jacobian(f: &NumericVectorField, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(format!("finite-difference step {h} must be > 0")));
    }
    check_dim(f.dimension(), x.len())?;
    central_difference(f, x, |_| h)
}

fn central_difference(
    f: &NumericVectorField,
    x: &DVector<f64>,
    step: impl Fn(f64) -> f64,
) -> Result<DMatrix<f64>> {
    let n = f.dimension();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.clone();
    for i in 0..n {
        let h = step(x[i]);
        xp[i] = x[i] + h;
        let fp = f.try_eval(&xp)?;
        xp[i] = x[i] - h;
        let fm = f.try_eval(&xp)?;
        xp[i] = x[i];
        jac.set_column(i, &((fp - fm) / (2.0 * h)));
    }
    Ok(jac)
}

/// Lotka–Volterra field `(αx − βxy, δxy − γy)`.
pub fn lotka_volterra(alpha: f64, beta: f64, gamma: f64, delta: f64) -> NumericVectorField {
    NumericVectorField::new(2, "lotka_volterra", move |v| {
        let (x, y) = (v[0], v[1]);
        DVector::from_vec(vec![alpha * x - beta * x * y, delta * x * y - gamma * y])
    })
    .with_jacobian(move |v| {
        let (x, y) = (v[0], v[1]);
        DMatrix::from_row_slice(2, 2, &[alpha - beta * y, -beta * x, delta * y, delta * x - gamma])
    })
}

/// Rikitake field `(−μx + yz, −μy + x(z − a), 1 − xy)`.
pub fn rikitake(mu: f64, a: f64) -> NumericVectorField {
    NumericVectorField::new(3, "rikitake", move |v| {
        let (x, y, z) = (v[0], v[1], v[2]);
        DVector::from_vec(vec![-mu * x + y * z, -mu * y + x * (z - a), 1.0 - x * y])
    })
    .with_jacobian(move |v| {
        let (x, y, z) = (v[0], v[1], v[2]);
        #[rustfmt::skip]
        let j = DMatrix::from_row_slice(3, 3, &[
            -mu, z, y,
            z - a, -mu, x,
            -y, -x, 0.0,
        ]);
        j
    })
}

pub fn linear_field(a: DMatrix<f64>) -> Result<NumericVectorField> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let n = a.nrows();
    let a2 = a.clone();
    Ok(NumericVectorField::new(n, "linear", move |x| &a * x).with_jacobian(move |_| a2.clone()))
}

/// A C¹ scalar function with its gradient.
#[derive(Clone)]
pub struct ScalarField {
    dimension: usize,
    value: Arc<RealFn>,
    gradient: Arc<VectorFn>,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dimension", &self.dimension)
            .field("label", &self.label)
            .finish()
    }
}

impl ScalarField {
    pub fn new(
        dimension: usize,
        label: impl Into<String>,
        value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dimension,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            label: label.into(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(x)
    }

    /// `N(x) = ‖x‖²`.
    pub fn norm_squared(n: usize) -> Self {
        Self::new(n, "norm2", |x| x.norm_squared(), |x| x * 2.0)
    }

    /// `F_b(x) = b(x, x) = xᵀ G x`, gradient `(G + Gᵀ) x`.
    pub fn quadratic_form(s: &GeometricStructure) -> Self {
        let g = s.gram().clone();
        let sym = &g + g.transpose();
        Self::new(s.dimension(), "quadratic_form", move |x| x.dot(&(&g * x)), move |x| &sym * x)
    }
}
