//! Pointwise numerical decomposition of black-box fields.
//!
//! For a point `x` the potentials are ray integrals of smooth integrands,
//!
//! ```text
//! H(x)  = ∫₀¹ xᵀ G X(tx) dt          ∇H(x)  = ∫₀¹ G X(tx) + t DX(tx)ᵀ Gᵀ x dt
//! H★(x) = ∫₀¹ X(tx)ᵀ G x dt          ∇H★(x) = ∫₀¹ Gᵀ X(tx) + t DX(tx)ᵀ G x dt
//! ```
//!
//! and the remainders are `u = X − B ∇H`, `u★ = X − B★ ∇H★`. Gradients come from
//! the differentiated integrand, never from differencing `H`.

pub mod quadrature;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::fields::{NumericVectorField, ScalarField};
use crate::geometry::{GeometricStructure, Side};

pub use quadrature::{integrate_unit, GaussLegendre, QuadratureConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointDecomposition {
    pub point: Vec<f64>,
    pub h: f64,
    pub h_star: f64,
    pub grad_h: Vec<f64>,
    pub grad_h_star: Vec<f64>,
    pub u: Vec<f64>,
    pub u_star: Vec<f64>,
    /// `|b(x, u(x))|`.
    pub orthogonality_residual: f64,
    /// `|b(u★(x), x)|`.
    pub orthogonality_residual_star: f64,
    /// `max(‖u + B∇H − X‖∞, ‖u★ + B★∇H★ − X‖∞)`.
    pub reconstruction_residual: f64,
}

/// Integrated quantities for both sides at one point.
struct RayIntegrals {
    h: f64,
    h_star: f64,
    grad_h: DVector<f64>,
    grad_h_star: DVector<f64>,
}

fn ray_integrals(
    s: &GeometricStructure,
    field: &NumericVectorField,
    x: &DVector<f64>,
    q: &QuadratureConfig,
    with_gradients: bool,
) -> Result<RayIntegrals> {
    let n = s.dimension();
    check_dim(n, field.dimension())?;
    check_dim(n, x.len())?;
    q.validate()?;
    let g = s.gram();
    let gt = g.transpose();
    if x.iter().all(|v| *v == 0.0) {
        // empty ray: H = 0 and ∇H(0) = G X(0)
        let x0 = field.try_eval(x)?;
        return Ok(RayIntegrals {
            h: 0.0,
            h_star: 0.0,
            grad_h: g * &x0,
            grad_h_star: &gt * &x0,
        });
    }
    let gtx = &gt * x; // σ(tx)/t = (Gᵀx)·X(tx)
    let gx = g * x; // σ★(tx)/t = (Gx)·X(tx)
    let dim = if with_gradients { 2 + 2 * n } else { 2 };
    let total = integrate_unit(q, dim, |t| {
        let xt = x * t;
        let y = field.try_eval(&xt)?;
        let mut out = DVector::zeros(dim);
        out[0] = gtx.dot(&y);
        out[1] = gx.dot(&y);
        if with_gradients {
            let jt = field.jacobian(&xt)?.transpose();
            let gr = g * &y + (&jt * &gtx) * t;
            let gl = &gt * &y + (&jt * &gx) * t;
            out.rows_mut(2, n).copy_from(&gr);
            out.rows_mut(2 + n, n).copy_from(&gl);
        }
        Ok(out)
    })?;
    Ok(RayIntegrals {
        h: total[0],
        h_star: total[1],
        grad_h: if with_gradients {
            total.rows(2, n).into_owned()
        } else {
            DVector::zeros(n)
        },
        grad_h_star: if with_gradients {
            total.rows(2 + n, n).into_owned()
        } else {
            DVector::zeros(n)
        },
    })
}

/// `H(x)` (right) or `H★(x)` (left).
pub fn eval_h(
    s: &GeometricStructure,
    field: &NumericVectorField,
    x: &DVector<f64>,
    q: &QuadratureConfig,
    side: Side,
) -> Result<f64> {
    let r = ray_integrals(s, field, x, q, false)?;
    Ok(match side {
        Side::Right => r.h,
        Side::Left => r.h_star,
    })
}

/// `∇H(x)` (right) or `∇H★(x)` (left).
pub fn eval_grad_h(
    s: &GeometricStructure,
    field: &NumericVectorField,
    x: &DVector<f64>,
    q: &QuadratureConfig,
    side: Side,
) -> Result<DVector<f64>> {
    let r = ray_integrals(s, field, x, q, true)?;
    Ok(match side {
        Side::Right => r.grad_h,
        Side::Left => r.grad_h_star,
    })
}

pub fn decompose_at(
    s: &GeometricStructure,
    field: &NumericVectorField,
    x: &DVector<f64>,
    q: &QuadratureConfig,
) -> Result<PointDecomposition> {
    let r = ray_integrals(s, field, x, q, true)?;
    let xv = field.try_eval(x)?;
    let gp = s.b_matrix() * &r.grad_h;
    let gp_star = s.b_star() * &r.grad_h_star;
    let u = &xv - &gp;
    let u_star = &xv - &gp_star;
    let recon = (&u + &gp - &xv).amax().max((&u_star + &gp_star - &xv).amax());
    Ok(PointDecomposition {
        point: x.as_slice().to_vec(),
        h: r.h,
        h_star: r.h_star,
        orthogonality_residual: s.eval_b(x, &u)?.abs(),
        orthogonality_residual_star: s.eval_b(&u_star, x)?.abs(),
        grad_h: r.grad_h.as_slice().to_vec(),
        grad_h_star: r.grad_h_star.as_slice().to_vec(),
        u: u.as_slice().to_vec(),
        u_star: u_star.as_slice().to_vec(),
        reconstruction_residual: recon,
    })
}

/// The gradient-like part `x ↦ B ∇H(x)` (right) or `x ↦ B★ ∇H★(x)` (left) as a field.
///
/// Evaluation failures surface as NaN components, which the integrators reject.
pub fn gradient_part(
    s: &GeometricStructure,
    field: &NumericVectorField,
    q: QuadratureConfig,
    side: Side,
) -> NumericVectorField {
    let s2 = s.clone();
    let f = field.clone();
    let n = s.dimension();
    let m: DMatrix<f64> = s.gradient_map(side).clone();
    NumericVectorField::new(n, format!("gradient part of {}", field.label()), move |x| {
        match eval_grad_h(&s2, &f, x, &q, side) {
            Ok(g) => &m * g,
            Err(_) => DVector::from_element(n, f64::NAN),
        }
    })
}

/// The remainder `u` (right) or `u★` (left) as a field.
pub fn rotational_part(
    s: &GeometricStructure,
    field: &NumericVectorField,
    q: QuadratureConfig,
    side: Side,
) -> NumericVectorField {
    let s2 = s.clone();
    let f = field.clone();
    let n = s.dimension();
    let m: DMatrix<f64> = s.gradient_map(side).clone();
    NumericVectorField::new(n, format!("rotational part of {}", field.label()), move |x| {
        match eval_grad_h(&s2, &f, x, &q, side) {
            Ok(g) => f.eval(x) - &m * g,
            Err(_) => DVector::from_element(n, f64::NAN),
        }
    })
}

/// `H` or `H★` with its gradient, for first-integral checks.
pub fn potential_function(
    s: &GeometricStructure,
    field: &NumericVectorField,
    q: QuadratureConfig,
    side: Side,
) -> ScalarField {
    let (s1, f1) = (s.clone(), field.clone());
    let (s2, f2) = (s.clone(), field.clone());
    let n = s.dimension();
    ScalarField::new(
        n,
        match side {
            Side::Right => "H",
            Side::Left => "H_star",
        },
        move |x| eval_h(&s1, &f1, x, &q, side).unwrap_or(f64::NAN),
        move |x| {
            eval_grad_h(&s2, &f2, x, &q, side).unwrap_or_else(|_| DVector::from_element(n, f64::NAN))
        },
    )
}

/// The equal expressions for the Lie derivative of `F` along its own
/// gradient-like fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LieIdentityCheck {
    /// `⟨∇ᴿ_b F, ∇F⟩`.
    pub lhs: f64,
    /// `∇Fᵀ B ∇F`.
    pub rhs: f64,
    /// `⟨∇ᴸ_b F, ∇F⟩`.
    pub left_lie: f64,
    /// `b(∇ᴿ_b F, ∇ᴿ_b F)`.
    pub b_right: f64,
    /// `b(∇ᴸ_b F, ∇ᴸ_b F)`.
    pub b_left: f64,
    /// Largest pairwise difference among the five expressions.
    pub residual: f64,
}

pub fn lie_derivative_identity_check(
    s: &GeometricStructure,
    grad_f: &DVector<f64>,
) -> Result<LieIdentityCheck> {
    check_dim(s.dimension(), grad_f.len())?;
    let right = s.b_matrix() * grad_f;
    let left = s.b_star() * grad_f;
    let lhs = right.dot(grad_f);
    let rhs = grad_f.dot(&right);
    let left_lie = left.dot(grad_f);
    let b_right = s.eval_b(&right, &right)?;
    let b_left = s.eval_b(&left, &left)?;
    let all = [lhs, rhs, left_lie, b_right, b_left];
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LieIdentityCheck {
        lhs,
        rhs,
        left_lie,
        b_right,
        b_left,
        residual: hi - lo,
    })
}
