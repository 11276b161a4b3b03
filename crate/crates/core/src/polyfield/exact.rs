//! Exact decomposition of polynomial vector fields.
//!
//! Everything here is rational arithmetic; results are exact polynomial
//! identities, not approximations.

use num_bigint::BigInt;

use super::field::{apply_matrix, PolyVectorField};
use super::poly::Poly;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{GeometricStructure, Side};
use crate::rational::{RatMatrix, Rational};

/// Potential and orthogonal remainder of one side of the decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDecomposition {
    pub side: Side,
    /// `H` (right) or `H★` (left); vanishes at the origin.
    pub potential: Poly,
    /// `u` (right) or `u★` (left).
    pub remainder: PolyVectorField,
}

/// `q(x) = ∫₀¹ p(tx)/t dt`.
///
/// A homogeneous part of degree `k` contributes `t^{k−1}`, which integrates
/// to `1/k`; the constant term must vanish.
pub fn ray_integral(p: &Poly) -> Result<Poly> {
    let mut out = Poly::zero(p.nvars());
    for (k, part) in p.homogeneous_parts() {
        if k == 0 {
            return Err(Error::NonzeroConstantTerm);
        }
        let inv = Rational::new(BigInt::from(1), BigInt::from(k));
        out = out.add(&part.scale(&inv))?;
    }
    Ok(out)
}

/// `∑ᵢⱼ pᵢ M_{ij} qⱼ` for polynomial vectors `p, q`.
fn bilinear(p: &[Poly], m: &RatMatrix, q: &[Poly]) -> Result<Poly> {
    let mq = apply_matrix(m, q)?;
    check_dim(p.len(), mq.len())?;
    let nvars = p.first().map_or(0, Poly::nvars);
    let mut acc = Poly::zero(nvars);
    for (a, b) in p.iter().zip(&mq) {
        if !a.is_zero() && !b.is_zero() {
            acc = acc.add(&a.mul(b)?)?;
        }
    }
    Ok(acc)
}

fn position(n: usize) -> Vec<Poly> {
    PolyVectorField::identity(n).components().to_vec()
}

fn check_field(s: &GeometricStructure, x: &PolyVectorField) -> Result<()> {
    check_dim(s.dimension(), x.dimension())
}

/// `σ(x) = b(x, X(x)) = xᵀ G X(x)`.
pub fn sigma_right(s: &GeometricStructure, x: &PolyVectorField) -> Result<Poly> {
    check_field(s, x)?;
    let g = &s.exact()?.gram;
    bilinear(&position(x.dimension()), g, x.components())
}

/// `σ★(x) = b(X(x), x) = X(x)ᵀ G x`.
pub fn sigma_left(s: &GeometricStructure, x: &PolyVectorField) -> Result<Poly> {
    check_field(s, x)?;
    let g = &s.exact()?.gram;
    bilinear(x.components(), g, &position(x.dimension()))
}

pub fn sigma(s: &GeometricStructure, x: &PolyVectorField, side: Side) -> Result<Poly> {
    match side {
        Side::Right => sigma_right(s, x),
        Side::Left => sigma_left(s, x),
    }
}

/// `∇ᴿ_b F = B ∇F` or `∇ᴸ_b F = B★ ∇F`.
pub fn poly_gradient_like(s: &GeometricStructure, f: &Poly, side: Side) -> Result<PolyVectorField> {
    check_dim(s.dimension(), f.nvars())?;
    let ex = s.exact()?;
    let m = match side {
        Side::Right => &ex.b_matrix,
        Side::Left => &ex.b_star,
    };
    PolyVectorField::new(apply_matrix(m, &f.gradient())?)
}

pub fn decompose_exact(
    s: &GeometricStructure,
    x: &PolyVectorField,
    side: Side,
) -> Result<ExactDecomposition> {
    let potential = ray_integral(&sigma(s, x, side)?)?;
    let gradient_part = poly_gradient_like(s, &potential, side)?;
    let remainder = x.sub(&gradient_part)?;
    Ok(ExactDecomposition {
        side,
        potential,
        remainder,
    })
}

/// `2 ∫₀¹ 𝒜_b(X(tx), x) dt`, which equals `H★ − H`.
pub fn hstar_minus_h(s: &GeometricStructure, x: &PolyVectorField) -> Result<Poly> {
    check_field(s, x)?;
    let g = &s.exact()?.gram;
    // 2 A_b = G − Gᵀ
    let twice_skew = g.sub(&g.transpose())?;
    let half = Rational::new(BigInt::from(1), BigInt::from(2));
    let pairing = bilinear(x.components(), &twice_skew.scale(&half), &position(x.dimension()))?;
    Ok(ray_integral(&pairing)?.scale(&Rational::from_integer(2.into())))
}

/// `xᵀ G u(x)` (right) or `u(x)ᵀ G x` (left); identically zero for a genuine
/// remainder of the matching side.
pub fn orthogonality_defect(
    s: &GeometricStructure,
    u: &PolyVectorField,
    side: Side,
) -> Result<Poly> {
    sigma(s, u, side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::polyfield::field::{lotka_volterra, rikitake};

    fn p(n: usize, s: &str) -> Poly {
        Poly::parse(n, s).unwrap()
    }

    #[test]
    fn ray_integral_examples() {
        assert_eq!(ray_integral(&p(2, "x^2 + y^2")).unwrap(), p(2, "1/2*x^2 + 1/2*y^2"));
        assert_eq!(ray_integral(&p(3, "z")).unwrap(), p(3, "z"));
        // Lotka–Volterra Euclidean σ with α=2, β=3, γ=5, δ=7
        let sigma = p(2, "2*x^2 - 3*x^2*y + 7*x*y^2 - 5*y^2");
        assert_eq!(
            ray_integral(&sigma).unwrap(),
            p(2, "x^2 - 5/2*y^2 - x^2*y + 7/3*x*y^2")
        );
        assert_eq!(ray_integral(&p(2, "x + 1")).unwrap_err(), Error::NonzeroConstantTerm);
    }

    #[test]
    fn sigma_examples() {
        let e = GeometricStructure::euclidean(3).unwrap();
        let id = PolyVectorField::identity(3);
        let r2 = p(3, "x^2 + y^2 + z^2");
        assert_eq!(sigma_right(&e, &id).unwrap(), r2);
        assert_eq!(sigma_left(&e, &id).unwrap(), r2);

        let s = GeometricStructure::symplectic(2).unwrap();
        assert!(sigma_right(&s, &PolyVectorField::identity(2)).unwrap().is_zero());

        let m = GeometricStructure::minkowski(3).unwrap();
        let rk = rikitake(&rat(3, 2), &rat(5, 7));
        assert_eq!(
            sigma_right(&m, &rk).unwrap(),
            p(3, "-3/2*x^2 - 3/2*y^2 + 3*x*y*z - 5/7*x*y - z")
        );
    }

    #[test]
    fn gradient_like_examples() {
        let e = GeometricStructure::euclidean(2).unwrap();
        let f = p(2, "1/2*x^2 + 1/2*y^2");
        assert_eq!(
            poly_gradient_like(&e, &f, Side::Right).unwrap(),
            PolyVectorField::parse(&["x", "y"]).unwrap()
        );

        let s = GeometricStructure::symplectic(2).unwrap();
        let h = p(2, "x^3*y + 2*y^2");
        // J ∇H = (∂_y H, −∂_x H)
        assert_eq!(
            poly_gradient_like(&s, &h, Side::Left).unwrap(),
            PolyVectorField::parse(&["x^3 + 4*y", "-3*x^2*y"]).unwrap()
        );

        let m = GeometricStructure::minkowski(2).unwrap();
        let f = p(2, "-1/2*x^2 + 1/2*y^2");
        assert_eq!(
            poly_gradient_like(&m, &f, Side::Right).unwrap(),
            PolyVectorField::parse(&["-x", "-y"]).unwrap()
        );
    }

    #[test]
    fn euclidean_lotka_volterra() {
        let (a, b, g, d) = (int(2), int(3), int(5), int(7));
        let e = GeometricStructure::euclidean(2).unwrap();
        let dec = decompose_exact(&e, &lotka_volterra(&a, &b, &g, &d), Side::Right).unwrap();
        assert_eq!(dec.potential, p(2, "x^2 - 5/2*y^2 - x^2*y + 7/3*x*y^2"));
        // 1/3 (3x + 7y) (−y, x)
        assert_eq!(
            dec.remainder,
            PolyVectorField::parse(&["-x*y - 7/3*y^2", "x^2 + 7/3*x*y"]).unwrap()
        );
    }

    #[test]
    fn minkowski_rikitake() {
        let m = GeometricStructure::minkowski(3).unwrap();
        let rk = rikitake(&int(1), &int(1));
        let dec = decompose_exact(&m, &rk, Side::Right).unwrap();
        assert_eq!(
            dec.potential,
            p(3, "-1/2*x^2 - 1/2*y^2 + x*y*z - 1/2*x*y - z")
        );
        assert_eq!(
            dec.remainder,
            PolyVectorField::parse(&["1/2*y", "-1/2*x", "0"]).unwrap()
        );
    }

    #[test]
    fn euclidean_rikitake() {
        let e = GeometricStructure::euclidean(3).unwrap();
        let dec = decompose_exact(&e, &rikitake(&int(2), &int(3)), Side::Right).unwrap();
        assert_eq!(
            dec.remainder,
            PolyVectorField::parse(&["2/3*y*z + 3/2*y", "2/3*x*z - 3/2*x", "-4/3*x*y"]).unwrap()
        );
    }

    #[test]
    fn hstar_minus_h_cases() {
        let lv = lotka_volterra(&int(1), &rat(1, 2), &int(2), &int(3));
        let e = GeometricStructure::euclidean(2).unwrap();
        assert!(hstar_minus_h(&e, &lv).unwrap().is_zero());

        let s = GeometricStructure::symplectic(2).unwrap();
        let h = decompose_exact(&s, &lv, Side::Right).unwrap().potential;
        let hs = decompose_exact(&s, &lv, Side::Left).unwrap().potential;
        assert_eq!(hstar_minus_h(&s, &lv).unwrap(), h.scale(&int(-2)));
        assert_eq!(hs, h.neg());
        // H★ = xy[½(α+γ) − ⅓δx − ⅓βy] with α=1, β=1/2, γ=2, δ=3
        assert_eq!(hs, p(2, "3/2*x*y - x^2*y - 1/6*x*y^2"));

        let g = RatMatrix::from_i64_rows(&[&[2, 1], &[-3, 1]]).unwrap();
        let gs = GeometricStructure::from_rational_gram(g).unwrap();
        let h = decompose_exact(&gs, &lv, Side::Right).unwrap().potential;
        let hs = decompose_exact(&gs, &lv, Side::Left).unwrap().potential;
        assert_eq!(hstar_minus_h(&gs, &lv).unwrap(), hs.sub(&h).unwrap());
    }

    #[test]
    fn requires_rational_structure() {
        let s = GeometricStructure::from_gram(nalgebra::DMatrix::identity(2, 2)).unwrap();
        let lv = lotka_volterra(&int(1), &int(1), &int(1), &int(1));
        assert_eq!(decompose_exact(&s, &lv, Side::Right).unwrap_err(), Error::NotRational);
    }

    #[test]
    fn zero_field() {
        let e = GeometricStructure::euclidean(3).unwrap();
        let dec = decompose_exact(&e, &PolyVectorField::zero(3), Side::Left).unwrap();
        assert!(dec.potential.is_zero());
        assert!(dec.remainder.is_zero());
    }
}
