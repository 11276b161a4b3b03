//! Solvability of `X = ∇ᴸ_b H` or `X = ∇ᴿ_b H` and reconstruction of `H`.
//!
//! A field is left gradient-like iff `DXᵀ G = Gᵀ DX` everywhere, and right
//! gradient-like iff `DXᵀ Gᵀ = G DX`. For symmetric `G` both read
//! `DXᵀ G = G DX`; for skew `G` both read `DXᵀ G + G DX = 0`.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decomp::{eval_h, QuadratureConfig};
use crate::error::{check_dim, Error, Result};
use crate::fields::NumericVectorField;
use crate::geometry::{GeometricStructure, Side};
use crate::polyfield::{decompose_exact, Poly, PolyVectorField};
use crate::rational::{rational_to_f64, RatMatrix};

/// Residual threshold for sampled verdicts.
pub const NUMERIC_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportSide {
    Left,
    Right,
    SymmetricUnified,
    SkewUnified,
}

impl ReportSide {
    fn resolve(s: &GeometricStructure, side: Side) -> Self {
        if s.is_symmetric() {
            Self::SymmetricUnified
        } else if s.is_skew() {
            Self::SkewUnified
        } else {
            match side {
                Side::Left => Self::Left,
                Side::Right => Self::Right,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolvabilityReport {
    pub side: ReportSide,
    pub verdict: bool,
    /// Largest entry of the matrix-identity residual. In exact mode this is
    /// the largest coefficient of the residual polynomials.
    pub max_residual: f64,
    pub worst_point: Option<Vec<f64>>,
    pub sample_points: Vec<Vec<f64>>,
    pub mode: CheckMode,
}

/// `(DXᵀ G − Gᵀ DX)` (left) or `(DXᵀ Gᵀ − G DX)` (right) at one point.
pub fn residual_matrix(g: &DMatrix<f64>, dx: &DMatrix<f64>, side: Side) -> DMatrix<f64> {
    let dxt = dx.transpose();
    match side {
        Side::Left => &dxt * g - g.transpose() * dx,
        Side::Right => &dxt * g.transpose() - g * dx,
    }
}

/// Decides the condition globally with polynomial arithmetic.
pub fn check_gradient_like_exact(
    s: &GeometricStructure,
    x: &PolyVectorField,
    side: Side,
) -> Result<SolvabilityReport> {
    let n = s.dimension();
    check_dim(n, x.dimension())?;
    let g = &s.exact()?.gram;
    let (lhs_g, rhs_g): (RatMatrix, RatMatrix) = match side {
        Side::Left => (g.clone(), g.transpose()),
        Side::Right => (g.transpose(), g.clone()),
    };
    let jac = x.jacobian();
    let mut max_residual = 0.0f64;
    let mut all_zero = true;
    for i in 0..n {
        for k in 0..n {
            // (DXᵀ M)_{ik} − (M' DX)_{ik}
            let mut r = Poly::zero(n);
            for j in 0..n {
                if !lhs_g[(j, k)].is_zero() {
                    r = r.add(&jac[j][i].scale(&lhs_g[(j, k)]))?;
                }
                if !rhs_g[(i, j)].is_zero() {
                    r = r.sub(&jac[j][k].scale(&rhs_g[(i, j)]))?;
                }
            }
            all_zero &= r.is_zero();
            max_residual = max_residual.max(rational_to_f64(&r.max_abs_coefficient()));
        }
    }
    Ok(SolvabilityReport {
        side: ReportSide::resolve(s, side),
        verdict: all_zero,
        max_residual,
        worst_point: None,
        sample_points: Vec::new(),
        mode: CheckMode::Exact,
    })
}

/// Tests the condition at each sample; a single failing point is a certificate
/// of failure, passing every sample is only statistical evidence.
pub fn check_gradient_like(
    s: &GeometricStructure,
    x: &NumericVectorField,
    side: Side,
    samples: &[DVector<f64>],
) -> Result<SolvabilityReport> {
    let n = s.dimension();
    check_dim(n, x.dimension())?;
    if samples.is_empty() {
        return Err(Error::InvalidConfig("at least one sample point is required".into()));
    }
    for p in samples {
        check_dim(n, p.len())?;
    }
    let g = s.gram();
    let residuals: Vec<f64> = samples
        .par_iter()
        .map(|p| Ok(residual_matrix(g, &x.jacobian(p)?, side).amax()))
        .collect::<Result<_>>()?;
    let (worst, max_residual) = residuals
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
    Ok(SolvabilityReport {
        side: ReportSide::resolve(s, side),
        verdict: max_residual <= NUMERIC_THRESHOLD,
        max_residual,
        worst_point: Some(samples[worst].as_slice().to_vec()),
        sample_points: samples.iter().map(|p| p.as_slice().to_vec()).collect(),
        mode: CheckMode::Sampled,
    })
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|p| *p * *p <= c).all(|p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut out) = (inv, 0.0);
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

/// Randomly shifted Halton points in `[−1, 1]ⁿ`.
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let primes = first_primes(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
    (1..=count as u64)
        .map(|i| {
            DVector::from_iterator(
                n,
                primes
                    .iter()
                    .zip(&shift)
                    .map(|(&p, s)| 2.0 * ((radical_inverse(i, p) + s) % 1.0) - 1.0),
            )
        })
        .collect()
}

/// `H★` (left) or `H` (right) as an exact polynomial with `H(0) = 0`.
///
/// When `X` is gradient-like on that side, `X` equals the matching
/// gradient-like field of the result.
pub fn reconstruct_potential_exact(
    s: &GeometricStructure,
    x: &PolyVectorField,
    side: Side,
) -> Result<Poly> {
    Ok(decompose_exact(s, x, side)?.potential)
}

/// Pointwise value of the reconstructed potential.
pub fn reconstruct_potential(
    s: &GeometricStructure,
    x: &NumericVectorField,
    side: Side,
    at: &DVector<f64>,
    q: &QuadratureConfig,
) -> Result<f64> {
    eval_h(s, x, at, q, side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::{poly_gradient_like, rikitake};
    use crate::rational::{int, rat};

    #[test]
    fn euclidean_gradient_passes_exactly() {
        let e = GeometricStructure::euclidean(3).unwrap();
        let h0 = Poly::parse(3, "x^3*y - 2*y*z^2 + 1/3*x*z").unwrap();
        let x = poly_gradient_like(&e, &h0, Side::Right).unwrap();
        let r = check_gradient_like_exact(&e, &x, Side::Right).unwrap();
        assert!(r.verdict);
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.side, ReportSide::SymmetricUnified);
        assert_eq!(reconstruct_potential_exact(&e, &x, Side::Right).unwrap(), h0);
    }

    #[test]
    fn rotation_fails() {
        let e = GeometricStructure::euclidean(2).unwrap();
        let rot = PolyVectorField::parse(&["-y", "x"]).unwrap();
        assert!(!check_gradient_like_exact(&e, &rot, Side::Left).unwrap().verdict);
        let num = rot.to_numeric("rot");
        let r = check_gradient_like(&e, &num, Side::Left, &sample_points(2, 8, 1)).unwrap();
        assert!(!r.verdict);
        assert!((r.max_residual - 2.0).abs() < 1e-12);
        assert!(r.worst_point.is_some());
    }

    #[test]
    fn rikitake_without_a_is_minkowski_gradient() {
        let m = GeometricStructure::minkowski(3).unwrap();
        let rk = rikitake(&rat(7, 3), &int(0));
        let r = check_gradient_like_exact(&m, &rk, Side::Right).unwrap();
        assert!(r.verdict);
        assert_eq!(r.max_residual, 0.0);
        let with_a = rikitake(&int(1), &int(1));
        assert!(!check_gradient_like_exact(&m, &with_a, Side::Right).unwrap().verdict);
    }

    #[test]
    fn hamiltonian_left_reconstruction() {
        let sp = GeometricStructure::symplectic(2).unwrap();
        let h0 = Poly::parse(2, "x^4 + x*y^2 - 3*y").unwrap();
        let xh = poly_gradient_like(&sp, &h0, Side::Left).unwrap();
        let r = check_gradient_like_exact(&sp, &xh, Side::Left).unwrap();
        assert!(r.verdict);
        assert_eq!(r.side, ReportSide::SkewUnified);
        assert_eq!(reconstruct_potential_exact(&sp, &xh, Side::Left).unwrap(), h0);
    }

    #[test]
    fn general_gram_sides_differ() {
        let g = RatMatrix::from_i64_rows(&[&[1, 2], &[0, 1]]).unwrap();
        let s = GeometricStructure::from_rational_gram(g).unwrap();
        let h0 = Poly::parse(2, "x^2*y + y^3").unwrap();
        let xl = poly_gradient_like(&s, &h0, Side::Left).unwrap();
        assert!(check_gradient_like_exact(&s, &xl, Side::Left).unwrap().verdict);
        assert!(!check_gradient_like_exact(&s, &xl, Side::Right).unwrap().verdict);
        let num = xl.to_numeric("xl");
        let pts = sample_points(2, 64, 9);
        assert!(check_gradient_like(&s, &num, Side::Left, &pts).unwrap().verdict);
        assert!(!check_gradient_like(&s, &num, Side::Right, &pts).unwrap().verdict);
    }

    #[test]
    fn numeric_identity_reconstruction() {
        let e = GeometricStructure::euclidean(3).unwrap();
        let id = crate::fields::linear_field(DMatrix::identity(3, 3)).unwrap();
        let x = DVector::from_vec(vec![1.0, 2.0, 2.0]);
        let h = reconstruct_potential(&e, &id, Side::Left, &x, &QuadratureConfig::default()).unwrap();
        assert!((h - 4.5).abs() < 1e-14);
    }

    #[test]
    fn samples_are_reproducible_and_in_range() {
        let a = sample_points(4, 64, 3);
        assert_eq!(a, sample_points(4, 64, 3));
        assert_ne!(a, sample_points(4, 64, 4));
        assert!(a.iter().all(|p| p.iter().all(|v| (-1.0..=1.0).contains(v))));
        assert_eq!(first_primes(5), vec![2, 3, 5, 7, 11]);
    }

    #[test]
    fn errors() {
        let e = GeometricStructure::euclidean(2).unwrap();
        let f = PolyVectorField::parse(&["x", "y"]).unwrap().to_numeric("id");
        assert!(check_gradient_like(&e, &f, Side::Left, &[]).is_err());
        let e3 = GeometricStructure::euclidean(3).unwrap();
        assert!(matches!(
            check_gradient_like(&e3, &f, Side::Left, &sample_points(3, 4, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
