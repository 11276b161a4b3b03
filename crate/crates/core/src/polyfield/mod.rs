//! Exact polynomial vector fields over ℚ and the exact form of the
//! decomposition, gradient-like operators and potential relations.

mod exact;
mod field;
mod poly;

pub use exact::{
    decompose_exact, hstar_minus_h, orthogonality_defect, poly_gradient_like, ray_integral,
    sigma, sigma_left, sigma_right, ExactDecomposition,
};
pub use field::{linear, lotka_volterra, rikitake, scalar_field, PolyVectorField};
pub use poly::{Monomial, Poly, MAX_TOTAL_DEGREE};
