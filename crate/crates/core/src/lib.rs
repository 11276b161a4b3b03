//! Global geometric decomposition of C¹ vector fields on ℝⁿ.
//!
//! Given a nondegenerate bilinear form `b(x, y) = xᵀ G y` on ℝⁿ and a vector
//! field `X`, every field splits uniquely as
//!
//! ```text
//! X = B ∇H + u        with H(0) = 0 and b(x, u(x)) = 0        (right)
//! X = Bᵀ ∇H★ + u★     with H★(0) = 0 and b(u★(x), x) = 0      (left)
//! ```
//!
//! where `B = G⁻¹`. The crate computes these splittings exactly for
//! polynomial fields with rational coefficients ([`polyfield`]) and pointwise
//! by quadrature for arbitrary fields ([`decomp`]). Around that core it
//! provides solvability tests for gradient-like fields ([`poincare`]), an ODE
//! integrator for first-integral checks ([`flow`]) and a sampled verifier for
//! the hypotheses of the conjugacy criterion ([`conjugacy`]).

pub mod conjugacy;
pub mod decomp;
pub mod error;
pub mod fields;
pub mod flow;
pub mod geometry;
pub mod poincare;
pub mod polyfield;
pub mod rational;

pub use error::{Error, Result};
pub use fields::{NumericVectorField, ScalarField};
pub use geometry::{GeometricStructure, Side, StructureDescriptor, StructureKind};
pub use polyfield::{Poly, PolyVectorField};
pub use rational::{RatMatrix, Rational};
