//! Geometric structures on ℝⁿ: nondegenerate bilinear forms `b(x, y) = xᵀ G y`
//! together with the companion map `B = G⁻¹` (so that `⟨x, y⟩ = b(x, By)`) and
//! its `b`-adjoint `B★ = Bᵀ`.
//!
//! The Gram matrix is the canonical representation. `B` and `B★` are derived
//! eagerly at construction. Structures built from rational data additionally
//! carry an exact copy of all three matrices for the [`crate::polyfield`] code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rational::{int, RatMatrix};

/// Smallest accepted reciprocal condition number of a floating-point Gram matrix.
pub const MIN_RCOND: f64 = 1e-12;
/// Eigenvalues of a symmetric Gram matrix below this magnitude count as degenerate.
pub const EIGEN_DEGENERACY: f64 = 1e-10;
/// Relative tolerance for float symmetry tests and matrix-identity verdicts.
pub const MATRIX_TOL: f64 = 1e-10;

/// Which slot of `b` the gradient-like operator is dual to.
///
/// `Right` pairs with `∇ᴿ_b F = B ∇F` and the potential `H`; `Left` pairs with
/// `∇ᴸ_b F = B★ ∇F` and the potential `H★`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructureKind {
    Euclidean,
    Symplectic,
    Minkowski { p: usize, q: usize },
    CustomSymmetric,
    CustomSkew,
    CustomGeneral,
}

#[derive(Debug, Clone)]
pub enum StructureDescriptor {
    Euclidean(usize),
    Symplectic(usize),
    /// Signature `(n − 1, 1)`.
    Minkowski(usize),
    Custom(RatMatrix),
    CustomFloat(DMatrix<f64>),
}

/// Exact rational copies of `G`, `B` and `B★`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPair {
    pub gram: RatMatrix,
    pub b_matrix: RatMatrix,
    pub b_star: RatMatrix,
}

/// Verdict of a matrix-identity membership test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub holds: bool,
    /// Max-abs entry of the identity's defect matrix.
    pub residual: f64,
}

/// `G = S_b + A_b` with `S_b` symmetric and `A_b` skew.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearDecomposition {
    pub symmetric_part: DMatrix<f64>,
    pub skew_part: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct GeometricStructure {
    dimension: usize,
    gram: DMatrix<f64>,
    b_matrix: DMatrix<f64>,
    b_star: DMatrix<f64>,
    kind: StructureKind,
    symmetric: bool,
    skew: bool,
    /// `(p, q)` counts of positive/negative eigenvalues, symmetric forms only.
    signature: Option<(usize, usize)>,
    exact: Option<ExactPair>,
}

pub fn canonical_symplectic(n: usize) -> Result<RatMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("dimension must be positive".into()));
    }
    if n % 2 != 0 {
        return Err(Error::OddSymplecticDimension(n));
    }
    let m = n / 2;
    let mut j = RatMatrix::zeros(n, n);
    for i in 0..m {
        j[(i, m + i)] = int(1);
        j[(m + i, i)] = int(-1);
    }
    Ok(j)
}

pub fn minkowski_gram(n: usize) -> Result<RatMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "Minkowski structure needs n >= 2, got {n}"
        )));
    }
    let mut diag = vec![int(1); n];
    diag[n - 1] = int(-1);
    Ok(RatMatrix::diagonal(&diag))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

impl GeometricStructure {
    pub fn new(desc: &StructureDescriptor) -> Result<Self> {
        match desc {
            StructureDescriptor::Euclidean(n) => Self::euclidean(*n),
            StructureDescriptor::Symplectic(n) => Self::symplectic(*n),
            StructureDescriptor::Minkowski(n) => Self::minkowski(*n),
            StructureDescriptor::Custom(g) => Self::from_rational_gram(g.clone()),
            StructureDescriptor::CustomFloat(g) => Self::from_gram(g.clone()),
        }
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("dimension must be positive".into()));
        }
        let mut s = Self::from_rational_gram(RatMatrix::identity(n))?;
        s.kind = StructureKind::Euclidean;
        Ok(s)
    }

    pub fn symplectic(n: usize) -> Result<Self> {
        let mut s = Self::from_rational_gram(canonical_symplectic(n)?)?;
        s.kind = StructureKind::Symplectic;
        Ok(s)
    }

    pub fn minkowski(n: usize) -> Result<Self> {
        let mut s = Self::from_rational_gram(minkowski_gram(n)?)?;
        s.kind = StructureKind::Minkowski { p: n - 1, q: 1 };
        Ok(s)
    }

    /// Exact construction. Rejects only exactly singular matrices.
    pub fn from_rational_gram(gram: RatMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::DimensionMismatch {
                expected: gram.nrows(),
                found: gram.ncols(),
            });
        }
        let n = gram.nrows();
        if n == 0 {
            return Err(Error::InvalidDimension("dimension must be positive".into()));
        }
        let b_matrix = gram
            .inverse()
            .ok_or_else(|| Error::SingularGram("determinant is exactly zero".into()))?;
        let b_star = b_matrix.transpose();
        let symmetric = gram.is_symmetric();
        let skew = gram.is_skew();
        let g = gram.to_f64();
        let signature = if symmetric {
            Some(float_signature(&g)?)
        } else {
            None
        };
        let kind = classify(&gram, symmetric, skew, signature);
        Ok(Self {
            dimension: n,
            b_matrix: b_matrix.to_f64(),
            b_star: b_star.to_f64(),
            gram: g,
            kind,
            symmetric,
            skew,
            signature,
            exact: Some(ExactPair {
                gram,
                b_matrix,
                b_star,
            }),
        })
    }

    /// Floating-point construction. Rejects when the reciprocal condition
    /// number falls below [`MIN_RCOND`].
    pub fn from_gram(gram: DMatrix<f64>) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::DimensionMismatch {
                expected: gram.nrows(),
                found: gram.ncols(),
            });
        }
        let n = gram.nrows();
        if n == 0 {
            return Err(Error::InvalidDimension("dimension must be positive".into()));
        }
        if gram.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue("Gram matrix entry".into()));
        }
        let sv = gram.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if smax == 0.0 || smin / smax < MIN_RCOND {
            return Err(Error::SingularGram(format!(
                "reciprocal condition number {:e} below {MIN_RCOND:e}",
                if smax == 0.0 { 0.0 } else { smin / smax }
            )));
        }
        let b_matrix = gram
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularGram("inversion failed".into()))?;
        let scale = max_abs(&gram).max(1.0);
        let symmetric = max_abs(&(&gram - gram.transpose())) <= 1e-12 * scale;
        let skew = max_abs(&(&gram + gram.transpose())) <= 1e-12 * scale;
        let signature = if symmetric {
            Some(float_signature(&gram)?)
        } else {
            None
        };
        let kind = if symmetric {
            let (p, q) = signature.unwrap_or((n, 0));
            if max_abs(&(&gram - DMatrix::identity(n, n))) == 0.0 {
                StructureKind::Euclidean
            } else if p >= 1 && q >= 1 {
                StructureKind::Minkowski { p, q }
            } else {
                StructureKind::CustomSymmetric
            }
        } else if skew {
            StructureKind::CustomSkew
        } else {
            StructureKind::CustomGeneral
        };
        Ok(Self {
            dimension: n,
            b_star: b_matrix.transpose(),
            b_matrix,
            gram,
            kind,
            symmetric,
            skew,
            signature,
            exact: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }
    /// `B = G⁻¹`.
    pub fn b_matrix(&self) -> &DMatrix<f64> {
        &self.b_matrix
    }
    /// `B★ = Bᵀ`.
    pub fn b_star(&self) -> &DMatrix<f64> {
        &self.b_star
    }
    pub fn kind(&self) -> StructureKind {
        self.kind
    }
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }
    pub fn is_skew(&self) -> bool {
        self.skew
    }
    pub fn signature(&self) -> Option<(usize, usize)> {
        self.signature
    }
    pub fn is_positive_definite(&self) -> bool {
        self.symmetric && self.signature == Some((self.dimension, 0))
    }

    pub fn exact(&self) -> Result<&ExactPair> {
        self.exact.as_ref().ok_or(Error::NotRational)
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// The matrix mapping `∇F` to the gradient-like field on the given side.
    pub fn gradient_map(&self, side: Side) -> &DMatrix<f64> {
        match side {
            Side::Right => &self.b_matrix,
            Side::Left => &self.b_star,
        }
    }

    pub fn eval_b(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        check_dim(self.dimension, y.len())?;
        Ok(x.dot(&(&self.gram * y)))
    }

    /// `𝒜_b(x, y) = ½ (b(x, y) − b(y, x))`.
    pub fn skew_pairing(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        Ok(0.5 * (self.eval_b(x, y)? - self.eval_b(y, x)?))
    }

    /// `F_b(x) = b(x, x)`.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> Result<f64> {
        self.eval_b(x, x)
    }

    pub fn bilinear_decomposition(&self) -> BilinearDecomposition {
        let gt = self.gram.transpose();
        BilinearDecomposition {
            symmetric_part: (&self.gram + &gt) * 0.5,
            skew_part: (&self.gram - &gt) * 0.5,
        }
    }

    /// Residual of `G B = I`.
    pub fn pair_residual(&self) -> f64 {
        max_abs(&(&self.gram * &self.b_matrix - DMatrix::identity(self.dimension, self.dimension)))
    }

    /// Whether `B B★ = B★ B`, equivalently `(B★)★ = B`.
    pub fn is_b_normal(&self) -> bool {
        if let Some(ex) = &self.exact {
            return ex.b_matrix.mul(&ex.b_star).ok() == ex.b_star.mul(&ex.b_matrix).ok();
        }
        self.b_normal_residual() <= MATRIX_TOL * max_abs(&self.b_matrix).powi(2).max(1.0)
    }

    pub fn b_normal_residual(&self) -> f64 {
        max_abs(&(&self.b_matrix * &self.b_star - &self.b_star * &self.b_matrix))
    }

    fn check_square(&self, a: &DMatrix<f64>) -> Result<()> {
        check_dim(self.dimension, a.nrows())?;
        check_dim(self.dimension, a.ncols())
    }

    fn verdict(&self, defect: DMatrix<f64>, a: &DMatrix<f64>) -> Membership {
        let residual = max_abs(&defect);
        let scale = (max_abs(a) * max_abs(&self.gram)).max(1.0);
        Membership {
            holds: residual <= MATRIX_TOL * scale,
            residual,
        }
    }

    /// Left `(b,B)`-symmetry, tested as `AᵀG = GᵀA`.
    pub fn is_left_bb_symmetric(&self, a: &DMatrix<f64>) -> Result<Membership> {
        self.check_square(a)?;
        let defect = a.transpose() * &self.gram - self.gram.transpose() * a;
        Ok(self.verdict(defect, a))
    }

    /// Right `(b,B)`-symmetry, tested as `AᵀGᵀ = G A`.
    pub fn is_right_bb_symmetric(&self, a: &DMatrix<f64>) -> Result<Membership> {
        self.check_square(a)?;
        let defect = a.transpose() * self.gram.transpose() - &self.gram * a;
        Ok(self.verdict(defect, a))
    }

    /// `[A, A′]ᴸ = A B (B★)⁻¹ A′ − A′ B (B★)⁻¹ A`, with `B (B★)⁻¹ = B Gᵀ`.
    pub fn bracket_left(&self, a: &DMatrix<f64>, a2: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_square(a)?;
        self.check_square(a2)?;
        let m = &self.b_matrix * self.gram.transpose();
        Ok(a * &m * a2 - a2 * &m * a)
    }

    /// `[A, A′]ᴿ = A B★ B⁻¹ A′ − A′ B★ B⁻¹ A`, with `B★ B⁻¹ = Bᵀ G`.
    pub fn bracket_right(&self, a: &DMatrix<f64>, a2: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_square(a)?;
        self.check_square(a2)?;
        let m = &self.b_star * &self.gram;
        Ok(a * &m * a2 - a2 * &m * a)
    }
}

pub fn commutator(a: &DMatrix<f64>, a2: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_dim(a.nrows(), a.ncols())?;
    check_dim(a.nrows(), a2.nrows())?;
    check_dim(a2.nrows(), a2.ncols())?;
    Ok(a * a2 - a2 * a)
}

fn float_signature(g: &DMatrix<f64>) -> Result<(usize, usize)> {
    let sym = (g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut p = 0;
    let mut q = 0;
    for &l in eig.eigenvalues.iter() {
        if l.abs() < EIGEN_DEGENERACY {
            return Err(Error::SingularGram(format!(
                "eigenvalue {l:e} below degeneracy threshold"
            )));
        }
        if l > 0.0 {
            p += 1;
        } else {
            q += 1;
        }
    }
    Ok((p, q))
}

fn classify(
    gram: &RatMatrix,
    symmetric: bool,
    skew: bool,
    signature: Option<(usize, usize)>,
) -> StructureKind {
    let n = gram.nrows();
    if symmetric {
        let (p, q) = signature.unwrap_or((n, 0));
        if *gram == RatMatrix::identity(n) {
            StructureKind::Euclidean
        } else if p >= 1 && q >= 1 {
            StructureKind::Minkowski { p, q }
        } else {
            StructureKind::CustomSymmetric
        }
    } else if skew {
        if canonical_symplectic(n).map_or(false, |j| j == *gram) {
            StructureKind::Symplectic
        } else {
            StructureKind::CustomSkew
        }
    } else {
        StructureKind::CustomGeneral
    }
}
