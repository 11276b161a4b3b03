use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;

use super::poly::Poly;
use crate::error::{check_dim, Error, Result};
use crate::fields::{NumericVectorField, ScalarField};
use crate::rational::{rational_to_f64, RatMatrix, Rational};

/// An `n`-tuple of polynomials in `n` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    components: Vec<Poly>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Poly>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::InvalidDimension("field needs at least one component".into()));
        }
        for c in &components {
            check_dim(n, c.nvars())?;
        }
        Ok(Self { components })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            components: vec![Poly::zero(n); n],
        }
    }

    /// `X(x) = x`.
    pub fn identity(n: usize) -> Self {
        Self {
            components: (0..n).map(|i| Poly::var(n, i).expect("in range")).collect(),
        }
    }

    /// Parses one polynomial per component.
    pub fn parse(components: &[&str]) -> Result<Self> {
        let n = components.len();
        Self::new(
            components
                .iter()
                .map(|c| Poly::parse(n, c))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, Poly::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, Poly::sub)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&Poly, &Poly) -> Result<Poly>) -> Result<Self> {
        check_dim(self.dimension(), other.dimension())?;
        Ok(Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect::<Result<_>>()?,
        })
    }

    /// `x ↦ M X(x)` for a constant rational matrix.
    pub fn premultiply(&self, m: &RatMatrix) -> Result<Self> {
        apply_matrix(m, &self.components).map(|components| Self { components })
    }

    /// `∑ᵢ pᵢ(x) qᵢ(x)`.
    pub fn dot(&self, other: &Self) -> Result<Poly> {
        check_dim(self.dimension(), other.dimension())?;
        let mut acc = Poly::zero(self.dimension());
        for (a, b) in self.components.iter().zip(&other.components) {
            acc = acc.add(&a.mul(b)?)?;
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    /// Polynomial Jacobian: entry `(i, j)` is `∂Xᵢ/∂xⱼ`.
    pub fn jacobian(&self) -> Vec<Vec<Poly>> {
        self.components.iter().map(Poly::gradient).collect()
    }

    /// Floating-point evaluator with the analytic (polynomial) Jacobian.
    pub fn to_numeric(&self, label: impl Into<String>) -> NumericVectorField {
        let n = self.dimension();
        let comps: Vec<CompiledPoly> = self.components.iter().map(CompiledPoly::new).collect();
        let jac: Vec<Vec<CompiledPoly>> = self
            .jacobian()
            .iter()
            .map(|row| row.iter().map(CompiledPoly::new).collect())
            .collect();
        NumericVectorField::new(n, label, move |x| {
            DVector::from_iterator(n, comps.iter().map(|p| p.eval(x.as_slice())))
        })
        .with_jacobian(move |x| DMatrix::from_fn(n, n, |i, j| jac[i][j].eval(x.as_slice())))
    }

    pub fn to_string_with(&self, names: &[&str]) -> String {
        self.components
            .iter()
            .map(|p| p.to_string_with(names))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(super::poly::default_names(self.dimension())))
    }
}

/// Floating-point evaluator of `p` and its polynomial gradient.
pub fn scalar_field(p: &Poly, label: impl Into<String>) -> ScalarField {
    let n = p.nvars();
    let value = CompiledPoly::new(p);
    let grad: Vec<CompiledPoly> = p.gradient().iter().map(CompiledPoly::new).collect();
    ScalarField::new(
        n,
        label,
        move |x| value.eval(x.as_slice()),
        move |x| DVector::from_iterator(n, grad.iter().map(|g| g.eval(x.as_slice()))),
    )
}

/// `M · v` where `v` is a vector of polynomials.
pub(crate) fn apply_matrix(m: &RatMatrix, v: &[Poly]) -> Result<Vec<Poly>> {
    check_dim(m.ncols(), v.len())?;
    let nvars = v.first().map_or(0, Poly::nvars);
    (0..m.nrows())
        .map(|i| {
            let mut acc = Poly::zero(nvars);
            for (j, p) in v.iter().enumerate() {
                let c = &m[(i, j)];
                if !c.is_zero() {
                    acc = acc.add(&p.scale(c))?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Float copy of a polynomial for fast repeated evaluation.
#[derive(Clone, Debug)]
pub(crate) struct CompiledPoly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl CompiledPoly {
    pub(crate) fn new(p: &Poly) -> Self {
        Self {
            terms: p
                .terms()
                .map(|(m, c)| (rational_to_f64(c), m.exponents().to_vec()))
                .collect(),
        }
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, xi)| if k == 0 { acc } else { acc * xi.powi(k as i32) })
            })
            .sum()
    }
}

/// Exact Lotka–Volterra field `(αx − βxy, δxy − γy)`.
pub fn lotka_volterra(
    alpha: &Rational,
    beta: &Rational,
    gamma: &Rational,
    delta: &Rational,
) -> PolyVectorField {
    let t = |e: [u32; 2], c: Rational| (e.to_vec(), c);
    let x1 = Poly::from_terms(2, [t([1, 0], alpha.clone()), t([1, 1], -beta.clone())]);
    let x2 = Poly::from_terms(2, [t([1, 1], delta.clone()), t([0, 1], -gamma.clone())]);
    PolyVectorField {
        components: vec![x1.expect("degree 2"), x2.expect("degree 2")],
    }
}

/// Exact Rikitake field `(−μx + yz, −μy + x(z − a), 1 − xy)`.
pub fn rikitake(mu: &Rational, a: &Rational) -> PolyVectorField {
    let one = Rational::from_integer(1.into());
    let t = |e: [u32; 3], c: Rational| (e.to_vec(), c);
    let c1 = Poly::from_terms(3, [t([1, 0, 0], -mu.clone()), t([0, 1, 1], one.clone())]);
    let c2 = Poly::from_terms(
        3,
        [
            t([0, 1, 0], -mu.clone()),
            t([1, 0, 1], one.clone()),
            t([1, 0, 0], -a.clone()),
        ],
    );
    let c3 = Poly::from_terms(3, [t([0, 0, 0], one.clone()), t([1, 1, 0], -one)]);
    PolyVectorField {
        components: vec![c1.expect("deg 2"), c2.expect("deg 2"), c3.expect("deg 2")],
    }
}

/// `X(x) = A x`.
pub fn linear(a: &RatMatrix) -> Result<PolyVectorField> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    PolyVectorField::identity(a.nrows()).premultiply(a)
}
