//! Random generators shared by the integration tests.
#![allow(dead_code)]

use geodecomp::polyfield::{Poly, PolyVectorField};
use geodecomp::rational::{format_rational, rat, rational_to_f64};
use geodecomp::{GeometricStructure, RatMatrix, Rational, Side};
use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramKind {
    General,
    Symmetric,
    Skew,
    /// Symmetric positive definite.
    Spd,
}

pub fn rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    rat(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

pub fn nonneg_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    rat(rng.gen_range(0..=max_num), rng.gen_range(1..=max_den))
}

/// An invertible rational Gram matrix of the requested kind.
pub fn gram<R: Rng>(rng: &mut R, n: usize, kind: GramKind) -> RatMatrix {
    assert!(kind != GramKind::Skew || n % 2 == 0, "skew forms need even dimension");
    loop {
        let mut g = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = rational(rng, 4, 3);
            }
        }
        let g = match kind {
            GramKind::General => g,
            GramKind::Symmetric => sym(&g),
            GramKind::Skew => g.sub(&g.transpose()).unwrap(),
            GramKind::Spd => {
                // Mᵀ M + I
                g.transpose().mul(&g).unwrap().add(&RatMatrix::identity(n)).unwrap()
            }
        };
        if !g.determinant().unwrap().is_zero() {
            let s = GeometricStructure::from_rational_gram(g.clone());
            if s.is_ok() {
                return g;
            }
        }
    }
}

fn sym(g: &RatMatrix) -> RatMatrix {
    g.add(&g.transpose()).unwrap()
}

pub fn structure<R: Rng>(rng: &mut R, n: usize, kind: GramKind) -> GeometricStructure {
    GeometricStructure::from_rational_gram(gram(rng, n, kind)).unwrap()
}

/// Random exponent vector of total degree `d`.
fn exponents<R: Rng>(rng: &mut R, n: usize, d: u32) -> Vec<u32> {
    let mut e = vec![0u32; n];
    for _ in 0..d {
        e[rng.gen_range(0..n)] += 1;
    }
    e
}

/// Random polynomial with degrees in `min_deg..=max_deg`.
pub fn poly<R: Rng>(rng: &mut R, n: usize, min_deg: u32, max_deg: u32, terms: usize) -> Poly {
    let t: Vec<(Vec<u32>, Rational)> = (0..terms)
        .map(|_| {
            let d = rng.gen_range(min_deg..=max_deg);
            (exponents(rng, n, d), rational(rng, 5, 4))
        })
        .collect();
    Poly::from_terms(n, t).unwrap()
}

pub fn field<R: Rng>(rng: &mut R, n: usize, max_deg: u32, terms: usize) -> PolyVectorField {
    PolyVectorField::new((0..n).map(|_| poly(rng, n, 0, max_deg, terms)).collect()).unwrap()
}

/// Skew matrix of polynomials of degree at most `max_deg`.
pub fn skew_poly_matrix<R: Rng>(rng: &mut R, n: usize, max_deg: u32, terms: usize) -> Vec<Vec<Poly>> {
    let mut w = vec![vec![Poly::zero(n); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let p = poly(rng, n, 0, max_deg, terms);
            w[j][i] = p.neg();
            w[i][j] = p;
        }
    }
    w
}

/// `M W(x) x`; with `W` skew this is orthogonal to `x` for the matching side
/// when `M = B` (right) or `M = Bᵀ` (left).
pub fn orthogonal_remainder(s: &GeometricStructure, w: &[Vec<Poly>], side: Side) -> PolyVectorField {
    let n = w.len();
    let wx: Vec<Poly> = (0..n)
        .map(|i| {
            let mut acc = Poly::zero(n);
            for (j, wij) in w[i].iter().enumerate() {
                acc = acc.add(&wij.mul(&Poly::var(n, j).unwrap()).unwrap()).unwrap();
            }
            acc
        })
        .collect();
    let ex = s.exact().unwrap();
    let m = match side {
        Side::Right => &ex.b_matrix,
        Side::Left => &ex.b_star,
    };
    PolyVectorField::new(wx).unwrap().premultiply(m).unwrap()
}

/// Random point with dyadic coordinates in `[−r, r]`, exact in both forms.
pub fn dyadic_point<R: Rng>(rng: &mut R, n: usize, r: i64) -> (Vec<Rational>, DVector<f64>) {
    let exact: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(-64 * r..=64 * r), 64)).collect();
    let float = DVector::from_iterator(n, exact.iter().map(rational_to_f64));
    (exact, float)
}

pub fn float_point<R: Rng>(rng: &mut R, n: usize, r: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-r..r))
}

/// Random float Gram matrix: general with a diagonal shift for conditioning.
pub fn float_gram<R: Rng>(rng: &mut R, n: usize, kind: GramKind) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    match kind {
        GramKind::General => m + DMatrix::identity(n, n) * 2.5,
        GramKind::Symmetric => {
            let signs = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    if i % 2 == 0 {
                        3.0
                    } else {
                        -3.0
                    }
                } else {
                    0.0
                }
            });
            (&m + m.transpose()) * 0.5 + signs
        }
        GramKind::Skew => {
            let j = geodecomp::geometry::canonical_symplectic(n).unwrap().to_f64();
            (&m - m.transpose()) * 0.5 + j * 3.0
        }
        GramKind::Spd => &m * m.transpose() + DMatrix::identity(n, n),
    }
}

pub fn rationals_text(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(", ")
}

fn v3(a: f64, b: f64, c: f64) -> DVector<f64> {
    DVector::from_vec(vec![a, b, c])
}

fn m3(rows: [[f64; 3]; 3]) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| rows[i][j])
}

/// Five smooth non-polynomial fields on ℝ³ with hand-derived Jacobians.
pub fn transcendental_fields() -> Vec<geodecomp::NumericVectorField> {
    use geodecomp::NumericVectorField as F;
    vec![
        F::new(3, "sin-exp", |p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            v3(y.sin() + z * x, (x * z).cos(), x.exp() - y)
        })
        .with_jacobian(|p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            let s = (x * z).sin();
            m3([[z, y.cos(), x], [-z * s, 0.0, -x * s], [x.exp(), -1.0, 0.0]])
        }),
        F::new(3, "tanh-gauss", |p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            v3((x + y).tanh(), z.sin() * y, (-x * x).exp())
        })
        .with_jacobian(|p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            let sech2 = 1.0 - (x + y).tanh().powi(2);
            m3([
                [sech2, sech2, 0.0],
                [0.0, z.sin(), y * z.cos()],
                [-2.0 * x * (-x * x).exp(), 0.0, 0.0],
            ])
        }),
        F::new(3, "log-atan", |p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            v3(x * y.exp(), (1.0 + z * z).ln(), (x - z).atan())
        })
        .with_jacobian(|p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            let d = 1.0 / (1.0 + (x - z).powi(2));
            m3([
                [y.exp(), x * y.exp(), 0.0],
                [0.0, 0.0, 2.0 * z / (1.0 + z * z)],
                [d, 0.0, -d],
            ])
        }),
        F::new(3, "trig-product", |p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            v3(x.cos() * y.sin(), (z / 2.0).exp() * x, (x * y).sin() + z)
        })
        .with_jacobian(|p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            let c = (x * y).cos();
            m3([
                [-x.sin() * y.sin(), x.cos() * y.cos(), 0.0],
                [(z / 2.0).exp(), 0.0, 0.5 * (z / 2.0).exp() * x],
                [y * c, x * c, 1.0],
            ])
        }),
        F::new(3, "rational-mix", |p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            v3(1.0 / (1.0 + x * x + y * y), y * z.cos(), x * z.sin() - y.exp())
        })
        .with_jacobian(|p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            let q = 1.0 + x * x + y * y;
            m3([
                [-2.0 * x / (q * q), -2.0 * y / (q * q), 0.0],
                [0.0, z.cos(), -y * z.sin()],
                [z.sin(), -y.exp(), x * z.cos()],
            ])
        }),
    ]
}
