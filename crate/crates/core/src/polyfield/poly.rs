use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{check_dim, Error, Result};
use crate::rational::{format_rational, parse_rational, rational_to_f64, Rational};

pub const MAX_TOTAL_DEGREE: u32 = 64;

/// Exponent multi-index, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        let m = Monomial(exponents);
        if m.degree() > MAX_TOTAL_DEGREE {
            return Err(Error::DegreeOverflow(m.degree()));
        }
        Ok(m)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        Monomial::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is polynomial
/// equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.insert(Monomial::one(nvars), c);
        p
    }

    /// The coordinate function `x_{i+1}` (0-based `i`).
    pub fn var(nvars: usize, i: usize) -> Result<Self> {
        if i >= nvars {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                found: i + 1,
            });
        }
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(&e, Rational::one())
    }

    pub fn monomial(exponents: &[u32], c: Rational) -> Result<Self> {
        let mut p = Self::zero(exponents.len());
        p.insert(Monomial::new(exponents.to_vec())?, c);
        Ok(p)
    }

    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            check_dim(nvars, e.len())?;
            p.insert(Monomial::new(e)?, c);
        }
        Ok(p)
    }

    fn insert(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.nvars])
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.nvars, other.nvars)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.nvars, other.nvars)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.nvars, other.nvars)?;
        let mut out = Self::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.insert(m1.mul(m2)?, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), -v)).collect(),
        }
    }

    /// `∂/∂x_{i+1}` (0-based `i`).
    pub fn partial(&self, i: usize) -> Result<Self> {
        if i >= self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: i + 1,
            });
        }
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[i] -= 1;
            out.insert(Monomial(exps), c * Rational::from_integer(BigInt::from(e)));
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Vec<Poly> {
        (0..self.nvars)
            .map(|i| self.partial(i).expect("index in range"))
            .collect()
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Rational> {
        check_dim(self.nvars, x.len())?;
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.nvars, x.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .zip(x)
                    .fold(rational_to_f64(c), |acc, (&e, xi)| acc * xi.powi(e as i32))
            })
            .sum())
    }

    /// Splits into homogeneous components, keyed by degree.
    pub fn homogeneous_parts(&self) -> BTreeMap<u32, Poly> {
        let mut parts: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            parts
                .entry(m.degree())
                .or_insert_with(|| Poly::zero(self.nvars))
                .insert(m.clone(), c.clone());
        }
        parts
    }

    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms
            .values()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Parses the text form produced by `Display`, e.g. `1/2*x1^2 - x1*x2 + 3`.
    ///
    /// Variables are `x1 … xn`; for `n ≤ 3` the aliases `x, y, z` are accepted.
    pub fn parse(nvars: usize, text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let bytes = s.as_bytes();
        let mut chunks = Vec::new();
        let mut start = 0;
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'*' | b'/' | b'^')
            {
                chunks.push(&s[start..i]);
                start = i;
            }
        }
        chunks.push(&s[start..]);
        let mut out = Self::zero(nvars);
        for chunk in chunks {
            let (sign, body) = match chunk.as_bytes().first() {
                Some(b'-') => (-Rational::one(), &chunk[1..]),
                Some(b'+') => (Rational::one(), &chunk[1..]),
                _ => (Rational::one(), chunk),
            };
            if body.is_empty() {
                return Err(Error::Parse(format!("dangling sign in {text:?}")));
            }
            let mut coeff = sign;
            let mut exps = vec![0u32; nvars];
            for factor in body.split('*') {
                if factor.is_empty() {
                    return Err(Error::Parse(format!("empty factor in {text:?}")));
                }
                if factor.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
                    coeff *= parse_rational(factor)?;
                    continue;
                }
                let (name, exp) = match factor.split_once('^') {
                    Some((n, e)) => (
                        n,
                        e.parse::<u32>()
                            .map_err(|_| Error::Parse(format!("bad exponent in {factor:?}")))?,
                    ),
                    None => (factor, 1),
                };
                let idx = variable_index(nvars, name)?;
                exps[idx] = exps[idx]
                    .checked_add(exp)
                    .ok_or(Error::DegreeOverflow(u32::MAX))?;
            }
            out.insert(Monomial::new(exps)?, coeff);
        }
        Ok(out)
    }

    pub fn to_string_with(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let abs = c.abs();
            let factors: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    let name = names
                        .get(i)
                        .map_or_else(|| format!("x{}", i + 1), |n| n.to_string());
                    if e == 1 {
                        name
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            if factors.is_empty() {
                out.push_str(&format_rational(&abs));
            } else if abs.is_one() {
                out.push_str(&factors.join("*"));
            } else {
                out.push_str(&format_rational(&abs));
                out.push('*');
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

fn variable_index(nvars: usize, name: &str) -> Result<usize> {
    let alias = match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => None,
    };
    let idx = match alias {
        Some(i) if nvars <= 3 => i,
        Some(_) => {
            return Err(Error::Parse(format!(
                "alias {name:?} only allowed for n <= 3"
            )))
        }
        None => name
            .strip_prefix('x')
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&k| k >= 1)
            .map(|k| k - 1)
            .ok_or_else(|| Error::Parse(format!("unknown variable {name:?}")))?,
    };
    if idx >= nvars {
        return Err(Error::Parse(format!(
            "variable {name:?} out of range for {nvars} variables"
        )));
    }
    Ok(idx)
}

/// `x, y, z` for up to three variables, `x1, ..., xn` otherwise.
pub(crate) fn default_names(n: usize) -> &'static [&'static str] {
    if n <= 3 {
        &["x", "y", "z"][..n]
    } else {
        &[]
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(default_names(self.nvars)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn p(n: usize, s: &str) -> Poly {
        Poly::parse(n, s).unwrap()
    }

    #[test]
    fn partial_of_x2y() {
        assert_eq!(p(2, "x1^2*x2").partial(0).unwrap(), p(2, "2*x1*x2"));
        assert!(p(2, "x1").partial(2).is_err());
    }

    #[test]
    fn difference_of_squares() {
        let a = p(2, "x + y");
        let b = p(2, "x - y");
        assert_eq!(a.mul(&b).unwrap(), p(2, "x^2 - y^2"));
    }

    #[test]
    fn eval_exact() {
        let xyz = p(3, "x*y*z");
        assert_eq!(xyz.eval(&[int(1), int(2), int(3)]).unwrap(), int(6));
        let q = p(2, "1/2*x^2 - 1/3*y");
        assert_eq!(q.eval(&[int(1), int(1)]).unwrap(), rat(1, 6));
        assert!((q.eval_f64(&[1.0, 1.0]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_display_is_graded_lex_descending() {
        let q = p(3, "z + x*y - 3/6*x^2 + 7");
        assert_eq!(q.to_string(), "-1/2*x^2 + x*y + z + 7");
        assert_eq!(q.to_string_with(&[]), "-1/2*x1^2 + x1*x2 + x3 + 7");
        let w = p(4, "x4^2 - x1");
        assert_eq!(w.to_string(), "x4^2 - x1");
        assert_eq!(Poly::parse(4, &w.to_string()).unwrap(), w);
        assert_eq!(Poly::parse(3, &q.to_string()).unwrap(), q);
        assert_eq!(Poly::zero(2).to_string(), "0");
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let a = p(2, "x*y + 1");
        let b = a.sub(&a).unwrap();
        assert!(b.is_zero());
        assert_eq!(b.num_terms(), 0);
    }

    #[test]
    fn degree_cap() {
        let x = p(1, "x^40");
        assert_eq!(x.mul(&x).unwrap_err(), Error::DegreeOverflow(80));
        assert!(Poly::parse(1, "x^65").is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(Poly::parse(2, "x3").is_err());
        assert!(Poly::parse(2, "x1 +").is_err());
        assert!(Poly::parse(2, "").is_err());
        assert!(Poly::parse(4, "x").is_err());
        assert!(Poly::parse(2, "x1**x2").is_err());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(p(2, "x").add(&p(3, "x")).is_err());
        assert!(p(2, "x").eval(&[int(1)]).is_err());
    }
}
