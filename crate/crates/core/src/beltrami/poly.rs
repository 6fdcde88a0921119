//! Bivariate polynomials with exact rational coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("cannot parse '{0}' as a polynomial term")]
    BadTerm(String),
    #[error("cannot parse '{0}' as a rational coefficient")]
    BadCoefficient(String),
    #[error("cannot parse exponent in '{0}'")]
    BadExponent(String),
}

/// Sparse polynomial in x and y; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BivariatePoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl BivariatePoly {
    pub fn zero() -> Self {
        BivariatePoly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(dx: u32, dy: u32, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((dx, dy), c);
        }
        BivariatePoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, dx: u32, dy: u32) -> BigRational {
        self.terms
            .get(&(dx, dy))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn insert(&mut self, key: (u32, u32), c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        BivariatePoly {
            terms: self
                .terms
                .iter()
                .map(|(&k, v)| (k, v * c))
                .collect(),
        }
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                out.insert((i - 1, j), c * BigRational::from(BigInt::from(i)));
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            if j > 0 {
                out.insert((i, j - 1), c * BigRational::from(BigInt::from(j)));
            }
        }
        out
    }

    /// Antiderivative in x with zero constant term.
    pub fn integrate_x(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            out.insert((i + 1, j), c / BigRational::from(BigInt::from(i + 1)));
        }
        out
    }

    /// Antiderivative in y with zero constant term.
    pub fn integrate_y(&self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            out.insert((i, j + 1), c / BigRational::from(BigInt::from(j + 1)));
        }
        out
    }

    /// Terms free of x, as a polynomial in y only.
    pub fn x_free_part(&self) -> Self {
        BivariatePoly {
            terms: self
                .terms
                .iter()
                .filter(|(&(i, _), _)| i == 0)
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
        }
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| rational_to_f64(c) * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub fn eval_exact(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&(i, j), c) in &self.terms {
            acc += c * pow_rational(x, i) * pow_rational(y, j);
        }
        acc
    }
}

pub fn pow_rational(base: &BigRational, exp: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // denormal-range fallback: split into integer part + remainder
        let i = r.to_integer();
        i.to_f64().unwrap_or(f64::NAN)
    })
}

impl Add for &BivariatePoly {
    type Output = BivariatePoly;
    fn add(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.insert(k, c.clone());
        }
        out
    }
}

impl Sub for &BivariatePoly {
    type Output = BivariatePoly;
    fn sub(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.insert(k, -c.clone());
        }
        out
    }
}

impl Neg for &BivariatePoly {
    type Output = BivariatePoly;
    fn neg(self) -> BivariatePoly {
        BivariatePoly {
            terms: self.terms.iter().map(|(&k, c)| (k, -c.clone())).collect(),
        }
    }
}

impl Mul for &BivariatePoly {
    type Output = BivariatePoly;
    fn mul(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = BivariatePoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.insert((i1 + i2, j1 + j2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}*{}", monomial_str(i, j))?;
        }
        Ok(())
    }
}

pub fn monomial_str(i: u32, j: u32) -> String {
    format!("x^{i}*y^{j}")
}

/// Parses sums of terms like `3*x^2*y`, `-1/2*y^4`, `x`, `7`.
pub fn parse_poly(text: &str) -> Result<BivariatePoly, PolyError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Ok(BivariatePoly::zero());
    }
    let mut out = BivariatePoly::zero();
    let mut term = String::new();
    let mut terms: Vec<String> = Vec::new();
    for c in compact.chars() {
        match c {
            '+' | '-' if !term.is_empty() => {
                terms.push(std::mem::take(&mut term));
                if c == '-' {
                    term.push('-');
                }
            }
            '-' => term.push('-'),
            _ => term.push(c),
        }
    }
    if !term.is_empty() {
        terms.push(term);
    }
    for t in terms {
        let (i, j, coeff) = parse_term(&t)?;
        out.insert((i, j), coeff);
    }
    Ok(out)
}

fn parse_term(term: &str) -> Result<(u32, u32, BigRational), PolyError> {
    let mut coeff = BigRational::one();
    let mut body = term;
    if let Some(stripped) = body.strip_prefix('-') {
        coeff = -coeff;
        body = stripped;
    }
    if body.is_empty() {
        return Err(PolyError::BadTerm(term.to_string()));
    }
    let mut dx = 0u32;
    let mut dy = 0u32;
    for factor in body.split('*') {
        if factor.is_empty() {
            return Err(PolyError::BadTerm(term.to_string()));
        }
        if factor.starts_with('x') || factor.starts_with('y') {
            let exp = match factor[1..].strip_prefix('^') {
                None if factor.len() == 1 => 1u32,
                Some(e) => e
                    .parse::<u32>()
                    .map_err(|_| PolyError::BadExponent(factor.to_string()))?,
                None => return Err(PolyError::BadTerm(factor.to_string())),
            };
            if factor.starts_with('x') {
                dx += exp;
            } else {
                dy += exp;
            }
        } else {
            coeff *= parse_rational(factor)?;
        }
    }
    Ok((dx, dy, coeff))
}

pub fn parse_rational(text: &str) -> Result<BigRational, PolyError> {
    let parse_int = |s: &str| {
        s.parse::<BigInt>()
            .map_err(|_| PolyError::BadCoefficient(text.to_string()))
    };
    match text.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(PolyError::BadCoefficient(text.to_string()));
            }
            Ok(BigRational::new(parse_int(n)?, den))
        }
        None => Ok(BigRational::from(parse_int(text)?)),
    }
}
