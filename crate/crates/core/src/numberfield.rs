//! Exact arithmetic in `Q` and in simple extensions `Q(th)`.
//!
//! A [`NumberField`] is a cheap, shareable handle around a monic minimal
//! polynomial. [`FieldElement`]s are coordinate vectors in the power basis
//! `1, th, ..., th^(d-1)` and are always kept reduced modulo the minimal
//! polynomial.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("minimal polynomial is not monic")]
    NotMonic,
    #[error("minimal polynomial must have degree at least 1")]
    ZeroDegree,
    #[error("minimal polynomial has the rational root {0}; the extension is reducible")]
    RationalRootFound(BigRational),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("element is a zero divisor (minimal polynomial is reducible)")]
    ZeroDivisor,
}

/// How much of the irreducibility of the minimal polynomial has been verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Irreducibility {
    /// Degree one: the field is `Q` itself.
    Rational,
    /// Degree two or three with no rational root, hence irreducible.
    Checked,
    /// Degree four or more. Only the absence of rational roots was checked.
    Unchecked,
}

#[derive(Debug)]
struct FieldData {
    minpoly: Vec<BigRational>,
    irreducibility: Irreducibility,
}

/// Handle to `Q[th]/(minpoly)`. Clones share the same data.
#[derive(Clone)]
pub struct NumberField(Arc<FieldData>);

impl NumberField {
    /// Builds the field defined by a monic polynomial, given by its
    /// coefficients from the constant term upwards.
    pub fn new(minpoly: Vec<BigRational>) -> Result<Self, FieldError> {
        let mut minpoly = minpoly;
        while minpoly.len() > 1 && minpoly.last().is_some_and(Zero::is_zero) {
            minpoly.pop();
        }
        if minpoly.len() < 2 {
            return Err(FieldError::ZeroDegree);
        }
        if !minpoly.last().unwrap().is_one() {
            return Err(FieldError::NotMonic);
        }
        let degree = minpoly.len() - 1;
        let irreducibility = if degree == 1 {
            Irreducibility::Rational
        } else {
            if let Some(root) = rational_root(&minpoly) {
                return Err(FieldError::RationalRootFound(root));
            }
            if degree <= 3 {
                Irreducibility::Checked
            } else {
                Irreducibility::Unchecked
            }
        };
        Ok(NumberField(Arc::new(FieldData {
            minpoly,
            irreducibility,
        })))
    }

    pub fn from_i64_coeffs(minpoly: &[i64]) -> Result<Self, FieldError> {
        Self::new(minpoly.iter().map(|&c| rat(c)).collect())
    }

    /// The rational numbers, presented as `Q[th]/(th)`.
    pub fn rationals() -> Self {
        Self::from_i64_coeffs(&[0, 1]).expect("th = 0 defines Q")
    }

    pub fn degree(&self) -> usize {
        self.0.minpoly.len() - 1
    }

    pub fn minpoly(&self) -> &[BigRational] {
        &self.0.minpoly
    }

    pub fn irreducibility(&self) -> Irreducibility {
        self.0.irreducibility
    }

    pub fn is_rational(&self) -> bool {
        self.degree() == 1
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            coords: vec![BigRational::zero(); self.degree()],
        }
    }

    pub fn one(&self) -> FieldElement {
        self.from_rational(BigRational::one())
    }

    pub fn from_rational(&self, q: BigRational) -> FieldElement {
        let mut e = self.zero();
        e.coords[0] = q;
        e
    }

    pub fn from_i64(&self, n: i64) -> FieldElement {
        self.from_rational(rat(n))
    }

    /// The generator `th`.
    pub fn theta(&self) -> FieldElement {
        self.from_poly(vec![BigRational::zero(), BigRational::one()])
    }

    /// Reduces an arbitrary polynomial in `th` into the field.
    pub fn from_poly(&self, poly: Vec<BigRational>) -> FieldElement {
        FieldElement {
            field: self.clone(),
            coords: self.reduce(poly),
        }
    }

    /// Builds an element from exactly `degree()` power-basis coordinates.
    pub fn from_coords(&self, coords: Vec<BigRational>) -> FieldElement {
        assert_eq!(coords.len(), self.degree(), "coordinate count must match field degree");
        FieldElement {
            field: self.clone(),
            coords,
        }
    }

    fn reduce(&self, mut poly: Vec<BigRational>) -> Vec<BigRational> {
        let d = self.degree();
        let f = &self.0.minpoly;
        for k in (d..poly.len()).rev() {
            if poly[k].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut poly[k], BigRational::zero());
            for j in 0..d {
                if !f[j].is_zero() {
                    poly[k - d + j] -= &c * &f[j];
                }
            }
        }
        poly.resize(d, BigRational::zero());
        poly
    }

    fn same(&self, other: &NumberField) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.minpoly == other.0.minpoly
    }
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl Eq for NumberField {}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "Q");
        }
        let poly = self.minpoly_display();
        write!(f, "Q(th), {poly} = 0")
    }
}

impl NumberField {
    fn minpoly_display(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.0.minpoly.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            push_signed_term(&mut out, c, k);
        }
        out
    }
}

/// An element of a [`NumberField`], reduced modulo the minimal polynomial.
#[derive(Clone)]
pub struct FieldElement {
    field: NumberField,
    coords: Vec<BigRational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FieldElement {
    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(Zero::is_zero)
    }

    /// The element as a rational number, if it lies in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coords[1..].iter().all(Zero::is_zero) {
            Some(&self.coords[0])
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_rational()
            .filter(|q| q.is_integer())
            .and_then(|q| q.to_integer().to_i64())
    }

    /// Single entry point for the four field operations.
    pub fn arith(&self, other: &FieldElement, op: ArithOp) -> Result<FieldElement, FieldError> {
        match op {
            ArithOp::Add => self.checked_add(other),
            ArithOp::Sub => self.checked_sub(other),
            ArithOp::Mul => self.checked_mul(other),
            ArithOp::Div => self.checked_div(other),
        }
    }

    fn check(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.field.same(&other.field) {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a + b)
            .collect();
        Ok(FieldElement {
            field: self.field.clone(),
            coords,
        })
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a - b)
            .collect();
        Ok(FieldElement {
            field: self.field.clone(),
            coords,
        })
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        let d = self.coords.len();
        if d == 1 {
            return Ok(FieldElement {
                field: self.field.clone(),
                coords: vec![&self.coords[0] * &other.coords[0]],
            });
        }
        let mut prod = vec![BigRational::zero(); 2 * d - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Ok(self.field.from_poly(prod))
    }

    pub fn checked_div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        self.checked_mul(&other.inv()?)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// the minimal polynomial.
    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(self.field.from_rational(q.recip()));
        }
        let f = self.field.minpoly().to_vec();
        let b = trim(self.coords.clone());
        let (mut r0, mut r1) = (f, b);
        let (mut s0, mut s1) = (Vec::new(), vec![BigRational::one()]);
        while !r1.is_empty() {
            let (q, r) = poly_divrem(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        if r0.len() != 1 {
            return Err(FieldError::ZeroDivisor);
        }
        let scale = r0[0].recip();
        let s: Vec<_> = s0.into_iter().map(|c| c * &scale).collect();
        Ok(self.field.from_poly(s))
    }

    pub fn pow(&self, mut e: u32) -> FieldElement {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn scale_rational(&self, q: &BigRational) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().map(|c| c * q).collect(),
        }
    }

    /// True when the printed form needs no parentheses inside a product.
    pub(crate) fn is_monomial_in_theta(&self) -> bool {
        self.coords.iter().filter(|c| !c.is_zero()).count() <= 1
    }

    /// Sign of the single nonzero coordinate, when there is exactly one.
    pub(crate) fn leading_sign_negative(&self) -> bool {
        self.is_monomial_in_theta() && self.coords.iter().any(|c| c.is_negative())
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field.same(&other.field) && self.coords == other.coords
    }
}

impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (k, c) in self.coords.iter().enumerate() {
            if !c.is_zero() {
                push_signed_term(&mut out, c, k);
            }
        }
        f.write_str(&out)
    }
}

fn push_signed_term(out: &mut String, c: &BigRational, power: usize) {
    let neg = c.is_negative();
    let mag = c.abs();
    if out.is_empty() {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    let var = match power {
        0 => None,
        1 => Some("th".to_string()),
        k => Some(format!("th^{k}")),
    };
    match var {
        None => out.push_str(&fmt_rational(&mag)),
        Some(v) if mag.is_one() => out.push_str(&v),
        Some(v) => {
            out.push_str(&fmt_rational(&mag));
            out.push('*');
            out.push_str(&v);
        }
    }
}

pub(crate) fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            /// Panics if the operands live in different fields.
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field mismatch")
            }
        }
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$checked(&rhs).expect("field mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// Dense polynomials over Q, lowest degree first, no trailing zeros.

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            match b.get(i) {
                Some(y) => x - y,
                None => x,
            }
        })
        .collect();
    trim(out)
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() >= b.len() {
        let k = r.len() - 1 - db;
        let c = r.last().unwrap() / &lead;
        for (j, bj) in b.iter().enumerate() {
            r[k + j] -= &c * bj;
        }
        q[k] = c;
        r = trim(r);
    }
    (trim(q), r)
}

fn eval(poly: &[BigRational], x: &BigRational) -> BigRational {
    poly.iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut k = BigInt::one();
    while &k * &k <= n {
        if n.is_multiple_of(&k) {
            let other = &n / &k;
            if other != k {
                large.push(other);
            }
            small.push(k.clone());
        }
        k += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Rational root theorem search on the integer multiple of `poly`.
fn rational_root(poly: &[BigRational]) -> Option<BigRational> {
    let lcm = poly
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = poly
        .iter()
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    if ints[0].is_zero() {
        return Some(BigRational::zero());
    }
    let lead = ints.last().unwrap();
    for p in divisors(&ints[0]) {
        for q in divisors(lead) {
            for sign in [1, -1] {
                let cand = BigRational::new(&p * BigInt::from(sign), q.clone());
                if eval(poly, &cand).is_zero() {
                    return Some(cand);
                }
            }
        }
    }
    None
}
