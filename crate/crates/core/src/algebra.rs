//! The algebra `W(l1, l2, l3, Gamma)`: basis monomials `x^{alpha,i} d^mu`,
//! the associative product, the Lie bracket and the derivation action on the
//! commutative part `A`.
//!
//! Axes are numbered from 1 in the public API, matching the printed names
//! `t1`, `d1`. Axes `1..=l1` carry no `Gamma` component, axes
//! `l1+1..=l1+l2` carry both `t` and `x` weight, and the last `l3` axes carry
//! only `x` weight.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::gamma::{GammaError, GammaGroup, GroupElem};
use crate::numberfield::{FieldElement, NumberField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeylError {
    #[error("l1 + l2 + l3 must be positive")]
    EmptySignature,
    #[error("Gamma lives in F^{found} but l2 + l3 = {expected}")]
    GammaDimension { expected: usize, found: usize },
    #[error("operands belong to different algebras")]
    SignatureMismatch,
    #[error("axis {axis} out of range 1..={max}")]
    AxisOutOfRange { axis: usize, max: usize },
    #[error("element is not in the commutative subalgebra A")]
    NotInA,
    #[error("chosen group elements do not form an F-basis")]
    NotABasis,
    #[error(transparent)]
    Gamma(#[from] GammaError),
}

/// The data `(l1, l2, l3, Gamma)` defining one algebra.
#[derive(Debug, PartialEq, Eq)]
pub struct Signature {
    l1: usize,
    l2: usize,
    l3: usize,
    gamma: GammaGroup,
}

pub type Sig = Arc<Signature>;

impl Signature {
    pub fn new(l1: usize, l2: usize, l3: usize, gamma: GammaGroup) -> Result<Sig, WeylError> {
        if l1 + l2 + l3 == 0 {
            return Err(WeylError::EmptySignature);
        }
        if gamma.dim() != l2 + l3 {
            return Err(WeylError::GammaDimension {
                expected: l2 + l3,
                found: gamma.dim(),
            });
        }
        Ok(Arc::new(Signature { l1, l2, l3, gamma }))
    }

    pub fn l1(&self) -> usize {
        self.l1
    }

    pub fn l2(&self) -> usize {
        self.l2
    }

    pub fn l3(&self) -> usize {
        self.l3
    }

    /// Total number of axes `l = l1 + l2 + l3`.
    pub fn len(&self) -> usize {
        self.l1 + self.l2 + self.l3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of `t` variables, `l1 + l2`.
    pub fn t_axes(&self) -> usize {
        self.l1 + self.l2
    }

    pub fn tuple(&self) -> (usize, usize, usize) {
        (self.l1, self.l2, self.l3)
    }

    pub fn gamma(&self) -> &GammaGroup {
        &self.gamma
    }

    pub fn field(&self) -> &NumberField {
        self.gamma.field()
    }

    /// `alpha_p` for a 0-based axis; zero on the first `l1` axes.
    pub(crate) fn alpha_at(&self, alpha: &GroupElem, axis0: usize) -> FieldElement {
        if axis0 < self.l1 {
            self.field().zero()
        } else {
            self.gamma.coordinate(alpha, axis0 - self.l1)
        }
    }

    /// `alpha` written over all `l` axes.
    pub fn alpha_full(&self, alpha: &GroupElem) -> Vec<FieldElement> {
        let mut v = vec![self.field().zero(); self.l1];
        v.extend(self.gamma.embed(alpha));
        v
    }

    fn check_axis(&self, axis: usize, max: usize) -> Result<usize, WeylError> {
        if axis == 0 || axis > max {
            Err(WeylError::AxisOutOfRange { axis, max })
        } else {
            Ok(axis - 1)
        }
    }
}

fn same_sig(a: &Sig, b: &Sig) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A multi-index in `N^l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(len: usize) -> Self {
        MultiIndex(vec![0; len])
    }

    /// `1_[p]` for a 1-based axis `p`.
    pub fn unit(len: usize, p: usize) -> Self {
        let mut v = vec![0; len];
        v[p - 1] = 1;
        MultiIndex(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn level(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

/// Level first, then the first axis where the entries differ.
pub fn compare_index(mu: &MultiIndex, nu: &MultiIndex) -> Ordering {
    assert_eq!(mu.0.len(), nu.0.len(), "multi-indices of different length");
    mu.level()
        .cmp(&nu.level())
        .then_with(|| mu.0.cmp(&nu.0))
}

/// `prod_p binom(mu_p, lambda_p)`; zero unless `lambda <= mu`.
pub fn multi_binom(mu: &MultiIndex, lambda: &MultiIndex) -> BigInt {
    mu.0.iter()
        .zip(&lambda.0)
        .map(|(&m, &l)| binom(m, l))
        .product()
}

pub(crate) fn binom(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Falling factorial `n (n-1) ... (n-r+1)`.
fn falling(n: u32, r: u32) -> BigInt {
    (0..r).map(|j| BigInt::from(n - j)).product()
}

/// A basis monomial `x^{alpha, i} d^mu`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub alpha: GroupElem,
    pub i: MultiIndex,
    pub mu: MultiIndex,
}

impl Monomial {
    pub fn one(sig: &Signature) -> Self {
        Monomial {
            alpha: GroupElem::zero(sig.gamma.rank()),
            i: MultiIndex::zero(sig.len()),
            mu: MultiIndex::zero(sig.len()),
        }
    }

    pub fn is_one(&self) -> bool {
        self.alpha.is_zero() && self.i.is_zero() && self.mu.is_zero()
    }

    /// Whether this is a monomial of `A` (no derivation part).
    pub fn is_pure_a(&self) -> bool {
        self.mu.is_zero()
    }

    /// Product in the semigroup `Gamma x J1`: adds `alpha` and `i` parts.
    pub fn semigroup_mul(&self, other: &Monomial) -> Result<Monomial, WeylError> {
        if self.i.0.len() != other.i.0.len() || self.alpha.coords().len() != other.alpha.coords().len() {
            return Err(WeylError::SignatureMismatch);
        }
        if !self.is_pure_a() || !other.is_pure_a() {
            return Err(WeylError::NotInA);
        }
        Ok(Monomial {
            alpha: self.alpha.add(&other.alpha),
            i: self.i.plus(&other.i),
            mu: self.mu.clone(),
        })
    }

    /// Total degree in `t` and `d`.
    pub fn degree(&self) -> u32 {
        self.i.level() + self.mu.level()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.alpha
            .cmp(&other.alpha)
            .then_with(|| self.i.0.cmp(&other.i.0))
            .then_with(|| compare_index(&self.mu, &other.mu))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite `F`-linear combination of monomials. Zero coefficients are never
/// stored.
#[derive(Clone)]
pub struct WeylElement {
    sig: Sig,
    terms: BTreeMap<Monomial, FieldElement>,
}

fn add_term(terms: &mut BTreeMap<Monomial, FieldElement>, m: Monomial, c: FieldElement) {
    if c.is_zero() {
        return;
    }
    match terms.entry(m) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = e.get() + &c;
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

// `is_zero` plays the role of `is_empty`.
#[allow(clippy::len_without_is_empty)]
impl WeylElement {
    pub fn zero(sig: &Sig) -> Self {
        WeylElement {
            sig: sig.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(sig: &Sig, c: FieldElement) -> Self {
        Self::monomial(sig, Monomial::one(sig), c)
    }

    pub fn one(sig: &Sig) -> Self {
        Self::scalar(sig, sig.field().one())
    }

    pub fn from_i64(sig: &Sig, n: i64) -> Self {
        Self::scalar(sig, sig.field().from_i64(n))
    }

    pub fn monomial(sig: &Sig, m: Monomial, c: FieldElement) -> Self {
        let mut terms = BTreeMap::new();
        add_term(&mut terms, m, c);
        WeylElement {
            sig: sig.clone(),
            terms,
        }
    }

    /// `t_k` for `1 <= k <= l1 + l2`.
    pub fn t(sig: &Sig, k: usize) -> Result<Self, WeylError> {
        sig.check_axis(k, sig.t_axes())?;
        let mut m = Monomial::one(sig);
        m.i = MultiIndex::unit(sig.len(), k);
        Ok(Self::monomial(sig, m, sig.field().one()))
    }

    /// `d_k` for `1 <= k <= l`.
    pub fn d(sig: &Sig, k: usize) -> Result<Self, WeylError> {
        sig.check_axis(k, sig.len())?;
        let mut m = Monomial::one(sig);
        m.mu = MultiIndex::unit(sig.len(), k);
        Ok(Self::monomial(sig, m, sig.field().one()))
    }

    /// `x^alpha`.
    pub fn x(sig: &Sig, alpha: GroupElem) -> Self {
        let mut m = Monomial::one(sig);
        m.alpha = alpha;
        Self::monomial(sig, m, sig.field().one())
    }

    pub fn signature(&self) -> &Sig {
        &self.sig
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &FieldElement)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> FieldElement {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.sig.field().zero())
    }

    /// The leading monomial in the print order.
    pub fn leading(&self) -> Option<(&Monomial, &FieldElement)> {
        self.terms.iter().next_back()
    }

    /// `Some(c)` when the element is the scalar `c` (including zero).
    pub fn as_scalar(&self) -> Option<FieldElement> {
        match self.terms.len() {
            0 => Some(self.sig.field().zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.as_scalar().is_some()
    }

    /// Whether every term lies in `A`.
    pub fn is_in_a(&self) -> bool {
        self.terms.keys().all(Monomial::is_pure_a)
    }

    /// Maximum total `t`/`d` degree over the terms.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &FieldElement) -> WeylElement {
        if c.is_zero() {
            return Self::zero(&self.sig);
        }
        WeylElement {
            sig: self.sig.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    fn check(&self, other: &WeylElement) -> Result<(), WeylError> {
        if same_sig(&self.sig, &other.sig) {
            Ok(())
        } else {
            Err(WeylError::SignatureMismatch)
        }
    }

    pub fn try_add(&self, other: &WeylElement) -> Result<WeylElement, WeylError> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut terms, m.clone(), c.clone());
        }
        Ok(WeylElement {
            sig: self.sig.clone(),
            terms,
        })
    }

    pub fn try_sub(&self, other: &WeylElement) -> Result<WeylElement, WeylError> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut terms, m.clone(), -c);
        }
        Ok(WeylElement {
            sig: self.sig.clone(),
            terms,
        })
    }

    /// The associative product, expanded over all term pairs.
    pub fn try_mul(&self, other: &WeylElement) -> Result<WeylElement, WeylError> {
        self.check(other)?;
        let sig = &self.sig;
        let mut out = BTreeMap::new();
        // alpha coordinates of the right factor, computed once per term
        let right: Vec<(&Monomial, &FieldElement, Vec<FieldElement>)> = other
            .terms
            .iter()
            .map(|(m, c)| {
                let betas = (0..sig.len()).map(|p| sig.alpha_at(&m.alpha, p)).collect();
                (m, c, betas)
            })
            .collect();
        for (m1, c1) in &self.terms {
            for (m2, c2, betas) in &right {
                mul_terms(sig, m1, c1, m2, c2, betas, &mut out);
            }
        }
        Ok(WeylElement {
            sig: sig.clone(),
            terms: out,
        })
    }

    /// `[u, v] = uv - vu`.
    pub fn bracket(&self, other: &WeylElement) -> Result<WeylElement, WeylError> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    pub fn pow(&self, e: u32) -> WeylElement {
        let mut acc = Self::one(&self.sig);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `d_p(a)` for an element `a` of `A`, `p` 1-based.
    pub fn derive(&self, p: usize) -> Result<WeylElement, WeylError> {
        let p0 = self.sig.check_axis(p, self.sig.len())?;
        if !self.is_in_a() {
            return Err(WeylError::NotInA);
        }
        Ok(self.derive_unchecked(p0))
    }

    fn derive_unchecked(&self, p0: usize) -> WeylElement {
        let sig = &self.sig;
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let ap = sig.alpha_at(&m.alpha, p0);
            if !ap.is_zero() {
                add_term(&mut out, m.clone(), c * &ap);
            }
            let ip = m.i.0[p0];
            if ip > 0 {
                let mut lowered = m.clone();
                lowered.i.0[p0] -= 1;
                add_term(&mut out, lowered, c * &sig.field().from_i64(ip as i64));
            }
        }
        WeylElement {
            sig: sig.clone(),
            terms: out,
        }
    }

    /// Sums the given terms; zero coefficients and cancellations are pruned.
    pub fn from_terms(sig: &Sig, terms: impl IntoIterator<Item = (Monomial, FieldElement)>) -> Self {
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            add_term(&mut map, m, c);
        }
        WeylElement {
            sig: sig.clone(),
            terms: map,
        }
    }
}

/// Adds `(c1 x^{alpha,i} d^mu) * (c2 x^{beta,j} d^nu)` into `out`.
///
/// Uses `d^lambda (x^{beta,j}) = prod_p (beta_p + D_p)^{lambda_p}` with `D_p`
/// the plain partial derivative in `t_p`, which factorises over axes: every
/// axis independently picks `lambda_p <= mu_p` and a number `r_p` of
/// `t_p`-derivatives.
fn mul_terms(
    sig: &Signature,
    m1: &Monomial,
    c1: &FieldElement,
    m2: &Monomial,
    c2: &FieldElement,
    betas: &[FieldElement],
    out: &mut BTreeMap<Monomial, FieldElement>,
) {
    let field = sig.field();
    let l = sig.len();
    // per axis: (lambda_p, r_p, factor)
    let mut choices: Vec<Vec<(u32, u32, FieldElement)>> = Vec::with_capacity(l);
    for p in 0..l {
        let mu = m1.mu.0[p];
        let j = m2.i.0[p];
        let beta = &betas[p];
        let mut axis = Vec::new();
        for lam in 0..=mu {
            for r in 0..=lam.min(j) {
                if beta.is_zero() && r < lam {
                    continue;
                }
                let int = binom(mu, lam) * binom(lam, r) * falling(j, r);
                let q = BigRational::from_integer(int);
                let f = beta.pow(lam - r).scale_rational(&q);
                if !f.is_zero() {
                    axis.push((lam, r, f));
                }
            }
        }
        if axis.is_empty() {
            return;
        }
        choices.push(axis);
    }
    let base = c1 * c2;
    let alpha = m1.alpha.add(&m2.alpha);
    let mut idx = vec![0usize; l];
    loop {
        let mut coeff = base.clone();
        let mut i = Vec::with_capacity(l);
        let mut mu = Vec::with_capacity(l);
        for p in 0..l {
            let (lam, r, f) = &choices[p][idx[p]];
            coeff = &coeff * f;
            i.push(m1.i.0[p] + m2.i.0[p] - r);
            mu.push(m1.mu.0[p] + m2.mu.0[p] - lam);
        }
        add_term(
            out,
            Monomial {
                alpha: alpha.clone(),
                i: MultiIndex(i),
                mu: MultiIndex(mu),
            },
            coeff,
        );
        let mut p = 0;
        while p < l {
            idx[p] += 1;
            if idx[p] < choices[p].len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
        if p == l {
            break;
        }
    }
    let _ = field;
}

/// The element as an operator on `A`: apply `d^mu` by repeated single
/// derivations, then multiply by `x^{alpha,i}` in the semigroup algebra.
pub fn act_on_a(u: &WeylElement, a: &WeylElement) -> Result<WeylElement, WeylError> {
    u.check(a)?;
    if !a.is_in_a() {
        return Err(WeylError::NotInA);
    }
    let sig = &u.sig;
    let mut out = WeylElement::zero(sig);
    for (m, c) in &u.terms {
        let mut cur = a.clone();
        for (p0, &k) in m.mu.0.iter().enumerate() {
            for _ in 0..k {
                cur = cur.derive_unchecked(p0);
            }
        }
        let mult = Monomial {
            alpha: m.alpha.clone(),
            i: m.i.clone(),
            mu: MultiIndex::zero(sig.len()),
        };
        let shifted = cur
            .terms
            .iter()
            .map(|(am, ac)| (mult.semigroup_mul(am).expect("pure A monomials"), ac * c));
        out = &out + &WeylElement::from_terms(sig, shifted);
    }
    Ok(out)
}

/// `d = sum_p a_p d_p`, coefficients over all `l` axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationVector {
    pub coeffs: Vec<FieldElement>,
}

impl DerivationVector {
    pub fn new(coeffs: Vec<FieldElement>) -> Self {
        DerivationVector { coeffs }
    }

    /// `d_p`, `p` 1-based.
    pub fn axis(sig: &Signature, p: usize) -> Self {
        let f = sig.field();
        DerivationVector {
            coeffs: (1..=sig.len())
                .map(|q| if q == p { f.one() } else { f.zero() })
                .collect(),
        }
    }

    pub fn to_element(&self, sig: &Sig) -> WeylElement {
        let terms = self.coeffs.iter().enumerate().map(|(p, c)| {
            let mut m = Monomial::one(sig);
            m.mu = MultiIndex::unit(sig.len(), p + 1);
            (m, c.clone())
        });
        WeylElement::from_terms(sig, terms)
    }

    /// Reads the coefficients back from an element of `D`.
    pub fn from_element(u: &WeylElement) -> Option<Self> {
        let sig = u.signature();
        let mut coeffs = vec![sig.field().zero(); sig.len()];
        for (m, c) in u.terms() {
            if !(m.alpha.is_zero() && m.i.is_zero() && m.mu.level() == 1) {
                return None;
            }
            let p = m.mu.0.iter().position(|&e| e == 1).unwrap();
            coeffs[p] = c.clone();
        }
        Some(DerivationVector { coeffs })
    }

    /// Applies the derivation to an element of `A`.
    pub fn apply(&self, sig: &Sig, a: &WeylElement) -> Result<WeylElement, WeylError> {
        act_on_a(&self.to_element(sig), a)
    }
}

/// `<d, alpha> = sum_{p > l1} a_p alpha_p`.
pub fn pairing(sig: &Signature, d: &DerivationVector, alpha: &GroupElem) -> FieldElement {
    let mut acc = sig.field().zero();
    for p in sig.l1..sig.len() {
        let a = &d.coeffs[p];
        if !a.is_zero() {
            acc = &acc + &(a * &sig.alpha_at(alpha, p));
        }
    }
    acc
}

macro_rules! forward_elem_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&WeylElement> for &WeylElement {
            type Output = WeylElement;
            /// Panics if the operands belong to different algebras.
            fn $method(self, rhs: &WeylElement) -> WeylElement {
                self.$checked(rhs).expect("signature mismatch")
            }
        }
    };
}

forward_elem_op!(Add, add, try_add);
forward_elem_op!(Sub, sub, try_sub);
forward_elem_op!(Mul, mul, try_mul);

impl Neg for &WeylElement {
    type Output = WeylElement;
    fn neg(self) -> WeylElement {
        WeylElement {
            sig: self.sig.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl PartialEq for WeylElement {
    fn eq(&self, other: &Self) -> bool {
        same_sig(&self.sig, &other.sig) && self.terms == other.terms
    }
}

impl Eq for WeylElement {}

impl fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::format_element(self))
    }
}

/// Dual derivations `d_1 .. d_l` paired with chosen group elements.
#[derive(Debug, Clone)]
pub struct DualBasis {
    chosen: Vec<GroupElem>,
    /// Row `q`: coefficients of `d_q` in the `d_p` (partial) basis.
    to_partial: crate::matrix::FMatrix,
    /// Row `p`: coefficients of the partial `d_p` in the dual basis.
    from_partial: crate::matrix::FMatrix,
}

/// Solves `<alpha^(p), d_q> = delta_pq` for the last `l2 + l3` axes and sets
/// `d_p = partial_p` on the first `l1`.
pub fn dual_basis(sig: &Sig, chosen: &[GroupElem]) -> Result<DualBasis, WeylError> {
    use crate::matrix::FMatrix;
    let n = sig.l2 + sig.l3;
    if chosen.len() != n {
        return Err(WeylError::NotABasis);
    }
    let field = sig.field();
    let rows: Vec<Vec<FieldElement>> = chosen.iter().map(|a| sig.gamma.embed(a)).collect();
    let alpha_mat = FMatrix::from_rows(field, n, rows);
    let inv = alpha_mat.inverse().ok_or(WeylError::NotABasis)?;
    let dual = inv.transpose();
    let l = sig.len();
    let l1 = sig.l1;
    let mut to_partial = FMatrix::identity(field, l);
    let mut from_partial = FMatrix::identity(field, l);
    for a in 0..n {
        for b in 0..n {
            to_partial.set(l1 + a, l1 + b, dual.get(a, b).clone());
            // partial_{l1+a} = sum_q alpha^(q)_a d_q
            from_partial.set(l1 + a, l1 + b, alpha_mat.get(b, a).clone());
        }
    }
    Ok(DualBasis {
        chosen: chosen.to_vec(),
        to_partial,
        from_partial,
    })
}

impl DualBasis {
    pub fn chosen(&self) -> &[GroupElem] {
        &self.chosen
    }

    /// `d_q` (1-based) as a derivation vector.
    pub fn dual_vector(&self, q: usize) -> DerivationVector {
        DerivationVector::new(self.to_partial.row(q - 1).to_vec())
    }
}

/// Commutative polynomials in `l` variables.
type CommPoly = BTreeMap<Vec<u32>, FieldElement>;

fn comm_mul(a: &CommPoly, b: &CommPoly) -> CommPoly {
    let mut out = CommPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let c = ca * cb;
            let slot = out.entry(e).or_insert_with(|| c.field().zero());
            *slot = &*slot + &c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Expands `prod_p (sum_q coeffs[p][q] y_q)^{mu_p}`.
fn expand_power_product(field: &NumberField, coeffs: &crate::matrix::FMatrix, mu: &MultiIndex) -> CommPoly {
    let l = mu.0.len();
    let mut acc = CommPoly::new();
    acc.insert(vec![0; l], field.one());
    for (p, &k) in mu.0.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let mut lin = CommPoly::new();
        for q in 0..l {
            let c = coeffs.get(p, q);
            if !c.is_zero() {
                let mut e = vec![0; l];
                e[q] = 1;
                lin.insert(e, c.clone());
            }
        }
        for _ in 0..k {
            acc = comm_mul(&acc, &lin);
        }
    }
    acc
}

/// An element written in the basis `x^{alpha,i} d^nu` of dual monomials.
#[derive(Clone, PartialEq, Eq)]
pub struct DualForm {
    sig: Sig,
    terms: BTreeMap<(GroupElem, Vec<u32>, Vec<u32>), FieldElement>,
}

impl DualForm {
    pub fn terms(&self) -> impl Iterator<Item = (&(GroupElem, Vec<u32>, Vec<u32>), &FieldElement)> {
        self.terms.iter()
    }

    /// Substitutes each `d_q` back in terms of the partials.
    pub fn to_partial(&self, db: &DualBasis) -> WeylElement {
        let field = self.sig.field();
        let mut out = WeylElement::zero(&self.sig);
        for ((alpha, i, nu), c) in &self.terms {
            let poly = expand_power_product(field, &db.to_partial, &MultiIndex(nu.clone()));
            let terms = poly.into_iter().map(|(mu, pc)| {
                (
                    Monomial {
                        alpha: alpha.clone(),
                        i: MultiIndex(i.clone()),
                        mu: MultiIndex(mu),
                    },
                    &pc * c,
                )
            });
            out = &out + &WeylElement::from_terms(&self.sig, terms);
        }
        out
    }
}

impl fmt::Display for DualForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Dual derivations print as D1, D2, ... to keep them apart from d1.
        let as_element = WeylElement::from_terms(
            &self.sig,
            self.terms.iter().map(|((alpha, i, nu), c)| {
                (
                    Monomial {
                        alpha: alpha.clone(),
                        i: MultiIndex(i.clone()),
                        mu: MultiIndex(nu.clone()),
                    },
                    c.clone(),
                )
            }),
        );
        f.write_str(&crate::syntax::format_element_with(&as_element, "D"))
    }
}

/// Rewrites `u` in the dual basis: `partial_p = sum_q from_partial[p][q] d_q`,
/// expanded multinomially since the `d_q` commute.
pub fn rewrite_in_dual(u: &WeylElement, db: &DualBasis) -> DualForm {
    let sig = u.signature();
    let field = sig.field();
    let mut terms: BTreeMap<(GroupElem, Vec<u32>, Vec<u32>), FieldElement> = BTreeMap::new();
    for (m, c) in u.terms() {
        let poly = expand_power_product(field, &db.from_partial, &m.mu);
        for (nu, pc) in poly {
            let key = (m.alpha.clone(), m.i.0.clone(), nu);
            let v = &pc * c;
            let slot = terms.entry(key).or_insert_with(|| field.zero());
            *slot = &*slot + &v;
        }
    }
    terms.retain(|_, c| !c.is_zero());
    DualForm {
        sig: sig.clone(),
        terms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w100() -> Sig {
        let q = NumberField::rationals();
        Signature::new(1, 0, 0, GammaGroup::trivial(&q)).unwrap()
    }

    fn w010() -> Sig {
        let q = NumberField::rationals();
        Signature::new(0, 1, 0, GammaGroup::from_i64(&q, 1, &[vec![1]]).unwrap()).unwrap()
    }

    fn w110() -> Sig {
        let q = NumberField::rationals();
        Signature::new(1, 1, 0, GammaGroup::from_i64(&q, 1, &[vec![1]]).unwrap()).unwrap()
    }

    fn w020() -> Sig {
        let q = NumberField::rationals();
        let g = GammaGroup::from_i64(&q, 2, &[vec![1, 0], vec![0, 1]]).unwrap();
        Signature::new(0, 2, 0, g).unwrap()
    }

    #[test]
    fn signature_validation() {
        let q = NumberField::rationals();
        assert_eq!(
            Signature::new(0, 0, 0, GammaGroup::trivial(&q)).unwrap_err(),
            WeylError::EmptySignature
        );
        assert!(matches!(
            Signature::new(1, 1, 0, GammaGroup::trivial(&q)),
            Err(WeylError::GammaDimension { expected: 1, found: 0 })
        ));
    }

    #[test]
    fn semigroup_product_adds_parts() {
        let sig = w110();
        let a = Monomial {
            alpha: GroupElem::new(vec![2]),
            i: MultiIndex::new(vec![1, 0]),
            mu: MultiIndex::zero(2),
        };
        let b = Monomial {
            alpha: GroupElem::new(vec![-5]),
            i: MultiIndex::new(vec![0, 2]),
            mu: MultiIndex::zero(2),
        };
        let p = a.semigroup_mul(&b).unwrap();
        assert_eq!(p.alpha.coords(), &[-3]);
        assert_eq!(p.i.entries(), &[1, 2]);
        assert_eq!(a.semigroup_mul(&Monomial::one(&sig)).unwrap(), a);
        let mut with_d = a.clone();
        with_d.mu = MultiIndex::unit(2, 1);
        assert_eq!(with_d.semigroup_mul(&b).unwrap_err(), WeylError::NotInA);
    }

    #[test]
    fn t_times_t() {
        let sig = w100();
        let t1 = WeylElement::t(&sig, 1).unwrap();
        let sq = &t1 * &t1;
        let (m, c) = sq.terms().next().unwrap();
        assert_eq!(m.i.entries(), &[2]);
        assert!(c.is_one());
    }

    #[test]
    fn derive_examples() {
        let sig = w100();
        let t1 = WeylElement::t(&sig, 1).unwrap();
        let t1sq = &t1 * &t1;
        assert_eq!(t1sq.derive(1).unwrap(), t1.scale(&sig.field().from_i64(2)));

        let sig = w010();
        let x1 = WeylElement::x(&sig, GroupElem::new(vec![1]));
        let t1 = WeylElement::t(&sig, 1).unwrap();
        let x1t1 = &x1 * &t1;
        assert_eq!(x1t1.derive(1).unwrap(), &x1t1 + &x1);
        assert_eq!(x1.derive(1).unwrap(), x1);
        assert!(matches!(x1.derive(2), Err(WeylError::AxisOutOfRange { axis: 2, max: 1 })));
        let d1 = WeylElement::d(&sig, 1).unwrap();
        assert_eq!(d1.derive(1).unwrap_err(), WeylError::NotInA);
    }

    #[test]
    fn derive_x_alpha_gives_alpha_p() {
        let sig = w020();
        let alpha = GroupElem::new(vec![3, -2]);
        let x = WeylElement::x(&sig, alpha);
        assert_eq!(x.derive(1).unwrap(), x.scale(&sig.field().from_i64(3)));
        assert_eq!(x.derive(2).unwrap(), x.scale(&sig.field().from_i64(-2)));
    }

    #[test]
    fn multi_binom_examples() {
        let mu = MultiIndex::new(vec![2, 1]);
        assert_eq!(multi_binom(&mu, &MultiIndex::new(vec![1, 1])), BigInt::from(2));
        assert_eq!(multi_binom(&mu, &MultiIndex::zero(2)), BigInt::one());
        assert_eq!(multi_binom(&mu, &MultiIndex::new(vec![0, 2])), BigInt::zero());
    }

    #[test]
    fn weyl_relation_products() {
        let sig = w100();
        let t1 = WeylElement::t(&sig, 1).unwrap();
        let d1 = WeylElement::d(&sig, 1).unwrap();
        let one = WeylElement::one(&sig);
        assert_eq!(&d1 * &t1, &(&t1 * &d1) + &one);
        let d1sq = &d1 * &d1;
        let two_d1 = d1.scale(&sig.field().from_i64(2));
        assert_eq!(&d1sq * &t1, &(&t1 * &d1sq) + &two_d1);
        assert_eq!(&one * &t1, t1);
        assert_eq!(d1.bracket(&t1).unwrap(), one);
        assert!(t1.bracket(&t1).unwrap().is_zero());
    }

    #[test]
    fn bracket_with_x_alpha_is_pairing() {
        let sig = w020();
        let alpha = GroupElem::new(vec![2, 5]);
        let x = WeylElement::x(&sig, alpha.clone());
        let f = sig.field();
        let dv = DerivationVector::new(vec![f.from_i64(3), f.from_i64(-1)]);
        let lhs = dv.to_element(&sig).bracket(&x).unwrap();
        let c = pairing(&sig, &dv, &alpha);
        assert_eq!(c, f.from_i64(1));
        assert_eq!(lhs, x.scale(&c));
    }

    #[test]
    fn pairing_ignores_first_block() {
        let sig = w110();
        let f = sig.field();
        let d1 = DerivationVector::axis(&sig, 1);
        let d2 = DerivationVector::axis(&sig, 2);
        let alpha = GroupElem::new(vec![3]);
        assert!(pairing(&sig, &d1, &alpha).is_zero());
        assert_eq!(pairing(&sig, &d2, &alpha), f.from_i64(3));
        assert!(pairing(&sig, &d2, &GroupElem::zero(1)).is_zero());
    }

    #[test]
    fn compare_index_examples() {
        let a = MultiIndex::new(vec![0, 1]);
        let b = MultiIndex::new(vec![1, 0]);
        assert_eq!(compare_index(&a, &b), Ordering::Less);
        let c = MultiIndex::new(vec![2, 0]);
        let d = MultiIndex::new(vec![1, 1]);
        assert_eq!(compare_index(&c, &d), Ordering::Greater);
        assert_eq!(compare_index(&c, &c), Ordering::Equal);
        assert_eq!(compare_index(&MultiIndex::new(vec![0, 3]), &d), Ordering::Greater);
    }

    #[test]
    fn act_on_a_examples() {
        let sig = w100();
        let t1 = WeylElement::t(&sig, 1).unwrap();
        let d1 = WeylElement::d(&sig, 1).unwrap();
        let t1d1 = &t1 * &d1;
        assert_eq!(act_on_a(&t1d1, &t1).unwrap(), t1);
        let one = WeylElement::one(&sig);
        let t1sq = &t1 * &t1;
        assert_eq!(act_on_a(&one, &t1sq).unwrap(), t1sq);
        let d1sq = &d1 * &d1;
        assert_eq!(act_on_a(&d1sq, &t1sq).unwrap(), WeylElement::from_i64(&sig, 2));
    }

    #[test]
    fn dual_basis_examples() {
        let sig = w020();
        let f = sig.field();
        let chosen = [sig.gamma().member(&[f.one(), f.zero()]).unwrap(), sig.gamma().member(&[f.one(), f.one()]).unwrap()];
        let db = dual_basis(&sig, &chosen).unwrap();
        assert_eq!(db.dual_vector(1).coeffs, vec![f.one(), f.from_i64(-1)]);
        assert_eq!(db.dual_vector(2).coeffs, vec![f.zero(), f.one()]);
        for (p, a) in chosen.iter().enumerate() {
            for q in 1..=2 {
                let expect = if p + 1 == q { f.one() } else { f.zero() };
                assert_eq!(pairing(&sig, &db.dual_vector(q), a), expect);
            }
        }

        let std = [GroupElem::new(vec![1, 0]), GroupElem::new(vec![0, 1])];
        let db = dual_basis(&sig, &std).unwrap();
        assert_eq!(db.dual_vector(1), DerivationVector::axis(&sig, 1));

        let dep = [GroupElem::new(vec![1, 1]), GroupElem::new(vec![2, 2])];
        assert_eq!(dual_basis(&sig, &dep).unwrap_err(), WeylError::NotABasis);
    }

    #[test]
    fn rewrite_in_dual_example() {
        let sig = w020();
        let f = sig.field();
        let chosen = [sig.gamma().member(&[f.one(), f.zero()]).unwrap(), sig.gamma().member(&[f.one(), f.one()]).unwrap()];
        let db = dual_basis(&sig, &chosen).unwrap();
        let d1 = WeylElement::d(&sig, 1).unwrap();
        let d2 = WeylElement::d(&sig, 2).unwrap();
        let u = &d1 * &d2;
        let form = rewrite_in_dual(&u, &db);
        assert_eq!(form.to_string(), "D1*D2 + D2^2");
        assert_eq!(form.to_partial(&db), u);
        let c = WeylElement::from_i64(&sig, 7);
        assert_eq!(rewrite_in_dual(&c, &db).to_string(), "7");
    }

    #[test]
    fn rewrite_first_block_is_identity() {
        let sig = w110();
        let chosen = [GroupElem::new(vec![1])];
        let db = dual_basis(&sig, &chosen).unwrap();
        let d1 = WeylElement::d(&sig, 1).unwrap();
        assert_eq!(rewrite_in_dual(&d1, &db).to_string(), "D1");
    }
}
