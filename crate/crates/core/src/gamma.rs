//! Finitely generated nondegenerate subgroups `Gamma` of `F^n`, the action
//! of the block lower-triangular group on them, and equivalence decisions.
//!
//! Every computation is reduced to integer linear algebra: an `F^n` vector is
//! flattened to its `d * n` rational coordinates, denominators are cleared
//! and the resulting integer matrix is put into Hermite normal form.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::lattice::{self, Hnf, IntMatrix};
use crate::matrix::FMatrix;
use crate::numberfield::{FieldElement, NumberField};

/// Upper bound on candidate matrices examined by the bounded search.
pub const SEARCH_BUDGET: usize = 250_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GammaError {
    #[error("no generators given for a nonzero ambient dimension")]
    ZeroGenerators,
    #[error("generators span an F-subspace of dimension {rank} < {dim}")]
    DegenerateGroup { rank: usize, dim: usize },
    #[error("vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector entries lie in a different field")]
    FieldMismatch,
    #[error("vector is not a member of the group")]
    NotMember,
    #[error("group coordinate does not fit in 64 bits")]
    CoordinateOverflow,
    #[error("block A or C is singular")]
    SingularBlock,
    #[error("matrix is not block lower-triangular for (l2, l3) = ({l2}, {l3})")]
    NotBlockTriangular { l2: usize, l3: usize },
    #[error("shapes or fields of the two groups differ")]
    ShapeMismatch,
}

/// An element of `Gamma`, as integer coordinates in the canonical Z-basis.
///
/// The derived ordering is lexicographic on coordinates, a total order
/// compatible with addition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElem {
    coords: Vec<i64>,
}

impl GroupElem {
    pub fn new(coords: Vec<i64>) -> Self {
        GroupElem { coords }
    }

    pub fn zero(rank: usize) -> Self {
        GroupElem {
            coords: vec![0; rank],
        }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Panics on `i64` overflow.
    pub fn add(&self, other: &GroupElem) -> GroupElem {
        GroupElem {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a.checked_add(*b).expect("group coordinate overflow"))
                .collect(),
        }
    }

    pub fn neg(&self) -> GroupElem {
        GroupElem {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, k: i64) -> GroupElem {
        GroupElem {
            coords: self
                .coords
                .iter()
                .map(|c| c.checked_mul(k).expect("group coordinate overflow"))
                .collect(),
        }
    }

    pub fn l1_norm(&self) -> u64 {
        self.coords.iter().map(|c| c.unsigned_abs()).sum()
    }
}

#[derive(Clone)]
pub struct GammaGroup {
    field: NumberField,
    dim: usize,
    basis: Vec<Vec<FieldElement>>,
    /// Integer rows `scale * flatten(basis)`, already in Hermite normal form.
    int_basis: Hnf,
    scale: BigInt,
}

fn flatten(v: &[FieldElement]) -> Vec<BigRational> {
    v.iter().flat_map(|e| e.coords().iter().cloned()).collect()
}

fn unflatten(field: &NumberField, flat: &[BigRational]) -> Vec<FieldElement> {
    flat.chunks(field.degree())
        .map(|c| field.from_coords(c.to_vec()))
        .collect()
}

impl GammaGroup {
    /// The subgroup generated by `generators`, with a canonical Z-basis.
    pub fn new(
        field: &NumberField,
        dim: usize,
        generators: &[Vec<FieldElement>],
    ) -> Result<Self, GammaError> {
        if generators.is_empty() && dim > 0 {
            return Err(GammaError::ZeroGenerators);
        }
        for g in generators {
            if g.len() != dim {
                return Err(GammaError::DimensionMismatch {
                    expected: dim,
                    found: g.len(),
                });
            }
            if g.iter().any(|e| e.field() != field) {
                return Err(GammaError::FieldMismatch);
            }
        }
        let f_rank = FMatrix::from_rows(field, dim, generators.to_vec()).rank();
        if f_rank < dim {
            return Err(GammaError::DegenerateGroup { rank: f_rank, dim });
        }
        let flat: Vec<Vec<BigRational>> = generators.iter().map(|g| flatten(g)).collect();
        let width = dim * field.degree();
        let (ints, scale) = lattice::clear_denominators(&flat);
        let h = lattice::hnf(&ints, width);
        let rows: IntMatrix = h.form[..h.rank()].to_vec();
        let inv_scale = BigRational::new(BigInt::one(), scale.clone());
        let basis = rows
            .iter()
            .map(|r| {
                let q: Vec<BigRational> = r
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()) * &inv_scale)
                    .collect();
                unflatten(field, &q)
            })
            .collect();
        let int_basis = lattice::hnf(&rows, width);
        Ok(GammaGroup {
            field: field.clone(),
            dim,
            basis,
            int_basis,
            scale,
        })
    }

    /// Convenience constructor from rational integer generators.
    pub fn from_i64(field: &NumberField, dim: usize, gens: &[Vec<i64>]) -> Result<Self, GammaError> {
        let gens: Vec<Vec<FieldElement>> = gens
            .iter()
            .map(|g| g.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Self::new(field, dim, &gens)
    }

    /// The trivial group in `F^0`.
    pub fn trivial(field: &NumberField) -> Self {
        Self::new(field, 0, &[]).expect("trivial group is valid")
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<FieldElement>] {
        &self.basis
    }

    pub fn basis_matrix(&self) -> FMatrix {
        FMatrix::from_rows(&self.field, self.dim, self.basis.clone())
    }

    /// The vector in `F^n` denoted by `alpha`.
    pub fn embed(&self, alpha: &GroupElem) -> Vec<FieldElement> {
        let mut out = vec![self.field.zero(); self.dim];
        for (c, b) in alpha.coords.iter().zip(&self.basis) {
            if *c == 0 {
                continue;
            }
            let k = self.field.from_i64(*c);
            for (o, x) in out.iter_mut().zip(b) {
                *o = &*o + &(&k * x);
            }
        }
        out
    }

    /// Single coordinate `alpha_j` (0-based within `F^n`).
    pub fn coordinate(&self, alpha: &GroupElem, j: usize) -> FieldElement {
        let mut acc = self.field.zero();
        for (c, b) in alpha.coords.iter().zip(&self.basis) {
            if *c != 0 {
                acc = &acc + &b[j].scale_rational(&BigRational::from_integer(BigInt::from(*c)));
            }
        }
        acc
    }

    pub fn basis_elem(&self, k: usize) -> GroupElem {
        let mut c = vec![0; self.rank()];
        c[k] = 1;
        GroupElem::new(c)
    }

    fn member_big(&self, v: &[FieldElement]) -> Result<Vec<BigInt>, GammaError> {
        if v.len() != self.dim {
            return Err(GammaError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        if v.iter().any(|e| e.field() != &self.field) {
            return Err(GammaError::FieldMismatch);
        }
        let scale = BigRational::from_integer(self.scale.clone());
        let mut target = Vec::with_capacity(self.dim * self.field.degree());
        for q in flatten(v) {
            let s = q * &scale;
            if !s.is_integer() {
                return Err(GammaError::NotMember);
            }
            target.push(s.to_integer());
        }
        lattice::solve_integer(&self.int_basis, &target).ok_or(GammaError::NotMember)
    }

    /// Integer coordinates of `v` in the canonical basis, or `NotMember`.
    pub fn member(&self, v: &[FieldElement]) -> Result<GroupElem, GammaError> {
        let big = self.member_big(v)?;
        let coords = big
            .iter()
            .map(|c| c.to_i64().ok_or(GammaError::CoordinateOverflow))
            .collect::<Result<_, _>>()?;
        Ok(GroupElem::new(coords))
    }

    pub fn contains(&self, v: &[FieldElement]) -> bool {
        self.member_big(v).is_ok()
    }

    /// Set equality by mutual membership of bases.
    pub fn same_group(&self, other: &GammaGroup) -> bool {
        self.field == other.field
            && self.dim == other.dim
            && self.basis.iter().all(|b| other.contains(b))
            && other.basis.iter().all(|b| self.contains(b))
    }

    /// `g(Gamma) = { alpha * g^-1 }`.
    pub fn apply(&self, g: &BlockMatrix) -> Result<GammaGroup, GammaError> {
        if g.dim() != self.dim || g.field() != &self.field {
            return Err(GammaError::ShapeMismatch);
        }
        let inv = g.inverse_full();
        let gens: Vec<Vec<FieldElement>> = self.basis.iter().map(|b| inv.left_apply(b)).collect();
        GammaGroup::new(&self.field, self.dim, &gens)
    }

    fn projection3(&self, l2: usize) -> Vec<Vec<BigRational>> {
        self.basis.iter().map(|b| flatten(&b[l2..])).collect()
    }

    /// Orbit invariants under the block lower-triangular action for the
    /// split `n = l2 + l3`.
    pub fn invariants(&self, l2: usize) -> GammaInvariants {
        assert!(l2 <= self.dim, "l2 exceeds ambient dimension");
        let proj = self.projection3(l2);
        let width = (self.dim - l2) * self.field.degree();
        let kernel = lattice::integer_left_kernel(&proj, width);
        GammaInvariants {
            rank: self.rank(),
            rank_cap_v2: kernel.len(),
            rank_proj3: lattice::rational_rank(&proj, width),
        }
    }

    /// A Z-basis whose first `rank_cap_V2` vectors span `Gamma ∩ (F^l2 x 0)`.
    pub fn adapted_basis(&self, l2: usize) -> (Vec<Vec<FieldElement>>, usize) {
        let proj = self.projection3(l2);
        let width = (self.dim - l2) * self.field.degree();
        let (ints, _) = lattice::clear_denominators(&proj);
        let h = lattice::hnf(&ints, width);
        let r = h.rank();
        let order = h.transform[r..].iter().chain(&h.transform[..r]);
        let basis = order.map(|row| self.combine(row)).collect();
        (basis, self.rank() - r)
    }

    fn combine(&self, coeffs: &[BigInt]) -> Vec<FieldElement> {
        let mut out = vec![self.field.zero(); self.dim];
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            let k = BigRational::from_integer(c.clone());
            for (o, x) in out.iter_mut().zip(b) {
                *o = &*o + &x.scale_rational(&k);
            }
        }
        out
    }
}

impl PartialEq for GammaGroup {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.dim == other.dim && self.basis == other.basis
    }
}

impl Eq for GammaGroup {}

impl fmt::Debug for GammaGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gamma(")?;
        for (i, b) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", fmt_vector(b))?;
        }
        write!(f, ")")
    }
}

pub fn fmt_vector(v: &[FieldElement]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaInvariants {
    pub rank: usize,
    pub rank_cap_v2: usize,
    pub rank_proj3: usize,
}

impl GammaInvariants {
    fn named(&self) -> [(&'static str, usize); 3] {
        [
            ("rank", self.rank),
            ("rank_cap_V2", self.rank_cap_v2),
            ("rank_proj3", self.rank_proj3),
        ]
    }

    /// The first invariant on which the two records differ.
    pub fn first_difference(&self, other: &GammaInvariants) -> Option<InvariantCertificate> {
        self.named()
            .into_iter()
            .zip(other.named())
            .find(|((_, a), (_, b))| a != b)
            .map(|((name, a), (_, b))| InvariantCertificate {
                invariant: name.to_string(),
                lhs: a.to_string(),
                rhs: b.to_string(),
            })
    }
}

impl fmt::Display for GammaInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rank={} rank_cap_V2={} rank_proj3={}",
            self.rank, self.rank_cap_v2, self.rank_proj3
        )
    }
}

/// An element `(A 0; B C)` of the block lower-triangular group.
#[derive(Clone, PartialEq, Eq)]
pub struct BlockMatrix {
    l2: usize,
    l3: usize,
    full: FMatrix,
    inverse: FMatrix,
}

impl BlockMatrix {
    /// `a` is `l2 x l2`, `b` is `l3 x l2`, `c` is `l3 x l3`.
    pub fn new(a: &FMatrix, b: &FMatrix, c: &FMatrix) -> Result<Self, GammaError> {
        let (l2, l3) = (a.rows(), c.rows());
        let shape_ok = a.cols() == l2 && c.cols() == l3 && b.rows() == l3 && b.cols() == l2;
        if !shape_ok {
            return Err(GammaError::ShapeMismatch);
        }
        let field = a.field();
        let mut full = FMatrix::zeros(field, l2 + l3, l2 + l3);
        for i in 0..l2 {
            for j in 0..l2 {
                full.set(i, j, a.get(i, j).clone());
            }
        }
        for i in 0..l3 {
            for j in 0..l2 {
                full.set(l2 + i, j, b.get(i, j).clone());
            }
            for j in 0..l3 {
                full.set(l2 + i, l2 + j, c.get(i, j).clone());
            }
        }
        Self::from_full(&full, l2, l3)
    }

    /// Checks the zero top-right block and invertibility of `A` and `C`.
    pub fn from_full(full: &FMatrix, l2: usize, l3: usize) -> Result<Self, GammaError> {
        let n = l2 + l3;
        if full.rows() != n || full.cols() != n {
            return Err(GammaError::ShapeMismatch);
        }
        if !full.sub_matrix(0, l2, l2, n).is_zero() {
            return Err(GammaError::NotBlockTriangular { l2, l3 });
        }
        let a_ok = full.sub_matrix(0, l2, 0, l2).inverse().is_some();
        let c_ok = full.sub_matrix(l2, n, l2, n).inverse().is_some();
        if !(a_ok && c_ok) {
            return Err(GammaError::SingularBlock);
        }
        let inverse = full.inverse().ok_or(GammaError::SingularBlock)?;
        Ok(BlockMatrix {
            l2,
            l3,
            full: full.clone(),
            inverse,
        })
    }

    pub fn identity(field: &NumberField, l2: usize, l3: usize) -> Self {
        Self::from_full(&FMatrix::identity(field, l2 + l3), l2, l3).expect("identity is valid")
    }

    pub fn field(&self) -> &NumberField {
        self.full.field()
    }

    pub fn l2(&self) -> usize {
        self.l2
    }

    pub fn l3(&self) -> usize {
        self.l3
    }

    pub fn dim(&self) -> usize {
        self.l2 + self.l3
    }

    pub fn full(&self) -> &FMatrix {
        &self.full
    }

    pub fn inverse_full(&self) -> &FMatrix {
        &self.inverse
    }

    pub fn block_a(&self) -> FMatrix {
        self.full.sub_matrix(0, self.l2, 0, self.l2)
    }

    pub fn block_b(&self) -> FMatrix {
        self.full.sub_matrix(self.l2, self.dim(), 0, self.l2)
    }

    pub fn block_c(&self) -> FMatrix {
        self.full.sub_matrix(self.l2, self.dim(), self.l2, self.dim())
    }

    /// Matrix product `self * other`, again block lower-triangular.
    pub fn compose(&self, other: &BlockMatrix) -> BlockMatrix {
        assert_eq!((self.l2, self.l3), (other.l2, other.l3), "block shapes differ");
        let full = self.full.mul(&other.full);
        BlockMatrix::from_full(&full, self.l2, self.l3).expect("product of group elements")
    }

    pub fn inverse(&self) -> BlockMatrix {
        BlockMatrix::from_full(&self.inverse, self.l2, self.l3).expect("inverse of group element")
    }
}

impl fmt::Debug for BlockMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.full)
    }
}

impl fmt::Display for BlockMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.full)
    }
}

/// `g(Gamma) == Gamma'` as sets.
pub fn verify_witness(g: &BlockMatrix, gamma: &GammaGroup, target: &GammaGroup) -> bool {
    match gamma.apply(g) {
        Ok(image) => image.same_group(target),
        Err(_) => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantCertificate {
    pub invariant: String,
    pub lhs: String,
    pub rhs: String,
}

impl fmt::Display for InvariantCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invariant={} lhs={} rhs={}",
            self.invariant, self.lhs, self.rhs
        )
    }
}

#[derive(Debug, Clone)]
pub enum EquivalenceVerdict {
    Equivalent(BlockMatrix),
    Inequivalent(InvariantCertificate),
    Undecided { radius: u32 },
}

impl fmt::Display for EquivalenceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivalenceVerdict::Equivalent(g) => write!(f, "EQUIVALENT g={g}"),
            EquivalenceVerdict::Inequivalent(c) => write!(f, "INEQUIVALENT {c}"),
            EquivalenceVerdict::Undecided { radius } => write!(f, "UNDECIDED radius={radius}"),
        }
    }
}

/// Decides whether some `g` in the block group maps `gamma` onto `target`.
///
/// Mismatched invariants give a certificate of inequivalence. When both
/// groups have rank `n` and a full-rank intersection with `F^l2 x 0` (always
/// the case for full lattices over `Q`) a witness is constructed directly.
/// Otherwise integer change-of-basis matrices up to `radius` are searched.
pub fn decide_equivalence(
    gamma: &GammaGroup,
    target: &GammaGroup,
    l2: usize,
    radius: u32,
) -> Result<EquivalenceVerdict, GammaError> {
    if gamma.field != target.field || gamma.dim != target.dim || l2 > gamma.dim {
        return Err(GammaError::ShapeMismatch);
    }
    let n = gamma.dim;
    let l3 = n - l2;
    let (inv_a, inv_b) = (gamma.invariants(l2), target.invariants(l2));
    if let Some(cert) = inv_a.first_difference(&inv_b) {
        return Ok(EquivalenceVerdict::Inequivalent(cert));
    }
    let identity = BlockMatrix::identity(&gamma.field, l2, l3);
    if verify_witness(&identity, gamma, target) {
        return Ok(EquivalenceVerdict::Equivalent(identity));
    }
    if inv_a.rank == n && inv_a.rank_cap_v2 == l2 {
        let g = adapted_witness(gamma, target, l2);
        debug_assert!(verify_witness(&g, gamma, target));
        return Ok(EquivalenceVerdict::Equivalent(g));
    }
    Ok(match bounded_search(gamma, target, l2, radius) {
        Some(g) => EquivalenceVerdict::Equivalent(g),
        None => EquivalenceVerdict::Undecided { radius },
    })
}

/// For rank-`n` groups whose adapted bases are block lower-triangular
/// matrices `P`, `P'`: `g = P'^-1 P` maps one onto the other.
fn adapted_witness(gamma: &GammaGroup, target: &GammaGroup, l2: usize) -> BlockMatrix {
    let n = gamma.dim;
    let (pb, _) = gamma.adapted_basis(l2);
    let (qb, _) = target.adapted_basis(l2);
    let p = FMatrix::from_rows(&gamma.field, n, pb);
    let q = FMatrix::from_rows(&gamma.field, n, qb);
    let full = q.inverse().expect("basis of rank-n group").mul(&p);
    BlockMatrix::from_full(&full, l2, n - l2).expect("adapted bases are block triangular")
}

fn to_field_matrix(field: &NumberField, u: &[Vec<BigInt>]) -> FMatrix {
    let cols = u.first().map_or(0, Vec::len);
    let rows = u
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| field.from_rational(BigRational::from_integer(x.clone())))
                .collect()
        })
        .collect();
    FMatrix::from_rows(field, cols, rows)
}

struct SearchSystem {
    field: NumberField,
    l2: usize,
    m: usize,
    n: usize,
    pivot_rows: Vec<usize>,
    other_rows: Vec<usize>,
    pivot_inv: FMatrix,
    /// `M_rest * M_S^-1`
    rest_coeffs: FMatrix,
    target_basis: FMatrix,
}

impl SearchSystem {
    fn new(gamma: &GammaGroup, target: &GammaGroup, l2: usize) -> Self {
        let field = gamma.field.clone();
        let n = gamma.dim;
        let m = gamma.rank();
        let mut pivot_rows = Vec::new();
        let mut chosen: Vec<Vec<FieldElement>> = Vec::new();
        for (i, b) in gamma.basis.iter().enumerate() {
            chosen.push(b.clone());
            if FMatrix::from_rows(&field, n, chosen.clone()).rank() == chosen.len() {
                pivot_rows.push(i);
            } else {
                chosen.pop();
            }
        }
        let other_rows: Vec<usize> = (0..m).filter(|i| !pivot_rows.contains(i)).collect();
        let pivot = FMatrix::from_rows(&field, n, chosen);
        let pivot_inv = pivot.inverse().expect("F-basis rows");
        let rest = FMatrix::from_rows(
            &field,
            n,
            other_rows.iter().map(|&i| gamma.basis[i].clone()).collect(),
        );
        let rest_coeffs = rest.mul(&pivot_inv);
        SearchSystem {
            field,
            l2,
            m,
            n,
            pivot_rows,
            other_rows,
            pivot_inv,
            rest_coeffs,
            target_basis: target.basis_matrix(),
        }
    }

    fn select(&self, w: &FMatrix, rows: &[usize]) -> FMatrix {
        FMatrix::from_rows(
            &self.field,
            self.n,
            rows.iter().map(|&i| w.row(i).to_vec()).collect(),
        )
    }

    /// Candidate `g^-1` for a change of basis `u` of the target.
    fn inverse_witness(&self, u: &FMatrix) -> FMatrix {
        let w = u.mul(&self.target_basis);
        self.pivot_inv.mul(&self.select(&w, &self.pivot_rows))
    }

    /// Linear constraints, flattened to rationals, that vanish exactly when
    /// `M g^-1 = U M'` with `g^-1` block lower-triangular.
    fn constraints(&self, u: &FMatrix) -> Vec<BigRational> {
        let w = u.mul(&self.target_basis);
        let ws = self.select(&w, &self.pivot_rows);
        let wr = self.select(&w, &self.other_rows);
        let predicted = self.rest_coeffs.mul(&ws);
        let mut out = Vec::new();
        for i in 0..wr.rows() {
            for j in 0..self.n {
                let diff = predicted.get(i, j) - wr.get(i, j);
                out.extend(diff.coords().iter().cloned());
            }
        }
        let ginv = self.pivot_inv.mul(&ws);
        for i in 0..self.l2 {
            for j in self.l2..self.n {
                out.extend(ginv.get(i, j).coords().iter().cloned());
            }
        }
        out
    }

    fn solution_lattice(&self) -> Vec<IntMatrix> {
        let m = self.m;
        let mut rows = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let mut e = FMatrix::zeros(&self.field, m, m);
                e.set(i, j, self.field.one());
                rows.push(self.constraints(&e));
            }
        }
        let width = rows.first().map_or(0, Vec::len);
        let kernel = if width == 0 {
            (0..m * m)
                .map(|k| {
                    (0..m * m)
                        .map(|j| if j == k { BigInt::one() } else { BigInt::zero() })
                        .collect()
                })
                .collect()
        } else {
            lattice::integer_left_kernel(&rows, width)
        };
        kernel
            .into_iter()
            .map(|flat| flat.chunks(m).map(<[BigInt]>::to_vec).collect())
            .collect()
    }
}

/// Enumerates integer vectors in `[-radius, radius]^dim` by increasing
/// max-norm, calling `visit` until it returns `true` or the budget runs out.
fn enumerate_shells(dim: usize, radius: u32, budget: usize, mut visit: impl FnMut(&[i64]) -> bool) -> bool {
    let mut spent = 0usize;
    for s in 0..=radius as i64 {
        if dim == 0 {
            return s == 0 && visit(&[]);
        }
        let mut c = vec![-s; dim];
        loop {
            if c.iter().any(|x| x.abs() == s) {
                spent += 1;
                if spent > budget {
                    return false;
                }
                if visit(&c) {
                    return true;
                }
            }
            let mut k = 0;
            loop {
                if k == dim {
                    break;
                }
                if c[k] < s {
                    c[k] += 1;
                    break;
                }
                c[k] = -s;
                k += 1;
            }
            if k == dim {
                break;
            }
        }
    }
    false
}

fn bounded_search(gamma: &GammaGroup, target: &GammaGroup, l2: usize, radius: u32) -> Option<BlockMatrix> {
    let sys = SearchSystem::new(gamma, target, l2);
    let basis = sys.solution_lattice();
    let m = sys.m;
    let mut found = None;
    enumerate_shells(basis.len(), radius, SEARCH_BUDGET, |coeffs| {
        let mut u = vec![vec![BigInt::zero(); m]; m];
        for (c, k) in coeffs.iter().zip(&basis) {
            if *c == 0 {
                continue;
            }
            let c = BigInt::from(*c);
            for (ur, kr) in u.iter_mut().zip(k) {
                for (x, y) in ur.iter_mut().zip(kr) {
                    *x += &c * y;
                }
            }
        }
        if lattice::determinant(&u).abs() != BigInt::one() {
            return false;
        }
        let ginv = sys.inverse_witness(&to_field_matrix(&sys.field, &u));
        let Some(full) = ginv.inverse() else {
            return false;
        };
        let Ok(g) = BlockMatrix::from_full(&full, l2, sys.n - l2) else {
            return false;
        };
        if verify_witness(&g, gamma, target) {
            found = Some(g);
            true
        } else {
            false
        }
    });
    found
}
