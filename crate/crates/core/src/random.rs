//! Seeded random elements, derivations, lattices and block matrices.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{DerivationVector, Monomial, MultiIndex, Sig, WeylElement};
use crate::gamma::{BlockMatrix, GroupElem};
use crate::matrix::FMatrix;
use crate::numberfield::{ratio, FieldElement, NumberField};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape limits for random elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSpec {
    pub max_terms: usize,
    /// Bound on each single exponent.
    pub axis_cap: u32,
    /// Bound on the total `t`/`d` degree of a term.
    pub total_cap: u32,
    /// Bound on the `l1`-norm of the `Gamma` coordinates.
    pub alpha_cap: u64,
}

impl RandomSpec {
    /// Terms of total degree at most `cap`.
    pub fn with_degree(cap: u32) -> Self {
        RandomSpec {
            max_terms: 3,
            axis_cap: cap,
            total_cap: cap,
            alpha_cap: 3,
        }
    }
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_terms: 3,
            axis_cap: 8,
            total_cap: 8,
            alpha_cap: 6,
        }
    }
}

/// A nonzero coefficient with small numerators and denominators.
pub fn random_scalar<R: Rng>(field: &NumberField, rng: &mut R) -> FieldElement {
    loop {
        let coords = (0..field.degree())
            .map(|k| {
                if k > 0 && rng.gen_bool(0.5) {
                    ratio(0, 1)
                } else {
                    ratio(rng.gen_range(-4..=4), rng.gen_range(1..=2))
                }
            })
            .collect();
        let c = field.from_coords(coords);
        if !c.is_zero() {
            return c;
        }
    }
}

pub fn random_group_elem<R: Rng>(rank: usize, cap: u64, rng: &mut R) -> GroupElem {
    let mut coords = vec![0i64; rank];
    if rank == 0 {
        return GroupElem::new(coords);
    }
    let norm = rng.gen_range(0..=cap);
    for _ in 0..norm {
        let k = rng.gen_range(0..rank);
        coords[k] += if rng.gen_bool(0.5) { 1 } else { -1 };
    }
    GroupElem::new(coords)
}

/// Spreads `total` units over `slots`, keeping each below `axis_cap`.
fn random_exponents<R: Rng>(slots: usize, total: u32, axis_cap: u32, rng: &mut R) -> Vec<u32> {
    let mut e = vec![0u32; slots];
    for _ in 0..total {
        let open: Vec<usize> = (0..slots).filter(|&k| e[k] < axis_cap).collect();
        if open.is_empty() {
            break;
        }
        e[open[rng.gen_range(0..open.len())]] += 1;
    }
    e
}

/// `t` slots are the first `t_slots` axes; `d` slots are the first
/// `d_slots` axes.
fn random_monomial_in<R: Rng>(
    sig: &Sig,
    spec: &RandomSpec,
    t_slots: usize,
    d_slots: usize,
    with_alpha: bool,
    rng: &mut R,
) -> Monomial {
    let l = sig.len();
    let total = rng.gen_range(0..=spec.total_cap);
    let raw = random_exponents(t_slots + d_slots, total, spec.axis_cap, rng);
    let mut i = vec![0; l];
    let mut mu = vec![0; l];
    i[..t_slots].copy_from_slice(&raw[..t_slots]);
    mu[..d_slots].copy_from_slice(&raw[t_slots..]);
    let alpha = if with_alpha {
        random_group_elem(sig.gamma().rank(), spec.alpha_cap, rng)
    } else {
        GroupElem::zero(sig.gamma().rank())
    };
    Monomial {
        alpha,
        i: MultiIndex::new(i),
        mu: MultiIndex::new(mu),
    }
}

pub fn random_element<R: Rng>(sig: &Sig, spec: &RandomSpec, rng: &mut R) -> WeylElement {
    let n = rng.gen_range(1..=spec.max_terms.max(1));
    let terms: Vec<_> = (0..n)
        .map(|_| {
            (
                random_monomial_in(sig, spec, sig.t_axes(), sig.len(), true, rng),
                random_scalar(sig.field(), rng),
            )
        })
        .collect();
    WeylElement::from_terms(sig, terms)
}

/// A random nonzero element.
pub fn random_nonzero<R: Rng>(sig: &Sig, spec: &RandomSpec, rng: &mut R) -> WeylElement {
    loop {
        let u = random_element(sig, spec, rng);
        if !u.is_zero() {
            return u;
        }
    }
}

/// A random element of `A` (no derivations).
pub fn random_a_element<R: Rng>(sig: &Sig, spec: &RandomSpec, rng: &mut R) -> WeylElement {
    let n = rng.gen_range(1..=spec.max_terms.max(1));
    let terms: Vec<_> = (0..n)
        .map(|_| {
            (
                random_monomial_in(sig, spec, sig.t_axes(), 0, true, rng),
                random_scalar(sig.field(), rng),
            )
        })
        .collect();
    WeylElement::from_terms(sig, terms)
}

/// A random element of `A[D1]`: derivations only on the first `l1` axes.
pub fn random_a_d1_element<R: Rng>(sig: &Sig, spec: &RandomSpec, rng: &mut R) -> WeylElement {
    let n = rng.gen_range(1..=spec.max_terms.max(1));
    let terms: Vec<_> = (0..n)
        .map(|_| {
            (
                random_monomial_in(sig, spec, sig.t_axes(), sig.l1(), true, rng),
                random_scalar(sig.field(), rng),
            )
        })
        .collect();
    WeylElement::from_terms(sig, terms)
}

/// A random derivation supported on axes `from..to` (1-based, inclusive).
pub fn random_derivation<R: Rng>(sig: &Sig, from: usize, to: usize, rng: &mut R) -> DerivationVector {
    let f = sig.field();
    loop {
        let coeffs: Vec<FieldElement> = (1..=sig.len())
            .map(|p| {
                if p >= from && p <= to && rng.gen_bool(0.7) {
                    random_scalar(f, rng)
                } else {
                    f.zero()
                }
            })
            .collect();
        if coeffs.iter().any(|c| !c.is_zero()) || from > to {
            return DerivationVector::new(coeffs);
        }
    }
}

fn random_int_matrix<R: Rng>(field: &NumberField, rows: usize, cols: usize, rng: &mut R) -> FMatrix {
    let data = (0..rows)
        .map(|_| (0..cols).map(|_| field.from_i64(rng.gen_range(-3..=3))).collect())
        .collect();
    FMatrix::from_rows(field, cols, data)
}

fn random_invertible<R: Rng>(field: &NumberField, n: usize, rng: &mut R) -> FMatrix {
    loop {
        let m = random_int_matrix(field, n, n, rng);
        if m.inverse().is_some() {
            return m;
        }
    }
}

/// A random element `(A 0; B C)` with small integer entries.
pub fn random_block_matrix<R: Rng>(field: &NumberField, l2: usize, l3: usize, rng: &mut R) -> BlockMatrix {
    let a = random_invertible(field, l2, rng);
    let c = random_invertible(field, l3, rng);
    let b = random_int_matrix(field, l3, l2, rng);
    BlockMatrix::new(&a, &b, &c).expect("invertible diagonal blocks")
}

/// Generators of a random full-rank sublattice of `Z^n`.
pub fn random_full_lattice<R: Rng>(n: usize, rng: &mut R) -> Vec<Vec<i64>> {
    loop {
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-4..=4)).collect())
            .collect();
        let q = NumberField::rationals();
        let m = FMatrix::from_i64(&q, &rows);
        if n == 0 || m.rank() == n {
            return rows;
        }
    }
}
