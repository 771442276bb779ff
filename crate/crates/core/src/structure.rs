//! ad-operators, the locally finite / locally nilpotent classification,
//! eigenvector and centralizer predicates, and a bounded ideal saturation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algebra::{Monomial, Sig, WeylElement, WeylError};
use crate::gamma::GroupElem;
use crate::numberfield::FieldElement;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("element is zero")]
    ZeroElement,
    #[error("element is a scalar")]
    ScalarInput,
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

/// `(ad u)^s (v)`.
pub fn ad_power(u: &WeylElement, v: &WeylElement, s: u32) -> Result<WeylElement, WeylError> {
    let mut cur = v.clone();
    for _ in 0..s {
        if cur.is_zero() {
            break;
        }
        cur = u.bracket(&cur)?;
    }
    Ok(cur)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    CertNilpotent,
    CertFiniteNotNilpotent,
    NotLocallyFinite,
    NotNilpotentUnknownFinite,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalClass {
    pub verdict: Verdict,
    /// The inclusion that decided the verdict.
    pub reason: &'static str,
}

impl fmt::Display for LocalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.verdict, self.reason)
    }
}

fn mu_in_d1(sig: &Sig, m: &Monomial) -> bool {
    m.mu.entries()[sig.l1()..].iter().all(|&e| e == 0)
}

/// `c * d_p` for a single axis: no `x`, no `t`, derivation level one.
fn is_pure_derivation(m: &Monomial) -> bool {
    m.alpha.is_zero() && m.i.is_zero() && m.mu.level() == 1
}

/// Membership tests for the four subspaces bracketing `F` and `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Membership {
    pub a_plus_d1: bool,
    pub a_plus_d: bool,
    pub a_of_d1: bool,
    pub a_of_d1_plus_d: bool,
}

pub fn membership(u: &WeylElement) -> Membership {
    let sig = u.signature();
    let mut mem = Membership {
        a_plus_d1: true,
        a_plus_d: true,
        a_of_d1: true,
        a_of_d1_plus_d: true,
    };
    for (m, _) in u.terms() {
        let pure_a = m.is_pure_a();
        let deriv = is_pure_derivation(m);
        let in_d1 = mu_in_d1(sig, m);
        mem.a_plus_d1 &= pure_a || (deriv && in_d1);
        mem.a_plus_d &= pure_a || deriv;
        mem.a_of_d1 &= in_d1;
        mem.a_of_d1_plus_d &= in_d1 || deriv;
    }
    mem
}

pub fn classify_local(u: &WeylElement) -> Result<LocalClass, StructureError> {
    if u.is_zero() {
        return Err(StructureError::ZeroElement);
    }
    let m = membership(u);
    let (verdict, reason) = if m.a_plus_d1 {
        (Verdict::CertNilpotent, "A+D1 ⊂ N")
    } else if m.a_plus_d && !m.a_of_d1 {
        (Verdict::CertFiniteNotNilpotent, "A+D ⊂ F, N ⊂ A[D1]")
    } else if !m.a_of_d1_plus_d {
        (Verdict::NotLocallyFinite, "F ⊂ A[D1]+D")
    } else if !m.a_of_d1 {
        (Verdict::NotNilpotentUnknownFinite, "N ⊂ A[D1], A+D ⊂ F ⊂ A[D1]+D")
    } else {
        (Verdict::Inconclusive, "A+D1 ⊂ N ⊂ A[D1]")
    };
    Ok(LocalClass { verdict, reason })
}

/// Upper bound on the first `k` with `(ad u)^k v = 0` for `u` in `A + D1`.
///
/// Each `ad a` (`a` in `A`) lowers the derivation degree of `v` by at least
/// one and raises the `D1`-axis `t`-degree by at most `deg_t(a)`; each
/// `ad d` (`d` in `D1`) lowers that `t`-degree by one.
pub fn nilpotency_bound(u: &WeylElement, v: &WeylElement) -> u32 {
    let sig = u.signature();
    let l1 = sig.l1();
    let deg_t_u = u
        .terms()
        .filter(|(m, _)| m.is_pure_a())
        .map(|(m, _)| m.i.entries()[..l1].iter().sum::<u32>())
        .max()
        .unwrap_or(0);
    let deg_d_v = v.terms().map(|(m, _)| m.mu.level()).max().unwrap_or(0);
    let deg_t1_v = v
        .terms()
        .map(|(m, _)| m.i.entries()[..l1].iter().sum::<u32>())
        .max()
        .unwrap_or(0);
    (deg_t_u + 1) * deg_d_v + deg_t1_v + 1
}

/// Echelon basis of a finite-dimensional subspace, keyed by leading monomial.
#[derive(Clone)]
pub struct SparseSpan {
    rows: BTreeMap<Monomial, WeylElement>,
}

impl SparseSpan {
    pub fn new() -> Self {
        SparseSpan {
            rows: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Fully reduces `v` against the basis; the result has no pivot monomial.
    pub fn reduce(&self, v: &WeylElement) -> WeylElement {
        let mut cur = v.clone();
        loop {
            let hit = cur
                .terms()
                .rev()
                .find(|(m, _)| self.rows.contains_key(*m))
                .map(|(m, c)| (m.clone(), c.clone()));
            let Some((m, c)) = hit else { return cur };
            cur = &cur - &self.rows[&m].scale(&c);
        }
    }

    /// Adds `v` if it is independent; returns the normalized new row.
    pub fn insert(&mut self, v: &WeylElement) -> Option<WeylElement> {
        let r = self.reduce(v);
        let (lead, c) = r.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let row = r.scale(&c.inv().expect("nonzero leading coefficient"));
        self.rows.insert(lead, row.clone());
        Some(row)
    }

    pub fn contains(&self, v: &WeylElement) -> bool {
        self.reduce(v).is_zero()
    }
}

impl Default for SparseSpan {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdGrowth {
    /// First `k` with `(ad u)^k v = 0`.
    NilpotentAt(u32),
    /// `dims[s] = dim span{(ad u)^r v : r <= s}` for `s = 0..=S`.
    SpanDim(Vec<usize>),
}

impl AdGrowth {
    pub fn final_dim(&self) -> Option<usize> {
        match self {
            AdGrowth::NilpotentAt(_) => None,
            AdGrowth::SpanDim(d) => d.last().copied(),
        }
    }
}

pub fn ad_growth(u: &WeylElement, v: &WeylElement, bound: u32) -> Result<AdGrowth, WeylError> {
    let mut span = SparseSpan::new();
    let mut dims = Vec::with_capacity(bound as usize + 1);
    let mut cur = v.clone();
    for s in 0..=bound {
        if cur.is_zero() {
            return Ok(AdGrowth::NilpotentAt(s));
        }
        span.insert(&cur);
        dims.push(span.dim());
        if s < bound {
            cur = u.bracket(&cur)?;
        }
    }
    Ok(AdGrowth::SpanDim(dims))
}

/// Closed form for simultaneous `ad F`-eigenvectors: `u = c x^alpha`.
pub fn is_in_e_of_f(u: &WeylElement) -> Result<bool, StructureError> {
    if u.is_zero() {
        return Err(StructureError::ZeroElement);
    }
    Ok(u.len() == 1
        && u
            .terms()
            .all(|(m, _)| m.i.is_zero() && m.mu.is_zero()))
}

/// Closed form for the centralizer of `N`: no derivations and no `t` on the
/// first `l1` axes.
pub fn is_in_n_of_n(u: &WeylElement) -> Result<bool, StructureError> {
    if u.is_zero() {
        return Err(StructureError::ZeroElement);
    }
    let l1 = u.signature().l1();
    Ok(u
        .terms()
        .all(|(m, _)| m.mu.is_zero() && m.i.entries()[..l1].iter().all(|&e| e == 0)))
}

/// Whether `[v, u]` is a scalar multiple of `u` for every sample `v`.
pub fn eigen_property(u: &WeylElement, samples: &[WeylElement]) -> Result<bool, WeylError> {
    let Some((lead, lc)) = u.leading() else {
        return Ok(true);
    };
    for v in samples {
        let b = v.bracket(u)?;
        let c = &b.coeff(lead) * &lc.inv().expect("nonzero leading coefficient");
        if b != u.scale(&c) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff `u` commutes with every element of `gens`.
pub fn centralizer_check(u: &WeylElement, gens: &[WeylElement]) -> Result<bool, WeylError> {
    for g in gens {
        if !u.bracket(g)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `x^{±basis_k}`, then `t_q`, then `d_p`, with their printed names.
pub fn standard_generators(sig: &Sig) -> Vec<(String, WeylElement)> {
    let mut out = Vec::new();
    let gamma = sig.gamma();
    for k in 0..gamma.rank() {
        let b = gamma.basis_elem(k);
        for e in [b.clone(), b.neg()] {
            let x = WeylElement::x(sig, e);
            out.push((x.to_string(), x));
        }
    }
    for q in 1..=sig.t_axes() {
        out.push((format!("t{q}"), WeylElement::t(sig, q).expect("axis in range")));
    }
    for p in 1..=sig.len() {
        out.push((format!("d{p}"), WeylElement::d(sig, p).expect("axis in range")));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeCaps {
    /// Maximum total `t`/`d` degree of any term.
    pub degree: u32,
    /// Maximum `l1`-norm of the `Gamma` coordinates of any term.
    pub alpha_norm: u64,
    /// Maximum dimension of the saturated span.
    pub span: usize,
}

impl Default for ProbeCaps {
    fn default() -> Self {
        ProbeCaps {
            degree: 8,
            alpha_norm: 4,
            span: 4000,
        }
    }
}

fn within_caps(u: &WeylElement, caps: &ProbeCaps) -> bool {
    u.terms()
        .all(|(m, _)| m.degree() <= caps.degree && m.alpha.l1_norm() <= caps.alpha_norm)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeResult {
    /// `1` lies in the ideal; `trace` lists the products that put it there.
    ReachedOne { rounds: u32, trace: Vec<String> },
    Exhausted { rounds: u32, span_dim: usize },
}

struct Provenance {
    text: String,
    deps: BTreeSet<usize>,
}

/// Saturates the two-sided ideal generated by `u` under left and right
/// multiplication by [`standard_generators`], round by round.
pub fn simplicity_probe(
    u: &WeylElement,
    steps: u32,
    caps: &ProbeCaps,
) -> Result<ProbeResult, StructureError> {
    if u.is_zero() {
        return Err(StructureError::ZeroElement);
    }
    if u.is_scalar() {
        return Err(StructureError::ScalarInput);
    }
    let sig = u.signature();
    let gens = standard_generators(sig);
    let one = WeylElement::one(sig);

    let mut rows: Vec<WeylElement> = Vec::new();
    let mut pivots: BTreeMap<Monomial, usize> = BTreeMap::new();
    let mut prov: Vec<Provenance> = Vec::new();

    let reduce = |v: &WeylElement, rows: &[WeylElement], pivots: &BTreeMap<Monomial, usize>| {
        let mut cur = v.clone();
        let mut used = BTreeSet::new();
        loop {
            let hit = cur
                .terms()
                .rev()
                .find_map(|(m, c)| pivots.get(m).map(|&k| (k, c.clone())));
            let Some((k, c)) = hit else { return (cur, used) };
            used.insert(k);
            cur = &cur - &rows[k].scale(&c);
        }
    };

    let add = |v: &WeylElement,
                   text: String,
                   deps: BTreeSet<usize>,
                   rows: &mut Vec<WeylElement>,
                   pivots: &mut BTreeMap<Monomial, usize>,
                   prov: &mut Vec<Provenance>|
     -> Option<usize> {
        let (r, used) = reduce(v, rows, pivots);
        let (lead, c) = r.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let row = r.scale(&c.inv().expect("nonzero leading coefficient"));
        let k = rows.len();
        rows.push(row);
        pivots.insert(lead, k);
        prov.push(Provenance {
            text,
            deps: deps.union(&used).copied().collect(),
        });
        Some(k)
    };

    add(u, "u".to_string(), BTreeSet::new(), &mut rows, &mut pivots, &mut prov);
    let mut frontier = vec![0usize];
    for round in 1..=steps {
        let mut next = Vec::new();
        for &k in &frontier {
            for (name, g) in &gens {
                let products = [
                    (g * &rows[k], format!("{name} * b{k}")),
                    (&rows[k] * g, format!("b{k} * {name}")),
                ];
                for (p, text) in products {
                    if p.is_zero() || !within_caps(&p, caps) {
                        continue;
                    }
                    let deps = BTreeSet::from([k]);
                    if let Some(new) = add(&p, text, deps, &mut rows, &mut pivots, &mut prov) {
                        next.push(new);
                        let (rest, used) = reduce(&one, &rows, &pivots);
                        if rest.is_zero() {
                            let trace = build_trace(&rows, &prov, &used);
                            return Ok(ProbeResult::ReachedOne { rounds: round, trace });
                        }
                        if rows.len() >= caps.span {
                            return Ok(ProbeResult::Exhausted {
                                rounds: round,
                                span_dim: rows.len(),
                            });
                        }
                    }
                }
            }
        }
        if next.is_empty() {
            return Ok(ProbeResult::Exhausted {
                rounds: round,
                span_dim: rows.len(),
            });
        }
        frontier = next;
    }
    Ok(ProbeResult::Exhausted {
        rounds: steps,
        span_dim: rows.len(),
    })
}

fn build_trace(rows: &[WeylElement], prov: &[Provenance], used: &BTreeSet<usize>) -> Vec<String> {
    let mut needed = BTreeSet::new();
    let mut stack: Vec<usize> = used.iter().copied().collect();
    while let Some(k) = stack.pop() {
        if needed.insert(k) {
            stack.extend(prov[k].deps.iter().copied());
        }
    }
    let mut out: Vec<String> = needed
        .iter()
        .map(|&k| format!("b{k} = {} ~ {}", prov[k].text, rows[k]))
        .collect();
    let names: Vec<String> = used.iter().map(|k| format!("b{k}")).collect();
    out.push(format!("1 in span{{{}}}", names.join(", ")));
    out
}

/// The sample of `A + D` used for eigenvector cross-checks: `x^{±basis}`,
/// `t_q`, `d_p` and `d_p + x^alpha`.
pub fn a_plus_d_sample(sig: &Sig) -> Vec<WeylElement> {
    let mut out: Vec<WeylElement> = standard_generators(sig).into_iter().map(|(_, g)| g).collect();
    let gamma = sig.gamma();
    if gamma.rank() > 0 {
        let x = WeylElement::x(sig, GroupElem::new(vec![1; gamma.rank()]));
        for p in 1..=sig.len() {
            out.push(&WeylElement::d(sig, p).expect("axis in range") + &x);
        }
    }
    out
}

/// The sample of `A + D1`: `x^{±basis}`, `t_q`, and `d_p` for `p <= l1`.
pub fn a_plus_d1_sample(sig: &Sig) -> Vec<WeylElement> {
    standard_generators(sig)
        .into_iter()
        .filter(|(name, _)| match name.strip_prefix('d') {
            Some(p) => p.parse::<usize>().map_or(true, |p| p <= sig.l1()),
            None => true,
        })
        .map(|(_, g)| g)
        .collect()
}

/// Scalar `c` with `[v, u] = c u`, when it exists.
pub fn eigenvalue(u: &WeylElement, v: &WeylElement) -> Result<Option<FieldElement>, WeylError> {
    let Some((lead, lc)) = u.leading() else {
        return Ok(None);
    };
    let b = v.bracket(u)?;
    let c = &b.coeff(lead) * &lc.inv().expect("nonzero leading coefficient");
    Ok((b == u.scale(&c)).then_some(c))
}
