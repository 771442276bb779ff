//! The isomorphism `sigma: W -> W'` induced by a witness `g` with
//! `Gamma' = Gamma g^-1`, and its verification.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::Rng;
use thiserror::Error;

use crate::algebra::{act_on_a, DerivationVector, Monomial, MultiIndex, Sig, WeylElement, WeylError};
use crate::gamma::{
    decide_equivalence, verify_witness, BlockMatrix, EquivalenceVerdict, GammaError, GroupElem,
    InvariantCertificate,
};
use crate::lattice;
use crate::random::{self, RandomSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsoError {
    #[error("tuples differ: {0:?} vs {1:?}")]
    TupleMismatch((usize, usize, usize), (usize, usize, usize)),
    #[error("g does not map Gamma onto Gamma'")]
    WitnessInvalid,
    #[error("generator check failed: {0}")]
    GeneratorCheckFailed(String),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
}

/// `sigma` stored by generator images.
#[derive(Debug, Clone)]
pub struct SigmaMap {
    source: Sig,
    target: Sig,
    g: BlockMatrix,
    /// `tau(basis_k)` in the coordinates of `Gamma'`.
    tau: Vec<GroupElem>,
    /// Images of `d_1 .. d_l`.
    dbar: Vec<DerivationVector>,
    /// Images of `t_1 .. t_{l1+l2}`.
    t_images: Vec<WeylElement>,
}

/// Builds `sigma`: `x^alpha -> x'^{alpha g^-1}`, `d_p -> sum_r g[r][p] d'_r`
/// on the `Gamma` axes and `t_{l1+q} -> sum_r (A^-1)[q][r] t'_{l1+r}`; the
/// first `l1` axes map identically.
pub fn build_sigma(g: &BlockMatrix, source: &Sig, target: &Sig) -> Result<SigmaMap, IsoError> {
    if source.tuple() != target.tuple() {
        return Err(IsoError::TupleMismatch(source.tuple(), target.tuple()));
    }
    if g.l2() != source.l2() || g.l3() != source.l3() || g.field() != source.field() {
        return Err(IsoError::WitnessInvalid);
    }
    if !verify_witness(g, source.gamma(), target.gamma()) {
        return Err(IsoError::WitnessInvalid);
    }
    let field = source.field();
    let (l1, l2) = (source.l1(), source.l2());
    let l = source.len();
    let n = source.gamma().dim();
    let ginv = g.inverse_full();

    let gamma = source.gamma();
    let tau = (0..gamma.rank())
        .map(|k| {
            let image = ginv.left_apply(&gamma.basis()[k]);
            target.gamma().member(&image).map_err(|_| IsoError::WitnessInvalid)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let full = g.full();
    let dbar = (0..l)
        .map(|p| {
            let mut coeffs = vec![field.zero(); l];
            if p < l1 {
                coeffs[p] = field.one();
            } else {
                for r in 0..n {
                    coeffs[l1 + r] = full.get(r, p - l1).clone();
                }
            }
            DerivationVector::new(coeffs)
        })
        .collect();

    let a_inv = g.block_a().inverse().expect("invertible A block");
    let t_images = (0..l1 + l2)
        .map(|q| {
            if q < l1 {
                WeylElement::t(target, q + 1).expect("axis in range")
            } else {
                let terms = (0..l2).map(|r| {
                    let mut m = Monomial::one(target);
                    m.i = MultiIndex::unit(l, l1 + r + 1);
                    (m, a_inv.get(q - l1, r).clone())
                });
                WeylElement::from_terms(target, terms)
            }
        })
        .collect();

    let sigma = SigmaMap {
        source: source.clone(),
        target: target.clone(),
        g: g.clone(),
        tau,
        dbar,
        t_images,
    };
    sigma.check_generators()?;
    Ok(sigma)
}

impl SigmaMap {
    pub fn source(&self) -> &Sig {
        &self.source
    }

    pub fn target(&self) -> &Sig {
        &self.target
    }

    pub fn witness(&self) -> &BlockMatrix {
        &self.g
    }

    pub fn dbar(&self) -> &[DerivationVector] {
        &self.dbar
    }

    pub fn t_images(&self) -> &[WeylElement] {
        &self.t_images
    }

    /// `tau(alpha)` as an element of `Gamma'`.
    pub fn tau(&self, alpha: &GroupElem) -> GroupElem {
        let mut out = GroupElem::zero(self.target.gamma().rank());
        for (k, &c) in alpha.coords().iter().enumerate() {
            if c != 0 {
                out = out.add(&self.tau[k].scale(c));
            }
        }
        out
    }

    /// Replaces the image of `t_q` (1-based); used to test the verifier.
    pub fn with_t_image(&self, q: usize, image: WeylElement) -> SigmaMap {
        let mut s = self.clone();
        s.t_images[q - 1] = image;
        s
    }

    /// The identities `sigma(d_p)(sigma(t_q)) = delta_pq`,
    /// `sigma(d_p)(sigma(x^b)) = b_p sigma(x^b)` on basis elements `b`, and
    /// bijectivity of `tau`.
    pub fn check_generators(&self) -> Result<(), IsoError> {
        let target = &self.target;
        let field = target.field();
        for (p, d) in self.dbar.iter().enumerate() {
            let de = d.to_element(target);
            for (q, t) in self.t_images.iter().enumerate() {
                let v = act_on_a(&de, t)?;
                let expect = if p == q { field.one() } else { field.zero() };
                if v.as_scalar() != Some(expect) {
                    return Err(IsoError::GeneratorCheckFailed(format!(
                        "sigma(d{})(sigma(t{})) = {v}",
                        p + 1,
                        q + 1
                    )));
                }
            }
            for k in 0..self.source.gamma().rank() {
                let b = self.source.gamma().basis_elem(k);
                let image = WeylElement::x(target, self.tau(&b));
                let lhs = act_on_a(&de, &image)?;
                let rhs = image.scale(&self.source.alpha_at(&b, p));
                if lhs != rhs {
                    return Err(IsoError::GeneratorCheckFailed(format!(
                        "sigma(d{})(sigma(x^b{})) = {lhs}, expected {rhs}",
                        p + 1,
                        k + 1
                    )));
                }
            }
        }
        let rows: Vec<Vec<BigInt>> = self
            .tau
            .iter()
            .map(|e| e.coords().iter().map(|&c| BigInt::from(c)).collect())
            .collect();
        if rows.len() != self.target.gamma().rank() || !lattice::determinant(&rows).abs().is_one() {
            return Err(IsoError::GeneratorCheckFailed("tau is not a bijection".to_string()));
        }
        Ok(())
    }
}

/// `sigma(c x^{alpha,i} d^mu) = c sigma(x^alpha) prod sigma(t_q)^{i_q}
/// prod sigma(d_p)^{mu_p}`, products taken in the target.
pub fn apply_sigma(sigma: &SigmaMap, u: &WeylElement) -> Result<WeylElement, WeylError> {
    if **u.signature() != *sigma.source {
        return Err(WeylError::SignatureMismatch);
    }
    let target = &sigma.target;
    let dbar: Vec<WeylElement> = sigma.dbar.iter().map(|d| d.to_element(target)).collect();
    let mut out = WeylElement::zero(target);
    for (m, c) in u.terms() {
        let mut img = WeylElement::x(target, sigma.tau(&m.alpha));
        for (q, &e) in m.i.entries().iter().enumerate() {
            if e > 0 {
                img = &img * &sigma.t_images[q].pow(e);
            }
        }
        for (p, &e) in m.mu.entries().iter().enumerate() {
            if e > 0 {
                img = &img * &dbar[p].pow(e);
            }
        }
        out = &out + &img.scale(c);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaReport {
    pub trials: usize,
    pub multiplicative_failures: usize,
    pub bracket_failures: usize,
    pub extension_failures: usize,
    pub first_failure: Option<String>,
}

impl SigmaReport {
    pub fn passed(&self) -> bool {
        self.multiplicative_failures + self.bracket_failures + self.extension_failures == 0
    }
}

impl fmt::Display for SigmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trials={} mul_failures={} bracket_failures={} extension_failures={}",
            self.trials, self.multiplicative_failures, self.bracket_failures, self.extension_failures
        )?;
        if let Some(fail) = &self.first_failure {
            write!(f, " first_failure: {fail}")?;
        }
        Ok(())
    }
}

/// Random-trial check of `sigma(uv) = sigma(u)sigma(v)`,
/// `sigma([u,v]) = [sigma(u),sigma(v)]` and of the splitting
/// `sigma(x^{alpha,i+j} d^mu) = sigma(x^{alpha,i}) prod_{p<=l1} sigma(t_p)^{j_p}
/// sigma(d_p)^{mu_p}` with `i` on the `l2` axes and `j, mu` on the first `l1`.
pub fn verify_sigma(sigma: &SigmaMap, trials: usize, seed: u64) -> Result<SigmaReport, WeylError> {
    let mut rng = random::rng(seed);
    let spec = RandomSpec {
        max_terms: 2,
        axis_cap: 2,
        total_cap: 3,
        alpha_cap: 2,
    };
    let src = &sigma.source;
    let mut report = SigmaReport {
        trials,
        multiplicative_failures: 0,
        bracket_failures: 0,
        extension_failures: 0,
        first_failure: None,
    };
    for _ in 0..trials {
        let u = random::random_element(src, &spec, &mut rng);
        let v = random::random_element(src, &spec, &mut rng);
        let (su, sv) = (apply_sigma(sigma, &u)?, apply_sigma(sigma, &v)?);
        if apply_sigma(sigma, &(&u * &v))? != &su * &sv {
            report.multiplicative_failures += 1;
            report
                .first_failure
                .get_or_insert_with(|| format!("sigma(u*v) != sigma(u)*sigma(v) for u = {u}, v = {v}"));
        }
        if apply_sigma(sigma, &u.bracket(&v)?)? != su.bracket(&sv)? {
            report.bracket_failures += 1;
            report
                .first_failure
                .get_or_insert_with(|| format!("sigma([u,v]) != [sigma(u),sigma(v)] for u = {u}, v = {v}"));
        }
        if let Some(msg) = extension_spot_check(sigma, &mut rng)? {
            report.extension_failures += 1;
            report.first_failure.get_or_insert(msg);
        }
    }
    Ok(report)
}

fn extension_spot_check<R: Rng>(sigma: &SigmaMap, rng: &mut R) -> Result<Option<String>, WeylError> {
    let src = &sigma.source;
    let target = &sigma.target;
    let (l1, l2, l) = (src.l1(), src.l2(), src.len());
    let alpha = random::random_group_elem(src.gamma().rank(), 2, rng);
    let mut i = vec![0u32; l];
    let mut j = vec![0u32; l];
    let mut mu = vec![0u32; l];
    for q in l1..l1 + l2 {
        i[q] = rng.gen_range(0..=2);
    }
    for p in 0..l1 {
        j[p] = rng.gen_range(0..=2);
        mu[p] = rng.gen_range(0..=2);
    }
    let ij: Vec<u32> = i.iter().zip(&j).map(|(a, b)| a + b).collect();
    let lhs_mon = Monomial {
        alpha: alpha.clone(),
        i: MultiIndex::new(ij),
        mu: MultiIndex::new(mu.clone()),
    };
    let base = Monomial {
        alpha,
        i: MultiIndex::new(i),
        mu: MultiIndex::zero(l),
    };
    let one = src.field().one();
    let lhs = apply_sigma(sigma, &WeylElement::monomial(src, lhs_mon.clone(), one.clone()))?;
    let mut rhs = apply_sigma(sigma, &WeylElement::monomial(src, base, one))?;
    for p in 0..l1 {
        rhs = &rhs * &sigma.t_images[p].pow(j[p]);
    }
    for p in 0..l1 {
        rhs = &rhs * &sigma.dbar[p].to_element(target).pow(mu[p]);
    }
    Ok((lhs != rhs).then(|| {
        let shown = WeylElement::monomial(src, lhs_mon, src.field().one());
        format!("splitting fails on {shown}")
    }))
}

#[derive(Debug, Clone)]
pub enum IsoVerdict {
    Isomorphic(SigmaMap),
    NotIsomorphic(InvariantCertificate),
    Undecided { radius: u32 },
}

impl fmt::Display for IsoVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsoVerdict::Isomorphic(s) => write!(f, "ISOMORPHIC g={}", s.g),
            IsoVerdict::NotIsomorphic(c) => write!(f, "NOT_ISOMORPHIC {c}"),
            IsoVerdict::Undecided { radius } => write!(f, "UNDECIDED radius={radius}"),
        }
    }
}

/// Tuple comparison, then the lattice decision; a found witness is turned
/// into a verified `sigma`.
pub fn decide_isomorphism(a: &Sig, b: &Sig, radius: u32) -> Result<IsoVerdict, IsoError> {
    if a.tuple() != b.tuple() {
        let show = |s: &Sig| format!("({},{},{})", s.l1(), s.l2(), s.l3());
        return Ok(IsoVerdict::NotIsomorphic(InvariantCertificate {
            invariant: "tuple".to_string(),
            lhs: show(a),
            rhs: show(b),
        }));
    }
    if a.field() != b.field() {
        return Err(IsoError::Gamma(GammaError::FieldMismatch));
    }
    match decide_equivalence(a.gamma(), b.gamma(), a.l2(), radius)? {
        EquivalenceVerdict::Equivalent(g) => Ok(IsoVerdict::Isomorphic(build_sigma(&g, a, b)?)),
        EquivalenceVerdict::Inequivalent(c) => Ok(IsoVerdict::NotIsomorphic(c)),
        EquivalenceVerdict::Undecided { radius } => Ok(IsoVerdict::Undecided { radius }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Signature;
    use crate::gamma::GammaGroup;
    use crate::matrix::FMatrix;
    use crate::numberfield::NumberField;
    use crate::syntax::parse_element;

    fn sig(l1: usize, l2: usize, l3: usize, field: &NumberField, gens: &[Vec<i64>]) -> Sig {
        Signature::new(l1, l2, l3, GammaGroup::from_i64(field, l2 + l3, gens).unwrap()).unwrap()
    }

    fn scalar_example() -> SigmaMap {
        let q = NumberField::rationals();
        let a = sig(0, 1, 0, &q, &[vec![2]]);
        let b = sig(0, 1, 0, &q, &[vec![1]]);
        let g = BlockMatrix::from_full(&FMatrix::from_i64(&q, &[vec![2]]), 1, 0).unwrap();
        build_sigma(&g, &a, &b).unwrap()
    }

    #[test]
    fn scalar_witness() {
        let s = scalar_example();
        let src = s.source().clone();
        let tgt = s.target().clone();
        assert_eq!(apply_sigma(&s, &parse_element(&src, "x[2]").unwrap()).unwrap().to_string(), "x[1]");
        assert_eq!(s.t_images()[0].to_string(), "1/2*t1");
        assert_eq!(s.dbar()[0].to_element(&tgt).to_string(), "2*d1");
        let u = parse_element(&src, "t1*d1").unwrap();
        assert_eq!(apply_sigma(&s, &u).unwrap().to_string(), "t1*d1");
        let c = parse_element(&src, "7").unwrap();
        assert_eq!(apply_sigma(&s, &c).unwrap().to_string(), "7");
        assert!(verify_sigma(&s, 30, 1).unwrap().passed());
    }

    #[test]
    fn identity_sigma() {
        let q = NumberField::rationals();
        let a = sig(1, 1, 1, &q, &[vec![1, 0], vec![0, 1]]);
        let g = BlockMatrix::identity(&q, 1, 1);
        let s = build_sigma(&g, &a, &a).unwrap();
        let u = parse_element(&a, "x[1,-1]*t2*d3 + t1^2*d1").unwrap();
        assert_eq!(apply_sigma(&s, &u).unwrap(), u);
    }

    #[test]
    fn tuple_mismatch() {
        let q = NumberField::rationals();
        let a = sig(1, 1, 0, &q, &[vec![1]]);
        let b = sig(1, 0, 1, &q, &[vec![1]]);
        let g = BlockMatrix::identity(&q, 1, 0);
        assert!(matches!(build_sigma(&g, &a, &b), Err(IsoError::TupleMismatch(..))));
    }

    #[test]
    fn invalid_witness() {
        let q = NumberField::rationals();
        let a = sig(0, 1, 0, &q, &[vec![2]]);
        let b = sig(0, 1, 0, &q, &[vec![1]]);
        let g = BlockMatrix::from_full(&FMatrix::from_i64(&q, &[vec![3]]), 1, 0).unwrap();
        assert_eq!(build_sigma(&g, &a, &b).unwrap_err(), IsoError::WitnessInvalid);
    }

    #[test]
    fn corrupted_t_image_is_reported() {
        let s = scalar_example();
        let bad_t = s.t_images()[0].scale(&s.target().field().from_i64(2));
        let bad = s.with_t_image(1, bad_t);
        assert!(matches!(bad.check_generators(), Err(IsoError::GeneratorCheckFailed(_))));
        let report = verify_sigma(&bad, 40, 3).unwrap();
        assert!(report.multiplicative_failures > 0, "{report}");
    }

    #[test]
    fn decide_examples() {
        let q = NumberField::rationals();
        let a = sig(1, 1, 0, &q, &[vec![2]]);
        let b = sig(1, 1, 0, &q, &[vec![1]]);
        assert!(matches!(decide_isomorphism(&a, &b, 1).unwrap(), IsoVerdict::Isomorphic(_)));
        let c = sig(0, 1, 1, &q, &[vec![1, 0], vec![0, 1]]);
        match decide_isomorphism(&b, &c, 1).unwrap() {
            IsoVerdict::NotIsomorphic(cert) => assert_eq!(cert.invariant, "tuple"),
            other => panic!("{other}"),
        }
    }
}
