//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::fs;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use weyl_algebra::algebra::{act_on_a, DerivationVector, Monomial, MultiIndex, Sig, Signature, WeylElement};
use weyl_algebra::gamma::{decide_equivalence, verify_witness, EquivalenceVerdict, GammaGroup};
use weyl_algebra::iso::{build_sigma, decide_isomorphism, verify_sigma, IsoVerdict};
use weyl_algebra::numberfield::{FieldElement, NumberField};
use weyl_algebra::random::{self, RandomSpec, DEFAULT_SEED};
use weyl_algebra::sigfile::load_signature;
use weyl_algebra::structure::{
    a_plus_d1_sample, a_plus_d_sample, ad_growth, centralizer_check, classify_local, eigen_property,
    is_in_e_of_f, is_in_n_of_n, nilpotency_bound, simplicity_probe, standard_generators, AdGrowth,
    ProbeCaps, ProbeResult, Verdict,
};

struct Outcome {
    failures: usize,
    detail: String,
}

impl Outcome {
    fn new(failures: usize, detail: impl Into<String>) -> Self {
        Outcome {
            failures,
            detail: detail.into(),
        }
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("associativity-jacobi", associativity_jacobi),
        ("operator-action", operator_action),
        ("weyl-relations", weyl_relations),
        ("sigma-witnesses", sigma_witnesses),
        ("rational-lattices", rational_lattices),
        ("inequivalence-certificate", inequivalence_certificate),
        ("local-classification", local_classification),
        ("simplicity-probe", simplicity),
        ("cli-golden", cli_golden),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let out = run();
        let status = if out.failures == 0 { "PASS" } else { "FAIL" };
        if out.failures > 0 {
            failed += 1;
        }
        println!(
            "{status} {name}: {} [{:.1}s]",
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn rationals() -> NumberField {
    NumberField::rationals()
}

fn signature(l1: usize, l2: usize, l3: usize, gens: &[Vec<i64>]) -> Sig {
    let q = rationals();
    let gamma = if l2 + l3 == 0 {
        GammaGroup::trivial(&q)
    } else {
        GammaGroup::from_i64(&q, l2 + l3, gens).expect("lattice")
    };
    Signature::new(l1, l2, l3, gamma).expect("signature")
}

/// W(1,0,0,{0}), W(0,1,0,Z), W(1,1,1,Z^2).
fn test_signatures() -> Vec<Sig> {
    vec![
        signature(1, 0, 0, &[]),
        signature(0, 1, 0, &[vec![1]]),
        signature(1, 1, 1, &[vec![1, 0], vec![0, 1]]),
    ]
}

fn label(sig: &Sig) -> String {
    let (a, b, c) = sig.tuple();
    format!("W({a},{b},{c})")
}

fn summary(parts: &[String]) -> String {
    parts.join(", ")
}

fn associativity_jacobi() -> Outcome {
    let spec = RandomSpec::with_degree(4);
    let start = Instant::now();
    let mut failures = 0;
    let mut parts = Vec::new();
    for (k, sig) in test_signatures().iter().enumerate() {
        let mut rng = random::rng(DEFAULT_SEED + k as u64);
        let mut bad = 0;
        for _ in 0..200 {
            let a = random::random_element(sig, &spec, &mut rng);
            let b = random::random_element(sig, &spec, &mut rng);
            let c = random::random_element(sig, &spec, &mut rng);
            if &(&a * &b) * &c != &a * &(&b * &c) {
                bad += 1;
            }
            let br = |x: &WeylElement, y: &WeylElement| x.bracket(y).expect("same signature");
            let jac = &(&br(&a, &br(&b, &c)) + &br(&b, &br(&c, &a))) + &br(&c, &br(&a, &b));
            if !jac.is_zero() {
                bad += 1;
            }
        }
        failures += bad;
        parts.push(format!("{} 200 triples {bad} failures", label(sig)));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        failures += 1;
        parts.push(format!("runtime {secs:.1}s over the 60s budget"));
    }
    Outcome::new(failures, summary(&parts))
}

/// `x^alpha t^i` with every Gamma coordinate in `{-1,0,1}` and `|i| <= 3`.
fn a_basis(sig: &Sig) -> Vec<WeylElement> {
    let rank = sig.gamma().rank();
    let mut alphas: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..rank {
        alphas = alphas
            .into_iter()
            .flat_map(|a| {
                (-1..=1).map(move |c| {
                    let mut a = a.clone();
                    a.push(c);
                    a
                })
            })
            .collect();
    }
    let mut exps: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..sig.t_axes() {
        exps = exps
            .into_iter()
            .flat_map(|e| {
                (0..=3u32).map(move |c| {
                    let mut e = e.clone();
                    e.push(c);
                    e
                })
            })
            .filter(|e| e.iter().sum::<u32>() <= 3)
            .collect();
    }
    let one = sig.field().one();
    let mut out = Vec::new();
    for a in &alphas {
        for e in &exps {
            let mut i = e.clone();
            i.resize(sig.len(), 0);
            let m = Monomial {
                alpha: weyl_algebra::gamma::GroupElem::new(a.clone()),
                i: MultiIndex::new(i),
                mu: MultiIndex::zero(sig.len()),
            };
            out.push(WeylElement::monomial(sig, m, one.clone()));
        }
    }
    out
}

fn operator_action() -> Outcome {
    let spec = RandomSpec::with_degree(3);
    let mut failures = 0;
    let mut parts = Vec::new();
    for (k, sig) in test_signatures().iter().enumerate() {
        let mut rng = random::rng(DEFAULT_SEED ^ (0x100 + k as u64));
        let basis = a_basis(sig);
        let mut bad = 0;
        for _ in 0..100 {
            let u = random::random_element(sig, &spec, &mut rng);
            let v = random::random_element(sig, &spec, &mut rng);
            let uv = &u * &v;
            for a in &basis {
                let lhs = act_on_a(&uv, a).expect("A element");
                let rhs = act_on_a(&u, &act_on_a(&v, a).expect("A element")).expect("A element");
                if lhs != rhs {
                    bad += 1;
                }
            }
        }
        failures += bad;
        parts.push(format!(
            "{} 100 pairs x {} monomials {bad} failures",
            label(sig),
            basis.len()
        ));
    }
    Outcome::new(failures, summary(&parts))
}

/// `sum_p d_p * alpha_p` over the full coordinates of `alpha`.
fn expected_pairing(sig: &Sig, d: &DerivationVector, alpha: &weyl_algebra::gamma::GroupElem) -> FieldElement {
    let full = sig.alpha_full(alpha);
    let field = sig.field();
    d.coeffs
        .iter()
        .zip(&full)
        .fold(field.zero(), |acc, (c, a)| &acc + &(c * a))
}

fn weyl_relations() -> Outcome {
    let mut failures = 0;
    let mut parts = Vec::new();
    for (k, sig) in test_signatures().iter().enumerate() {
        let mut rng = random::rng(DEFAULT_SEED ^ (0x200 + k as u64));
        let mut bad = 0;
        let n = sig.len();
        let t = |q| WeylElement::t(sig, q).expect("t axis");
        let d = |p| WeylElement::d(sig, p).expect("d axis");
        for p in 1..=n {
            for q in 1..=n {
                if !d(p).bracket(&d(q)).unwrap().is_zero() {
                    bad += 1;
                }
                if p <= sig.t_axes() && q <= sig.t_axes() && !t(p).bracket(&t(q)).unwrap().is_zero() {
                    bad += 1;
                }
                if q <= sig.t_axes() {
                    let want = WeylElement::from_i64(sig, i64::from(p == q));
                    if d(p).bracket(&t(q)).unwrap() != want {
                        bad += 1;
                    }
                }
            }
            for b in 0..sig.gamma().rank() {
                let alpha = sig.gamma().basis_elem(b);
                let x = WeylElement::x(sig, alpha.clone());
                let dv = DerivationVector::axis(sig, p);
                let want = x.scale(&expected_pairing(sig, &dv, &alpha));
                if d(p).bracket(&x).unwrap() != want {
                    bad += 1;
                }
            }
        }
        for _ in 0..50 {
            let dv = random::random_derivation(sig, 1, n, &mut rng);
            let alpha = random::random_group_elem(sig.gamma().rank(), 4, &mut rng);
            let x = WeylElement::x(sig, alpha.clone());
            let want = x.scale(&expected_pairing(sig, &dv, &alpha));
            if dv.to_element(sig).bracket(&x).unwrap() != want {
                bad += 1;
            }
        }
        failures += bad;
        parts.push(format!("{} all axes + 50 random {bad} failures", label(sig)));
    }
    Outcome::new(failures, summary(&parts))
}

const SHAPES: [(usize, usize); 4] = [(1, 0), (0, 1), (1, 1), (2, 1)];

fn random_gamma(n: usize, rng: &mut ChaCha8Rng) -> GammaGroup {
    GammaGroup::from_i64(&rationals(), n, &random::random_full_lattice(n, rng)).expect("full lattice")
}

fn sigma_witnesses() -> Outcome {
    let mut failures = 0;
    let mut parts = Vec::new();
    for (k, &(l2, l3)) in SHAPES.iter().enumerate() {
        let mut rng = random::rng(DEFAULT_SEED ^ (0x300 + k as u64));
        let mut bad = 0;
        for w in 0..5u64 {
            let gamma = random_gamma(l2 + l3, &mut rng);
            let source = Signature::new(1, l2, l3, gamma.clone()).expect("signature");
            let g = random::random_block_matrix(&rationals(), l2, l3, &mut rng);
            let target = Signature::new(1, l2, l3, gamma.apply(&g).expect("action")).expect("signature");
            let ok = build_sigma(&g, &source, &target)
                .ok()
                .and_then(|s| verify_sigma(&s, 100, DEFAULT_SEED + w).ok())
                .is_some_and(|r| r.passed());
            if !ok {
                bad += 1;
            }
        }
        failures += bad;
        parts.push(format!("(l2,l3)=({l2},{l3}) 5 witnesses {bad} failures"));
    }
    Outcome::new(failures, summary(&parts))
}

fn rational_lattices() -> Outcome {
    let mut failures = 0;
    let mut parts = Vec::new();
    for (k, &(l2, l3)) in SHAPES.iter().enumerate() {
        let mut rng = random::rng(DEFAULT_SEED ^ (0x400 + k as u64));
        let mut bad = 0;
        for _ in 0..20 {
            let a = random_gamma(l2 + l3, &mut rng);
            let b = random_gamma(l2 + l3, &mut rng);
            match decide_equivalence(&a, &b, l2, 0) {
                Ok(EquivalenceVerdict::Equivalent(w)) if verify_witness(&w, &a, &b) => {}
                _ => bad += 1,
            }
        }
        failures += bad;
        parts.push(format!("(l2,l3)=({l2},{l3}) 20 pairs {bad} failures"));
    }
    Outcome::new(failures, summary(&parts))
}

fn load(name: &str) -> Sig {
    let text = fs::read_to_string(common::signature_path(name)).expect("signature file");
    load_signature(&text).expect("valid signature")
}

fn inequivalence_certificate() -> Outcome {
    let a = load("sqrt2_a.sig");
    let b = load("sqrt2_b.sig");
    match decide_isomorphism(&a, &b, 3) {
        Ok(IsoVerdict::NotIsomorphic(cert))
            if cert.invariant == "rank_cap_V2" && cert.lhs == "0" && cert.rhs == "1" =>
        {
            Outcome::new(0, format!("NotIsomorphic {}={} vs {}", cert.invariant, cert.lhs, cert.rhs))
        }
        Ok(other) => Outcome::new(1, format!("unexpected verdict {other}")),
        Err(e) => Outcome::new(1, format!("error: {e}")),
    }
}

const CLASSES: [Verdict; 5] = [
    Verdict::CertNilpotent,
    Verdict::CertFiniteNotNilpotent,
    Verdict::NotLocallyFinite,
    Verdict::NotNilpotentUnknownFinite,
    Verdict::Inconclusive,
];

fn noise_spec() -> RandomSpec {
    RandomSpec {
        max_terms: 2,
        axis_cap: 2,
        total_cap: 2,
        alpha_cap: 2,
    }
}

fn nonzero_scalar(sig: &Sig, rng: &mut ChaCha8Rng) -> FieldElement {
    loop {
        let c = random::random_scalar(sig.field(), rng);
        if !c.is_zero() {
            return c;
        }
    }
}

fn nonzero_alpha(sig: &Sig, rng: &mut ChaCha8Rng) -> weyl_algebra::gamma::GroupElem {
    loop {
        let a = random::random_group_elem(sig.gamma().rank(), 2, rng);
        if !a.is_zero() {
            return a;
        }
    }
}

/// `c * x^alpha t^i d^mu` from explicit exponent lists.
fn term(sig: &Sig, alpha: weyl_algebra::gamma::GroupElem, i: &[(usize, u32)], mu: &[(usize, u32)], c: FieldElement) -> WeylElement {
    let mut ie = vec![0; sig.len()];
    let mut me = vec![0; sig.len()];
    for &(q, e) in i {
        ie[q - 1] += e;
    }
    for &(p, e) in mu {
        me[p - 1] += e;
    }
    let m = Monomial {
        alpha,
        i: MultiIndex::new(ie),
        mu: MultiIndex::new(me),
    };
    WeylElement::monomial(sig, m, c)
}

/// A monomial carrying a derivation on axis `p` that is neither a pure
/// derivation nor free of `x`, `t` and higher powers.
fn impure_on_axis(sig: &Sig, p: usize, rng: &mut ChaCha8Rng) -> WeylElement {
    let zero = weyl_algebra::gamma::GroupElem::zero(sig.gamma().rank());
    let c = nonzero_scalar(sig, rng);
    loop {
        match rng.gen_range(0..3) {
            0 => return term(sig, zero, &[], &[(p, rng.gen_range(2..=3))], c),
            1 if sig.t_axes() > 0 => {
                let q = rng.gen_range(1..=sig.t_axes());
                return term(sig, zero, &[(q, 1)], &[(p, 1)], c);
            }
            2 if sig.gamma().rank() > 0 => {
                let alpha = nonzero_alpha(sig, rng);
                return term(sig, alpha, &[], &[(p, 1)], c);
            }
            _ => {}
        }
    }
}

/// A random derivation supported on the axes beyond `l1`.
fn outer_derivation(sig: &Sig, rng: &mut ChaCha8Rng) -> WeylElement {
    random::random_derivation(sig, sig.l1() + 1, sig.len(), rng).to_element(sig)
}

fn sample_class(sig: &Sig, class: Verdict, rng: &mut ChaCha8Rng) -> Option<WeylElement> {
    let (l1, n) = (sig.l1(), sig.len());
    let noise = random::random_a_element(sig, &noise_spec(), rng);
    let d1 = random::random_derivation(sig, 1, l1, rng).to_element(sig);
    let u = match class {
        Verdict::CertNilpotent => &random::random_a_element(sig, &RandomSpec::with_degree(3), rng) + &d1,
        Verdict::CertFiniteNotNilpotent if n > l1 => &(&noise + &d1) + &outer_derivation(sig, rng),
        Verdict::NotLocallyFinite if n > l1 => {
            let p = rng.gen_range(l1 + 1..=n);
            &(&noise + &outer_derivation(sig, rng)) + &impure_on_axis(sig, p, rng)
        }
        Verdict::NotNilpotentUnknownFinite if l1 > 0 && n > l1 => {
            let p = rng.gen_range(1..=l1);
            &(&noise + &outer_derivation(sig, rng)) + &impure_on_axis(sig, p, rng)
        }
        Verdict::Inconclusive if l1 > 0 => {
            let p = rng.gen_range(1..=l1);
            &(&noise + &d1) + &impure_on_axis(sig, p, rng)
        }
        _ => return None,
    };
    (!u.is_zero()).then_some(u)
}

/// Growth evidence for `u` matching its class; `None` when it disagrees.
fn growth_evidence(u: &WeylElement, class: Verdict, v: &WeylElement) -> Option<String> {
    const S: u32 = 12;
    let gens = standard_generators(u.signature());
    let find = |pred: &dyn Fn(&AdGrowth) -> bool| {
        gens.iter().find_map(|(name, g)| {
            let growth = ad_growth(u, g, S).expect("same signature");
            pred(&growth).then(|| format!("{name}: {growth:?}"))
        })
    };
    match class {
        Verdict::CertNilpotent => {
            let bound = nilpotency_bound(u, v);
            match ad_growth(u, v, bound).expect("same signature") {
                AdGrowth::NilpotentAt(k) => Some(format!("k={k}<={bound}")),
                AdGrowth::SpanDim(_) => None,
            }
        }
        Verdict::NotLocallyFinite => find(&|g| g.final_dim().is_some_and(|d| d >= (S / 2) as usize)),
        Verdict::CertFiniteNotNilpotent => find(&|g| match g {
            AdGrowth::SpanDim(d) => d[d.len() - 1] == d[d.len() - 2],
            AdGrowth::NilpotentAt(_) => false,
        }),
        Verdict::NotNilpotentUnknownFinite => find(&|g| matches!(g, AdGrowth::SpanDim(_))),
        Verdict::Inconclusive => Some(String::new()),
    }
}

fn local_classification() -> Outcome {
    let sigs = test_signatures();
    let mut failures = 0;
    let mut parts = Vec::new();
    for (k, class) in CLASSES.into_iter().enumerate() {
        let mut rng = random::rng(DEFAULT_SEED ^ (0x500 + k as u64));
        let applicable: Vec<&Sig> = sigs
            .iter()
            .filter(|s| sample_class(s, class, &mut random::rng(0)).is_some() || class == Verdict::CertNilpotent)
            .collect();
        let (mut taken, mut bad) = (0, 0);
        while taken < 50 {
            let sig = applicable[taken % applicable.len()];
            let Some(u) = sample_class(sig, class, &mut rng) else { continue };
            taken += 1;
            let v = random::random_element(sig, &RandomSpec::with_degree(3), &mut rng);
            let verdict = classify_local(&u).map(|c| c.verdict);
            if verdict != Ok(class) || growth_evidence(&u, class, &v).is_none() {
                bad += 1;
                eprintln!("  {class} mismatch on {}: u = {u}, v = {v}", label(sig));
            }
        }
        failures += bad;
        let names: Vec<String> = applicable.iter().map(|s| label(s)).collect();
        parts.push(format!("{class} 50 on {} {bad} failures", names.join("/")));
    }
    for (k, sig) in sigs.iter().enumerate() {
        let mut rng = random::rng(DEFAULT_SEED ^ (0x600 + k as u64));
        let f_sample = a_plus_d_sample(sig);
        let n_sample = a_plus_d1_sample(sig);
        let (mut bad_e, mut bad_n, mut true_e, mut true_n) = (0, 0, 0, 0);
        for j in 0..100 {
            let u = if j % 2 == 0 {
                random::random_nonzero(sig, &RandomSpec::with_degree(3), &mut rng)
            } else {
                let alpha = random::random_group_elem(sig.gamma().rank(), 3, &mut rng);
                let c = nonzero_scalar(sig, &mut rng);
                let x = term(sig, alpha, &[], &[], c);
                if j % 4 == 1 { x } else { &x + &random::random_nonzero(sig, &noise_spec(), &mut rng) }
            };
            if u.is_zero() {
                continue;
            }
            let closed = is_in_e_of_f(&u).expect("nonzero");
            true_e += usize::from(closed);
            if closed != eigen_property(&u, &f_sample).expect("same signature") {
                bad_e += 1;
                eprintln!("  E(F) mismatch on {}: {u}", label(sig));
            }
        }
        for j in 0..100 {
            let u = random::random_nonzero(sig, &RandomSpec::with_degree(3), &mut rng);
            let u = if j % 2 == 0 {
                u
            } else {
                // keep only terms with no derivations and no t on D1 axes
                let kept = WeylElement::from_terms(
                    sig,
                    u.terms()
                        .filter(|(m, _)| m.mu.is_zero() && m.i.entries()[..sig.l1()].iter().all(|&e| e == 0))
                        .map(|(m, c)| (m.clone(), c.clone())),
                );
                if kept.is_zero() { u } else { kept }
            };
            let closed = is_in_n_of_n(&u).expect("nonzero");
            true_n += usize::from(closed);
            if closed != centralizer_check(&u, &n_sample).expect("same signature") {
                bad_n += 1;
                eprintln!("  N(N) mismatch on {}: {u}", label(sig));
            }
        }
        failures += bad_e + bad_n;
        parts.push(format!(
            "{} E(F) 100 ({true_e} in) {bad_e} failures, N(N) 100 ({true_n} in) {bad_n} failures",
            label(sig)
        ));
    }
    Outcome::new(failures, summary(&parts))
}

fn simplicity() -> Outcome {
    let mut failures = 0;
    let mut parts = Vec::new();
    for sig in test_signatures() {
        let t1 = WeylElement::t(&sig, 1).expect("t1");
        let mut starts = vec![
            ("t1", t1.clone()),
            ("d1", WeylElement::d(&sig, 1).expect("d1")),
        ];
        if sig.gamma().rank() > 0 {
            starts.push(("x^alpha(1)", WeylElement::x(&sig, sig.gamma().basis_elem(0))));
        }
        starts.push(("t1^2", t1.pow(2)));
        let mut rounds = Vec::new();
        for (name, u) in &starts {
            match simplicity_probe(u, 6, &ProbeCaps::default()) {
                Ok(ProbeResult::ReachedOne { rounds: r, .. }) if r <= 6 => rounds.push(format!("{name}:{r}")),
                other => {
                    failures += 1;
                    rounds.push(format!("{name}:{other:?}"));
                }
            }
        }
        parts.push(format!("{} rounds {}", label(&sig), rounds.join(" ")));
    }
    Outcome::new(failures, summary(&parts))
}

fn cli_golden() -> Outcome {
    let all = common::transcripts();
    let mut failures = usize::from(all.len() != 10);
    for t in &all {
        let first = common::render(&t.args);
        let second = common::render(&t.args);
        if first != second || t.recorded.as_deref() != Some(first.as_str()) {
            failures += 1;
            eprintln!("  transcript {} differs", t.name);
        }
    }
    Outcome::new(failures, format!("{} transcripts byte-identical", all.len() - failures.min(all.len())))
}
