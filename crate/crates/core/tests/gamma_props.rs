use proptest::prelude::*;
use weyl_algebra::gamma::{decide_equivalence, verify_witness, EquivalenceVerdict, GammaGroup};
use weyl_algebra::matrix::FMatrix;
use weyl_algebra::numberfield::{FieldElement, NumberField};
use weyl_algebra::random;

fn shape(seed: u64) -> (usize, usize) {
    [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)][(seed % 5) as usize]
}

/// `v` lies in the full lattice spanned by the rows of `m` iff `v m^-1` is
/// integral.
fn oracle_member(m: &FMatrix, v: &[FieldElement]) -> bool {
    let inv = m.inverse().expect("full rank");
    inv.left_apply(v)
        .iter()
        .all(|c| c.as_rational().is_some_and(|q| q.is_integer()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn redundant_generators_give_the_same_group(seed in any::<u64>()) {
        let q = NumberField::rationals();
        let (l2, l3) = shape(seed);
        let n = l2 + l3;
        let mut rng = random::rng(seed);
        let gens = random::random_full_lattice(n, &mut rng);
        let a = GammaGroup::from_i64(&q, n, &gens).unwrap();
        let mut more = gens.clone();
        more.reverse();
        let sum: Vec<i64> = (0..n).map(|j| gens.iter().map(|g| g[j]).sum()).collect();
        more.push(sum);
        let b = GammaGroup::from_i64(&q, n, &more).unwrap();
        prop_assert!(a.same_group(&b));
        prop_assert_eq!(a.basis(), b.basis());
    }

    #[test]
    fn membership_matches_inverse_oracle(seed in any::<u64>(), probe in proptest::collection::vec(-6i64..=6, 3)) {
        let q = NumberField::rationals();
        let n = 1 + (seed % 3) as usize;
        let mut rng = random::rng(seed);
        let gens = random::random_full_lattice(n, &mut rng);
        let g = GammaGroup::from_i64(&q, n, &gens).unwrap();
        let m = FMatrix::from_i64(&q, &gens);
        let v: Vec<FieldElement> = probe[..n].iter().map(|&x| q.from_i64(x)).collect();
        prop_assert_eq!(g.contains(&v), oracle_member(&m, &v));
    }

    #[test]
    fn action_composes(seed in any::<u64>()) {
        let q = NumberField::rationals();
        let (l2, l3) = shape(seed);
        let n = l2 + l3;
        let mut rng = random::rng(seed);
        let gamma = GammaGroup::from_i64(&q, n, &random::random_full_lattice(n, &mut rng)).unwrap();
        let g = random::random_block_matrix(&q, l2, l3, &mut rng);
        let h = random::random_block_matrix(&q, l2, l3, &mut rng);
        let two_steps = gamma.apply(&g).unwrap().apply(&h).unwrap();
        let one_step = gamma.apply(&h.compose(&g)).unwrap();
        prop_assert!(two_steps.same_group(&one_step));
        let back = gamma.apply(&g).unwrap().apply(&g.inverse()).unwrap();
        prop_assert!(back.same_group(&gamma));
    }

    #[test]
    fn invariants_are_orbit_invariant(seed in any::<u64>()) {
        let q = NumberField::rationals();
        let (l2, l3) = shape(seed);
        let n = l2 + l3;
        let mut rng = random::rng(seed);
        let gamma = GammaGroup::from_i64(&q, n, &random::random_full_lattice(n, &mut rng)).unwrap();
        let g = random::random_block_matrix(&q, l2, l3, &mut rng);
        let image = gamma.apply(&g).unwrap();
        prop_assert_eq!(gamma.invariants(l2), image.invariants(l2));
        let inv = gamma.invariants(l2);
        prop_assert_eq!(inv.rank_cap_v2 + inv.rank_proj3, inv.rank);
    }

    #[test]
    fn rational_orbits_are_decided(seed in any::<u64>()) {
        let q = NumberField::rationals();
        let (l2, l3) = shape(seed);
        let n = l2 + l3;
        let mut rng = random::rng(seed);
        let gamma = GammaGroup::from_i64(&q, n, &random::random_full_lattice(n, &mut rng)).unwrap();
        let other = GammaGroup::from_i64(&q, n, &random::random_full_lattice(n, &mut rng)).unwrap();
        match decide_equivalence(&gamma, &other, l2, 1).unwrap() {
            EquivalenceVerdict::Equivalent(w) => prop_assert!(verify_witness(&w, &gamma, &other)),
            v => prop_assert!(false, "unexpected verdict {}", v),
        }
    }
}
