use proptest::collection::vec;
use proptest::prelude::*;

use mhl_core::arithmetic::{alpha_of, beta_of, BitNat};
use mhl_core::f2linalg::{
    echelonize, echelonize_rows, even_parity_subspace, solve_preimage, subspace_equal, BitVector,
    Subspace,
};
use mhl_core::monomial::Monomial;
use mhl_core::steenrod::{pa_element, q0_element, Element};

fn bitvec(len: usize) -> impl Strategy<Value = BitVector> {
    vec(any::<bool>(), len).prop_map(|b| BitVector::from_bools(&b))
}

fn matrix() -> impl Strategy<Value = (usize, Vec<BitVector>)> {
    (1usize..80).prop_flat_map(|cols| (Just(cols), vec(bitvec(cols), 0..24)))
}

fn monomial(n: usize, max_e: u32) -> impl Strategy<Value = Monomial> {
    (0u32..1 << n, vec(0..=max_e, n)).prop_map(move |(mask, e)| Monomial::new(n, mask, e).unwrap())
}

fn sized_monomial() -> impl Strategy<Value = Monomial> {
    (1usize..=4).prop_flat_map(|n| monomial(n, 5))
}

fn monomial_pair() -> impl Strategy<Value = (Monomial, Monomial)> {
    (1usize..=4).prop_flat_map(|n| (monomial(n, 4), monomial(n, 4)))
}

fn sum(gens: &[BitVector], coeffs: &BitVector, len: usize) -> BitVector {
    let mut acc = BitVector::zeros(len);
    for i in coeffs.iter_ones() {
        acc.xor_assign(&gens[i]).unwrap();
    }
    acc
}

proptest! {
    #[test]
    fn echelon_is_idempotent_and_spans((cols, rows) in matrix()) {
        let s = echelonize(cols, rows.clone()).unwrap();
        let again = echelonize(cols, s.rows().to_vec()).unwrap();
        prop_assert_eq!(&again, &s);
        prop_assert!(s.rank() <= rows.len().min(cols));
        for r in &rows {
            prop_assert!(s.member(r).unwrap());
        }
        for (row, &p) in s.rows().iter().zip(s.pivots()) {
            prop_assert!(row.get(p));
            for other in s.rows() {
                prop_assert_eq!(other.get(p), std::ptr::eq(other, row));
            }
        }
    }

    #[test]
    fn echelonize_rows_matches_echelonize((cols, rows) in matrix()) {
        prop_assume!(!rows.is_empty());
        prop_assert_eq!(echelonize_rows(&rows).unwrap(), echelonize(cols, rows).unwrap());
    }

    #[test]
    fn row_order_does_not_change_the_subspace((cols, rows) in matrix()) {
        let forward = echelonize(cols, rows.clone()).unwrap();
        let backward = echelonize(cols, rows.into_iter().rev()).unwrap();
        prop_assert_eq!(&forward, &backward);
        prop_assert!(subspace_equal(&forward, &backward).unwrap());
    }

    #[test]
    fn cache_round_trip((cols, rows) in matrix()) {
        let s = echelonize(cols, rows).unwrap();
        let text = s.to_cache_string();
        prop_assert_eq!(Subspace::from_cache_str(&text).unwrap(), s);
    }

    #[test]
    fn hex_round_trip(v in (1usize..200).prop_flat_map(bitvec)) {
        prop_assert_eq!(BitVector::from_hex(v.len(), &v.to_hex()).unwrap(), v);
    }

    #[test]
    fn preimage_of_a_combination_is_found((cols, gens) in matrix(), picks in vec(any::<bool>(), 24)) {
        let coeffs = BitVector::from_bools(&picks[..gens.len()]);
        let target = sum(&gens, &coeffs, cols);
        let found = solve_preimage(&gens, &target).unwrap().expect("target is in the span");
        prop_assert_eq!(sum(&gens, &found, cols), target);
    }

    #[test]
    fn preimage_exists_iff_member((cols, gens) in matrix(), seed in any::<u64>()) {
        let bits: Vec<bool> = (0..cols).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let target = BitVector::from_bools(&bits);
        let span = echelonize(cols, gens.clone()).unwrap();
        let found = solve_preimage(&gens, &target).unwrap();
        prop_assert_eq!(found.is_some(), span.member(&target).unwrap());
    }

    #[test]
    fn even_parity_membership(big_n in 1usize..=12, bits in any::<u32>()) {
        let bits = bits & ((1 << big_n) - 1);
        let v = BitVector::from_bools(&(0..big_n).map(|i| (bits >> i) & 1 == 1).collect::<Vec<_>>());
        let even = even_parity_subspace(big_n);
        prop_assert_eq!(even.member(&v).unwrap(), bits.count_ones() % 2 == 0);
        prop_assert_eq!(even.rank(), big_n - 1);
    }

    #[test]
    fn q0_squares_to_zero(m in sized_monomial()) {
        let once = q0_element(&Element::from_terms([m]));
        prop_assert!(q0_element(&once).is_zero());
    }

    #[test]
    fn q0_is_a_derivation((u, v) in monomial_pair()) {
        let Some(uv) = u.multiply(&v).unwrap() else {
            return Ok(());
        };
        let eu = Element::from_terms([u.clone()]);
        let ev = Element::from_terms([v.clone()]);
        let lhs = q0_element(&Element::from_terms([uv]));
        let mut rhs = q0_element(&eu).mul(&ev).unwrap();
        rhs.add(&eu.mul(&q0_element(&ev)).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn cartan_formula((u, v) in monomial_pair(), a in 0u64..12) {
        let Some(uv) = u.multiply(&v).unwrap() else {
            return Ok(());
        };
        let lhs = pa_element(a, &Element::from_terms([uv]));
        let mut rhs = Element::zero();
        for i in 0..=a {
            let left = pa_element(i, &Element::from_terms([u.clone()]));
            let right = pa_element(a - i, &Element::from_terms([v.clone()]));
            rhs.add(&left.mul(&right).unwrap());
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn reduced_powers_respect_degree_and_instability(m in sized_monomial(), a in 0u64..14) {
        let image = pa_element(a, &Element::from_terms([m.clone()]));
        if a == 0 {
            prop_assert_eq!(image.terms().cloned().collect::<Vec<_>>(), vec![m.clone()]);
        }
        if a > m.y_total() {
            prop_assert!(image.is_zero());
        }
        for t in image.terms() {
            prop_assert_eq!(t.degree(), m.degree() + 2 * a as usize);
            prop_assert_eq!(t.xmask(), m.xmask());
        }
    }

    #[test]
    fn weight_profile_recovers_degree(m in sized_monomial()) {
        let w = m.weight_profile();
        let total: usize = w.omega.iter().enumerate().map(|(j, &o)| (o as usize) << j).sum();
        prop_assert_eq!(total, m.degree());
        prop_assert!(w.omega.iter().all(|&o| o as usize <= m.n()));
        for (i, &a) in w.alpha.iter().enumerate() {
            prop_assert_eq!(a as u64, m.packed_exponent(i).count_ones() as u64);
        }
    }

    #[test]
    fn monomial_text_round_trip(m in sized_monomial()) {
        prop_assert_eq!(Monomial::parse(m.n(), &m.to_string()).unwrap(), m);
    }

    #[test]
    fn permutations_preserve_degree_and_compose(m in (3usize..=4).prop_flat_map(|n| monomial(n, 5))) {
        let n = m.n();
        let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let mut back = m.clone();
        for _ in 0..n {
            back = back.permuted(&rot);
            prop_assert_eq!(back.degree(), m.degree());
        }
        prop_assert_eq!(back, m);
    }

    #[test]
    fn bitnat_decimal_round_trip(limbs in vec(any::<u64>(), 0..15), shift in 0u64..=40) {
        let mut x = BitNat::zero();
        for l in limbs {
            x = &(&x << 64) + l;
        }
        let x = &x << shift;
        let text = x.to_string();
        prop_assert_eq!(text.parse::<BitNat>().unwrap(), x.clone());
        prop_assert_eq!(x.shorthand().parse::<BitNat>().unwrap(), x);
    }

    #[test]
    fn beta_is_minimal(d in 1u64..1_000_000) {
        let big = BitNat::from(d);
        let b = beta_of(&big).unwrap();
        prop_assert!(alpha_of(&(&big + b)) <= b);
        for s in 1..b {
            prop_assert!(alpha_of(&(&big + s)) > s);
        }
    }
}
