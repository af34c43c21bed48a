mod common;

use bp_core::dense::{self, c};
use bp_core::majorana::{monomial_to_pauli, pauli_to_monomial};
use bp_core::modules::{decompose, purity_spectrum};
use bp_core::{MajoranaMonomial, PauliSumOperator, PauliTerm};
use proptest::prelude::*;

fn term(n: usize) -> impl Strategy<Value = PauliTerm> {
    let limit = 1u64 << n;
    (0..limit, 0..limit, 0u8..4).prop_map(move |(x, z, ph)| PauliTerm::new(n, x, z, ph).unwrap())
}

fn triple() -> impl Strategy<Value = (PauliTerm, PauliTerm, PauliTerm)> {
    (1usize..=5).prop_flat_map(|n| (term(n), term(n), term(n)))
}

fn pair_small() -> impl Strategy<Value = (PauliTerm, PauliTerm)> {
    (1usize..=3).prop_flat_map(|n| (term(n), term(n)))
}

proptest! {
    #[test]
    fn multiplication_is_associative((a, b, cc) in triple()) {
        prop_assert_eq!(a.multiply(&b).unwrap().multiply(&cc).unwrap(), a.multiply(&b.multiply(&cc).unwrap()).unwrap());
    }

    #[test]
    fn product_matches_dense((a, b) in pair_small()) {
        let prod = a.multiply(&b).unwrap().to_dense().unwrap();
        let want = a.to_dense().unwrap() * b.to_dense().unwrap();
        prop_assert_eq!(prod, want);
    }

    #[test]
    fn commutation_matches_dense((a, b) in pair_small()) {
        let comm = dense::commutator(&a.to_dense().unwrap(), &b.to_dense().unwrap());
        prop_assert_eq!(a.commutes(&b).unwrap(), dense::frobenius_norm(&comm) == 0.0);
    }

    #[test]
    fn half_commutator_inverts((a, b) in pair_small()) {
        if let Some(p) = a.half_commutator(&b).unwrap() {
            let dense_p = p.to_dense().unwrap();
            let (ad, bd) = (a.to_dense().unwrap(), b.to_dense().unwrap());
            prop_assert!(dense::frobenius_norm(&(dense::commutator(&ad, &bd) * c(0.5, 0.0) - &dense_p)) < 1e-14);
            // ½[½[a,b], b] = a·b² = a up to the square of b's phase.
            let back = p.half_commutator(&b).unwrap().expect("anticommutes with b");
            prop_assert_eq!(back.unsigned(), a.unsigned());
        } else {
            prop_assert!(a.commutes(&b).unwrap());
        }
    }

    #[test]
    fn majorana_dictionary_is_a_bijection(n in 1usize..=6, seed in any::<u128>()) {
        let bits = seed & ((1u128 << (2 * n)) - 1);
        let m = MajoranaMonomial::from_bits(n, bits).unwrap();
        let p = monomial_to_pauli(&m);
        let back = pauli_to_monomial(&p);
        prop_assert_eq!(back.monomial, m);
        prop_assert_eq!(back.phase, 0);
    }

    #[test]
    fn purities_sum_to_squared_norm(n in 1usize..=4, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let m = common::random_operator(n, &mut r);
        let spec = purity_spectrum(&m);
        prop_assert!((spec.total() - m.norm_sqr()).abs() <= 1e-10 * m.norm_sqr().max(1.0));
        let rebuilt = decompose(&m).reconstruct();
        prop_assert!((&rebuilt - &m).norm_sqr().sqrt() <= 1e-10 * m.norm_sqr().sqrt().max(1.0));
    }

    #[test]
    fn text_round_trip((a, _) in pair_small()) {
        let parsed: PauliTerm = a.to_string().parse().unwrap();
        prop_assert_eq!(parsed, a);
    }
}

#[test]
fn operator_json_round_trip() {
    let mut r = common::rng(5);
    let m: PauliSumOperator = common::random_hermitian(2, &mut r);
    let text = serde_json::to_string(&m.to_json()).unwrap();
    let back = PauliSumOperator::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert!((&back - &m).norm_sqr() < 1e-24);
}
