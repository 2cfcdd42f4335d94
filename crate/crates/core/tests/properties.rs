use nalgebra::{DMatrix, DVector, SymmetricEigen};
use pmset::gram::{coherent_overlap, gram_from_vectors, min_hermitian_eigenvalue};
use pmset::moment::build_structure;
use pmset::scenarios::{binary_entropy, keyrate};
use pmset::sdp::real_embedding;
use pmset::{Alphabet, OpId, Word, C64};
use proptest::prelude::*;

fn qrac_alphabet() -> Alphabet {
    Alphabet::uniform(2, 2, 2).unwrap()
}

fn no_click_alphabet() -> Alphabet {
    Alphabet::single_receiver_with_no_click(2, 2).unwrap()
}

fn raw_word(max_ops: OpId) -> impl Strategy<Value = Vec<OpId>> {
    prop::collection::vec(0..max_ops, 0..7)
}

fn complex() -> impl Strategy<Value = C64> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(re, im)| C64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn adjoint_is_an_involution(ops in raw_word(8)) {
        let a = qrac_alphabet();
        let w = a.reduce(ops);
        prop_assert_eq!(a.adjoint(&a.adjoint(&w)), w);
    }

    #[test]
    fn multiplication_is_associative(u in raw_word(8), v in raw_word(8), w in raw_word(8)) {
        for a in [qrac_alphabet(), no_click_alphabet()] {
            let n = a.num_ops() as OpId;
            let [u, v, w] = [&u, &v, &w].map(|x| a.reduce(x.iter().map(|o| o % n).collect()));
            prop_assert_eq!(a.multiply(&a.multiply(&u, &v), &w), a.multiply(&u, &a.multiply(&v, &w)));
        }
    }

    #[test]
    fn reduction_is_idempotent_and_never_lengthens(ops in raw_word(8)) {
        let a = qrac_alphabet();
        let w = a.reduce(ops.clone());
        if let Word::Ops(v) = &w {
            prop_assert!(v.len() <= ops.len());
            prop_assert_eq!(a.reduce(v.clone()), w.clone());
        }
    }

    #[test]
    fn cross_party_order_is_irrelevant(alice in raw_word(4), bob in raw_word(4)) {
        let a = qrac_alphabet();
        let bob: Vec<OpId> = bob.iter().map(|o| o + 4).collect();
        let ab: Vec<OpId> = alice.iter().chain(&bob).copied().collect();
        let ba: Vec<OpId> = bob.iter().chain(&alice).copied().collect();
        prop_assert_eq!(a.reduce(ab), a.reduce(ba));
    }

    #[test]
    fn aliased_no_click_is_one_operator(ops in raw_word(5)) {
        let a = no_click_alphabet();
        let none0 = a.op(0, 0, 2);
        let none1 = a.op(0, 1, 2);
        prop_assert_eq!(none0, none1);
        let w = a.reduce(ops);
        let with = a.multiply(&w, &Word::Ops(vec![none0]));
        prop_assert_eq!(a.multiply(&with, &Word::Ops(vec![none1])), with);
    }

    #[test]
    fn gram_of_vectors_is_hermitian_psd_with_unit_diagonal(
        raw in prop::collection::vec(prop::collection::vec(complex(), 3), 1..6)
    ) {
        let vectors: Vec<DVector<C64>> = raw
            .into_iter()
            .filter_map(|v| {
                let v = DVector::from_vec(v);
                let n = v.norm();
                (n > 1e-3).then(|| v / C64::new(n, 0.0))
            })
            .collect();
        prop_assume!(!vectors.is_empty());
        let g = gram_from_vectors(&vectors).unwrap();
        let m = g.matrix();
        prop_assert!((m - m.adjoint()).camax() < 1e-12);
        for i in 0..m.nrows() {
            prop_assert!((m[(i, i)] - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        prop_assert!(min_hermitian_eigenvalue(m) > -1e-10);
    }

    #[test]
    fn coherent_overlap_modulus(a in complex(), b in complex()) {
        let o = coherent_overlap(a, b);
        prop_assert!((o.norm() - (-(a - b).norm_sqr() / 2.0).exp()).abs() < 1e-12);
        prop_assert!((o - coherent_overlap(b, a).conj()).norm() < 1e-12);
    }

    #[test]
    fn real_embedding_doubles_the_spectrum(entries in prop::collection::vec(complex(), 36)) {
        let a = DMatrix::from_vec(6, 6, entries);
        let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let mut complex_eigs: Vec<f64> = h.clone().symmetric_eigenvalues().iter().flat_map(|&e| [e, e]).collect();
        let mut real_eigs: Vec<f64> = SymmetricEigen::new(real_embedding(&h)).eigenvalues.iter().copied().collect();
        complex_eigs.sort_by(f64::total_cmp);
        real_eigs.sort_by(f64::total_cmp);
        for (x, y) in complex_eigs.iter().zip(&real_eigs) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn keyrate_falls_with_either_error(p_det in 0.0f64..=1.0, e0 in 0.0f64..0.5, e1 in 0.0f64..0.5, d in 0.0f64..0.1) {
        let base = keyrate(p_det, e0, e1).unwrap().rate;
        prop_assert!(base >= 0.0);
        prop_assert!(keyrate(p_det, (e0 + d).min(0.5), e1).unwrap().rate <= base + 1e-15);
        prop_assert!(keyrate(p_det, e0, (e1 + d).min(0.5)).unwrap().rate <= base + 1e-15);
    }

    #[test]
    fn binary_entropy_is_symmetric_and_bounded(p in 0.0f64..=1.0) {
        let h = binary_entropy(p).unwrap();
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!((h - binary_entropy(1.0 - p).unwrap()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn class_table_partitions_every_entry(n in 1usize..4, level in 0usize..3, no_click in any::<bool>()) {
        let a = if no_click { no_click_alphabet() } else { qrac_alphabet() };
        let basis = a.generate_level(level).unwrap();
        let t = build_structure(&a, n, &basis);
        let dim = n * basis.len();
        let covered: usize = t.classes().iter().map(|c| c.entries.len()).sum();
        prop_assert_eq!(covered + t.num_zero_entries(), dim * dim);
        for (id, c) in t.classes().iter().enumerate() {
            for &(r, col) in &c.entries {
                prop_assert_eq!(t.class_at((r, col)), Some(id));
                // the Hermitian partner lies in the conjugate class
                prop_assert_eq!(t.class_at((col, r)), Some(c.conj));
            }
        }
    }

    #[test]
    fn lower_level_structure_embeds_in_the_next(n in 1usize..3, level in 0usize..2, no_click in any::<bool>()) {
        let a = if no_click { no_click_alphabet() } else { qrac_alphabet() };
        let low = a.generate_level(level).unwrap();
        let high = a.generate_level(level + 1).unwrap();
        prop_assert_eq!(&high.words[..low.len()], &low.words[..]);
        let (tl, th) = (build_structure(&a, n, &low), build_structure(&a, n, &high));
        let lift = |k: usize| { let (z, i) = tl.unflat(k); th.flat(z, i) };
        for c in tl.classes() {
            let (r0, c0) = c.rep();
            let id = th.class_at((lift(r0), lift(c0)));
            prop_assert!(id.is_some());
            for &(r, col) in &c.entries {
                prop_assert_eq!(th.class_at((lift(r), lift(col))), id);
            }
        }
    }
}
