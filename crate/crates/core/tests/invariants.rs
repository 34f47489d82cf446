use fpp_core::search::{
    count_order_preserving_self_maps, fixed_point_free_automorphism, has_fpp, is_automorphic, retraction_exists,
};
use fpp_core::{canonical_form, is_isomorphic, Poset, SearchBudget};
use proptest::prelude::*;

/// Random poset on `n` points: pairs `(a, b)` with `a < b` drawn from a mask,
/// then shuffled so positions carry no order information.
fn arb_poset(max: usize) -> impl Strategy<Value = Poset> {
    (1..=max).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), 0u64..(1u64 << pairs), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
    })
    .prop_map(|(n, mask, perm)| {
        let mut rel = Vec::new();
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                if mask >> k & 1 == 1 {
                    rel.push((a, b));
                }
                k += 1;
            }
        }
        let labels = (0..n).map(|i| format!("e{i}")).collect();
        Poset::from_pairs(labels, &rel).unwrap().permuted(&perm)
    })
}

fn brute_width(p: &Poset) -> usize {
    (0u64..1 << p.len())
        .filter(|&s| p.is_antichain(s))
        .map(|s| s.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_fpf_automorphism(p: &Poset) -> bool {
    let n = p.len();
    permutations(n).into_iter().any(|f| {
        (0..n).all(|i| f[i] != i) && (0..n).all(|a| (0..n).all(|b| p.leq(a, b) == p.leq(f[a], f[b])))
    })
}

fn b() -> SearchBudget {
    SearchBudget::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dual_is_an_involution(p in arb_poset(8)) {
        let back = p.dual().dual();
        prop_assert_eq!(back.cover_labels(), p.cover_labels());
    }

    #[test]
    fn width_matches_largest_antichain(p in arb_poset(8)) {
        let w = p.width().unwrap();
        prop_assert_eq!(w.width, brute_width(&p));
        let mask = w.antichain.iter().fold(0u64, |acc, &i| acc | 1 << i);
        prop_assert!(p.is_antichain(mask));
    }

    #[test]
    fn fpp_agrees_with_unpruned_count(p in arb_poset(7)) {
        let count = count_order_preserving_self_maps(&p).unwrap();
        let verdict = has_fpp(&p, &b()).unwrap();
        prop_assert_eq!(verdict.has_fpp, count.fixed_point_free == 0);
        if let Some(w) = verdict.witness {
            prop_assert!(w.is_order_preserving() && w.is_fixed_point_free());
        }
    }

    #[test]
    fn fpp_is_self_dual(p in arb_poset(8)) {
        prop_assert_eq!(has_fpp(&p, &b()).unwrap().has_fpp, has_fpp(&p.dual(), &b()).unwrap().has_fpp);
    }

    #[test]
    fn dismantling_preserves_fpp(p in arb_poset(8)) {
        let core = p.dismantle().core;
        prop_assert!(core.irreducible_elements().is_empty());
        prop_assert_eq!(has_fpp(&p, &b()).unwrap().has_fpp, has_fpp(&core, &b()).unwrap().has_fpp);
    }

    #[test]
    fn retracts_inherit_fpp(p in arb_poset(7), seed in any::<u64>()) {
        let subset = (seed & p.all()).max(1);
        if let Some(r) = retraction_exists(&p, subset, &b()).unwrap() {
            prop_assert!(r.is_retraction_onto(subset));
            if has_fpp(&p, &b()).unwrap().has_fpp {
                prop_assert!(has_fpp(&p.induced_mask(subset), &b()).unwrap().has_fpp);
            }
        }
    }

    #[test]
    fn canonical_form_ignores_relabelling(
        p in arb_poset(8),
        perm in Just((0..8).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let perm: Vec<usize> = perm.into_iter().filter(|&i| i < p.len()).collect();
        let q = p.permuted(&perm);
        prop_assert_eq!(canonical_form(&p), canonical_form(&q));
        let iso = is_isomorphic(&p, &q).expect("relabelled copy");
        prop_assert!(iso.is_isomorphism());
    }

    #[test]
    fn automorphic_matches_permutation_scan(p in arb_poset(6)) {
        let expected = brute_fpf_automorphism(&p);
        prop_assert_eq!(is_automorphic(&p, &b()).unwrap(), expected);
        if let Some(f) = fixed_point_free_automorphism(&p, &b()).unwrap() {
            prop_assert!(f.is_automorphism() && f.is_fixed_point_free());
        }
    }
}

#[test]
fn distinct_forms_mean_non_isomorphic() {
    let ps = fpp_core::enumerate::all_posets(5).unwrap();
    for (i, p) in ps.iter().enumerate() {
        for q in &ps[i + 1..] {
            assert!(is_isomorphic(p, q).is_none());
        }
    }
}
