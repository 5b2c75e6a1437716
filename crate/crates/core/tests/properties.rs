mod common;

use num_traits::Zero;
use proptest::prelude::*;

use symdex::extraction::{eps_extreme, eps_strong_extreme, extract_c0_sequence, one_sided_sequence, validate_transcript};
use symdex::indexes::{delta_upper, SearchStrategy};
use symdex::series::{brute_tail_sup, max_signed_norm, unconditional_tail_bound, SeriesSpec};
use symdex::sets::{contains, diameter, free_direction, symmetrize, SetExpr, SignMode, Space};
use symdex::vectors::{int, ratio, NormKind, Scalar, SparseVec};

use common::NORMS;

fn norm_kind() -> impl Strategy<Value = NormKind> {
    (0..3usize).prop_map(|k| NORMS[k])
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (-8i64..=8, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

fn vector(dim: u32) -> impl Strategy<Value = SparseVec> {
    proptest::collection::vec(scalar(), 1..=dim as usize)
        .prop_map(|xs| SparseVec::from_entries(xs.into_iter().enumerate().map(|(k, x)| (k as u32 + 1, x))))
}

fn finite_set() -> impl Strategy<Value = Vec<SparseVec>> {
    proptest::collection::vec(vector(3), 1..=6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_triangle_inequality(norm in norm_kind(), a in vector(4), b in vector(4)) {
        let sum = (&a + &b).norm(norm);
        let (na, nb) = (a.norm(norm), b.norm(norm));
        // EUCLID gauges are squared: check the expansion of ‖a+b‖² and
        // Cauchy–Schwarz, which together give the triangle inequality.
        if norm == NormKind::Euclid {
            let cross = a.dot(&b);
            prop_assert!(cross.clone() * cross.clone() <= na.clone() * nb.clone());
            prop_assert_eq!(sum, &na + &nb + int(2) * cross);
        } else {
            prop_assert!(sum <= na + nb);
        }
    }

    #[test]
    fn symmetrized_members_are_balanced(points in finite_set(), k in 0usize..6) {
        let set = SetExpr::finite(points.clone());
        let w = points[k % points.len()].clone();
        let d = symmetrize(&set, std::slice::from_ref(&w)).unwrap();
        prop_assert!(contains(&d, &SparseVec::zero()).unwrap());
        for p in &points {
            let v = p - &w;
            let expected = contains(&set, &(&w + &v)).unwrap() && contains(&set, &(&w - &v)).unwrap();
            prop_assert_eq!(contains(&d, &v).unwrap(), expected);
        }
    }

    #[test]
    fn free_direction_replays(norm in norm_kind(), points in finite_set(), k in 0usize..6) {
        let set = SetExpr::finite(points.clone());
        let w = points[k % points.len()].clone();
        if let Some(d) = free_direction(&Space::new(norm), &set, std::slice::from_ref(&w), &Scalar::zero()).unwrap() {
            prop_assert!(contains(&set, &(&w + &d)).unwrap());
            prop_assert!(contains(&set, &(&w - &d)).unwrap());
        }
    }

    #[test]
    fn strong_extreme_implies_extreme(norm in norm_kind(), points in finite_set(), k in 0usize..6, e in 1i64..=8) {
        let space = Space::new(norm);
        let set = SetExpr::finite(points.clone());
        let x = points[k % points.len()].clone();
        let eps = ratio(e, 4);
        let (strong, _) = eps_strong_extreme(&space, &set, &x, &eps).unwrap();
        if strong {
            prop_assert!(eps_extreme(&space, &set, &x, &eps).unwrap());
        }
    }

    #[test]
    fn one_sided_sums_stay_within_diameter(points in finite_set(), e in 1i64..=4) {
        let space = Space::sup();
        let set = SetExpr::finite(points);
        let eps = ratio(e, 2);
        if let Ok(run) = one_sided_sequence(&space, &set, &eps, 3) {
            let diam = diameter(&space, &set).unwrap();
            prop_assert!(diam.upper.is_some_and(|u| run.max_sign_sum_norm <= u));
        }
    }

    #[test]
    fn wuc_dominates_partial_sums(terms in proptest::collection::vec(vector(3), 1..=6)) {
        let (wuc, _) = max_signed_norm(&terms, NormKind::Sup, 1 << 20).unwrap();
        let mut partial = SparseVec::zero();
        for t in &terms {
            partial = &partial + t;
            prop_assert!(partial.norm(NormKind::Sup) <= wuc);
        }
    }

    #[test]
    fn delta_is_monotone(norm in norm_kind(), points in finite_set()) {
        let space = Space::new(norm);
        let set = SetExpr::finite(points);
        let mut previous: Option<Scalar> = None;
        for n in 0..=3 {
            let r = delta_upper(&space, &set, n, &SearchStrategy::exhaustive()).unwrap();
            let upper = r.bound.upper.expect("finite sets are bounded");
            if let Some(p) = &previous {
                prop_assert!(upper <= *p);
            }
            previous = Some(upper);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn extraction_transcripts_validate(r in 1i64..=3, e in 1i64..=4, n in 1usize..=3) {
        let space = Space::sup();
        let ball = SetExpr::ball(int(r));
        let t = extract_c0_sequence(&space, &ball, &ratio(e, 10), n, None).unwrap();
        prop_assert!(validate_transcript(&space, &t).unwrap().passed());
    }

    #[test]
    fn certified_tails_replay(h in 3u32..=7, k in 1i64..=4) {
        let terms = (1..=h).map(|n| SparseVec::single(n, ratio(1, 1 << n))).collect();
        let s = SeriesSpec::new(NormKind::Sum, terms, "geometric");
        let eps = ratio(1, 1 << k);
        let space = Space::new(NormKind::Sum);
        if let Ok(t) = unconditional_tail_bound(&space, &s, &eps, SignMode::Subsets, &SearchStrategy::exhaustive(), 1) {
            let to = (t.m + 12).min(h as usize);
            if t.m < to {
                prop_assert!(brute_tail_sup(&s, t.m + 1, to).unwrap() <= eps);
            }
        }
    }
}
