use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::sets::polyhedral;
use crate::sets::{SetExpr, SignMode};
use crate::vectors::{Coord, Scalar, SparseVec};

/// Exact membership `v ∈ A`.
pub fn contains(set: &SetExpr, v: &SparseVec) -> Result<bool> {
    match set {
        SetExpr::Box(b) => Ok(b.contains(v)),
        SetExpr::FinitePoints { points } => Ok(points.iter().any(|p| p == v)),
        SetExpr::SignSums {
            series,
            mode,
            horizon,
            budget,
        } => sign_sum_contains(&series.terms[..*horizon], *mode, v, *budget),
        SetExpr::Translate { base, by } => contains(base, &(v - by)),
        SetExpr::Negate { base } => contains(base, &-v),
        SetExpr::Intersect { sets } => {
            for s in sets {
                if !contains(s, v)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        SetExpr::Symmetrized { base, witnesses } => {
            if witnesses.is_empty() {
                return contains(base, v);
            }
            for w in witnesses {
                if !contains(base, &(w + v))? || !contains(base, &(w - v))? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        SetExpr::AbsConvHull { points } => {
            let universe = set.universe();
            if v.support().any(|i| !universe.contains(&i)) {
                return Ok(false);
            }
            debug_assert!(points.iter().all(|p| p.support().all(|i| universe.contains(&i))));
            polyhedral::lp_contains(set, v)
        }
    }
}

/// Index-usage aware membership: the smallest `k` such that `v` is a signed
/// sum of `x_1..x_k` in the given mode, or `None` if it is not a member.
pub fn sign_sum_index(terms: &[SparseVec], mode: SignMode, v: &SparseVec, budget: u64) -> Result<Option<usize>> {
    if mode == SignMode::Subsets && v.is_zero() {
        return Ok(Some(0));
    }
    let start = if mode == SignMode::Prefixes { 1 } else { 0 };
    for k in start..=terms.len() {
        if sign_sum_contains(&terms[..k], mode, v, budget)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

pub(crate) fn sign_sum_contains(terms: &[SparseVec], mode: SignMode, v: &SparseVec, budget: u64) -> Result<bool> {
    let mut nodes = 0u64;
    match mode {
        SignMode::Subsets => {
            let search = SignSearch::new(terms, true);
            search.run(v, &mut nodes, budget)
        }
        SignMode::Prefixes => {
            for m in 1..=terms.len() {
                let search = SignSearch::new(&terms[..m], false);
                if search.run(v, &mut nodes, budget)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Depth-first search over sign choices with coordinatewise reachability pruning.
struct SignSearch<'a> {
    terms: &'a [SparseVec],
    allow_skip: bool,
    /// `reach[k][i] = Σ_{n≥k} |x_n(i)|`.
    reach: Vec<BTreeMap<Coord, Scalar>>,
}

impl<'a> SignSearch<'a> {
    fn new(terms: &'a [SparseVec], allow_skip: bool) -> Self {
        let mut reach = vec![BTreeMap::new(); terms.len() + 1];
        for k in (0..terms.len()).rev() {
            let mut level = reach[k + 1].clone();
            for (i, x) in terms[k].entries() {
                *level.entry(i).or_insert_with(Scalar::zero) += x.abs();
            }
            reach[k] = level;
        }
        SignSearch {
            terms,
            allow_skip,
            reach,
        }
    }

    fn feasible(&self, k: usize, residual: &SparseVec) -> bool {
        let level = &self.reach[k];
        residual
            .entries()
            .all(|(i, r)| level.get(&i).is_some_and(|cap| r.abs() <= *cap))
    }

    fn run(&self, target: &SparseVec, nodes: &mut u64, budget: u64) -> Result<bool> {
        if !self.feasible(0, target) {
            return Ok(false);
        }
        self.descend(0, target.clone(), nodes, budget)
    }

    fn descend(&self, k: usize, residual: SparseVec, nodes: &mut u64, budget: u64) -> Result<bool> {
        *nodes += 1;
        if *nodes > budget {
            return Err(Error::DepthExceeded { budget });
        }
        if k == self.terms.len() {
            return Ok(residual.is_zero());
        }
        let x = &self.terms[k];
        if x.is_zero() {
            return self.descend(k + 1, residual, nodes, budget);
        }
        let plus = &residual - x;
        if self.feasible(k + 1, &plus) && self.descend(k + 1, plus, nodes, budget)? {
            return Ok(true);
        }
        let minus = &residual + x;
        if self.feasible(k + 1, &minus) && self.descend(k + 1, minus, nodes, budget)? {
            return Ok(true);
        }
        if self.allow_skip && self.feasible(k + 1, &residual) {
            return self.descend(k + 1, residual, nodes, budget);
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SeriesSpec;
    use crate::vectors::{int, NormKind};

    fn e(i: Coord) -> SparseVec {
        SparseVec::unit(i)
    }

    fn canonical(h: u32) -> SeriesSpec {
        SeriesSpec::new(NormKind::Sup, (1..=h).map(e).collect(), "canonical")
    }

    #[test]
    fn box_membership() {
        assert!(contains(&SetExpr::ball(int(1)), &e(5)).unwrap());
        assert!(!contains(&SetExpr::ball(int(1)), &e(5).scale(&int(2))).unwrap());
    }

    #[test]
    fn symmetrized_box_excludes_doubled_witness() {
        let d = SetExpr::symmetrized(SetExpr::ball(int(1)), vec![e(1)]);
        // e_1 + e_1 leaves the ball.
        assert!(!contains(&d, &e(1)).unwrap());
        assert!(contains(&d, &e(2)).unwrap());
    }

    #[test]
    fn subset_sign_sums() {
        let a = SetExpr::sign_sums(canonical(3), SignMode::Subsets);
        assert!(contains(&a, &(&e(1) - &e(3))).unwrap());
        assert!(contains(&a, &SparseVec::zero()).unwrap());
        assert!(!contains(&a, &e(1).scale(&int(2))).unwrap());
        assert!(!contains(&a, &e(4)).unwrap());
    }

    #[test]
    fn prefix_sign_sums_need_contiguous_support() {
        let a = SetExpr::sign_sums(canonical(3), SignMode::Prefixes);
        assert!(contains(&a, &(&e(1) - &e(2))).unwrap());
        assert!(!contains(&a, &(&e(1) - &e(3))).unwrap());
        assert!(!contains(&a, &SparseVec::zero()).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        // Equal terms defeat the coordinate pruning.
        let terms: Vec<SparseVec> = (0..24).map(|_| e(1)).collect();
        let series = SeriesSpec::new(NormKind::Sup, terms, "flat");
        let set = SetExpr::SignSums {
            series,
            mode: SignMode::Subsets,
            horizon: 24,
            budget: 50,
        };
        let half = SparseVec::single(1, crate::vectors::ratio(1, 2));
        let err = contains(&set, &half).unwrap_err();
        assert!(matches!(err, Error::DepthExceeded { budget: 50 }));
    }

    #[test]
    fn minimal_index_usage() {
        let terms: Vec<SparseVec> = (1..=5).map(e).collect();
        let v = &e(1) + &e(3);
        assert_eq!(sign_sum_index(&terms, SignMode::Subsets, &v, 1 << 20).unwrap(), Some(3));
        assert_eq!(sign_sum_index(&terms, SignMode::Subsets, &SparseVec::zero(), 1 << 20).unwrap(), Some(0));
        assert_eq!(sign_sum_index(&terms, SignMode::Prefixes, &v, 1 << 20).unwrap(), None);
    }

    #[test]
    fn translate_negate_intersect() {
        let ball = SetExpr::ball(int(1));
        let shifted = SetExpr::translate(ball.clone(), e(1));
        assert!(contains(&shifted, &e(1).scale(&int(2))).unwrap());
        assert!(!contains(&shifted, &e(1).scale(&int(-2))).unwrap());
        let neg = SetExpr::negate(shifted.clone());
        assert!(contains(&neg, &e(1).scale(&int(-2))).unwrap());
        let both = SetExpr::Intersect { sets: vec![ball, shifted] };
        assert!(contains(&both, &e(1)).unwrap());
        assert!(!contains(&both, &e(1).scale(&int(2))).unwrap());
    }
}
