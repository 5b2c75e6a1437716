use std::collections::BTreeSet;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::sets::polyhedral;
use crate::sets::{contains, dedup_sorted, enumerate_members, sample_members, simplify, SetExpr, Space};
use crate::vectors::{Coord, Scalar, SparseVec};

/// A direction `d ≠ 0` with `x ± d ∈ A` for every witness `x`, or `None`.
///
/// Candidates come from the set's structure (fresh or slack coordinates for
/// boxes and polyhedra, unused terms for sign sums, differences for finite
/// sets, sampled members otherwise). Among candidates that pass the
/// membership replay the norm-largest wins; ties keep the earliest
/// candidate, i.e. the lowest coordinate or index, positive sign first.
/// `shrink` scales continuous candidates by `1 − shrink`.
pub fn free_direction(
    space: &Space,
    set: &SetExpr,
    witnesses: &[SparseVec],
    shrink: &Scalar,
) -> Result<Option<SparseVec>> {
    if shrink.is_negative() || *shrink >= Scalar::one() {
        return Err(Error::invalid("shrink must lie in [0, 1)"));
    }
    if witnesses.is_empty() {
        return Err(Error::invalid("free_direction needs at least one witness"));
    }
    for (index, w) in witnesses.iter().enumerate() {
        if !contains(set, w)? {
            return Err(Error::WitnessNotMember { index });
        }
    }
    let factor = Scalar::one() - shrink;
    let simplified = simplify(set)?;
    let mut cands = Vec::new();
    collect(space, &simplified, witnesses, &factor, &mut cands)?;
    let mut best: Option<(Scalar, SparseVec)> = None;
    for d in cands {
        if d.is_zero() {
            continue;
        }
        let n = d.norm(space.norm);
        if best.as_ref().is_some_and(|(b, old)| *b > n || (*b == n && !(leads_positive(&d) && !leads_positive(old)))) {
            continue;
        }
        if replays(set, witnesses, &d)? {
            best = Some((n, d));
        }
    }
    Ok(best.map(|(_, d)| d))
}

fn leads_positive(d: &SparseVec) -> bool {
    d.entries().next().is_some_and(|(_, x)| x.is_positive())
}

/// `x ± d ∈ A` for every witness; undecidable candidates count as failures.
pub(crate) fn replays(set: &SetExpr, witnesses: &[SparseVec], d: &SparseVec) -> Result<bool> {
    for w in witnesses {
        for probe in [w + d, w - d] {
            match contains(set, &probe) {
                Ok(true) => {}
                Ok(false) => return Ok(false),
                Err(e) if e.is_budget() => return Ok(false),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(true)
}

fn collect(
    space: &Space,
    set: &SetExpr,
    witnesses: &[SparseVec],
    factor: &Scalar,
    out: &mut Vec<SparseVec>,
) -> Result<()> {
    match set {
        SetExpr::Box(b) => {
            let mut coords: BTreeSet<Coord> = b.overrides.keys().copied().collect();
            coords.extend(witnesses.iter().flat_map(|w| w.support()));
            coords.insert(b.fresh_coordinate(witnesses));
            for i in coords {
                let r = b.radius(i);
                let slack = witnesses
                    .iter()
                    .map(|w| &r - w.get(i).abs())
                    .min()
                    .expect("non-empty witnesses");
                if slack.is_positive() {
                    out.push(SparseVec::single(i, slack * factor));
                }
            }
        }
        SetExpr::Symmetrized { base, witnesses: inner } => {
            if inner.is_empty() {
                return collect(space, base, witnesses, factor, out);
            }
            let mut combined = Vec::with_capacity(inner.len() * witnesses.len() * 2);
            for v in inner {
                for w in witnesses {
                    combined.push(v + w);
                    combined.push(v - w);
                }
            }
            collect(space, base, &dedup_sorted(combined), factor, out)?;
        }
        SetExpr::Translate { base, by } => {
            let shifted: Vec<SparseVec> = witnesses.iter().map(|w| w - by).collect();
            collect(space, base, &shifted, factor, out)?;
        }
        SetExpr::Negate { base } => {
            let flipped: Vec<SparseVec> = witnesses.iter().map(|w| -w).collect();
            collect(space, base, &flipped, factor, out)?;
        }
        SetExpr::SignSums { series, horizon, .. } => {
            out.extend(series.terms[..*horizon].iter().filter(|x| !x.is_zero()).cloned());
        }
        SetExpr::FinitePoints { points } => {
            let first = &witnesses[0];
            out.extend(dedup_sorted(points.iter().map(|p| p - first).collect()));
        }
        _ if polyhedral::is_polyhedral(set) => {
            let mut coords = set.universe();
            coords.extend(witnesses.iter().flat_map(|w| w.support()));
            let fresh = coords.iter().next_back().copied().unwrap_or(0) + 1;
            coords.insert(fresh);
            for i in coords {
                let dir = SparseVec::unit(i);
                if let Some(t) = polyhedral::lp_max_step(set, witnesses, &dir)? {
                    if t.is_positive() {
                        out.push(dir.scale(&(t * factor)));
                    }
                }
            }
        }
        _ => {
            let first = &witnesses[0];
            if let Some(members) = enumerate_members(set, space.enumeration_limit)? {
                out.extend(dedup_sorted(members.iter().map(|p| p - first).collect()));
            } else {
                let d = SetExpr::symmetrized(set.clone(), witnesses.to_vec());
                out.extend(sample_members(space, &d)?);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SeriesSpec;
    use crate::sets::SignMode;
    use crate::vectors::{int, NormKind};

    fn e(i: Coord) -> SparseVec {
        SparseVec::unit(i)
    }

    #[test]
    fn box_uses_the_first_fresh_coordinate() {
        let d = free_direction(&Space::sup(), &SetExpr::ball(int(1)), &[e(1), e(2)], &int(0)).unwrap();
        assert_eq!(d, Some(e(3)));
    }

    #[test]
    fn sign_sums_use_an_unused_index() {
        let series = SeriesSpec::new(NormKind::Sup, (1..=10).map(e).collect(), "canonical");
        let a = SetExpr::sign_sums(series, SignMode::Subsets);
        let ws = vec![&e(1) - &e(4), &(&e(2) + &e(3)) + &e(4)];
        let d = free_direction(&Space::sup(), &a, &ws, &int(0)).unwrap();
        assert_eq!(d, Some(e(5)));
    }

    #[test]
    fn singleton_has_no_direction() {
        let one = SetExpr::finite(vec![e(1)]);
        assert_eq!(free_direction(&Space::sup(), &one, &[e(1)], &int(0)).unwrap(), None);
    }

    #[test]
    fn ties_prefer_a_positive_leading_entry() {
        let a = SetExpr::finite(vec![SparseVec::zero(), e(1), -&e(1)]);
        let d = free_direction(&Space::sup(), &a, &[SparseVec::zero()], &int(0)).unwrap();
        assert_eq!(d, Some(e(1)));
    }

    #[test]
    fn replay_through_symmetrization() {
        let d = SetExpr::symmetrized(SetExpr::ball(int(1)), vec![e(1)]);
        let dir = free_direction(&Space::sup(), &d, &[SparseVec::zero()], &int(0))
            .unwrap()
            .unwrap();
        assert_eq!(dir, e(2));
        assert!(contains(&d, &dir).unwrap() && contains(&d, &-&dir).unwrap());
    }

    #[test]
    fn hull_direction_by_lp() {
        let hull = SetExpr::abs_conv_hull(vec![e(1), e(2)]);
        let d = free_direction(&Space::new(NormKind::Sum), &hull, &[SparseVec::zero()], &int(0))
            .unwrap()
            .unwrap();
        assert_eq!(d, e(1));
    }
}
