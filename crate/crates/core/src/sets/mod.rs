//! Bounded-set expressions with decidable membership, exact symmetrization
//! and certified bounds on diameters and functional suprema.

mod bounds;
mod direction;
mod expr;
mod membership;
pub mod polyhedral;
mod sample;

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vectors::{NormKind, SparseVec};

pub use bounds::{
    coordinate_profile, coordinate_relaxation, diameter, sup_functional, BoundPair, Certificate,
};
pub use direction::free_direction;
pub use expr::{BoxSet, SetExpr, SignMode, DEFAULT_SIGN_BUDGET};
pub use membership::{contains, sign_sum_index};
pub use sample::sample_members;

/// Evaluation context: the ambient norm plus the deterministic knobs used by
/// interval bounds (probe seed and budgets).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Space {
    pub norm: NormKind,
    pub seed: u64,
    /// Random probes drawn per sampling call.
    pub samples: usize,
    /// Largest finite set that is enumerated outright.
    pub enumeration_limit: usize,
    /// Sign patterns allowed in convex-maximization enumerations.
    pub sign_budget: u64,
    /// Universe size up to which all sign functionals are solved as LPs.
    pub lp_sign_limit: usize,
}

impl Space {
    pub fn new(norm: NormKind) -> Self {
        Space {
            norm,
            seed: 0,
            samples: 32,
            enumeration_limit: 4096,
            sign_budget: 1 << 20,
            lp_sign_limit: 10,
        }
    }

    pub fn sup() -> Self {
        Space::new(NormKind::Sup)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn norm_of(&self, v: &SparseVec) -> crate::vectors::Scalar {
        v.norm(self.norm)
    }
}

fn dedup_sorted(mut vs: Vec<SparseVec>) -> Vec<SparseVec> {
    vs.sort();
    vs.dedup();
    vs
}

/// `⋂_{x∈W} (A − x) ∩ (x − A)`, flattened to closed form where possible.
///
/// Boxes become boxes with radii `min_x (r_i − |x_i|)`; nested
/// symmetrizations are flattened with the witness list `{v ± x}`.
pub fn symmetrize(set: &SetExpr, witnesses: &[SparseVec]) -> Result<SetExpr> {
    for (index, w) in witnesses.iter().enumerate() {
        if !contains(set, w)? {
            return Err(Error::WitnessNotMember { index });
        }
    }
    Ok(symmetrize_members(set, witnesses))
}

/// Symmetrization for witnesses already known to be members.
/// `A = −A` by construction (no membership tests).
fn centrally_symmetric(set: &SetExpr) -> bool {
    match set {
        SetExpr::Box(_) | SetExpr::AbsConvHull { .. } | SetExpr::SignSums { .. } => true,
        SetExpr::Negate { base } => centrally_symmetric(base),
        SetExpr::Intersect { sets } => sets.iter().all(centrally_symmetric),
        _ => false,
    }
}

fn symmetrize_members(set: &SetExpr, witnesses: &[SparseVec]) -> SetExpr {
    if witnesses.is_empty() || (witnesses.iter().all(SparseVec::is_zero) && centrally_symmetric(set)) {
        return set.clone();
    }
    match set {
        SetExpr::Box(b) => {
            let mut overrides = b.overrides.clone();
            let touched: BTreeSet<_> = witnesses.iter().flat_map(|w| w.support()).collect();
            for i in touched {
                let r = b.radius(i);
                let pinned = witnesses
                    .iter()
                    .map(|w| {
                        let slack = &r - num_traits::Signed::abs(&w.get(i));
                        if num_traits::Signed::is_negative(&slack) {
                            num_traits::Zero::zero()
                        } else {
                            slack
                        }
                    })
                    .min()
                    .expect("non-empty witness list");
                overrides.insert(i, pinned);
            }
            SetExpr::Box(BoxSet::new(b.default_radius.clone(), overrides))
        }
        SetExpr::Symmetrized { base, witnesses: inner } => {
            if inner.is_empty() {
                return symmetrize_members(base, witnesses);
            }
            let mut combined = Vec::with_capacity(inner.len() * witnesses.len() * 2);
            for v in inner {
                for w in witnesses {
                    combined.push(v + w);
                    combined.push(v - w);
                }
            }
            symmetrize_members(base, &dedup_sorted(combined))
        }
        _ => SetExpr::symmetrized(set.clone(), dedup_sorted(witnesses.to_vec())),
    }
}

/// Rewrites an expression into an equal one with closed forms substituted:
/// symmetrized boxes become boxes, nested symmetrizations are flattened and
/// intersections of boxes collapse.
pub fn simplify(set: &SetExpr) -> Result<SetExpr> {
    Ok(match set {
        SetExpr::Symmetrized { base, witnesses } => {
            let base = simplify(base)?;
            let mut members = true;
            for w in witnesses {
                if !contains(&base, w)? {
                    members = false;
                    break;
                }
            }
            if members {
                symmetrize_members(&base, witnesses)
            } else {
                SetExpr::symmetrized(base, witnesses.clone())
            }
        }
        SetExpr::Translate { base, by } => {
            let base = simplify(base)?;
            if by.is_zero() {
                base
            } else {
                SetExpr::translate(base, by.clone())
            }
        }
        SetExpr::Negate { base } => {
            let base = simplify(base)?;
            match base {
                // Boxes are symmetric.
                SetExpr::Box(_) | SetExpr::AbsConvHull { .. } => base,
                other => SetExpr::negate(other),
            }
        }
        SetExpr::Intersect { sets } => {
            let sets = sets.iter().map(simplify).collect::<Result<Vec<_>>>()?;
            if sets.len() == 1 {
                return Ok(sets.into_iter().next().expect("one set"));
            }
            if sets.iter().all(|s| s.as_box().is_some()) {
                let boxes: Vec<&BoxSet> = sets.iter().filter_map(SetExpr::as_box).collect();
                let default = boxes
                    .iter()
                    .map(|b| b.default_radius.clone())
                    .min()
                    .expect("non-empty");
                let keys: BTreeSet<_> = boxes.iter().flat_map(|b| b.overrides.keys().copied()).collect();
                let overrides = keys
                    .into_iter()
                    .map(|i| (i, boxes.iter().map(|b| b.radius(i)).min().expect("non-empty")))
                    .collect();
                SetExpr::Box(BoxSet::new(default, overrides))
            } else {
                SetExpr::Intersect { sets }
            }
        }
        other => other.clone(),
    })
}

/// Lists every member when the set is finite and small enough.
pub fn enumerate_members(set: &SetExpr, limit: usize) -> Result<Option<Vec<SparseVec>>> {
    Ok(match set {
        SetExpr::FinitePoints { points } => Some(dedup_sorted(points.clone())),
        SetExpr::Box(b) => {
            if b.default_radius == num_traits::Zero::zero()
                && b.overrides.values().all(num_traits::Zero::is_zero)
            {
                Some(vec![SparseVec::zero()])
            } else {
                None
            }
        }
        SetExpr::AbsConvHull { points } => {
            if points.iter().all(SparseVec::is_zero) {
                Some(vec![SparseVec::zero()])
            } else {
                None
            }
        }
        SetExpr::SignSums {
            series,
            mode,
            horizon,
            ..
        } => {
            let terms: Vec<&SparseVec> = series.terms[..*horizon].iter().collect();
            enumerate_sign_sums(&terms, *mode, limit)
        }
        SetExpr::Translate { base, by } => {
            enumerate_members(base, limit)?.map(|ms| dedup_sorted(ms.iter().map(|m| m + by).collect()))
        }
        SetExpr::Negate { base } => {
            enumerate_members(base, limit)?.map(|ms| dedup_sorted(ms.iter().map(|m| -m).collect()))
        }
        SetExpr::Intersect { sets } => {
            let mut found = None;
            for (k, s) in sets.iter().enumerate() {
                if let Some(ms) = enumerate_members(s, limit)? {
                    found = Some((k, ms));
                    break;
                }
            }
            match found {
                None => None,
                Some((k, ms)) => {
                    let mut kept = Vec::new();
                    'outer: for m in ms {
                        for (j, s) in sets.iter().enumerate() {
                            if j != k && !contains(s, &m)? {
                                continue 'outer;
                            }
                        }
                        kept.push(m);
                    }
                    Some(kept)
                }
            }
        }
        SetExpr::Symmetrized { base, witnesses } => {
            let Some(ms) = enumerate_members(base, limit)? else {
                return Ok(None);
            };
            let Some(first) = witnesses.first() else {
                return Ok(Some(ms));
            };
            let lookup: HashSet<&SparseVec> = ms.iter().collect();
            let mut kept = Vec::new();
            for p in &ms {
                let d = p - first;
                if witnesses
                    .iter()
                    .all(|w| lookup.contains(&(w + &d)) && lookup.contains(&(w - &d)))
                {
                    kept.push(d);
                }
            }
            Some(dedup_sorted(kept))
        }
    })
}

fn enumerate_sign_sums(terms: &[&SparseVec], mode: SignMode, limit: usize) -> Option<Vec<SparseVec>> {
    let active = terms.iter().filter(|t| !t.is_zero()).count() as u32;
    let estimate: f64 = match mode {
        SignMode::Subsets => 3f64.powi(active as i32),
        SignMode::Prefixes => 2f64.powi(active as i32 + 1),
    };
    if estimate > limit as f64 {
        return None;
    }
    let mut out = Vec::new();
    match mode {
        SignMode::Subsets => {
            let mut level = vec![SparseVec::zero()];
            for t in terms.iter().filter(|t| !t.is_zero()) {
                let mut next = Vec::with_capacity(level.len() * 3);
                for v in &level {
                    next.push(v + t);
                    next.push(v - t);
                    next.push(v.clone());
                }
                level = dedup_sorted(next);
            }
            out = level;
        }
        SignMode::Prefixes => {
            let mut level = vec![SparseVec::zero()];
            for t in terms {
                let mut next = Vec::with_capacity(level.len() * 2);
                for v in &level {
                    next.push(v + t);
                    next.push(v - t);
                }
                level = dedup_sorted(next);
                out.extend(level.iter().cloned());
            }
        }
    }
    Some(dedup_sorted(out))
}
