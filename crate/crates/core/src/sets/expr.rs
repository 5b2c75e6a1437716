use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::SeriesSpec;
use crate::vectors::{scalar_serde, Coord, Scalar, SparseVec};

/// Default node budget for sign-sum membership searches.
pub const DEFAULT_SIGN_BUDGET: u64 = 1 << 20;

fn default_budget() -> u64 {
    DEFAULT_SIGN_BUDGET
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SignMode {
    /// `Σ_{n≤m} θ_n x_n` for `1 ≤ m ≤ horizon`, all signs non-zero.
    Prefixes,
    /// `Σ_{n∈F} θ_n x_n` for `F ⊆ [1..horizon]`, including the empty sum.
    #[default]
    Subsets,
}

/// `{v : |v_i| ≤ r_i}` where `r_i` is the override at `i` or the default radius.
///
/// With a positive default radius this is `r·B_{c0}` (restricted to c00);
/// overrides model diagonal operator images `T(B_{c0})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoxSet {
    #[serde(with = "scalar_serde")]
    pub default_radius: Scalar,
    #[serde(with = "scalar_serde::map", default)]
    pub overrides: BTreeMap<Coord, Scalar>,
}

impl BoxSet {
    pub fn new(default_radius: Scalar, overrides: BTreeMap<Coord, Scalar>) -> Self {
        let mut b = BoxSet {
            default_radius,
            overrides,
        };
        b.canonicalize();
        b
    }

    pub fn ball(radius: Scalar) -> Self {
        BoxSet::new(radius, BTreeMap::new())
    }

    /// Drops overrides that coincide with the default radius.
    pub fn canonicalize(&mut self) {
        let d = self.default_radius.clone();
        self.overrides.retain(|_, r| *r != d);
    }

    pub fn radius(&self, i: Coord) -> Scalar {
        self.overrides
            .get(&i)
            .cloned()
            .unwrap_or_else(|| self.default_radius.clone())
    }

    pub fn max_radius(&self) -> Scalar {
        self.overrides
            .values()
            .chain(std::iter::once(&self.default_radius))
            .max()
            .cloned()
            .expect("at least the default radius")
    }

    /// Smallest radius over all coordinates; the reciprocal plays the role of
    /// `‖T^{-1}‖` for the diagonal operator the box represents.
    pub fn min_radius(&self) -> Scalar {
        self.overrides
            .values()
            .chain(std::iter::once(&self.default_radius))
            .min()
            .cloned()
            .expect("at least the default radius")
    }

    pub fn inverse_gain(&self) -> Option<Scalar> {
        let m = self.min_radius();
        if m.is_zero() {
            None
        } else {
            Some(m.recip())
        }
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        v.entries().all(|(i, x)| x.abs() <= self.radius(i))
    }

    /// First coordinate beyond every override and every given vector.
    pub fn fresh_coordinate<'a, I: IntoIterator<Item = &'a SparseVec>>(&self, vs: I) -> Coord {
        let over = self.overrides.keys().next_back().copied().unwrap_or(0);
        over.max(crate::vectors::max_support(vs)) + 1
    }
}

/// Closed algebra of bounded-set descriptions with decidable membership.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetExpr {
    Box(BoxSet),
    #[serde(rename = "finite")]
    FinitePoints { points: Vec<SparseVec> },
    SignSums {
        series: SeriesSpec,
        #[serde(default)]
        mode: SignMode,
        horizon: usize,
        #[serde(default = "default_budget")]
        budget: u64,
    },
    Translate { base: Box<SetExpr>, by: SparseVec },
    Negate { base: Box<SetExpr> },
    Intersect { sets: Vec<SetExpr> },
    /// `⋂_{x∈W} (base − x) ∩ (x − base)`; an empty witness list denotes `base`.
    Symmetrized {
        base: Box<SetExpr>,
        witnesses: Vec<SparseVec>,
    },
    AbsConvHull { points: Vec<SparseVec> },
}

impl SetExpr {
    pub fn ball(radius: Scalar) -> SetExpr {
        SetExpr::Box(BoxSet::ball(radius))
    }

    pub fn boxed(default_radius: Scalar, overrides: BTreeMap<Coord, Scalar>) -> SetExpr {
        SetExpr::Box(BoxSet::new(default_radius, overrides))
    }

    pub fn finite(points: Vec<SparseVec>) -> SetExpr {
        SetExpr::FinitePoints { points }
    }

    pub fn sign_sums(series: SeriesSpec, mode: SignMode) -> SetExpr {
        let horizon = series.horizon();
        SetExpr::SignSums {
            series,
            mode,
            horizon,
            budget: DEFAULT_SIGN_BUDGET,
        }
    }

    pub fn translate(base: SetExpr, by: SparseVec) -> SetExpr {
        SetExpr::Translate {
            base: Box::new(base),
            by,
        }
    }

    pub fn negate(base: SetExpr) -> SetExpr {
        SetExpr::Negate { base: Box::new(base) }
    }

    pub fn symmetrized(base: SetExpr, witnesses: Vec<SparseVec>) -> SetExpr {
        SetExpr::Symmetrized {
            base: Box::new(base),
            witnesses,
        }
    }

    pub fn abs_conv_hull(points: Vec<SparseVec>) -> SetExpr {
        SetExpr::AbsConvHull { points }
    }

    pub fn as_box(&self) -> Option<&BoxSet> {
        match self {
            SetExpr::Box(b) => Some(b),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SetExpr::Box(_) => "box",
            SetExpr::FinitePoints { .. } => "finite",
            SetExpr::SignSums { .. } => "sign_sums",
            SetExpr::Translate { .. } => "translate",
            SetExpr::Negate { .. } => "negate",
            SetExpr::Intersect { .. } => "intersect",
            SetExpr::Symmetrized { .. } => "symmetrized",
            SetExpr::AbsConvHull { .. } => "abs_conv_hull",
        }
    }

    /// Structural checks: non-negative radii, non-empty point lists, horizons
    /// within the series.
    pub fn validate(&self) -> Result<()> {
        match self {
            SetExpr::Box(b) => {
                if b.default_radius.is_negative() || b.overrides.values().any(Signed::is_negative) {
                    return Err(Error::invalid("box radii must be non-negative"));
                }
                if b.overrides.keys().any(|&k| k == 0) {
                    return Err(Error::invalid("coordinates are 1-based"));
                }
                Ok(())
            }
            SetExpr::FinitePoints { points } => {
                if points.is_empty() {
                    Err(Error::invalid("finite point set must be non-empty"))
                } else {
                    Ok(())
                }
            }
            SetExpr::SignSums { series, horizon, .. } => {
                if *horizon == 0 {
                    return Err(Error::invalid("sign-sum horizon must be positive"));
                }
                if *horizon > series.terms.len() {
                    return Err(Error::invalid(format!(
                        "horizon {horizon} exceeds the {} series terms",
                        series.terms.len()
                    )));
                }
                Ok(())
            }
            SetExpr::Translate { base, .. } | SetExpr::Negate { base } => base.validate(),
            SetExpr::Intersect { sets } => {
                if sets.is_empty() {
                    return Err(Error::invalid("intersection of an empty family"));
                }
                sets.iter().try_for_each(SetExpr::validate)
            }
            SetExpr::Symmetrized { base, .. } => base.validate(),
            SetExpr::AbsConvHull { points } => {
                if points.is_empty() {
                    Err(Error::invalid("absolutely convex hull needs generators"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Every coordinate the description mentions explicitly.
    pub fn universe(&self) -> BTreeSet<Coord> {
        let mut out = BTreeSet::new();
        self.collect_universe(&mut out);
        out
    }

    fn collect_universe(&self, out: &mut BTreeSet<Coord>) {
        match self {
            SetExpr::Box(b) => out.extend(b.overrides.keys().copied()),
            SetExpr::FinitePoints { points } | SetExpr::AbsConvHull { points } => {
                for p in points {
                    out.extend(p.support());
                }
            }
            SetExpr::SignSums { series, horizon, .. } => {
                for t in series.terms.iter().take(*horizon) {
                    out.extend(t.support());
                }
            }
            SetExpr::Translate { base, by } => {
                out.extend(by.support());
                base.collect_universe(out);
            }
            SetExpr::Negate { base } => base.collect_universe(out),
            SetExpr::Intersect { sets } => sets.iter().for_each(|s| s.collect_universe(out)),
            SetExpr::Symmetrized { base, witnesses } => {
                for w in witnesses {
                    out.extend(w.support());
                }
                base.collect_universe(out);
            }
        }
    }

    /// Largest mentioned coordinate; `max_universe + 1` is fresh for the set.
    pub fn max_universe(&self) -> Coord {
        self.universe().into_iter().next_back().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::{int, ratio, NormKind};

    #[test]
    fn box_json_schema() {
        let text = r#"{"type":"box","default_radius":"1","overrides":{"1":"2"}}"#;
        let set: SetExpr = serde_json::from_str(text).unwrap();
        assert_eq!(set, SetExpr::boxed(int(1), [(1, int(2))].into()));
        assert_eq!(serde_json::to_string(&set).unwrap(), text);
    }

    #[test]
    fn nested_json_schema() {
        let text = r#"{"type":"symmetrized","base":{"type":"finite","points":[{},{"1":"1"}]},"witnesses":[{"1":"1"}]}"#;
        let set: SetExpr = serde_json::from_str(text).unwrap();
        match &set {
            SetExpr::Symmetrized { base, witnesses } => {
                assert_eq!(base.kind(), "finite");
                assert_eq!(witnesses, &vec![SparseVec::unit(1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let sums = r#"{"type":"sign_sums","mode":"subsets","horizon":2,"series":{"norm":"sup","terms":[{"1":"1"},{"2":"1/2"}],"label":"demo"}}"#;
        let set: SetExpr = serde_json::from_str(sums).unwrap();
        match set {
            SetExpr::SignSums { series, horizon, budget, .. } => {
                assert_eq!(horizon, 2);
                assert_eq!(budget, DEFAULT_SIGN_BUDGET);
                assert_eq!(series.norm, NormKind::Sup);
                assert_eq!(series.terms[1], SparseVec::single(2, ratio(1, 2)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn box_canonical_form_and_radii() {
        let b = BoxSet::new(int(1), [(1, int(1)), (2, int(3))].into());
        assert_eq!(b.overrides.len(), 1);
        assert_eq!(b.radius(2), int(3));
        assert_eq!(b.radius(9), int(1));
        assert_eq!(b.max_radius(), int(3));
        assert_eq!(b.inverse_gain(), Some(int(1)));
        assert_eq!(b.fresh_coordinate([&SparseVec::unit(5)]), 6);
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(SetExpr::finite(vec![]).validate().is_err());
        assert!(SetExpr::ball(int(-1)).validate().is_err());
        assert!(SetExpr::Intersect { sets: vec![] }.validate().is_err());
    }
}
