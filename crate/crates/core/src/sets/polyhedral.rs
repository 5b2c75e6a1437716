//! Linear-programming encodings of the polyhedral fragment of [`SetExpr`].
//!
//! Boxes, absolutely convex hulls, single points, and any translate, negation,
//! intersection or symmetrization of those are polyhedra. Restricted to the
//! finite universe of coordinates the expression mentions, membership becomes
//! a system of linear constraints; every coordinate outside the universe is an
//! independent interval `[−ρ, ρ]` with `ρ` given by [`outside_radius`].

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::sets::SetExpr;
use crate::vectors::{Coord, Functional, Scalar, SparseVec};

/// Affine expression `constant + Σ coeff·var` over LP variables.
#[derive(Debug, Clone, Default)]
struct Aff {
    terms: BTreeMap<usize, Scalar>,
    constant: Scalar,
}

impl Aff {
    fn var(j: usize) -> Aff {
        Aff {
            terms: [(j, Scalar::one())].into(),
            constant: Scalar::zero(),
        }
    }

    fn constant(c: Scalar) -> Aff {
        Aff {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    fn negated(&self) -> Aff {
        Aff {
            terms: self.terms.iter().map(|(j, c)| (*j, -c)).collect(),
            constant: -&self.constant,
        }
    }

    fn add_term(&mut self, j: usize, c: &Scalar) {
        let slot = self.terms.entry(j).or_insert_with(Scalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&j);
        }
    }

    /// Adds `self (cmp) rhs` to the program.
    fn constrain(&self, lp: &mut LinearProgram, cmp: Cmp, rhs: &Scalar) {
        let coeffs: Vec<(usize, Scalar)> = self.terms.iter().map(|(j, c)| (*j, c.clone())).collect();
        lp.add_row(coeffs, cmp, rhs - &self.constant);
    }
}

/// A point whose coordinates on the universe are affine in LP variables.
#[derive(Debug, Clone)]
struct AffPoint {
    coords: BTreeMap<Coord, Aff>,
}

impl AffPoint {
    fn shifted(&self, by: &SparseVec, sign: i64) -> AffPoint {
        let mut coords = self.coords.clone();
        for (i, x) in by.entries() {
            let a = coords.get_mut(&i).expect("universe covers every shift");
            a.constant += if sign >= 0 { x.clone() } else { -x };
        }
        AffPoint { coords }
    }

    fn negated(&self) -> AffPoint {
        AffPoint {
            coords: self.coords.iter().map(|(i, a)| (*i, a.negated())).collect(),
        }
    }

    /// `w + self` (sign = 1) or `w − self` (sign = −1).
    fn around(&self, w: &SparseVec, sign: i64) -> AffPoint {
        let base = if sign >= 0 { self.clone() } else { self.negated() };
        base.shifted(w, 1)
    }
}

/// True when the expression lies in the polyhedral fragment.
pub fn is_polyhedral(expr: &SetExpr) -> bool {
    match expr {
        SetExpr::Box(_) | SetExpr::AbsConvHull { .. } => true,
        SetExpr::FinitePoints { points } => points.len() == 1,
        SetExpr::SignSums { .. } => false,
        SetExpr::Translate { base, .. } | SetExpr::Negate { base } => is_polyhedral(base),
        SetExpr::Symmetrized { base, .. } => is_polyhedral(base),
        SetExpr::Intersect { sets } => sets.iter().all(is_polyhedral),
    }
}

/// Common radius of every coordinate outside the expression's universe.
pub fn outside_radius(expr: &SetExpr) -> Option<Scalar> {
    match expr {
        SetExpr::Box(b) => Some(b.default_radius.clone()),
        SetExpr::AbsConvHull { .. } => Some(Scalar::zero()),
        SetExpr::FinitePoints { points } if points.len() == 1 => Some(Scalar::zero()),
        SetExpr::FinitePoints { .. } | SetExpr::SignSums { .. } => None,
        SetExpr::Translate { base, .. } | SetExpr::Negate { base } => outside_radius(base),
        SetExpr::Symmetrized { base, .. } => outside_radius(base),
        SetExpr::Intersect { sets } => sets
            .iter()
            .map(outside_radius)
            .collect::<Option<Vec<_>>>()
            .and_then(|rs| rs.into_iter().min()),
    }
}

fn encode(expr: &SetExpr, p: &AffPoint, lp: &mut LinearProgram) {
    match expr {
        SetExpr::Box(b) => {
            for (i, a) in &p.coords {
                let r = b.radius(*i);
                a.constrain(lp, Cmp::Le, &r);
                a.constrain(lp, Cmp::Ge, &-r);
            }
        }
        SetExpr::AbsConvHull { points } => {
            let mut budget_row = Vec::with_capacity(points.len() * 2);
            let mut lambdas = Vec::with_capacity(points.len());
            for _ in points {
                let plus = lp.add_var(false);
                let minus = lp.add_var(false);
                budget_row.push((plus, Scalar::one()));
                budget_row.push((minus, Scalar::one()));
                lambdas.push((plus, minus));
            }
            lp.add_row(budget_row, Cmp::Le, Scalar::one());
            for (i, a) in &p.coords {
                let mut row = a.clone();
                for (q, (plus, minus)) in points.iter().zip(&lambdas) {
                    let c = q.get(*i);
                    if !c.is_zero() {
                        row.add_term(*plus, &-&c);
                        row.add_term(*minus, &c);
                    }
                }
                row.constrain(lp, Cmp::Eq, &Scalar::zero());
            }
        }
        SetExpr::FinitePoints { points } => {
            let q = &points[0];
            for (i, a) in &p.coords {
                a.constrain(lp, Cmp::Eq, &q.get(*i));
            }
        }
        SetExpr::SignSums { .. } => unreachable!("checked by is_polyhedral"),
        SetExpr::Translate { base, by } => encode(base, &p.shifted(by, -1), lp),
        SetExpr::Negate { base } => encode(base, &p.negated(), lp),
        SetExpr::Intersect { sets } => sets.iter().for_each(|s| encode(s, p, lp)),
        SetExpr::Symmetrized { base, witnesses } => {
            if witnesses.is_empty() {
                encode(base, p, lp);
            }
            for w in witnesses {
                encode(base, &p.around(w, 1), lp);
                encode(base, &p.around(w, -1), lp);
            }
        }
    }
}

/// Result of maximizing a functional over a polyhedral set.
#[derive(Debug, Clone, PartialEq)]
pub enum PolySup {
    /// Exact supremum, attained at the given member.
    Attained { value: Scalar, point: SparseVec },
    Empty,
    Unbounded,
}

fn check(expr: &SetExpr) -> Result<()> {
    if is_polyhedral(expr) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{} is outside the polyhedral fragment", expr.kind())))
    }
}

/// Exact `sup_{v∈expr} ⟨f, v⟩` by linear programming.
pub fn lp_sup(expr: &SetExpr, f: &Functional) -> Result<PolySup> {
    check(expr)?;
    let mut universe: BTreeSet<Coord> = expr.universe();
    universe.extend(f.support());
    let mut lp = LinearProgram::new();
    let coords: BTreeMap<Coord, Aff> = universe
        .iter()
        .map(|&i| (i, Aff::var(lp.add_var(true))))
        .collect();
    let vars: Vec<(Coord, usize)> = coords
        .iter()
        .map(|(i, a)| (*i, *a.terms.keys().next().expect("fresh variable")))
        .collect();
    let point = AffPoint { coords };
    encode(expr, &point, &mut lp);
    let objective: Vec<(usize, Scalar)> = vars
        .iter()
        .map(|(i, j)| (*j, f.coeffs().get(*i)))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    Ok(match lp.maximize(&objective) {
        LpOutcome::Infeasible => PolySup::Empty,
        LpOutcome::Unbounded => PolySup::Unbounded,
        LpOutcome::Optimal { value, point } => PolySup::Attained {
            value,
            point: SparseVec::from_entries(vars.iter().map(|(i, j)| (*i, point[*j].clone()))),
        },
    })
}

/// Exact membership test for polyhedral expressions.
pub fn lp_contains(expr: &SetExpr, v: &SparseVec) -> Result<bool> {
    check(expr)?;
    let mut universe = expr.universe();
    universe.extend(v.support());
    let mut lp = LinearProgram::new();
    let point = AffPoint {
        coords: universe.iter().map(|&i| (i, Aff::constant(v.get(i)))).collect(),
    };
    encode(expr, &point, &mut lp);
    if lp.num_rows() == 0 {
        return Ok(true);
    }
    Ok(lp.feasible_point().is_some())
}

/// Largest `t ≥ 0` with `w ± t·dir ∈ expr` for every `w` in `witnesses`.
/// Returns `None` when the slack is unbounded or some witness is not a member.
pub fn lp_max_step(expr: &SetExpr, witnesses: &[SparseVec], dir: &SparseVec) -> Result<Option<Scalar>> {
    check(expr)?;
    let mut universe = expr.universe();
    universe.extend(dir.support());
    for w in witnesses {
        universe.extend(w.support());
    }
    let mut lp = LinearProgram::new();
    let t = lp.add_var(false);
    for w in witnesses {
        for sign in [1i64, -1] {
            let coords = universe
                .iter()
                .map(|&i| {
                    let mut a = Aff::constant(w.get(i));
                    let d = dir.get(i);
                    if !d.is_zero() {
                        a.add_term(t, &(if sign > 0 { d } else { -d }));
                    }
                    (i, a)
                })
                .collect();
            encode(expr, &AffPoint { coords }, &mut lp);
        }
    }
    Ok(match lp.maximize(&[(t, Scalar::one())]) {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::{int, ratio};

    fn e(i: Coord) -> SparseVec {
        SparseVec::unit(i)
    }

    #[test]
    fn hull_membership() {
        let hull = SetExpr::abs_conv_hull(vec![&e(1) + &e(2), &e(1) - &e(2)]);
        assert!(lp_contains(&hull, &e(1)).unwrap());
        assert!(lp_contains(&hull, &SparseVec::single(2, ratio(1, 2))).unwrap());
        assert!(!lp_contains(&hull, &(&e(1) + &e(2)).scale(&int(2))).unwrap());
        assert!(!lp_contains(&hull, &e(3)).unwrap());
    }

    #[test]
    fn sup_over_symmetrized_l1_ball_at_vertex_is_zero() {
        let gens: Vec<SparseVec> = (1..=4).map(e).collect();
        let ball = SetExpr::abs_conv_hull(gens);
        let d = SetExpr::symmetrized(ball, vec![e(1)]);
        for i in 1..=4 {
            match lp_sup(&d, &Functional::coordinate(i, 1)).unwrap() {
                PolySup::Attained { value, .. } => assert_eq!(value, int(0)),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn max_step_in_a_box() {
        let b = SetExpr::boxed(int(1), [(1, int(2))].into());
        let step = lp_max_step(&b, &[e(1)], &e(1)).unwrap();
        assert_eq!(step, Some(int(1)));
        let fresh = lp_max_step(&b, &[e(1)], &e(4)).unwrap();
        assert_eq!(fresh, Some(int(1)));
    }
}
