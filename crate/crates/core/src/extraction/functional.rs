use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::sets::{contains, enumerate_members, free_direction, sample_members, simplify, sup_functional, SetExpr, Space};
use crate::vectors::{exact_sqrt, int, Coord, Functional, NormKind, Scalar, SparseVec};

/// A unit functional vanishing on `F` whose supremum over `D` exceeds `λ`.
///
/// The certificate `d` (or, without one, the set's own free directions and
/// members) drives the construction: a sign-matched coordinate functional on
/// the largest entry of `d` outside `supp(F)` when there is one, otherwise
/// the exact LP maximizing `⟨f, d⟩` over the dual ball on the joint support
/// subject to `f ⊥ F`.
pub fn orthogonal_functional(
    space: &Space,
    span: &[SparseVec],
    set: &SetExpr,
    lambda: &Scalar,
    certificate: Option<&SparseVec>,
) -> Result<Functional> {
    let candidates = match certificate {
        Some(d) => vec![d.clone()],
        None => default_certificates(space, span, set)?,
    };
    for d in candidates.iter().filter(|d| !d.is_zero()) {
        for f in [fresh_functional(span, d), solve_functional(space.norm, span, d)?].into_iter().flatten() {
            if accepts(space, set, &f, d, lambda)? {
                return Ok(f);
            }
        }
    }
    Err(Error::NoCertificate { lambda: lambda.clone() })
}

fn accepts(space: &Space, set: &SetExpr, f: &Functional, d: &SparseVec, lambda: &Scalar) -> Result<bool> {
    let sup = sup_functional(space, f, set)?;
    if sup.lower > *lambda {
        return Ok(true);
    }
    let value = f.pair(d);
    Ok(value > *lambda && contains(set, d)?)
}

fn default_certificates(space: &Space, span: &[SparseVec], set: &SetExpr) -> Result<Vec<SparseVec>> {
    let mut out = Vec::new();
    if let SetExpr::Box(b) = simplify(set)? {
        if b.default_radius.is_positive() {
            out.push(SparseVec::single(b.fresh_coordinate(span), b.default_radius.clone()));
        }
    }
    let zero = SparseVec::zero();
    if contains(set, &zero)? {
        if let Some(d) = free_direction(space, set, &[zero], &Scalar::zero())? {
            out.push(d);
        }
    }
    let mut members = match enumerate_members(set, space.enumeration_limit)? {
        Some(ms) => ms,
        None => sample_members(space, set)?,
    };
    members.sort_by(|a, b| b.norm(space.norm).cmp(&a.norm(space.norm)).then_with(|| a.cmp(b)));
    out.extend(members);
    Ok(out)
}

/// `±e_m*` on the largest entry of `d` outside the joint support of `F`;
/// ties go to the lowest coordinate.
fn fresh_functional(span: &[SparseVec], d: &SparseVec) -> Option<Functional> {
    let used: BTreeSet<Coord> = span.iter().flat_map(|v| v.support()).collect();
    let mut best: Option<(Coord, &Scalar)> = None;
    for (i, x) in d.entries() {
        if used.contains(&i) {
            continue;
        }
        if best.map_or(true, |(_, b)| x.abs() > b.abs()) {
            best = Some((i, x));
        }
    }
    best.map(|(i, x)| Functional::coordinate(i, if x.is_negative() { -1 } else { 1 }))
}

fn solve_functional(norm: NormKind, span: &[SparseVec], d: &SparseVec) -> Result<Option<Functional>> {
    if norm == NormKind::Euclid {
        return Ok(project(span, d));
    }
    let coords: Vec<Coord> = d
        .support()
        .chain(span.iter().flat_map(|v| v.support()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if coords.is_empty() {
        return Ok(None);
    }
    let mut lp = LinearProgram::new();
    // Under SUP the dual ball is ℓ1: f_i = p_i − q_i with Σ (p_i + q_i) ≤ 1.
    // Under SUM it is the ℓ∞ box.
    let vars: Vec<Vec<(usize, Scalar)>> = match norm {
        NormKind::Sup => {
            let mut all = Vec::new();
            let mut ball = Vec::new();
            for _ in &coords {
                let p = lp.add_var(false);
                let q = lp.add_var(false);
                ball.push((p, Scalar::one()));
                ball.push((q, Scalar::one()));
                all.push(vec![(p, Scalar::one()), (q, -Scalar::one())]);
            }
            lp.add_row(ball, Cmp::Le, Scalar::one());
            all
        }
        _ => coords
            .iter()
            .map(|_| {
                let v = lp.add_var(true);
                lp.add_row(vec![(v, Scalar::one())], Cmp::Le, Scalar::one());
                lp.add_row(vec![(v, Scalar::one())], Cmp::Ge, -Scalar::one());
                vec![(v, Scalar::one())]
            })
            .collect(),
    };
    let linear = |v: &SparseVec| -> Vec<(usize, Scalar)> {
        coords
            .iter()
            .zip(&vars)
            .flat_map(|(&i, parts)| {
                let c = v.get(i);
                parts.iter().map(move |(j, s)| (*j, s * &c))
            })
            .filter(|(_, c)| !c.is_zero())
            .collect()
    };
    for v in span {
        let row = linear(v);
        if !row.is_empty() {
            lp.add_row(row, Cmp::Eq, Scalar::zero());
        }
    }
    let LpOutcome::Optimal { value, point } = lp.maximize(&linear(d)) else {
        return Ok(None);
    };
    if !value.is_positive() {
        return Ok(None);
    }
    let coeffs = SparseVec::from_entries(
        coords
            .iter()
            .zip(&vars)
            .map(|(&i, parts)| (i, parts.iter().map(|(j, s)| s * &point[*j]).sum::<Scalar>())),
    );
    let f = Functional::new(coeffs);
    let n = f.dual_norm(norm);
    Ok(Some(f.scale(&n.recip())))
}

/// Component of `d` orthogonal to `span`, normalized when its length is
/// rational.
fn project(span: &[SparseVec], d: &SparseVec) -> Option<Functional> {
    let mut basis: Vec<SparseVec> = Vec::new();
    for v in span {
        let r = residual(&basis, v);
        if !r.is_zero() {
            basis.push(r);
        }
    }
    let p = residual(&basis, d);
    if p.is_zero() {
        return None;
    }
    let len = exact_sqrt(&p.dot(&p))?;
    Some(Functional::new(p.scale(&(int(1) / len))))
}

fn residual(basis: &[SparseVec], v: &SparseVec) -> SparseVec {
    basis.iter().fold(v.clone(), |acc, b| {
        let c = acc.dot(b) / b.dot(b);
        &acc - &b.scale(&c)
    })
}
