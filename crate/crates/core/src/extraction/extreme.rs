use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::sets::{contains, diameter, simplify, symmetrize, SetExpr, Space};
use crate::vectors::{int, ratio, sqrt_enclosure, Coord, NormKind, Scalar, SparseVec};

/// Whether `diam((A − x) ∩ (x − A)) < 2ε`.
pub fn eps_extreme(space: &Space, set: &SetExpr, x: &SparseVec, epsilon: &Scalar) -> Result<bool> {
    if !epsilon.is_positive() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let d = symmetrize(set, std::slice::from_ref(x))?;
    let bound = diameter(space, &d)?;
    let threshold = space.norm.gauge(&(epsilon * int(2)));
    if bound.upper.as_ref().is_some_and(|u| *u < threshold) {
        Ok(true)
    } else if bound.lower >= threshold {
        Ok(false)
    } else {
        Err(Error::Inconclusive)
    }
}

/// Decides the segment-avoidance property of `x` in a finite set and returns
/// the optimal `δ`: the distance from `x` to the union over pairs
/// `a_1 ≠ a_2` of the middle portions `{u ∈ [a_1, a_2] : ‖u − a_1‖ ≥ ε,
/// ‖u − a_2‖ ≥ ε}`. Without any middle portion the answer is `(true, 1)`.
///
/// Under EUCLID the returned `δ` is a rational lower bound on `δ²`; the
/// boolean is decided exactly in every norm.
pub fn eps_strong_extreme(space: &Space, set: &SetExpr, x: &SparseVec, epsilon: &Scalar) -> Result<(bool, Scalar)> {
    if !epsilon.is_positive() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let SetExpr::FinitePoints { points } = simplify(set)? else {
        return Err(Error::invalid("eps_strong_extreme needs a finite point set"));
    };
    if !contains(set, x)? {
        return Err(Error::WitnessNotMember { index: 0 });
    }
    let points: Vec<SparseVec> = points.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let mut best: Option<Scalar> = None;
    for (i, a1) in points.iter().enumerate() {
        for a2 in &points[i + 1..] {
            let d = match space.norm {
                NormKind::Euclid => euclid_portion_distance(x, a1, a2, epsilon),
                norm => linear_portion_distance(norm, x, a1, a2, epsilon),
            };
            if let Some(d) = d {
                if d.is_zero() {
                    return Ok((false, Scalar::zero()));
                }
                best = Some(best.map_or(d.clone(), |b| b.min(d)));
            }
        }
    }
    Ok((true, best.unwrap_or_else(Scalar::one)))
}

/// `u(λ) = a_2 + λ(a_1 − a_2)`; the middle portion is `λ ∈ [ε/L, 1 − ε/L]`
/// with `L = ‖a_1 − a_2‖`. The distance `‖x − u(λ)‖` is convex and piecewise
/// linear, so its minimum sits at an endpoint, a zero of one coordinate, or
/// (under SUP) a crossing of two coordinates.
fn linear_portion_distance(norm: NormKind, x: &SparseVec, a1: &SparseVec, a2: &SparseVec, eps: &Scalar) -> Option<Scalar> {
    let v = a1 - a2;
    let c = x - a2;
    let len = v.norm(norm);
    let lo = eps / &len;
    let hi = Scalar::one() - &lo;
    if lo > hi {
        return None;
    }
    let coords: Vec<Coord> = c.support().chain(v.support()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut cands = vec![lo.clone(), hi.clone()];
    for (k, &i) in coords.iter().enumerate() {
        let (ci, vi) = (c.get(i), v.get(i));
        if !vi.is_zero() {
            cands.push(&ci / &vi);
        }
        if norm == NormKind::Sup {
            for &j in &coords[k + 1..] {
                let (cj, vj) = (c.get(j), v.get(j));
                for s in [int(1), int(-1)] {
                    let den = &vi - &vj * &s;
                    if !den.is_zero() {
                        cands.push((&ci - &cj * &s) / den);
                    }
                }
            }
        }
    }
    cands
        .into_iter()
        .filter(|l| *l >= lo && *l <= hi)
        .map(|l| (&c - &v.scale(&l)).norm(norm))
        .min()
}

fn euclid_portion_distance(x: &SparseVec, a1: &SparseVec, a2: &SparseVec, eps: &Scalar) -> Option<Scalar> {
    let v = a1 - a2;
    let c = x - a2;
    let vv = v.dot(&v);
    let e2 = eps * eps;
    if vv < &e2 * int(4) {
        return None;
    }
    let cv = c.dot(&v);
    let cc = c.dot(&c);
    let at = |l: &Scalar| &cc - &cv * l * int(2) + &vv * l * l;
    let star = &cv / &vv;
    let admissible =
        |l: &Scalar| !l.is_negative() && *l <= Scalar::one() && l * l * &vv >= e2 && (Scalar::one() - l).pow(2) * &vv >= e2;
    if admissible(&star) {
        return Some(at(&star));
    }
    let left = star < ratio(1, 2);
    // The true endpoint is irrational in general; evaluate at the enclosure
    // end nearest the vertex, which can only under-estimate.
    let mut precision = ratio(1, 1 << 20);
    for _ in 0..64 {
        let (l1, _) = sqrt_enclosure(&(&e2 / &vv), &precision);
        let value = if left {
            at(&l1.max(star.clone()))
        } else {
            at(&(Scalar::one() - l1).min(star.clone()))
        };
        if value.is_positive() {
            return Some(value);
        }
        precision /= int(1 << 16);
    }
    Some(Scalar::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: Coord) -> SparseVec {
        SparseVec::unit(i)
    }

    #[test]
    fn plain_examples() {
        let s = Space::sup();
        let tri = SetExpr::finite(vec![SparseVec::zero(), e(1), e(2)]);
        assert!(eps_extreme(&s, &tri, &e(1), &ratio(1, 1000)).unwrap());
        assert!(!eps_extreme(&s, &SetExpr::ball(int(1)), &SparseVec::zero(), &ratio(1, 2)).unwrap());
        let line = SetExpr::finite(vec![SparseVec::zero(), e(1), -&e(1)]);
        assert!(eps_extreme(&s, &line, &SparseVec::zero(), &int(2)).unwrap());
        assert!(!eps_extreme(&s, &line, &SparseVec::zero(), &int(1)).unwrap());
    }

    #[test]
    fn strong_examples() {
        let s = Space::sup();
        let two = SetExpr::finite(vec![-&e(1), e(1)]);
        assert_eq!(eps_strong_extreme(&s, &two, &e(1), &ratio(1, 2)).unwrap(), (true, ratio(1, 2)));
        let three = SetExpr::finite(vec![-&e(1), SparseVec::zero(), e(1)]);
        assert_eq!(eps_strong_extreme(&s, &three, &SparseVec::zero(), &ratio(1, 2)).unwrap(), (false, int(0)));
        let one = SetExpr::finite(vec![e(2)]);
        assert_eq!(eps_strong_extreme(&s, &one, &e(2), &int(1)).unwrap(), (true, int(1)));
    }

    #[test]
    fn strong_in_other_norms() {
        let two = SetExpr::finite(vec![-&e(1), e(1)]);
        let sum = eps_strong_extreme(&Space::new(NormKind::Sum), &two, &e(1), &ratio(1, 2)).unwrap();
        assert_eq!(sum, (true, ratio(1, 2)));
        let euclid = eps_strong_extreme(&Space::new(NormKind::Euclid), &two, &e(1), &ratio(1, 2)).unwrap();
        assert_eq!(euclid, (true, ratio(1, 4)));
        let diag = SetExpr::finite(vec![SparseVec::zero(), SparseVec::from_ints(&[(1, 1), (2, 1)])]);
        let (strong, delta) = eps_strong_extreme(&Space::new(NormKind::Euclid), &diag, &SparseVec::zero(), &ratio(1, 2)).unwrap();
        assert!(strong);
        // The nearest admissible point sits at length 1/2 from the origin.
        assert!(delta <= ratio(1, 4) && delta > ratio(1, 4) - ratio(1, 1000));
    }

    #[test]
    fn strong_requires_finite_sets() {
        let err = eps_strong_extreme(&Space::sup(), &SetExpr::ball(int(1)), &SparseVec::zero(), &int(1)).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}
