use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::series::max_signed_norm;
use crate::sets::{contains, coordinate_relaxation, dedup_sorted, SetExpr, SignMode, Space};
use crate::vectors::{int, linear_combination, ratio, Coord, Scalar, SparseVec};

/// Deterministic, seeded probe members of `set`: structural candidates plus
/// random ones, each kept only after an exact membership check. Candidates
/// whose membership search runs out of budget are skipped.
pub fn sample_members(space: &Space, set: &SetExpr) -> Result<Vec<SparseVec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(space.seed);
    let mut out = Vec::new();
    candidates(space, set, &mut rng, &mut out);
    let mut members = Vec::new();
    for c in dedup_sorted(out) {
        match contains(set, &c) {
            Ok(true) => members.push(c),
            Ok(false) => {}
            Err(e) if e.is_budget() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(members)
}

fn random_sign(rng: &mut ChaCha8Rng) -> Scalar {
    if rng.gen_bool(0.5) {
        int(1)
    } else {
        int(-1)
    }
}

fn box_like(radii: &[(Coord, Scalar)], space: &Space, rng: &mut ChaCha8Rng, out: &mut Vec<SparseVec>) {
    let corner = SparseVec::from_entries(radii.iter().cloned());
    out.push(-&corner);
    out.push(corner);
    for (i, r) in radii {
        out.push(SparseVec::single(*i, r.clone()));
        out.push(SparseVec::single(*i, -r));
    }
    let levels = [int(0), ratio(1, 2), int(1)];
    for _ in 0..space.samples {
        out.push(SparseVec::from_entries(radii.iter().map(|(i, r)| {
            let level = &levels[rng.gen_range(0..levels.len())];
            (*i, r * level * random_sign(rng))
        })));
    }
}

fn candidates(space: &Space, set: &SetExpr, rng: &mut ChaCha8Rng, out: &mut Vec<SparseVec>) {
    out.push(SparseVec::zero());
    match set {
        SetExpr::Box(b) => {
            let mut radii: Vec<(Coord, Scalar)> = b.overrides.iter().map(|(i, r)| (*i, r.clone())).collect();
            radii.push((b.fresh_coordinate([]), b.default_radius.clone()));
            box_like(&radii, space, rng, out);
        }
        SetExpr::FinitePoints { points } => out.extend(points.iter().cloned()),
        SetExpr::SignSums {
            series, mode, horizon, ..
        } => {
            let terms = &series.terms[..*horizon];
            let mut prefix = SparseVec::zero();
            for x in terms {
                prefix = &prefix + x;
                out.push(prefix.clone());
                out.push(-&prefix);
                if *mode == SignMode::Subsets {
                    out.push(x.clone());
                    out.push(-x);
                }
            }
            if let Ok((_, signs)) = max_signed_norm(terms, space.norm, space.sign_budget) {
                let coeffs: Vec<Scalar> = signs.iter().map(|s| int(*s)).collect();
                let s = linear_combination(coeffs.iter().zip(terms));
                out.push(-&s);
                out.push(s);
            }
            for _ in 0..space.samples {
                let (len, choices): (usize, &[i64]) = match mode {
                    SignMode::Subsets => (terms.len(), &[-1, 0, 1]),
                    SignMode::Prefixes => (rng.gen_range(1..=terms.len()), &[-1, 1]),
                };
                let coeffs: Vec<Scalar> = (0..len).map(|_| int(choices[rng.gen_range(0..choices.len())])).collect();
                out.push(linear_combination(coeffs.iter().zip(terms)));
            }
        }
        SetExpr::AbsConvHull { points } => {
            for p in points {
                out.push(p.clone());
                out.push(-p);
            }
            for _ in 0..space.samples {
                let a = &points[rng.gen_range(0..points.len())];
                let b = &points[rng.gen_range(0..points.len())];
                let half = ratio(1, 2);
                out.push(&a.scale(&(&half * random_sign(rng))) + &b.scale(&(&half * random_sign(rng))));
            }
        }
        SetExpr::Translate { base, by } => {
            let mut inner = Vec::new();
            candidates(space, base, rng, &mut inner);
            out.extend(inner.iter().map(|v| v + by));
        }
        SetExpr::Negate { base } => {
            let mut inner = Vec::new();
            candidates(space, base, rng, &mut inner);
            out.extend(inner.iter().map(|v| -v));
        }
        SetExpr::Intersect { sets } => {
            for s in sets {
                candidates(space, s, rng, out);
            }
        }
        SetExpr::Symmetrized { base, witnesses } => {
            let Some(first) = witnesses.first() else {
                candidates(space, base, rng, out);
                return;
            };
            let mut inner = Vec::new();
            candidates(space, base, rng, &mut inner);
            for b in &inner {
                out.push(b - first);
                out.push(first - b);
            }
            // The relaxation box: its axes and corners are often members.
            let relaxed = coordinate_relaxation(set);
            let mut radii: Vec<(Coord, Scalar)> = relaxed
                .overrides
                .iter()
                .filter(|(_, r)| num_traits::Signed::is_positive(*r))
                .map(|(i, r)| (*i, r.clone()))
                .collect();
            if num_traits::Signed::is_positive(&relaxed.default_radius) {
                let m = set.max_universe() + 1;
                radii.push((m, relaxed.default_radius.clone()));
            }
            box_like(&radii, space, rng, out);
            if let SetExpr::SignSums { series, horizon, .. } = base.as_ref() {
                let used: BTreeSet<Coord> = witnesses.iter().flat_map(|w| w.support()).collect();
                let free: Vec<SparseVec> = series.terms[..*horizon]
                    .iter()
                    .filter(|x| !x.is_zero() && x.support().all(|i| !used.contains(&i)))
                    .cloned()
                    .collect();
                let mut total = SparseVec::zero();
                for x in &free {
                    total = &total + x;
                    out.push(x.clone());
                    out.push(-x);
                }
                out.push(-&total);
                out.push(total);
                if let Ok((_, signs)) = max_signed_norm(&free, space.norm, space.sign_budget) {
                    let coeffs: Vec<Scalar> = signs.iter().map(|s| int(*s)).collect();
                    let s = linear_combination(coeffs.iter().zip(&free));
                    out.push(-&s);
                    out.push(s);
                }
            }
        }
    }
}
