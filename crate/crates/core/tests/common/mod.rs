//! Fixtures shared by the integration targets: seeded random finite sets and
//! a brute-force δ_N enumerator that shares no code with the library's
//! set machinery (dense vectors, its own norms, plain subset loops).

#![allow(dead_code)]

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symdex::sets::SetExpr;
use symdex::vectors::{NormKind, SparseVec};

pub type Q = BigRational;

pub const NORMS: [NormKind; 3] = [NormKind::Sup, NormKind::Sum, NormKind::Euclid];

pub struct RandomSet {
    pub norm: NormKind,
    pub dim: usize,
    pub dense: Vec<Vec<Q>>,
    pub set: SetExpr,
}

impl RandomSet {
    pub fn points(&self) -> Vec<SparseVec> {
        match &self.set {
            SetExpr::FinitePoints { points } => points.clone(),
            _ => unreachable!("fixtures are finite"),
        }
    }
}

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `count` finite sets with 1..=8 distinct points in dimension 1..=4,
/// entries `k/2` with `|k| ≤ 6`; norms cycle SUP, SUM, EUCLID.
pub fn random_finite_sets(seed: u64, count: usize) -> Vec<RandomSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let dim = rng.gen_range(1..=4usize);
            let size = rng.gen_range(1..=8usize);
            let mut seen = HashSet::new();
            let mut dense = Vec::new();
            for _ in 0..size {
                let p: Vec<Q> = (0..dim).map(|_| q(rng.gen_range(-6..=6), 2)).collect();
                if seen.insert(p.clone()) {
                    dense.push(p);
                }
            }
            let points = dense
                .iter()
                .map(|p| SparseVec::from_entries(p.iter().enumerate().map(|(k, x)| (k as u32 + 1, x.clone()))))
                .collect();
            RandomSet {
                norm: NORMS[i % 3],
                dim,
                dense,
                set: SetExpr::finite(points),
            }
        })
        .collect()
}

/// Norm in the library's gauge convention (squared for EUCLID).
pub fn dense_gauge(norm: NormKind, v: &[Q]) -> Q {
    match norm {
        NormKind::Sup => v.iter().map(|x| x.abs()).fold(Q::zero(), |a, b| if b > a { b } else { a }),
        NormKind::Sum => v.iter().map(|x| x.abs()).fold(Q::zero(), |a, b| a + b),
        NormKind::Euclid => v.iter().map(|x| x * x).fold(Q::zero(), |a, b| a + b),
    }
}

fn sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Half the diameter, as a gauge.
fn half_diameter(norm: NormKind, pts: &[Vec<Q>]) -> Q {
    let mut best = Q::zero();
    for a in pts {
        for b in pts {
            let g = dense_gauge(norm, &sub(a, b));
            if g > best {
                best = g;
            }
        }
    }
    match norm {
        NormKind::Euclid => best / q(4, 1),
        _ => best / q(2, 1),
    }
}

fn symmetrized(points: &[Vec<Q>], witnesses: &[&Vec<Q>]) -> Vec<Vec<Q>> {
    let members: HashSet<&Vec<Q>> = points.iter().collect();
    let first = witnesses[0];
    points
        .iter()
        .map(|a| sub(a, first))
        .filter(|d| {
            witnesses
                .iter()
                .all(|w| members.contains(&add(w, d)) && members.contains(&sub(w, d)))
        })
        .collect()
}

/// `δ_N` of a finite set by enumerating every witness set of size `1..=N`.
pub fn brute_delta(norm: NormKind, points: &[Vec<Q>], n: usize) -> Q {
    if n == 0 {
        return half_diameter(norm, points);
    }
    let mut best: Option<Q> = None;
    let total = points.len();
    for mask in 1u32..(1 << total) {
        if mask.count_ones() as usize > n {
            continue;
        }
        let ws: Vec<&Vec<Q>> = (0..total).filter(|k| mask >> k & 1 == 1).map(|k| &points[k]).collect();
        let v = half_diameter(norm, &symmetrized(points, &ws));
        if best.as_ref().map_or(true, |b| v < *b) {
            best = Some(v);
        }
    }
    best.expect("non-empty set")
}
