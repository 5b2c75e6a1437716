use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::signed_sum;
use crate::sets::{contains, enumerate_members, sample_members, simplify, BoxSet, SetExpr, SignMode, Space};
use crate::vectors::{scalar_serde, Coord, Scalar, SparseVec};

/// Sign patterns are enumerated outright up to this many steps.
pub const EXHAUSTIVE_STEPS: usize = 16;
/// Largest number of steps whose point set `A_N` is materialized.
pub const MAX_STEPS: usize = 20;
const SAMPLED_PATTERNS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneSided {
    pub x0: SparseVec,
    pub sequence: Vec<SparseVec>,
    /// Sign patterns whose sum was written as a difference of members.
    pub patterns_checked: u64,
    pub exhaustive: bool,
    /// Every checked pattern split into two members of the host set.
    pub differences_verified: bool,
    /// Largest `‖Σ θ_n x_n‖` over the checked patterns (gauge).
    #[serde(with = "scalar_serde")]
    pub max_sign_sum_norm: Scalar,
}

/// `x_1, x_2, …` with `‖x_n‖ ≥ ε` and `x + x_{n+1} ∈ A` for every `x` in
/// `A_n = {x_0 + Σ_{k∈S} x_k : S ⊆ [1..n]}`, so every sign sum is a
/// difference of two members of `A`.
pub fn one_sided_sequence(space: &Space, set: &SetExpr, epsilon: &Scalar, steps: usize) -> Result<OneSided> {
    if !epsilon.is_positive() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if steps == 0 {
        return Err(Error::invalid("steps must be positive"));
    }
    if steps > MAX_STEPS {
        return Err(Error::BudgetExceeded {
            what: format!("one-sided sequence of {steps} steps"),
            limit: MAX_STEPS as u64,
        });
    }
    let norm = space.norm;
    let floor = norm.gauge(epsilon);
    let simplified = simplify(set)?;
    let zero = SparseVec::zero();
    let x0 = if contains(set, &zero)? {
        zero
    } else {
        crate::indexes::default_pool(space, set)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::invalid("no starting point available"))?
    };
    let mut points = vec![x0.clone()];
    let mut sequence: Vec<SparseVec> = Vec::with_capacity(steps);
    for step in 1..=steps {
        let candidates = match &simplified {
            SetExpr::Box(b) => box_candidates(b, &points),
            SetExpr::SignSums {
                series, mode, horizon, ..
            } if *mode == SignMode::Subsets => series.terms[..*horizon]
                .iter()
                .filter(|x| !sequence.contains(x))
                .cloned()
                .collect(),
            other => difference_candidates(space, other, &points[0])?,
        };
        let mut found = None;
        for x in candidates {
            if x.norm(norm) < floor {
                continue;
            }
            if fits(set, &points, &x)? {
                found = Some(x);
                break;
            }
        }
        let x = found.ok_or(Error::Stalled { step })?;
        let shifted: Vec<SparseVec> = points.iter().map(|a| a + &x).collect();
        points.extend(shifted);
        sequence.push(x);
    }
    verify(space, set, x0, sequence)
}

fn fits(set: &SetExpr, points: &[SparseVec], x: &SparseVec) -> Result<bool> {
    for a in points {
        if !contains(set, &(a + x))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Single-coordinate steps `t·e_i` of maximal length keeping every current
/// point inside the box; positive steps first, then lower coordinates.
fn box_candidates(b: &BoxSet, points: &[SparseVec]) -> Vec<SparseVec> {
    let mut coords: BTreeSet<Coord> = b.overrides.keys().copied().collect();
    coords.extend(points.iter().flat_map(|p| p.support()));
    coords.insert(b.fresh_coordinate(points));
    let mut out: Vec<(Scalar, bool, Coord, SparseVec)> = Vec::new();
    for i in coords {
        let r = b.radius(i);
        let hi = points.iter().map(|p| p.get(i)).max().expect("non-empty");
        let lo = points.iter().map(|p| p.get(i)).min().expect("non-empty");
        let up = &r - hi;
        let down = -&r - lo;
        if up.is_positive() {
            out.push((up.clone(), false, i, SparseVec::single(i, up)));
        }
        if down.is_negative() {
            out.push((down.abs(), true, i, SparseVec::single(i, down)));
        }
    }
    out.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    out.into_iter().map(|(.., v)| v).collect()
}

fn leads_positive(v: &SparseVec) -> bool {
    v.entries().next().is_some_and(|(_, x)| x.is_positive())
}

/// Differences `p − a` for members `p`, positive leading entry first, then
/// lexicographic.
fn difference_candidates(space: &Space, set: &SetExpr, anchor: &SparseVec) -> Result<Vec<SparseVec>> {
    let members = match enumerate_members(set, space.enumeration_limit)? {
        Some(ms) => ms,
        None => sample_members(space, set)?,
    };
    let mut out: Vec<SparseVec> = members.iter().map(|p| p - anchor).filter(|d| !d.is_zero()).collect();
    out.sort_by(|a, b| leads_positive(b).cmp(&leads_positive(a)).then_with(|| a.cmp(b)));
    out.dedup();
    Ok(out)
}

fn verify(space: &Space, set: &SetExpr, x0: SparseVec, sequence: Vec<SparseVec>) -> Result<OneSided> {
    let n = sequence.len();
    let exhaustive = n <= EXHAUSTIVE_STEPS;
    let patterns: Vec<Vec<i64>> = if exhaustive {
        (0..1u64 << n)
            .map(|mask| (0..n).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect())
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(space.seed);
        (0..SAMPLED_PATTERNS)
            .map(|_| (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
            .collect()
    };
    let mut verified = true;
    let mut best = Scalar::zero();
    for signs in &patterns {
        let plus = sequence.iter().zip(signs).filter(|(_, s)| **s > 0).fold(x0.clone(), |acc, (x, _)| &acc + x);
        let minus = sequence.iter().zip(signs).filter(|(_, s)| **s < 0).fold(x0.clone(), |acc, (x, _)| &acc + x);
        let sum = signed_sum(&sequence, signs);
        if &plus - &minus != sum || !contains(set, &plus)? || !contains(set, &minus)? {
            verified = false;
        }
        best = best.max(sum.norm(space.norm));
    }
    Ok(OneSided {
        x0,
        sequence,
        patterns_checked: patterns.len() as u64,
        exhaustive,
        differences_verified: verified,
        max_sign_sum_norm: best,
    })
}
