//! Certified bounds on `δ_0`, `δ_N`, `δ_∞`, plus covering-radius and
//! separated-family bounds standing in for the Kuratowski measure.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{
    contains, diameter, enumerate_members, sample_members, simplify, BoundPair, Certificate, SetExpr, SignMode, Space,
};
use crate::vectors::{int, scalar_to_string, to_decimal, Coord, NormKind, Scalar, SparseVec};

/// Witness lists evaluated by an exhaustive search before giving up.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 16;

/// Scope string for certificates valid for every finite witness list.
pub const SCOPE_ALL: &str = "every witness list";

/// How witness lists are proposed to `delta_upper`. A missing pool means the
/// set's default pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchStrategy {
    Exhaustive {
        #[serde(default)]
        pool: Option<Vec<SparseVec>>,
    },
    Greedy {
        #[serde(default)]
        pool: Option<Vec<SparseVec>>,
        #[serde(default)]
        restarts: usize,
    },
    Beam {
        #[serde(default)]
        pool: Option<Vec<SparseVec>>,
        width: usize,
    },
}

impl SearchStrategy {
    pub fn exhaustive() -> Self {
        SearchStrategy::Exhaustive { pool: None }
    }

    pub fn greedy(restarts: usize) -> Self {
        SearchStrategy::Greedy { pool: None, restarts }
    }

    pub fn beam(width: usize) -> Self {
        SearchStrategy::Beam { pool: None, width }
    }

    pub fn pool(&self) -> Option<&Vec<SparseVec>> {
        match self {
            SearchStrategy::Exhaustive { pool } | SearchStrategy::Greedy { pool, .. } | SearchStrategy::Beam { pool, .. } => {
                pool.as_ref()
            }
        }
    }

    /// Same strategy over an explicit pool.
    pub fn with_pool(&self, pool: Vec<SparseVec>) -> Self {
        match self {
            SearchStrategy::Exhaustive { .. } => SearchStrategy::Exhaustive { pool: Some(pool) },
            SearchStrategy::Greedy { restarts, .. } => SearchStrategy::Greedy {
                pool: Some(pool),
                restarts: *restarts,
            },
            SearchStrategy::Beam { width, .. } => SearchStrategy::Beam {
                pool: Some(pool),
                width: *width,
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SearchStrategy::Exhaustive { .. } => "exhaustive",
            SearchStrategy::Greedy { .. } => "greedy",
            SearchStrategy::Beam { .. } => "beam",
        }
    }
}

/// A bound on `δ_N(A)` with the witness list realizing the upper end and the
/// certificate family behind the lower end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaResult {
    pub n: usize,
    pub bound: BoundPair,
    pub upper_witnesses: Vec<SparseVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_certificate: Option<Certificate>,
}

/// `δ_0(A) = diam(A)/2`.
pub fn delta0(space: &Space, set: &SetExpr) -> Result<BoundPair> {
    Ok(diameter(space, set)?.halved(space.norm))
}

/// Candidate witnesses when the caller does not supply a pool.
pub fn default_pool(space: &Space, set: &SetExpr) -> Result<Vec<SparseVec>> {
    let set = simplify(set)?;
    let pool = match &set {
        SetExpr::Box(b) => {
            let mut pool = vec![SparseVec::zero()];
            for (i, r) in &b.overrides {
                if r.is_positive() {
                    pool.push(SparseVec::single(*i, r.clone()));
                    pool.push(SparseVec::single(*i, -r));
                }
            }
            if b.default_radius.is_positive() {
                let m = b.fresh_coordinate([]);
                pool.push(SparseVec::single(m, b.default_radius.clone()));
                pool.push(SparseVec::single(m, -&b.default_radius));
            }
            pool
        }
        SetExpr::FinitePoints { points } => points.clone(),
        SetExpr::AbsConvHull { points } => {
            let mut pool = vec![SparseVec::zero()];
            for p in points {
                pool.push(p.clone());
                pool.push(-p);
            }
            pool
        }
        SetExpr::SignSums {
            series, mode, horizon, ..
        } => {
            let mut pool = Vec::new();
            if *mode == SignMode::Subsets {
                pool.push(SparseVec::zero());
            }
            let mut prefix = SparseVec::zero();
            for x in &series.terms[..*horizon] {
                prefix = &prefix + x;
                pool.push(prefix.clone());
            }
            pool
        }
        other => sample_members(space, other)?,
    };
    Ok(dedup_keep_order(pool))
}

fn dedup_keep_order(vs: Vec<SparseVec>) -> Vec<SparseVec> {
    let mut seen = std::collections::HashSet::new();
    vs.into_iter().filter(|v| seen.insert(v.clone())).collect()
}

/// `Option<Scalar>` with `None` as `+∞`.
fn cmp_upper(a: &Option<Scalar>, b: &Option<Scalar>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.cmp(y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

struct Scored {
    upper: Option<Scalar>,
    picks: Vec<usize>,
    bound: BoundPair,
}

fn evaluate(space: &Space, set: &SetExpr, pool: &[SparseVec], picks: Vec<usize>) -> Result<Scored> {
    let witnesses: Vec<SparseVec> = picks.iter().map(|&k| pool[k].clone()).collect();
    let d = SetExpr::symmetrized(set.clone(), witnesses);
    let bound = delta0(space, &d)?;
    Ok(Scored {
        upper: bound.upper.clone(),
        picks,
        bound,
    })
}

/// Deterministic minimum: smallest upper, then the shorter and earlier pick list.
fn better(a: &Scored, b: &Scored) -> bool {
    match cmp_upper(&a.upper, &b.upper) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => (a.picks.len(), &a.picks) < (b.picks.len(), &b.picks),
    }
}

fn best_of(scored: Vec<Scored>) -> Option<Scored> {
    scored.into_iter().fold(None, |acc, s| match acc {
        Some(a) if !better(&s, &a) => Some(a),
        _ => Some(s),
    })
}

fn evaluate_all(space: &Space, set: &SetExpr, pool: &[SparseVec], lists: Vec<Vec<usize>>) -> Result<Option<Scored>> {
    let scored = lists
        .into_par_iter()
        .map(|picks| evaluate(space, set, pool, picks))
        .collect::<Result<Vec<_>>>()?;
    Ok(best_of(scored))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1f64, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Best `δ_0(Symmetrized(A, W))` over witness sets `W` of size `1..=N` drawn
/// from the strategy's pool. Always an upper bound on `δ_N(A)`; exhaustive
/// search over every point of a finite set is exact.
pub fn delta_upper(space: &Space, set: &SetExpr, n: usize, strategy: &SearchStrategy) -> Result<DeltaResult> {
    if n == 0 {
        let bound = delta0(space, set)?;
        return Ok(DeltaResult {
            n,
            bound,
            upper_witnesses: Vec::new(),
            lower_certificate: None,
        });
    }
    let pool = match strategy.pool() {
        Some(p) => {
            for (index, w) in p.iter().enumerate() {
                if !contains(set, w)? {
                    return Err(Error::WitnessNotMember { index });
                }
            }
            dedup_keep_order(p.clone())
        }
        None => default_pool(space, set)?,
    };
    if pool.is_empty() {
        return Err(Error::invalid("witness pool is empty"));
    }
    let max_k = n.min(pool.len());
    let best = match strategy {
        SearchStrategy::Exhaustive { .. } => {
            let total: f64 = (1..=max_k).map(|k| binomial(pool.len(), k)).sum();
            if total > EXHAUSTIVE_LIMIT as f64 {
                return Err(Error::BudgetExceeded {
                    what: format!("{total} witness lists"),
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let lists: Vec<Vec<usize>> = (1..=max_k).flat_map(|k| combinations(pool.len(), k)).collect();
            evaluate_all(space, set, &pool, lists)?
        }
        SearchStrategy::Greedy { restarts, .. } => {
            let mut results = Vec::new();
            for start in std::iter::once(None).chain((0..(*restarts).min(pool.len())).map(Some)) {
                results.extend(greedy_run(space, set, &pool, max_k, start)?);
            }
            best_of(results)
        }
        SearchStrategy::Beam { width, .. } => beam_run(space, set, &pool, max_k, (*width).max(1))?,
    }
    .expect("at least one witness list");
    let upper_witnesses: Vec<SparseVec> = best.picks.iter().map(|&k| pool[k].clone()).collect();
    let exact = matches!(strategy, SearchStrategy::Exhaustive { .. }) && covers_finite_set(set, &pool)?;
    let mut bound = best.bound;
    bound.upper_witness = Some(Certificate::Witnesses {
        points: upper_witnesses.clone(),
    });
    if exact && bound.is_exact() {
        bound.lower_witness = Some(Certificate::Enumeration {
            members: pool.len(),
        });
    } else {
        bound.lower = Scalar::zero();
        bound.lower_witness = Some(Certificate::Trivial);
    }
    Ok(DeltaResult {
        n,
        bound,
        upper_witnesses,
        lower_certificate: None,
    })
}

/// A pool covers the set only if the set has at most `pool.len()` members, so
/// enumeration stops at that size. Giving up early only costs exactness.
fn covers_finite_set(set: &SetExpr, pool: &[SparseVec]) -> Result<bool> {
    let Some(members) = enumerate_members(&simplify(set)?, pool.len())? else {
        return Ok(false);
    };
    let pool: std::collections::HashSet<&SparseVec> = pool.iter().collect();
    Ok(members.iter().all(|m| pool.contains(m)))
}

fn greedy_run(
    space: &Space,
    set: &SetExpr,
    pool: &[SparseVec],
    max_k: usize,
    start: Option<usize>,
) -> Result<Vec<Scored>> {
    let mut picks: Vec<usize> = start.into_iter().collect();
    let mut out = Vec::new();
    if !picks.is_empty() {
        out.push(evaluate(space, set, pool, picks.clone())?);
    }
    while picks.len() < max_k {
        let lists: Vec<Vec<usize>> = (0..pool.len())
            .filter(|k| !picks.contains(k))
            .map(|k| {
                let mut l = picks.clone();
                l.push(k);
                l.sort_unstable();
                l
            })
            .collect();
        let Some(step) = evaluate_all(space, set, pool, lists)? else {
            break;
        };
        picks = step.picks.clone();
        out.push(step);
    }
    Ok(out)
}

fn beam_run(space: &Space, set: &SetExpr, pool: &[SparseVec], max_k: usize, width: usize) -> Result<Option<Scored>> {
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    let mut best: Option<Scored> = None;
    for _ in 0..max_k {
        let mut lists: Vec<Vec<usize>> = frontier
            .iter()
            .flat_map(|base| {
                (0..pool.len()).filter(move |k| !base.contains(k)).map(move |k| {
                    let mut l = base.clone();
                    l.push(k);
                    l.sort_unstable();
                    l
                })
            })
            .collect();
        lists.sort();
        lists.dedup();
        if lists.is_empty() {
            break;
        }
        let mut scored = lists
            .into_par_iter()
            .map(|picks| evaluate(space, set, pool, picks))
            .collect::<Result<Vec<_>>>()?;
        scored.sort_by(|a, b| {
            cmp_upper(&a.upper, &b.upper)
                .then_with(|| a.picks.len().cmp(&b.picks.len()))
                .then_with(|| a.picks.cmp(&b.picks))
        });
        scored.truncate(width);
        frontier = scored.iter().map(|s| s.picks.clone()).collect();
        best = best_of(best.into_iter().chain(scored).collect());
    }
    Ok(best)
}

/// A `c` with `δ_N(A) ≥ c` from a free-direction family, or `0` with a tag
/// saying why no better bound is certified.
pub fn delta_lower(space: &Space, set: &SetExpr, n: usize) -> Result<DeltaResult> {
    let norm = space.norm;
    let simplified = simplify(set)?;
    let (lower, cert) = match &simplified {
        SetExpr::Box(b) => (
            norm.gauge(&b.default_radius),
            Certificate::FreshCoordinate {
                radius: b.default_radius.clone(),
                scope: SCOPE_ALL.into(),
            },
        ),
        SetExpr::SignSums {
            series,
            mode: SignMode::Subsets,
            horizon,
            ..
        } => {
            let terms = &series.terms[..*horizon];
            let min_norm = terms.iter().map(|x| x.norm(norm)).min().unwrap_or_default();
            (
                min_norm.clone(),
                Certificate::FreshSeriesIndex {
                    min_norm,
                    scope: format!("witness lists of size ≤ {n} whose sign-sum representations leave an index ≤ {horizon} unused"),
                },
            )
        }
        SetExpr::FinitePoints { .. } => (
            Scalar::zero(),
            Certificate::ClosedForm {
                rule: "finite sets have δ_1 = 0 (pin a vertex)".into(),
            },
        ),
        _ => (Scalar::zero(), Certificate::Trivial),
    };
    Ok(DeltaResult {
        n,
        bound: BoundPair::new(lower, None, norm.is_squared()).with_lower(cert.clone()),
        upper_witnesses: Vec::new(),
        lower_certificate: Some(cert),
    })
}

/// `δ_0 .. δ_{N_max}`; upper ends never increase because a list of size
/// `N − 1` is also admissible at `N`.
pub fn delta_curve(space: &Space, set: &SetExpr, n_max: usize, strategy: &SearchStrategy) -> Result<Vec<DeltaResult>> {
    let mut out: Vec<DeltaResult> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut up = delta_upper(space, set, n, strategy)?;
        if let Some(prev) = out.last() {
            if cmp_upper(&prev.bound.upper, &up.bound.upper) == Ordering::Less {
                up.bound.upper = prev.bound.upper.clone();
                up.bound.upper_witness = prev.bound.upper_witness.clone();
                up.upper_witnesses = prev.upper_witnesses.clone();
                if up.bound.lower_witness != Some(Certificate::Trivial) {
                    up.bound.lower = Scalar::zero();
                    up.bound.lower_witness = Some(Certificate::Trivial);
                }
            }
        }
        if n > 0 {
            let low = delta_lower(space, set, n)?;
            if low.bound.lower > up.bound.lower {
                up.bound.lower = low.bound.lower;
                up.bound.lower_witness = low.bound.lower_witness;
            }
            up.lower_certificate = low.lower_certificate;
        }
        if let Some(u) = &up.bound.upper {
            if up.bound.lower > *u {
                return Err(Error::InvariantViolation(format!(
                    "δ_{n}: certified lower {} exceeds upper {}",
                    up.bound.lower, u
                )));
            }
        }
        out.push(up);
    }
    Ok(out)
}

/// `[lower, upper]` for `δ_∞ = inf_N δ_N`. The lower end is kept only when
/// the certificate does not depend on the witness count.
pub fn delta_infinity_bounds(space: &Space, set: &SetExpr, n_max: usize, strategy: &SearchStrategy) -> Result<BoundPair> {
    let n = n_max.max(1);
    let up = delta_upper(space, set, n, strategy)?;
    let low = delta_lower(space, set, n)?;
    let uniform = matches!(
        &low.lower_certificate,
        Some(Certificate::FreshCoordinate { scope, .. }) if scope == SCOPE_ALL
    );
    let (lower, cert) = if uniform {
        (low.bound.lower, low.lower_certificate.expect("checked above"))
    } else {
        (Scalar::zero(), Certificate::Trivial)
    };
    let mut bound = BoundPair::new(lower, up.bound.upper, space.norm.is_squared()).with_lower(cert);
    bound.upper_witness = Some(Certificate::Witnesses {
        points: up.upper_witnesses,
    });
    Ok(bound)
}

fn covering_radius(norm: NormKind, points: &[SparseVec], centers: &[usize]) -> Scalar {
    points
        .iter()
        .map(|p| {
            centers
                .iter()
                .map(|&c| (p - &points[c]).norm(norm))
                .min()
                .expect("at least one center")
        })
        .max()
        .unwrap_or_default()
}

/// Smallest `r` such that `k` balls of radius `r` centred at input points
/// cover them: exact by enumeration (within `limit` center sets), otherwise
/// the farthest-point interval `[r/2, r]`.
pub fn kcenter_radius(norm: NormKind, points: &[SparseVec], k: usize, exact: bool, limit: u64) -> Result<BoundPair> {
    if points.is_empty() || k == 0 {
        return Err(Error::invalid("k-center needs points and k ≥ 1"));
    }
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if k >= pts.len() {
        return Ok(BoundPair::exact(Scalar::zero(), norm.is_squared()).with_upper(Certificate::Witnesses { points: pts }));
    }
    if exact {
        let count = binomial(pts.len(), k);
        if count > limit as f64 {
            return Err(Error::BudgetExceeded {
                what: format!("{count} center sets"),
                limit,
            });
        }
        let best = combinations(pts.len(), k)
            .into_par_iter()
            .map(|c| (covering_radius(norm, &pts, &c), c))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(None::<(Scalar, Vec<usize>)>, |acc, cur| match acc {
                Some(a) if a.0 <= cur.0 => Some(a),
                _ => Some(cur),
            })
            .expect("at least one center set");
        let centers = best.1.iter().map(|&i| pts[i].clone()).collect();
        return Ok(BoundPair::exact(best.0, norm.is_squared())
            .with_upper(Certificate::Witnesses { points: centers })
            .with_lower(Certificate::Enumeration {
                members: count as usize,
            }));
    }
    let centers = farthest_points(norm, &pts, k);
    let r = covering_radius(norm, &pts, &centers);
    Ok(BoundPair::new(norm.halve(&r), Some(r), norm.is_squared())
        .with_upper(Certificate::Witnesses {
            points: centers.iter().map(|&i| pts[i].clone()).collect(),
        })
        .with_lower(Certificate::ClosedForm {
            rule: "farthest-point traversal is a 2-approximation".into(),
        }))
}

/// Gonzalez traversal from the first point; ties pick the earliest index.
fn farthest_points(norm: NormKind, pts: &[SparseVec], k: usize) -> Vec<usize> {
    let mut centers = vec![0usize];
    let mut dist: Vec<Scalar> = pts.iter().map(|p| (p - &pts[0]).norm(norm)).collect();
    while centers.len() < k.min(pts.len()) {
        let (next, _) = dist
            .iter()
            .enumerate()
            .fold((0usize, Scalar::zero() - int(1)), |(bi, bd), (i, d)| {
                if *d > bd {
                    (i, d.clone())
                } else {
                    (bi, bd)
                }
            });
        centers.push(next);
        for (i, p) in pts.iter().enumerate() {
            let d = (p - &pts[next]).norm(norm);
            if d < dist[i] {
                dist[i] = d;
            }
        }
    }
    centers
}

fn min_pairwise(norm: NormKind, pts: &[SparseVec]) -> Scalar {
    let mut best: Option<Scalar> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (&pts[i] - &pts[j]).norm(norm);
            if best.as_ref().map_or(true, |b| d < *b) {
                best = Some(d);
            }
        }
    }
    best.unwrap_or_default()
}

/// `count` members of `A`, pairwise at least `s` apart, giving the bound
/// `s/2` with the points as certificate. Boxes with a positive default radius
/// use the walk `v_k = r(Σ_{i<k} e_{m_i} − e_{m_k})` on fresh coordinates,
/// which extends to an infinite separated family.
pub fn separation_alpha_lower(space: &Space, set: &SetExpr, count: usize) -> Result<BoundPair> {
    let norm = space.norm;
    let squared = norm.is_squared();
    if count <= 1 {
        return Ok(BoundPair::new(Scalar::zero(), None, squared).with_lower(Certificate::Trivial));
    }
    let simplified = simplify(set)?;
    let (points, extendable) = match &simplified {
        SetExpr::Box(b) if b.default_radius.is_positive() => {
            let r = &b.default_radius;
            let first = simplified.max_universe() + 1;
            let coords: Vec<Coord> = (0..count as Coord).map(|k| first + k).collect();
            let points = (0..count)
                .map(|k| {
                    let mut entries: Vec<(Coord, Scalar)> = coords[..k].iter().map(|&m| (m, r.clone())).collect();
                    entries.push((coords[k], -r));
                    SparseVec::from_entries(entries)
                })
                .collect::<Vec<_>>();
            (points, true)
        }
        other => {
            let members = match enumerate_members(other, space.enumeration_limit)? {
                Some(ms) => ms,
                None => sample_members(space, other)?,
            };
            let mut members = members;
            members.sort();
            members.dedup();
            if members.len() <= 1 {
                return Ok(BoundPair::new(Scalar::zero(), None, squared).with_lower(Certificate::Trivial));
            }
            let k = count.min(members.len());
            let chosen = if binomial(members.len(), k) <= 4096.0 {
                combinations(members.len(), k)
                    .into_iter()
                    .map(|c| {
                        let pts: Vec<SparseVec> = c.iter().map(|&i| members[i].clone()).collect();
                        (min_pairwise(norm, &pts), pts)
                    })
                    .fold(None::<(Scalar, Vec<SparseVec>)>, |acc, cur| match acc {
                        Some(a) if a.0 >= cur.0 => Some(a),
                        _ => Some(cur),
                    })
                    .expect("at least one subset")
                    .1
            } else {
                farthest_points(norm, &members, k)
                    .into_iter()
                    .map(|i| members[i].clone())
                    .collect()
            };
            (chosen, false)
        }
    };
    for p in &points {
        debug_assert!(contains(set, p)?, "separated family member outside the set");
    }
    let s = min_pairwise(norm, &points);
    Ok(BoundPair::new(norm.halve(&s), None, squared).with_lower(Certificate::SeparatedFamily { points, extendable }))
}

/// CSV rendering of a δ curve: `N,lower,upper,witnesses`, rationals as
/// quoted `p/q` strings. `decimal` appends rounded display columns.
pub fn delta_curve_csv(curve: &[DeltaResult], decimal: Option<usize>) -> String {
    fn quote(s: &str) -> String {
        format!("\"{}\"", s.replace('"', "\"\""))
    }
    let mut out = String::from("N,lower,upper,witnesses");
    if decimal.is_some() {
        out.push_str(",lower_decimal_display_only,upper_decimal_display_only");
    }
    out.push('\n');
    for r in curve {
        let upper = r.bound.upper.as_ref().map_or_else(|| "inf".to_string(), scalar_to_string);
        let witnesses = serde_json::to_string(&r.upper_witnesses).expect("vectors serialize");
        out.push_str(&format!(
            "{},{},{},{}",
            r.n,
            quote(&scalar_to_string(&r.bound.lower)),
            quote(&upper),
            quote(&witnesses)
        ));
        if let Some(k) = decimal {
            let up = r.bound.upper.as_ref().map_or_else(|| "inf".to_string(), |u| to_decimal(u, k));
            out.push_str(&format!(",{},{}", to_decimal(&r.bound.lower, k), up));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::ratio;

    fn e(i: Coord) -> SparseVec {
        SparseVec::unit(i)
    }

    fn triangle() -> SetExpr {
        SetExpr::finite(vec![SparseVec::zero(), e(1), e(2)])
    }

    #[test]
    fn delta0_examples() {
        let s = Space::sup();
        assert_eq!(delta0(&s, &SetExpr::ball(int(1))).unwrap().value(), Some(&int(1)));
        let b = SetExpr::boxed(int(1), [(1, int(2))].into());
        assert_eq!(delta0(&s, &b).unwrap().value(), Some(&int(2)));
        let pair = SetExpr::finite(vec![SparseVec::zero(), e(1)]);
        assert_eq!(delta0(&s, &pair).unwrap().value(), Some(&ratio(1, 2)));
    }

    #[test]
    fn triangle_is_pinned_by_a_vertex() {
        let r = delta_upper(&Space::sup(), &triangle(), 1, &SearchStrategy::exhaustive()).unwrap();
        assert_eq!(r.bound.value(), Some(&int(0)));
        // Every vertex pins the set; the earliest pool point wins the tie.
        assert_eq!(r.upper_witnesses, vec![SparseVec::zero()]);
    }

    #[test]
    fn ball_cannot_be_shrunk() {
        for strategy in [SearchStrategy::exhaustive(), SearchStrategy::greedy(2), SearchStrategy::beam(3)] {
            let r = delta_upper(&Space::sup(), &SetExpr::ball(int(1)), 3, &strategy).unwrap();
            assert_eq!(r.bound.upper, Some(int(1)));
        }
    }

    #[test]
    fn l1_ball_section_pins_at_a_vertex() {
        let gens: Vec<SparseVec> = (1..=4).flat_map(|i| [e(i), -&e(i)]).collect();
        let hull = SetExpr::abs_conv_hull(gens.clone());
        let strategy = SearchStrategy::Exhaustive { pool: Some(gens) };
        let r = delta_upper(&Space::new(NormKind::Sum), &hull, 1, &strategy).unwrap();
        assert_eq!(r.bound.upper, Some(int(0)));
        assert_eq!(r.upper_witnesses, vec![e(1)]);
    }

    #[test]
    fn lower_examples() {
        let s = Space::sup();
        assert_eq!(delta_lower(&s, &SetExpr::ball(int(1)), 5).unwrap().bound.lower, int(1));
        let b = SetExpr::boxed(int(1), [(1, int(2))].into());
        assert_eq!(delta_lower(&s, &b, 2).unwrap().bound.lower, int(1));
        assert_eq!(delta_lower(&s, &triangle(), 1).unwrap().bound.lower, int(0));
    }

    #[test]
    fn curves() {
        let s = Space::sup();
        let b = SetExpr::boxed(int(1), [(1, int(2))].into());
        let curve = delta_curve(&s, &b, 3, &SearchStrategy::exhaustive()).unwrap();
        assert_eq!(curve[0].bound.value(), Some(&int(2)));
        for r in &curve[1..] {
            assert_eq!(r.bound.value(), Some(&int(1)));
        }
        assert_eq!(curve[1].upper_witnesses, vec![SparseVec::single(1, int(2))]);
        let csv = delta_curve_csv(&curve, None);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,\"2\",\"2\""));
        let tri = delta_curve(&s, &triangle(), 2, &SearchStrategy::exhaustive()).unwrap();
        assert_eq!(tri[0].bound.value(), Some(&ratio(1, 2)));
        assert_eq!(tri[1].bound.value(), Some(&int(0)));
        assert_eq!(tri[2].bound.value(), Some(&int(0)));
    }

    #[test]
    fn infinity_bounds() {
        let s = Space::sup();
        let ball = delta_infinity_bounds(&s, &SetExpr::ball(int(1)), 3, &SearchStrategy::exhaustive()).unwrap();
        assert_eq!(ball.value(), Some(&int(1)));
        let tri = delta_infinity_bounds(&s, &triangle(), 2, &SearchStrategy::exhaustive()).unwrap();
        assert_eq!(tri.value(), Some(&int(0)));
    }

    #[test]
    fn kcenter_examples() {
        let line = vec![SparseVec::zero(), e(1), e(1).scale(&int(2))];
        let r = kcenter_radius(NormKind::Sup, &line, 1, true, 1 << 10).unwrap();
        assert_eq!(r.value(), Some(&int(1)));
        assert_eq!(kcenter_radius(NormKind::Sup, &line, 3, true, 1 << 10).unwrap().value(), Some(&int(0)));
        let cross = vec![e(1), -&e(1), e(2), -&e(2)];
        let r = kcenter_radius(NormKind::Sup, &cross, 2, true, 1 << 10).unwrap();
        assert_eq!(r.value(), Some(&int(1)));
        let approx = kcenter_radius(NormKind::Sup, &cross, 2, false, 0).unwrap();
        assert!(approx.lower <= int(1) && approx.upper.unwrap() >= int(1));
    }

    #[test]
    fn separation_examples() {
        let s = Space::sup();
        let r = separation_alpha_lower(&s, &SetExpr::ball(int(1)), 5).unwrap();
        assert_eq!(r.lower, int(1));
        match r.lower_witness {
            Some(Certificate::SeparatedFamily { points, extendable }) => {
                assert_eq!(points.len(), 5);
                assert!(extendable);
            }
            other => panic!("unexpected {other:?}"),
        }
        let pair = SetExpr::finite(vec![SparseVec::zero(), e(1)]);
        assert_eq!(separation_alpha_lower(&s, &pair, 2).unwrap().lower, ratio(1, 2));
        assert_eq!(separation_alpha_lower(&s, &pair, 1).unwrap().lower, int(0));
    }
}
