//! Finite-horizon series, weakly unconditionally Cauchy constants, and the
//! tail-bound harness.
//!
//! Everything here is "within horizon": a [`SeriesSpec`] stores the first `H`
//! terms and every statement is about those terms only.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexes::{delta0, delta_lower, delta_upper, DeltaResult, SearchStrategy};
use crate::sets::{sign_sum_index, symmetrize, SetExpr, SignMode, Space};
use crate::vectors::{scalar_serde, Coord, NormKind, Scalar, SparseVec};

/// Sign patterns allowed in one maximization.
pub const SIGN_PATTERN_BUDGET: u64 = 1 << 20;

/// Longest window `brute_tail_sup` enumerates.
pub const BRUTE_WINDOW: usize = 20;

/// A finite prefix `x_1..x_H` of a series, with the ambient norm.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub norm: NormKind,
    pub terms: Vec<SparseVec>,
    #[serde(default)]
    pub label: String,
}

impl SeriesSpec {
    pub fn new(norm: NormKind, terms: Vec<SparseVec>, label: impl Into<String>) -> Self {
        SeriesSpec {
            norm,
            terms,
            label: label.into(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.terms.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            Err(Error::invalid("series horizon must be at least 1"))
        } else {
            Ok(())
        }
    }

    /// `Σ θ_n x_n` for the given signs (shorter sign lists use a prefix).
    pub fn signed_sum(&self, signs: &[i64]) -> SparseVec {
        signed_sum(&self.terms, signs)
    }
}

pub(crate) fn signed_sum(terms: &[SparseVec], signs: &[i64]) -> SparseVec {
    let mut acc: BTreeMap<Coord, Scalar> = BTreeMap::new();
    for (x, s) in terms.iter().zip(signs) {
        for (i, c) in x.entries() {
            let slot = acc.entry(i).or_insert_with(Scalar::zero);
            if *s < 0 {
                *slot -= c;
            } else if *s > 0 {
                *slot += c;
            }
        }
    }
    SparseVec::from_entries(acc)
}

/// Running `Σ θ_n x_n` updated by flipping one sign at a time.
struct GrayWalk<'a> {
    terms: Vec<&'a SparseVec>,
    sum: BTreeMap<Coord, Scalar>,
    signs: Vec<i64>,
}

impl<'a> GrayWalk<'a> {
    fn new(terms: Vec<&'a SparseVec>) -> Self {
        let mut sum: BTreeMap<Coord, Scalar> = BTreeMap::new();
        for x in &terms {
            for (i, c) in x.entries() {
                *sum.entry(i).or_insert_with(Scalar::zero) += c;
            }
        }
        let signs = vec![1; terms.len()];
        GrayWalk { terms, sum, signs }
    }

    fn flip(&mut self, k: usize) {
        let s = self.signs[k];
        for (i, c) in self.terms[k].entries() {
            let slot = self.sum.get_mut(&i).expect("every term coordinate is tracked");
            let twice = c * Scalar::from_integer(2.into());
            if s > 0 {
                *slot -= twice;
            } else {
                *slot += twice;
            }
        }
        self.signs[k] = -s;
    }

    fn norm(&self, norm: NormKind) -> Scalar {
        let mut acc = Scalar::zero();
        for v in self.sum.values() {
            let a = num_traits::Signed::abs(v);
            match norm {
                NormKind::Sup => {
                    if a > acc {
                        acc = a;
                    }
                }
                NormKind::Sum => acc += a,
                NormKind::Euclid => acc += &a * &a,
            }
        }
        acc
    }

    /// Visits all sign patterns that keep the signs at `fixed` positions,
    /// returning the largest norm and its pattern (first one on ties).
    fn maximize(mut self, norm: NormKind, free: usize) -> (Scalar, Vec<i64>) {
        let mut best = (self.norm(norm), self.signs.clone());
        let offset = self.terms.len() - free;
        for step in 1u64..(1u64 << free) {
            let k = offset + step.trailing_zeros() as usize;
            self.flip(k);
            let n = self.norm(norm);
            if n > best.0 {
                best = (n, self.signs.clone());
            }
        }
        best
    }
}

/// `max_θ ‖Σ_n θ_n x_n‖` over `θ ∈ {−1, 1}^H` with a maximizing pattern.
///
/// SUP has the closed form `max_i Σ_n |x_n(i)|`. SUM and EUCLID are additive
/// over groups of terms with disjoint supports, so each connected group is
/// enumerated separately; the total number of patterns is capped by `budget`.
pub fn max_signed_norm(terms: &[SparseVec], norm: NormKind, budget: u64) -> Result<(Scalar, Vec<i64>)> {
    if norm == NormKind::Sup {
        let mut columns: BTreeMap<Coord, Scalar> = BTreeMap::new();
        for x in terms {
            for (i, c) in x.entries() {
                *columns.entry(i).or_insert_with(Scalar::zero) += num_traits::Signed::abs(c);
            }
        }
        let Some((i, value)) = columns
            .into_iter()
            .fold(None::<(Coord, Scalar)>, |acc, (i, v)| match acc {
                Some(a) if a.1 >= v => Some(a),
                _ => Some((i, v)),
            })
        else {
            return Ok((Scalar::zero(), vec![1; terms.len()]));
        };
        let signs = terms
            .iter()
            .map(|x| if num_traits::Signed::is_negative(&x.get(i)) { -1 } else { 1 })
            .collect();
        return Ok((value, signs));
    }
    let groups = support_components(terms);
    let patterns: f64 = groups.iter().map(|g| 2f64.powi(g.len() as i32 - 1)).sum();
    if patterns > budget as f64 {
        return Err(Error::BudgetExceeded {
            what: format!("{patterns} sign patterns"),
            limit: budget,
        });
    }
    let results: Vec<(Scalar, Vec<i64>)> = groups
        .par_iter()
        .map(|g| GrayWalk::new(g.iter().map(|&n| &terms[n]).collect()).maximize(norm, g.len() - 1))
        .collect();
    let mut signs = vec![1i64; terms.len()];
    let mut value = Scalar::zero();
    for (g, (v, s)) in groups.iter().zip(results) {
        value += v;
        for (&n, sign) in g.iter().zip(s) {
            signs[n] = sign;
        }
    }
    Ok((value, signs))
}

/// Indices of non-zero terms grouped by shared support.
fn support_components(terms: &[SparseVec]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..terms.len()).collect();
    fn find(parent: &mut [usize], k: usize) -> usize {
        let mut r = k;
        while parent[r] != r {
            r = parent[r];
        }
        let mut k = k;
        while parent[k] != r {
            let next = parent[k];
            parent[k] = r;
            k = next;
        }
        r
    }
    let mut owner: BTreeMap<Coord, usize> = BTreeMap::new();
    for (n, x) in terms.iter().enumerate() {
        for i in x.support() {
            match owner.get(&i) {
                Some(&m) => {
                    let (a, b) = (find(&mut parent, m), find(&mut parent, n));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                None => {
                    owner.insert(i, n);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (n, x) in terms.iter().enumerate() {
        if !x.is_zero() {
            let r = find(&mut parent, n);
            groups.entry(r).or_default().push(n);
        }
    }
    groups.into_values().collect()
}

/// `sup_{‖f‖* ≤ 1} Σ_{n≤H} |⟨f, x_n⟩|`, which equals `max_θ ‖Σ θ_n x_n‖`.
/// Squared under EUCLID.
pub fn wuc_bound(s: &SeriesSpec) -> Result<Scalar> {
    max_signed_norm(&s.terms, s.norm, SIGN_PATTERN_BUDGET).map(|(v, _)| v)
}

pub fn sign_sum_set(s: &SeriesSpec, mode: SignMode) -> SetExpr {
    SetExpr::sign_sums(s.clone(), mode)
}

/// Exact `max_θ ‖Σ_{n=M}^{M'} θ_n x_n‖` by plain enumeration of all
/// `2^{M'−M+1}` patterns (1-based, inclusive window).
pub fn brute_tail_sup(s: &SeriesSpec, m: usize, m_end: usize) -> Result<Scalar> {
    if m == 0 || m > m_end || m_end > s.horizon() {
        return Err(Error::invalid(format!(
            "tail window [{m}, {m_end}] must satisfy 1 ≤ M ≤ M' ≤ {}",
            s.horizon()
        )));
    }
    if m_end - m > BRUTE_WINDOW {
        return Err(Error::BudgetExceeded {
            what: format!("tail window of {} terms", m_end - m + 1),
            limit: BRUTE_WINDOW as u64 + 1,
        });
    }
    let window: Vec<&SparseVec> = s.terms[m - 1..m_end].iter().collect();
    let len = window.len();
    Ok(GrayWalk::new(window).maximize(s.norm, len).0)
}

/// Outcome of the tail-bound harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    /// Every signed sum over indices in `(M, H]` has norm at most ε.
    pub m: usize,
    pub witnesses: Vec<SparseVec>,
    /// Largest index the witnesses use.
    pub index_usage: usize,
    #[serde(with = "scalar_serde")]
    pub half_diameter: Scalar,
    /// `(M+1, M', brute_tail_sup)` replays within the horizon.
    pub replay: Vec<TailReplay>,
    pub mode: SignMode,
    /// The prefix-mode argument needs tails to re-enter the family; flagged
    /// whenever the harness runs in that mode.
    pub prefix_gap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReplay {
    pub from: usize,
    pub to: usize,
    #[serde(with = "scalar_serde")]
    pub sup: Scalar,
}

/// Searches witnesses `a_j` from the sign-sum family such that the
/// symmetrized set has `δ_0 ≤ ε`; the witnesses' largest index gives `M`.
///
/// Witness pools grow with the allowed index usage `K = 0, 1, …, H−1`, so the
/// first certified `K` is the smallest the strategy finds. Tail sums over
/// `(M, H]` are then replayed by enumeration (windows of up to 13 terms).
pub fn unconditional_tail_bound(
    space: &Space,
    s: &SeriesSpec,
    epsilon: &Scalar,
    mode: SignMode,
    strategy: &SearchStrategy,
    max_witnesses: usize,
) -> Result<TailBound> {
    s.validate()?;
    let space = Space { norm: s.norm, ..*space };
    let a = sign_sum_set(s, mode);
    let threshold = s.norm.gauge(epsilon);
    let h = s.horizon();
    let mut best: Option<Scalar> = None;
    // K = H would leave an empty tail, which certifies nothing.
    for k in 0..h {
        let pool = usage_pool(s, mode, k);
        if pool.is_empty() {
            continue;
        }
        let restricted = strategy.with_pool(pool);
        let found = delta_upper(&space, &a, max_witnesses.max(1), &restricted)?;
        let Some(upper) = found.bound.upper.clone() else {
            continue;
        };
        if upper <= threshold {
            let usage = found
                .upper_witnesses
                .iter()
                .map(|w| sign_sum_index(&s.terms, mode, w, crate::sets::DEFAULT_SIGN_BUDGET))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .map(|k| k.expect("pool members are sign sums"))
                .max()
                .unwrap_or(0);
            let m = usage.max(1);
            let mut replay = Vec::new();
            if m < h {
                let to = (m + 1 + 12).min(h);
                let sup = brute_tail_sup(s, m + 1, to)?;
                if sup > threshold {
                    return Err(Error::InvariantViolation(format!(
                        "tail replay over [{}, {to}] exceeds ε",
                        m + 1
                    )));
                }
                replay.push(TailReplay { from: m + 1, to, sup });
            }
            return Ok(TailBound {
                m,
                witnesses: found.upper_witnesses,
                index_usage: usage,
                half_diameter: upper,
                replay,
                mode,
                prefix_gap: mode == SignMode::Prefixes,
            });
        }
        if best.as_ref().map_or(true, |b| upper < *b) {
            best = Some(upper);
        }
    }
    let lower = delta_lower(&space, &a, max_witnesses.max(1))?;
    Err(Error::NotAchievable {
        best: best.unwrap_or_else(|| delta0(&space, &a).map(|b| b.lower).unwrap_or_default()),
        lower_certificate: Some(Box::new(lower)),
    })
}

/// Members of the family that only use indices `≤ k`: `0` (subset mode) and
/// the all-positive prefix sums `P_1..P_k`.
fn usage_pool(s: &SeriesSpec, mode: SignMode, k: usize) -> Vec<SparseVec> {
    let mut pool = Vec::new();
    if mode == SignMode::Subsets {
        pool.push(SparseVec::zero());
    }
    let mut prefix = SparseVec::zero();
    for x in &s.terms[..k] {
        prefix = &prefix + x;
        pool.push(prefix.clone());
    }
    pool
}

/// Sanity helper for reports: `δ_0` of the set symmetrized at the witnesses.
pub fn tail_half_diameter(space: &Space, s: &SeriesSpec, mode: SignMode, witnesses: &[SparseVec]) -> Result<DeltaResult> {
    let space = Space { norm: s.norm, ..*space };
    let d = symmetrize(&sign_sum_set(s, mode), witnesses)?;
    let bound = delta0(&space, &d)?;
    Ok(DeltaResult {
        n: witnesses.len(),
        bound,
        upper_witnesses: witnesses.to_vec(),
        lower_certificate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::{int, ratio};

    fn geometric(h: u32) -> SeriesSpec {
        let terms = (1..=h)
            .map(|n| SparseVec::single(n, Scalar::new(1.into(), num_bigint::BigInt::from(1u64) << n)))
            .collect();
        SeriesSpec::new(NormKind::Sum, terms, "geometric")
    }

    fn canonical(h: u32, norm: NormKind) -> SeriesSpec {
        SeriesSpec::new(norm, (1..=h).map(SparseVec::unit).collect(), "canonical")
    }

    fn pow2(n: u32) -> Scalar {
        Scalar::new(1.into(), num_bigint::BigInt::from(1u64) << n)
    }

    #[test]
    fn wuc_examples() {
        assert_eq!(wuc_bound(&canonical(6, NormKind::Sup)).unwrap(), int(1));
        assert_eq!(wuc_bound(&geometric(10)).unwrap(), int(1) - pow2(10));
        let same = SeriesSpec::new(
            NormKind::Sup,
            (1..=4).map(|n| SparseVec::single(1, ratio(1, n))).collect(),
            "harmonic",
        );
        assert_eq!(wuc_bound(&same).unwrap(), ratio(25, 12));
    }

    #[test]
    fn sign_sum_set_examples() {
        let a = sign_sum_set(&canonical(2, NormKind::Sup), SignMode::Prefixes);
        let ms = crate::sets::enumerate_members(&a, 100).unwrap().unwrap();
        assert_eq!(ms.len(), 6);
        assert!(!ms.contains(&SparseVec::unit(2)));
        let zero = SeriesSpec::new(NormKind::Sup, vec![SparseVec::zero(); 3], "zero");
        let ms = crate::sets::enumerate_members(&sign_sum_set(&zero, SignMode::Subsets), 100)
            .unwrap()
            .unwrap();
        assert_eq!(ms, vec![SparseVec::zero()]);
    }

    #[test]
    fn brute_tail_examples() {
        let s = geometric(10);
        assert_eq!(brute_tail_sup(&s, 4, 10).unwrap(), pow2(3) - pow2(10));
        let c = canonical(8, NormKind::Sup);
        assert_eq!(brute_tail_sup(&c, 3, 7).unwrap(), int(1));
        assert_eq!(brute_tail_sup(&s, 5, 5).unwrap(), pow2(5));
        assert!(brute_tail_sup(&s, 0, 3).is_err());
    }

    #[test]
    fn components_split_disjoint_terms() {
        let terms = vec![
            SparseVec::from_ints(&[(1, 1), (2, 1)]),
            SparseVec::from_ints(&[(2, 1), (3, -1)]),
            SparseVec::unit(7),
            SparseVec::zero(),
        ];
        assert_eq!(support_components(&terms), vec![vec![0, 1], vec![2]]);
        let (v, signs) = max_signed_norm(&terms, NormKind::Sum, 1 << 10).unwrap();
        assert_eq!(v, int(5));
        assert_eq!(signed_sum(&terms, &signs).norm(NormKind::Sum), int(5));
    }

    #[test]
    fn harness_on_geometric_series() {
        let s = geometric(10);
        let out = unconditional_tail_bound(
            &Space::new(NormKind::Sum),
            &s,
            &ratio(1, 8),
            SignMode::Subsets,
            &SearchStrategy::exhaustive(),
            1,
        )
        .unwrap();
        assert_eq!(out.m, 3);
        assert!(out.replay.iter().all(|r| r.sup <= ratio(1, 8)));
    }

    #[test]
    fn harness_fails_on_canonical_basis() {
        let s = canonical(6, NormKind::Sup);
        let err = unconditional_tail_bound(
            &Space::sup(),
            &s,
            &ratio(1, 2),
            SignMode::Subsets,
            &SearchStrategy::exhaustive(),
            1,
        )
        .unwrap_err();
        match err {
            Error::NotAchievable { lower_certificate, .. } => {
                assert_eq!(lower_certificate.unwrap().bound.lower, int(1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_series_gives_m_one() {
        let s = SeriesSpec::new(NormKind::Sup, vec![SparseVec::zero(); 4], "zero");
        let out = unconditional_tail_bound(
            &Space::sup(),
            &s,
            &ratio(1, 8),
            SignMode::Subsets,
            &SearchStrategy::exhaustive(),
            1,
        )
        .unwrap();
        assert_eq!(out.m, 1);
    }
}
