use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::max_signed_norm;
use crate::sets::polyhedral::{self, PolySup};
use crate::sets::{enumerate_members, sample_members, simplify, BoxSet, SetExpr, Space};
use crate::vectors::{int, linear_combination, scalar_serde, Coord, Functional, NormKind, Scalar, SparseVec};

/// Replayable evidence attached to one side of a [`BoundPair`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Two members of the set at the claimed distance.
    MemberPair { a: SparseVec, b: SparseVec },
    /// A member at which the functional reaches the claimed value.
    Member { point: SparseVec },
    ClosedForm { rule: String },
    Enumeration { members: usize },
    LinearProgram { programs: usize },
    /// The set lies inside this box.
    Relaxation { relaxed: BoxSet },
    /// For every witness list in `scope`, a fresh coordinate carries `±radius·e_m`.
    FreshCoordinate {
        #[serde(with = "scalar_serde")]
        radius: Scalar,
        scope: String,
    },
    /// For every witness list in `scope`, an unused series index `m` gives `±x_m`.
    FreshSeriesIndex {
        #[serde(with = "scalar_serde")]
        min_norm: Scalar,
        scope: String,
    },
    SeparatedFamily { points: Vec<SparseVec>, extendable: bool },
    Witnesses { points: Vec<SparseVec> },
    /// The bound holds for every set (e.g. a diameter is non-negative).
    Trivial,
}

mod upper_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    use crate::vectors::{parse_scalar, Scalar};

    pub fn serialize<S: Serializer>(x: &Option<Scalar>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_str(&x.to_string()),
            None => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Scalar>, D::Error> {
        let raw = String::deserialize(d)?;
        if raw == "inf" {
            Ok(None)
        } else {
            parse_scalar(&raw).map(Some).map_err(de::Error::custom)
        }
    }
}

/// Certified interval `[lower, upper]`; `upper = None` is `+∞`. When
/// `squared` is set both ends are squares of the underlying quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    #[serde(with = "scalar_serde")]
    pub lower: Scalar,
    #[serde(with = "upper_serde")]
    pub upper: Option<Scalar>,
    #[serde(default)]
    pub squared: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_witness: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_witness: Option<Certificate>,
}

impl BoundPair {
    pub fn new(lower: Scalar, upper: Option<Scalar>, squared: bool) -> Self {
        if let Some(u) = &upper {
            debug_assert!(lower <= *u, "bound pair out of order: {lower} > {u}");
        }
        BoundPair {
            lower,
            upper,
            squared,
            lower_witness: None,
            upper_witness: None,
        }
    }

    pub fn exact(value: Scalar, squared: bool) -> Self {
        BoundPair::new(value.clone(), Some(value), squared)
    }

    pub fn with_lower(mut self, c: Certificate) -> Self {
        self.lower_witness = Some(c);
        self
    }

    pub fn with_upper(mut self, c: Certificate) -> Self {
        self.upper_witness = Some(c);
        self
    }

    pub fn is_exact(&self) -> bool {
        self.upper.as_ref() == Some(&self.lower)
    }

    pub fn value(&self) -> Option<&Scalar> {
        self.upper.as_ref().filter(|u| **u == self.lower)
    }

    /// `upper ≤ x`, false when the upper end is infinite.
    pub fn upper_at_most(&self, x: &Scalar) -> bool {
        self.upper.as_ref().is_some_and(|u| u <= x)
    }

    /// Half of a length bound, carried in the given norm's gauge.
    pub fn halved(&self, norm: NormKind) -> BoundPair {
        BoundPair {
            lower: norm.halve(&self.lower),
            upper: self.upper.as_ref().map(|u| norm.halve(u)),
            squared: self.squared,
            lower_witness: self.lower_witness.clone(),
            upper_witness: self.upper_witness.clone(),
        }
    }

    fn map_points(mut self, f: impl Fn(&SparseVec) -> SparseVec) -> BoundPair {
        let apply = |c: &mut Option<Certificate>| match c {
            Some(Certificate::MemberPair { a, b }) => {
                *a = f(a);
                *b = f(b);
            }
            Some(Certificate::Member { point }) => *point = f(point),
            _ => {}
        };
        apply(&mut self.lower_witness);
        apply(&mut self.upper_witness);
        self
    }
}

/// Per-coordinate interval enclosure `lo_i ≤ v_i ≤ hi_i` of a set; every
/// coordinate not listed lies in `[−default, default]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub default: Scalar,
    pub bounds: BTreeMap<Coord, (Scalar, Scalar)>,
}

impl Profile {
    fn symmetric(default: Scalar, radii: impl IntoIterator<Item = (Coord, Scalar)>) -> Profile {
        Profile {
            bounds: radii.into_iter().map(|(i, r)| (i, (-&r, r))).collect(),
            default,
        }
    }

    pub fn interval(&self, i: Coord) -> (Scalar, Scalar) {
        self.bounds
            .get(&i)
            .cloned()
            .unwrap_or_else(|| (-&self.default, self.default.clone()))
    }

    fn width(&self, i: Coord) -> Scalar {
        let (lo, hi) = self.interval(i);
        let w = hi - lo;
        if w.is_negative() {
            Scalar::zero()
        } else {
            w
        }
    }

    /// Smallest symmetric box containing the enclosure.
    pub fn to_box(&self) -> BoxSet {
        let overrides = self
            .bounds
            .iter()
            .map(|(i, (lo, hi))| (*i, lo.abs().max(hi.abs())))
            .collect();
        BoxSet::new(self.default.clone(), overrides)
    }

    /// Diameter upper bound of any set inside the enclosure; `None` for `+∞`.
    fn diameter_upper(&self, norm: NormKind) -> Option<Scalar> {
        let two_default = &self.default * int(2);
        match norm {
            NormKind::Sup => Some(self.bounds.keys().map(|i| self.width(*i)).fold(two_default, Scalar::max)),
            _ if self.default.is_positive() => None,
            NormKind::Sum => Some(self.bounds.keys().map(|i| self.width(*i)).sum()),
            NormKind::Euclid => Some(
                self.bounds
                    .keys()
                    .map(|i| {
                        let w = self.width(*i);
                        &w * &w
                    })
                    .sum(),
            ),
        }
    }

    fn sup_upper(&self, f: &Functional) -> Scalar {
        f.coeffs()
            .entries()
            .map(|(i, c)| {
                let (lo, hi) = self.interval(i);
                (c * &lo).max(c * &hi)
            })
            .sum()
    }
}

/// Structural coordinate enclosure of any expression.
pub fn coordinate_profile(set: &SetExpr) -> Profile {
    match set {
        SetExpr::Box(b) => Profile::symmetric(b.default_radius.clone(), b.overrides.clone()),
        SetExpr::FinitePoints { points } => {
            let universe: BTreeSet<Coord> = points.iter().flat_map(|p| p.support()).collect();
            Profile {
                default: Scalar::zero(),
                bounds: universe
                    .into_iter()
                    .map(|i| {
                        let lo = points.iter().map(|p| p.get(i)).min().expect("non-empty");
                        let hi = points.iter().map(|p| p.get(i)).max().expect("non-empty");
                        (i, (lo, hi))
                    })
                    .collect(),
            }
        }
        SetExpr::SignSums { series, horizon, .. } => {
            let mut radii: BTreeMap<Coord, Scalar> = BTreeMap::new();
            for x in &series.terms[..*horizon] {
                for (i, c) in x.entries() {
                    *radii.entry(i).or_insert_with(Scalar::zero) += c.abs();
                }
            }
            Profile::symmetric(Scalar::zero(), radii)
        }
        SetExpr::AbsConvHull { points } => {
            let mut radii: BTreeMap<Coord, Scalar> = BTreeMap::new();
            for p in points {
                for (i, c) in p.entries() {
                    let slot = radii.entry(i).or_insert_with(Scalar::zero);
                    if c.abs() > *slot {
                        *slot = c.abs();
                    }
                }
            }
            Profile::symmetric(Scalar::zero(), radii)
        }
        SetExpr::Translate { base, by } => {
            let p = coordinate_profile(base);
            let keys: BTreeSet<Coord> = p.bounds.keys().copied().chain(by.support()).collect();
            Profile {
                bounds: keys
                    .into_iter()
                    .map(|i| {
                        let (lo, hi) = p.interval(i);
                        let t = by.get(i);
                        (i, (lo + &t, hi + t))
                    })
                    .collect(),
                default: p.default,
            }
        }
        SetExpr::Negate { base } => {
            let p = coordinate_profile(base);
            Profile {
                bounds: p.bounds.into_iter().map(|(i, (lo, hi))| (i, (-hi, -lo))).collect(),
                default: p.default,
            }
        }
        SetExpr::Intersect { sets } => {
            let ps: Vec<Profile> = sets.iter().map(coordinate_profile).collect();
            let keys: BTreeSet<Coord> = ps.iter().flat_map(|p| p.bounds.keys().copied()).collect();
            Profile {
                default: ps.iter().map(|p| p.default.clone()).min().expect("non-empty"),
                bounds: keys
                    .into_iter()
                    .map(|i| {
                        let lo = ps.iter().map(|p| p.interval(i).0).max().expect("non-empty");
                        let hi = ps.iter().map(|p| p.interval(i).1).min().expect("non-empty");
                        (i, (lo, hi))
                    })
                    .collect(),
            }
        }
        SetExpr::Symmetrized { base, witnesses } => {
            let p = coordinate_profile(base);
            if witnesses.is_empty() {
                return p;
            }
            // w ± d ∈ base forces |d_i| ≤ min(hi_i − w_i, w_i − lo_i).
            let keys: BTreeSet<Coord> = p
                .bounds
                .keys()
                .copied()
                .chain(witnesses.iter().flat_map(|w| w.support()))
                .collect();
            let radii = keys.into_iter().map(|i| {
                let (lo, hi) = p.interval(i);
                let r = witnesses
                    .iter()
                    .map(|w| {
                        let wi = w.get(i);
                        (&hi - &wi).min(&wi - &lo)
                    })
                    .min()
                    .expect("non-empty witnesses");
                (i, if r.is_negative() { Scalar::zero() } else { r })
            });
            Profile::symmetric(p.default.clone(), radii.collect::<Vec<_>>())
        }
    }
}

/// A box containing the set, with radii `min_x (sup(±e_i*, base) − |x_i|)`
/// for symmetrized sets.
pub fn coordinate_relaxation(set: &SetExpr) -> BoxSet {
    coordinate_profile(set).to_box()
}

fn pairwise_diameter(norm: NormKind, members: &[SparseVec]) -> BoundPair {
    let best = (0..members.len())
        .into_par_iter()
        .map(|i| {
            let mut best: Option<(Scalar, usize, usize)> = None;
            for j in i..members.len() {
                let d = (&members[i] - &members[j]).norm(norm);
                if best.as_ref().map_or(true, |(b, _, _)| d > *b) {
                    best = Some((d, i, j));
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<(Scalar, usize, usize)>, |acc, cur| match acc {
            Some(a) if a.0 >= cur.0 => Some(a),
            _ => Some(cur),
        });
    match best {
        None => BoundPair::exact(Scalar::zero(), norm.is_squared()).with_lower(Certificate::Trivial),
        Some((d, i, j)) => BoundPair::exact(d, norm.is_squared())
            .with_lower(Certificate::MemberPair {
                a: members[i].clone(),
                b: members[j].clone(),
            })
            .with_upper(Certificate::Enumeration { members: members.len() }),
    }
}

fn box_diameter(norm: NormKind, b: &BoxSet) -> Result<BoundPair> {
    let closed = |rule: &str| Certificate::ClosedForm { rule: rule.to_string() };
    match norm {
        NormKind::Sup => {
            let r = b.max_radius();
            let m = b
                .overrides
                .iter()
                .find(|(_, v)| **v == r)
                .map(|(i, _)| *i)
                .unwrap_or_else(|| b.fresh_coordinate([]));
            let a = SparseVec::single(m, r.clone());
            Ok(BoundPair::exact(&r * int(2), false)
                .with_lower(Certificate::MemberPair { b: -&a, a })
                .with_upper(closed("2·max radius")))
        }
        _ if b.default_radius.is_positive() => Err(Error::Unbounded { norm: norm.name() }),
        _ => {
            let corner = SparseVec::from_entries(b.overrides.clone());
            let d = corner.scale(&int(2)).norm(norm);
            Ok(BoundPair::exact(d, norm.is_squared())
                .with_lower(Certificate::MemberPair { b: -&corner, a: corner })
                .with_upper(closed("norm of the doubled corner")))
        }
    }
}

fn signed_sum(terms: &[SparseVec], signs: &[i64]) -> SparseVec {
    let coeffs: Vec<Scalar> = signs.iter().map(|s| int(*s)).collect();
    linear_combination(coeffs.iter().zip(terms))
}

fn lp_value(expr: &SetExpr, f: &Functional) -> Result<(Scalar, SparseVec)> {
    match polyhedral::lp_sup(expr, f)? {
        PolySup::Attained { value, point } => Ok((value, point)),
        PolySup::Empty => Err(Error::invalid("set is empty")),
        PolySup::Unbounded => Err(Error::invalid("polyhedral set is unbounded")),
    }
}

fn lp_diameter(space: &Space, set: &SetExpr) -> Result<BoundPair> {
    let norm = space.norm;
    let rho = polyhedral::outside_radius(set).expect("polyhedral");
    if norm != NormKind::Sup && rho.is_positive() {
        return Err(Error::Unbounded { norm: norm.name() });
    }
    let universe: Vec<Coord> = set.universe().into_iter().collect();
    let (_, anchor) = lp_value(set, &Functional::new(SparseVec::zero()))?;
    let mut programs = 1usize;
    let mut points: Vec<SparseVec> = vec![anchor.clone()];
    let mut widths = Vec::with_capacity(universe.len());
    let mut best_pair: Option<(Scalar, SparseVec, SparseVec)> = None;
    let consider = |a: &SparseVec, b: &SparseVec, best: &mut Option<(Scalar, SparseVec, SparseVec)>| {
        let d = (a - b).norm(norm);
        if best.as_ref().map_or(true, |(v, _, _)| d > *v) {
            *best = Some((d, a.clone(), b.clone()));
        }
    };
    for &i in &universe {
        let (hi, a) = lp_value(set, &Functional::coordinate(i, 1))?;
        let (neg_lo, b) = lp_value(set, &Functional::coordinate(i, -1))?;
        programs += 2;
        widths.push(hi + neg_lo);
        consider(&a, &b, &mut best_pair);
        points.push(a);
        points.push(b);
    }
    if rho.is_positive() {
        let m = universe.last().copied().unwrap_or(0) + 1;
        let lift = SparseVec::single(m, rho.clone());
        consider(&(&anchor + &lift), &(&anchor - &lift), &mut best_pair);
    }
    let exact_signs = norm != NormKind::Sup && universe.len() <= space.lp_sign_limit;
    if exact_signs {
        // sup ‖a − b‖_1 = max over sign functionals s of sup(s) + sup(−s).
        for mask in 0u64..(1u64 << universe.len()) {
            let s = SparseVec::from_entries(
                universe
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| (i, if mask >> k & 1 == 1 { int(-1) } else { int(1) })),
            );
            if mask >> (universe.len().saturating_sub(1)) & 1 == 1 && !universe.is_empty() {
                // s and −s give the same width.
                continue;
            }
            let f = Functional::new(s);
            let (_, a) = lp_value(set, &f)?;
            let (_, b) = lp_value(set, &f.negate())?;
            programs += 2;
            consider(&a, &b, &mut best_pair);
            points.push(a);
            points.push(b);
        }
    }
    if norm == NormKind::Euclid {
        let points = super::dedup_sorted(points);
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                consider(&points[i], &points[j], &mut best_pair);
            }
        }
    }
    let (lower, a, b) = best_pair.unwrap_or((Scalar::zero(), anchor.clone(), anchor));
    let upper = match norm {
        NormKind::Sup => widths.iter().cloned().fold(&rho * int(2), Scalar::max),
        NormKind::Sum if exact_signs => lower.clone(),
        NormKind::Sum => widths.iter().sum(),
        NormKind::Euclid => widths.iter().map(|w| w * w).sum(),
    };
    Ok(BoundPair::new(lower, Some(upper), norm.is_squared())
        .with_lower(Certificate::MemberPair { a, b })
        .with_upper(Certificate::LinearProgram { programs }))
}

fn relaxed_diameter(space: &Space, set: &SetExpr) -> Result<BoundPair> {
    let norm = space.norm;
    let profile = coordinate_profile(set);
    let upper = profile.diameter_upper(norm);
    let members = sample_members(space, set)?;
    let sampled = pairwise_diameter(norm, &members);
    let lower = match &upper {
        Some(u) if sampled.lower > *u => u.clone(),
        _ => sampled.lower,
    };
    Ok(BoundPair {
        lower,
        upper,
        squared: norm.is_squared(),
        lower_witness: sampled.lower_witness,
        upper_witness: Some(Certificate::Relaxation {
            relaxed: profile.to_box(),
        }),
    })
}

/// `diam(A) = sup ‖a − b‖`, exact where a closed form, enumeration or LP
/// applies and otherwise a certified interval. EUCLID values are squared.
pub fn diameter(space: &Space, set: &SetExpr) -> Result<BoundPair> {
    let set = simplify(set)?;
    diameter_simplified(space, &set)
}

fn diameter_simplified(space: &Space, set: &SetExpr) -> Result<BoundPair> {
    let norm = space.norm;
    match set {
        SetExpr::Box(b) => return box_diameter(norm, b),
        SetExpr::AbsConvHull { points } => {
            let best = points
                .iter()
                .fold(None::<&SparseVec>, |acc, p| match acc {
                    Some(q) if q.norm(norm) >= p.norm(norm) => Some(q),
                    _ => Some(p),
                })
                .expect("non-empty generators");
            return Ok(BoundPair::exact(norm.scale_gauge(&best.norm(norm), &int(2)), norm.is_squared())
                .with_lower(Certificate::MemberPair {
                    a: best.clone(),
                    b: -best,
                })
                .with_upper(Certificate::ClosedForm {
                    rule: "2·max generator norm".into(),
                }));
        }
        SetExpr::SignSums { series, horizon, .. } => {
            let terms = &series.terms[..*horizon];
            let (value, signs) = max_signed_norm(terms, norm, space.sign_budget)?;
            let s = signed_sum(terms, &signs);
            return Ok(BoundPair::exact(norm.scale_gauge(&value, &int(2)), norm.is_squared())
                .with_lower(Certificate::MemberPair { b: -&s, a: s })
                .with_upper(Certificate::ClosedForm {
                    rule: "2·max sign-sum norm".into(),
                }));
        }
        SetExpr::Translate { base, by } => {
            return Ok(diameter_simplified(space, base)?.map_points(|p| p + by));
        }
        SetExpr::Negate { base } => return Ok(diameter_simplified(space, base)?.map_points(|p| -p)),
        _ => {}
    }
    if let Some(members) = enumerate_members(set, space.enumeration_limit)? {
        return Ok(pairwise_diameter(norm, &members));
    }
    if polyhedral::is_polyhedral(set) {
        return lp_diameter(space, set);
    }
    relaxed_diameter(space, set)
}

fn functional_cert(value: Scalar, point: SparseVec, rule: Certificate) -> BoundPair {
    BoundPair::exact(value, false)
        .with_lower(Certificate::Member { point })
        .with_upper(rule)
}

/// `sup_{v∈A} ⟨f, v⟩` as a certified interval (exact for boxes, finite sets,
/// sign sums, hulls and polyhedral expressions).
pub fn sup_functional(space: &Space, f: &Functional, set: &SetExpr) -> Result<BoundPair> {
    let set = simplify(set)?;
    sup_simplified(space, f, &set)
}

fn sup_simplified(space: &Space, f: &Functional, set: &SetExpr) -> Result<BoundPair> {
    let closed = |rule: &str| Certificate::ClosedForm { rule: rule.to_string() };
    match set {
        SetExpr::Box(b) => {
            let point = SparseVec::from_entries(f.coeffs().entries().map(|(i, c)| {
                let r = b.radius(i);
                (i, if c.is_negative() { -r } else { r })
            }));
            let value = f.pair(&point);
            return Ok(functional_cert(value, point, closed("Σ|f_i|·r_i")));
        }
        SetExpr::SignSums { series, horizon, .. } => {
            let terms = &series.terms[..*horizon];
            let signs: Vec<i64> = terms
                .iter()
                .map(|x| if f.pair(x).is_negative() { -1 } else { 1 })
                .collect();
            let point = signed_sum(terms, &signs);
            let value = f.pair(&point);
            return Ok(functional_cert(value, point, closed("Σ_n |⟨f, x_n⟩|")));
        }
        SetExpr::AbsConvHull { points } => {
            let (point, value) = points
                .iter()
                .map(|p| {
                    let v = f.pair(p);
                    if v.is_negative() {
                        (-p, -v)
                    } else {
                        (p.clone(), v)
                    }
                })
                .fold(None::<(SparseVec, Scalar)>, |acc, cur| match acc {
                    Some(a) if a.1 >= cur.1 => Some(a),
                    _ => Some(cur),
                })
                .expect("non-empty generators");
            return Ok(functional_cert(value, point, closed("max_j |⟨f, p_j⟩|")));
        }
        SetExpr::Translate { base, by } => {
            let shift = f.pair(by);
            let inner = sup_simplified(space, f, base)?;
            return Ok(BoundPair {
                lower: &inner.lower + &shift,
                upper: inner.upper.as_ref().map(|u| u + &shift),
                ..inner
            }
            .map_points(|p| p + by));
        }
        SetExpr::Negate { base } => {
            return Ok(sup_simplified(space, &f.negate(), base)?.map_points(|p| -p));
        }
        _ => {}
    }
    if let Some(members) = enumerate_members(set, space.enumeration_limit)? {
        let best = members.iter().fold(None::<(Scalar, &SparseVec)>, |acc, m| {
            let v = f.pair(m);
            match acc {
                Some(a) if a.0 >= v => Some(a),
                _ => Some((v, m)),
            }
        });
        let (value, point) = best.ok_or_else(|| Error::invalid("set is empty"))?;
        return Ok(functional_cert(
            value,
            point.clone(),
            Certificate::Enumeration { members: members.len() },
        ));
    }
    if polyhedral::is_polyhedral(set) {
        let (value, point) = lp_value(set, f)?;
        return Ok(functional_cert(value, point, Certificate::LinearProgram { programs: 1 }));
    }
    let profile = coordinate_profile(set);
    let upper = profile.sup_upper(f);
    let members = sample_members(space, set)?;
    let (lower, point) = members
        .iter()
        .map(|m| (f.pair(m), m))
        .fold(None::<(Scalar, &SparseVec)>, |acc, cur| match acc {
            Some(a) if a.0 >= cur.0 => Some(a),
            _ => Some(cur),
        })
        .ok_or_else(|| Error::invalid("no member found to certify a lower bound"))?;
    Ok(BoundPair::new(lower.min(upper.clone()), Some(upper), false)
        .with_lower(Certificate::Member { point: point.clone() })
        .with_upper(Certificate::Relaxation {
            relaxed: profile.to_box(),
        }))
}
