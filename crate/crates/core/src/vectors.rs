//! Finitely supported rational sequence vectors, norms and dual functionals.
//!
//! Every vector lives in c00, the space of finitely supported real sequences,
//! with coordinates indexed from 1. Under [`NormKind::Euclid`] all norm values
//! produced by this module are *squares*, so that every comparison stays in
//! exact rational arithmetic.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

/// Exact rational scalar, always held in lowest terms with positive denominator.
pub type Scalar = BigRational;

/// Coordinate index; `0` is never a valid coordinate.
pub type Coord = u32;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"`, `"p"` or a plain decimal literal such as `"0.125"`.
pub fn parse_scalar(text: &str) -> Result<Scalar, String> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| format!("bad numerator in {text:?}"))?;
        let q: BigInt = q.trim().parse().map_err(|_| format!("bad denominator in {text:?}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {text:?}"));
        }
        return Ok(Scalar::new(p, q));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let num: BigInt = digits.parse().map_err(|_| format!("bad decimal {text:?}"))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let value = Scalar::new(num, den);
        return Ok(if negative { -value } else { value });
    }
    text.parse::<BigInt>()
        .map(Scalar::from_integer)
        .map_err(|_| format!("bad rational {text:?}"))
}

pub fn scalar_to_string(x: &Scalar) -> String {
    x.to_string()
}

/// Rounds `x` to `digits` decimal places for display. Never authoritative.
pub fn to_decimal(x: &Scalar, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (x * Scalar::from_integer(scale.clone())).round().to_integer();
    let negative = scaled.is_negative();
    let magnitude = scaled.abs().to_string();
    let padded = format!("{:0>width$}", magnitude, width = digits + 1);
    let (whole, frac) = padded.split_at(padded.len() - digits);
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac}")
    }
}

/// Serde adapters for scalars stored as `"p/q"` strings.
pub mod scalar_serde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        d.deserialize_any(ScalarVisitor)
    }

    pub(crate) struct ScalarVisitor;

    impl Visitor<'_> for ScalarVisitor {
        type Value = Scalar;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational string \"p/q\" or an integer")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
            parse_scalar(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
            Ok(int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
            Ok(Scalar::from_integer(BigInt::from(v)))
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<Scalar>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(x) => s.serialize_str(&x.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Scalar>, D::Error> {
            let raw: Option<serde_json::Value> = Option::deserialize(d)?;
            match raw {
                None | Some(serde_json::Value::Null) => Ok(None),
                Some(serde_json::Value::String(s)) => {
                    parse_scalar(&s).map(Some).map_err(de::Error::custom)
                }
                Some(serde_json::Value::Number(n)) => parse_scalar(&n.to_string())
                    .map(Some)
                    .map_err(de::Error::custom),
                Some(other) => Err(de::Error::custom(format!("expected rational, got {other}"))),
            }
        }
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &[Scalar], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(xs.iter().map(|x| x.to_string()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Scalar>, D::Error> {
            let raw: Vec<serde_json::Value> = Vec::deserialize(d)?;
            raw.into_iter()
                .map(|v| match v {
                    serde_json::Value::String(s) => parse_scalar(&s),
                    serde_json::Value::Number(n) => parse_scalar(&n.to_string()),
                    other => Err(format!("expected rational, got {other}")),
                })
                .collect::<Result<_, _>>()
                .map_err(de::Error::custom)
        }
    }

    pub mod map {
        use super::*;

        pub fn serialize<S: Serializer>(m: &BTreeMap<Coord, Scalar>, s: S) -> Result<S::Ok, S::Error> {
            let mut out = s.serialize_map(Some(m.len()))?;
            for (k, v) in m {
                out.serialize_entry(&k.to_string(), &v.to_string())?;
            }
            out.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Coord, Scalar>, D::Error> {
            d.deserialize_map(CoordMapVisitor { drop_zeros: false })
        }
    }
}

struct CoordMapVisitor {
    drop_zeros: bool,
}

impl<'de> Visitor<'de> for CoordMapVisitor {
    type Value = BTreeMap<Coord, Scalar>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an object mapping positive coordinate strings to rationals")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
        let mut out = BTreeMap::new();
        while let Some(key) = access.next_key::<String>()? {
            let coord: Coord = key
                .parse()
                .map_err(|_| de::Error::custom(format!("bad coordinate {key:?}")))?;
            if coord == 0 {
                return Err(de::Error::custom("coordinates are 1-based"));
            }
            let value = access.next_value_seed(ScalarSeed)?;
            if self.drop_zeros && value.is_zero() {
                continue;
            }
            if out.insert(coord, value).is_some() {
                return Err(de::Error::custom(format!("duplicate coordinate {coord}")));
            }
        }
        Ok(out)
    }
}

struct ScalarSeed;

impl<'de> de::DeserializeSeed<'de> for ScalarSeed {
    type Value = Scalar;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Scalar, D::Error> {
        d.deserialize_any(scalar_serde::ScalarVisitor)
    }
}

/// Which norm the ambient space carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    /// ℓ∞, the c0 model.
    Sup,
    /// ℓ1.
    Sum,
    /// ℓ2; values are carried as squares.
    Euclid,
}

impl NormKind {
    pub fn is_squared(self) -> bool {
        self == NormKind::Euclid
    }

    /// Maps a plain length `t ≥ 0` into this norm's gauge (identity, or `t²`).
    pub fn gauge(self, t: &Scalar) -> Scalar {
        match self {
            NormKind::Euclid => t * t,
            _ => t.clone(),
        }
    }

    /// Gauge of `factor · t` given the gauge `g` of `t`.
    pub fn scale_gauge(self, g: &Scalar, factor: &Scalar) -> Scalar {
        match self {
            NormKind::Euclid => g * factor * factor,
            _ => g * factor,
        }
    }

    /// Gauge of `t/2` given the gauge of `t`.
    pub fn halve(self, g: &Scalar) -> Scalar {
        self.scale_gauge(g, &ratio(1, 2))
    }

    pub fn name(self) -> &'static str {
        match self {
            NormKind::Sup => "sup",
            NormKind::Sum => "sum",
            NormKind::Euclid => "euclid",
        }
    }

    /// Sum of two gauges `g(s)` and `g(t)` as a gauge upper bound of `g(s + t)`,
    /// exact for the linear gauges. For the squared gauge returns `None`
    /// because `(s + t)²` is not a rational function of `s²` and `t²`.
    pub fn add_gauges(self, a: &Scalar, b: &Scalar) -> Option<Scalar> {
        match self {
            NormKind::Euclid => None,
            _ => Some(a + b),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for NormKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sup" | "linf" | "c0" => Ok(NormKind::Sup),
            "sum" | "l1" => Ok(NormKind::Sum),
            "euclid" | "l2" => Ok(NormKind::Euclid),
            other => Err(format!("unknown norm {other:?}")),
        }
    }
}

/// A finitely supported vector of c00 with no stored zeros.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparseVec {
    entries: BTreeMap<Coord, Scalar>,
}

impl SparseVec {
    pub fn zero() -> Self {
        SparseVec::default()
    }

    /// Canonical unit vector `e_m`.
    pub fn unit(m: Coord) -> Self {
        Self::single(m, Scalar::one())
    }

    pub fn single(m: Coord, value: Scalar) -> Self {
        assert!(m >= 1, "coordinates are 1-based");
        let mut entries = BTreeMap::new();
        if !value.is_zero() {
            entries.insert(m, value);
        }
        SparseVec { entries }
    }

    pub fn from_entries<I: IntoIterator<Item = (Coord, Scalar)>>(items: I) -> Self {
        let mut v = SparseVec::zero();
        for (k, x) in items {
            v.add_at(k, &x);
        }
        v
    }

    /// Builds from integer pairs; convenient in tests.
    pub fn from_ints(items: &[(Coord, i64)]) -> Self {
        Self::from_entries(items.iter().map(|&(k, x)| (k, int(x))))
    }

    /// Dense constructor: `values[0]` goes to coordinate 1.
    pub fn from_dense(values: &[Scalar]) -> Self {
        Self::from_entries(
            values
                .iter()
                .enumerate()
                .map(|(i, x)| (i as Coord + 1, x.clone())),
        )
    }

    fn add_at(&mut self, k: Coord, x: &Scalar) {
        assert!(k >= 1, "coordinates are 1-based");
        if x.is_zero() {
            return;
        }
        let slot = self.entries.entry(k).or_insert_with(Scalar::zero);
        *slot += x;
        if slot.is_zero() {
            self.entries.remove(&k);
        }
    }

    pub fn get(&self, k: Coord) -> Scalar {
        self.entries.get(&k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Coord, &Scalar)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn support(&self) -> impl Iterator<Item = Coord> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Largest coordinate in the support, `0` for the zero vector.
    pub fn max_index(&self) -> Coord {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, c: &Scalar) -> SparseVec {
        if c.is_zero() {
            return SparseVec::zero();
        }
        SparseVec {
            entries: self.entries.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn norm(&self, kind: NormKind) -> Scalar {
        match kind {
            NormKind::Sup => self
                .entries
                .values()
                .map(|x| x.abs())
                .max()
                .unwrap_or_else(Scalar::zero),
            NormKind::Sum => self.entries.values().map(|x| x.abs()).sum(),
            NormKind::Euclid => self.entries.values().map(|x| x * x).sum(),
        }
    }

    pub fn dot(&self, other: &SparseVec) -> Scalar {
        let (small, large) = if self.entries.len() <= other.entries.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .filter_map(|(k, x)| large.entries.get(k).map(|y| x * y))
            .sum()
    }

    pub fn into_map(self) -> BTreeMap<Coord, Scalar> {
        self.entries
    }
}

impl fmt::Debug for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        f.write_str("}")
    }
}

impl Add for &SparseVec {
    type Output = SparseVec;

    fn add(self, rhs: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        for (k, x) in &rhs.entries {
            out.add_at(*k, x);
        }
        out
    }
}

impl Sub for &SparseVec {
    type Output = SparseVec;

    fn sub(self, rhs: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        for (k, x) in &rhs.entries {
            out.add_at(*k, &-x);
        }
        out
    }
}

impl Neg for &SparseVec {
    type Output = SparseVec;

    fn neg(self) -> SparseVec {
        SparseVec {
            entries: self.entries.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }
}

impl Serialize for SparseVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        scalar_serde::map::serialize(&self.entries, s)
    }
}

impl<'de> Deserialize<'de> for SparseVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let entries = d.deserialize_map(CoordMapVisitor { drop_zeros: true })?;
        Ok(SparseVec { entries })
    }
}

/// Exact coordinatewise `Σ c_j v_j` in canonical form.
pub fn linear_combination<'a, I>(terms: I) -> SparseVec
where
    I: IntoIterator<Item = (&'a Scalar, &'a SparseVec)>,
{
    let mut out = SparseVec::zero();
    for (c, v) in terms {
        if c.is_zero() {
            continue;
        }
        for (k, x) in &v.entries {
            out.add_at(*k, &(c * x));
        }
    }
    out
}

/// Largest coordinate touched by any of the vectors.
pub fn max_support<'a, I: IntoIterator<Item = &'a SparseVec>>(vs: I) -> Coord {
    vs.into_iter().map(SparseVec::max_index).max().unwrap_or(0)
}

/// A finitely supported element of the dual, acting by `⟨f, v⟩ = Σ f_i v_i`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Functional {
    coeffs: SparseVec,
}

impl Functional {
    pub fn new(coeffs: SparseVec) -> Self {
        Functional { coeffs }
    }

    /// Coordinate functional `sign · e_m*`.
    pub fn coordinate(m: Coord, sign: i64) -> Self {
        Functional::new(SparseVec::single(m, int(sign)))
    }

    pub fn coeffs(&self) -> &SparseVec {
        &self.coeffs
    }

    pub fn pair(&self, v: &SparseVec) -> Scalar {
        self.coeffs.dot(v)
    }

    pub fn scale(&self, c: &Scalar) -> Functional {
        Functional::new(self.coeffs.scale(c))
    }

    pub fn negate(&self) -> Functional {
        Functional::new(-&self.coeffs)
    }

    /// Dual norm: ℓ1 against `Sup`, ℓ∞ against `Sum`, squared ℓ2 against `Euclid`.
    pub fn dual_norm(&self, kind: NormKind) -> Scalar {
        match kind {
            NormKind::Sup => self.coeffs.norm(NormKind::Sum),
            NormKind::Sum => self.coeffs.norm(NormKind::Sup),
            NormKind::Euclid => self.coeffs.norm(NormKind::Euclid),
        }
    }

    pub fn support(&self) -> impl Iterator<Item = Coord> + '_ {
        self.coeffs.support()
    }
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{:?}", self.coeffs)
    }
}

pub fn dual_pair(f: &Functional, v: &SparseVec) -> Scalar {
    f.pair(v)
}

pub fn norm(v: &SparseVec, kind: NormKind) -> Scalar {
    v.norm(kind)
}

pub fn dual_norm(f: &Functional, kind: NormKind) -> Scalar {
    f.dual_norm(kind)
}

/// Exact square root when `x` is the square of a rational.
pub fn exact_sqrt(x: &Scalar) -> Option<Scalar> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Scalar::new(n, d))
    } else {
        None
    }
}

/// Rational enclosure `lo ≤ √x ≤ hi` with `hi − lo ≤ precision`.
pub fn sqrt_enclosure(x: &Scalar, precision: &Scalar) -> (Scalar, Scalar) {
    assert!(!x.is_negative(), "square root of a negative value");
    assert!(precision.is_positive(), "precision must be positive");
    if let Some(r) = exact_sqrt(x) {
        return (r.clone(), r);
    }
    // Newton from above on a dyadic grid fine enough for the requested width.
    let mut bits = 0usize;
    while Scalar::new(BigInt::one(), BigInt::one() << bits) * int(4) > *precision {
        bits += 1;
    }
    let grid = BigInt::one() << bits;
    let round_up = |v: &Scalar| -> Scalar {
        let scaled = (v * Scalar::from_integer(grid.clone())).ceil();
        scaled / Scalar::from_integer(grid.clone())
    };
    let mut hi = round_up(&if x > &Scalar::one() { x.clone() } else { Scalar::one() });
    loop {
        let lo = x / &hi;
        if &hi - &lo <= *precision {
            return (lo, hi);
        }
        let next = round_up(&((&hi + &lo) / int(2)));
        if next >= hi {
            // Grid-limited; fall back to the conservative pair.
            return (lo, hi);
        }
        hi = next;
    }
}
