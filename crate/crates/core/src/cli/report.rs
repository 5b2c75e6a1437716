use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::series::{brute_tail_sup, SeriesSpec};
use crate::sets::{contains, Certificate, SetExpr};
use crate::vectors::{int, max_support, scalar_serde, Functional, NormKind, Scalar, SparseVec};

/// Whether the computation produced its primary result, a documented
/// mathematical outcome (a stall, an unattainable bound), or found a
/// violated invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Outcome,
    InvariantViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub request: serde_json::Value,
    pub status: Status,
    pub result: serde_json::Value,
    /// Checks that re-verify the result with membership calls and exact
    /// arithmetic only.
    pub replay: Vec<Check>,
}

/// One replayable claim. Norm bounds are in the norm's gauge (squared under
/// EUCLID).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    Contains {
        set: SetExpr,
        point: SparseVec,
        expected: bool,
    },
    NormAtLeast {
        norm: NormKind,
        point: SparseVec,
        #[serde(with = "scalar_serde")]
        bound: Scalar,
    },
    NormAtMost {
        norm: NormKind,
        point: SparseVec,
        #[serde(with = "scalar_serde")]
        bound: Scalar,
    },
    NormEquals {
        norm: NormKind,
        point: SparseVec,
        #[serde(with = "scalar_serde")]
        value: Scalar,
    },
    PairEquals {
        functional: Functional,
        point: SparseVec,
        #[serde(with = "scalar_serde")]
        value: Scalar,
    },
    PairAbove {
        functional: Functional,
        point: SparseVec,
        #[serde(with = "scalar_serde")]
        bound: Scalar,
    },
    DualNormEquals {
        norm: NormKind,
        functional: Functional,
        #[serde(with = "scalar_serde")]
        value: Scalar,
    },
    Midpoint {
        parent: SparseVec,
        left: SparseVec,
        right: SparseVec,
    },
    /// `max_θ ‖Σ θ_n x_n‖` over the listed terms equals `value`.
    SignSupEquals {
        norm: NormKind,
        terms: Vec<SparseVec>,
        #[serde(with = "scalar_serde")]
        value: Scalar,
    },
    NonNegative {
        label: String,
        #[serde(with = "scalar_serde")]
        value: Scalar,
    },
}

impl Check {
    pub fn holds(&self) -> Result<bool> {
        Ok(match self {
            Check::Contains { set, point, expected } => contains(set, point)? == *expected,
            Check::NormAtLeast { norm, point, bound } => point.norm(*norm) >= *bound,
            Check::NormAtMost { norm, point, bound } => point.norm(*norm) <= *bound,
            Check::NormEquals { norm, point, value } => point.norm(*norm) == *value,
            Check::PairEquals { functional, point, value } => functional.pair(point) == *value,
            Check::PairAbove { functional, point, bound } => functional.pair(point) > *bound,
            Check::DualNormEquals { norm, functional, value } => functional.dual_norm(*norm) == *value,
            Check::Midpoint { parent, left, right } => (&(left + right) - &parent.scale(&int(2))).is_zero(),
            Check::SignSupEquals { norm, terms, value } => {
                let s = SeriesSpec::new(*norm, terms.clone(), "replay");
                brute_tail_sup(&s, 1, terms.len())? == *value
            }
            Check::NonNegative { value, .. } => !value.is_negative(),
        })
    }
}

/// Membership checks behind one bound certificate on a set.
pub fn certificate_checks(norm: NormKind, set: &SetExpr, cert: &Certificate, length: &Scalar, out: &mut Vec<Check>) {
    match cert {
        Certificate::MemberPair { a, b } => {
            for p in [a, b] {
                out.push(Check::Contains {
                    set: set.clone(),
                    point: p.clone(),
                    expected: true,
                });
            }
            out.push(Check::NormAtLeast {
                norm,
                point: a - b,
                bound: length.clone(),
            });
        }
        Certificate::Member { point } => out.push(Check::Contains {
            set: set.clone(),
            point: point.clone(),
            expected: true,
        }),
        Certificate::FreshCoordinate { radius, .. } => {
            let m = set.max_universe().max(max_support(set_witnesses(set))) + 1;
            let d = SparseVec::single(m, radius.clone());
            for p in [d.clone(), -&d] {
                out.push(Check::Contains {
                    set: set.clone(),
                    point: p,
                    expected: true,
                });
            }
        }
        Certificate::SeparatedFamily { points, .. } => {
            for p in points {
                out.push(Check::Contains {
                    set: set.clone(),
                    point: p.clone(),
                    expected: true,
                });
            }
        }
        _ => {}
    }
}

fn set_witnesses(set: &SetExpr) -> &[SparseVec] {
    match set {
        SetExpr::Symmetrized { witnesses, .. } => witnesses,
        _ => &[],
    }
}

/// Outcome of the `oracle` command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub tool: String,
    pub version: String,
    pub checked: usize,
    pub passed: usize,
    /// Indices into the report's replay list that did not hold.
    pub failures: Vec<usize>,
    pub status_of_source: Status,
}
