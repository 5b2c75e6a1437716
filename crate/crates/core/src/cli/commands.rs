use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::report::{certificate_checks, Check, OracleReport, Report, Status};
use super::{Args, Command, Format, EXIT_INVARIANT, EXIT_OK};
use crate::error::{Error, Result};
use crate::extraction::{
    build_eps_tree, check_tree, eps_extreme, eps_strong_extreme, extract_c0_sequence, length_upper, one_sided_sequence,
    refine_almost_isometric, seeded_coefficients, validate_transcript, verify_basis_inequality,
};
use crate::indexes::{delta_curve, delta_curve_csv};
use crate::series::{unconditional_tail_bound, wuc_bound, SeriesSpec};
use crate::sets::{diameter, symmetrize, Certificate, SetExpr, SignMode, Space};
use crate::vectors::{int, scalar_to_string, NormKind, Scalar, SparseVec};

const TOOL: &str = "symdex";
const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Coefficient vectors drawn for the basis-inequality check in `extract`.
const MARGIN_VECTORS: usize = 100;
/// Largest number of one-sided points listed as membership checks.
const ONE_SIDED_REPLAY: usize = 256;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetRequest {
    set: SetExpr,
    #[serde(default)]
    norm: Option<NormKind>,
    #[serde(default)]
    x0: Option<SparseVec>,
    #[serde(default)]
    x: Option<SparseVec>,
    #[serde(default)]
    pool: Option<Vec<SparseVec>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SetInput {
    Wrapped(SetRequest),
    Bare(SetExpr),
}

impl SetInput {
    fn into_request(self) -> SetRequest {
        match self {
            SetInput::Wrapped(r) => r,
            SetInput::Bare(set) => SetRequest {
                set,
                norm: None,
                x0: None,
                x: None,
                pool: None,
            },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesRequest {
    series: SeriesSpec,
    #[serde(default)]
    mode: SignMode,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeriesInput {
    Wrapped(SeriesRequest),
    Bare(SeriesSpec),
}

struct Computed {
    status: Status,
    result: Value,
    replay: Vec<Check>,
    summary: String,
    csv: Option<String>,
}

impl Computed {
    fn ok(result: Value, replay: Vec<Check>, summary: String) -> Self {
        Computed {
            status: Status::Ok,
            result,
            replay,
            summary,
            csv: None,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn parse<T: for<'de> Deserialize<'de>>(raw: &Value, what: &str) -> Result<T> {
    T::deserialize(raw).map_err(|e| Error::invalid(format!("input is not a valid {what}: {e}")))
}

fn member(set: &SetExpr, point: &SparseVec) -> Check {
    Check::Contains {
        set: set.clone(),
        point: point.clone(),
        expected: true,
    }
}

/// Errors that are documented results of a procedure rather than failures.
fn is_outcome(e: &Error) -> bool {
    matches!(
        e,
        Error::ExtractionStalled { .. }
            | Error::NotAchievable { .. }
            | Error::NotFound { .. }
            | Error::TreeStalled { .. }
            | Error::Stalled { .. }
            | Error::Inconclusive
            | Error::NoCertificate { .. }
            | Error::Unbounded { .. }
    )
}

fn outcome_value(e: &Error) -> Value {
    let detail = match e {
        Error::ExtractionStalled { step, partial } => json!({"kind": "extraction_stalled", "step": step, "partial": to_value(partial)}),
        Error::NotAchievable {
            best,
            lower_certificate,
        } => json!({
            "kind": "not_achievable",
            "best_half_diameter": scalar_to_string(best),
            "lower_certificate": to_value(lower_certificate),
        }),
        Error::NotFound { best_ratio } => json!({"kind": "not_found", "best_ratio": scalar_to_string(best_ratio)}),
        Error::TreeStalled { node } => json!({"kind": "tree_stalled", "node": node}),
        Error::Stalled { step } => json!({"kind": "stalled", "step": step}),
        Error::Inconclusive => json!({"kind": "inconclusive"}),
        Error::NoCertificate { lambda } => json!({"kind": "no_certificate", "lambda": scalar_to_string(lambda)}),
        Error::Unbounded { norm } => json!({"kind": "unbounded", "norm": norm}),
        other => json!({"kind": "error", "message": other.to_string()}),
    };
    json!({"outcome": detail, "message": e.to_string()})
}

pub(super) fn execute(args: &Args) -> Result<(String, i32, String)> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", args.input.display())))?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| Error::invalid(format!("input is not JSON: {e}")))?;
    if args.command == Command::Oracle {
        return oracle(&raw);
    }
    if args.format == Format::Csv && args.command != Command::Delta {
        return Err(Error::invalid("csv output is available for the delta command only"));
    }
    let computed = match compute(args, &raw) {
        Ok(c) => c,
        Err(e) if is_outcome(&e) => Computed {
            status: Status::Outcome,
            result: outcome_value(&e),
            replay: outcome_replay(args, &raw, &e)?,
            summary: e.to_string(),
            csv: None,
        },
        Err(e) => return Err(e),
    };
    let code = if computed.status == Status::InvariantViolation {
        EXIT_INVARIANT
    } else {
        EXIT_OK
    };
    let body = match (&args.format, computed.csv) {
        (Format::Csv, Some(csv)) => csv,
        _ => {
            let report = Report {
                tool: TOOL.into(),
                version: VERSION.into(),
                request: json!({"command": args.command, "input": raw, "parameters": parameters(args)}),
                status: computed.status,
                result: computed.result,
                replay: computed.replay,
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    Ok((body, code, computed.summary))
}

fn parameters(args: &Args) -> Value {
    json!({
        "n": args.n,
        "epsilon": args.epsilon,
        "depth": args.depth,
        "strategy": args.strategy,
        "seed": args.seed,
        "budget": args.budget,
        "decimal": args.decimal,
        "norm": args.norm,
        "format": args.format,
    })
}

fn space_for(args: &Args, norm: Option<NormKind>) -> Result<Space> {
    let norm = args.norm_override()?.or(norm).unwrap_or(NormKind::Sup);
    let mut space = Space::new(norm).with_seed(args.seed);
    if let Some(b) = args.budget {
        space.sign_budget = b;
    }
    Ok(space)
}

fn set_request(args: &Args, raw: &Value) -> Result<(Space, SetRequest)> {
    let req = parse::<SetInput>(raw, "set description")?.into_request();
    req.set.validate()?;
    let space = space_for(args, req.norm)?;
    Ok((space, req))
}

fn compute(args: &Args, raw: &Value) -> Result<Computed> {
    match args.command {
        Command::Delta => delta(args, raw),
        Command::Extract => extract(args, raw),
        Command::Refine => refine(args, raw),
        Command::Tree => tree(args, raw),
        Command::Series => series(args, raw),
        Command::Extreme => extreme(args, raw),
        Command::OneSided => one_sided(args, raw),
        Command::Oracle => unreachable!("handled before dispatch"),
    }
}

fn bound_checks(norm: NormKind, set: &SetExpr, bound: &crate::sets::BoundPair, out: &mut Vec<Check>) {
    if let Some(cert) = &bound.lower_witness {
        certificate_checks(norm, set, cert, &norm.scale_gauge(&bound.lower, &int(2)), out);
    }
}

fn delta(args: &Args, raw: &Value) -> Result<Computed> {
    let (space, req) = set_request(args, raw)?;
    let n = args.n.unwrap_or(3);
    let curve = delta_curve(&space, &req.set, n, &args.search(req.pool))?;
    let mut replay = Vec::new();
    for row in &curve {
        for w in &row.upper_witnesses {
            replay.push(member(&req.set, w));
        }
        let d = symmetrize(&req.set, &row.upper_witnesses)?;
        bound_checks(space.norm, &d, &row.bound, &mut replay);
    }
    let summary = format!("delta: {} rows for N = 0..={n}", curve.len());
    Ok(Computed {
        csv: Some(delta_curve_csv(&curve, args.decimal)),
        ..Computed::ok(json!({"norm": space.norm, "curve": to_value(&curve)}), replay, summary)
    })
}

fn extract(args: &Args, raw: &Value) -> Result<Computed> {
    let (space, req) = set_request(args, raw)?;
    let eps = args.epsilon("1/10")?;
    let n = args.n.unwrap_or(4);
    let t = extract_c0_sequence(&space, &req.set, &eps, n, req.x0)?;
    let check = validate_transcript(&space, &t)?;
    let mut min_lower: Option<Scalar> = None;
    let mut min_upper: Option<Scalar> = None;
    let mut violations = 0usize;
    for coeffs in seeded_coefficients(args.seed, MARGIN_VECTORS, n) {
        let m = verify_basis_inequality(&t, &coeffs)?;
        if m.violated() {
            violations += 1;
        }
        min_lower = Some(min_lower.map_or(m.lower_margin.clone(), |x| x.min(m.lower_margin.clone())));
        if let Some(u) = m.upper_margin {
            min_upper = Some(min_upper.map_or(u.clone(), |x| x.min(u)));
        }
    }
    let norm = space.norm;
    let mut replay = Vec::new();
    let mut prev_set = t.base_set.clone();
    let mut prev_x = t.x0.clone();
    for (k, step) in t.steps.iter().enumerate() {
        replay.push(member(&step.set, &step.x));
        replay.push(member(&prev_set, &(&prev_x + &step.x)));
        replay.push(member(&prev_set, &(&prev_x - &step.x)));
        for earlier in &t.steps[..k] {
            replay.push(Check::PairEquals {
                functional: step.f.clone(),
                point: earlier.x.clone(),
                value: Scalar::from_integer(0.into()),
            });
        }
        replay.push(Check::DualNormEquals {
            norm,
            functional: step.f.clone(),
            value: int(1),
        });
        if let Some(u) = &step.sup.upper {
            replay.push(Check::PairAbove {
                functional: step.f.clone(),
                point: step.x.clone(),
                bound: u - &t.eta,
            });
        }
        replay.push(Check::PairAbove {
            functional: step.f.clone(),
            point: step.x.clone(),
            bound: length_upper(norm, &step.delta_lower) - &t.eta * int(2),
        });
        prev_set = step.set.clone();
        prev_x = step.x.clone();
    }
    for (label, value) in [("min lower margin", &min_lower), ("min upper margin", &min_upper)] {
        if let Some(v) = value {
            replay.push(Check::NonNegative {
                label: label.into(),
                value: v.clone(),
            });
        }
    }
    let status = if check.passed() && violations == 0 {
        Status::Ok
    } else {
        Status::InvariantViolation
    };
    let opt = |x: &Option<Scalar>| x.as_ref().map(scalar_to_string);
    let result = json!({
        "transcript": to_value(&t),
        "validation": to_value(&check),
        "margins": {
            "vectors": MARGIN_VECTORS,
            "seed": args.seed,
            "min_lower": opt(&min_lower),
            "min_upper": opt(&min_upper),
            "violations": violations,
        },
    });
    let summary = format!("extract: {n} steps, {violations} margin violations");
    Ok(Computed {
        status,
        ..Computed::ok(result, replay, summary)
    })
}

fn refine(args: &Args, raw: &Value) -> Result<Computed> {
    let (space, req) = set_request(args, raw)?;
    let eps = args.epsilon("1/10")?;
    let r = refine_almost_isometric(&space, &req.set, &eps, &args.search(req.pool), args.n.unwrap_or(3))?;
    let mut replay: Vec<Check> = r.witnesses.iter().map(|w| member(&req.set, w)).collect();
    bound_checks(space.norm, &r.set, &r.delta0, &mut replay);
    let summary = format!("refine: ratio {} with {} witnesses", r.ratio, r.witnesses.len());
    Ok(Computed::ok(json!({"refinement": to_value(&r)}), replay, summary))
}

fn tree(args: &Args, raw: &Value) -> Result<Computed> {
    let (space, req) = set_request(args, raw)?;
    let eps = args.epsilon("1")?;
    let t = build_eps_tree(&space, &req.set, &eps, args.depth.unwrap_or(3))?;
    let check = check_tree(&req.set, &t)?;
    let mut replay: Vec<Check> = t.nodes.iter().map(|x| member(&req.set, x)).collect();
    let floor = space.norm.gauge(&(&eps * int(2)));
    for n in 1..=t.internal_count() {
        replay.push(Check::Midpoint {
            parent: t.node(n).clone(),
            left: t.node(2 * n).clone(),
            right: t.node(2 * n + 1).clone(),
        });
        replay.push(Check::NormAtLeast {
            norm: space.norm,
            point: t.node(2 * n + 1) - t.node(2 * n),
            bound: floor.clone(),
        });
    }
    let status = if check.passed() { Status::Ok } else { Status::InvariantViolation };
    let summary = format!("tree: {} nodes", t.nodes.len());
    Ok(Computed {
        status,
        ..Computed::ok(json!({"tree": to_value(&t), "laws": to_value(&check)}), replay, summary)
    })
}

fn series_request(args: &Args, raw: &Value) -> Result<(Space, SeriesSpec, SignMode)> {
    let (mut s, mode) = match parse::<SeriesInput>(raw, "series description")? {
        SeriesInput::Wrapped(r) => (r.series, r.mode),
        SeriesInput::Bare(s) => (s, SignMode::Subsets),
    };
    s.validate()?;
    if let Some(norm) = args.norm_override()? {
        s.norm = norm;
    }
    let space = space_for(args, Some(s.norm))?;
    Ok((space, s, mode))
}

fn series(args: &Args, raw: &Value) -> Result<Computed> {
    let (space, s, mode) = series_request(args, raw)?;
    let eps = args.epsilon("1/8")?;
    let wuc = wuc_bound(&s)?;
    let tail = unconditional_tail_bound(&space, &s, &eps, mode, &args.search(None), args.n.unwrap_or(1))?;
    let a = crate::series::sign_sum_set(&s, mode);
    let mut replay: Vec<Check> = tail.witnesses.iter().map(|w| member(&a, w)).collect();
    let threshold = s.norm.gauge(&eps);
    for r in &tail.replay {
        replay.push(Check::SignSupEquals {
            norm: s.norm,
            terms: s.terms[r.from - 1..r.to].to_vec(),
            value: r.sup.clone(),
        });
        replay.push(Check::NonNegative {
            label: format!("epsilon minus tail sup over [{}, {}]", r.from, r.to),
            value: &threshold - &r.sup,
        });
    }
    let result = json!({
        "horizon": s.horizon(),
        "scope": "all statements hold within the horizon",
        "wuc_bound": scalar_to_string(&wuc),
        "tail": to_value(&tail),
    });
    let summary = format!("series: M = {}", tail.m);
    Ok(Computed::ok(result, replay, summary))
}

fn extreme(args: &Args, raw: &Value) -> Result<Computed> {
    let (space, req) = set_request(args, raw)?;
    let eps = args.epsilon("1/10")?;
    let x = req.x.clone().ok_or_else(|| Error::invalid("extreme needs a point \"x\""))?;
    let plain = eps_extreme(&space, &req.set, &x, &eps)?;
    let strong = match &req.set {
        SetExpr::FinitePoints { .. } => {
            let (holds, delta) = eps_strong_extreme(&space, &req.set, &x, &eps)?;
            json!({"holds": holds, "delta": scalar_to_string(&delta), "squared": space.norm.is_squared()})
        }
        _ => Value::Null,
    };
    let mut replay = vec![member(&req.set, &x)];
    let d = symmetrize(&req.set, std::slice::from_ref(&x))?;
    let diam = diameter(&space, &d)?;
    if let Some(cert) = &diam.lower_witness {
        certificate_checks(space.norm, &d, cert, &diam.lower, &mut replay);
    }
    let result = json!({
        "x": to_value(&x),
        "epsilon": scalar_to_string(&eps),
        "eps_extreme": plain,
        "symmetrized_diameter": to_value(&diam),
        "eps_strong_extreme": strong,
    });
    Ok(Computed::ok(result, replay, format!("extreme: {plain}")))
}

fn one_sided(args: &Args, raw: &Value) -> Result<Computed> {
    let (space, req) = set_request(args, raw)?;
    let eps = args.epsilon("1")?;
    let r = one_sided_sequence(&space, &req.set, &eps, args.n.unwrap_or(4))?;
    let floor = space.norm.gauge(&eps);
    let mut replay: Vec<Check> = r
        .sequence
        .iter()
        .map(|x| Check::NormAtLeast {
            norm: space.norm,
            point: x.clone(),
            bound: floor.clone(),
        })
        .collect();
    let mut points = vec![r.x0.clone()];
    for x in &r.sequence {
        let shifted: Vec<SparseVec> = points.iter().map(|p| p + x).collect();
        points.extend(shifted);
        if points.len() >= ONE_SIDED_REPLAY {
            break;
        }
    }
    replay.extend(points.iter().take(ONE_SIDED_REPLAY).map(|p| member(&req.set, p)));
    let status = if r.differences_verified {
        Status::Ok
    } else {
        Status::InvariantViolation
    };
    let summary = format!("one_sided: {} steps", r.sequence.len());
    Ok(Computed {
        status,
        ..Computed::ok(json!({"one_sided": to_value(&r)}), replay, summary)
    })
}

/// Replays for documented outcomes: the free direction behind a sign-sum
/// lower bound, otherwise nothing.
fn outcome_replay(args: &Args, raw: &Value, e: &Error) -> Result<Vec<Check>> {
    let Error::NotAchievable {
        lower_certificate: Some(lower),
        ..
    } = e
    else {
        return Ok(Vec::new());
    };
    if args.command != Command::Series {
        return Ok(Vec::new());
    }
    let (_, s, mode) = series_request(args, raw)?;
    let Some(Certificate::FreshSeriesIndex { min_norm, .. }) = &lower.lower_certificate else {
        return Ok(Vec::new());
    };
    let a = crate::series::sign_sum_set(&s, mode);
    let zero = SparseVec::zero();
    let d = symmetrize(&a, std::slice::from_ref(&zero))?;
    let last = s.terms.last().expect("validated horizon").clone();
    Ok(vec![
        member(&d, &last),
        member(&d, &-&last),
        Check::NormAtLeast {
            norm: s.norm,
            point: last,
            bound: min_norm.clone(),
        },
    ])
}

fn oracle(raw: &Value) -> Result<(String, i32, String)> {
    let report: Report = parse(raw, "report")?;
    let mut failures = Vec::new();
    for (k, check) in report.replay.iter().enumerate() {
        match check.holds() {
            Ok(true) => {}
            Ok(false) => failures.push(k),
            Err(e) if e.is_budget() => failures.push(k),
            Err(e) => return Err(e),
        }
    }
    let checked = report.replay.len();
    let out = OracleReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        checked,
        passed: checked - failures.len(),
        failures,
        status_of_source: report.status,
    };
    let code = if out.failures.is_empty() { EXIT_OK } else { EXIT_INVARIANT };
    let mut body = serde_json::to_string_pretty(&out).expect("oracle report serializes");
    body.push('\n');
    let summary = format!("oracle: {}/{} checks hold", out.passed, out.checked);
    Ok((body, code, summary))
}
