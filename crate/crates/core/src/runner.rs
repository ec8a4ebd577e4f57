//! Runs an [`Instance`] and produces a machine-readable [`Report`].

use serde::Serialize;
use serde_json::{json, Value};

use crate::converse::{
    evaluate_rev3, mond_pecaric_sup, operator_f_value, verify_converse, verify_lm, verify_rev0, verify_sub3,
    ConverseReport, Mode, ScalarBound,
};
use crate::error::{Error, Result};
use crate::generators::{random_field, rng_for, FieldShape, RNG_ALGORITHM};
use crate::hermitian::{loewner_leq_abs, ComparisonVerdict, HermitianMatrix, Tolerance};
use crate::instance::{matrix_to_json, Instance};
use crate::jensen::jensen_gap;
use crate::scalar::subdiff_default;
use crate::subdiff::{dk11_bounds, dk1_norm_bound, slater_bound, sub1_sandwich, Dk11Branch};

pub const KINDS: &[&str] = &[
    "jensen",
    "converse",
    "rev0",
    "rev3",
    "sub1",
    "sub3",
    "dk1",
    "dk11",
    "slater",
    "lm",
    "random-jensen",
    "random-converse",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub theorem_id: String,
    pub holds: bool,
    pub min_eig_or_slack: f64,
    pub tolerance: f64,
    pub seed: Option<u64>,
    pub paper_eq_tag: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Violated,
    Invalid,
    Precondition,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Holds => 0,
            Status::Violated => 1,
            Status::Invalid => 2,
            Status::Precondition => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub code: String,
    pub message: String,
}

impl ErrorRecord {
    pub fn from_error(e: &Error) -> Self {
        let debug = format!("{e:?}");
        let code = debug
            .split(|c: char| !c.is_alphanumeric())
            .next()
            .unwrap_or("Error")
            .to_string();
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub kind: String,
    pub status: Status,
    pub exit_code: i32,
    pub verdicts: Vec<VerdictRecord>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

impl Report {
    fn from_verdicts(kind: &str, verdicts: Vec<VerdictRecord>, details: Value) -> Self {
        let status = if verdicts.iter().all(|v| v.holds) {
            Status::Holds
        } else {
            Status::Violated
        };
        Self {
            kind: kind.to_string(),
            status,
            exit_code: status.exit_code(),
            verdicts,
            details,
            error: None,
        }
    }

    pub fn from_error(kind: &str, e: &Error) -> Self {
        let status = if e.is_precondition() {
            Status::Precondition
        } else {
            Status::Invalid
        };
        Self {
            kind: kind.to_string(),
            status,
            exit_code: status.exit_code(),
            verdicts: Vec::new(),
            details: Value::Null,
            error: Some(ErrorRecord::from_error(e)),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn record(id: &str, tag: &'static str, v: &ComparisonVerdict, seed: Option<u64>) -> VerdictRecord {
    VerdictRecord {
        theorem_id: id.to_string(),
        holds: v.holds,
        min_eig_or_slack: v.min_eig_of_difference,
        tolerance: v.tolerance,
        seed,
        paper_eq_tag: tag,
    }
}

fn matrix_value(a: &HermitianMatrix) -> Value {
    json!(matrix_to_json(a.as_matrix()))
}

fn bound_value(b: &ScalarBound) -> Value {
    json!({
        "value": b.value,
        "argmax_z": b.argmax_z,
        "mode": b.mode.to_string(),
        "grid_size": b.grid_size,
        "refined": b.refined,
    })
}

fn converse_details(r: &ConverseReport) -> Value {
    json!({"bound": bound_value(&r.bound), "evaluation": matrix_value(&r.evaluation)})
}

/// Parses and runs; parse errors become `invalid` reports.
pub fn run_json(text: &str, tol: &Tolerance, seed: Option<u64>) -> Report {
    match Instance::from_json(text) {
        Ok(inst) => run_instance(&inst, tol, seed),
        Err(e) => Report::from_error("unknown", &e),
    }
}

pub fn run_instance(inst: &Instance, tol: &Tolerance, seed: Option<u64>) -> Report {
    match dispatch(inst, tol, seed) {
        Ok((verdicts, details)) => Report::from_verdicts(&inst.kind, verdicts, details),
        Err(e) => Report::from_error(&inst.kind, &e),
    }
}

type Outcome = Result<(Vec<VerdictRecord>, Value)>;

fn dispatch(inst: &Instance, tol: &Tolerance, seed: Option<u64>) -> Outcome {
    match inst.kind.as_str() {
        "jensen" => run_jensen(inst, tol, seed),
        "converse" => {
            let field = inst.map_field()?;
            let r = verify_converse(&field, &inst.function()?, &inst.g_function()?, &inst.bivariate()?, tol)?;
            Ok((vec![record("converse", "OP7", &r.verdict, seed)], converse_details(&r)))
        }
        "lm" => {
            let field = inst.map_field()?;
            let r = verify_lm(&field, &inst.function()?, &inst.g_function()?, &inst.bivariate()?, tol)?;
            Ok((vec![record("lm", "LM", &r.verdict, seed)], converse_details(&r)))
        }
        "sub3" => {
            let field = inst.map_field()?;
            let y = inst.param(inst.params.y, "y")?;
            let r = verify_sub3(
                &field,
                &inst.function()?,
                &inst.g_function()?,
                &inst.bivariate()?,
                y,
                tol,
            )?;
            Ok((vec![record("sub3", "Sub4", &r.verdict, seed)], converse_details(&r)))
        }
        "rev0" => {
            let vf = inst.vector_field()?;
            let lambda = inst.param(inst.params.lambda, "lambda")?;
            let p = inst.param(inst.params.p, "p")?;
            let q = inst.param(inst.params.q, "q")?;
            let r = verify_rev0(&vf, lambda, p, q)?;
            Ok((
                vec![record("rev0", "Rev2", &r.verdict, seed)],
                json!({"lhs": r.lhs, "constant": r.bound}),
            ))
        }
        "rev3" => {
            let r = evaluate_rev3(&inst.rev3_points()?, inst.rev3_bounds()?, inst.rev3_params()?)?;
            if r.constant < 0.0 {
                return Err(Error::NegativeConstant(r.constant));
            }
            Ok((
                vec![
                    record("rev3", "Rev33", &r.verdict, seed),
                    record("rev3_intermediate", "Rev33", &r.intermediate_verdict, seed),
                ],
                json!({
                    "lhs": r.lhs,
                    "bound": r.bound,
                    "intermediate_bound": r.intermediate_bound,
                    "constant": r.constant,
                    "sandwich": [r.sandwich.0, r.sandwich.1],
                }),
            ))
        }
        "sub1" => {
            let field = inst.map_field()?;
            let f = inst.function()?;
            let (m, big_m) = field.interval();
            let k = f.subgradient_on(m, big_m)?;
            let x = inst.param(inst.params.x, "x")?;
            let y = inst.param(inst.params.y, "y")?;
            let r = sub1_sandwich(&field, &f, &k, x, y, tol)?;
            Ok((
                vec![
                    record("sub1_lower", "Sub2", &r.verdict_lower, seed),
                    record("sub1_upper", "Sub2", &r.verdict_upper, seed),
                ],
                json!({
                    "lower": matrix_value(&r.lower),
                    "middle": matrix_value(&r.middle),
                    "upper": matrix_value(&r.upper),
                    "x": r.x_used,
                    "y": r.y_used,
                }),
            ))
        }
        "dk1" => {
            let field = inst.map_field()?;
            let r = dk1_norm_bound(&field, &inst.function()?, &inst.norm()?, tol)?;
            let mut v = vec![
                record("dk1", "DK2", &r.verdict_general, seed),
                record("dk1_mass", "DK3", &r.verdict_mass, seed),
            ];
            if let Some(n) = &r.verdict_nonpositive {
                v.push(record("dk1_nonpositive", "DK3", n, seed));
            }
            Ok((
                v,
                json!({"lhs": matrix_value(&r.lhs), "rhs": matrix_value(&r.rhs_general)}),
            ))
        }
        "dk11" => {
            let field = inst.map_field()?;
            let f = inst.function()?;
            // evaluated at |int phi(x_t)|, which may lie outside [m, M]
            let k = subdiff_default(&f)?;
            let branch = match inst.params.branch.as_deref() {
                None | Some("convex") => Dk11Branch::Convex,
                Some("concave") => Dk11Branch::Concave,
                Some(other) => {
                    return Err(Error::Parse {
                        location: "params.branch".into(),
                        message: format!("unknown branch `{other}`"),
                    })
                }
            };
            let r = dk11_bounds(&field, &f, &k, &inst.norm()?, branch, tol)?;
            let tag = match branch {
                Dk11Branch::Convex => "DK21",
                Dk11Branch::Concave => "DK31",
            };
            Ok((vec![record("dk11", tag, &r.verdict, seed)], json!({"y": r.y})))
        }
        "slater" => {
            let field = inst.map_field()?;
            let f = inst.function()?;
            let (m, big_m) = field.interval();
            let k = f.subgradient_on(m, big_m)?;
            let r = slater_bound(&field, &f, &k, &inst.norm()?, tol)?;
            Ok((
                vec![record("slater", "Slater", &r.verdict, seed)],
                json!({"x": r.x, "bound": r.bound}),
            ))
        }
        "random-jensen" => run_random(inst, tol, seed, RandomKind::Jensen),
        "random-converse" => run_random(inst, tol, seed, RandomKind::Converse),
        other => Err(Error::Parse {
            location: "kind".into(),
            message: format!("unknown kind `{other}`; expected one of {}", KINDS.join(", ")),
        }),
    }
}

fn run_jensen(inst: &Instance, tol: &Tolerance, seed: Option<u64>) -> Outcome {
    let field = inst.map_field()?;
    let f = inst.function()?;
    let r = jensen_gap(&field, &f, tol)?;
    // Operator concave functions are checked in the reversed direction.
    let reversed = f.flags().operator_concave && !f.flags().operator_convex;
    let verdict = if reversed { &r.reverse } else { &r.verdict };
    Ok((
        vec![record("jensen", "OP6", verdict, seed)],
        json!({
            "lhs": matrix_value(&r.lhs),
            "rhs": matrix_value(&r.rhs),
            "gap_min_eig": r.gap_min_eig,
            "scale": r.scale,
            "direction": if reversed { "reversed" } else { "standard" },
        }),
    ))
}

#[derive(Clone, Copy)]
enum RandomKind {
    Jensen,
    Converse,
}

/// Generated batches: case `i` draws from stream `i` of the run seed. One
/// aggregate verdict is reported, carrying the worst slack.
fn run_random(inst: &Instance, tol: &Tolerance, seed: Option<u64>, kind: RandomKind) -> Outcome {
    let seed = seed.unwrap_or(0);
    let (m, big_m) = inst.interval()?;
    let f = inst.function()?;
    let count = inst.params.count.unwrap_or(50);
    let [dlo, dhi] = inst.params.dims.unwrap_or([2, 4]);
    let [plo, phi] = inst.params.points.unwrap_or([1, 3]);
    if count == 0 || dlo == 0 || dlo > dhi || plo == 0 || plo > phi {
        return Err(Error::InvalidParameter(
            "random batch needs count >= 1 and non-empty ranges".into(),
        ));
    }
    let shape = FieldShape {
        points: (plo, phi),
        dims: (dlo, dhi),
        kraus: (1, 2),
    };
    let (g, big_f, bound) = match kind {
        RandomKind::Jensen => (None, None, None),
        RandomKind::Converse => {
            let g = inst.g_function()?;
            let big_f = inst.bivariate()?;
            let b = mond_pecaric_sup(&f, &g, &big_f, m, big_m)?;
            (Some(g), Some(big_f), Some(b))
        }
    };
    let mut worst: Option<(u64, ComparisonVerdict)> = None;
    let mut failures = 0u64;
    for i in 0..count {
        let mut rng = rng_for(seed, i);
        let field = random_field(&mut rng, shape, m, big_m)?;
        let v = match kind {
            RandomKind::Jensen => {
                let r = jensen_gap(&field, &f, tol)?;
                let reversed = f.flags().operator_concave && !f.flags().operator_convex;
                if reversed {
                    r.reverse
                } else {
                    r.verdict
                }
            }
            RandomKind::Converse => {
                let (g, big_f) = (g.as_ref().unwrap(), big_f.as_ref().unwrap());
                let e = operator_f_value(&field, &f, g, big_f)?;
                let bound = bound.unwrap();
                let level = HermitianMatrix::scalar(e.dim(), bound.value);
                let scale = e.operator_norm()?.max(bound.value.abs());
                match bound.mode {
                    Mode::Sup => loewner_leq_abs(&e, &level, tol.absolute(scale))?,
                    Mode::Inf => loewner_leq_abs(&level, &e, tol.absolute(scale))?,
                }
            }
        };
        if !v.holds {
            failures += 1;
        }
        let slack = v.min_eig_of_difference + v.tolerance;
        if worst
            .as_ref()
            .is_none_or(|(_, w)| slack < w.min_eig_of_difference + w.tolerance)
        {
            worst = Some((i, v));
        }
    }
    let (worst_case, v) = worst.expect("count >= 1");
    let (id, tag) = match kind {
        RandomKind::Jensen => ("jensen_random", "OP6"),
        RandomKind::Converse => ("converse_random", "OP7"),
    };
    let mut agg = record(id, tag, &v, Some(seed));
    agg.holds = failures == 0;
    let mut details = json!({
        "count": count,
        "failures": failures,
        "worst_case": worst_case,
        "rng": RNG_ALGORITHM,
    });
    if let Some(b) = bound {
        details["bound"] = bound_value(&b);
    }
    Ok((vec![agg], details))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> Report {
        run_json(text, &Tolerance::default(), None)
    }

    const PINCHING_FIELD: &str = r#""interval": [1, 3],
        "field": {"points": [{"weight": 1,
            "kraus": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]],
            "datum": [[2, 1], [1, 2]]}]}"#;

    #[test]
    fn jensen_pinching_report() {
        let r = run(&format!(
            r#"{{"kind": "jensen", {PINCHING_FIELD}, "function": {{"name": "power", "params": [2]}}}}"#
        ));
        assert_eq!(r.status, Status::Holds);
        let v = &r.verdicts[0];
        assert_eq!(v.paper_eq_tag, "OP6");
        assert!((v.min_eig_or_slack - 1.0).abs() < 1e-12);
        assert!((r.details["gap_min_eig"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn every_fixed_kind_runs() {
        let f2 = r#""function": {"name": "power", "params": [2]}"#;
        let cases = [
            format!(r#"{{"kind": "converse", {PINCHING_FIELD}, {f2}, "F": {{"name": "diff"}}}}"#),
            format!(r#"{{"kind": "lm", {PINCHING_FIELD}, {f2}}}"#),
            format!(r#"{{"kind": "sub3", {PINCHING_FIELD}, {f2}, "params": {{"y": 2}}}}"#),
            format!(r#"{{"kind": "sub1", {PINCHING_FIELD}, {f2}, "params": {{"x": 2, "y": 2}}}}"#),
            format!(r#"{{"kind": "dk1", {PINCHING_FIELD}, {f2}, "params": {{"norm": {{"kind": "trace"}}}}}}"#),
            format!(r#"{{"kind": "dk11", {PINCHING_FIELD}, {f2}}}"#),
            r#"{"kind": "slater", "interval": [1, 3], "field": {"points": [
                {"weight": 0.5, "datum": [[1]]}, {"weight": 0.5, "datum": [[3]]}]}, "function": {"name": "power", "params": [2]}}"#.to_string(),
            r#"{"kind": "rev0", "interval": [1, 2], "field": {"points": [
                {"weight": 1, "operator": [[1, 0], [0, 2]], "vector": [1, 0]}]}, "params": {"lambda": 0, "p": 1, "q": 1}}"#.to_string(),
            r#"{"kind": "rev3", "field": {"points": [
                {"weight": 1, "a": [[1, 0], [0, 2]], "b": [[1, 0], [0, 1]], "vector": [[0.6, 0], [0, 0.8]]}]},
                "params": {"lambda": 0, "s": 2, "p": 2, "bounds": {"m1": 1, "M1": 2, "m2": 0.5, "M2": 1}}}"#.to_string(),
        ];
        for c in &cases {
            let r = run(c);
            assert_eq!(r.status, Status::Holds, "{c}\n{}", r.to_json_pretty());
        }
    }

    #[test]
    fn error_statuses() {
        let r = run(
            r#"{"kind": "jensen", "interval": [1, 3], "field": {"points": [{"weight": 1, "datum": [[1, 2], [3]]}]}, "function": {"name": "exp"}}"#,
        );
        assert_eq!(r.exit_code, 2);
        assert_eq!(r.error.as_ref().unwrap().code, "Parse");
        let r = run(
            r#"{"kind": "jensen", "interval": [1, 3], "field": {"points": [{"weight": 0.5, "datum": [[2]]}]}, "function": {"name": "exp"}}"#,
        );
        assert_eq!(r.exit_code, 3);
        assert_eq!(r.error.as_ref().unwrap().code, "NotUnital");
        let r = run(r#"{"kind": "teleport"}"#);
        assert_eq!(r.exit_code, 2);
    }

    #[test]
    fn random_batches_are_deterministic() {
        let text = r#"{"kind": "random-jensen", "interval": [0.5, 2], "function": {"name": "power", "params": [-1]},
            "params": {"count": 20, "dims": [2, 4], "points": [1, 3]}}"#;
        let a = run_json(text, &Tolerance::default(), Some(7));
        let b = run_json(text, &Tolerance::default(), Some(7));
        assert_eq!(a.status, Status::Holds);
        assert_eq!(a.to_json_pretty(), b.to_json_pretty());
        let text = r#"{"kind": "random-converse", "interval": [1, 3], "function": {"name": "power", "params": [2]},
            "params": {"count": 20}}"#;
        assert_eq!(run_json(text, &Tolerance::default(), Some(7)).status, Status::Holds);
    }
}
