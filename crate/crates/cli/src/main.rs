//! `opineq`: verify instances, compute scalar bounds, search for Jensen
//! violations and run corpus suites.
//!
//! Exit codes: 0 holds (or bound computed / witness found), 1 violated,
//! 2 invalid input, 3 precondition unmet, 4 no witness within budget.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use opineq::converse::{
    li_mathias_inf, mond_pecaric_sup, power_branch, power_constant, sub3_inf, BivariateSpec, PowerBranch, ScalarBound,
};
use opineq::generators::{falsify_jensen, FalsifyConfig, RNG_ALGORITHM};
use opineq::hermitian::Tolerance;
use opineq::instance::Instance;
use opineq::runner::{run_instance, Report, Status};
use opineq::scalar::parse_function;
use opineq::Error;

const EXIT_NOT_FOUND: u8 = 4;

#[derive(Parser)]
#[command(
    name = "opineq",
    version,
    about = "Jensen's operator inequality: verification, bounds, falsification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one JSON instance.
    Verify(VerifyArgs),
    /// Compute a scalar bound.
    Bound {
        #[command(subcommand)]
        which: BoundCommand,
    },
    /// Random search for a unital field violating Jensen's inequality for f.
    Falsify(FalsifyArgs),
    /// Run every `*.json` case in a directory.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    Jensen,
    Converse,
    Rev0,
    Rev3,
    Sub1,
    Sub3,
    Dk1,
    Dk11,
    Slater,
    Lm,
}

impl VerifyKind {
    fn name(self) -> &'static str {
        match self {
            VerifyKind::Jensen => "jensen",
            VerifyKind::Converse => "converse",
            VerifyKind::Rev0 => "rev0",
            VerifyKind::Rev3 => "rev3",
            VerifyKind::Sub1 => "sub1",
            VerifyKind::Sub3 => "sub3",
            VerifyKind::Dk1 => "dk1",
            VerifyKind::Dk11 => "dk11",
            VerifyKind::Slater => "slater",
            VerifyKind::Lm => "lm",
        }
    }
}

#[derive(Args)]
struct Output {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compact single-line JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    kind: VerifyKind,
    #[arg(long)]
    input: PathBuf,
    /// Relative tolerance (default 1e-8, or OPINEQ_TOL).
    #[arg(long)]
    tol: Option<f64>,
    /// Seed recorded in the report (and used by `random-*` instances).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ScalarArgs {
    #[arg(long = "f")]
    f: String,
    /// Defaults to f.
    #[arg(long = "g")]
    g: Option<String>,
    /// `diff[:lambda]`, `ratio`, `probe:q,lambda` or `affine:a,b,c`.
    #[arg(long = "F", default_value = "diff")]
    big_f: String,
    #[arg(long = "m", allow_hyphen_values = true)]
    m: f64,
    #[arg(long = "M", allow_hyphen_values = true)]
    big_m: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum BoundCommand {
    /// sup over [m, M] of F[chord of f, g] (inf for concave f).
    MpSup(ScalarArgs),
    /// inf over [m, M] of F[f, g] for operator convex f.
    LmInf(ScalarArgs),
    /// inf over [m, M] of F[tangent of f at y, g].
    Sub3Inf {
        #[command(flatten)]
        args: ScalarArgs,
        #[arg(long = "y", allow_hyphen_values = true)]
        y: f64,
    },
    /// The power constant C(lambda, m, M, p, q).
    PowerC {
        #[arg(long)]
        lambda: f64,
        #[arg(long = "m")]
        m: f64,
        #[arg(long = "M")]
        big_m: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct FalsifyArgs {
    #[arg(long = "f")]
    f: String,
    #[arg(long = "m", allow_hyphen_values = true)]
    m: f64,
    #[arg(long = "M", allow_hyphen_values = true)]
    big_m: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inclusive dimension range `lo,hi`.
    #[arg(long, default_value = "2,4")]
    dims: String,
    /// Write the witness instance here (replay with `verify jensen`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SuiteArgs {
    corpus: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the aggregate report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    json: bool,
}

fn tolerance(flag: Option<f64>) -> Result<Tolerance, String> {
    let rel = match flag {
        Some(t) => t,
        None => match std::env::var("OPINEQ_TOL") {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("OPINEQ_TOL=`{s}` is not a number"))?,
            Err(_) => Tolerance::default().rel,
        },
    };
    if rel.is_nan() || rel < 0.0 || rel.is_infinite() {
        return Err(format!("tolerance {rel} must be finite and >= 0"));
    }
    Ok(Tolerance::new(rel))
}

fn render(value: &impl Serialize, compact: bool) -> String {
    let mut s = if compact {
        serde_json::to_string(value)
    } else {
        serde_json::to_string_pretty(value)
    }
    .expect("report serializes");
    s.push('\n');
    s
}

fn emit(value: &impl Serialize, out: Option<&Path>, compact: bool) -> Result<(), String> {
    let text = render(value, compact);
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn invalid(kind: &str, message: String) -> Report {
    Report::from_error(
        kind,
        &Error::Parse {
            location: "input".into(),
            message,
        },
    )
}

fn cmd_verify(args: VerifyArgs) -> u8 {
    let kind = args.kind.name();
    let report = match (tolerance(args.tol), fs::read_to_string(&args.input)) {
        (Err(msg), _) => invalid(kind, msg),
        (_, Err(e)) => invalid(kind, format!("cannot read {}: {e}", args.input.display())),
        (Ok(tol), Ok(text)) => match Instance::from_json(&text) {
            Err(e) => Report::from_error(kind, &e),
            Ok(inst) if inst.kind != kind && inst.kind != format!("random-{kind}") => invalid(
                kind,
                format!("instance kind `{}` does not match subcommand `{kind}`", inst.kind),
            ),
            Ok(inst) => run_instance(&inst, &tol, args.seed),
        },
    };
    finish(
        &report,
        report.exit_code as u8,
        args.output.out.as_deref(),
        args.output.json,
    )
}

fn finish(value: &impl Serialize, code: u8, out: Option<&Path>, compact: bool) -> u8 {
    match emit(value, out, compact) {
        Ok(()) => code,
        Err(msg) => {
            eprintln!("opineq: {msg}");
            2
        }
    }
}

fn error_json(e: &Error) -> Value {
    json!({"error": {"message": e.to_string()}})
}

fn bound_json(b: &ScalarBound) -> Value {
    json!({
        "value": b.value,
        "argmax_z": b.argmax_z,
        "mode": b.mode.to_string(),
        "grid_size": b.grid_size,
        "refined": b.refined,
    })
}

fn scalar_bound(args: &ScalarArgs, which: &str, y: Option<f64>) -> Result<ScalarBound, Error> {
    let f = parse_function(&args.f)?;
    let g = match &args.g {
        Some(g) => parse_function(g)?,
        None => f.clone(),
    };
    let big_f = BivariateSpec::parse(&args.big_f)?;
    match which {
        "mp-sup" => mond_pecaric_sup(&f, &g, &big_f, args.m, args.big_m),
        "lm-inf" => li_mathias_inf(&f, &g, &big_f, args.m, args.big_m),
        _ => {
            let k = f.subgradient_on(args.m, args.big_m)?;
            sub3_inf(&f, &g, &big_f, y.unwrap_or(args.m), args.m, args.big_m, &k)
        }
    }
}

fn cmd_bound(which: BoundCommand) -> u8 {
    let (result, output) = match &which {
        BoundCommand::MpSup(a) => (scalar_bound(a, "mp-sup", None).map(|b| bound_json(&b)), &a.output),
        BoundCommand::LmInf(a) => (scalar_bound(a, "lm-inf", None).map(|b| bound_json(&b)), &a.output),
        BoundCommand::Sub3Inf { args, y } => (
            scalar_bound(args, "sub3-inf", Some(*y)).map(|b| bound_json(&b)),
            &args.output,
        ),
        BoundCommand::PowerC {
            lambda,
            m,
            big_m,
            p,
            q,
            output,
        } => {
            let r = power_constant(*lambda, *m, *big_m, *p, *q).and_then(|c| {
                let branch = match power_branch(*lambda, *m, *big_m, *p, *q)? {
                    PowerBranch::Upper => "upper",
                    PowerBranch::Interior => "interior",
                    PowerBranch::Lower => "lower",
                };
                Ok(json!({"value": c, "branch": branch}))
            });
            (r, output)
        }
    };
    match result {
        Ok(v) => finish(&v, 0, output.out.as_deref(), output.json),
        Err(e) => finish(&error_json(&e), 2, output.out.as_deref(), output.json),
    }
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad dimension range `{s}`"))
    };
    match parts.as_slice() {
        [d] => Ok((parse(d)?, parse(d)?)),
        [lo, hi] => Ok((parse(lo)?, parse(hi)?)),
        _ => Err(format!("bad dimension range `{s}`")),
    }
}

fn cmd_falsify(args: FalsifyArgs) -> u8 {
    let run = || -> Result<(Value, u8), Error> {
        let f = parse_function(&args.f)?;
        let dims = parse_dims(&args.dims).map_err(Error::InvalidParameter)?;
        let cfg = FalsifyConfig {
            trials: args.trials,
            seed: args.seed,
            dims,
            interval: (args.m, args.big_m),
        };
        let r = falsify_jensen(&f, &cfg)?;
        let mut v = json!({
            "found": r.found,
            "trial": r.trial,
            "trials_run": r.trials_run,
            "min_gap_seen": r.min_gap_seen,
            "seed": args.seed,
            "rng": RNG_ALGORITHM,
            "function": f.name(),
        });
        match &r.witness {
            Some(w) => {
                let inst = Instance::jensen_witness(w, &f);
                if let Some(path) = &args.out {
                    fs::write(path, inst.to_json_pretty() + "\n")
                        .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))?;
                    v["witness_path"] = json!(path.display().to_string());
                } else {
                    v["witness"] = serde_json::to_value(&inst).expect("instance serializes");
                }
                Ok((v, 0))
            }
            None => Ok((v, EXIT_NOT_FOUND)),
        }
    };
    match run() {
        Ok((v, code)) => finish(&v, code, None, args.json),
        Err(e) => finish(&error_json(&e), 2, None, args.json),
    }
}

#[derive(Serialize)]
struct SuiteCase {
    name: String,
    report: Report,
}

#[derive(Serialize, Default)]
struct SuiteCounts {
    total: usize,
    holds: usize,
    violated: usize,
    invalid: usize,
    precondition: usize,
}

#[derive(Serialize)]
struct WorstSlack {
    case: String,
    theorem_id: String,
    slack: f64,
}

#[derive(Serialize)]
struct SuiteReport {
    seed: u64,
    rng: &'static str,
    tolerance: f64,
    all_pass: bool,
    counts: SuiteCounts,
    /// Smallest `min_eig_or_slack + tolerance` over all verdicts.
    worst_slack: Option<WorstSlack>,
    failed: Vec<String>,
    cases: Vec<SuiteCase>,
}

fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let entries = fs::read_dir(dir).map_err(|e| format!("cannot read corpus {}: {e}", dir.display()))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(format!("corpus {} has no *.json cases", dir.display()));
    }
    Ok(files)
}

fn cmd_suite(args: SuiteArgs) -> u8 {
    let (tol, files) = match (tolerance(args.tol), corpus_files(&args.corpus)) {
        (Ok(t), Ok(f)) => (t, f),
        (Err(msg), _) | (_, Err(msg)) => {
            eprintln!("opineq: {msg}");
            return 2;
        }
    };
    let cases: Vec<SuiteCase> = files
        .par_iter()
        .map(|path| {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let report = match fs::read_to_string(path) {
                Ok(text) => match Instance::from_json(&text) {
                    Ok(inst) => run_instance(&inst, &tol, Some(args.seed)),
                    Err(e) => Report::from_error("unknown", &e),
                },
                Err(e) => invalid("unknown", format!("cannot read {}: {e}", path.display())),
            };
            SuiteCase { name, report }
        })
        .collect();

    let mut counts = SuiteCounts {
        total: cases.len(),
        ..SuiteCounts::default()
    };
    let mut worst: Option<WorstSlack> = None;
    let mut failed = Vec::new();
    for c in &cases {
        match c.report.status {
            Status::Holds => counts.holds += 1,
            Status::Violated => counts.violated += 1,
            Status::Invalid => counts.invalid += 1,
            Status::Precondition => counts.precondition += 1,
        }
        if c.report.status != Status::Holds {
            failed.push(c.name.clone());
        }
        for v in &c.report.verdicts {
            let slack = v.min_eig_or_slack + v.tolerance;
            if worst.as_ref().is_none_or(|w| slack < w.slack) {
                worst = Some(WorstSlack {
                    case: c.name.clone(),
                    theorem_id: v.theorem_id.clone(),
                    slack,
                });
            }
        }
    }
    let code = if counts.violated > 0 {
        1
    } else if counts.invalid > 0 {
        2
    } else if counts.precondition > 0 {
        3
    } else {
        0
    };
    let report = SuiteReport {
        seed: args.seed,
        rng: RNG_ALGORITHM,
        tolerance: tol.rel,
        all_pass: code == 0,
        counts,
        worst_slack: worst,
        failed,
        cases,
    };
    finish(&report, code, args.report.as_deref(), args.json)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Bound { which } => cmd_bound(which),
        Command::Falsify(a) => cmd_falsify(a),
        Command::Suite(a) => cmd_suite(a),
    };
    ExitCode::from(code)
}
