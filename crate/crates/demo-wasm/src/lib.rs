//! Browser demo: three interactive operations exported to JavaScript. Each
//! returns a JSON string so the page needs no glue beyond `JSON.parse`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use opineq::converse::{mond_pecaric_sup, power_branch, power_constant, power_objective, BivariateSpec, PowerBranch};
use opineq::generators::{random_field, rng_for, FieldShape};
use opineq::hermitian::Tolerance;
use opineq::jensen::jensen_gap;
use opineq::scalar::{chord, grid, parse_function};

fn to_js(r: opineq::Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Jensen gap for `trials` random unital fields of the given dimension.
/// Reports each smallest eigenvalue of `int phi(f(x)) - f(int phi(x))`.
#[wasm_bindgen]
pub fn jensen_trials(f_spec: &str, m: f64, big_m: f64, dim: usize, trials: u32, seed: u32) -> String {
    to_js((|| {
        let f = parse_function(f_spec)?;
        let shape = FieldShape {
            points: (1, 3),
            dims: (dim, dim),
            kraus: (1, 2),
        };
        let tol = Tolerance::default();
        let mut gaps = Vec::with_capacity(trials as usize);
        let mut violations = 0;
        for t in 0..trials {
            let field = random_field(&mut rng_for(u64::from(seed), u64::from(t)), shape, m, big_m)?;
            let r = jensen_gap(&field, &f, &tol)?;
            violations += usize::from(!r.verdict.holds);
            gaps.push(r.gap_min_eig / r.scale);
        }
        Ok(json!({
            "function": f.name(),
            "operator_convex": f.flags().operator_convex,
            "gaps": gaps,
            "violations": violations,
        }))
    })())
}

/// `H(z)` sampled on `[m, M]`, with the closed-form constant and branch.
#[wasm_bindgen]
pub fn power_curve(lambda: f64, m: f64, big_m: f64, p: f64, q: f64, samples: usize) -> String {
    to_js((|| {
        let c = power_constant(lambda, m, big_m, p, q)?;
        let branch = match power_branch(lambda, m, big_m, p, q)? {
            PowerBranch::Upper => "upper",
            PowerBranch::Interior => "interior",
            PowerBranch::Lower => "lower",
        };
        let h = power_objective(lambda, m, big_m, p, q);
        let z: Vec<f64> = grid(m, big_m, samples.max(2)).collect();
        let values: Vec<f64> = z.iter().map(|&z| h(z)).collect();
        Ok(json!({ "constant": c, "branch": branch, "z": z, "h": values }))
    })())
}

/// `F[chord_f(z), g(z)]` sampled on `[m, M]` with its optimized extremum.
#[wasm_bindgen]
pub fn converse_curve(f_spec: &str, g_spec: &str, big_f: &str, m: f64, big_m: f64, samples: usize) -> String {
    to_js((|| {
        let f = parse_function(f_spec)?;
        let g = if g_spec.trim().is_empty() {
            f.clone()
        } else {
            parse_function(g_spec)?
        };
        let big_f = BivariateSpec::parse(big_f)?;
        let bound = mond_pecaric_sup(&f, &g, &big_f, m, big_m)?;
        let c = chord(&f, m, big_m)?;
        let z: Vec<f64> = grid(m, big_m, samples.max(2)).collect();
        let h: Vec<f64> = z.iter().map(|&z| big_f.eval(c.at(z), g.eval(z))).collect();
        Ok(json!({
            "value": bound.value,
            "argmax_z": bound.argmax_z,
            "mode": bound.mode.to_string(),
            "z": z,
            "h": h,
        }))
    })())
}
