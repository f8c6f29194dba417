//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns JSON text (or a flat number array) and reports
//! failures as a plain error string, so the same functions are callable
//! from native tests.

use serde_json::json;
use thetaseries::eval::{evaluate as eval_subject, Subject};
use thetaseries::identities::IdentityId;
use thetaseries::suite::{run_suite_untimed, RunConfig};
use thetaseries::{Complex, Nome, PrecisionContext};
use wasm_bindgen::prelude::*;

/// Precision for the theta heat map; plotting needs no more than f64.
const GRID_BITS: usize = 64;
/// Browser runs are single-threaded, so keep requests small.
const MAX_TRIALS: u32 = 50;
const MAX_GRID: usize = 400;

/// `[{"id", "anchor", "description"}, ...]` for every catalog entry.
#[wasm_bindgen]
pub fn catalog() -> String {
    let rows: Vec<_> = IdentityId::ALL
        .iter()
        .map(|id| {
            json!({
                "id": id.key(),
                "anchor": id.anchor(),
                "description": id.description(),
            })
        })
        .collect();
    serde_json::Value::Array(rows).to_string()
}

/// Evaluates `theta`, `qpfact`, `eseries` or `vseries` at whitespace
/// separated `key=value` arguments. Returns `{"re", "im"}` as decimal
/// strings.
#[wasm_bindgen]
pub fn evaluate(subject: &str, args: &str, prec_bits: usize) -> Result<String, String> {
    let ctx = PrecisionContext::with_bits(prec_bits).map_err(|e| e.to_string())?;
    let subject: Subject = subject
        .parse()
        .map_err(|e: thetaseries::Error| e.to_string())?;
    let args: Vec<String> = args.split_whitespace().map(str::to_string).collect();
    let v = eval_subject(subject, &args, &ctx).map_err(|e| e.to_string())?;
    let (re, im) = v.to_decimal(Some(40));
    Ok(json!({ "re": re, "im": im }).to_string())
}

/// `log10 |theta(x; p)|` on a `size` x `size` grid covering
/// `|Re x|, |Im x| <= radius`, row by row from the top left. Points where
/// theta vanishes or is undefined come back as NaN.
#[wasm_bindgen]
pub fn theta_grid(p_re: f64, p_im: f64, radius: f64, size: usize) -> Result<Vec<f64>, String> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(format!("radius must be positive, got {radius}"));
    }
    if !(2..=MAX_GRID).contains(&size) {
        return Err(format!("size must be in 2..={MAX_GRID}, got {size}"));
    }
    let ctx = PrecisionContext::with_bits(GRID_BITS).map_err(|e| e.to_string())?;
    let nome = Nome::from_f64(p_re, p_im, &ctx).map_err(|e| e.to_string())?;
    let step = 2.0 * radius / (size - 1) as f64;
    let mut out = Vec::with_capacity(size * size);
    for row in 0..size {
        let im = radius - row as f64 * step;
        for col in 0..size {
            let re = -radius + col as f64 * step;
            let x = Complex::from_f64(re, im, GRID_BITS);
            let v = match thetaseries::theta::theta(&x, &nome, &ctx) {
                Ok(t) if !t.is_zero() => t.log2_abs() * std::f64::consts::LOG10_2,
                _ => f64::NAN,
            };
            out.push(v);
        }
    }
    Ok(out)
}

/// Runs `trials` random checks of one identity (or `all`) and returns the
/// JSON report.
#[wasm_bindgen]
pub fn verify(identity: &str, trials: u32, seed: u32) -> Result<String, String> {
    if trials > MAX_TRIALS {
        return Err(format!("at most {MAX_TRIALS} trials in the browser"));
    }
    let cfg = RunConfig {
        trials,
        seed: seed.into(),
        workers: Some(1),
        ..RunConfig::new(identity).map_err(|e| e.to_string())?
    };
    run_suite_untimed(&cfg)
        .map(|r| r.to_json())
        .map_err(|e| e.to_string())
}
