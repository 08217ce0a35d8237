//! WebAssembly bindings for the browser demo in `www/`. Every entry point
//! takes plain values and returns a JSON string.

use doublepole::identities::{lookup, registry, Params};
use doublepole::nahm::{d_series, NahmSpec, WMode};
use doublepole::series::QSeries;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest order the page may ask for; keeps a click under a second or so.
const MAX_ORDER: usize = 120;

#[derive(Serialize)]
struct Case {
    id: &'static str,
    summary: &'static str,
    params: Vec<&'static str>,
}

#[derive(Deserialize, Default)]
struct ParamsIn {
    k: Option<usize>,
    i: Option<usize>,
    t: Option<usize>,
    s: Option<usize>,
    m: Option<usize>,
    w: Option<String>,
}

#[derive(Serialize)]
struct Comparison {
    id: String,
    params: String,
    order: usize,
    grain: u32,
    status: &'static str,
    first_mismatch: Option<usize>,
    lhs: Vec<String>,
    rhs: Vec<String>,
}

#[derive(Serialize)]
struct Coefficients {
    t: usize,
    s: usize,
    w: String,
    grain: u32,
    coefficients: Vec<String>,
}

fn coefficients(s: &QSeries) -> Vec<String> {
    s.coeffs().iter().map(|c| c.to_string()).collect()
}

fn parse_w(w: &str) -> Result<WMode, String> {
    w.parse().map_err(|e| format!("{e}"))
}

fn check_order(order: usize) -> Result<(), String> {
    if order == 0 || order > MAX_ORDER {
        return Err(format!("order must be between 1 and {MAX_ORDER}"));
    }
    Ok(())
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("serializable")
}

pub fn list_json() -> String {
    let cases: Vec<Case> = registry()
        .iter()
        .map(|c| Case {
            id: c.id,
            summary: c.summary,
            params: c.keys.iter().map(|k| k.name()).collect(),
        })
        .collect();
    to_json(&cases)
}

pub fn compare_json(id: &str, params: &str, order: usize) -> Result<String, String> {
    check_order(order)?;
    let raw: ParamsIn = if params.trim().is_empty() {
        ParamsIn::default()
    } else {
        serde_json::from_str(params).map_err(|e| format!("bad parameter object: {e}"))?
    };
    let mut p = Params::new();
    p.k = raw.k;
    p.i = raw.i;
    p.t = raw.t;
    p.s = raw.s;
    p.m = raw.m;
    p.w = raw.w.as_deref().map(parse_w).transpose()?;
    // `verify` times itself, and std's clock is unavailable on wasm32
    let case = lookup(id).map_err(|e| e.to_string())?;
    let p = case.resolve(&p).map_err(|e| e.to_string())?;
    let (lhs, rhs) = case.sides(&p, order).map_err(|e| e.to_string())?;
    let first_mismatch = lhs
        .first_mismatch(&rhs)
        .map_err(|e| e.to_string())?
        .map(|m| m.exponent);
    Ok(to_json(&Comparison {
        id: case.id.to_string(),
        params: p.to_string(),
        order,
        grain: case.grain(&p),
        status: if first_mismatch.is_none() {
            "equal"
        } else {
            "mismatch"
        },
        first_mismatch,
        lhs: coefficients(&lhs),
        rhs: coefficients(&rhs),
    }))
}

pub fn d_series_json(t: usize, s: usize, w: &str, order: usize) -> Result<String, String> {
    check_order(order)?;
    let w = parse_w(w)?;
    let spec = NahmSpec::new(t, s, w);
    let series = d_series(&spec, w.ctx(order)).map_err(|e| e.to_string())?;
    Ok(to_json(&Coefficients {
        t,
        s,
        w: w.to_string(),
        grain: series.grain(),
        coefficients: coefficients(&series),
    }))
}

/// The registry as `[{id, summary, params}]`.
#[wasm_bindgen]
pub fn identities() -> String {
    list_json()
}

/// Both sides of an identity, coefficient by coefficient. `params` is a JSON
/// object such as `{"k": 2, "i": 1}`.
#[wasm_bindgen]
pub fn compare(id: &str, params: &str, order: usize) -> Result<String, JsValue> {
    compare_json(id, params, order).map_err(|e| JsValue::from_str(&e))
}

/// Coefficients of `D_{t,s}(w, q)`.
#[wasm_bindgen]
pub fn double_pole_sum(t: usize, s: usize, w: &str, order: usize) -> Result<String, JsValue> {
    d_series_json(t, s, w, order).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn list_has_every_family() {
        let v: Value = serde_json::from_str(&list_json()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), registry().len());
    }

    #[test]
    fn compare_reports_both_sides() {
        let v: Value =
            serde_json::from_str(&compare_json("doublepole-GA", r#"{"k":1,"i":0}"#, 12).unwrap())
                .unwrap();
        assert_eq!(v["status"], "equal");
        assert_eq!(v["lhs"], v["rhs"]);
        assert_eq!(v["lhs"].as_array().unwrap().len(), 12);
        assert!(v["first_mismatch"].is_null());
        let intro: Value = serde_json::from_str(&compare_json("intro-A2", "", 5).unwrap()).unwrap();
        assert_eq!(intro["lhs"][0], "1");
    }

    #[test]
    fn compare_rejects_bad_input() {
        assert!(compare_json("nosuch", "{}", 10).is_err());
        assert!(compare_json("doublepole-GA", "{\"k\":", 10).is_err());
        assert!(compare_json("doublepole-GA", r#"{"k":1,"i":0}"#, 0).is_err());
        assert!(compare_json("fermionic-even", r#"{"k":1,"i":0,"w":"nope"}"#, 10).is_err());
    }

    #[test]
    fn small_double_pole_sum() {
        // D_{1,2}(0,q) = sum q^n/(q)_n^2 = 1 + q + 3q^2 + ...
        let v: Value = serde_json::from_str(&d_series_json(1, 2, "0", 3).unwrap()).unwrap();
        assert_eq!(v["coefficients"], serde_json::json!(["1", "1", "3"]));
        let half: Value = serde_json::from_str(&d_series_json(2, 3, "half", 6).unwrap()).unwrap();
        assert_eq!(half["grain"], 2);
        assert!(d_series_json(0, 1, "0", 5).is_err());
    }
}
