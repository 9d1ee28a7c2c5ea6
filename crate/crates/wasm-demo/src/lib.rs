//! Browser bindings: observable curves, gauge-copy reports and transport ODE
//! defects for fuzzy sphere connections. Every export returns JSON.

use std::sync::Arc;

use fuzzy_holonomy::calculus::DerivationVector;
use fuzzy_holonomy::fuzzy::{
    flat_connection, gauge_copy_report, parse_spin_list, spin_basis, GaugeCopyOptions, SpinLabel,
};
use fuzzy_holonomy::linalg::{random_matrix, seeded_rng};
use fuzzy_holonomy::transport::{observable, ode_defect, Word};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Longest accepted curve, in samples.
const MAX_SAMPLES: usize = 2000;

fn spin(s: &str) -> Result<SpinLabel, String> {
    s.parse().map_err(|e: fuzzy_holonomy::Error| e.to_string())
}

/// `"e1,e2,e3"` to zero-based indices.
fn parse_word(text: &str, d: usize) -> Result<Vec<usize>, String> {
    let idx = text
        .split(',')
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.strip_prefix('e')
                .and_then(|i| i.parse::<usize>().ok())
                .filter(|&i| i >= 1 && i <= d)
                .map(|i| i - 1)
                .ok_or_else(|| format!("bad letter `{l}`; use e1..e{d}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if idx.is_empty() {
        return Err("empty word".into());
    }
    Ok(idx)
}

/// `W(τ)` for each spin set over `τ ∈ [0, tau_max]`.
pub fn observable_curves_json(
    j: &str,
    sets: &str,
    word: &str,
    tau_max: f64,
    samples: usize,
) -> Result<String, String> {
    if !(2..=MAX_SAMPLES).contains(&samples) {
        return Err(format!("samples must lie in 2..={MAX_SAMPLES}"));
    }
    if !tau_max.is_finite() {
        return Err("tau_max must be finite".into());
    }
    let basis = Arc::new(spin_basis(spin(j)?).map_err(|e| e.to_string())?);
    let idx = parse_word(word, basis.dim())?;
    let w = Word::from_indices(&idx, &basis).map_err(|e| e.to_string())?;
    let taus: Vec<f64> = (0..samples)
        .map(|k| tau_max * k as f64 / (samples - 1) as f64)
        .collect();
    let mut curves = Vec::new();
    for set in sets.split(';').filter(|s| !s.trim().is_empty()) {
        let spins = parse_spin_list(set).map_err(|e| e.to_string())?;
        let conn = flat_connection(basis.clone(), &spins).map_err(|e| e.to_string())?;
        let (mut re, mut im) = (Vec::with_capacity(samples), Vec::with_capacity(samples));
        for &t in &taus {
            let z = observable(&conn, &w, t).map_err(|e| e.to_string())?;
            re.push(z.re);
            im.push(z.im);
        }
        let label = spins
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",");
        curves.push(json!({ "set": label, "m": conn.m(), "re": re, "im": im }));
    }
    if curves.is_empty() {
        return Err("no spin sets given".into());
    }
    Ok(json!({ "word": word, "tau": taus, "curves": curves }).to_string())
}

/// Curvature, observables and pairwise verdicts for spin sets `"0,0;0.5"`.
pub fn gauge_copy_json(j: &str, sets: &str, tau: f64, seed: u64) -> Result<String, String> {
    let spin_sets = sets
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_spin_list)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let options = GaugeCopyOptions {
        tau,
        seed,
        ..GaugeCopyOptions::default()
    };
    let r = gauge_copy_report(spin(j)?, &spin_sets, &options).map_err(|e| e.to_string())?;
    let label = |w: &[usize]| {
        format!(
            "({})",
            w.iter()
                .map(|i| format!("e{}", i + 1))
                .collect::<Vec<_>>()
                .join(",")
        )
    };
    let sets: Vec<Value> = r
        .sets
        .iter()
        .map(|s| {
            let obs: Vec<Value> = r
                .words
                .iter()
                .zip(&s.observables)
                .map(|(w, z)| json!({ "word": label(w), "re": z.re, "im": z.im }))
                .collect();
            json!({
                "spins": s.spins.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "m": s.m,
                "max_curvature": s.max_curvature,
                "hermitian": s.hermitian,
                "observables": obs,
            })
        })
        .collect();
    let verdicts: Vec<Value> = r
        .verdicts
        .iter()
        .map(|p| {
            json!({
                "first": p.first,
                "second": p.second,
                "equivalent": p.verdict.equivalent,
                "trace_agreement_only": p.verdict.trace_agreement_only,
                "max_trace_gap": p.verdict.max_trace_gap,
                "separating_word": p.verdict.separating_word.as_deref().map(label),
                "witness_residual": p.verdict.witness_residual,
            })
        })
        .collect();
    Ok(json!({ "j": r.j.to_string(), "sets": sets, "verdicts": verdicts }).to_string())
}

/// Central-difference defect of the transport ODE for a log-spaced range of
/// steps, on a random section.
pub fn ode_defects_json(
    j: &str,
    spins: &str,
    x: &[f64],
    tau: f64,
    seed: u64,
) -> Result<String, String> {
    let basis = Arc::new(spin_basis(spin(j)?).map_err(|e| e.to_string())?);
    if x.len() != basis.dim() {
        return Err(format!("x needs {} coefficients", basis.dim()));
    }
    let conn = flat_connection(
        basis.clone(),
        &parse_spin_list(spins).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let xv = DerivationVector::real(x);
    let s = random_matrix(conn.m(), basis.n(), &mut seeded_rng(seed));
    let norm = s.frobenius_norm();
    let steps: Vec<f64> = (0..=16).map(|k| 10f64.powf(-0.5 * k as f64)).collect();
    let defects = steps
        .iter()
        .map(|&h| ode_defect(&conn, &xv, tau, h, &s).map(|d| d / norm))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(json!({ "h": steps, "defect": defects }).to_string())
}

#[wasm_bindgen]
pub fn observable_curves(
    j: &str,
    sets: &str,
    word: &str,
    tau_max: f64,
    samples: usize,
) -> Result<String, JsError> {
    observable_curves_json(j, sets, word, tau_max, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn gauge_copy(j: &str, sets: &str, tau: f64, seed: u32) -> Result<String, JsError> {
    gauge_copy_json(j, sets, tau, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ode_defects(
    j: &str,
    spins: &str,
    x: Vec<f64>,
    tau: f64,
    seed: u32,
) -> Result<String, JsError> {
    ode_defects_json(j, spins, &x, tau, seed as u64).map_err(|e| JsError::new(&e))
}
