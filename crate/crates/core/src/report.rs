//! Text, JSON and CSV renderings of verification results.

use serde_json::{json, Value as Json};

use crate::engine::{Evaluation, QueryValue, VerificationResult};
use crate::expr::format_rational;

/// Rounds to 16 significant digits and prints the shortest form that reads
/// back to the rounded value, always with a decimal point (`1.0`, not `1`).
pub fn format_probability(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.15e}").parse().unwrap_or(v);
    format!("{rounded:?}")
}

fn context(result: &VerificationResult) -> &'static str {
    match (&result.evaluation, result.verdict) {
        (Evaluation::InitialState(_), Some(true)) => "property satisfied in the initial state",
        (Evaluation::InitialState(_), Some(false)) => "property not satisfied in the initial state",
        (Evaluation::FilterStates(_), Some(true)) => "property satisfied in all filter states",
        (Evaluation::FilterStates(_), Some(false)) => "property not satisfied in all filter states",
        (Evaluation::InitialState(_), None) => "value in the initial state",
        (Evaluation::FilterStates(_), None) => "value in the filter state",
    }
}

/// The two report lines for one property.
pub fn text_report(result: &VerificationResult) -> String {
    let mut out = format!(
        "Number of states satisfying {}: {}\n",
        result.property,
        result.count()
    );
    match (&result.verdict, &result.query) {
        (Some(v), _) => out.push_str(&format!("Result: {v} ({})\n", context(result))),
        (None, Some(QueryValue::Scalar { value, .. })) => out.push_str(&format!(
            "Result: {} ({})\n",
            format_probability(*value),
            context(result)
        )),
        (None, Some(QueryValue::Range { min, max, per_state })) => out.push_str(&format!(
            "Result: [{}, {}] (range over {} filter states)\n",
            format_probability(*min),
            format_probability(*max),
            per_state.len()
        )),
        (None, None) => out.push_str("Result: none\n"),
    }
    out
}

fn result_cell(result: &VerificationResult) -> String {
    match (&result.verdict, &result.query) {
        (Some(v), _) => v.to_string(),
        (None, Some(QueryValue::Scalar { value, .. })) => format_probability(*value),
        (None, Some(QueryValue::Range { min, max, .. })) => {
            format!("{}..{}", format_probability(*min), format_probability(*max))
        }
        (None, None) => String::new(),
    }
}

pub fn csv_header() -> &'static str {
    "property,evaluation,satisfying_states,result\n"
}

pub fn csv_row(result: &VerificationResult) -> String {
    let evaluation = match &result.evaluation {
        Evaluation::InitialState(_) => "initial",
        Evaluation::FilterStates(_) => "filter",
    };
    format!(
        "\"{}\",{evaluation},{},{}\n",
        result.property.replace('"', "\"\""),
        result.count(),
        result_cell(result)
    )
}

fn number(v: f64) -> Json {
    json!({ "value": v, "decimal": format!("{v:?}") })
}

pub fn json_result(result: &VerificationResult) -> Json {
    let (kind, states) = match &result.evaluation {
        Evaluation::InitialState(s) => ("initial-state", vec![*s]),
        Evaluation::FilterStates(v) => ("filter-states", v.clone()),
    };
    let query = result.query.as_ref().map(|q| match q {
        QueryValue::Scalar { state, value, exact } => json!({
            "state": state,
            "value": value,
            "decimal": format!("{value:?}"),
            "text": format_probability(*value),
            "exact": exact.as_ref().map(format_rational),
        }),
        QueryValue::Range { min, max, per_state } => json!({
            "min": number(*min),
            "max": number(*max),
            "per_state": per_state.iter().map(|(s, v)| json!({"state": s, "value": v})).collect::<Vec<_>>(),
        }),
    });
    json!({
        "property": result.property,
        "evaluation": { "kind": kind, "states": states },
        "verdict": result.verdict,
        "query": query,
        "satisfying_states": result.satisfying.to_vec(),
        "count": result.count(),
        "values": result.values.as_slice(),
        "exact_values": result.exact.as_ref().map(|v| v.iter().map(format_rational).collect::<Vec<_>>()),
        "engine": {
            "method": result.method,
            "iterations": result.iterations,
            "residual": result.residual,
        },
    })
}

/// Minimal SVG line chart of a bounded-reachability curve.
pub fn curve_svg(points: &[(u64, f64)], title: &str) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let k_max = points.last().map_or(1, |p| p.0).max(1) as f64;
    let x = |k: u64| m + (k as f64 / k_max) * (w - 2.0 * m);
    let y = |p: f64| h - m - p * (h - 2.0 * m);
    let poly: Vec<String> = points
        .iter()
        .map(|&(k, p)| format!("{:.2},{:.2}", x(k), y(p)))
        .collect();
    let title = title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n\
         <text x=\"{m}\" y=\"30\">{title}</text>\n\
         <line x1=\"{m}\" y1=\"{by}\" x2=\"{rx}\" y2=\"{by}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{by}\" x2=\"{m}\" y2=\"{m}\" stroke=\"black\"/>\n\
         <text x=\"{m}\" y=\"{ly}\">0</text>\n\
         <text x=\"{rx}\" y=\"{ly}\">{k_max}</text>\n\
         <text x=\"10\" y=\"{m}\">1</text>\n\
         <polyline fill=\"none\" stroke=\"blue\" points=\"{pts}\"/>\n\
         </svg>\n",
        by = h - m,
        rx = w - m,
        ly = h - m + 20.0,
        pts = poly.join(" "),
    )
}
