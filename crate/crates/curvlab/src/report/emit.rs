//! Report emission. The structured format is versioned JSON with stable key
//! order, the human format is aligned text. Both are deterministic
//! functions of the report, which is itself deterministic for a fixed
//! manifest, seed and version.

use serde_json::{json, Map, Value};

use super::pipeline::{
    format_float, AnalysisReport, FitSummary, Item, ItemValue, ResidualSummary, Section,
};

pub const REPORT_SCHEMA_TAG: &str = "curvlab.report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Structured,
    Human,
}

pub fn emit_report(report: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Structured => structured(report),
        ReportFormat::Human => human(report),
    }
}

fn structured(report: &AnalysisReport) -> String {
    let mut root = Map::new();
    root.insert("$schema".into(), json!(REPORT_SCHEMA_TAG));
    root.insert("version".into(), json!(report.version));
    root.insert("manifest".into(), json!(report.name));
    root.insert("convention".into(), json!(report.convention));
    root.insert("mode".into(), json!(report.mode));
    root.insert("seed".into(), json!(report.seed));
    root.insert(
        "sections".into(),
        Value::Array(report.sections.iter().map(section_json).collect()),
    );
    let mut out = serde_json::to_string_pretty(&Value::Object(root)).expect("report is plain data");
    out.push('\n');
    out
}

fn section_json(s: &Section) -> Value {
    let mut obj = Map::new();
    obj.insert("id".into(), json!(s.id));
    match &s.skipped {
        Some(reason) => obj.insert("status".into(), json!({ "skipped": reason })),
        None => obj.insert("status".into(), json!("ran")),
    };
    obj.insert(
        "items".into(),
        Value::Array(s.items.iter().map(item_json).collect()),
    );
    Value::Object(obj)
}

/// A residual magnitude in the report's tagged-number form: symbolic and
/// exact-arithmetic zeros stay exact, anything measured is a float.
fn magnitude_json(value: f64, exact: bool) -> Value {
    if exact && value == 0.0 {
        json!({ "exact": "0" })
    } else {
        json!({ "float": value })
    }
}

fn residual_json(r: &ResidualSummary) -> Value {
    let mut obj = Map::new();
    obj.insert("passed".into(), json!(r.passed));
    obj.insert("verdict".into(), json!(r.verdict));
    obj.insert("max".into(), magnitude_json(r.max_abs, r.all_exact));
    obj.insert("scale".into(), json!({ "float": r.scale }));
    obj.insert("points_used".into(), json!(r.points_used));
    obj.insert("points_skipped".into(), json!(r.points_skipped));
    obj.insert("exact_arithmetic".into(), json!(r.all_exact));
    obj.insert("warnings".into(), json!(r.warnings));
    Value::Object(obj)
}

fn fit_json(f: &FitSummary) -> Value {
    let mut obj = Map::new();
    obj.insert("coefficients".into(), json!(f.names));
    obj.insert(
        "consensus".into(),
        match &f.consensus {
            Some(vals) => json!(vals),
            None => Value::Null,
        },
    );
    obj.insert("fits".into(), json!(f.fits));
    obj.insert("point_independent".into(), json!(f.point_independent));
    obj.insert("full_rank".into(), json!(f.full_rank));
    obj.insert("exact_arithmetic".into(), json!(f.all_exact));
    obj.insert("max_residual".into(), magnitude_json(f.max_residual, f.all_exact && f.fits));
    obj.insert("warnings".into(), json!(f.warnings));
    Value::Object(obj)
}

fn item_json(i: &Item) -> Value {
    let mut obj = Map::new();
    obj.insert("label".into(), json!(i.label));
    let (kind, value) = match &i.value {
        ItemValue::Text(t) => ("text", json!(t)),
        ItemValue::Flag(b) => ("flag", json!(b)),
        ItemValue::Residual(r) => ("residual", residual_json(r)),
        ItemValue::Fit(f) => ("fit", fit_json(f)),
        ItemValue::List(items) => ("list", json!(items)),
        ItemValue::Table(rows) => {
            let mut table = Map::new();
            for (k, v) in rows {
                table.insert(k.clone(), json!(v));
            }
            ("table", Value::Object(table))
        }
    };
    obj.insert("kind".into(), json!(kind));
    obj.insert("value".into(), value);
    Value::Object(obj)
}

fn human(report: &AnalysisReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("curvlab report: {}\n", report.name));
    out.push_str(&format!(
        "version {} | convention {} | mode {} | seed {}\n",
        report.version, report.convention, report.mode, report.seed
    ));
    for section in &report.sections {
        out.push('\n');
        out.push_str(&format!("== {} ==\n", section.id));
        if let Some(reason) = &section.skipped {
            out.push_str(&format!("  skipped: {reason}\n"));
            continue;
        }
        for item in &section.items {
            human_item(&mut out, item);
        }
    }
    out
}

fn human_item(out: &mut String, item: &Item) {
    match &item.value {
        ItemValue::Text(t) => out.push_str(&format!("  {}: {}\n", item.label, t)),
        ItemValue::Flag(b) => out.push_str(&format!("  {}: {}\n", item.label, b)),
        ItemValue::List(items) => {
            if items.is_empty() {
                out.push_str(&format!("  {}: none\n", item.label));
            } else {
                out.push_str(&format!("  {}:\n", item.label));
                for entry in items {
                    out.push_str(&format!("    - {entry}\n"));
                }
            }
        }
        ItemValue::Table(rows) => {
            out.push_str(&format!("  {}:\n", item.label));
            if rows.is_empty() {
                out.push_str("    (all components zero)\n");
                return;
            }
            let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
            for (k, v) in rows {
                let pad = " ".repeat(width - k.chars().count());
                out.push_str(&format!("    {k}{pad} = {v}\n"));
            }
        }
        ItemValue::Residual(r) => {
            let state = if r.passed { "pass" } else { "FAIL" };
            let max = if r.all_exact && r.max_abs == 0.0 {
                "0 exact".to_string()
            } else {
                format_float(r.max_abs)
            };
            out.push_str(&format!(
                "  {}: {state} ({}, max {max}, {} points)\n",
                item.label, r.verdict, r.points_used
            ));
            for w in &r.warnings {
                out.push_str(&format!("    warning: {w}\n"));
            }
        }
        ItemValue::Fit(f) => {
            let summary = match &f.consensus {
                Some(vals) => f
                    .names
                    .iter()
                    .zip(vals)
                    .map(|(n, v)| format!("{n} = {v}"))
                    .collect::<Vec<_>>()
                    .join(", "),
                None => "no consensus".to_string(),
            };
            let mut notes = Vec::new();
            if !f.fits {
                notes.push("misfit");
            }
            if f.all_exact {
                notes.push("exact");
            }
            if !f.full_rank {
                notes.push("rank-deficient");
            }
            let tail = if notes.is_empty() {
                String::new()
            } else {
                format!(" [{}]", notes.join(", "))
            };
            out.push_str(&format!("  {}: {summary}{tail}\n", item.label));
            for w in &f.warnings {
                out.push_str(&format!("    warning: {w}\n"));
            }
        }
    }
}
