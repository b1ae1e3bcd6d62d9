use anyhow::Result;
use serde_json::{json, Map, Value};

use klab::bilinear::{crossing_exponent, type_i_saving_at, type_ii_saving_at};

use super::{divisor, geometry, tables};
use crate::args::{ExponentArgs, KlCheckArgs, ProgressionArgs, SkArgs};
use crate::config::ConfigFile;
use crate::output::{Outcome, Table};

const BRACKET_Q: f64 = 2003.0;

/// Runs kl-check, sk, exponent-lp and progression with their config sections
/// (defaults otherwise), plus the bracket savings, as one document.
pub fn report(cfg: &ConfigFile) -> Result<(Value, Outcome)> {
    let mut sk_args: SkArgs = cfg.resolve("sk", &SkArgs::default())?;
    sk_args.k.get_or_insert_with(|| (2..=7).collect());
    let mut exp_args: ExponentArgs = cfg.resolve("exponent-lp", &ExponentArgs::default())?;
    exp_args.search = true;

    let parts = [
        ("kl-check", tables::kl_check(&cfg.resolve("kl-check", &KlCheckArgs::default())?)?),
        ("sk", geometry::sk(&sk_args)?),
        ("exponent-lp", divisor::exponent_lp(&exp_args)?),
        ("progression", divisor::progression(&cfg.resolve("progression", &ProgressionArgs::default())?)?),
    ];

    let mut config = Map::new();
    let mut results = Map::new();
    let mut violations = Vec::new();
    let mut table = Table::new(&["section", "metric", "value"]);
    for (name, (echo, outcome)) in parts {
        config.insert(name.to_string(), echo);
        violations.extend(outcome.violations.iter().map(|v| format!("{name}: {v}")));
        for (metric, pointer) in headline(name) {
            if let Some(v) = outcome.summary.pointer(pointer) {
                table.push(vec![name.to_string(), metric.to_string(), scalar(v)]);
            }
        }
        results.insert(name.to_string(), outcome.summary);
    }

    let brackets = json!({
        "q": BRACKET_Q,
        "type_ii_saving_at_half": type_ii_saving_at(0.5, BRACKET_Q),
        "type_i_saving_at_half": type_i_saving_at(0.5, BRACKET_Q),
        "type_ii_crossing": crossing_exponent(|t| type_ii_saving_at(t, BRACKET_Q), 0.3, 0.6),
        "type_i_crossing": crossing_exponent(|t| type_i_saving_at(t, BRACKET_Q), 0.3, 0.6),
    });
    for key in ["type_ii_saving_at_half", "type_i_saving_at_half", "type_ii_crossing", "type_i_crossing"] {
        table.push(vec!["brackets".to_string(), key.to_string(), scalar(&brackets[key])]);
    }
    results.insert("brackets".to_string(), brackets);

    let outcome = Outcome {
        summary: Value::Object(results),
        table,
        violations,
    };
    Ok((Value::Object(config), outcome))
}

fn headline(section: &str) -> &'static [(&'static str, &'static str)] {
    match section {
        "kl-check" => &[("all_pass", "/all_pass")],
        "exponent-lp" => &[("delta_star", "/delta_star"), ("eta_star", "/eta_star")],
        "progression" => &[
            ("max_normalized_slope", "/max_normalized_slope"),
            ("hecke_violations", "/coefficient_checks/hecke_violations"),
            ("deligne_violations", "/coefficient_checks/deligne_violations"),
            ("congruence_691_violations", "/coefficient_checks/congruence_691_violations"),
        ],
        _ => &[],
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
