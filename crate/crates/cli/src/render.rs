//! Text and structured (TOML) rendering. Every float goes through `sig12`.

use noiseless_core::numfmt::{round12, sig12};
use noiseless_core::Diagnostic;
use serde::Serialize;
use std::fmt::Write as _;
use toml::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Float(f) => *f = round12(*f),
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Table(t) => t.iter_mut().for_each(|(_, x)| round_floats(x)),
        _ => {}
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Float(f) => sig12(*f),
        Value::Integer(i) => i.to_string(),
        Value::String(s) => s.clone(),
        Value::Boolean(b) => b.to_string(),
        Value::Array(a) => {
            let items: Vec<String> = a.iter().map(scalar).collect();
            format!("[{}]", items.join(", "))
        }
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Table(t) => {
            for (k, x) in t {
                if k == "diagnostics" {
                    continue;
                }
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_table()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        _ => {
            let _ = writeln!(out, "{prefix}: {}", scalar(v));
        }
    }
}

/// Renders a command result. In text mode diagnostics are printed as
/// sentences after the fields; in structured mode they stay typed.
pub fn render<T: Serialize>(value: &T, diagnostics: &[Diagnostic], format: Format) -> String {
    let mut tree = Value::try_from(value).expect("report types serialize to TOML");
    round_floats(&mut tree);
    match format {
        Format::Structured => toml::to_string(&tree).expect("TOML tree serializes"),
        Format::Text => {
            let mut out = String::new();
            flatten("", &tree, &mut out);
            for d in diagnostics {
                let _ = writeln!(out, "warning: {d}");
            }
            out
        }
    }
}
