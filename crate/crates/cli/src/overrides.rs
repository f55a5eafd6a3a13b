//! `--section.field=value` flags applied on top of the JSON configuration.

use serde_json::{Map, Value};

/// Top-level fields that may be overridden without a dot.
const PLAIN_KEYS: [&str; 2] = ["scenario", "output_dir"];

#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: Value,
}

/// Splits `args` into configuration overrides and the remaining arguments.
///
/// Accepts both `--a.b=v` and `--a.b v`. Values are parsed as JSON when
/// possible and kept as strings otherwise.
pub fn extract(args: Vec<String>) -> Result<(Vec<Override>, Vec<String>), String> {
    let mut overrides = Vec::new();
    let mut rest = Vec::new();
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let Some(body) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (key, inline) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        let key_norm = key.replace('-', "_");
        if !key_norm.contains('.') && !PLAIN_KEYS.contains(&key_norm.as_str()) {
            rest.push(arg);
            continue;
        }
        let raw = match inline {
            Some(v) => v,
            None => iter.next().ok_or_else(|| format!("--{key} needs a value"))?,
        };
        let path: Vec<String> = key_norm.split('.').map(str::to_string).collect();
        if path.iter().any(String::is_empty) {
            return Err(format!("malformed override key '--{key}'"));
        }
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        overrides.push(Override { path, value });
    }
    Ok((overrides, rest))
}

/// Writes each override into `config` after checking its path against
/// `schema`, a fully populated configuration of the same shape.
pub fn apply(config: &mut Value, schema: &Value, overrides: &[Override]) -> Result<(), String> {
    for o in overrides {
        let dotted = o.path.join(".");
        let mut probe = schema;
        for seg in &o.path {
            probe = probe.get(seg).ok_or_else(|| format!("unknown configuration field '{dotted}'"))?;
        }
        let mut node = &mut *config;
        for seg in &o.path {
            if !node.is_object() {
                *node = Value::Object(Map::new());
            }
            node = node.as_object_mut().expect("object").entry(seg.clone()).or_insert(Value::Null);
        }
        *node = o.value.clone();
    }
    Ok(())
}
