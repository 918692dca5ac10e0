use std::collections::BTreeMap;
use std::sync::OnceLock;

use toml::Value;

/// Schema text shipped with the crate.
pub const SCHEMA_TOML: &str = include_str!("../../schema/config_schema.toml");

#[derive(Debug, Clone, PartialEq)]
pub enum KeyType {
    Float,
    Integer,
    String,
    Boolean,
    Enum(Vec<String>),
    FloatArray,
    IntegerArray(Option<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeySpec {
    pub kind: KeyType,
    pub default: Option<Value>,
    pub optional: bool,
    pub doc: String,
}

impl KeySpec {
    pub fn required(&self) -> bool {
        self.default.is_none() && !self.optional
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub top: BTreeMap<String, KeySpec>,
    pub sections: BTreeMap<String, BTreeMap<String, KeySpec>>,
    /// Sections each subcommand needs.
    pub commands: BTreeMap<String, Vec<String>>,
}

fn parse_key(name: &str, v: &Value) -> KeySpec {
    let t = v
        .as_table()
        .unwrap_or_else(|| panic!("schema key {name} must be a table"));
    let kind = match t.get("type").and_then(Value::as_str) {
        Some("float") => KeyType::Float,
        Some("integer") => KeyType::Integer,
        Some("string") => KeyType::String,
        Some("boolean") => KeyType::Boolean,
        Some("enum") => KeyType::Enum(
            t["values"]
                .as_array()
                .expect("enum values")
                .iter()
                .map(|s| s.as_str().expect("enum value").to_string())
                .collect(),
        ),
        Some("float_array") => KeyType::FloatArray,
        Some("integer_array") => KeyType::IntegerArray(t.get("length").and_then(Value::as_integer).map(|n| n as usize)),
        other => panic!("schema key {name} has unknown type {other:?}"),
    };
    KeySpec {
        kind,
        default: t.get("default").cloned(),
        optional: t.get("optional").and_then(Value::as_bool).unwrap_or(false),
        doc: t.get("doc").and_then(Value::as_str).unwrap_or_default().to_string(),
    }
}

fn parse_keys(name: &str, v: &Value) -> BTreeMap<String, KeySpec> {
    v.as_table()
        .unwrap_or_else(|| panic!("schema section {name} must be a table"))
        .iter()
        .map(|(k, spec)| (k.clone(), parse_key(k, spec)))
        .collect()
}

/// The parsed embedded schema.
pub fn schema() -> &'static Schema {
    static SCHEMA: OnceLock<Schema> = OnceLock::new();
    SCHEMA.get_or_init(|| {
        let root: toml::Table = SCHEMA_TOML.parse().expect("embedded schema parses");
        let top = parse_keys("top", &root["top"]);
        let sections = root["sections"]
            .as_table()
            .expect("sections table")
            .iter()
            .map(|(name, keys)| (name.clone(), parse_keys(name, keys)))
            .collect();
        let commands = root["commands"]
            .as_table()
            .expect("commands table")
            .iter()
            .map(|(name, c)| {
                let needs = c["sections"]
                    .as_array()
                    .expect("command sections")
                    .iter()
                    .map(|s| s.as_str().expect("section name").to_string())
                    .collect();
                (name.clone(), needs)
            })
            .collect();
        Schema {
            top,
            sections,
            commands,
        }
    })
}

fn type_error(path: &str, kind: &KeyType, v: &Value) -> Option<String> {
    let ok = match kind {
        KeyType::Float => v.is_float() || v.is_integer(),
        KeyType::Integer => v.is_integer(),
        KeyType::String => v.is_str(),
        KeyType::Boolean => v.is_bool(),
        KeyType::Enum(values) => {
            return match v.as_str() {
                Some(s) if values.iter().any(|x| x == s) => None,
                _ => Some(format!("{path}: expected one of [{}], got {v}", values.join(", "))),
            }
        }
        KeyType::FloatArray => v
            .as_array()
            .is_some_and(|a| a.iter().all(|x| x.is_float() || x.is_integer())),
        KeyType::IntegerArray(len) => v
            .as_array()
            .is_some_and(|a| a.iter().all(Value::is_integer) && len.is_none_or(|n| a.len() == n)),
    };
    if ok {
        None
    } else {
        let expected = match kind {
            KeyType::IntegerArray(Some(n)) => format!("array of {n} integers"),
            KeyType::IntegerArray(None) => "array of integers".into(),
            KeyType::FloatArray => "array of numbers".into(),
            k => format!("{k:?}").to_lowercase(),
        };
        Some(format!("{path}: expected {expected}, got {v}"))
    }
}

fn check_keys(prefix: &str, table: &toml::Table, keys: &BTreeMap<String, KeySpec>, errors: &mut Vec<String>) {
    for (k, v) in table {
        let path = format!("{prefix}{k}");
        match keys.get(k) {
            None => errors.push(format!("{path}: unknown key")),
            Some(spec) => errors.extend(type_error(&path, &spec.kind, v)),
        }
    }
    for (k, spec) in keys {
        if spec.required() && !table.contains_key(k) {
            errors.push(format!("{prefix}{k}: required key is missing ({})", spec.doc));
        }
    }
}

/// Every structural problem of `config` for `command`, in one pass.
pub fn validate(config: &toml::Table, command: &str) -> Vec<String> {
    let s = schema();
    let mut errors = Vec::new();
    let Some(needed) = s.commands.get(command) else {
        return vec![format!("unknown subcommand {command}")];
    };
    let top_level: toml::Table = config
        .iter()
        .filter(|(k, v)| !(s.sections.contains_key(*k) && v.is_table()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    for (k, v) in &top_level {
        if s.sections.contains_key(k) {
            errors.push(format!("{k}: expected a table"));
        } else if !s.top.contains_key(k) {
            errors.push(format!("{k}: unknown {}", if v.is_table() { "section" } else { "key" }));
        }
    }
    for (k, spec) in &s.top {
        if let Some(v) = top_level.get(k) {
            errors.extend(type_error(k, &spec.kind, v));
        }
    }
    for (name, keys) in &s.sections {
        match config.get(name).and_then(Value::as_table) {
            Some(table) => check_keys(&format!("{name}."), table, keys, &mut errors),
            None if needed.contains(name) => check_keys(&format!("{name}."), &toml::Table::new(), keys, &mut errors),
            None => {}
        }
    }
    errors
}

/// Markdown reference generated from the schema.
pub fn reference() -> String {
    let s = schema();
    let mut out = String::from("| key | type | default | description |\n|---|---|---|---|\n");
    let row = |out: &mut String, path: &str, spec: &KeySpec| {
        let default = match (&spec.default, spec.optional) {
            (Some(d), _) => d.to_string(),
            (None, true) => "unset".into(),
            (None, false) => "required".into(),
        };
        let kind = match &spec.kind {
            KeyType::Enum(v) => v.join(" / "),
            k => format!("{k:?}").to_lowercase(),
        };
        out.push_str(&format!("| `{path}` | {kind} | {default} | {} |\n", spec.doc));
    };
    for (k, spec) in &s.top {
        row(&mut out, k, spec);
    }
    for (name, keys) in &s.sections {
        for (k, spec) in keys {
            row(&mut out, &format!("{name}.{k}"), spec);
        }
    }
    out
}
