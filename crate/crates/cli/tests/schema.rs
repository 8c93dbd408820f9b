//! Checks reports against the shipped JSON schema with a validator for the
//! keyword subset the schema uses.

use std::process::Command;

use serde_json::Value;

fn resolve<'a>(root: &'a Value, s: &'a Value) -> &'a Value {
    match s.get("$ref").and_then(Value::as_str) {
        Some(r) => {
            let path = r.strip_prefix("#/").expect("local ref");
            path.split('/').fold(root, |v, k| &v[k])
        }
        None => s,
    }
}

fn type_ok(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64(),
        other => panic!("unsupported type {other}"),
    }
}

fn validate(root: &Value, schema: &Value, v: &Value, at: &str, errors: &mut Vec<String>) {
    let s = resolve(root, schema);
    let known = [
        "$schema", "$id", "$defs", "$ref", "title", "description", "type", "required", "properties",
        "additionalProperties", "items", "const", "enum", "oneOf", "minimum", "exclusiveMinimum", "minLength",
    ];
    for k in s.as_object().unwrap().keys() {
        assert!(known.contains(&k.as_str()), "unsupported keyword {k}");
    }
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(t) => type_ok(t, v),
            Value::Array(ts) => ts.iter().any(|t| type_ok(t.as_str().unwrap(), v)),
            _ => panic!("bad type"),
        };
        if !ok {
            errors.push(format!("{at}: expected type {t}"));
            return;
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            errors.push(format!("{at}: expected {c}"));
        }
    }
    if let Some(e) = s.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            errors.push(format!("{at}: {v} not in enum"));
        }
    }
    if let Some(alts) = s.get("oneOf").and_then(Value::as_array) {
        let matches = alts
            .iter()
            .filter(|a| {
                let mut e = Vec::new();
                validate(root, a, v, at, &mut e);
                e.is_empty()
            })
            .count();
        if matches != 1 {
            errors.push(format!("{at}: {matches} oneOf branches match"));
        }
    }
    if let (Some(n), Some(m)) = (v.as_f64(), s.get("minimum").and_then(Value::as_f64)) {
        if n < m {
            errors.push(format!("{at}: below minimum"));
        }
    }
    if let (Some(n), Some(m)) = (v.as_f64(), s.get("exclusiveMinimum").and_then(Value::as_f64)) {
        if n <= m {
            errors.push(format!("{at}: not above exclusive minimum"));
        }
    }
    if let (Some(t), Some(m)) = (v.as_str(), s.get("minLength").and_then(Value::as_u64)) {
        if (t.chars().count() as u64) < m {
            errors.push(format!("{at}: too short"));
        }
    }
    if let Some(obj) = v.as_object() {
        for r in s.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(r.as_str().unwrap()) {
                errors.push(format!("{at}: missing {r}"));
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, val) in obj {
            let here = format!("{at}/{k}");
            match props.and_then(|p| p.get(k)) {
                Some(ps) => validate(root, ps, val, &here, errors),
                None => match s.get("additionalProperties") {
                    Some(Value::Bool(false)) => errors.push(format!("{here}: not allowed")),
                    Some(ap @ Value::Object(_)) => validate(root, ap, val, &here, errors),
                    _ => {}
                },
            }
        }
    }
    if let (Some(items), Some(arr)) = (s.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            validate(root, items, x, &format!("{at}/{i}"), errors);
        }
    }
}

fn schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schemas/verify-report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn errors_for(report: &Value) -> Vec<String> {
    let s = schema();
    let mut errors = Vec::new();
    validate(&s, &s, report, "", &mut errors);
    errors
}

fn verify_report(args: &[&str]) -> Value {
    let o = Command::new(env!("CARGO_BIN_EXE_qfa")).arg("verify").args(args).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn verify_reports_match_schema() {
    for args in [
        &["--transform", "dft:4", "--samples", "20", "--seed", "7"][..],
        &["--transform", "group:s3", "--samples", "10"],
        &["--transform", "tensor:[dft:2,dft:2]", "--samples", "5"],
    ] {
        let errors = errors_for(&verify_report(args));
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}

#[test]
fn schema_rejects_broken_reports() {
    let mut v = verify_report(&["--transform", "dft:2", "--samples", "2"]);
    v["records"][0].as_object_mut().unwrap().remove("gap");
    v["records"][1]["theorem"] = Value::from("made-up");
    v["records"][2]["lhs"] = Value::from("infinite");
    v["tolerance"] = Value::from(0.0);
    let errors = errors_for(&v);
    assert_eq!(errors.len(), 4, "{errors:?}");
}
