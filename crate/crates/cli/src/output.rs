use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

/// Report envelope shared by all JSON outputs.
pub fn envelope(command: &str, seed: u64, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("tool".into(), json!("qfa"));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), json!(seed));
    if let Value::Object(body) = body {
        m.extend(body);
    }
    Value::Object(m)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json(out: Option<&Path>, value: &Value) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv<T: Serialize>(out: Option<&Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON number, or `"inf"`/`"-inf"`/`"nan"` for non-finite values.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}
