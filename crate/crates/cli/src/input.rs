//! Parsing of user-supplied numbers, elements and transforms.

use std::fs;

use anyhow::{anyhow, bail, Context, Result};
use qfa_core::transforms::parse_builtin;
use qfa_core::{AlgebraElement, KTransform};

use crate::{ElementArgs, TransformArgs};

/// A real number, `inf`, or a fraction `a/b`.
pub fn number(s: &str) -> Result<f64> {
    let s = s.trim();
    match s {
        "inf" | "infinity" | "∞" => return Ok(f64::INFINITY),
        _ => {}
    }
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().with_context(|| format!("bad numerator in '{s}'"))?;
        let b: f64 = b.trim().parse().with_context(|| format!("bad denominator in '{s}'"))?;
        return Ok(a / b);
    }
    s.parse().with_context(|| format!("not a number: '{s}'"))
}

pub fn numbers(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s.split(',').filter(|t| !t.trim().is_empty()).map(number).collect::<Result<_>>()?;
    if v.is_empty() {
        bail!("empty list");
    }
    Ok(v)
}

pub fn transform(args: &TransformArgs) -> Result<KTransform> {
    match (&args.transform, &args.spec) {
        (Some(name), None) => Ok(parse_builtin(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing transform spec {}", path.display()))
        }
        _ => Err(anyhow!("give exactly one of --transform or --spec")),
    }
}

pub fn element(args: &ElementArgs) -> Result<AlgebraElement> {
    let text = match (&args.element, &args.element_file) {
        (Some(s), None) => s.clone(),
        (None, Some(path)) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        _ => bail!("give exactly one of --element or --element-file"),
    };
    if let Ok(values) = serde_json::from_str::<Vec<f64>>(&text) {
        if values.is_empty() {
            bail!("element needs at least one entry");
        }
        return Ok(AlgebraElement::real_vector(&values));
    }
    serde_json::from_str(&text).context("parsing element")
}
