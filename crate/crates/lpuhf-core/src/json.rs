//! JSON input and output formats for systems, stage specs, families, and
//! reports.
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major arrays of
//! rows, and rational strings `"n/d"` are accepted wherever a float is.
//! Serialization goes through [`serde_json::Value`] with sorted keys, so
//! equal inputs produce byte-identical output.

use serde_json::{json, Map, Value};

use crate::criteria::{FamilyRecipe, SeriesReport};
use crate::error::{Error, Result};
use crate::pnorm::{Mat, NormInterval, Witness};
use crate::simsys::{SimilaritySystem, SystemEntry, Violation};
use crate::spaces::Exponent;
use crate::tensor_type::{Stage, StageSpec};
use crate::{C64, MatF};

fn want<'a>(obj: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Input(format!("{ctx}: missing key \"{key}\"")))
}

fn as_object<'a>(value: &'a Value, ctx: &str) -> Result<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| Error::Input(format!("{ctx}: expected a JSON object")))
}

fn as_array<'a>(value: &'a Value, ctx: &str) -> Result<&'a Vec<Value>> {
    value
        .as_array()
        .ok_or_else(|| Error::Input(format!("{ctx}: expected a JSON array")))
}

/// Parse a real number: a JSON number, or a rational string `"n/d"`.
pub fn parse_real(value: &Value, ctx: &str) -> Result<f64> {
    match value {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Input(format!("{ctx}: number out of f64 range"))),
        Value::String(s) => {
            let (num, den) = parse_ratio(s, ctx)?;
            Ok(num as f64 / den as f64)
        }
        _ => Err(Error::Input(format!(
            "{ctx}: expected a number or \"n/d\" string"
        ))),
    }
}

fn parse_ratio(s: &str, ctx: &str) -> Result<(i64, i64)> {
    let (num, den) = s
        .split_once('/')
        .ok_or_else(|| Error::Input(format!("{ctx}: string \"{s}\" is not of the form \"n/d\"")))?;
    let num: i64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Input(format!("{ctx}: \"{s}\" has a non-integer numerator")))?;
    let den: i64 = den
        .trim()
        .parse()
        .map_err(|_| Error::Input(format!("{ctx}: \"{s}\" has a non-integer denominator")))?;
    if den <= 0 {
        return Err(Error::Input(format!("{ctx}: \"{s}\" has a nonpositive denominator")));
    }
    Ok((num, den))
}

/// Parse an exponent: a number `p ≥ 1`, or a rational string `"n/d"` kept
/// exact for duality arithmetic.
pub fn parse_exponent(value: &Value) -> Result<Exponent> {
    match value {
        Value::String(s) => {
            let (num, den) = parse_ratio(s, "exponent")?;
            Exponent::from_ratio(num, den)
        }
        _ => Exponent::new(parse_real(value, "exponent")?),
    }
}

/// Parse a complex entry `[re, im]`.
pub fn parse_complex(value: &Value, ctx: &str) -> Result<C64> {
    let pair = as_array(value, ctx)?;
    if pair.len() != 2 {
        return Err(Error::Input(format!(
            "{ctx}: a complex entry is a pair [re, im], got {} elements",
            pair.len()
        )));
    }
    Ok(C64::new(
        parse_real(&pair[0], ctx)?,
        parse_real(&pair[1], ctx)?,
    ))
}

/// Parse a square row-major matrix `[[[re,im], ...], ...]` onto the
/// normalized counting measure of its dimension.
pub fn parse_mat(value: &Value, ctx: &str) -> Result<MatF> {
    let rows = as_array(value, ctx)?;
    let d = rows.len();
    let mut entries = Vec::with_capacity(d * d);
    for (r, row) in rows.iter().enumerate() {
        let row = as_array(row, &format!("{ctx}, row {r}"))?;
        if row.len() != d {
            return Err(Error::Input(format!(
                "{ctx}: row {r} has {} entries, expected {d} for a square matrix",
                row.len()
            )));
        }
        for (c, entry) in row.iter().enumerate() {
            entries.push(parse_complex(entry, &format!("{ctx}, entry ({r}, {c})"))?);
        }
    }
    Mat::square(d, entries)
}

/// Parse a similarity system
/// `{"d": int, "diagonal": bool, "index": [{"label", "f", "s"}, ...]}`
/// and validate every type invariant.
pub fn parse_system(value: &Value) -> Result<SimilaritySystem> {
    let (system, violations) = parse_system_lenient(value)?;
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Input(format!("system: {}", list.join("; "))));
    }
    Ok(system)
}

/// Parse a similarity system but return invariant violations instead of
/// failing on them; shape errors still fail.
pub fn parse_system_lenient(value: &Value) -> Result<(SimilaritySystem, Vec<Violation>)> {
    let obj = as_object(value, "system")?;
    let d = want(obj, "d", "system")?
        .as_u64()
        .ok_or_else(|| Error::Input("system: \"d\" must be a positive integer".into()))?
        as usize;
    let diagonal = want(obj, "diagonal", "system")?
        .as_bool()
        .ok_or_else(|| Error::Input("system: \"diagonal\" must be a boolean".into()))?;
    let index = as_array(want(obj, "index", "system")?, "system index")?;
    let mut entries = Vec::with_capacity(index.len());
    for (i, item) in index.iter().enumerate() {
        let ctx = format!("system index entry {i}");
        let item = as_object(item, &ctx)?;
        let label = want(item, "label", &ctx)?
            .as_str()
            .ok_or_else(|| Error::Input(format!("{ctx}: \"label\" must be a string")))?;
        let f = parse_real(want(item, "f", &ctx)?, &format!("{ctx}, weight f"))?;
        let s = parse_mat(want(item, "s", &ctx)?, &format!("{ctx}, matrix s"))?;
        entries.push(SystemEntry::new(label, f, s));
    }
    let system = SimilaritySystem::new(d, entries, diagonal)?;
    let violations = system.validate();
    Ok((system, violations))
}

/// Parse a stage spec
/// `{"p": number-or-ratio, "stages": [{"d": int, "system": ...}, ...]}`.
///
/// A stage's `"system"` is either a full system object or the shorthand
/// `{"family": "gamma_corner", "gamma": γ}` for the corner system of its
/// dimension.
pub fn parse_stage_spec(value: &Value) -> Result<StageSpec> {
    let obj = as_object(value, "stage spec")?;
    let p = parse_exponent(want(obj, "p", "stage spec")?)?;
    let stage_values = as_array(want(obj, "stages", "stage spec")?, "stage list")?;
    let mut stages = Vec::with_capacity(stage_values.len());
    for (n, item) in stage_values.iter().enumerate() {
        let ctx = format!("stage {n}");
        let item = as_object(item, &ctx)?;
        let d = want(item, "d", &ctx)?
            .as_u64()
            .ok_or_else(|| Error::Input(format!("{ctx}: \"d\" must be a positive integer")))?
            as usize;
        let system_value = want(item, "system", &ctx)?;
        let system = match as_object(system_value, &ctx)?.get("family") {
            Some(family) => {
                let family = family
                    .as_str()
                    .ok_or_else(|| Error::Input(format!("{ctx}: \"family\" must be a string")))?;
                if family != "gamma_corner" {
                    return Err(Error::Input(format!(
                        "{ctx}: unknown stage family \"{family}\", expected \"gamma_corner\""
                    )));
                }
                let gamma = parse_real(
                    want(as_object(system_value, &ctx)?, "gamma", &ctx)?,
                    &format!("{ctx}, gamma"),
                )?;
                SimilaritySystem::gamma_corners(d, gamma)?
            }
            None => parse_system(system_value)?,
        };
        if system.d() != d {
            return Err(Error::Input(format!(
                "{ctx}: declared dimension {d} but the system has dimension {}",
                system.d()
            )));
        }
        stages.push(Stage::new(system));
    }
    StageSpec::new(p, stages)
}

/// Parse a family recipe `{"family": "power"|"geometric"|"log", ...}`.
pub fn parse_family(value: &Value) -> Result<FamilyRecipe> {
    let obj = as_object(value, "family")?;
    let name = want(obj, "family", "family")?
        .as_str()
        .ok_or_else(|| Error::Input("family: \"family\" must be a string".into()))?;
    let field = |key: &str| -> Result<f64> {
        parse_real(want(obj, key, "family")?, &format!("family parameter {key}"))
    };
    let recipe = match name {
        "power" => FamilyRecipe::Power { c: field("c")?, a: field("a")? },
        "geometric" => FamilyRecipe::Geometric { c: field("c")?, q: field("q")? },
        "log" => FamilyRecipe::Log { c: field("c")?, b: field("b")? },
        other => {
            return Err(Error::Input(format!(
                "family: unknown family \"{other}\", expected power, geometric, or log"
            )))
        }
    };
    recipe.validate()?;
    Ok(recipe)
}

/// A complex number as a `[re, im]` pair.
pub fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

/// A matrix as a row-major array of rows of `[re, im]` pairs.
pub fn mat_json(a: &MatF) -> Value {
    let rows: Vec<Value> = (0..a.rows())
        .map(|r| Value::Array((0..a.cols()).map(|c| complex_json(*a.get(r, c))).collect()))
        .collect();
    Value::Array(rows)
}

/// A similarity system in the load format of [`parse_system`].
pub fn system_json(system: &SimilaritySystem) -> Value {
    let index: Vec<Value> = system
        .entries()
        .iter()
        .map(|e| {
            json!({
                "label": e.label(),
                "f": e.f(),
                "s": mat_json(e.s()),
            })
        })
        .collect();
    json!({
        "d": system.d(),
        "diagonal": system.diagonal(),
        "index": index,
    })
}

/// A family recipe in the load format of [`parse_family`].
pub fn family_json(recipe: &FamilyRecipe) -> Value {
    match recipe {
        FamilyRecipe::Power { c, a } => json!({"family": "power", "c": c, "a": a}),
        FamilyRecipe::Geometric { c, q } => json!({"family": "geometric", "c": c, "q": q}),
        FamilyRecipe::Log { c, b } => json!({"family": "log", "c": c, "b": b}),
    }
}

/// A certified norm interval with method tags and, when present, the
/// witness reproducing the lower bound.
pub fn norm_interval_json(interval: &NormInterval) -> Value {
    let methods: Vec<Value> = interval
        .methods
        .iter()
        .map(|m| Value::String(m.tag().into()))
        .collect();
    let witness = match &interval.witness {
        None => Value::Null,
        Some(Witness::Vector(v)) => json!({
            "kind": "vector",
            "coords": Value::Array(v.coords.iter().map(|z| complex_json(*z)).collect()),
        }),
        Some(Witness::Argument(a)) => json!({
            "kind": "argument",
            "entries": mat_json(a),
        }),
    };
    json!({
        "lower": interval.lower,
        "upper": interval.upper,
        "methods": methods,
        "witness": witness,
    })
}

/// A series report with terms, prefix data, and the verdict.
pub fn series_report_json(report: &SeriesReport) -> Value {
    json!({
        "terms": report.terms(),
        "partial_sums": report.partial_sums(),
        "partial_products": report.partial_products(),
        "verdict": report.verdict().tag(),
        "verdict_basis": report.verdict_basis(),
    })
}
