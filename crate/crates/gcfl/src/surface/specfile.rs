//! Surface-spec documents: a UTF-8 key/value format with one `[surface]`
//! section. `#` starts a comment, values are numbers, quoted strings or
//! two-element numeric arrays.
//!
//! ```text
//! [surface]
//! kind = "torus"     # implicit | plane-curve-cylinder | torus | quadric
//! a = 3
//! b = 1
//! hbar = 1.0         # optional, defaults to 1
//! mu = 1.0           # optional, defaults to 1
//! ```
//!
//! Kind-specific keys: `f` (implicit expression), `u` and `domain`
//! (plane-curve cylinder), `a`,`b` (torus), `a`,`b`,`c`,`alpha`,`beta`,
//! `gamma`,`delta` (quadric). `tol` scales the surface-membership tolerance.

use super::{PlaneCurve, QuadricParams, SurfaceShape, SurfaceSpec};
use crate::error::{Error, Result};
use crate::expr::parse_expression;

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Str(String),
    Array(Vec<f64>),
}

#[derive(Debug)]
struct Entry {
    key: String,
    value: Value,
    line: usize,
    col: usize,
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

fn parse_value(raw: &str, line: usize, col: usize) -> Result<Value> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(parse_err(line, col, "missing value"));
    }
    if let Some(stripped) = raw.strip_prefix('"') {
        let Some(inner) = stripped.strip_suffix('"') else {
            return Err(parse_err(line, col, "unterminated string"));
        };
        return Ok(Value::Str(inner.to_string()));
    }
    if let Some(stripped) = raw.strip_prefix('[') {
        let Some(inner) = stripped.strip_suffix(']') else {
            return Err(parse_err(line, col, "unterminated array"));
        };
        let mut items = Vec::new();
        for part in inner.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let v: f64 = part
                .parse()
                .map_err(|_| parse_err(line, col, format!("invalid number `{part}` in array")))?;
            items.push(v);
        }
        return Ok(Value::Array(items));
    }
    let v: f64 = raw
        .parse()
        .map_err(|_| parse_err(line, col, format!("invalid value `{raw}`")))?;
    Ok(Value::Number(v))
}

fn parse_document(text: &str) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    let mut in_surface = false;
    let mut seen_surface = false;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            // do not cut '#' inside a quoted string
            Some(pos) if !raw_line[..pos].contains('"') || raw_line[..pos].matches('"').count() % 2 == 0 => {
                &raw_line[..pos]
            }
            _ => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(section) = trimmed.strip_prefix('[') {
            let Some(name) = section.strip_suffix(']') else {
                return Err(parse_err(line_no, 1, "unterminated section header"));
            };
            if name.trim() != "surface" {
                return Err(parse_err(line_no, 1, format!("unknown section `{}`", name.trim())));
            }
            in_surface = true;
            seen_surface = true;
            continue;
        }
        if !in_surface {
            return Err(parse_err(line_no, 1, "expected `[surface]` section header"));
        }
        let Some(eq) = trimmed.find('=') else {
            return Err(parse_err(line_no, 1, "expected `key = value`"));
        };
        let key = trimmed[..eq].trim().to_string();
        let col = raw_line.find('=').map(|p| p + 2).unwrap_or(1);
        let value = parse_value(&trimmed[eq + 1..], line_no, col)?;
        if entries.iter().any(|e: &Entry| e.key == key) {
            return Err(parse_err(line_no, 1, format!("duplicate key `{key}`")));
        }
        entries.push(Entry { key, value, line: line_no, col });
    }
    if !seen_surface {
        return Err(parse_err(1, 1, "missing `[surface]` section"));
    }
    Ok(entries)
}

struct Fields {
    entries: Vec<Entry>,
}

impl Fields {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => match &e.value {
                Value::Number(v) => Ok(Some(*v)),
                _ => Err(parse_err(e.line, e.col, format!("`{key}` must be a number"))),
            },
        }
    }

    fn string(&self, key: &str) -> Result<Option<(&str, usize, usize)>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => match &e.value {
                Value::Str(s) => Ok(Some((s.as_str(), e.line, e.col))),
                _ => Err(parse_err(e.line, e.col, format!("`{key}` must be a quoted string"))),
            },
        }
    }

    fn require_number(&self, key: &str) -> Result<f64> {
        self.number(key)?
            .ok_or_else(|| Error::InvalidSpec(format!("missing required key `{key}`")))
    }

    fn interval(&self, key: &str) -> Result<Option<[f64; 2]>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => match &e.value {
                Value::Array(v) if v.len() == 2 && v[0] < v[1] => Ok(Some([v[0], v[1]])),
                _ => Err(parse_err(e.line, e.col, format!("`{key}` must be `[lo, hi]` with lo < hi"))),
            },
        }
    }

    fn sign_param(&self, key: &str, allowed: &[i32]) -> Result<i32> {
        let v = self.require_number(key)?;
        if v.fract() != 0.0 || !allowed.contains(&(v as i32)) {
            return Err(Error::InvalidSpec(format!("`{key}` must be one of {allowed:?}")));
        }
        Ok(v as i32)
    }
}

/// Parse a surface-spec document into a validated [`SurfaceSpec`].
pub fn parse_surface(text: &str) -> Result<SurfaceSpec> {
    let fields = Fields { entries: parse_document(text)? };
    let Some((kind, kline, kcol)) = fields.string("kind")? else {
        return Err(Error::InvalidSpec("missing required key `kind`".into()));
    };

    let shape = match kind {
        "implicit" => {
            let Some((src, line, col)) = fields.string("f")? else {
                return Err(Error::InvalidSpec("implicit surface needs key `f`".into()));
            };
            let f = parse_expression(src).map_err(|e| relocate(e, line, col))?;
            SurfaceShape::Implicit { f, source: src.to_string() }
        }
        "plane-curve-cylinder" => {
            let Some((src, line, col)) = fields.string("u")? else {
                return Err(Error::InvalidSpec("plane-curve cylinder needs key `u`".into()));
            };
            let u = parse_expression(src).map_err(|e| relocate(e, line, col))?;
            if !u.is_univariate() {
                return Err(Error::InvalidSpec("cross-section expression `u` may only use x".into()));
            }
            let domain = fields
                .interval("domain")?
                .ok_or_else(|| Error::InvalidSpec("plane-curve cylinder needs key `domain`".into()))?;
            SurfaceShape::PlaneCurveCylinder {
                curve: PlaneCurve { u, source: src.to_string(), domain },
            }
        }
        "torus" => {
            let a = fields.require_number("a")?;
            let b = fields.require_number("b")?;
            if !(a > b && b > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "torus constraint a > b > 0 violated (a = {a}, b = {b})"
                )));
            }
            SurfaceShape::Torus { major: a, minor: b }
        }
        "quadric" => {
            let a = fields.require_number("a")?;
            let b = fields.require_number("b")?;
            let c = fields.require_number("c")?;
            if a <= 0.0 || b <= 0.0 || c <= 0.0 {
                return Err(Error::InvalidSpec("quadric semi-axes a, b, c must be positive".into()));
            }
            let params = QuadricParams {
                a,
                b,
                c,
                alpha: fields.sign_param("alpha", &[-1, 0, 1])?,
                beta: fields.sign_param("beta", &[-1, 0, 1])?,
                gamma: fields.sign_param("gamma", &[-1, 0, 1])?,
                delta: fields.sign_param("delta", &[0, 1])?,
            };
            SurfaceShape::Quadric(params)
        }
        other => {
            return Err(parse_err(kline, kcol, format!("unknown surface kind `{other}`")));
        }
    };

    let hbar = fields.number("hbar")?.unwrap_or(1.0);
    let mu = fields.number("mu")?.unwrap_or(1.0);
    let tol = fields.number("tol")?.unwrap_or(1e-10);
    if hbar <= 0.0 || mu <= 0.0 || tol <= 0.0 {
        return Err(Error::InvalidSpec("hbar, mu and tol must be positive".into()));
    }
    SurfaceSpec::new(shape, hbar, mu, tol)
}

fn relocate(e: Error, line: usize, col: usize) -> Error {
    match e {
        Error::Parse { col: inner_col, msg, .. } => Error::Parse {
            line,
            col: col + inner_col, // expression starts after the opening quote
            msg,
        },
        other => other,
    }
}

/// Serialize a spec back to the document format. Parsing the output yields
/// an identical spec.
pub fn write_surface(spec: &SurfaceSpec) -> String {
    let mut out = String::from("[surface]\n");
    match &spec.shape {
        SurfaceShape::Implicit { source, .. } => {
            out.push_str("kind = \"implicit\"\n");
            out.push_str(&format!("f = \"{source}\"\n"));
        }
        SurfaceShape::PlaneCurveCylinder { curve } => {
            out.push_str("kind = \"plane-curve-cylinder\"\n");
            out.push_str(&format!("u = \"{}\"\n", curve.source));
            out.push_str(&format!("domain = [{:?}, {:?}]\n", curve.domain[0], curve.domain[1]));
        }
        SurfaceShape::Torus { major, minor } => {
            out.push_str("kind = \"torus\"\n");
            out.push_str(&format!("a = {major:?}\nb = {minor:?}\n"));
        }
        SurfaceShape::Quadric(q) => {
            out.push_str("kind = \"quadric\"\n");
            out.push_str(&format!("a = {:?}\nb = {:?}\nc = {:?}\n", q.a, q.b, q.c));
            out.push_str(&format!(
                "alpha = {}\nbeta = {}\ngamma = {}\ndelta = {}\n",
                q.alpha, q.beta, q.gamma, q.delta
            ));
        }
    }
    out.push_str(&format!("hbar = {:?}\nmu = {:?}\ntol = {:?}\n", spec.hbar, spec.mu, spec.tol_factor));
    out
}
