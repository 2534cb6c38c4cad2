//! Line-oriented manifests.
//!
//! ```text
//! presymp-manifest 1
//! chart R4 = x1, x2, x3, x4
//! omega = x1*dx1^dx2 + dx3^dx4, closed
//! frame F = [d/dx3, d/dx4]
//! tube T = [x1]
//! set samples = 500
//! ```
//!
//! Definitions use the most recent `chart`. Without one, the chart is
//! `x1, …, xN` for the largest `N` mentioned by the expression.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::expr::{parse_value_at, Env, Value};
use super::IoError;
use crate::foliation::TubeSystem;
use crate::stratify::FormField;
use crate::symfield::{exterior_d, Chart, DiffForm, MultiVector};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub chart: Arc<Chart>,
    pub value: Value,
    pub closed: bool,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub charts: BTreeMap<String, Arc<Chart>>,
    pub entries: BTreeMap<String, Entry>,
    pub frames: BTreeMap<String, (Arc<Chart>, Vec<MultiVector>)>,
    pub tubes: BTreeMap<String, TubeSystem>,
    pub params: BTreeMap<String, String>,
}

const CORPUS: &str = "presymp-manifest 1
chart R2 = x1, x2
plane = dx1^dx2, closed
chart R3 = x1, x2, x3
r3flat = dx1^dx2, closed
curved3 = (1 + x1^2)*dx1^dx2, closed
chart R4 = x1, x2, x3, x4
r4flat = dx1^dx2, closed
model4 = x1*dx1^dx2 + dx3^dx4, closed
r4sympl = dx1^dx2 + dx3^dx4, closed
tube T4 = [x1]
chart R5 = x1, x2, x3, x4, x5
r5flat = dx1^dx2, closed
chart R6 = x1, x2, x3, x4, x5, x6
r6 = dx1^dx2 + dx3^dx4, closed
";

fn split_top_level(s: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push((start, &s[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((start, &s[start..]));
    out
}

fn is_name(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|f| f.is_ascii_alphabetic() || f == '_') && c.all(|k| k.is_ascii_alphanumeric() || k == '_')
}

/// `x1, …, xN` covering every `xK`, `dxK` and `d/dxK` in `text`.
fn implicit_chart(text: &str) -> Arc<Chart> {
    let mut n = 0;
    for w in text.split(|c: char| !c.is_ascii_alphanumeric()) {
        let w = w.strip_prefix('d').filter(|r| r.starts_with('x')).unwrap_or(w);
        if let Some(k) = w.strip_prefix('x').and_then(|k| k.parse::<usize>().ok()) {
            n = n.max(k);
        }
    }
    Chart::standard(n)
}

fn bracketed(text: &str, line: usize, col: usize) -> Result<(&str, usize), IoError> {
    let t = text.trim();
    let inner = t.strip_prefix('[').and_then(|r| r.strip_suffix(']'));
    let lead = text.len() - text.trim_start().len();
    inner.map(|i| (i, col + lead + 1)).ok_or(IoError::Syntax { line, msg: "expected a bracketed list `[...]`".into() })
}

impl Manifest {
    /// The built-in forms every command can refer to by name.
    pub fn corpus() -> Manifest {
        Manifest::parse(CORPUS).expect("corpus manifest parses")
    }

    pub fn parse(text: &str) -> Result<Manifest, IoError> {
        let mut m = Manifest::default();
        let mut current: Option<Arc<Chart>> = None;
        let mut env = Env::new();
        let mut seen_content = false;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            if let Some(v) = body.trim().strip_prefix("presymp-manifest") {
                if seen_content {
                    return Err(IoError::Syntax { line, msg: "header must come first".into() });
                }
                let found: u32 = v.trim().parse().map_err(|_| IoError::Syntax { line, msg: "bad version".into() })?;
                if found != MANIFEST_VERSION {
                    return Err(IoError::Version { found });
                }
                seen_content = true;
                continue;
            }
            seen_content = true;
            let Some(eq) = body.find('=') else {
                return Err(IoError::Syntax { line, msg: "expected `name = value`".into() });
            };
            let lhs: Vec<&str> = body[..eq].split_whitespace().collect();
            let rhs = &body[eq + 1..];
            let col = eq + 2;
            let (keyword, name) = match lhs.as_slice() {
                [name] => ("", *name),
                [kw, name] => (*kw, *name),
                _ => return Err(IoError::Syntax { line, msg: "expected `[keyword] name = value`".into() }),
            };
            if !is_name(name) {
                return Err(IoError::Syntax { line, msg: format!("invalid name `{name}`") });
            }
            let taken = m.entries.contains_key(name) || m.frames.contains_key(name) || m.tubes.contains_key(name);
            if taken && keyword != "set" && keyword != "chart" {
                return Err(IoError::Duplicate { line, name: name.into() });
            }
            match keyword {
                "chart" => {
                    let names: Vec<String> = rhs.split(',').map(|s| s.trim().to_string()).collect();
                    let chart = Chart::new(names).map_err(|e| IoError::Syntax { line, msg: e.to_string() })?;
                    m.charts.insert(name.into(), chart.clone());
                    current = Some(chart);
                }
                "set" => {
                    m.params.insert(name.into(), rhs.trim().into());
                }
                "frame" => {
                    let chart = current.clone().unwrap_or_else(|| implicit_chart(rhs));
                    let (inner, c0) = bracketed(rhs, line, col)?;
                    let mut fields = Vec::new();
                    for (off, item) in split_top_level(inner, ',') {
                        match parse_value_at(item, &chart, &env, line, c0 + off)? {
                            Value::Field(v) if v.is_homogeneous(1) => fields.push(v),
                            v => return Err(IoError::Type { line, col: c0 + off, msg: format!("frame entries must be vector fields, found a {}", v.kind()) }),
                        }
                    }
                    m.frames.insert(name.into(), (chart, fields));
                }
                "tube" => {
                    let chart = current.clone().unwrap_or_else(|| implicit_chart(rhs));
                    let (inner, c0) = bracketed(rhs, line, col)?;
                    let mut fiber = Vec::new();
                    for (off, item) in split_top_level(inner, ',') {
                        let item = item.trim();
                        if item.is_empty() {
                            continue;
                        }
                        let i = chart.index_of(item).ok_or(IoError::Unresolved { line, col: c0 + off, name: item.into() })?;
                        fiber.push(i);
                    }
                    m.tubes.insert(name.into(), TubeSystem::new(chart.dim(), fiber));
                }
                "" | "form" | "field" => {
                    let parts = split_top_level(rhs, ',');
                    let (expr, closed) = match parts.as_slice() {
                        [(_, e)] => (*e, false),
                        [(_, e), (_, flag)] if flag.trim() == "closed" => (*e, true),
                        _ => return Err(IoError::Syntax { line, msg: "expected `expr` or `expr, closed`".into() }),
                    };
                    let chart = current.clone().unwrap_or_else(|| implicit_chart(expr));
                    let value = parse_value_at(expr, &chart, &env, line, col)?;
                    if closed {
                        let Value::Form(f) = &value else {
                            return Err(IoError::Type { line, col, msg: "only forms can be declared closed".into() });
                        };
                        if !exterior_d(f).map(|d| d.is_zero()).unwrap_or(false) {
                            return Err(IoError::NotClosed { line, name: name.into() });
                        }
                    }
                    env.insert(name.into(), value.clone());
                    m.entries.insert(name.into(), Entry { chart, value, closed, line });
                }
                other => return Err(IoError::Syntax { line, msg: format!("unknown keyword `{other}`") }),
            }
        }
        Ok(m)
    }

    /// `other` layered over `self`; later definitions win.
    pub fn merged(mut self, other: Manifest) -> Manifest {
        self.charts.extend(other.charts);
        self.entries.extend(other.entries);
        self.frames.extend(other.frames);
        self.tubes.extend(other.tubes);
        self.params.extend(other.params);
        self
    }

    pub fn form(&self, name: &str) -> Result<DiffForm, IoError> {
        match self.entries.get(name) {
            Some(Entry { value: Value::Form(f), .. }) => Ok(f.clone()),
            Some(e) => Err(IoError::Input(format!("`{name}` is a {}, not a form", e.value.kind()))),
            None => Err(IoError::Input(format!("no form named `{name}`"))),
        }
    }

    /// A closed 2-form.
    pub fn field(&self, name: &str) -> Result<FormField, IoError> {
        FormField::new(self.form(name)?).map_err(|e| IoError::Input(format!("`{name}`: {e}")))
    }

    pub fn tube(&self, name: &str) -> Result<TubeSystem, IoError> {
        self.tubes.get(name).cloned().ok_or_else(|| IoError::Input(format!("no tube named `{name}`")))
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfield::Poly;
    use num_traits::One;

    #[test]
    fn corpus_loads() {
        let m = Manifest::corpus();
        assert_eq!(m.field("model4").unwrap().dim(), 4);
        assert_eq!(m.tube("T4").unwrap().fiber(), &[0]);
        assert!(m.entries.values().all(|e| e.closed));
    }

    #[test]
    fn implicit_chart_and_two_terms() {
        let m = Manifest::parse("omega = x1*dx1^dx2 + dx3^dx4").unwrap();
        let w = m.form("omega").unwrap();
        assert_eq!(w.dim(), 4);
        assert_eq!(w.terms().len(), 2);
    }

    #[test]
    fn closedness_is_checked_at_load() {
        assert_eq!(Manifest::parse("omega = x1*dx2^dx3, closed").unwrap_err(), IoError::NotClosed { line: 1, name: "omega".into() });
        // without the declaration the form loads but is rejected as a field
        let m = Manifest::parse("omega = x1*dx2^dx3").unwrap();
        assert!(m.field("omega").is_err());
    }

    #[test]
    fn frames_tubes_params_and_references() {
        let text = "presymp-manifest 1\nchart R3 = a, b, c\nw = da^db, closed\nframe f = [d/dc, a*d/dc]\ntube T = [c]\nset seed = 3\nu = 2*w\n";
        let m = Manifest::parse(text).unwrap();
        assert_eq!(m.frames["f"].1.len(), 2);
        assert_eq!(m.tube("T").unwrap().fiber(), &[2]);
        assert_eq!(m.param("seed"), Some("3"));
        assert_eq!(m.form("u").unwrap().coeff(&[0, 1]), Poly::constant(crate::skewcore::int(2)));
        assert_eq!(m.form("w").unwrap().coeff(&[0, 1]), Poly::one());
    }

    #[test]
    fn errors_have_lines() {
        assert!(matches!(Manifest::parse("chart R2 = x1, x2\nw = dx1^dx3"), Err(IoError::Unresolved { line: 2, col: 9, .. })));
        assert!(matches!(Manifest::parse("w = dx1\nw = dx2"), Err(IoError::Duplicate { line: 2, .. })));
        assert!(matches!(Manifest::parse("presymp-manifest 2"), Err(IoError::Version { found: 2 })));
        assert!(matches!(Manifest::parse("bogus line"), Err(IoError::Syntax { line: 1, .. })));
        assert!(matches!(Manifest::parse("frame f = [dx1]"), Err(IoError::Type { .. })));
    }
}
