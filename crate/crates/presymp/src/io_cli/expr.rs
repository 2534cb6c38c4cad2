//! Expressions over a chart: rational literals, coordinates, `+ - * ^`,
//! parentheses, differentials `dx1` and vector fields `d/dx1`.
//!
//! `^` is a power when the exponent is an integer literal and the base a
//! scalar, and the wedge product otherwise. It binds tighter than `*`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::IoError;
use crate::skewcore::Rational;
use crate::symfield::{wedge, Chart, DiffForm, MultiVector, Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Scalar(Poly),
    Form(DiffForm),
    Field(MultiVector),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Form(_) => "form",
            Value::Field(_) => "multivector",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number {n}"),
            Tok::Ident(s) => format!("name `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

/// Token with its 1-based column.
type Spanned = (Tok, usize);

fn lex(text: &str, line: usize, col0: usize) -> Result<Vec<Spanned>, IoError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((Tok::Num(s.parse().expect("digits")), col));
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            other => return Err(IoError::Lex { line, col, found: other }),
        };
        out.push((tok, col));
        i += 1;
    }
    out.push((Tok::End, col0 + chars.len()));
    Ok(out)
}

/// Previously defined values that expressions may refer to by name.
pub type Env = BTreeMap<String, Value>;

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    line: usize,
    chart: &'a Arc<Chart>,
    env: &'a Env,
}

const ATOM: &[&str] = &["number", "coordinate", "differential `dx`", "vector `d/dx`", "defined name", "`(`"];

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> IoError {
        IoError::Parse {
            line: self.line,
            col: self.col(),
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn type_error(&self, col: usize, msg: String) -> IoError {
        IoError::Type { line: self.line, col, msg }
    }

    fn expr(&mut self) -> Result<Value, IoError> {
        let mut acc = self.term()?;
        loop {
            let col = self.col();
            let neg = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => return Ok(acc),
            };
            self.bump();
            let mut rhs = self.term()?;
            if neg {
                rhs = negate(rhs);
            }
            acc = add(acc, rhs).map_err(|m| self.type_error(col, m))?;
        }
    }

    fn term(&mut self) -> Result<Value, IoError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Star {
            let col = self.col();
            self.bump();
            let rhs = self.unary()?;
            acc = mul(acc, rhs).map_err(|m| self.type_error(col, m))?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Value, IoError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(negate(self.unary()?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Value, IoError> {
        let mut acc = self.atom()?;
        while *self.peek() == Tok::Caret {
            let col = self.col();
            self.bump();
            if let (Value::Scalar(p), Tok::Num(k)) = (&acc, self.peek().clone()) {
                self.bump();
                let k = k.to_u32().filter(|k| *k <= 64).ok_or_else(|| self.type_error(col, "exponent too large".into()))?;
                acc = Value::Scalar(poly_pow(p, k));
                continue;
            }
            let rhs = self.atom()?;
            acc = wedge_values(acc, rhs).map_err(|m| self.type_error(col, m))?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Value, IoError> {
        let col = self.col();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                let mut q = Rational::from_integer(n);
                if *self.peek() == Tok::Slash {
                    self.bump();
                    match self.bump() {
                        Tok::Num(d) if !d.is_zero() => q /= Rational::from_integer(d),
                        Tok::Num(_) => return Err(self.type_error(col, "zero denominator".into())),
                        _ => {
                            self.pos -= 1;
                            return Err(self.unexpected(&["denominator"]));
                        }
                    }
                }
                Ok(Value::Scalar(Poly::constant(q)))
            }
            Tok::LParen => {
                self.bump();
                let v = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected(&["`)`", "`+`", "`-`", "`*`", "`^`"]));
                }
                self.bump();
                Ok(v)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "d" && *self.peek() == Tok::Slash {
                    self.bump();
                    let col = self.col();
                    let Tok::Ident(target) = self.peek().clone() else {
                        return Err(self.unexpected(&["`dx` after `d/`"]));
                    };
                    let coord = target.strip_prefix('d').and_then(|v| self.chart.index_of(v));
                    let Some(i) = coord else {
                        return Err(IoError::Unresolved { line: self.line, col, name: target });
                    };
                    self.bump();
                    return Ok(Value::Field(MultiVector::basis(self.chart.clone(), &[i], Poly::one())));
                }
                if let Some(i) = self.chart.index_of(&name) {
                    return Ok(Value::Scalar(Poly::var(i)));
                }
                if let Some(v) = self.env.get(&name) {
                    return Ok(v.clone());
                }
                if let Some(i) = name.strip_prefix('d').and_then(|v| self.chart.index_of(v)) {
                    return Ok(Value::Form(DiffForm::basis(self.chart.clone(), &[i], Poly::one())));
                }
                Err(IoError::Unresolved { line: self.line, col, name })
            }
            _ => Err(self.unexpected(ATOM)),
        }
    }
}

fn poly_pow(p: &Poly, k: u32) -> Poly {
    let mut out = Poly::one();
    for _ in 0..k {
        out = &out * p;
    }
    out
}

fn negate(v: Value) -> Value {
    match v {
        Value::Scalar(p) => Value::Scalar(-p),
        Value::Form(f) => Value::Form(f.neg()),
        Value::Field(f) => Value::Field(f.neg()),
    }
}

fn add(a: Value, b: Value) -> Result<Value, String> {
    Ok(match (a, b) {
        (Value::Scalar(p), Value::Scalar(q)) => Value::Scalar(p + q),
        (Value::Form(f), Value::Form(g)) => Value::Form(f.add(&g)),
        (Value::Field(f), Value::Field(g)) => Value::Field(f.add(&g)),
        (Value::Scalar(p), Value::Form(f)) | (Value::Form(f), Value::Scalar(p)) => {
            Value::Form(f.add(&DiffForm::scalar(f.chart().clone(), p)))
        }
        (Value::Scalar(p), Value::Field(f)) | (Value::Field(f), Value::Scalar(p)) => {
            Value::Field(f.add(&MultiVector::scalar(f.chart().clone(), p)))
        }
        (a, b) => return Err(format!("cannot add a {} and a {}", a.kind(), b.kind())),
    })
}

fn mul(a: Value, b: Value) -> Result<Value, String> {
    Ok(match (a, b) {
        (Value::Scalar(p), Value::Scalar(q)) => Value::Scalar(&p * &q),
        (Value::Scalar(p), Value::Form(f)) | (Value::Form(f), Value::Scalar(p)) => Value::Form(f.map_coeffs(|c| c * &p)),
        (Value::Scalar(p), Value::Field(f)) | (Value::Field(f), Value::Scalar(p)) => Value::Field(f.map_coeffs(|c| c * &p)),
        (a, b) => return Err(format!("`*` between a {} and a {}; use `^` for wedges", a.kind(), b.kind())),
    })
}

fn wedge_values(a: Value, b: Value) -> Result<Value, String> {
    match (a, b) {
        (Value::Form(f), Value::Form(g)) => Ok(Value::Form(wedge(&f, &g).map_err(|e| e.to_string())?)),
        (Value::Field(f), Value::Field(g)) => Ok(Value::Field(wedge(&f, &g).map_err(|e| e.to_string())?)),
        (Value::Scalar(_), Value::Scalar(_)) => Err("exponent must be a nonnegative integer literal".into()),
        (a, b) => mul(a, b),
    }
}

/// Parses `text`, reporting positions as `line` and `col0 + offset`.
pub fn parse_value_at(text: &str, chart: &Arc<Chart>, env: &Env, line: usize, col0: usize) -> Result<Value, IoError> {
    let toks = lex(text, line, col0)?;
    let mut p = Parser { toks, pos: 0, line, chart, env };
    let v = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(&["`+`", "`-`", "`*`", "`^`", "end of input"]));
    }
    Ok(v)
}

pub fn parse_value(text: &str, chart: &Arc<Chart>) -> Result<Value, IoError> {
    parse_value_at(text, chart, &Env::new(), 1, 1)
}

/// A 2-form, 1-form or any form; scalars are 0-forms.
pub fn parse_form(text: &str, chart: &Arc<Chart>) -> Result<DiffForm, IoError> {
    match parse_value(text, chart)? {
        Value::Form(f) => Ok(f),
        Value::Scalar(p) => Ok(DiffForm::scalar(chart.clone(), p)),
        Value::Field(_) => Err(IoError::Type { line: 1, col: 1, msg: "expected a form, found a multivector".into() }),
    }
}

pub fn parse_multivector(text: &str, chart: &Arc<Chart>) -> Result<MultiVector, IoError> {
    match parse_value(text, chart)? {
        Value::Field(f) => Ok(f),
        Value::Scalar(p) => Ok(MultiVector::scalar(chart.clone(), p)),
        Value::Form(_) => Err(IoError::Type { line: 1, col: 1, msg: "expected a multivector, found a form".into() }),
    }
}

pub fn parse_poly(text: &str, chart: &Arc<Chart>) -> Result<Poly, IoError> {
    match parse_value(text, chart)? {
        Value::Scalar(p) => Ok(p),
        v => Err(IoError::Type { line: 1, col: 1, msg: format!("expected a scalar, found a {}", v.kind()) }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skewcore::{int, ratio};
    use crate::symfield::{format_form, format_multivector, format_poly};
    use proptest::prelude::*;

    fn c4() -> Arc<Chart> {
        Chart::standard(4)
    }

    #[test]
    fn model_form_has_two_terms() {
        let w = parse_form("x1*dx1^dx2 + dx3^dx4", &c4()).unwrap();
        assert_eq!(w.terms().len(), 2);
        assert_eq!(w.coeff(&[0, 1]), Poly::var(0));
        assert_eq!(w.coeff(&[2, 3]), Poly::one());
    }

    #[test]
    fn repeated_differential_is_zero() {
        assert!(parse_form("dx1^dx1", &c4()).unwrap().is_zero());
        assert_eq!(parse_form("dx2^dx1", &c4()).unwrap(), parse_form("-dx1^dx2", &c4()).unwrap());
    }

    #[test]
    fn powers_literals_and_vectors() {
        let p = parse_poly("3/4*x1^2*x2 - (x3 + 1)^2", &c4()).unwrap();
        let x3 = Poly::var(2) + Poly::one();
        let expect = (&(&Poly::var(0) * &Poly::var(0)) * &Poly::var(1)).scale(&ratio(3, 4)) - &x3 * &x3;
        assert_eq!(p, expect);
        let v = parse_multivector("x1*d/dx3 + d/dx1^d/dx2", &c4()).unwrap();
        assert_eq!(v.coeff(&[2]), Poly::var(0));
        assert_eq!(v.coeff(&[0, 1]), Poly::one());
        assert_eq!(parse_poly("-2", &c4()).unwrap(), Poly::constant(int(-2)));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_form("x1*dx1^ + dx3", &c4()) {
            Err(IoError::Parse { line: 1, col: 9, expected, .. }) => assert!(expected.contains(&"coordinate".to_string())),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_form("y1*dx1", &c4()), Err(IoError::Unresolved { col: 1, .. })));
        assert!(matches!(parse_form("x1 $ x2", &c4()), Err(IoError::Lex { col: 4, found: '$', .. })));
        assert!(matches!(parse_form("dx1*dx2", &c4()), Err(IoError::Type { .. })));
        assert!(matches!(parse_form("dx1 + d/dx2", &c4()), Err(IoError::Type { .. })));
        assert!(matches!(parse_poly("1/0", &c4()), Err(IoError::Type { .. })));
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec(((0u32..3, 0u32..3, 0u32..2), -6i64..=6, 1i64..=4), 0..4).prop_map(|terms| {
            let mut p = Poly::zero();
            for ((a, b, c), n, d) in terms {
                let m = &(&poly_pow(&Poly::var(0), a) * &poly_pow(&Poly::var(1), b)) * &poly_pow(&Poly::var(3), c);
                p = p + m.scale(&ratio(n, d));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn form_round_trip(cs in prop::collection::vec(arb_poly(), 6)) {
            let c = c4();
            let idx = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
            let w = DiffForm::from_terms(c.clone(), idx.iter().zip(cs).map(|(i, p)| (i.to_vec(), p)));
            prop_assert_eq!(parse_form(&format_form(&w), &c).unwrap(), w);
        }

        #[test]
        fn vector_round_trip(cs in prop::collection::vec(arb_poly(), 4)) {
            let c = c4();
            let v = MultiVector::vector(c.clone(), cs);
            prop_assert_eq!(parse_multivector(&format_multivector(&v), &c).unwrap(), v);
        }

        #[test]
        fn poly_round_trip(p in arb_poly()) {
            prop_assert_eq!(parse_poly(&format_poly(&p, &c4()), &c4()).unwrap(), p);
        }
    }
}
