//! Deterministic text rendering, readable back by the manifest parser.

use num_traits::{One, Signed};

use super::field::Alternating;
use super::poly::Poly;
use super::Chart;

fn monomial(e: &[u32], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.iter().enumerate() {
        match k {
            0 => {}
            1 => parts.push(names[i].clone()),
            _ => parts.push(format!("{}^{k}", names[i])),
        }
    }
    parts.join("*")
}

fn signed_terms(p: &Poly, names: &[String]) -> Vec<(bool, String)> {
    let mut out: Vec<(u32, bool, String)> = p
        .terms()
        .map(|(e, c)| {
            let m = monomial(e, names);
            let a = c.abs();
            let body = match (m.is_empty(), a.is_one()) {
                (true, _) => a.to_string(),
                (false, true) => m,
                (false, false) => format!("{a}*{m}"),
            };
            (e.iter().sum(), c.is_negative(), body)
        })
        .collect();
    // highest total degree first, ties broken by the printed form
    out.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.2.cmp(&b.2)));
    out.into_iter().map(|(_, n, b)| (n, b)).collect()
}

fn join(terms: &[(bool, String)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (neg, body)) in terms.iter().enumerate() {
        match (k, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(body);
    }
    s
}

/// `3/4*x1^2*x2 - x3 + 1`, with coordinate names from the chart.
pub fn format_poly(p: &Poly, chart: &Chart) -> String {
    join(&signed_terms(p, chart.names()))
}

fn format_alternating<K>(a: &Alternating<K>, symbol: impl Fn(&str) -> String, sep: &str) -> String {
    let g = a.to_global();
    let names = g.chart().names().to_vec();
    let mut out = Vec::new();
    for (idx, c) in g.terms() {
        let basis = idx.iter().map(|&i| symbol(&names[i])).collect::<Vec<_>>().join(sep);
        let coeff = signed_terms(c, &names);
        let term = if basis.is_empty() {
            (false, join(&coeff))
        } else if coeff.len() == 1 {
            let (neg, body) = &coeff[0];
            if body == "1" {
                (*neg, basis)
            } else {
                (*neg, format!("{body}*{basis}"))
            }
        } else {
            (false, format!("({})*{basis}", join(&coeff)))
        };
        out.push(term);
    }
    join(&out)
}

/// `x1*dx1^dx2 + dx3^dx4`.
pub fn format_form<K>(a: &Alternating<K>) -> String {
    format_alternating(a, |n| format!("d{n}"), "^")
}

/// `x1*d/dx3 + d/dx1^d/dx2`.
pub fn format_multivector<K>(a: &Alternating<K>) -> String {
    format_alternating(a, |n| format!("d/d{n}"), "^")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skewcore::ratio;
    use crate::symfield::{DiffForm, MultiVector};

    #[test]
    fn renders_forms_and_vectors() {
        let c = Chart::standard(4);
        let w = DiffForm::basis(c.clone(), &[0, 1], Poly::var(0)).add(&DiffForm::basis(c.clone(), &[2, 3], Poly::one()));
        assert_eq!(format_form(&w), "x1*dx1^dx2 + dx3^dx4");
        let v = MultiVector::basis(c.clone(), &[2], Poly::var(0).scale(&ratio(-3, 4)));
        assert_eq!(format_multivector(&v), "-3/4*x1*d/dx3");
        let p = DiffForm::basis(c, &[1], Poly::var(0) + Poly::one());
        assert_eq!(format_form(&p), "(x1 + 1)*dx2");
    }
}
