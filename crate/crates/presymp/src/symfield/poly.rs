//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Exponent vectors are stored with trailing zeros trimmed, so a polynomial
//! does not carry its number of variables and `0`, `1` are ring constants.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::skewcore::{to_f64, Rational};

pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Exponents, Rational>,
}

fn trim(mut e: Exponents) -> Exponents {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

impl Poly {
    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![], c);
        }
        Poly { terms }
    }

    pub fn var(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Self::monomial(e, Rational::one())
    }

    pub fn monomial(exps: Exponents, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(trim(exps), c);
        }
        Poly { terms }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Exponents, Rational)>) -> Self {
        let mut p = Poly::zero();
        for (e, c) in iter {
            p.add_term(trim(e), c);
        }
        p
    }

    fn add_term(&mut self, e: Exponents, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest variable index in use, plus one.
    pub fn used_vars(&self) -> usize {
        self.terms.keys().map(|e| e.len()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.is_empty())
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&vec![]).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree counted only in variables `0..k`.
    pub fn degree_in_first(&self, k: usize) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().take(k).sum()).max()
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn deriv(&self, i: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let Some(&k) = e.get(i) else { continue };
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(trim(e2), c * Rational::from_integer(k.into()));
        }
        out
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= num_traits::pow(x[i].clone(), k as usize);
                }
            }
            total += t;
        }
        total
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().enumerate().fold(to_f64(c), |acc, (i, &k)| acc * x[i].powi(k as i32))
            })
            .sum()
    }

    /// Drops monomials whose degree in variables `0..k` exceeds `max`.
    pub fn truncate_in_first(&self, k: usize, max: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().take(k).sum::<u32>() <= max)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn truncate(&self, max: u32) -> Poly {
        self.truncate_in_first(usize::MAX, max)
    }

    /// Keeps monomials whose degree in variables `vars` is at most `max`.
    pub fn truncate_in(&self, vars: &[usize], max: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| vars.iter().map(|&v| e.get(v).copied().unwrap_or(0)).sum::<u32>() <= max)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Substitutes `x_i -> subs[i]`. Variables beyond `subs` are left alone.
    pub fn compose(&self, subs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = &t * subs.get(i).cloned().unwrap_or_else(|| Poly::var(i));
                }
            }
            out = out + t;
        }
        out
    }

    /// `p(x) -> p(base + u)`, expressed in `u`.
    pub fn shift(&self, base: &[Rational]) -> Poly {
        let subs: Vec<Poly> = base
            .iter()
            .enumerate()
            .map(|(i, b)| Poly::var(i) + Poly::constant(b.clone()))
            .collect();
        self.compose(&subs)
    }

    /// Renames variable `i` to `map[i]`.
    pub fn relabel(&self, map: &[usize]) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(e, c)| {
            let mut out = vec![0; map.iter().copied().max().map_or(0, |m| m + 1)];
            for (i, &k) in e.iter().enumerate() {
                out[map[i]] += k;
            }
            (out, c.clone())
        }))
    }

    /// True if no monomial involves any of `vars`.
    pub fn independent_of(&self, vars: &[usize]) -> bool {
        self.terms.keys().all(|e| vars.iter().all(|&v| e.get(v).copied().unwrap_or(0) == 0))
    }

    /// Sets each of `vars` to zero.
    pub fn restrict_zero(&self, vars: &[usize]) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| vars.iter().all(|&v| e.get(v).copied().unwrap_or(0) == 0))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> Rational {
        use num_traits::Signed;
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(Rational::one())
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (e, c) in &rhs.terms {
            let slot = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
            *slot += c;
            if slot.is_zero() {
                self.terms.remove(e);
            }
        }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out: BTreeMap<Exponents, Rational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let n = e1.len().max(e2.len());
                let e: Exponents = (0..n)
                    .map(|i| e1.get(i).copied().unwrap_or(0) + e2.get(i).copied().unwrap_or(0))
                    .collect();
                *out.entry(e).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Poly { terms: out }
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Mul<Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        self * &rhs
    }
}
