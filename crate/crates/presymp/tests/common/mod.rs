#![allow(dead_code)]

use presymp::foliation::{gotay_form, null_distribution, polarization_complement, GotayModel, Polarization};
use presymp::io_cli::Manifest;
use presymp::linf::{build_vdata, Orders, VData};
use presymp::skewcore::{ratio, Rational};
use presymp::stratify::{FormField, Region};
use presymp::symfield::{exterior_d, Chart, DiffForm, Poly};
use num_traits::Zero;
use rand::Rng;

pub fn corpus(name: &str) -> FormField {
    Manifest::corpus().field(name).unwrap()
}

pub fn origin(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

pub fn polarize(w: &FormField) -> Polarization {
    let n = w.dim();
    let f = null_distribution(w, &Region::cube(n, -1.0, 1.0), 1).unwrap();
    polarization_complement(w, &f, None, &origin(n)).unwrap()
}

pub fn gotay(w: &FormField) -> GotayModel {
    gotay_form(&polarize(w)).unwrap()
}

pub fn vdata(w: &FormField, orders: Orders) -> VData {
    build_vdata(&gotay(w), orders).unwrap()
}

pub fn small_rational(rng: &mut impl Rng) -> Rational {
    ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

/// A random polynomial in `vars` variables of total degree at most `deg`.
pub fn random_poly(rng: &mut impl Rng, vars: usize, deg: u32, terms: usize) -> Poly {
    Poly::from_terms((0..terms).map(|_| {
        let mut left = deg;
        let exps = (0..vars)
            .map(|_| {
                let e = rng.gen_range(0..=left);
                left -= e;
                e
            })
            .collect();
        (exps, small_rational(rng))
    }))
}

/// `dα` for a random polynomial 1-form `α`.
pub fn random_exact_form(rng: &mut impl Rng, chart: &std::sync::Arc<Chart>, deg: u32) -> DiffForm {
    let n = chart.dim();
    let mut alpha = DiffForm::zero(chart.clone());
    for i in 0..n {
        alpha = alpha.add(&DiffForm::basis(chart.clone(), &[i], random_poly(rng, n, deg, 3)));
    }
    exterior_d(&alpha).unwrap()
}
