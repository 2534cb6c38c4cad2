//! Linear part of the gluing morphism from a lower stratum to a higher one.
//!
//! Foliation forms are transported by the tube retraction: coefficients are
//! composed with `π`, and `dy^a` goes to `Σ_{a'} M_{a a'} dy'^{a'}` where
//! `π_* F'_{a'} = Σ_a M_{a a'} F_a`.

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::MoserError;
use crate::foliation::{gotay_form, null_distribution, polarization_complement, GotayModel, Polarization, TubeSystem};
use crate::linf::{build_vdata, derived_bracket, random_element, AbelianElement, Orders, VData};
use crate::skewcore::{RatMatrix, Rational};
use crate::stratify::{FormField, Region};
use crate::symfield::{Chart, MultiVector, Poly};

/// Everything the gluing needs about one stratum.
#[derive(Clone, Debug)]
pub struct StratumPackage {
    pub polarization: Polarization,
    pub gotay: GotayModel,
    pub vdata: VData,
}

impl StratumPackage {
    pub fn build(form: &FormField, base: &[Rational], orders: Orders, seed: u64) -> Result<Self, MoserError> {
        let n = form.dim();
        let f = null_distribution(form, &Region::cube(n, -1.0, 1.0), seed)?;
        let polarization = polarization_complement(form, &f, None, base)?;
        let gotay = gotay_form(&polarization)?;
        let vdata = build_vdata(&gotay, orders)?;
        Ok(StratumPackage { polarization, gotay, vdata })
    }

    pub fn dim(&self) -> usize {
        self.vdata.base_dim()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlueCaps {
    /// Random elements per form degree in the chain-map check.
    pub trials: usize,
    pub seed: u64,
}

impl Default for GlueCaps {
    fn default() -> Self {
        GlueCaps { trials: 4, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueMorphism {
    pub lower: VData,
    pub higher: VData,
    /// Lower coordinate `k` is higher coordinate `coords[k]`.
    pub coords: Vec<usize>,
    /// `M`, lower fiber dimension by higher fiber dimension.
    pub matrix: RatMatrix,
    /// Only the linear Taylor coefficient is assembled.
    pub arity: usize,
    pub chain_map_cases: usize,
    pub chain_map_holds: bool,
    /// `(ω_α|_G)^{-1} ⊕ 0` on the lower stratum.
    pub z: MultiVector,
    /// `z` carried to the higher chart by the tube inclusion.
    pub z_lift: MultiVector,
}

/// `Z = (ω|_G)^{-1} ⊕ 0` at the base point of the polarization.
pub fn z_bivector(p: &Polarization) -> MultiVector {
    let n = p.dim();
    let g = p.complement.frame_at(&p.base);
    let w = p.form.form().eval_at(&p.base);
    let pair = |u: &[Rational], v: &[Rational]| -> Rational {
        let mut s = Rational::zero();
        for (idx, c) in &w {
            s += c * (&u[idx[0]] * &v[idx[1]] - &u[idx[1]] * &v[idx[0]]);
        }
        s
    };
    let a = RatMatrix::from_rows(g.iter().map(|u| g.iter().map(|v| pair(u, v)).collect()).collect());
    let inv = a.inverse().expect("a polarization complement is symplectic").scale(&-Rational::from_integer(1.into()));
    let mut terms = Vec::new();
    for k in 0..n {
        for l in (k + 1)..n {
            let mut c = Rational::zero();
            for (i, gi) in g.iter().enumerate() {
                for (j, gj) in g.iter().enumerate() {
                    c += &inv[(i, j)] * &gi[k] * &gj[l];
                }
            }
            if !c.is_zero() {
                terms.push((vec![k, l], Poly::constant(c)));
            }
        }
    }
    MultiVector::from_terms(Chart::standard(n), terms)
}

fn lift_bivector(z: &MultiVector, tube: &TubeSystem) -> MultiVector {
    let coords = tube.stratum_coords();
    let terms = z.terms().iter().map(|(idx, c)| (idx.iter().map(|&k| coords[k]).collect::<Vec<_>>(), c.clone()));
    MultiVector::from_terms(Chart::standard(tube.ambient()), terms)
}

impl GlueMorphism {
    /// `f₁(a)`.
    pub fn apply(&self, a: &AbelianElement) -> AbelianElement {
        let (n, m) = (self.lower.base_dim(), self.lower.fiber_dim());
        let (n2, m2) = (self.higher.base_dim(), self.higher.fiber_dim());
        let fib: Vec<usize> = (n..n + m).collect();
        let mut relabel = self.coords.clone();
        relabel.extend(n2..n2 + m);
        let mut out = Vec::new();
        for (idx, c) in a.foliation_terms(n) {
            let c = c.restrict_zero(&fib).relabel(&relabel);
            // expand ∧_k Σ_{a'} M_{a_k a'} dy'^{a'}
            let mut partial: Vec<(Vec<usize>, Rational)> = vec![(vec![], Rational::from_integer(1.into()))];
            for &a in &idx {
                let mut next = Vec::new();
                for (sofar, coef) in &partial {
                    for b in 0..m2 {
                        let mab = &self.matrix[(a, b)];
                        if mab.is_zero() || sofar.contains(&b) {
                            continue;
                        }
                        let mut i = sofar.clone();
                        i.push(b);
                        next.push((i, coef * mab));
                    }
                }
                partial = next;
            }
            out.extend(partial.into_iter().map(|(i, k)| (i, c.scale(&k))));
        }
        self.higher.element(out)
    }

    /// `f₁ ∘ self` for a morphism `next` out of `self.higher`.
    pub fn then(&self, next: &GlueMorphism) -> GlueMorphism {
        let coords = self.coords.iter().map(|&k| next.coords[k]).collect();
        let matrix = &self.matrix * &next.matrix;
        GlueMorphism {
            lower: self.lower.clone(),
            higher: next.higher.clone(),
            coords,
            matrix,
            arity: 1,
            chain_map_cases: 0,
            chain_map_holds: self.chain_map_holds && next.chain_map_holds,
            z: self.z.clone(),
            z_lift: MultiVector::from_terms(
                Chart::standard(next.higher.base_dim()),
                self.z.terms().iter().map(|(idx, c)| (idx.iter().map(|&k| next.coords[self.coords[k]]).collect::<Vec<_>>(), c.clone())),
            ),
        }
    }

    /// Same coordinate map and transport matrix.
    pub fn same_linear_part(&self, other: &GlueMorphism) -> bool {
        self.coords == other.coords && self.matrix == other.matrix
    }
}

/// Assembles `f₁` and checks `l₁' ∘ f₁ = f₁ ∘ l₁` on random elements of
/// every form degree.
pub fn glue_morphism(
    lower: &StratumPackage,
    higher: &StratumPackage,
    tube: &TubeSystem,
    caps: GlueCaps,
) -> Result<GlueMorphism, MoserError> {
    if tube.ambient() != higher.dim() {
        return Err(MoserError::Dimension { expected: higher.dim(), got: tube.ambient() });
    }
    let coords = tube.stratum_coords();
    if coords.len() != lower.dim() {
        return Err(MoserError::Dimension { expected: lower.dim(), got: coords.len() });
    }
    let (lv, hv) = (&lower.vdata, &higher.vdata);
    let (m, m2) = (lv.fiber_dim(), hv.fiber_dim());
    let f = RatMatrix::from_columns(lv.frame(), lower.dim());
    let mut matrix = RatMatrix::zeros(m, m2);
    for (b, v) in hv.frame().iter().enumerate() {
        let pushed = tube.push_vector(v);
        let sol = if m == 0 {
            pushed.iter().all(Rational::is_zero).then(Vec::new)
        } else {
            f.solve(&pushed)
        };
        let Some(sol) = sol else {
            return Err(MoserError::KernelInclusion(pushed));
        };
        for (a, s) in sol.into_iter().enumerate() {
            matrix[(a, b)] = s;
        }
    }
    let z = z_bivector(&lower.polarization);
    let mut g = GlueMorphism {
        lower: lv.clone(),
        higher: hv.clone(),
        coords,
        matrix,
        arity: 1,
        chain_map_cases: 0,
        chain_map_holds: false,
        z_lift: lift_bivector(&z, tube),
        z,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(caps.seed);
    for r in 0..=m {
        for _ in 0..caps.trials {
            let a = random_element(lv, r, &mut rng);
            let left = derived_bracket(hv, &[&g.apply(&a)])?;
            let right = g.apply(&derived_bracket(lv, &[&a])?);
            if !left.agrees_with(&right) {
                return Err(MoserError::ChainMap(a.to_string()));
            }
            g.chain_map_cases += 1;
        }
    }
    g.chain_map_holds = true;
    Ok(g)
}
