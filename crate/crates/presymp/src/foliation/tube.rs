//! Model tubes (coordinate projections with quadratic tubular functions)
//! and polarizations transported along them.

use num_traits::{One, Zero};

use super::FoliationError;
use crate::skewcore::{kernel, unit, RatMatrix, Rational, Subspace};
use crate::stratify::FormField;
use crate::symfield::{Chart, PolyMap, Poly};

/// Tube around the coordinate subspace `{x_f = 0 : f ∈ fiber}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TubeSystem {
    ambient: usize,
    fiber: Vec<usize>,
    rho_coords: Vec<usize>,
    pub scale: Rational,
}

impl TubeSystem {
    pub fn new(ambient: usize, mut fiber: Vec<usize>) -> Self {
        fiber.sort_unstable();
        fiber.dedup();
        TubeSystem { ambient, rho_coords: fiber.clone(), fiber, scale: Rational::one() }
    }

    pub fn identity(ambient: usize) -> Self {
        Self::new(ambient, vec![])
    }

    /// Measures `ρ` in a subset of the fiber coordinates only.
    pub fn with_rho_coords(mut self, coords: Vec<usize>) -> Self {
        self.rho_coords = coords;
        self
    }

    pub fn with_scale(mut self, scale: Rational) -> Self {
        self.scale = scale;
        self
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn fiber(&self) -> &[usize] {
        &self.fiber
    }

    pub fn is_identity(&self) -> bool {
        self.fiber.is_empty()
    }

    pub fn stratum_coords(&self) -> Vec<usize> {
        (0..self.ambient).filter(|i| !self.fiber.contains(i)).collect()
    }

    /// `π` as a self-map of the ambient chart.
    pub fn projection(&self) -> PolyMap {
        let c = Chart::standard(self.ambient);
        let comps = (0..self.ambient).map(|i| if self.fiber.contains(&i) { Poly::zero() } else { Poly::var(i) }).collect();
        PolyMap::new(c.clone(), c, comps).expect("square map")
    }

    /// `π` onto the stratum's own coordinates.
    pub fn retraction(&self) -> Vec<Poly> {
        self.stratum_coords().into_iter().map(Poly::var).collect()
    }

    pub fn rho(&self) -> Poly {
        let mut r = Poly::zero();
        for &i in &self.rho_coords {
            r += &(&Poly::var(i) * &Poly::var(i));
        }
        r.scale(&self.scale)
    }

    pub fn project_point(&self, x: &[Rational]) -> Vec<Rational> {
        self.stratum_coords().into_iter().map(|i| x[i].clone()).collect()
    }

    /// `dπ v` in stratum coordinates.
    pub fn push_vector(&self, v: &[Rational]) -> Vec<Rational> {
        self.project_point(v)
    }

    /// Inclusion of stratum vectors into the ambient space.
    pub fn lift_vector(&self, u: &[Rational]) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.ambient];
        for (k, i) in self.stratum_coords().into_iter().enumerate() {
            v[i] = u[k].clone();
        }
        v
    }

    /// `π∘π = π` symbolically, `ρ ≥ 0` and `ρ = 0 ⇔ on the stratum` at the
    /// points, and `(π, ρ)` submersive at points off the stratum.
    pub fn check_axioms(&self, points: &[Vec<Rational>]) -> bool {
        let p = self.projection();
        let idempotent = p.compose(&p).map(|q| q == p).unwrap_or(false);
        let rho = self.rho();
        let rows_of = |x: &[Rational]| {
            let mut rows: Vec<Vec<Rational>> = self.stratum_coords().into_iter().map(|i| unit(self.ambient, i)).collect();
            rows.push((0..self.ambient).map(|k| rho.deriv(k).eval(x)).collect());
            rows
        };
        let pointwise = points.iter().all(|x| {
            let r = rho.eval(x);
            let on = self.fiber.iter().all(|&i| x[i].is_zero());
            let sign_ok = r >= Rational::zero() && (r.is_zero() == on || self.rho_coords != self.fiber);
            let submersive = on || RatMatrix::from_rows(rows_of(x)).rank() == self.ambient - self.fiber.len() + 1;
            sign_ok && submersive
        });
        idempotent && pointwise
    }
}

/// `(π_j ∘ π_j' = π_j, ρ_j ∘ π_j' = ρ_j)`, both symbolic.
pub fn tubes_compatible(inner: &TubeSystem, outer: &TubeSystem) -> (bool, bool) {
    let pj = inner.projection();
    let pjp = outer.projection();
    let proj = pj.compose(&pjp).map(|c| c.components == pj.components).unwrap_or(false);
    let rho = inner.rho();
    (proj, rho.compose(&pjp.components) == rho)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TubeKernelReport {
    pub holds: bool,
    pub tested: usize,
    /// Point and kernel vector whose image leaves `ker ω_α`.
    pub witness: Option<(Vec<Rational>, Vec<Rational>)>,
}

/// `dπ(ker ω_x) ⊂ ker ω_α(π x)` at rational points.
pub fn tube_kernel_check(tube: &TubeSystem, field: &FormField, stratum_form: &FormField, points: &[Vec<Rational>]) -> TubeKernelReport {
    let mut report = TubeKernelReport { holds: true, tested: 0, witness: None };
    for x in points {
        report.tested += 1;
        let wa = stratum_form.value_at(&tube.project_point(x));
        for v in kernel(&field.value_at(x)).basis() {
            let image = tube.push_vector(v);
            if wa.matrix().apply(&image).iter().any(|c| !c.is_zero()) {
                report.holds = false;
                report.witness = Some((x.clone(), v.clone()));
                return report;
            }
        }
    }
    report
}

/// Data carried by a lower stratum: its form, complement frame (both in
/// the stratum's coordinates) and its tube in the ambient chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerStratum {
    pub form: FormField,
    pub complement: Vec<Vec<Rational>>,
    pub tube: TubeSystem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatiblePolarization {
    /// Frame of `G'` at the first point.
    pub frame: Vec<Vec<Rational>>,
    /// `π*G_α ⊃ G' ∩ π*TM_α` at every point.
    pub inclusion_holds: bool,
    /// Whether `G'` is also a complement of `ker ω'` on which `ω'` is
    /// nondegenerate, at every point.
    pub is_polarization: bool,
    pub witness: Option<Vec<Rational>>,
}

fn lifted_frame(lower: &LowerStratum, higher: &FormField, x: &[Rational]) -> Subspace {
    let tube = &lower.tube;
    let n = tube.ambient();
    let mut vectors: Vec<Vec<Rational>> = lower.complement.iter().map(|u| tube.lift_vector(u)).collect();
    vectors.extend(kernel(&higher.value_at(x)).basis().iter().cloned());
    vectors.extend(tube.fiber().iter().map(|&i| unit(n, i)));
    Subspace::span(n, &vectors)
}

fn polarizes(frame: &Subspace, higher: &FormField, x: &[Rational]) -> bool {
    let n = higher.dim();
    let w = higher.value_at(x);
    let k = kernel(&w);
    frame.dim() + k.dim() == n
        && frame.sum(&k).dim() == n
        && (frame.dim() == 0 || !w.restrict(frame.basis()).matrix().determinant().is_zero())
}

/// `G' = π*G_α + ker ω' + ker dπ`, checked for the inclusion into `π*G_α`
/// on the lifted tangent space of the lower stratum.
pub fn compatible_polarization(
    lower: &LowerStratum,
    higher: &FormField,
    points: &[Vec<Rational>],
) -> Result<CompatiblePolarization, FoliationError> {
    let tube = &lower.tube;
    let n = tube.ambient();
    if higher.dim() != n {
        return Err(FoliationError::DimensionMismatch { expected: n, got: higher.dim() });
    }
    let Some(first) = points.first() else {
        return Err(FoliationError::Internal("no sample points"));
    };
    if tube.is_identity() {
        let g = Subspace::span(n, &lower.complement);
        let bad = points.iter().find(|x| !polarizes(&g, higher, x)).cloned();
        return Ok(CompatiblePolarization {
            frame: lower.complement.clone(),
            inclusion_holds: true,
            is_polarization: bad.is_none(),
            witness: bad,
        });
    }
    for x in points {
        let wa = lower.form.value_at(&tube.project_point(x));
        for v in kernel(&higher.value_at(x)).basis() {
            if wa.matrix().apply(&tube.push_vector(v)).iter().any(|c| !c.is_zero()) {
                return Err(FoliationError::KernelInclusion { witness: x.clone() });
            }
        }
    }
    let pulled = Subspace::span(n, &lower.complement.iter().map(|u| tube.lift_vector(u)).collect::<Vec<_>>());
    let tangent = Subspace::span(n, &tube.stratum_coords().into_iter().map(|i| unit(n, i)).collect::<Vec<_>>());
    let mut out = CompatiblePolarization {
        frame: lifted_frame(lower, higher, first).basis().to_vec(),
        inclusion_holds: true,
        is_polarization: true,
        witness: None,
    };
    for x in points {
        let g = lifted_frame(lower, higher, x);
        if !pulled.contains_subspace(&g.intersection(&tangent)) {
            out.inclusion_holds = false;
            out.witness.get_or_insert_with(|| x.clone());
        }
        if !polarizes(&g, higher, x) {
            out.is_polarization = false;
            out.witness.get_or_insert_with(|| x.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::tests::constant_form;
    use crate::skewcore::int;
    use crate::stratify::Region;
    use crate::symfield::DiffForm;

    fn model() -> FormField {
        let c = Chart::standard(4);
        FormField::new(DiffForm::basis(c.clone(), &[0, 1], Poly::var(0)).add(&DiffForm::basis(c, &[2, 3], Poly::one()))).unwrap()
    }

    fn on_stratum(seed: u64) -> Vec<Vec<Rational>> {
        Region::cube(4, -1.0, 1.0)
            .rational_points(10, seed)
            .into_iter()
            .map(|mut p| {
                p[0] = int(0);
                p
            })
            .collect()
    }

    fn lower_model() -> LowerStratum {
        // Y_α = {x₁ = 0} in coordinates (x₂, x₃, x₄): ω_α = dx₃∧dx₄
        LowerStratum {
            form: constant_form(3, &[(1, 2)]),
            complement: vec![unit(3, 1), unit(3, 2)],
            tube: TubeSystem::new(4, vec![0]),
        }
    }

    #[test]
    fn model_tube_axioms() {
        let t = TubeSystem::new(4, vec![0]);
        assert!(t.check_axioms(&Region::cube(4, -1.0, 1.0).rational_points(10, 3)));
        assert!(t.check_axioms(&on_stratum(3)));
    }

    #[test]
    fn nested_tubes() {
        let inner = TubeSystem::new(4, vec![0, 1]).with_rho_coords(vec![1]);
        let outer = TubeSystem::new(4, vec![0]);
        assert_eq!(tubes_compatible(&inner, &outer), (true, true));
        let naive = TubeSystem::new(4, vec![0, 1]);
        assert_eq!(tubes_compatible(&naive, &outer), (true, false));
    }

    #[test]
    fn kernel_projection() {
        let r = tube_kernel_check(&TubeSystem::new(4, vec![0]), &model(), &lower_model().form, &on_stratum(1));
        assert!(r.holds && r.tested == 10);
        let sym = constant_form(4, &[(0, 1), (2, 3)]);
        assert!(tube_kernel_check(&TubeSystem::new(4, vec![0]), &sym, &lower_model().form, &on_stratum(1)).holds);
        // projecting along x₃ lands ker ω in a non-kernel direction of dx₂∧dx₄
        let wrong = TubeSystem::new(4, vec![2]);
        let r = tube_kernel_check(&wrong, &model(), &constant_form(3, &[(1, 2)]), &on_stratum(1));
        assert!(!r.holds && r.witness.is_some());
    }

    #[test]
    fn compatible_polarization_on_model() {
        let pts = Region::cube(4, -1.0, 1.0).rational_points(10, 5);
        let r = compatible_polarization(&lower_model(), &model(), &pts).unwrap();
        assert!(r.inclusion_holds);
        let g = Subspace::span(4, &r.frame);
        assert!(g.contains(&unit(4, 2)) && g.contains(&unit(4, 3)));
        // three directions cannot complement a trivial kernel in dimension 4
        assert!(!r.is_polarization);
    }

    #[test]
    fn identity_tube_keeps_lower_polarization() {
        let w = constant_form(3, &[(0, 1)]);
        let lower = LowerStratum { form: w.clone(), complement: vec![unit(3, 0), unit(3, 1)], tube: TubeSystem::identity(3) };
        let r = compatible_polarization(&lower, &w, &Region::cube(3, -1.0, 1.0).rational_points(4, 1)).unwrap();
        assert_eq!(r.frame, lower.complement);
        assert!(r.is_polarization);
    }

    #[test]
    fn violated_kernel_inclusion() {
        let synthetic = constant_form(4, &[(0, 2)]);
        let err = compatible_polarization(&lower_model(), &synthetic, &on_stratum(2)).unwrap_err();
        assert!(matches!(err, FoliationError::KernelInclusion { .. }));
    }
}
