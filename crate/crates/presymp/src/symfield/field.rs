use std::collections::BTreeMap;
use std::marker::PhantomData;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::jet::JetMeta;
use super::poly::Poly;
use super::{same_chart, Chart, FieldError};
use crate::skewcore::{RatMatrix, Rational, SkewForm};

/// Marker for differential forms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Covariant;

/// Marker for multivector fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Contravariant;

/// Sections of an exterior bundle: a map from strictly increasing index
/// lists to coefficient polynomials, optionally carrying jet metadata.
pub struct Alternating<K> {
    chart: Arc<Chart>,
    terms: BTreeMap<Vec<usize>, Poly>,
    jet: Option<JetMeta>,
    kind: PhantomData<K>,
}

impl<K> Clone for Alternating<K> {
    fn clone(&self) -> Self {
        Alternating { chart: self.chart.clone(), terms: self.terms.clone(), jet: self.jet.clone(), kind: PhantomData }
    }
}

impl<K> PartialEq for Alternating<K> {
    fn eq(&self, other: &Self) -> bool {
        same_chart(&self.chart, &other.chart) && self.terms == other.terms && self.jet == other.jet
    }
}

impl<K> Eq for Alternating<K> {}

impl<K> std::fmt::Debug for Alternating<K> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Alternating")
            .field("chart", &self.chart.names())
            .field("terms", &self.terms)
            .field("jet", &self.jet)
            .finish()
    }
}

pub type DiffForm = Alternating<Covariant>;
pub type MultiVector = Alternating<Contravariant>;

/// Sorts an index list, tracking the permutation sign. `None` on repeats.
pub(crate) fn normalize(mut idx: Vec<usize>) -> Option<(Vec<usize>, bool)> {
    let mut negative = false;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((idx, negative))
    }
}

fn merge(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    normalize(v)
}

/// Right derivative `⃖∂/∂θ_i` of the monomial `θ_I`: sign and remainder.
fn right_derivative(idx: &[usize], i: usize) -> Option<(Vec<usize>, bool)> {
    let r = idx.iter().position(|&k| k == i)?;
    let mut rest = idx.to_vec();
    rest.remove(r);
    Some((rest, (idx.len() - 1 - r) % 2 == 1))
}

fn push_term(terms: &mut BTreeMap<Vec<usize>, Poly>, idx: Vec<usize>, c: Poly, negative: bool) {
    if c.is_zero() {
        return;
    }
    let c = if negative { -c } else { c };
    let slot = terms.entry(idx.clone()).or_insert_with(Poly::zero);
    *slot += &c;
    if slot.is_zero() {
        terms.remove(&idx);
    }
}

impl<K> Alternating<K> {
    pub fn zero(chart: Arc<Chart>) -> Self {
        Alternating { chart, terms: BTreeMap::new(), jet: None, kind: PhantomData }
    }

    pub fn from_terms(chart: Arc<Chart>, terms: impl IntoIterator<Item = (Vec<usize>, Poly)>) -> Self {
        let mut out = BTreeMap::new();
        for (idx, c) in terms {
            assert!(idx.iter().all(|&i| i < chart.dim()), "index outside chart");
            if let Some((idx, neg)) = normalize(idx) {
                push_term(&mut out, idx, c, neg);
            }
        }
        Alternating { chart, terms: out, jet: None, kind: PhantomData }
    }

    pub fn scalar(chart: Arc<Chart>, f: Poly) -> Self {
        Self::from_terms(chart, [(vec![], f)])
    }

    /// `c · e_I` for an index list in any order.
    pub fn basis(chart: Arc<Chart>, idx: &[usize], c: Poly) -> Self {
        Self::from_terms(chart, [(idx.to_vec(), c)])
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Poly> {
        &self.terms
    }

    pub fn coeff(&self, idx: &[usize]) -> Poly {
        match normalize(idx.to_vec()) {
            Some((i, neg)) => {
                let c = self.terms.get(&i).cloned().unwrap_or_else(Poly::zero);
                if neg { -c } else { c }
            }
            None => Poly::zero(),
        }
    }

    pub fn jet(&self) -> Option<&JetMeta> {
        self.jet.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest index-list length present (0 for the zero field).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self, k: usize) -> bool {
        self.terms.keys().all(|i| i.len() == k)
    }

    /// Converts an exact field to a jet. Jets are returned unchanged.
    pub fn into_jet(self, meta: &JetMeta) -> Self {
        if self.jet.is_some() {
            return self;
        }
        let terms = self
            .terms
            .into_iter()
            .map(|(i, c)| (i, meta.truncate(&c.shift(&meta.base))))
            .collect::<Vec<_>>();
        let mut out = Self::from_terms(self.chart, terms);
        out.jet = Some(meta.clone());
        out
    }

    /// Coefficients in global coordinates.
    pub fn to_global(&self) -> Self {
        match &self.jet {
            None => self.clone(),
            Some(m) => {
                let back: Vec<Rational> = m.base.iter().map(|b| -b.clone()).collect();
                let terms = self.terms.iter().map(|(i, c)| (i.clone(), c.shift(&back))).collect::<Vec<_>>();
                Self::from_terms(self.chart.clone(), terms)
            }
        }
    }

    /// Forgets jet metadata, keeping the global representative.
    pub fn into_exact(self) -> Self {
        self.to_global()
    }

    fn aligned(&self, meta: &Option<JetMeta>) -> BTreeMap<Vec<usize>, Poly> {
        match (meta, &self.jet) {
            (Some(m), None) => self
                .terms
                .iter()
                .map(|(i, c)| (i.clone(), m.truncate(&c.shift(&m.base))))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
            _ => self.terms.clone(),
        }
    }

    fn finish(chart: Arc<Chart>, mut terms: BTreeMap<Vec<usize>, Poly>, jet: Option<JetMeta>) -> Self {
        if let Some(m) = &jet {
            for c in terms.values_mut() {
                *c = m.truncate(c);
            }
            terms.retain(|_, c| !c.is_zero());
        }
        Alternating { chart, terms, jet, kind: PhantomData }
    }

    fn check_chart(&self, other: &Alternating<impl Sized>) -> Result<(), FieldError> {
        if same_chart(&self.chart, &other.chart) {
            Ok(())
        } else {
            Err(FieldError::ChartMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_chart(other)?;
        let meta = JetMeta::combine(self.jet.as_ref(), other.jet.as_ref(), 0)?;
        let mut terms = self.aligned(&meta);
        for (i, c) in other.aligned(&meta) {
            push_term(&mut terms, i, c, false);
        }
        Ok(Self::finish(self.chart.clone(), terms, meta))
    }

    /// Panics on chart mismatch; use `try_add` for untrusted operands.
    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("field addition")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let terms = self.terms.iter().map(|(i, p)| (i.clone(), p.scale(c))).filter(|(_, p)| !p.is_zero()).collect();
        Alternating { chart: self.chart.clone(), terms, jet: self.jet.clone(), kind: PhantomData }
    }

    /// Multiplies every coefficient by a global function.
    pub fn mul_function(&self, f: &Poly) -> Self {
        let f = match &self.jet {
            Some(m) => m.truncate(&f.shift(&m.base)),
            None => f.clone(),
        };
        let terms = self.terms.iter().map(|(i, c)| (i.clone(), c * &f)).collect();
        Self::finish(self.chart.clone(), terms, self.jet.clone())
    }

    pub fn map_coeffs(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        let terms = self.terms.iter().map(|(i, c)| (i.clone(), f(c))).filter(|(_, c)| !c.is_zero()).collect();
        Alternating { chart: self.chart.clone(), terms, jet: self.jet.clone(), kind: PhantomData }
    }

    pub fn filter_terms(&self, keep: impl Fn(&[usize]) -> bool) -> Self {
        let terms = self.terms.iter().filter(|(i, _)| keep(i)).map(|(i, c)| (i.clone(), c.clone())).collect();
        Alternating { chart: self.chart.clone(), terms, jet: self.jet.clone(), kind: PhantomData }
    }

    /// Replaces the jet metadata, re-truncating.
    pub fn with_meta(&self, meta: Option<JetMeta>) -> Self {
        Self::finish(self.chart.clone(), self.terms.clone(), meta)
    }

    /// Equality of the parts both operands can vouch for.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let Ok(diff) = self.try_add(&other.neg()) else { return false };
        match &diff.jet {
            None => diff.is_zero(),
            Some(m) => diff.terms.values().all(|c| c.truncate_in_first(m.jet_vars, m.accuracy).is_zero()),
        }
    }

    /// Coefficients evaluated at a global point.
    pub fn eval_at(&self, x: &[Rational]) -> BTreeMap<Vec<usize>, Rational> {
        let local: Vec<Rational> = match &self.jet {
            Some(m) => x.iter().zip(&m.base).map(|(a, b)| a - b).collect(),
            None => x.to_vec(),
        };
        self.terms
            .iter()
            .map(|(i, c)| (i.clone(), c.eval(&local)))
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> BTreeMap<Vec<usize>, f64> {
        let local: Vec<f64> = match &self.jet {
            Some(m) => x.iter().zip(&m.base).map(|(a, b)| a - crate::skewcore::to_f64(b)).collect(),
            None => x.to_vec(),
        };
        self.terms.iter().map(|(i, c)| (i.clone(), c.eval_f64(&local))).collect()
    }

    /// Degree in the variables `vars`, over all coefficients.
    pub fn degree_in(&self, vars: &[usize]) -> u32 {
        self.terms
            .values()
            .flat_map(|c| c.terms().map(|(e, _)| vars.iter().map(|&v| e.get(v).copied().unwrap_or(0)).sum::<u32>()))
            .max()
            .unwrap_or(0)
    }
}

/// Graded-commutative product.
pub fn wedge<K>(a: &Alternating<K>, b: &Alternating<K>) -> Result<Alternating<K>, FieldError> {
    a.check_chart(b)?;
    let meta = JetMeta::combine(a.jet.as_ref(), b.jet.as_ref(), 0)?;
    let (ta, tb) = (a.aligned(&meta), b.aligned(&meta));
    let mut terms = BTreeMap::new();
    for (i, f) in &ta {
        for (j, g) in &tb {
            if let Some((k, neg)) = merge(i, j) {
                push_term(&mut terms, k, f * g, neg);
            }
        }
    }
    Ok(Alternating::finish(a.chart.clone(), terms, meta))
}

impl DiffForm {
    /// `Σ_{i<j} W_ij dx_i∧dx_j` from a full antisymmetric matrix.
    pub fn from_matrix(chart: Arc<Chart>, w: &[Vec<Poly>]) -> DiffForm {
        let n = chart.dim();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                terms.push((vec![i, j], w[i][j].clone()));
            }
        }
        DiffForm::from_terms(chart, terms)
    }

    pub fn from_skew(chart: Arc<Chart>, q: &SkewForm) -> DiffForm {
        let n = q.dim();
        let w: Vec<Vec<Poly>> = (0..n).map(|i| (0..n).map(|j| Poly::constant(q.matrix()[(i, j)].clone())).collect()).collect();
        DiffForm::from_matrix(chart, &w)
    }

    /// Antisymmetric coefficient matrix; defined for 2-forms.
    pub fn matrix(&self) -> Vec<Vec<Poly>> {
        let n = self.dim();
        let mut w = vec![vec![Poly::zero(); n]; n];
        for (idx, c) in &self.terms {
            if let [i, j] = idx[..] {
                w[i][j] = c.clone();
                w[j][i] = -c;
            }
        }
        w
    }

    /// Pointwise value of a 2-form.
    pub fn value_at(&self, x: &[Rational]) -> SkewForm {
        let n = self.dim();
        let mut m = RatMatrix::zeros(n, n);
        for (idx, v) in self.eval_at(x) {
            if let [i, j] = idx[..] {
                m[(j, i)] = -v.clone();
                m[(i, j)] = v;
            }
        }
        SkewForm::new(m).expect("2-form values are antisymmetric")
    }

    pub fn value_at_f64(&self, x: &[f64]) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (idx, v) in self.eval_f64(x) {
            if let [i, j] = idx[..] {
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        m
    }

    /// `a(v_1, .., v_k)` at a point, for constant vectors.
    pub fn evaluate_on(&self, x: &[Rational], vectors: &[Vec<Rational>]) -> Rational {
        let k = vectors.len();
        let mut total = Rational::zero();
        for (idx, c) in self.eval_at(x) {
            if idx.len() != k {
                continue;
            }
            let m = RatMatrix::from_rows(
                (0..k).map(|r| (0..k).map(|s| vectors[s][idx[r]].clone()).collect()).collect(),
            );
            total += c * m.determinant();
        }
        total
    }

    pub fn is_closed(&self) -> bool {
        exterior_d(self).map(|d| d.is_zero()).unwrap_or(false)
    }
}

impl MultiVector {
    pub fn vector(chart: Arc<Chart>, components: Vec<Poly>) -> MultiVector {
        let terms = components.into_iter().enumerate().map(|(i, c)| (vec![i], c)).collect::<Vec<_>>();
        MultiVector::from_terms(chart, terms)
    }

    /// Components of a vector field, or `None` if other degrees appear.
    pub fn components(&self) -> Option<Vec<Poly>> {
        if !self.is_homogeneous(1) {
            return None;
        }
        Some((0..self.dim()).map(|i| self.coeff(&[i])).collect())
    }

    pub fn eval_vector(&self, x: &[Rational]) -> Option<Vec<Rational>> {
        if !self.is_homogeneous(1) {
            return None;
        }
        let vals = self.eval_at(x);
        Some((0..self.dim()).map(|i| vals.get(&vec![i]).cloned().unwrap_or_else(Rational::zero)).collect())
    }

    /// Directional derivative of a function.
    pub fn apply(&self, f: &Poly) -> Result<Poly, FieldError> {
        let scalar = MultiVector::scalar(self.chart.clone(), f.clone());
        let r = schouten(self, &scalar)?;
        Ok(r.to_global().coeff(&[]))
    }
}

pub fn exterior_d(a: &DiffForm) -> Result<DiffForm, FieldError> {
    let meta = JetMeta::combine(a.jet.as_ref(), None, if a.jet.is_some() { 1 } else { 0 })?;
    let mut terms = BTreeMap::new();
    for (idx, f) in &a.terms {
        for j in 0..a.dim() {
            let df = f.deriv(j);
            if df.is_zero() {
                continue;
            }
            if let Some((k, neg)) = merge(&[j], idx) {
                push_term(&mut terms, k, df, neg);
            }
        }
    }
    Ok(Alternating::finish(a.chart.clone(), terms, meta))
}

/// `v ⌟ a`, contracting the first slot.
pub fn interior(v: &MultiVector, a: &DiffForm) -> Result<DiffForm, FieldError> {
    a.check_chart(v)?;
    if !v.is_homogeneous(1) {
        return Err(FieldError::NotVector);
    }
    let meta = JetMeta::combine(v.jet.as_ref(), a.jet.as_ref(), 0)?;
    let tv = v.aligned(&meta);
    let ta = a.aligned(&meta);
    let mut terms = BTreeMap::new();
    for (vi, vc) in &tv {
        let i = vi[0];
        for (idx, c) in &ta {
            if let Some(r) = idx.iter().position(|&k| k == i) {
                let mut rest = idx.clone();
                rest.remove(r);
                push_term(&mut terms, rest, vc * c, r % 2 == 1);
            }
        }
    }
    Ok(Alternating::finish(a.chart.clone(), terms, meta))
}

/// Schouten–Nijenhuis bracket
/// `[P,Q] = Σ_i (P ⃖∂_{θ_i})(∂_i Q) − (−1)^{(p−1)(q−1)} (Q ⃖∂_{θ_i})(∂_i P)`.
pub fn schouten(a: &MultiVector, b: &MultiVector) -> Result<MultiVector, FieldError> {
    a.check_chart(b)?;
    let cost = u32::from(a.jet.is_some() || b.jet.is_some());
    let meta = JetMeta::combine(a.jet.as_ref(), b.jet.as_ref(), cost)?;
    let (ta, tb) = (a.aligned(&meta), b.aligned(&meta));
    let mut terms = BTreeMap::new();
    let half = |terms: &mut BTreeMap<Vec<usize>, Poly>,
                left: &BTreeMap<Vec<usize>, Poly>,
                right: &BTreeMap<Vec<usize>, Poly>,
                swapped: bool| {
        for (i, f) in left {
            for (j, g) in right {
                // swapped terms carry −(−1)^{(p−1)(q−1)}
                let (p, q) = (i.len() as i64, j.len() as i64);
                let flip = swapped && ((p - 1) * (q - 1)).rem_euclid(2) == 0;
                for &k in i {
                    let dg = g.deriv(k);
                    if dg.is_zero() {
                        continue;
                    }
                    let (rest, s1) = right_derivative(i, k).unwrap();
                    if let Some((idx, s2)) = merge(&rest, j) {
                        push_term(terms, idx, f * &dg, s1 ^ s2 ^ flip);
                    }
                }
            }
        }
    };
    half(&mut terms, &ta, &tb, false);
    half(&mut terms, &tb, &ta, true);
    Ok(Alternating::finish(a.chart.clone(), terms, meta))
}

/// Polynomial map between charts, `y_k = components[k](x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMap {
    pub source: Arc<Chart>,
    pub target: Arc<Chart>,
    pub components: Vec<Poly>,
}

impl PolyMap {
    pub fn new(source: Arc<Chart>, target: Arc<Chart>, components: Vec<Poly>) -> Result<Self, FieldError> {
        if components.len() != target.dim() {
            return Err(FieldError::DimensionMismatch { expected: target.dim(), got: components.len() });
        }
        Ok(PolyMap { source, target, components })
    }

    pub fn identity(chart: Arc<Chart>) -> Self {
        let components = (0..chart.dim()).map(Poly::var).collect();
        PolyMap { source: chart.clone(), target: chart, components }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap, FieldError> {
        if !same_chart(&inner.target, &self.source) {
            return Err(FieldError::ChartMismatch);
        }
        Ok(PolyMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            components: self.components.iter().map(|c| c.compose(&inner.components)).collect(),
        })
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }
}

/// `φ* a` for a form on `φ.target`. Exact coefficients only.
pub fn pullback(phi: &PolyMap, a: &DiffForm) -> Result<DiffForm, FieldError> {
    if !same_chart(&phi.target, &a.chart) {
        return Err(FieldError::ChartMismatch);
    }
    if a.jet.is_some() {
        return Err(FieldError::Unsupported("pullback of jet-valued forms"));
    }
    let src = phi.source.clone();
    let differentials: Vec<DiffForm> = phi
        .components
        .iter()
        .map(|c| exterior_d(&DiffForm::scalar(src.clone(), c.clone())).expect("exact d"))
        .collect();
    let mut out = DiffForm::zero(src.clone());
    for (idx, f) in &a.terms {
        let mut term = DiffForm::scalar(src.clone(), f.compose(&phi.components));
        for &k in idx {
            term = wedge(&term, &differentials[k])?;
        }
        out = out.add(&term);
    }
    Ok(out)
}

/// `L_* v` for a constant linear map. Non-constant coefficients need `L`
/// square and invertible, so they can be transported as `c(L⁻¹ y)`.
pub fn pushforward_linear(l: &RatMatrix, v: &MultiVector, target: Arc<Chart>) -> Result<MultiVector, FieldError> {
    if l.cols() != v.dim() {
        return Err(FieldError::DimensionMismatch { expected: v.dim(), got: l.cols() });
    }
    if l.rows() != target.dim() {
        return Err(FieldError::DimensionMismatch { expected: target.dim(), got: l.rows() });
    }
    if v.jet.is_some() {
        return Err(FieldError::Unsupported("pushforward of jet-valued fields"));
    }
    let constant = v.terms.values().all(|c| c.is_constant());
    let subs: Option<Vec<Poly>> = if constant {
        None
    } else {
        let inv = (l.rows() == l.cols()).then(|| l.inverse()).flatten().ok_or(FieldError::Unsupported(
            "non-constant pushforward needs an invertible map",
        ))?;
        Some(
            (0..inv.rows())
                .map(|i| Poly::from_terms((0..inv.cols()).map(|j| {
                    let mut e = vec![0; j + 1];
                    e[j] = 1;
                    (e, inv[(i, j)].clone())
                })))
                .collect(),
        )
    };
    let images: Vec<MultiVector> = (0..v.dim())
        .map(|i| MultiVector::vector(target.clone(), (0..l.rows()).map(|k| Poly::constant(l[(k, i)].clone())).collect()))
        .collect();
    let mut out = MultiVector::zero(target.clone());
    for (idx, c) in &v.terms {
        let coeff = match &subs {
            Some(s) => c.compose(s),
            None => c.clone(),
        };
        let mut term = MultiVector::scalar(target.clone(), coeff);
        for &k in idx {
            term = wedge(&term, &images[k])?;
        }
        out = out.add(&term);
    }
    Ok(out)
}

fn mat_mul(a: &[Vec<Poly>], b: &[Vec<Poly>], meta: &JetMeta) -> Vec<Vec<Poly>> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = Poly::zero();
                    for k in 0..inner {
                        if a[i][k].is_zero() || b[k][j].is_zero() {
                            continue;
                        }
                        s += &(&a[i][k] * &b[k][j]);
                    }
                    meta.truncate(&s)
                })
                .collect()
        })
        .collect()
}

/// Inverse bivector of the restriction of `w` to the coordinate block `g`,
/// as a jet, with zero on every other component.
///
/// With `W` the block matrix and `Π` the returned coefficients,
/// `Σ_k Π^{ik} W_{jk} = δ_ij` modulo the jet order; for `dx₁∧dx₂` this
/// gives `∂₁∧∂₂`.
pub fn invert_two_form_jet(w: &DiffForm, g: &[usize], meta: &JetMeta) -> Result<MultiVector, FieldError> {
    let mut g = g.to_vec();
    g.sort_unstable();
    g.dedup();
    let w = w.clone().into_jet(meta);
    let meta = w.jet.clone().unwrap();
    let full = w.matrix();
    let k = g.len();
    let block: Vec<Vec<Poly>> = g.iter().map(|&i| g.iter().map(|&j| full[i][j].clone()).collect()).collect();
    let w0 = RatMatrix::from_rows(block.iter().map(|r| r.iter().map(|p| p.constant_term()).collect()).collect());
    let inv0 = w0.inverse().ok_or(FieldError::Degenerate { block: g.clone() })?;
    let inv0p: Vec<Vec<Poly>> = (0..k).map(|i| (0..k).map(|j| Poly::constant(inv0[(i, j)].clone())).collect()).collect();
    let delta: Vec<Vec<Poly>> = block
        .iter()
        .map(|r| r.iter().map(|p| p - &Poly::constant(p.constant_term())).collect())
        .collect();
    let step = mat_mul(&inv0p, &delta, &meta);
    let mut x = inv0p.clone();
    for _ in 0..=meta.order {
        let correction = mat_mul(&step, &x, &meta);
        x = (0..k).map(|i| (0..k).map(|j| &inv0p[i][j] - &correction[i][j]).collect()).collect();
    }
    let mut terms = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            terms.push((vec![g[a], g[b]], -x[a][b].clone()));
        }
    }
    let out = MultiVector::from_terms(w.chart.clone(), terms);
    Ok(MultiVector::finish(out.chart, out.terms, Some(meta)))
}

impl MultiVector {
    /// Coefficient matrix `Π^{ij}` of a bivector.
    pub fn bivector_matrix(&self) -> Vec<Vec<Poly>> {
        let n = self.dim();
        let mut m = vec![vec![Poly::zero(); n]; n];
        for (idx, c) in &self.terms {
            if let [i, j] = idx[..] {
                m[i][j] = c.clone();
                m[j][i] = -c;
            }
        }
        m
    }

    /// Checks `Σ_k Π^{ik} W_{jk} = δ_ij` on the block `g`, to accuracy.
    pub fn inverts_on_block(&self, w: &DiffForm, g: &[usize]) -> bool {
        let Some(meta) = self.jet.clone() else { return false };
        let w = w.clone().into_jet(&meta);
        let pm = self.bivector_matrix();
        let wm = w.matrix();
        g.iter().all(|&i| {
            g.iter().all(|&j| {
                let mut s = Poly::zero();
                for &k in g {
                    s += &(&pm[i][k] * &wm[j][k]);
                }
                let target = if i == j { Poly::one() } else { Poly::zero() };
                (&s - &target).truncate_in_first(meta.jet_vars, meta.accuracy).is_zero()
            })
        })
    }
}
