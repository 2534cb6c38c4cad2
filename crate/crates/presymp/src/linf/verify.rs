//! Generalized Jacobi identities on random elements.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{jacobiator_tensor, AbelianElement, LinfError, LinfStructure, VData};
use crate::skewcore::{int, Rational};
use crate::stratify::subsets;
use crate::symfield::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub max_arity: usize,
    /// Random draws per pattern of form degrees.
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: String,
    pub arity: usize,
    pub cases: usize,
    pub passed: bool,
    /// Smallest trusted order over the cases; `None` when exact.
    pub accuracy: Option<u32>,
    pub witness: Option<Vec<AbelianElement>>,
    pub defect: Option<AbelianElement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinfReport {
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
    /// Index into `checks` of the first failure.
    pub first_failure: Option<usize>,
}

/// Random homogeneous foliation form of degree `r`; each coefficient is a
/// dense polynomial of degree ≤ 2 with entries in `−2..=2`.
pub fn random_element(v: &VData, r: usize, rng: &mut impl Rng) -> AbelianElement {
    let n = v.base_dim();
    let mut monomials = vec![Poly::constant(int(1))];
    for i in 0..n {
        monomials.push(Poly::var(i));
        for j in i..n {
            monomials.push(&Poly::var(i) * &Poly::var(j));
        }
    }
    let terms: Vec<(Vec<usize>, Poly)> = subsets(v.fiber_dim(), r)
        .into_iter()
        .map(|idx| {
            let mut c = Poly::zero();
            while c.is_zero() {
                for mono in &monomials {
                    c += &mono.scale(&int(rng.gen_range(-2..=2)));
                }
            }
            (idx, c)
        })
        .collect();
    v.element(terms)
}

fn koszul(args: &[&AbelianElement], chosen: &[usize]) -> bool {
    let mut odd = false;
    for &s in chosen {
        for t in 0..s {
            if !chosen.contains(&t) && args[s].shifted_degree().rem_euclid(2) == 1 && args[t].shifted_degree().rem_euclid(2) == 1
            {
                odd = !odd;
            }
        }
    }
    odd
}

/// `Σ_{i} Σ_{σ ∈ Sh(i, n−i)} ε(σ) l_{n−i+1}(l_i(a_σ…), a_σ…)`.
pub fn jacobi_defect(l: &LinfStructure, args: &[&AbelianElement]) -> Result<AbelianElement, LinfError> {
    let n = args.len();
    let mut total = l.vdata().zero();
    let curvature_zero = l.curvature()?.is_zero();
    for i in 0..=n {
        if i == 0 && curvature_zero {
            continue;
        }
        for chosen in subsets(n, i) {
            let inner_args: Vec<&AbelianElement> = chosen.iter().map(|&k| args[k]).collect();
            let inner = l.bracket(&inner_args)?;
            let mut outer: Vec<&AbelianElement> = vec![&inner];
            outer.extend((0..n).filter(|k| !chosen.contains(k)).map(|k| args[k]));
            let mut term = l.bracket(&outer)?;
            if koszul(args, &chosen) {
                term = term.scale(&-Rational::from_integer(1.into()));
            }
            total = total.add(&term)?;
        }
    }
    Ok(total)
}

fn patterns(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in patterns(m, k - 1) {
        let start = p.last().copied().unwrap_or(0);
        for r in start..=m {
            let mut q = p.clone();
            q.push(r);
            out.push(q);
        }
    }
    out
}

fn min_acc(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    }
}

/// Checks `l₁∘l₁ = 0`, the generalized Jacobi identities up to
/// `max_arity`, and, for unaugmented structures, that each Jacobi defect
/// equals the derived bracket of `½[P,P]`.
pub fn linf_verify(l: &LinfStructure, config: &VerifyConfig) -> Result<LinfReport, LinfError> {
    let v = l.vdata();
    let m = v.fiber_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let q = if l.is_augmented() { None } else { Some(jacobiator_tensor(v)?) };
    let mut checks = Vec::new();

    let mut square = IdentityCheck {
        name: "l1^2".into(),
        arity: 1,
        cases: 0,
        passed: true,
        accuracy: None,
        witness: None,
        defect: None,
    };
    for r in 0..=m {
        for _ in 0..config.trials {
            let a = random_element(v, r, &mut rng);
            let inner = l.bracket(&[&a])?;
            let d = l.bracket(&[&inner])?;
            square.cases += 1;
            square.accuracy = min_acc(square.accuracy, d.accuracy());
            if square.passed && !d.is_zero() {
                square.passed = false;
                square.witness = Some(vec![a]);
                square.defect = Some(d);
            }
        }
    }
    checks.push(square);

    for k in 1..=config.max_arity {
        let mut jac = IdentityCheck {
            name: format!("jacobi-{k}"),
            arity: k,
            cases: 0,
            passed: true,
            accuracy: None,
            witness: None,
            defect: None,
        };
        let mut direct = q.as_ref().map(|_| IdentityCheck { name: format!("jacobiator-{k}"), ..jac.clone() });
        for pat in patterns(m, k) {
            for _ in 0..config.trials {
                let args: Vec<AbelianElement> = pat.iter().map(|&r| random_element(v, r, &mut rng)).collect();
                let refs: Vec<&AbelianElement> = args.iter().collect();
                let d = jacobi_defect(l, &refs)?;
                jac.cases += 1;
                jac.accuracy = min_acc(jac.accuracy, d.accuracy());
                if jac.passed && !d.is_zero() {
                    jac.passed = false;
                    jac.witness = Some(args.clone());
                    jac.defect = Some(d.clone());
                }
                if let (Some(q), Some(dc)) = (&q, direct.as_mut()) {
                    let expect = v.derived_with(q, &refs)?;
                    dc.cases += 1;
                    dc.accuracy = min_acc(dc.accuracy, min_acc(expect.accuracy(), d.accuracy()));
                    if dc.passed && !expect.agrees_with(&d) {
                        dc.passed = false;
                        dc.witness = Some(args.clone());
                        dc.defect = Some(d.add(&expect.scale(&-int(1)))?);
                    }
                }
            }
        }
        checks.push(jac);
        checks.extend(direct);
    }
    let first_failure = checks.iter().position(|c| !c.passed);
    Ok(LinfReport { passed: first_failure.is_none(), checks, first_failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linf::tests::{curved, flat};
    use crate::linf::Orders;
    use crate::symfield::MultiVector;
    use num_traits::One;

    fn cfg(k: usize) -> VerifyConfig {
        VerifyConfig { max_arity: k, trials: 2, seed: 11 }
    }

    #[test]
    fn flat_models_satisfy_all_identities() {
        for v in [flat(3, &[(0, 1)]), flat(4, &[(0, 1)])] {
            let r = linf_verify(&LinfStructure::new(v), &cfg(3)).unwrap();
            assert!(r.passed, "{:?}", r.first_failure.map(|i| &r.checks[i].name));
            assert!(r.checks.iter().all(|c| c.accuracy.is_none()));
        }
    }

    #[test]
    fn flat_arity_four() {
        let r = linf_verify(&LinfStructure::new(flat(3, &[(0, 1)])), &VerifyConfig { max_arity: 4, trials: 1, seed: 2 }).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn curved_model_to_tracked_order() {
        let v = curved(3, Orders::for_arity(4)).unwrap();
        let r = linf_verify(&LinfStructure::new(v), &VerifyConfig { max_arity: 4, trials: 1, seed: 3 }).unwrap();
        assert!(r.passed);
        assert!(r.checks.iter().all(|c| c.accuracy.is_some()));
    }

    #[test]
    fn curved_model_needs_enough_order() {
        let v = curved(3, Orders::default()).unwrap();
        let e = linf_verify(&LinfStructure::new(v), &VerifyConfig { max_arity: 4, trials: 1, seed: 3 }).unwrap_err();
        assert!(matches!(e, LinfError::Field(_)));
    }

    #[test]
    fn sabotaged_bivector_fails_at_arity_two() {
        let v = flat(3, &[(0, 1)]);
        // (1 + x₁) ∂₃∧∂p₃ is no longer Poisson
        let c = v.chart().clone();
        let bad = MultiVector::basis(c.clone(), &[0, 1], Poly::one())
            .add(&MultiVector::basis(c, &[2, 3], Poly::one() + Poly::var(0)));
        let s = v.with_poisson(bad);
        let r = linf_verify(&LinfStructure::new(s), &cfg(3)).unwrap();
        assert!(!r.passed);
        let first = &r.checks[r.first_failure.unwrap()];
        assert_eq!((first.name.as_str(), first.arity), ("jacobi-2", 2));
        assert!(first.witness.is_some());
        // the defect is still the derived bracket of ½[P,P]
        assert!(r.checks.iter().filter(|c| c.name.starts_with("jacobiator")).all(|c| c.passed));
    }

    #[test]
    fn random_elements_are_homogeneous() {
        let v = flat(4, &[(0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for r in 0..=2 {
            let a = random_element(&v, r, &mut rng);
            assert!(a.is_homogeneous(r) && !a.is_zero());
        }
    }
}
