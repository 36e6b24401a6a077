//! The Poisson bracket on γ-polynomials.

use std::collections::HashMap;

use faer::c64;

use crate::error::{Error, Result};
use crate::site::SiteBasis;
use crate::strings::StringOperator;
use crate::symbolic::{GammaPolynomial, IrreducibleTensor, LocalTensor, MultiIndex};
use crate::tensor_ops::{gamma_shift, DenseOperator};
use crate::tolerance;

/// Largest chain used by the dense reference computation.
pub const DENSE_BRACKET_SITES: usize = 12;

const I: c64 = c64 { re: 0.0, im: 1.0 };

/// The local tensor `i Σ_{j=0}^{M+M′} [I^{M′}⊗a⊗I^{M′}, γ^j(I^{M+M′}⊗b)]` on M+2M′ sites.
pub fn bracket_tensor(a: &IrreducibleTensor, b: &IrreducibleTensor, basis: &SiteBasis) -> Result<LocalTensor> {
    let (m, mp) = (a.degree(), b.degree());
    let sites = m + 2 * mp;
    let left = StringOperator::placed(a.tensor(), mp, sites)?;
    let mut right = StringOperator::placed(b.tensor(), m + mp, sites)?;
    let mut acc = StringOperator::zero(sites)?;
    for _ in 0..=(m + mp) {
        acc.axpy(I, &left.commutator(&right, basis)?)?;
        right = right.shift();
    }
    acc.prune(tolerance::PRUNE);
    Ok(acc.to_local_tensor())
}

/// `{[a], [b]}` for irreducible generators, as a sum of single-generator words.
pub fn bracket_generators(a: &IrreducibleTensor, b: &IrreducibleTensor, basis: &SiteBasis) -> Result<GammaPolynomial> {
    a.tensor().validate(basis)?;
    b.tensor().validate(basis)?;
    Ok(GammaPolynomial::from_tensor(&bracket_tensor(a, b, basis)?))
}

/// Reference computation of [`bracket_tensor`] with dense matrices.
pub fn bracket_tensor_dense(a: &IrreducibleTensor, b: &IrreducibleTensor, basis: &SiteBasis) -> Result<LocalTensor> {
    let (m, mp) = (a.degree(), b.degree());
    let sites = m + 2 * mp;
    if sites > DENSE_BRACKET_SITES {
        return Err(Error::BracketTooLarge { sites, cap: DENSE_BRACKET_SITES });
    }
    let left = a.tensor().to_dense(basis)?.pad_left(mp)?.pad_right(mp)?;
    let mut right = b.tensor().to_dense(basis)?.pad_left(m + mp)?;
    let mut acc = DenseOperator::zeros(sites, basis.kappa())?;
    for _ in 0..=(m + mp) {
        acc = acc.add(&left.commutator(&right)?)?;
        right = gamma_shift(&right);
    }
    LocalTensor::from_dense(&acc.scale(I), basis)
}

fn generator(idx: &MultiIndex) -> IrreducibleTensor {
    IrreducibleTensor::new(LocalTensor::monomial(idx.clone())).expect("word factors are irreducible monomials")
}

/// Bilinear, Leibniz extension of the generator bracket; scalars bracket to zero.
pub fn bracket(p: &GammaPolynomial, q: &GammaPolynomial, basis: &SiteBasis) -> Result<GammaPolynomial> {
    let mut cache: HashMap<(MultiIndex, MultiIndex), GammaPolynomial> = HashMap::new();
    let mut out = GammaPolynomial::zero();
    for (w, &cw) in p.terms() {
        for (v, &cv) in q.terms() {
            for i in 0..w.len() {
                for j in 0..v.len() {
                    let key = (w.factors()[i].clone(), v.factors()[j].clone());
                    let gen = match cache.get(&key) {
                        Some(g) => g.clone(),
                        None => {
                            let g = bracket_generators(&generator(&key.0), &generator(&key.1), basis)?;
                            cache.insert(key, g.clone());
                            g
                        }
                    };
                    if gen.is_zero_symbolic() {
                        continue;
                    }
                    let rest = GammaPolynomial::from_word(w.without(i).mul(&v.without(j)), cw * cv);
                    out = out.add(&rest.mul(&gen));
                }
            }
        }
    }
    out.prune(tolerance::PRUNE);
    Ok(out)
}

/// `{p, {q, r}} + {q, {r, p}} + {r, {p, q}}`.
pub fn jacobiator(p: &GammaPolynomial, q: &GammaPolynomial, r: &GammaPolynomial, basis: &SiteBasis) -> Result<GammaPolynomial> {
    let a = bracket(p, &bracket(q, r, basis)?, basis)?;
    let b = bracket(q, &bracket(r, p, basis)?, basis)?;
    let c = bracket(r, &bracket(p, q, basis)?, basis)?;
    Ok(a.add(&b).add(&c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::build_basis;
    use crate::symbolic::{quantize, GammaWord};
    use crate::tensor_ops::gamma_embed;
    use proptest::prelude::*;

    fn irr(paulis: &[u8]) -> IrreducibleTensor {
        IrreducibleTensor::new(LocalTensor::from_pauli(paulis)).unwrap()
    }

    fn sigma(p: u8) -> GammaPolynomial {
        GammaPolynomial::from_tensor(&LocalTensor::from_pauli(&[p]))
    }

    #[test]
    fn pauli_generator_brackets() {
        let basis = build_basis(2).unwrap();
        let b = bracket_generators(&irr(&[1]), &irr(&[2]), &basis).unwrap();
        assert!(b.max_coeff_diff(&sigma(3).scale(c64::new(-2.0, 0.0))) < 1e-14);
        assert!(bracket_generators(&irr(&[3]), &irr(&[3]), &basis).unwrap().is_zero_symbolic());
        assert!(bracket_generators(&irr(&[1, 0, 2]), &irr(&[1, 0, 2]), &basis).unwrap().is_zero_symbolic());
    }

    #[test]
    fn string_route_matches_dense_route() {
        for kappa in 2..=3 {
            let basis = build_basis(kappa).unwrap();
            let pairs: Vec<(Vec<u8>, Vec<u8>)> = vec![
                (vec![1], vec![2]),
                (vec![3, 1], vec![2]),
                (vec![1, 0, 2], vec![3, 3]),
                (vec![2, 3], vec![1, 2]),
            ];
            for (x, y) in pairs {
                if kappa == 3 && x.len() + 2 * y.len() > 5 {
                    continue;
                }
                let a = IrreducibleTensor::new(LocalTensor::monomial(x)).unwrap();
                let b = IrreducibleTensor::new(LocalTensor::monomial(y)).unwrap();
                let s = bracket_tensor(&a, &b, &basis).unwrap();
                let d = bracket_tensor_dense(&a, &b, &basis).unwrap();
                assert!(s.max_coeff_diff(&d).unwrap() < 1e-13);
            }
        }
    }

    #[test]
    fn closed_form_is_exact_at_large_enough_n() {
        let basis = build_basis(2).unwrap();
        for (x, y) in [(vec![1u8], vec![2u8]), (vec![3, 1], vec![2]), (vec![1, 0, 2], vec![3])] {
            let (a, b) = (irr(&x), irr(&y));
            let br = bracket_generators(&a, &b, &basis).unwrap();
            let lo = 2 * (x.len() + y.len());
            for n in lo..=(lo + 1).min(10) {
                let lhs = gamma_embed(a.tensor(), n, &basis)
                    .unwrap()
                    .commutator(&gamma_embed(b.tensor(), n, &basis).unwrap())
                    .unwrap()
                    .scale(c64::new(0.0, n as f64));
                let rhs = quantize(&br, n, &basis).unwrap();
                assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12, "{x:?} {y:?} N={n}");
            }
        }
    }

    #[test]
    fn leibniz_example_and_constants() {
        let basis = build_basis(2).unwrap();
        let x = sigma(1);
        let lhs = bracket(&x.mul(&x), &sigma(2), &basis).unwrap();
        let expected = x.mul(&sigma(3)).scale(c64::new(-4.0, 0.0));
        assert!(lhs.max_coeff_diff(&expected) < 1e-13);
        assert!(bracket(&x, &GammaPolynomial::unit(), &basis).unwrap().is_zero_symbolic());
        assert!(bracket(&GammaPolynomial::constant(c64::new(3.0, 1.0)), &x, &basis).unwrap().is_zero_symbolic());
    }

    #[test]
    fn generator_jacobi_vanishes() {
        let basis = build_basis(2).unwrap();
        let j = jacobiator(&sigma(1), &sigma(2), &sigma(3), &basis).unwrap();
        assert!(j.is_zero_symbolic());
        let basis3 = build_basis(3).unwrap();
        let g = |k: u8| GammaPolynomial::from_tensor(&LocalTensor::monomial(vec![k]));
        assert!(jacobiator(&g(1), &g(4), &g(8), &basis3).unwrap().is_zero_symbolic());
    }

    #[test]
    fn rejects_reducible_input() {
        assert!(IrreducibleTensor::new(LocalTensor::from_pauli(&[1, 0])).is_err());
    }

    fn random_poly(seed: u64) -> GammaPolynomial {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut p = GammaPolynomial::constant(c64::new(rng.gen_range(-1.0..1.0), 0.0));
        for _ in 0..2 {
            let n = rng.gen_range(1..=2);
            let factors: Vec<MultiIndex> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        vec![rng.gen_range(1..4)]
                    } else {
                        vec![rng.gen_range(1..4), rng.gen_range(1..4)]
                    }
                })
                .collect();
            p.add_word(GammaWord::new(factors).unwrap(), c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        p
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn antisymmetry_star_and_leibniz(a in 0u64..1000, b in 1000u64..2000, c in 2000u64..3000) {
            let basis = build_basis(2).unwrap();
            let (p, q, r) = (random_poly(a), random_poly(b), random_poly(c));
            let pq = bracket(&p, &q, &basis).unwrap();
            prop_assert!(pq.add(&bracket(&q, &p, &basis).unwrap()).l1_norm() < 1e-12);
            prop_assert!(pq.adjoint().max_coeff_diff(&bracket(&p.adjoint(), &q.adjoint(), &basis).unwrap()) < 1e-12);
            let lhs = bracket(&p, &q.mul(&r), &basis).unwrap();
            let rhs = pq.mul(&r).add(&q.mul(&bracket(&p, &r, &basis).unwrap()));
            prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-12);
        }
    }
}
