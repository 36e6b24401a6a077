//! The numerical scans. Operators are assembled in the string algebra and
//! only materialized (densely or matrix-free) for the final norm.

use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::scan::{NRange, PointFailure, ScanResult, ScanRow};
use crate::norm::{spectral_norm_strings, NormOptions};
use crate::poisson::{bracket, jacobiator};
use crate::site::{build_basis, SiteBasis, SiteState};
use crate::strings::StringOperator;
use crate::symbolic::{
    naive_product_strings, quantize_strings, CanonicalDecomposition, GammaPolynomial, LocalTensor,
};
use crate::tensor_ops::{evaluate_state, ProductStateSpec};

/// Basis and solver settings shared by the scans.
#[derive(Clone, Debug)]
pub struct ScanContext {
    pub basis: SiteBasis,
    pub norm: NormOptions,
}

impl ScanContext {
    pub fn new(kappa: usize, norm: NormOptions) -> Result<Self> {
        Ok(Self { basis: build_basis(kappa)?, norm })
    }

    pub fn norm_of(&self, op: &StringOperator) -> Result<f64> {
        spectral_norm_strings(op, &self.basis, &self.norm)
    }
}

fn collect(kind: &str, range: &NRange, mut point: impl FnMut(usize) -> Result<ScanRow>) -> ScanResult {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for n in range.values() {
        match point(n) {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(PointFailure { n, message: e.to_string() }),
        }
    }
    ScanResult::new(kind, rows, failures)
}

fn row(n: usize, value: f64) -> ScanRow {
    ScanRow { n, value, reference: None }
}

/// `iN [a, b]`.
fn scaled_commutator(a: &StringOperator, b: &StringOperator, basis: &SiteBasis) -> Result<StringOperator> {
    Ok(a.commutator(b, basis)?.scale(c64::new(0.0, a.sites() as f64)))
}

/// Rows `‖Q_N(p)‖`.
pub fn norm_scan(ctx: &ScanContext, p: &GammaPolynomial, range: &NRange) -> ScanResult {
    collect("norm_scan", range, |n| Ok(row(n, ctx.norm_of(&quantize_strings(p, n)?)?)))
}

/// Rows `‖Q_N({p, q}) − iN [Q_N(p), Q_N(q)]‖`.
pub fn dgr_scan(ctx: &ScanContext, p: &GammaPolynomial, q: &GammaPolynomial, range: &NRange) -> Result<ScanResult> {
    let pq = bracket(p, q, &ctx.basis)?;
    Ok(collect("dgr_scan", range, |n| {
        let lhs = quantize_strings(&pq, n)?;
        let rhs = scaled_commutator(&quantize_strings(p, n)?, &quantize_strings(q, n)?, &ctx.basis)?;
        Ok(row(n, ctx.norm_of(&lhs.sub(&rhs)?)?))
    }))
}

/// Rows `‖naive(p·q) − Q_N(p·q)‖`.
pub fn remainder_scan(ctx: &ScanContext, p: &GammaPolynomial, q: &GammaPolynomial, range: &NRange) -> ScanResult {
    let pq = p.mul(q);
    collect("remainder_scan", range, |n| {
        let diff = naive_product_strings(&pq, n, &ctx.basis)?.sub(&quantize_strings(&pq, n)?)?;
        Ok(row(n, ctx.norm_of(&diff)?))
    })
}

/// Rows `‖γ̄^N_{N′}(γ̄^M_N a) − γ̄^M_{N′} a‖` over N′.
pub fn consistency_scan(ctx: &ScanContext, a: &LocalTensor, base_sites: usize, range: &NRange) -> Result<ScanResult> {
    a.validate(&ctx.basis)?;
    let base = StringOperator::gamma_embed(a, base_sites)?;
    Ok(collect("consistency_scan", range, |n| {
        let lifted = base.pad_left(n.checked_sub(base_sites).ok_or(crate::Error::ShrinkingEmbedding {
            source_sites: base_sites,
            target: n,
        })?)?;
        let diff = lifted.gamma_average().sub(&StringOperator::gamma_embed(a, n)?)?;
        Ok(row(n, ctx.norm_of(&diff)?))
    }))
}

/// Leibniz rows `‖iN[P, QR] − iN[P, Q]R − Q·iN[P, R]‖` and Jacobi rows
/// `‖Σ_cyc iN[Q_N(p), Q_N({q, r})]‖`; the symbolic Jacobiator's size is
/// recorded on the Jacobi result.
pub fn axiom_scan(
    ctx: &ScanContext,
    p: &GammaPolynomial,
    q: &GammaPolynomial,
    r: &GammaPolynomial,
    range: &NRange,
) -> Result<(ScanResult, ScanResult)> {
    let b = &ctx.basis;
    let leibniz = collect("axiom_scan/leibniz", range, |n| {
        let (pp, qq, rr) = (quantize_strings(p, n)?, quantize_strings(q, n)?, quantize_strings(r, n)?);
        let lhs = scaled_commutator(&pp, &qq.mul(&rr, b)?, b)?;
        let t1 = scaled_commutator(&pp, &qq, b)?.mul(&rr, b)?;
        let t2 = qq.mul(&scaled_commutator(&pp, &rr, b)?, b)?;
        Ok(row(n, ctx.norm_of(&lhs.sub(&t1)?.sub(&t2)?)?))
    });
    let qr = bracket(q, r, b)?;
    let rp = bracket(r, p, b)?;
    let pq = bracket(p, q, b)?;
    let mut jacobi = collect("axiom_scan/jacobi", range, |n| {
        let mut acc = scaled_commutator(&quantize_strings(p, n)?, &quantize_strings(&qr, n)?, b)?;
        acc.axpy(c64::new(1.0, 0.0), &scaled_commutator(&quantize_strings(q, n)?, &quantize_strings(&rp, n)?, b)?)?;
        acc.axpy(c64::new(1.0, 0.0), &scaled_commutator(&quantize_strings(r, n)?, &quantize_strings(&pq, n)?, b)?)?;
        acc.prune(crate::tolerance::PRUNE);
        Ok(row(n, ctx.norm_of(&acc)?))
    });
    jacobi.symbolic_residual = Some(jacobiator(p, q, r, b)?.l1_norm());
    Ok((leibniz, jacobi))
}

/// All products of `len` states drawn from the pure-state grid.
fn grid_products(kappa: usize, len: usize) -> Vec<Vec<SiteState>> {
    let grid = SiteState::pure_grid(kappa);
    let mut out: Vec<Vec<SiteState>> = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                grid.iter().map(move |s| {
                    let mut v = prefix.clone();
                    v.push(s.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// `max_η |ω_η(a)|` over products of grid states on the sites of `a`.
pub fn grid_max_expectation(a: &LocalTensor, basis: &SiteBasis) -> Result<f64> {
    let op = StringOperator::from_local(a)?.to_implicit(basis)?;
    let mut best = 0.0f64;
    for states in grid_products(basis.kappa(), a.degree()) {
        let spec = ProductStateSpec { prefix: states, period: Vec::new() };
        best = best.max(evaluate_state(&spec, &op)?.norm());
    }
    Ok(best)
}

/// Threshold `0.4 · ω_max(a′_j) / (j + 1)` for a decomposition with the single
/// nonzero component `a′_j`; `None` otherwise.
pub fn lowerbound_threshold(d: &CanonicalDecomposition, basis: &SiteBasis) -> Result<Option<f64>> {
    match d.nonzero_degrees().as_slice() {
        [j] if *j >= 1 => Ok(Some(0.4 * grid_max_expectation(&d.component(*j), basis)? / (*j as f64 + 1.0))),
        _ => Ok(None),
    }
}

/// The periodic product states used to bound `|ω(Q_N(a))|` from below.
fn lowerbound_family(d: &CanonicalDecomposition, n: usize, kappa: usize) -> Result<Vec<ProductStateSpec>> {
    let tau = SiteState::maximally_mixed(kappa);
    let mut family = vec![ProductStateSpec { prefix: Vec::new(), period: vec![tau.clone()] }];
    let degrees = d.nonzero_degrees();
    for &j in degrees.iter().filter(|&&j| j >= 1) {
        if n < j + 1 {
            continue;
        }
        for etas in grid_products(kappa, j) {
            let mut block = vec![tau.clone()];
            block.extend(etas);
            family.push(ProductStateSpec::trace_padded(n, block)?);
        }
    }
    let m = degrees.last().copied().unwrap_or(0);
    if m >= 1 && n >= 2 * m {
        for ell in 1..=m {
            for etas in grid_products(kappa, ell) {
                let mut block = vec![tau.clone(); 2 * m - ell];
                block.extend(etas);
                family.push(ProductStateSpec::trace_padded(n, block)?);
            }
        }
    }
    Ok(family)
}

/// Rows `max_ω |ω(Q_N(a))|` over the periodic family, with `‖Q_N(a)‖` as reference.
pub fn lowerbound_scan(ctx: &ScanContext, d: &CanonicalDecomposition, range: &NRange) -> Result<ScanResult> {
    let mut poly = GammaPolynomial::zero();
    for comp in d.components() {
        comp.validate(&ctx.basis)?;
        poly = poly.add(&GammaPolynomial::from_tensor(comp));
    }
    Ok(collect("lowerbound_scan", range, |n| {
        let q = quantize_strings(&poly, n)?;
        let op = q.to_implicit(&ctx.basis)?;
        let mut best = 0.0f64;
        for spec in lowerbound_family(d, n, ctx.basis.kappa())? {
            best = best.max(evaluate_state(&spec, &op)?.norm());
        }
        Ok(ScanRow { n, value: best, reference: Some(ctx.norm_of(&q)?) })
    }))
}

/// Parameters of a seeded random γ-polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPolySpec {
    /// Largest degree of a factor tensor.
    pub max_degree: usize,
    /// Number of words.
    #[serde(default = "default_words")]
    pub words: usize,
    /// Largest number of factors per word.
    #[serde(default = "default_factors")]
    pub max_factors: usize,
    /// Real coefficients throughout, so the polynomial is self-adjoint.
    #[serde(default = "default_true")]
    pub hermitian: bool,
}

fn default_words() -> usize {
    3
}

fn default_factors() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn random_coeff(rng: &mut ChaCha8Rng, hermitian: bool) -> c64 {
    let re = rng.gen_range(-1.0..1.0);
    c64::new(re, if hermitian { 0.0 } else { rng.gen_range(-1.0..1.0) })
}

/// A random irreducible tensor of the given degree with a few terms.
pub fn random_irreducible(degree: usize, kappa: usize, hermitian: bool, rng: &mut ChaCha8Rng) -> LocalTensor {
    let top = (kappa * kappa) as u8;
    let mut t = LocalTensor::zero(degree);
    for _ in 0..3 {
        let idx: Vec<u8> = (0..degree)
            .map(|i| if i == 0 || i + 1 == degree { rng.gen_range(1..top) } else { rng.gen_range(0..top) })
            .collect();
        t.add_term(idx, random_coeff(rng, hermitian));
    }
    t.prune(crate::tolerance::PRUNE);
    t
}

pub fn random_polynomial(spec: &RandomPolySpec, kappa: usize, seed: u64) -> GammaPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = GammaPolynomial::constant(random_coeff(&mut rng, spec.hermitian));
    for _ in 0..spec.words {
        let ell = rng.gen_range(1..=spec.max_factors.max(1));
        let factors: Vec<LocalTensor> = (0..ell)
            .map(|_| {
                let deg = rng.gen_range(1..=spec.max_degree.max(1));
                random_irreducible(deg, kappa, spec.hermitian, &mut rng)
            })
            .collect();
        let coeff = random_coeff(&mut rng, spec.hermitian);
        p = p.add(&GammaPolynomial::product_of(&factors).scale(coeff));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::Engine;
    use crate::symbolic::decompose;

    fn ctx() -> ScanContext {
        ScanContext::new(2, NormOptions::default().with_engine(Engine::Dense)).unwrap()
    }

    fn sigma(p: u8) -> GammaPolynomial {
        GammaPolynomial::from_tensor(&LocalTensor::from_pauli(&[p]))
    }

    #[test]
    fn norm_scan_examples() {
        let r = NRange::new(2, 6, 1).unwrap();
        for p in [GammaPolynomial::unit(), sigma(3)] {
            let s = norm_scan(&ctx(), &p, &r);
            assert!(s.rows.iter().all(|row| (row.value - 1.0).abs() < 1e-12));
            assert!((s.extrapolated_limit.unwrap().alpha_inf - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dgr_generators_and_equal_inputs() {
        let r = NRange::new(4, 7, 1).unwrap();
        let s = dgr_scan(&ctx(), &sigma(1), &sigma(2), &r).unwrap();
        assert!(s.rows.iter().all(|row| row.value < 1e-10));
        let p = sigma(1).mul(&sigma(3));
        let s = dgr_scan(&ctx(), &p, &p, &r).unwrap();
        assert!(s.rows.iter().all(|row| row.value < 1e-12));
    }

    #[test]
    fn remainder_examples() {
        let r = NRange::new(2, 8, 1).unwrap();
        let s = remainder_scan(&ctx(), &sigma(3), &GammaPolynomial::unit(), &r);
        assert!(s.rows.iter().all(|row| row.value < 1e-14));
        let s = remainder_scan(&ctx(), &sigma(3), &sigma(3), &r);
        for row in &s.rows {
            assert!((row.value - 1.0 / row.n as f64).abs() < 1e-12);
        }
        assert!(s.fit.unwrap().slope < -0.99);
    }

    #[test]
    fn consistency_examples() {
        let r = NRange::new(4, 8, 1).unwrap();
        let s = consistency_scan(&ctx(), &LocalTensor::from_pauli(&[3]), 4, &r).unwrap();
        assert!(s.rows.iter().all(|row| row.value < 1e-13));
        let s = consistency_scan(&ctx(), &LocalTensor::from_pauli(&[0, 0]), 4, &r).unwrap();
        assert!(s.rows.iter().all(|row| row.value < 1e-13));
        let s = consistency_scan(&ctx(), &LocalTensor::from_pauli(&[3, 3]), 4, &r).unwrap();
        assert!(s.rows[0].value < 1e-13);
        assert!(s.rows.iter().all(|row| row.value <= 1.0 / 4.0 * 2.0 + 1e-12));
        assert!(s.rows.iter().skip(1).any(|row| row.value > 1e-3));
    }

    #[test]
    fn axiom_examples() {
        let r = NRange::new(6, 7, 1).unwrap();
        let (l, j) = axiom_scan(&ctx(), &sigma(1), &sigma(2), &sigma(3), &r).unwrap();
        assert!(l.rows.iter().all(|row| row.value < 1e-10));
        assert!(j.rows.iter().all(|row| row.value < 1e-10));
        assert!(j.symbolic_residual.unwrap() < 1e-12);
        let (l, j) = axiom_scan(&ctx(), &sigma(1).mul(&sigma(2)), &GammaPolynomial::unit(), &GammaPolynomial::unit(), &r).unwrap();
        assert!(l.rows.iter().chain(&j.rows).all(|row| row.value == 0.0));
    }

    #[test]
    fn lowerbound_examples() {
        let c = ctx();
        let d = decompose(&LocalTensor::from_pauli(&[3]));
        let s = lowerbound_scan(&c, &d, &NRange::new(4, 8, 1).unwrap()).unwrap();
        for row in &s.rows {
            let expected = (row.n / 2) as f64 / row.n as f64;
            assert!((row.value - expected).abs() < 1e-12, "{row:?}");
            assert!(row.value <= row.reference.unwrap() + 1e-12);
        }
        assert!((lowerbound_threshold(&d, &c.basis).unwrap().unwrap() - 0.2).abs() < 1e-12);

        let zero = decompose(&LocalTensor::zero(2));
        let s = lowerbound_scan(&c, &zero, &NRange::new(4, 6, 1).unwrap()).unwrap();
        assert!(s.rows.iter().all(|row| row.value == 0.0));

        let zz = decompose(&LocalTensor::from_pauli(&[3, 3]));
        let s = lowerbound_scan(&c, &zz, &NRange::new(8, 10, 1).unwrap()).unwrap();
        assert!(s.rows.iter().all(|row| row.value > 0.25 - 1e-12));
    }

    #[test]
    fn random_polynomials_are_deterministic_and_hermitian() {
        let spec = RandomPolySpec { max_degree: 2, words: 3, max_factors: 2, hermitian: true };
        let a = random_polynomial(&spec, 2, 11);
        assert_eq!(a, random_polynomial(&spec, 2, 11));
        assert_ne!(a, random_polynomial(&spec, 2, 12));
        assert!(a.is_hermitian(0.0));
        assert!(a.max_word_len() <= 2);
    }
}
