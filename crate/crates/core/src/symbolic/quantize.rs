//! The quantization maps Q_N: canonical representatives materialized on N sites.

use faer::c64;

use crate::error::{Error, Result};
use crate::norm::{spectral_norm_strings, NormOptions};
use crate::site::SiteBasis;
use crate::strings::{pack, StringOperator};
use crate::symbolic::polynomial::{GammaPolynomial, GammaWord};
use crate::tensor_ops::{DenseOperator, ImplicitOperator};
use crate::tolerance;

/// All `(j_1, …, j_parts)` with nonnegative entries summing to `total`.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for j in 0..=total {
            cur.push(j);
            rec(total - j, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `Q_N` of a single word with unit coefficient.
pub fn quantize_word_strings(word: &GammaWord, sites: usize) -> Result<StringOperator> {
    let ell = word.len();
    if ell > tolerance::MAX_WORD_FACTORS {
        return Err(Error::TooManyFactors { factors: ell, cap: tolerance::MAX_WORD_FACTORS });
    }
    if ell == 0 {
        return StringOperator::identity(sites);
    }
    let degree = word.total_degree();
    if sites < degree {
        return StringOperator::zero(sites);
    }
    if ell == 1 {
        return StringOperator::gamma_embed(&word.factor_tensor(0), sites);
    }
    let weight = c64::new(1.0 / (ell as f64 * (sites as f64).powi(ell as i32 - 1)), 0.0);
    let packed: Vec<(u128, usize)> = word.factors().iter().map(|f| (pack(f), f.len())).collect();
    let perms = permutations(ell);
    let mut inner = StringOperator::zero(sites)?;
    for js in compositions(sites - degree, ell) {
        for perm in &perms {
            let mut key = 0u128;
            for (j, &slot) in js.iter().zip(perm) {
                let (f, len) = packed[slot];
                key = (key << (4 * (j + len))) | f;
            }
            inner.add_term(key, weight);
        }
    }
    Ok(inner.gamma_average())
}

/// `Q_N(p)` as a sum of basis strings.
pub fn quantize_strings(p: &GammaPolynomial, sites: usize) -> Result<StringOperator> {
    let mut out = StringOperator::identity(sites)?.scale(p.scalar());
    for (word, &coeff) in p.terms() {
        out.axpy(coeff, &quantize_word_strings(word, sites)?)?;
    }
    out.prune(tolerance::PRUNE);
    Ok(out)
}

/// `Q_N(p)` as a dense matrix; fails above the dense limit.
pub fn quantize(p: &GammaPolynomial, sites: usize, basis: &SiteBasis) -> Result<DenseOperator> {
    quantize_strings(p, sites)?.to_dense(basis)
}

/// `Q_N(p)` in matrix-free form.
pub fn quantize_implicit(p: &GammaPolynomial, sites: usize, basis: &SiteBasis) -> Result<ImplicitOperator> {
    quantize_strings(p, sites)?.to_implicit(basis)
}

/// Each word as the plain product of its factor embeddings `Π_i γ̄^{M_i}_N(a_i)`.
pub fn naive_product_strings(p: &GammaPolynomial, sites: usize, basis: &SiteBasis) -> Result<StringOperator> {
    let mut out = StringOperator::identity(sites)?.scale(p.scalar());
    for (word, &coeff) in p.terms() {
        let mut prod = StringOperator::identity(sites)?;
        for i in 0..word.len() {
            let factor = StringOperator::gamma_embed(&word.factor_tensor(i), sites)?;
            prod = prod.mul(&factor, basis)?;
        }
        out.axpy(coeff, &prod)?;
    }
    out.prune(tolerance::PRUNE);
    Ok(out)
}

pub fn naive_product(p: &GammaPolynomial, sites: usize, basis: &SiteBasis) -> Result<DenseOperator> {
    naive_product_strings(p, sites, basis)?.to_dense(basis)
}

/// Chain lengths and solver settings for the numerical zero test.
#[derive(Clone, Debug)]
pub struct ZeroCheck {
    pub sites: Vec<usize>,
    pub norm: NormOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroReport {
    pub symbolic: bool,
    /// `None` when no numerical window was requested.
    pub numerical: Option<bool>,
    pub max_norm: f64,
    pub scale: f64,
}

impl ZeroReport {
    pub fn is_zero(&self) -> bool {
        self.symbolic && self.numerical.unwrap_or(true)
    }

    pub fn disagreement(&self) -> bool {
        self.numerical.is_some_and(|n| n != self.symbolic)
    }
}

/// Symbolic zero test, optionally confirmed by `‖Q_N(p)‖ < 1e−9·scale` on a window of N.
pub fn poly_is_zero(p: &GammaPolynomial, check: Option<&ZeroCheck>, basis: &SiteBasis) -> Result<ZeroReport> {
    let symbolic = p.is_zero_symbolic();
    let scale = p.l1_norm().max(1.0);
    let mut report = ZeroReport { symbolic, numerical: None, max_norm: 0.0, scale };
    if let Some(check) = check {
        for &n in &check.sites {
            let q = quantize_strings(p, n)?;
            report.max_norm = report.max_norm.max(spectral_norm_strings(&q, basis, &check.norm)?);
        }
        report.numerical = Some(report.max_norm < tolerance::ZERO_NORM * scale);
    }
    Ok(report)
}
