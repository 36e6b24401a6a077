use std::collections::BTreeMap;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::site::{SiteBasis, SiteMatrix};
use crate::strings::StringOperator;
use crate::tensor_ops::DenseOperator;
use crate::tolerance;

/// Basis indices `(k_1, …, k_M)`, site 1 first; `0` is the identity.
pub type MultiIndex = Vec<u8>;

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// An element of `B^M` expanded in the product basis.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LocalTensor {
    degree: usize,
    terms: BTreeMap<MultiIndex, c64>,
}

impl LocalTensor {
    pub fn zero(degree: usize) -> Self {
        Self { degree, terms: BTreeMap::new() }
    }

    /// A degree-0 tensor.
    pub fn scalar(c: c64) -> Self {
        let mut out = Self::zero(0);
        out.add_term(Vec::new(), c);
        out
    }

    /// `1 · e_{k_1} ⊗ … ⊗ e_{k_M}`.
    pub fn monomial(indices: MultiIndex) -> Self {
        let mut out = Self::zero(indices.len());
        out.add_term(indices, c64::new(1.0, 0.0));
        out
    }

    /// `σ_{p_1} ⊗ … ⊗ σ_{p_M}` for κ = 2, with `σ_0 = I` and `σ_p = 2 e_p`.
    pub fn from_pauli(paulis: &[u8]) -> Self {
        let factor = paulis.iter().filter(|&&p| p != 0).count() as i32;
        let mut out = Self::zero(paulis.len());
        out.add_term(paulis.to_vec(), c64::new(2f64.powi(factor), 0.0));
        out
    }

    pub fn from_terms(degree: usize, terms: impl IntoIterator<Item = (MultiIndex, c64)>) -> Result<Self> {
        let mut out = Self::zero(degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(Error::DegreeMismatch { declared: degree, found: idx.len() });
            }
            out.add_term(idx, c);
        }
        out.prune(tolerance::PRUNE);
        Ok(out)
    }

    pub fn from_site_matrix(a: &SiteMatrix, basis: &SiteBasis) -> Result<Self> {
        Self::from_site_matrices(std::slice::from_ref(a), basis)
    }

    /// `a_1 ⊗ … ⊗ a_M` expanded in the basis.
    pub fn from_site_matrices(factors: &[SiteMatrix], basis: &SiteBasis) -> Result<Self> {
        let mut out = Self::scalar(c64::new(1.0, 0.0));
        for f in factors {
            let coeffs = basis.expand(f)?;
            let mut single = Self::zero(1);
            for (k, c) in coeffs.into_iter().enumerate() {
                if c.norm() > tolerance::PRUNE {
                    single.add_term(vec![k as u8], c);
                }
            }
            out = out.tensor(&single);
        }
        Ok(out)
    }

    /// Hilbert–Schmidt projection of a dense operator onto the product basis.
    pub fn from_dense(a: &DenseOperator, basis: &SiteBasis) -> Result<Self> {
        if a.kappa() != basis.kappa() {
            return Err(Error::DimensionMismatch { expected: basis.kappa(), got: a.kappa() });
        }
        let mut out = Self::zero(a.sites());
        let mut prefix = Vec::with_capacity(a.sites());
        project(a.matrix(), basis, &mut prefix, &mut out);
        out.prune(tolerance::PRUNE);
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, c64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, idx: &[u8]) -> c64 {
        self.terms.get(idx).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.norm() <= tol)
    }

    pub(crate) fn add_term(&mut self, idx: MultiIndex, c: c64) {
        debug_assert_eq!(idx.len(), self.degree);
        *self.terms.entry(idx).or_insert(ZERO) += c;
    }

    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    /// Checks every index against the basis.
    pub fn validate(&self, basis: &SiteBasis) -> Result<()> {
        for idx in self.terms.keys() {
            for &k in idx {
                basis.check_index(k as usize)?;
            }
        }
        Ok(())
    }

    fn check_degree(&self, other: &Self) -> Result<()> {
        if self.degree == other.degree {
            Ok(())
        } else {
            Err(Error::DegreeMismatch { declared: self.degree, found: other.degree })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        let mut out = self.clone();
        for (idx, &c) in &other.terms {
            out.add_term(idx.clone(), c);
        }
        out.prune(tolerance::PRUNE);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(c64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: c64) -> Self {
        Self { degree: self.degree, terms: self.terms.iter().map(|(k, &c)| (k.clone(), c * factor)).collect() }
    }

    /// Adjoint; the basis is Hermitian.
    pub fn adjoint(&self) -> Self {
        Self { degree: self.degree, terms: self.terms.iter().map(|(k, &c)| (k.clone(), c.conj())).collect() }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let mut idx = a.clone();
                idx.extend_from_slice(b);
                out.add_term(idx, ca * cb);
            }
        }
        out
    }

    /// `I^k ⊗ self`.
    pub fn pad_left(&self, k: usize) -> Self {
        let mut out = Self::zero(self.degree + k);
        for (idx, &c) in &self.terms {
            let mut padded = vec![0u8; k];
            padded.extend_from_slice(idx);
            out.add_term(padded, c);
        }
        out
    }

    /// `self ⊗ I^k`.
    pub fn pad_right(&self, k: usize) -> Self {
        let mut out = Self::zero(self.degree + k);
        for (idx, &c) in &self.terms {
            let mut padded = idx.clone();
            padded.resize(self.degree + k, 0);
            out.add_term(padded, c);
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_coeff_diff(&self, other: &Self) -> Result<f64> {
        self.check_degree(other)?;
        let mut m = 0.0f64;
        for (idx, &c) in &self.terms {
            m = m.max((c - other.coeff(idx)).norm());
        }
        for (idx, &c) in &other.terms {
            if !self.terms.contains_key(idx) {
                m = m.max(c.norm());
            }
        }
        Ok(m)
    }

    /// The κ^M × κ^M matrix.
    pub fn to_dense(&self, basis: &SiteBasis) -> Result<DenseOperator> {
        self.validate(basis)?;
        StringOperator::from_local(self)?.to_dense(basis)
    }
}

/// Contracts the leading site against each basis element and recurses.
fn project(a: &Mat<c64>, basis: &SiteBasis, prefix: &mut MultiIndex, out: &mut LocalTensor) {
    let n = a.nrows();
    if n == 1 {
        let c = a[(0, 0)];
        if c.norm() > tolerance::PRUNE {
            out.add_term(prefix.clone(), c);
        }
        return;
    }
    let kappa = basis.kappa();
    let s = n / kappa;
    for (k, e) in basis.elements().iter().enumerate() {
        let eta = basis.norm(k);
        let mut sub = Mat::<c64>::zeros(s, s);
        let mut any = false;
        for r1 in 0..kappa {
            for c1 in 0..kappa {
                let w = e.get(c1, r1);
                if w == ZERO {
                    continue;
                }
                any = true;
                let w = w / eta;
                for j in 0..s {
                    for i in 0..s {
                        sub[(i, j)] += w * a[(r1 * s + i, c1 * s + j)];
                    }
                }
            }
        }
        if any {
            prefix.push(k as u8);
            project(&sub, basis, prefix, out);
            prefix.pop();
        }
    }
}
