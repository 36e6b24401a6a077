//! Operators on the N-site chain: placement, the cyclic shift γ_N, its
//! average γ̄_N, γ-sequence embeddings and product-state evaluation.
//!
//! Site 1 is the leftmost tensor factor and the most significant base-κ digit
//! of a row or column index.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::site::{SiteBasis, SiteMatrix, SiteState};
use crate::symbolic::LocalTensor;

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

pub(crate) fn checked_pow(kappa: usize, sites: usize) -> Result<usize> {
    u32::try_from(sites)
        .ok()
        .and_then(|s| kappa.checked_pow(s))
        .ok_or(Error::TooManySites { sites, max: 63 })
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// A materialized κ^N × κ^N operator.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    sites: usize,
    kappa: usize,
    matrix: Mat<c64>,
}

impl DenseOperator {
    pub fn from_mat(sites: usize, kappa: usize, matrix: Mat<c64>) -> Result<Self> {
        let dim = checked_pow(kappa, sites)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { sites, kappa, matrix })
    }

    pub fn zeros(sites: usize, kappa: usize) -> Result<Self> {
        let dim = checked_pow(kappa, sites)?;
        Ok(Self { sites, kappa, matrix: Mat::zeros(dim, dim) })
    }

    pub fn identity(sites: usize, kappa: usize) -> Result<Self> {
        let dim = checked_pow(kappa, sites)?;
        Ok(Self { sites, kappa, matrix: Mat::identity(dim, dim) })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.matrix[(row, col)]
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() })
        }
    }

    fn with_matrix(&self, matrix: Mat<c64>) -> Self {
        Self { sites: self.sites, kappa: self.kappa, matrix }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_matrix(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_matrix(&self.matrix - &other.matrix))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_matrix(&self.matrix * &other.matrix))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn scale(&self, factor: c64) -> Self {
        let n = self.dim();
        self.with_matrix(Mat::from_fn(n, n, |i, j| self.matrix[(i, j)] * factor))
    }

    pub fn adjoint(&self) -> Self {
        self.with_matrix(self.matrix.adjoint().to_owned())
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.matrix[(i, j)].norm());
            }
        }
        m
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        for j in 0..n {
            for i in 0..=j {
                if (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// `I^k ⊗ A`.
    pub fn pad_left(&self, k: usize) -> Result<Self> {
        let id = Mat::<c64>::identity(checked_pow(self.kappa, k)?, checked_pow(self.kappa, k)?);
        Ok(Self { sites: self.sites + k, kappa: self.kappa, matrix: kron(&id, &self.matrix) })
    }

    /// `A ⊗ I^k`.
    pub fn pad_right(&self, k: usize) -> Result<Self> {
        let id = Mat::<c64>::identity(checked_pow(self.kappa, k)?, checked_pow(self.kappa, k)?);
        Ok(Self { sites: self.sites + k, kappa: self.kappa, matrix: kron(&self.matrix, &id) })
    }

    /// `A v`.
    pub fn apply(&self, v: &[c64]) -> Result<Vec<c64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let n = self.dim();
        let mut out = vec![ZERO; n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == ZERO {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.matrix[(i, j)] * vj;
            }
        }
        Ok(out)
    }
}

/// Tensor product of local matrices at the given 1-based positions, identity elsewhere.
pub fn kron_place(locals: &[(usize, SiteMatrix)], sites: usize) -> Result<DenseOperator> {
    let kappa = locals.first().map(|(_, m)| m.dim()).unwrap_or(2);
    kron_place_kappa(locals, sites, kappa)
}

/// As [`kron_place`], with κ given explicitly (needed when `locals` is empty).
pub fn kron_place_kappa(locals: &[(usize, SiteMatrix)], sites: usize, kappa: usize) -> Result<DenseOperator> {
    let mut slots: Vec<Option<&SiteMatrix>> = vec![None; sites];
    for (pos, m) in locals {
        if *pos == 0 || *pos > sites {
            return Err(Error::PositionOutOfRange { position: *pos, sites });
        }
        if m.dim() != kappa {
            return Err(Error::DimensionMismatch { expected: kappa, got: m.dim() });
        }
        if slots[pos - 1].replace(m).is_some() {
            return Err(Error::OverlappingPositions(*pos));
        }
    }
    checked_pow(kappa, sites)?;
    let id = Mat::<c64>::identity(kappa, kappa);
    let mut out = Mat::<c64>::identity(1, 1);
    for slot in slots {
        out = kron(&out, slot.map(|m| m.as_mat()).unwrap_or(&id));
    }
    DenseOperator::from_mat(sites, kappa, out)
}

/// Index permutation realizing γ_N: `(r_1, …, r_N) ↦ (r_N, r_1, …, r_{N-1})`.
fn shift_permutation(kappa: usize, dim: usize) -> Vec<usize> {
    let top = dim / kappa;
    (0..dim).map(|r| r / kappa + (r % kappa) * top).collect()
}

/// The cyclic left shift γ_N, `a_1 ⊗ … ⊗ a_N ↦ a_2 ⊗ … ⊗ a_N ⊗ a_1`.
pub fn gamma_shift(a: &DenseOperator) -> DenseOperator {
    let n = a.dim();
    let perm = shift_permutation(a.kappa, n);
    a.with_matrix(Mat::from_fn(n, n, |i, j| a.matrix[(perm[i], perm[j])]))
}

/// γ̄_N = (1/N) Σ_j γ_N^j.
pub fn gamma_average(a: &DenseOperator) -> DenseOperator {
    let n = a.dim();
    if a.sites == 0 {
        return a.clone();
    }
    let step = shift_permutation(a.kappa, n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut acc = Mat::<c64>::zeros(n, n);
    let w = 1.0 / a.sites as f64;
    for _ in 0..a.sites {
        for j in 0..n {
            let pj = perm[j];
            for i in 0..n {
                acc[(i, j)] += a.matrix[(perm[i], pj)] * w;
            }
        }
        perm = perm.iter().map(|&p| step[p]).collect();
    }
    a.with_matrix(acc)
}

/// `γ̄^M_N a_M = γ̄_N(I^{N−M} ⊗ a_M)`, zero for N < M.
pub fn gamma_embed(a: &LocalTensor, sites: usize, basis: &SiteBasis) -> Result<DenseOperator> {
    let m = a.degree();
    if sites < m {
        return DenseOperator::zeros(sites, basis.kappa());
    }
    let local = a.to_dense(basis)?;
    Ok(gamma_average(&local.pad_left(sites - m)?))
}

/// `γ̄^N_{N′}(A) = γ̄_{N′}(I^{N′−N} ⊗ A)`.
pub fn embed_average(a: &DenseOperator, target_sites: usize) -> Result<DenseOperator> {
    if target_sites < a.sites {
        return Err(Error::ShrinkingEmbedding { source_sites: a.sites, target: target_sites });
    }
    Ok(gamma_average(&a.pad_left(target_sites - a.sites)?))
}

/// One term of an [`ImplicitOperator`]: a coefficient times a product of local
/// matrices at strictly increasing positions.
#[derive(Clone, Debug)]
pub struct ImplicitTerm {
    pub coeff: c64,
    pub placements: Vec<(usize, SiteMatrix)>,
}

/// A sum of placed local terms, applied without materializing the κ^N matrix.
#[derive(Clone, Debug)]
pub struct ImplicitOperator {
    sites: usize,
    kappa: usize,
    terms: Vec<ImplicitTerm>,
    hermitian: bool,
}

impl ImplicitOperator {
    pub fn new(sites: usize, kappa: usize) -> Result<Self> {
        checked_pow(kappa, sites)?;
        Ok(Self { sites, kappa, terms: Vec::new(), hermitian: false })
    }

    /// Adds `coeff · ⊗_{(p, m)} m_(p)`; positions are sorted and validated.
    pub fn push_term(&mut self, coeff: c64, mut placements: Vec<(usize, SiteMatrix)>) -> Result<()> {
        placements.sort_by_key(|(p, _)| *p);
        for w in placements.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::OverlappingPositions(w[0].0));
            }
        }
        for (p, m) in &placements {
            if *p == 0 || *p > self.sites {
                return Err(Error::PositionOutOfRange { position: *p, sites: self.sites });
            }
            if m.dim() != self.kappa {
                return Err(Error::DimensionMismatch { expected: self.kappa, got: m.dim() });
            }
        }
        self.hermitian = false;
        self.terms.push(ImplicitTerm { coeff, placements });
        Ok(())
    }

    /// Declares the operator Hermitian, enabling the direct Lanczos path.
    /// Callers are responsible for the claim.
    pub fn with_hermitian(mut self, hermitian: bool) -> Self {
        self.hermitian = hermitian;
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.kappa.pow(self.sites as u32)
    }

    pub fn terms(&self) -> &[ImplicitTerm] {
        &self.terms
    }

    pub fn adjoint(&self) -> Self {
        Self {
            sites: self.sites,
            kappa: self.kappa,
            hermitian: self.hermitian,
            terms: self
                .terms
                .iter()
                .map(|t| ImplicitTerm {
                    coeff: t.coeff.conj(),
                    placements: t.placements.iter().map(|(p, m)| (*p, m.adjoint())).collect(),
                })
                .collect(),
        }
    }

    /// Materializes the operator; intended for small chains and tests.
    pub fn to_dense(&self) -> Result<DenseOperator> {
        let mut acc = DenseOperator::zeros(self.sites, self.kappa)?;
        for t in &self.terms {
            let term = kron_place_kappa(&t.placements, self.sites, self.kappa)?;
            acc = acc.add(&term.scale(t.coeff))?;
        }
        Ok(acc)
    }

    /// `y += A x` using caller-provided scratch of length κ^N.
    pub(crate) fn apply_into(&self, x: &[c64], y: &mut [c64], scratch: &mut Vec<c64>, spare: &mut Vec<c64>) {
        let kappa = self.kappa;
        for t in &self.terms {
            scratch.clear();
            scratch.extend_from_slice(x);
            for (pos, m) in &t.placements {
                apply_local(scratch, spare, m, *pos, self.sites, kappa);
                std::mem::swap(scratch, spare);
            }
            for (yi, si) in y.iter_mut().zip(scratch.iter()) {
                *yi += t.coeff * si;
            }
        }
    }
}

/// Applies `m` on site `pos` of the state `src`, writing into `dst`.
fn apply_local(src: &[c64], dst: &mut Vec<c64>, m: &SiteMatrix, pos: usize, sites: usize, kappa: usize) {
    let n = src.len();
    dst.clear();
    dst.resize(n, ZERO);
    let stride = kappa.pow((sites - pos) as u32);
    let block = stride * kappa;
    let entries: Vec<(usize, usize, c64)> = (0..kappa)
        .flat_map(|r| (0..kappa).map(move |c| (r, c)))
        .map(|(r, c)| (r, c, m.get(r, c)))
        .filter(|(_, _, v)| *v != ZERO)
        .collect();
    for base in (0..n).step_by(block) {
        for off in 0..stride {
            let b = base + off;
            for &(r, c, v) in &entries {
                dst[b + r * stride] += v * src[b + c * stride];
            }
        }
    }
}

/// `A v` computed term by term.
pub fn matvec(a: &ImplicitOperator, v: &[c64]) -> Result<Vec<c64>> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: v.len() });
    }
    let mut out = vec![ZERO; v.len()];
    let (mut s1, mut s2) = (Vec::with_capacity(v.len()), Vec::with_capacity(v.len()));
    a.apply_into(v, &mut out, &mut s1, &mut s2);
    Ok(out)
}

/// A product state described by a leading block followed by repetitions of a period.
#[derive(Clone, Debug)]
pub struct ProductStateSpec {
    pub prefix: Vec<SiteState>,
    pub period: Vec<SiteState>,
}

impl ProductStateSpec {
    /// `τ^r ⊗ (block)^q` with `N = r + q·|block|`, `r < |block|`.
    pub fn trace_padded(sites: usize, block: Vec<SiteState>) -> Result<Self> {
        let kappa = block.first().map(SiteState::kappa).ok_or_else(|| Error::InvalidState("empty period".into()))?;
        let r = sites % block.len();
        Ok(Self { prefix: vec![SiteState::maximally_mixed(kappa); r], period: block })
    }

    /// The site states for an N-site chain.
    pub fn expand(&self, sites: usize) -> Result<Vec<&SiteState>> {
        let mismatch = || Error::DimensionMismatch { expected: sites, got: self.prefix.len() };
        let rest = sites.checked_sub(self.prefix.len()).ok_or_else(mismatch)?;
        if self.period.is_empty() {
            return if rest == 0 { Ok(self.prefix.iter().collect()) } else { Err(mismatch()) };
        }
        if rest % self.period.len() != 0 {
            return Err(Error::DimensionMismatch {
                expected: sites,
                got: self.prefix.len() + (rest / self.period.len()) * self.period.len(),
            });
        }
        Ok(self.prefix.iter().chain(self.period.iter().cycle().take(rest)).collect())
    }

    /// Dense density matrix of the expanded state; small chains only.
    pub fn density(&self, sites: usize) -> Result<DenseOperator> {
        let states = self.expand(sites)?;
        let kappa = states.first().map(|s| s.kappa()).unwrap_or(2);
        let mut out = Mat::<c64>::identity(1, 1);
        for s in &states {
            out = kron(&out, s.density().as_mat());
        }
        DenseOperator::from_mat(sites, kappa, out)
    }
}

/// ω(A) for a product state ω, in O(terms · N) single-site traces.
pub fn evaluate_state(spec: &ProductStateSpec, a: &ImplicitOperator) -> Result<c64> {
    let states = spec.expand(a.sites())?;
    if let Some(s) = states.iter().find(|s| s.kappa() != a.kappa()) {
        return Err(Error::DimensionMismatch { expected: a.kappa(), got: s.kappa() });
    }
    Ok(a
        .terms()
        .iter()
        .map(|t| t.placements.iter().fold(t.coeff, |acc, (p, m)| acc * states[p - 1].expectation(m)))
        .sum())
}

/// `tr(ρ A)` with dense matrices; oracle for [`evaluate_state`].
pub fn evaluate_state_dense(spec: &ProductStateSpec, a: &DenseOperator) -> Result<c64> {
    let rho = spec.density(a.sites())?;
    let prod = rho.mul(a)?;
    Ok((0..prod.dim()).map(|i| prod.get(i, i)).sum::<c64>())
}
