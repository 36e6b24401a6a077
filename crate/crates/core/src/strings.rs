//! Sparse sums of basis strings `e_{k_1} ⊗ … ⊗ e_{k_N}` on an N-site chain.
//!
//! A string is packed into a `u128` with four bits per site; site `i` sits at
//! bit offset `4(N − i)`, so the identity string is `0` and left padding with
//! identities leaves the key unchanged. Terms live in a `BTreeMap`, which keeps
//! iteration order (and hence floating-point summation order) deterministic.

use std::collections::BTreeMap;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::site::{SiteBasis, MAX_KAPPA};
use crate::symbolic::LocalTensor;
use crate::tensor_ops::{checked_pow, DenseOperator, ImplicitOperator};
use crate::tolerance;

pub type PackedString = u128;

/// Sites representable in a packed key.
pub const MAX_SITES: usize = 32;

const NIBBLE: u32 = 4;
const ONES: u128 = u128::MAX / 15;
const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// Marks every nonzero nibble of `x` with `0xF`.
fn nonzero_mask(x: u128) -> u128 {
    let t = (x | (x >> 1) | (x >> 2) | (x >> 3)) & ONES;
    t * 0xF
}

fn site_mask(sites: usize) -> u128 {
    if sites >= MAX_SITES {
        u128::MAX
    } else {
        (1u128 << (NIBBLE as usize * sites)) - 1
    }
}

/// Packs a multi-index; the last index lands in the lowest nibble.
pub fn pack(indices: &[u8]) -> PackedString {
    indices.iter().fold(0u128, |acc, &k| (acc << NIBBLE) | k as u128)
}

/// Unpacks a key into `sites` indices, site 1 first.
pub fn unpack(key: PackedString, sites: usize) -> Vec<u8> {
    (1..=sites).map(|i| digit(key, i, sites)).collect()
}

/// Basis index at 1-based `site`.
pub fn digit(key: PackedString, site: usize, sites: usize) -> u8 {
    ((key >> (NIBBLE as usize * (sites - site))) & 0xF) as u8
}

/// Number of non-identity sites.
pub fn weight(key: PackedString) -> u32 {
    (nonzero_mask(key) & ONES).count_ones()
}

/// γ_N on a single key: site 1 moves to site N.
pub fn rotate(key: PackedString, sites: usize) -> PackedString {
    if sites <= 1 {
        return key;
    }
    let top = NIBBLE as usize * (sites - 1);
    ((key << NIBBLE) & site_mask(sites)) | (key >> top)
}

/// Product of two keys with coefficient, accumulated into `out`.
fn mul_keys(x: PackedString, y: PackedString, coeff: c64, basis: &SiteBasis, out: &mut BTreeMap<u128, c64>) {
    let overlap = nonzero_mask(x) & nonzero_mask(y);
    let base = (x | y) & !overlap;
    if overlap == 0 {
        *out.entry(base).or_insert(ZERO) += coeff;
        return;
    }
    let mut partial: Vec<(u128, c64)> = vec![(base, coeff)];
    let mut rest = overlap;
    while rest != 0 {
        let shift = rest.trailing_zeros() / NIBBLE * NIBBLE;
        rest &= !(0xFu128 << shift);
        let a = ((x >> shift) & 0xF) as usize;
        let b = ((y >> shift) & 0xF) as usize;
        let table = basis.product(a, b);
        if table.len() == 1 {
            let (d, v) = table[0];
            for p in partial.iter_mut() {
                p.0 |= (d as u128) << shift;
                p.1 *= v;
            }
        } else {
            let mut next = Vec::with_capacity(partial.len() * table.len());
            for &(k, c) in &partial {
                for &(d, v) in table {
                    next.push((k | ((d as u128) << shift), c * v));
                }
            }
            partial = next;
        }
    }
    for (k, c) in partial {
        *out.entry(k).or_insert(ZERO) += c;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StringOperator {
    sites: usize,
    terms: BTreeMap<PackedString, c64>,
}

impl StringOperator {
    pub fn zero(sites: usize) -> Result<Self> {
        if sites > MAX_SITES {
            return Err(Error::TooManySites { sites, max: MAX_SITES });
        }
        Ok(Self { sites, terms: BTreeMap::new() })
    }

    pub fn identity(sites: usize) -> Result<Self> {
        let mut out = Self::zero(sites)?;
        out.terms.insert(0, c64::new(1.0, 0.0));
        Ok(out)
    }

    /// The tensor `a` on its own `a.degree()` sites.
    pub fn from_local(a: &LocalTensor) -> Result<Self> {
        Self::placed(a, 0, a.degree())
    }

    /// `I^{offset} ⊗ a ⊗ I^{sites − offset − M}`.
    pub fn placed(a: &LocalTensor, offset: usize, sites: usize) -> Result<Self> {
        let m = a.degree();
        if offset + m > sites {
            return Err(Error::PositionOutOfRange { position: offset + m, sites });
        }
        let mut out = Self::zero(sites)?;
        let shift = NIBBLE as usize * (sites - offset - m);
        for (idx, &c) in a.terms() {
            if idx.iter().any(|&k| k as usize >= MAX_KAPPA * MAX_KAPPA) {
                return Err(Error::BasisIndexOutOfRange { index: 16, kappa: MAX_KAPPA });
            }
            out.add_term(pack(idx) << shift, c);
        }
        Ok(out)
    }

    /// `γ̄^M_N a` as a string operator; zero when N < M.
    pub fn gamma_embed(a: &LocalTensor, sites: usize) -> Result<Self> {
        if sites < a.degree() {
            return Self::zero(sites);
        }
        Ok(Self::placed(a, sites - a.degree(), sites)?.gamma_average())
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PackedString, c64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coeff(&self, key: PackedString) -> c64 {
        self.terms.get(&key).copied().unwrap_or(ZERO)
    }

    pub fn add_term(&mut self, key: PackedString, coeff: c64) {
        *self.terms.entry(key).or_insert(ZERO) += coeff;
    }

    fn check_sites(&self, other: &Self) -> Result<()> {
        if self.sites == other.sites {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.sites, got: other.sites })
        }
    }

    /// `self += factor · other`.
    pub fn axpy(&mut self, factor: c64, other: &Self) -> Result<()> {
        self.check_sites(other)?;
        for (&k, &c) in &other.terms {
            self.add_term(k, factor * c);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(c64::new(1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(c64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn scale(&self, factor: c64) -> Self {
        Self { sites: self.sites, terms: self.terms.iter().map(|(&k, &c)| (k, c * factor)).collect() }
    }

    pub fn mul(&self, other: &Self, basis: &SiteBasis) -> Result<Self> {
        self.check_sites(other)?;
        let mut terms = BTreeMap::new();
        for (&x, &cx) in &self.terms {
            for (&y, &cy) in &other.terms {
                mul_keys(x, y, cx * cy, basis, &mut terms);
            }
        }
        let mut out = Self { sites: self.sites, terms };
        out.prune(tolerance::PRUNE);
        Ok(out)
    }

    /// `[self, other]`; products of disjointly supported strings cancel exactly.
    pub fn commutator(&self, other: &Self, basis: &SiteBasis) -> Result<Self> {
        self.check_sites(other)?;
        let mut terms = BTreeMap::new();
        for (&x, &cx) in &self.terms {
            for (&y, &cy) in &other.terms {
                if nonzero_mask(x) & nonzero_mask(y) == 0 {
                    continue;
                }
                mul_keys(x, y, cx * cy, basis, &mut terms);
                mul_keys(y, x, -(cx * cy), basis, &mut terms);
            }
        }
        let mut out = Self { sites: self.sites, terms };
        out.prune(tolerance::PRUNE);
        Ok(out)
    }

    /// Adjoint; the basis is Hermitian so only coefficients are conjugated.
    pub fn adjoint(&self) -> Self {
        Self { sites: self.sites, terms: self.terms.iter().map(|(&k, &c)| (k, c.conj())).collect() }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn shift(&self) -> Self {
        Self { sites: self.sites, terms: self.terms.iter().map(|(&k, &c)| (rotate(k, self.sites), c)).collect() }
    }

    /// γ̄_N.
    pub fn gamma_average(&self) -> Self {
        if self.sites == 0 {
            return self.clone();
        }
        let w = 1.0 / self.sites as f64;
        let mut terms = BTreeMap::new();
        for (&k, &c) in &self.terms {
            let mut key = k;
            for _ in 0..self.sites {
                *terms.entry(key).or_insert(ZERO) += c * w;
                key = rotate(key, self.sites);
            }
        }
        let mut out = Self { sites: self.sites, terms };
        out.prune(tolerance::PRUNE);
        out
    }

    /// `I^k ⊗ self`.
    pub fn pad_left(&self, k: usize) -> Result<Self> {
        let mut out = Self::zero(self.sites + k)?;
        out.terms = self.terms.clone();
        Ok(out)
    }

    /// `self ⊗ I^k`.
    pub fn pad_right(&self, k: usize) -> Result<Self> {
        let mut out = Self::zero(self.sites + k)?;
        out.terms = self.terms.iter().map(|(&key, &c)| (key << (NIBBLE as usize * k), c)).collect();
        Ok(out)
    }

    /// Drops coefficients with modulus at or below `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient moduli; an upper bound on the operator norm for κ = 2.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Largest coefficient difference between two operators on the same chain.
    pub fn max_coeff_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs_coeff())
    }

    /// The operator as a tensor of degree N.
    pub fn to_local_tensor(&self) -> LocalTensor {
        let mut out = LocalTensor::zero(self.sites);
        for (&k, &c) in &self.terms {
            out.add_term(unpack(k, self.sites), c);
        }
        out
    }

    /// Dense κ^N × κ^N matrix. Every basis element has at most one nonzero
    /// entry per row, so each string contributes one entry per row.
    pub fn to_dense(&self, basis: &SiteBasis) -> Result<DenseOperator> {
        let kappa = basis.kappa();
        let dim = checked_pow(kappa, self.sites)?;
        if dim > tolerance::DENSE_LIMIT {
            return Err(Error::DenseLimit { dim, limit: tolerance::DENSE_LIMIT });
        }
        let row_entries: Vec<Vec<Option<(usize, c64)>>> = basis
            .elements()
            .iter()
            .map(|e| {
                (0..kappa)
                    .map(|r| {
                        let mut nz = (0..kappa).filter(|&c| e.get(r, c) != ZERO);
                        let c = nz.next();
                        debug_assert!(nz.next().is_none());
                        c.map(|c| (c, e.get(r, c)))
                    })
                    .collect()
            })
            .collect();
        let mut mat = Mat::<c64>::zeros(dim, dim);
        let mut digits = vec![0usize; self.sites];
        for (&key, &coeff) in &self.terms {
            for (i, d) in digits.iter_mut().enumerate() {
                *d = digit(key, i + 1, self.sites) as usize;
                if *d >= basis.len() {
                    return Err(Error::BasisIndexOutOfRange { index: *d, kappa });
                }
            }
            'rows: for r in 0..dim {
                let mut col = 0usize;
                let mut val = coeff;
                let mut place = dim;
                for &k in &digits {
                    place /= kappa;
                    let rd = (r / place) % kappa;
                    match row_entries[k][rd] {
                        Some((cd, v)) => {
                            col = col * kappa + cd;
                            val *= v;
                        }
                        None => continue 'rows,
                    }
                }
                mat[(r, col)] += val;
            }
        }
        DenseOperator::from_mat(self.sites, kappa, mat)
    }

    /// Matrix-free form; flagged Hermitian when every coefficient is real.
    pub fn to_implicit(&self, basis: &SiteBasis) -> Result<ImplicitOperator> {
        let mut op = ImplicitOperator::new(self.sites, basis.kappa())?;
        for (&key, &coeff) in &self.terms {
            let mut placements = Vec::new();
            for site in 1..=self.sites {
                let k = digit(key, site, self.sites) as usize;
                if k != 0 {
                    basis.check_index(k)?;
                    placements.push((site, basis.element(k).clone()));
                }
            }
            op.push_term(coeff, placements)?;
        }
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        Ok(op.with_hermitian(self.is_hermitian(1e-15 * scale)))
    }
}
