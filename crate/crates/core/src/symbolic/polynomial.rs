//! Polynomials in γ-classes.
//!
//! Every generator is expanded into irreducible basis monomials, so a word is a
//! sorted multiset of monomial factors and the class product is multiset union.
//! Equal classes then have identical normal forms, e.g. `[σ1 + σ3] = [σ1] + [σ3]`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use faer::c64;

use crate::error::{Error, Result};
use crate::symbolic::decomposition::decompose;
use crate::symbolic::tensor::{LocalTensor, MultiIndex};
use crate::tolerance;

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

fn factor_order(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// A product of γ-classes of irreducible basis monomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GammaWord {
    factors: Vec<MultiIndex>,
}

impl GammaWord {
    /// The empty word, i.e. the unit.
    pub fn unit() -> Self {
        Self { factors: Vec::new() }
    }

    /// Sorts the factors; each must be an irreducible monomial of degree ≥ 1.
    pub fn new(mut factors: Vec<MultiIndex>) -> Result<Self> {
        for f in &factors {
            if f.is_empty() || f[0] == 0 || f[f.len() - 1] == 0 {
                return Err(Error::NotIrreducible);
            }
        }
        factors.sort_by(factor_order);
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[MultiIndex] {
        &self.factors
    }

    /// Number of factors ℓ.
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// `|M| = M_1 + … + M_ℓ`.
    pub fn total_degree(&self) -> usize {
        self.factors.iter().map(Vec::len).sum()
    }

    pub fn factor_tensor(&self, i: usize) -> LocalTensor {
        LocalTensor::monomial(self.factors[i].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        factors.sort_by(factor_order);
        Self { factors }
    }

    /// The word with factor `i` removed.
    pub fn without(&self, i: usize) -> Self {
        let mut factors = self.factors.clone();
        factors.remove(i);
        Self { factors }
    }
}

impl Ord for GammaWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.factors.len().cmp(&other.factors.len()).then_with(|| {
            self.factors
                .iter()
                .zip(&other.factors)
                .map(|(a, b)| factor_order(a, b))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

impl PartialOrd for GammaWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A scalar plus a finite linear combination of words.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GammaPolynomial {
    scalar: c64,
    terms: BTreeMap<GammaWord, c64>,
}

impl GammaPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit() -> Self {
        Self::constant(c64::new(1.0, 0.0))
    }

    pub fn constant(c: c64) -> Self {
        Self { scalar: c, terms: BTreeMap::new() }
    }

    pub fn from_word(word: GammaWord, coeff: c64) -> Self {
        let mut out = Self::zero();
        out.add_word(word, coeff);
        out
    }

    /// The class `[γ̄^M a]` of a single tensor, split into monomial generators.
    pub fn from_tensor(a: &LocalTensor) -> Self {
        let d = decompose(a);
        let mut out = Self::zero();
        for comp in d.components() {
            for (idx, &c) in comp.terms() {
                if idx.is_empty() {
                    out.scalar += c;
                } else {
                    out.add_word(GammaWord { factors: vec![idx.clone()] }, c);
                }
            }
        }
        out.prune(tolerance::PRUNE);
        out
    }

    /// Product of the classes of `factors`, each expanded into generators.
    pub fn product_of(factors: &[LocalTensor]) -> Self {
        factors.iter().fold(Self::unit(), |acc, f| acc.mul(&Self::from_tensor(f)))
    }

    pub fn scalar(&self) -> c64 {
        self.scalar
    }

    pub fn terms(&self) -> &BTreeMap<GammaWord, c64> {
        &self.terms
    }

    pub fn coeff(&self, word: &GammaWord) -> c64 {
        if word.is_empty() {
            self.scalar
        } else {
            self.terms.get(word).copied().unwrap_or(ZERO)
        }
    }

    pub fn add_word(&mut self, word: GammaWord, coeff: c64) {
        if word.is_empty() {
            self.scalar += coeff;
        } else {
            *self.terms.entry(word).or_insert(ZERO) += coeff;
        }
    }

    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
        if self.scalar.norm() <= tol {
            self.scalar = ZERO;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.scalar += other.scalar;
        for (w, &c) in &other.terms {
            out.add_word(w.clone(), c);
        }
        out.prune(tolerance::PRUNE);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(c64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: c64) -> Self {
        let mut out = Self {
            scalar: self.scalar * factor,
            terms: self.terms.iter().map(|(w, &c)| (w.clone(), c * factor)).collect(),
        };
        out.prune(0.0);
        out
    }

    /// The commutative class product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::constant(self.scalar * other.scalar);
        for (w, &c) in &other.terms {
            out.add_word(w.clone(), self.scalar * c);
        }
        for (w, &c) in &self.terms {
            out.add_word(w.clone(), c * other.scalar);
            for (v, &d) in &other.terms {
                out.add_word(w.mul(v), c * d);
            }
        }
        out.prune(tolerance::PRUNE);
        out
    }

    /// Adjoint; monomial generators are self-adjoint.
    pub fn adjoint(&self) -> Self {
        Self { scalar: self.scalar.conj(), terms: self.terms.iter().map(|(w, &c)| (w.clone(), c.conj())).collect() }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.scalar.im.abs() <= tol && self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// True when the normal form has no surviving coefficient.
    pub fn is_zero_symbolic(&self) -> bool {
        self.scalar.norm() <= tolerance::PRUNE && self.terms.values().all(|c| c.norm() <= tolerance::PRUNE)
    }

    /// Largest ℓ over the words.
    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(GammaWord::len).max().unwrap_or(0)
    }

    /// Largest `|M|` over the words.
    pub fn max_total_degree(&self) -> usize {
        self.terms.keys().map(GammaWord::total_degree).max().unwrap_or(0)
    }

    /// `|scalar| + Σ |c_w|`.
    pub fn l1_norm(&self) -> f64 {
        self.scalar.norm() + self.terms.values().map(|c| c.norm()).sum::<f64>()
    }

    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let d = self.sub(other);
        d.terms.values().map(|c| c.norm()).fold(d.scalar.norm(), f64::max)
    }
}

/// A word from scalar or single-generator factors, with the accumulated coefficient.
pub fn word_make(factors: &[LocalTensor]) -> Result<(GammaWord, c64)> {
    let mut coeff = c64::new(1.0, 0.0);
    let mut monomials = Vec::new();
    for (index, f) in factors.iter().enumerate() {
        let d = decompose(f);
        let nonzero = d.nonzero_degrees();
        match nonzero.as_slice() {
            [] => return Ok((GammaWord::unit(), ZERO)),
            [0] => coeff *= d.component(0).coeff(&[]),
            [j] => {
                let comp = d.component(*j);
                if comp.len() != 1 {
                    return Err(Error::CompositeFactor { index, components: comp.len() });
                }
                let (idx, &c) = comp.terms().iter().next().expect("one term");
                coeff *= c;
                monomials.push(idx.clone());
            }
            _ => return Err(Error::CompositeFactor { index, components: nonzero.len() }),
        }
    }
    Ok((GammaWord::new(monomials)?, coeff))
}
