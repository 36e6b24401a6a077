use faer::c64;

use crate::error::{Error, Result};
use crate::site::SiteBasis;
use crate::symbolic::tensor::LocalTensor;
use crate::tolerance;

/// `a = Σ_j I^{M−j} ⊗ a′_j` with each `a′_j` irreducible of degree j.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalDecomposition {
    components: Vec<LocalTensor>,
}

impl CanonicalDecomposition {
    /// Component of degree `j`; zero beyond the original degree.
    pub fn component(&self, j: usize) -> LocalTensor {
        self.components.get(j).cloned().unwrap_or_else(|| LocalTensor::zero(j))
    }

    pub fn components(&self) -> &[LocalTensor] {
        &self.components
    }

    pub fn max_degree(&self) -> usize {
        self.components.len() - 1
    }

    /// Degrees with a nonzero component.
    pub fn nonzero_degrees(&self) -> Vec<usize> {
        (0..self.components.len()).filter(|&j| !self.components[j].is_empty()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(LocalTensor::is_empty)
    }
}

/// No term starts or ends with the identity. Degree-0 tensors are irreducible.
pub fn is_irreducible(a: &LocalTensor) -> bool {
    a.degree() == 0
        || a.terms().iter().all(|(idx, c)| {
            c.norm() <= tolerance::PRUNE || (idx[0] != 0 && idx[idx.len() - 1] != 0)
        })
}

/// Irreducibility via the partial traces `(τ ⊗ id)(a) = 0` and `(id ⊗ τ)(a) = 0`,
/// computed on dense matrices.
pub fn is_irreducible_dense(a: &LocalTensor, basis: &SiteBasis) -> Result<bool> {
    if a.degree() == 0 {
        return Ok(true);
    }
    let dense = a.to_dense(basis)?;
    let kappa = basis.kappa();
    let n = dense.dim();
    let s = n / kappa;
    let scale = dense.max_abs().max(1.0);
    let mut first = 0.0f64;
    let mut last = 0.0f64;
    for i in 0..s {
        for j in 0..s {
            let mut acc_first = c64::new(0.0, 0.0);
            for r in 0..kappa {
                acc_first += dense.get(r * s + i, r * s + j);
            }
            first = first.max(acc_first.norm());
            let mut acc_last = c64::new(0.0, 0.0);
            for r in 0..kappa {
                acc_last += dense.get(i * kappa + r, j * kappa + r);
            }
            last = last.max(acc_last.norm());
        }
    }
    Ok(first <= tolerance::EXACT * scale && last <= tolerance::EXACT * scale)
}

/// Splits `a ∈ B^M` into its irreducible components by trimming identity
/// padding from both ends of each basis string.
pub fn decompose(a: &LocalTensor) -> CanonicalDecomposition {
    let m = a.degree();
    let mut components: Vec<LocalTensor> = (0..=m).map(LocalTensor::zero).collect();
    for (idx, &c) in a.terms() {
        match idx.iter().position(|&k| k != 0) {
            None => components[0].add_term(Vec::new(), c),
            Some(p) => {
                let q = idx.iter().rposition(|&k| k != 0).unwrap_or(p);
                components[q - p + 1].add_term(idx[p..=q].to_vec(), c);
            }
        }
    }
    for comp in &mut components {
        comp.prune(tolerance::PRUNE);
    }
    CanonicalDecomposition { components }
}

/// `Σ_j I^{M−j} ⊗ a′_j` on M sites.
pub fn recompose(d: &CanonicalDecomposition, degree: usize) -> Result<LocalTensor> {
    let highest = d.components.iter().rposition(|c| !c.is_empty()).unwrap_or(0);
    if highest > degree {
        return Err(Error::RecomposeDegree { requested: degree, max_degree: highest });
    }
    let mut out = LocalTensor::zero(degree);
    for comp in d.components.iter().take(degree + 1) {
        out = out.add(&comp.pad_left(degree - comp.degree()))?;
    }
    Ok(out)
}

/// An irreducible tensor of degree ≥ 1.
#[derive(Clone, Debug, PartialEq)]
pub struct IrreducibleTensor(LocalTensor);

impl IrreducibleTensor {
    pub fn new(a: LocalTensor) -> Result<Self> {
        if a.degree() == 0 || !is_irreducible(&a) {
            return Err(Error::NotIrreducible);
        }
        Ok(Self(a))
    }

    pub fn tensor(&self) -> &LocalTensor {
        &self.0
    }

    pub fn into_inner(self) -> LocalTensor {
        self.0
    }

    pub fn degree(&self) -> usize {
        self.0.degree()
    }
}

impl TryFrom<LocalTensor> for IrreducibleTensor {
    type Error = Error;

    fn try_from(a: LocalTensor) -> Result<Self> {
        Self::new(a)
    }
}
