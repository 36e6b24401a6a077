//! Hamiltonian builders: Heisenberg chain, translation-invariant local
//! interactions (both with periodic boundary) and the Curie-Weiss model.
//!
//! Spin operators are `σ_p = 2 e_p`, the Pauli matrices for κ = 2 and the
//! generalized Gell-Mann matrices otherwise.

use faer::c64;

use crate::error::{Error, Result};
use crate::site::build_basis;
use crate::strings::{pack, StringOperator};
use crate::symbolic::{GammaPolynomial, LocalTensor};
use crate::tensor_ops::DenseOperator;
use crate::tolerance;

/// Range ℓ, symmetric coupling `J^{pq}` and field `h^p`, indices over the κ²−1 spin operators.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalInteractionSpec {
    range: usize,
    coupling: Vec<Vec<f64>>,
    field: Vec<f64>,
    kappa: usize,
}

impl LocalInteractionSpec {
    pub fn new(range: usize, coupling: Vec<Vec<f64>>, field: Vec<f64>) -> Result<Self> {
        if range == 0 {
            return Err(Error::InvalidInput("interaction range must be at least 1".into()));
        }
        let d = field.len();
        let kappa = (2..=crate::site::MAX_KAPPA)
            .find(|k| k * k - 1 == d)
            .ok_or_else(|| Error::InvalidInput(format!("field length {d} is not κ²−1 for a supported κ")))?;
        if coupling.len() != d || coupling.iter().any(|row| row.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: coupling.len() });
        }
        #[allow(clippy::needless_range_loop)]
        for p in 0..d {
            for q in 0..d {
                let (a, b) = (coupling[p][q], coupling[q][p]);
                if !a.is_finite() || (a - b).abs() > tolerance::EXACT * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidInput("coupling must be a finite symmetric matrix".into()));
                }
            }
        }
        if field.iter().any(|h| !h.is_finite()) {
            return Err(Error::InvalidInput("field must be finite".into()));
        }
        Ok(Self { range, coupling, field, kappa })
    }

    /// Isotropic coupling `J δ^{pq}` with field `h`.
    pub fn isotropic(range: usize, kappa: usize, j: f64, field: Vec<f64>) -> Result<Self> {
        let d = kappa * kappa - 1;
        let coupling = (0..d).map(|p| (0..d).map(|q| if p == q { j } else { 0.0 }).collect()).collect();
        Self::new(range, coupling, field)
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn coupling(&self) -> &[Vec<f64>] {
        &self.coupling
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// The same interaction with `J` and `h` negated.
    pub fn negated(&self) -> Self {
        Self {
            range: self.range,
            coupling: self.coupling.iter().map(|r| r.iter().map(|v| -v).collect()).collect(),
            field: self.field.iter().map(|v| -v).collect(),
            kappa: self.kappa,
        }
    }

    fn pair_tensor(&self, gap: usize) -> LocalTensor {
        let mut t = LocalTensor::zero(gap + 2);
        for (p, row) in self.coupling.iter().enumerate() {
            for (q, &j) in row.iter().enumerate() {
                if j != 0.0 {
                    let mut idx = vec![0u8; gap + 2];
                    idx[0] = p as u8 + 1;
                    idx[gap + 1] = q as u8 + 1;
                    t.add_term(idx, c64::new(4.0 * j, 0.0));
                }
            }
        }
        t
    }

    fn field_tensor(&self) -> LocalTensor {
        let mut t = LocalTensor::zero(1);
        for (p, &h) in self.field.iter().enumerate() {
            if h != 0.0 {
                t.add_term(vec![p as u8 + 1], c64::new(2.0 * h, 0.0));
            }
        }
        t
    }
}

fn site_term(sites: usize, site: usize, k: u8) -> u128 {
    let mut idx = vec![0u8; sites];
    idx[site] = k;
    pack(&idx)
}

fn pair_term(sites: usize, i: usize, j: usize, p: u8, q: u8) -> u128 {
    let mut idx = vec![0u8; sites];
    idx[i] = p;
    idx[j] = q;
    pack(&idx)
}

/// `Σ_i Σ_{d=1..ℓ} J^{pq} σ_p(i) σ_q(i+d) + Σ_i h^p σ_p(i)` with cyclic sites and sign `sign`.
fn chain_strings(spec: &LocalInteractionSpec, sites: usize, sign: f64) -> Result<StringOperator> {
    let mut op = StringOperator::zero(sites)?;
    for i in 0..sites {
        for d in 1..=spec.range {
            let j = (i + d) % sites;
            for (p, row) in spec.coupling.iter().enumerate() {
                for (q, &c) in row.iter().enumerate() {
                    if c != 0.0 {
                        op.add_term(pair_term(sites, i, j, p as u8 + 1, q as u8 + 1), c64::new(4.0 * sign * c, 0.0));
                    }
                }
            }
        }
        for (p, &h) in spec.field.iter().enumerate() {
            if h != 0.0 {
                op.add_term(site_term(sites, i, p as u8 + 1), c64::new(2.0 * sign * h, 0.0));
            }
        }
    }
    op.prune(tolerance::PRUNE);
    Ok(op)
}

/// `H_N = −Σ_i J^{pq} σ_p(i) σ_q(i+1) − Σ_i h^p σ_p(i)` with the wraparound bond (N, 1).
pub fn heisenberg_strings(spec: &LocalInteractionSpec, sites: usize) -> Result<StringOperator> {
    if spec.range != 1 {
        return Err(Error::InvalidInput("the Heisenberg chain has range 1".into()));
    }
    if sites < 2 {
        return Err(Error::ChainTooShort { sites, min: 2 });
    }
    chain_strings(spec, sites, -1.0)
}

pub fn heisenberg_matrix(spec: &LocalInteractionSpec, sites: usize) -> Result<DenseOperator> {
    heisenberg_strings(spec, sites)?.to_dense(&build_basis(spec.kappa)?)
}

/// Symbol whose quantization is `H_N / N` exactly:
/// `−γ̄²(Σ J^{pq} σ_p ⊗ σ_q) − γ̄¹(Σ h^p σ_p)`.
pub fn heisenberg_symbol(spec: &LocalInteractionSpec) -> Result<GammaPolynomial> {
    if spec.range != 1 {
        return Err(Error::InvalidInput("the Heisenberg chain has range 1".into()));
    }
    local_interaction_symbol(&spec.negated())
}

/// `H_N = Σ_i Σ_{d=1..ℓ} J^{pq} σ_p(i) σ_q(i+d) + Σ_i h^p σ_p(i)`, cyclic, each bond once.
pub fn local_interaction_strings(spec: &LocalInteractionSpec, sites: usize) -> Result<StringOperator> {
    let min = 2 * spec.range + 2;
    if sites < min {
        return Err(Error::ChainTooShort { sites, min });
    }
    chain_strings(spec, sites, 1.0)
}

pub fn local_interaction_matrix(spec: &LocalInteractionSpec, sites: usize) -> Result<DenseOperator> {
    local_interaction_strings(spec, sites)?.to_dense(&build_basis(spec.kappa)?)
}

/// `Σ_{m<ℓ} γ̄^{2+m}(Σ J^{pq} σ_p ⊗ I^m ⊗ σ_q) + γ̄¹(Σ h^p σ_p)`.
pub fn local_interaction_symbol(spec: &LocalInteractionSpec) -> Result<GammaPolynomial> {
    let mut out = GammaPolynomial::from_tensor(&spec.field_tensor());
    for gap in 0..spec.range {
        out = out.add(&GammaPolynomial::from_tensor(&spec.pair_tensor(gap)));
    }
    Ok(out)
}

/// `H_N = −(J/2N) Σ_{i<j} σ_3(i) σ_3(j) − h Σ_i σ_1(i)`.
pub fn curie_weiss_strings(j: f64, h: f64, sites: usize) -> Result<StringOperator> {
    if sites < 2 {
        return Err(Error::ChainTooShort { sites, min: 2 });
    }
    let mut op = StringOperator::zero(sites)?;
    let pair = c64::new(-4.0 * j / (2.0 * sites as f64), 0.0);
    for a in 0..sites {
        for b in (a + 1)..sites {
            op.add_term(pair_term(sites, a, b, 3, 3), pair);
        }
        op.add_term(site_term(sites, a, 1), c64::new(-2.0 * h, 0.0));
    }
    op.prune(0.0);
    Ok(op)
}

pub fn curie_weiss_matrix(j: f64, h: f64, sites: usize) -> Result<DenseOperator> {
    curie_weiss_strings(j, h, sites)?.to_dense(&build_basis(2)?)
}
