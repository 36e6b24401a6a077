//! The single-site algebra `M_κ(ℂ)`.
//!
//! The basis is the identity followed by the generalized Gell-Mann matrices
//! scaled by one half, so that `tr(e_j e_l) = δ_jl / 2` on the traceless part.
//! For κ = 2 this gives `e_1, e_2, e_3 = σ_x/2, σ_y/2, σ_z/2`.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::tolerance;

/// Largest supported single-site dimension (basis indices must fit in a nibble).
pub const MAX_KAPPA: usize = 4;

/// A κ×κ complex matrix acting on one site.
#[derive(Clone, Debug)]
pub struct SiteMatrix(Mat<c64>);

impl SiteMatrix {
    pub fn zeros(kappa: usize) -> Self {
        Self(Mat::zeros(kappa, kappa))
    }

    pub fn identity(kappa: usize) -> Self {
        Self(Mat::identity(kappa, kappa))
    }

    pub fn from_fn(kappa: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self(Mat::from_fn(kappa, kappa, f))
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged or not square.
    pub fn from_rows(rows: &[&[c64]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "site matrix must be square");
        Self::from_fn(n, |i, j| rows[i][j])
    }

    pub fn from_mat(mat: Mat<c64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), got: mat.ncols() });
        }
        Ok(Self(mat))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.0[(row, col)]
    }

    pub fn as_mat(&self) -> &Mat<c64> {
        &self.0
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.0
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim(), |i, j| self.0[(j, i)].conj())
    }

    pub fn scale(&self, factor: c64) -> Self {
        Self::from_fn(self.dim(), |i, j| self.0[(i, j)] * factor)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.dim(), |i, j| self.0[(i, j)] + other.0[(i, j)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.dim(), |i, j| self.0[(i, j)] - other.0[(i, j)])
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                m = m.max(self.0[(i, j)].norm());
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).max_abs() <= tol
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.0[(i, j)].re.is_finite() && self.0[(i, j)].im.is_finite()))
    }
}

/// Pauli matrices `σ_1, σ_2, σ_3`; index 0 returns the identity.
pub fn pauli(k: usize) -> SiteMatrix {
    let o = c64::new(0.0, 0.0);
    let l = c64::new(1.0, 0.0);
    let i = c64::new(0.0, 1.0);
    match k {
        0 => SiteMatrix::from_rows(&[&[l, o], &[o, l]]),
        1 => SiteMatrix::from_rows(&[&[o, l], &[l, o]]),
        2 => SiteMatrix::from_rows(&[&[o, -i], &[i, o]]),
        3 => SiteMatrix::from_rows(&[&[l, o], &[o, -l]]),
        _ => panic!("Pauli index must be in 0..=3"),
    }
}

/// Identity plus Hermitian traceless basis of `M_κ(ℂ)` with its structure constants.
#[derive(Clone, Debug)]
pub struct SiteBasis {
    kappa: usize,
    elements: Vec<SiteMatrix>,
    norms: Vec<f64>,
    /// `c_{jl}^m` for j, l, m in 1..κ², stored row-major over (j-1, l-1, m-1).
    structure: Vec<f64>,
    /// Sparse expansion of `e_a e_b`, indexed by `a * κ² + b`.
    products: Vec<Vec<(u8, c64)>>,
}

impl SiteBasis {
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// Number of basis elements, κ².
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, k: usize) -> &SiteMatrix {
        &self.elements[k]
    }

    pub fn elements(&self) -> &[SiteMatrix] {
        &self.elements
    }

    /// `tr(e_k e_k)`: κ for the identity, 1/2 otherwise.
    pub fn norm(&self, k: usize) -> f64 {
        self.norms[k]
    }

    /// `c_{jl}^m` with all indices in 1..κ².
    pub fn structure_constant(&self, j: usize, l: usize, m: usize) -> f64 {
        let d = self.len() - 1;
        self.structure[((j - 1) * d + (l - 1)) * d + (m - 1)]
    }

    /// Nonzero coefficients of `e_a e_b` in the basis.
    pub fn product(&self, a: usize, b: usize) -> &[(u8, c64)] {
        &self.products[a * self.len() + b]
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k < self.len() {
            Ok(())
        } else {
            Err(Error::BasisIndexOutOfRange { index: k, kappa: self.kappa })
        }
    }

    fn check_dim(&self, a: &SiteMatrix) -> Result<()> {
        if a.dim() == self.kappa {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.kappa, got: a.dim() })
        }
    }

    /// Hilbert–Schmidt projection onto the basis.
    pub fn expand(&self, a: &SiteMatrix) -> Result<Vec<c64>> {
        self.check_dim(a)?;
        Ok(self
            .elements
            .iter()
            .zip(&self.norms)
            .map(|(e, &eta)| e.mul(a).trace() / eta)
            .collect())
    }

    pub fn reconstruct(&self, coeffs: &[c64]) -> Result<SiteMatrix> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: coeffs.len() });
        }
        let mut out = SiteMatrix::zeros(self.kappa);
        for (e, &c) in self.elements.iter().zip(coeffs) {
            if c != c64::new(0.0, 0.0) {
                out = out.add(&e.scale(c));
            }
        }
        Ok(out)
    }

    /// τ(a) = tr(a)/κ.
    pub fn normalized_trace(&self, a: &SiteMatrix) -> Result<c64> {
        self.check_dim(a)?;
        Ok(a.trace() / self.kappa as f64)
    }
}

/// Builds the scaled generalized Gell-Mann basis for `M_κ(ℂ)`.
pub fn build_basis(kappa: usize) -> Result<SiteBasis> {
    if !(2..=MAX_KAPPA).contains(&kappa) {
        return Err(Error::InvalidKappa { got: kappa, max: MAX_KAPPA });
    }
    let zero = c64::new(0.0, 0.0);
    let half = 0.5;
    let mut elements = vec![SiteMatrix::identity(kappa)];
    // Gell-Mann ordering: for each k, the off-diagonal pairs (j, k) with j < k,
    // then the k-th diagonal generator.
    for k in 1..kappa {
        for j in 0..k {
            elements.push(SiteMatrix::from_fn(kappa, |r, c| {
                if (r, c) == (j, k) || (r, c) == (k, j) {
                    c64::new(half, 0.0)
                } else {
                    zero
                }
            }));
            elements.push(SiteMatrix::from_fn(kappa, |r, c| {
                if (r, c) == (j, k) {
                    c64::new(0.0, -half)
                } else if (r, c) == (k, j) {
                    c64::new(0.0, half)
                } else {
                    zero
                }
            }));
        }
        let scale = (2.0 / (k * (k + 1)) as f64).sqrt() * half;
        elements.push(SiteMatrix::from_fn(kappa, |r, c| {
            if r != c {
                zero
            } else if r < k {
                c64::new(scale, 0.0)
            } else if r == k {
                c64::new(-(k as f64) * scale, 0.0)
            } else {
                zero
            }
        }));
    }

    let dim = elements.len();
    let norms: Vec<f64> = elements.iter().map(|e| e.mul(e).trace().re).collect();

    let d = dim - 1;
    let mut structure = vec![0.0; d * d * d];
    for j in 1..dim {
        for l in 1..dim {
            let comm = elements[j].commutator(&elements[l]);
            for m in 1..dim {
                // [e_j, e_l] = i c_{jl}^m e_m  =>  c = -i tr(e_m [e_j, e_l]) / η_m
                let c = elements[m].mul(&comm).trace() * c64::new(0.0, -1.0) / norms[m];
                let v = if c.re.abs() < tolerance::PRUNE { 0.0 } else { c.re };
                structure[((j - 1) * d + (l - 1)) * d + (m - 1)] = v;
            }
        }
    }

    let mut products = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let prod = elements[a].mul(&elements[b]);
            let mut entries = Vec::new();
            for (c, (e, &eta)) in elements.iter().zip(&norms).enumerate() {
                let v = e.mul(&prod).trace() / eta;
                if v.norm() > tolerance::PRUNE {
                    entries.push((c as u8, v));
                }
            }
            products.push(entries);
        }
    }

    Ok(SiteBasis { kappa, elements, norms, structure, products })
}

/// τ(a) = tr(a)/κ.
pub fn normalized_trace(a: &SiteMatrix, basis: &SiteBasis) -> Result<c64> {
    basis.normalized_trace(a)
}

pub fn expand(a: &SiteMatrix, basis: &SiteBasis) -> Result<Vec<c64>> {
    basis.expand(a)
}

/// `a − τ(a)·I`.
pub fn traceless_project(a: &SiteMatrix) -> SiteMatrix {
    let t = a.trace() / a.dim() as f64;
    a.sub(&SiteMatrix::identity(a.dim()).scale(t))
}

/// A density matrix on one site.
#[derive(Clone, Debug)]
pub struct SiteState {
    density: SiteMatrix,
}

impl SiteState {
    /// Validates Hermiticity, unit trace and positivity to 1e-12.
    pub fn from_density(density: SiteMatrix) -> Result<Self> {
        let tol = tolerance::EXACT;
        if !density.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        if !density.is_hermitian(tol) {
            return Err(Error::InvalidState("density is not Hermitian".into()));
        }
        let tr = density.trace();
        if (tr - c64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let eig = density
            .as_mat()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        if let Some(&min) = eig.first() {
            if min < -tol {
                return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
            }
        }
        Ok(Self { density })
    }

    /// The normalized trace state τ, density I/κ.
    pub fn maximally_mixed(kappa: usize) -> Self {
        Self { density: SiteMatrix::identity(kappa).scale(c64::new(1.0 / kappa as f64, 0.0)) }
    }

    /// The pure state `|ψ⟩⟨ψ|`, normalizing `psi`.
    pub fn pure(psi: &[c64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let n = psi.len();
        let v: Vec<c64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self { density: SiteMatrix::from_fn(n, |i, j| v[i] * v[j].conj()) })
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis_state(kappa: usize, k: usize) -> Result<Self> {
        if k >= kappa {
            return Err(Error::InvalidState(format!("level {k} out of range for kappa {kappa}")));
        }
        let mut psi = vec![c64::new(0.0, 0.0); kappa];
        psi[k] = c64::new(1.0, 0.0);
        Self::pure(&psi)
    }

    pub fn density(&self) -> &SiteMatrix {
        &self.density
    }

    pub fn kappa(&self) -> usize {
        self.density.dim()
    }

    /// tr(ρ a).
    pub fn expectation(&self, a: &SiteMatrix) -> c64 {
        self.density.mul(a).trace()
    }

    /// The fixed grid of pure states used for state-based lower bounds: for κ = 2
    /// the six Pauli eigenstates; in general the computational states plus
    /// `(|j⟩ ± |k⟩)/√2` and `(|j⟩ ± i|k⟩)/√2` for every pair j < k.
    pub fn pure_grid(kappa: usize) -> Vec<SiteState> {
        let zero = c64::new(0.0, 0.0);
        let one = c64::new(1.0, 0.0);
        let mut grid = Vec::new();
        for j in 0..kappa {
            for k in (j + 1)..kappa {
                for phase in [one, -one, c64::new(0.0, 1.0), c64::new(0.0, -1.0)] {
                    let mut psi = vec![zero; kappa];
                    psi[j] = one;
                    psi[k] = phase;
                    grid.push(Self::pure(&psi).expect("nonzero vector"));
                }
            }
        }
        for k in 0..kappa {
            grid.push(Self::basis_state(kappa, k).expect("valid level"));
        }
        grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    fn levi_civita(j: usize, l: usize, m: usize) -> f64 {
        match (j, l, m) {
            (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
            (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
            _ => 0.0,
        }
    }

    #[test]
    fn qubit_basis_is_half_pauli() {
        let b = build_basis(2).unwrap();
        assert_eq!(b.len(), 4);
        for k in 1..4 {
            let expected = pauli(k).scale(c(0.5, 0.0));
            assert!(b.element(k).sub(&expected).max_abs() < 1e-15);
        }
        for j in 1..4 {
            for l in 1..4 {
                for m in 1..4 {
                    assert_eq!(b.structure_constant(j, l, m), levi_civita(j, l, m));
                }
            }
        }
    }

    #[test]
    fn b3_is_traceless_and_hermitian() {
        let b = build_basis(2).unwrap();
        assert_eq!(b.element(3).trace(), c(0.0, 0.0));
        assert!(b.element(3).is_hermitian(0.0));
    }

    #[test]
    fn rejects_small_kappa() {
        assert!(matches!(build_basis(1), Err(Error::InvalidKappa { .. })));
        assert!(matches!(build_basis(0), Err(Error::InvalidKappa { .. })));
        assert!(build_basis(MAX_KAPPA + 1).is_err());
    }

    #[test]
    fn commutation_relations_hold() {
        for kappa in 2..=4 {
            let b = build_basis(kappa).unwrap();
            let d = b.len();
            for j in 1..d {
                for l in 1..d {
                    let lhs = b.element(j).commutator(b.element(l));
                    let mut rhs = SiteMatrix::zeros(kappa);
                    for m in 1..d {
                        rhs = rhs.add(&b.element(m).scale(c(0.0, b.structure_constant(j, l, m))));
                    }
                    assert!(lhs.sub(&rhs).max_abs() < 1e-12, "kappa {kappa} j {j} l {l}");
                }
            }
        }
    }

    #[test]
    fn gell_mann_commutator_b1_b2() {
        // [b_1, b_2] computed directly against the structure-constant expansion.
        let b = build_basis(3).unwrap();
        let direct = b.element(1).mul(b.element(2)).sub(&b.element(2).mul(b.element(1)));
        let mut via = SiteMatrix::zeros(3);
        for m in 1..9 {
            via = via.add(&b.element(m).scale(c(0.0, b.structure_constant(1, 2, m))));
        }
        assert!(direct.sub(&via).max_abs() < 1e-12);
        // λ_1, λ_2, λ_3 satisfy the su(2) subalgebra: c_{12}^3 = 1 for the half-scaled basis.
        assert!((b.structure_constant(1, 2, 3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonality_and_traces() {
        for kappa in 2..=4 {
            let b = build_basis(kappa).unwrap();
            for j in 0..b.len() {
                let t = b.normalized_trace(b.element(j)).unwrap();
                let expected = if j == 0 { 1.0 } else { 0.0 };
                assert!((t - c(expected, 0.0)).norm() < 1e-15);
                assert!(j == 0 || b.element(j).is_hermitian(0.0));
                for l in 0..b.len() {
                    let ip = b.element(j).mul(b.element(l)).trace();
                    let expected = match (j, l) {
                        (0, 0) => kappa as f64,
                        _ if j == l => 0.5,
                        _ => 0.0,
                    };
                    assert!((ip - c(expected, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn normalized_trace_examples() {
        let b = build_basis(2).unwrap();
        assert_eq!(normalized_trace(&SiteMatrix::identity(2), &b).unwrap(), c(1.0, 0.0));
        assert_eq!(normalized_trace(&pauli(3), &b).unwrap(), c(0.0, 0.0));
        let d = SiteMatrix::from_rows(&[&[c(2.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0)]]);
        assert_eq!(normalized_trace(&d, &b).unwrap(), c(1.0, 0.0));
        assert!(normalized_trace(&SiteMatrix::identity(3), &b).is_err());
    }

    #[test]
    fn expand_examples() {
        let b = build_basis(2).unwrap();
        let e = expand(&SiteMatrix::identity(2), &b).unwrap();
        assert_eq!(e, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let e = expand(&pauli(3), &b).unwrap();
        assert_eq!(e, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        assert!(expand(&SiteMatrix::identity(3), &b).is_err());
    }

    #[test]
    fn traceless_projection_examples() {
        assert!(traceless_project(&SiteMatrix::identity(2)).max_abs() < 1e-15);
        assert!(traceless_project(&pauli(1)).sub(&pauli(1)).max_abs() < 1e-15);
        let a = SiteMatrix::identity(2).add(&pauli(3));
        assert!(traceless_project(&a).sub(&pauli(3)).max_abs() < 1e-15);
    }

    #[test]
    fn product_table_matches_matrix_products() {
        for kappa in 2..=3 {
            let b = build_basis(kappa).unwrap();
            for x in 0..b.len() {
                for y in 0..b.len() {
                    let mut sum = SiteMatrix::zeros(kappa);
                    for &(z, v) in b.product(x, y) {
                        sum = sum.add(&b.element(z as usize).scale(v));
                    }
                    assert!(sum.sub(&b.element(x).mul(b.element(y))).max_abs() < 1e-14);
                }
            }
        }
        // κ = 2 products are monomial.
        let b = build_basis(2).unwrap();
        assert!((0..16).all(|i| b.product(i / 4, i % 4).len() == 1));
    }

    #[test]
    fn site_states() {
        let tau = SiteState::maximally_mixed(2);
        assert_eq!(tau.expectation(&pauli(3)), c(0.0, 0.0));
        let up = SiteState::basis_state(2, 0).unwrap();
        assert_eq!(up.expectation(&pauli(3)), c(1.0, 0.0));
        assert_eq!(SiteState::pure_grid(2).len(), 6);
        let bad = SiteMatrix::from_rows(&[&[c(2.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(-1.0, 0.0)]]);
        assert!(SiteState::from_density(bad).is_err());
        assert!(SiteState::from_density(pauli(1)).is_err());
        for s in SiteState::pure_grid(3) {
            assert!(SiteState::from_density(s.density().clone()).is_ok());
        }
    }
}
