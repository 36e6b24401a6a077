//! Operator (spectral) norms: dense eigen/singular-value routines up to the
//! crossover dimension, restarted Lanczos on matrix-free operators above it.

use faer::{c64, Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::site::SiteBasis;
use crate::strings::StringOperator;
use crate::tensor_ops::{DenseOperator, ImplicitOperator};
use crate::tolerance;

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Dense up to the crossover dimension, matrix-free above.
    #[default]
    Auto,
    Dense,
    Implicit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormOptions {
    pub engine: Engine,
    /// Largest κ^N handled densely under [`Engine::Auto`].
    pub crossover: usize,
    /// Relative residual target for Ritz values.
    pub tol: f64,
    /// Total matrix-vector products before giving up.
    pub max_matvecs: usize,
    pub seed: u64,
    /// Krylov dimension before an explicit restart.
    pub krylov: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            engine: Engine::Auto,
            crossover: tolerance::DENSE_CROSSOVER,
            tol: tolerance::ITERATIVE_NORM,
            max_matvecs: tolerance::ITERATION_CAP,
            seed: 0x5eed,
            krylov: 120,
        }
    }
}

impl NormOptions {
    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn use_dense(&self, dim: usize) -> bool {
        match self.engine {
            Engine::Dense => true,
            Engine::Implicit => false,
            Engine::Auto => dim <= self.crossover,
        }
    }
}

/// ‖A‖ from the spectrum (Hermitian input) or the singular values.
pub fn spectral_norm_dense(a: &DenseOperator) -> Result<f64> {
    let scale = a.max_abs();
    if !scale.is_finite() {
        return Err(Error::Eigensolver("non-finite matrix entries".into()));
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let m = a.matrix();
    let values = if a.is_hermitian(tolerance::EXACT * scale) {
        m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Eigensolver(format!("{e:?}")))?
    } else {
        m.singular_values().map_err(|e| Error::Eigensolver(format!("{e:?}")))?
    };
    let norm = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if norm.is_finite() {
        Ok(norm)
    } else {
        Err(Error::Eigensolver("non-finite spectrum".into()))
    }
}

/// ‖A‖ for a matrix-free operator, dense below the crossover under [`Engine::Auto`].
pub fn spectral_norm_implicit(a: &ImplicitOperator, opts: &NormOptions) -> Result<f64> {
    let dim = a.dim();
    if opts.use_dense(dim) {
        if dim > tolerance::DENSE_LIMIT {
            return Err(Error::DenseLimit { dim, limit: tolerance::DENSE_LIMIT });
        }
        return spectral_norm_dense(&a.to_dense()?);
    }
    let (mut s1, mut s2) = (Vec::with_capacity(dim), Vec::with_capacity(dim));
    if a.is_hermitian() {
        let (lo, hi) = lanczos_extremes(dim, true, opts, |x, y| {
            y.fill(ZERO);
            a.apply_into(x, y, &mut s1, &mut s2);
        })?;
        Ok(lo.abs().max(hi.abs()))
    } else {
        let adj = a.adjoint();
        let mut tmp = vec![ZERO; dim];
        let (_, hi) = lanczos_extremes(dim, false, opts, |x, y| {
            tmp.fill(ZERO);
            a.apply_into(x, &mut tmp, &mut s1, &mut s2);
            y.fill(ZERO);
            adj.apply_into(&tmp, y, &mut s1, &mut s2);
        })?;
        Ok(hi.max(0.0).sqrt())
    }
}

/// ‖A‖ for an operator given as basis strings.
pub fn spectral_norm_strings(a: &StringOperator, basis: &SiteBasis, opts: &NormOptions) -> Result<f64> {
    let dim = crate::tensor_ops::checked_pow(basis.kappa(), a.sites())?;
    if a.is_empty() {
        return Ok(0.0);
    }
    if opts.use_dense(dim) {
        spectral_norm_dense(&a.to_dense(basis)?)
    } else {
        spectral_norm_implicit(&a.to_implicit(basis)?, opts)
    }
}

fn dot(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm2(x: &[c64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigen-decomposition of the Lanczos tridiagonal matrix.
fn tridiagonal_eigen(alphas: &[f64], betas: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let k = alphas.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let evd = t.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S();
    let values: Vec<f64> = (0..k).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Smallest and largest eigenvalue of a Hermitian operator by Lanczos with full
/// reorthogonalization and explicit restarts. With `both_ends == false` only the
/// largest is required to converge.
pub(crate) fn lanczos_extremes(
    dim: usize,
    both_ends: bool,
    opts: &NormOptions,
    mut apply: impl FnMut(&[c64], &mut [c64]),
) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<c64> = (0..dim).map(|_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let n0 = norm2(&start);
    start.iter_mut().for_each(|v| *v /= n0);
    let krylov = opts.krylov.clamp(2, dim.max(2));
    let mut matvecs = 0usize;
    let mut last_residual = f64::INFINITY;

    loop {
        let mut vs: Vec<Vec<c64>> = vec![start];
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        let mut w = vec![ZERO; dim];
        let mut k = 0;
        loop {
            apply(&vs[k], &mut w);
            matvecs += 1;
            let mut alpha = 0.0;
            for pass in 0..2 {
                for (i, v) in vs.iter().enumerate() {
                    let h = dot(v, &w);
                    if pass == 0 && i == k {
                        alpha = h.re;
                    }
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= h * vi);
                }
            }
            alphas.push(alpha);
            let beta = norm2(&w);
            let size = alphas.len();
            let check = size >= dim || size % 4 == 0 || size >= krylov || matvecs >= opts.max_matvecs;
            if check || beta == 0.0 {
                let (theta, s) = tridiagonal_eigen(&alphas, &betas)?;
                let (lo, hi) = (theta[0], theta[size - 1]);
                let scale = lo.abs().max(hi.abs());
                let res_hi = beta * s[(size - 1, size - 1)].abs();
                let res_lo = beta * s[(size - 1, 0)].abs();
                let res = if both_ends { res_hi.max(res_lo) } else { res_hi };
                last_residual = res;
                let exhausted = size >= dim || beta <= 1e-14 * scale.max(f64::MIN_POSITIVE);
                if res <= opts.tol * scale || exhausted || scale == 0.0 {
                    return Ok((lo, hi));
                }
                if matvecs >= opts.max_matvecs {
                    return Err(Error::NoConvergence { iterations: matvecs, residual: res / scale });
                }
                if size >= krylov {
                    // Restart from the Ritz vectors of the wanted extremes.
                    let mut next = vec![ZERO; dim];
                    for (i, v) in vs.iter().enumerate() {
                        let c = s[(i, size - 1)] + if both_ends { s[(i, 0)] } else { 0.0 };
                        next.iter_mut().zip(v).for_each(|(n, vi)| *n += vi * c);
                    }
                    let nn = norm2(&next);
                    next.iter_mut().for_each(|v| *v /= nn);
                    start = next;
                    break;
                }
            } else if matvecs >= opts.max_matvecs {
                return Err(Error::NoConvergence { iterations: matvecs, residual: last_residual });
            }
            betas.push(beta);
            let next: Vec<c64> = w.iter().map(|v| v / beta).collect();
            vs.push(next);
            k += 1;
        }
    }
}
