//! JSON forms of tensors, polynomials and Hamiltonian specs.
//!
//! Coefficients are `[re, im]` pairs; a bare number is accepted on input as a
//! real coefficient. Index 0 is the identity, `1..κ²−1` the traceless basis.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    curie_weiss_strings, heisenberg_strings, heisenberg_symbol, local_interaction_strings, local_interaction_symbol,
    LocalInteractionSpec,
};
use crate::site::SiteBasis;
use crate::strings::StringOperator;
use crate::symbolic::{CanonicalDecomposition, GammaPolynomial, LocalTensor, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexJson {
    Pair([f64; 2]),
    Real(f64),
}

impl From<ComplexJson> for c64 {
    fn from(c: ComplexJson) -> Self {
        match c {
            ComplexJson::Pair([re, im]) => c64::new(re, im),
            ComplexJson::Real(re) => c64::new(re, 0.0),
        }
    }
}

impl From<c64> for ComplexJson {
    fn from(c: c64) -> Self {
        ComplexJson::Pair([c.re, c.im])
    }
}

impl Default for ComplexJson {
    fn default() -> Self {
        ComplexJson::Pair([0.0, 0.0])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coeff: ComplexJson,
    pub indices: MultiIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorJson {
    pub degree: usize,
    #[serde(default)]
    pub terms: Vec<TermJson>,
}

impl From<&LocalTensor> for TensorJson {
    fn from(t: &LocalTensor) -> Self {
        Self {
            degree: t.degree(),
            terms: t.terms().iter().map(|(idx, &c)| TermJson { coeff: c.into(), indices: idx.clone() }).collect(),
        }
    }
}

impl TryFrom<&TensorJson> for LocalTensor {
    type Error = Error;

    fn try_from(t: &TensorJson) -> Result<Self> {
        LocalTensor::from_terms(t.degree, t.terms.iter().map(|term| (term.indices.clone(), term.coeff.into())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordJson {
    pub coeff: ComplexJson,
    pub factors: Vec<TensorJson>,
}

/// A word's factors may be arbitrary tensors; they are decomposed and
/// multiplied out on conversion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialJson {
    #[serde(default)]
    pub scalar: ComplexJson,
    #[serde(default)]
    pub words: Vec<WordJson>,
}

impl From<&GammaPolynomial> for PolynomialJson {
    fn from(p: &GammaPolynomial) -> Self {
        let words = p
            .terms()
            .iter()
            .map(|(w, &c)| WordJson {
                coeff: c.into(),
                factors: (0..w.len()).map(|i| TensorJson::from(&w.factor_tensor(i))).collect(),
            })
            .collect();
        Self { scalar: p.scalar().into(), words }
    }
}

impl TryFrom<&PolynomialJson> for GammaPolynomial {
    type Error = Error;

    fn try_from(p: &PolynomialJson) -> Result<Self> {
        let mut out = GammaPolynomial::constant(p.scalar.into());
        for w in &p.words {
            let factors = w.factors.iter().map(LocalTensor::try_from).collect::<Result<Vec<_>>>()?;
            out = out.add(&GammaPolynomial::product_of(&factors).scale(w.coeff.into()));
        }
        out.prune(0.0);
        Ok(out)
    }
}

/// Canonical components `a′_0, …, a′_M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub components: Vec<TensorJson>,
}

impl From<&CanonicalDecomposition> for DecompositionJson {
    fn from(d: &CanonicalDecomposition) -> Self {
        Self { components: d.components().iter().map(TensorJson::from).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CouplingJson {
    Isotropic(f64),
    Matrix(Vec<Vec<f64>>),
}

/// A scalar field points along the last spin operator (σ_3 for κ = 2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldJson {
    Along(f64),
    Vector(Vec<f64>),
}

impl Default for FieldJson {
    fn default() -> Self {
        FieldJson::Along(0.0)
    }
}

fn default_kappa() -> usize {
    2
}

fn default_range() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianJson {
    Heisenberg {
        #[serde(rename = "J")]
        j: CouplingJson,
        #[serde(default)]
        h: FieldJson,
        #[serde(default = "default_kappa")]
        kappa: usize,
    },
    Local {
        #[serde(default = "default_range")]
        range: usize,
        #[serde(rename = "J")]
        j: CouplingJson,
        #[serde(default)]
        h: FieldJson,
        #[serde(default = "default_kappa")]
        kappa: usize,
    },
    CurieWeiss {
        #[serde(rename = "J")]
        j: f64,
        #[serde(default)]
        h: f64,
    },
}

fn interaction_spec(range: usize, j: &CouplingJson, h: &FieldJson, kappa: usize) -> Result<LocalInteractionSpec> {
    let d = kappa
        .checked_mul(kappa)
        .and_then(|k| k.checked_sub(1))
        .filter(|&d| d >= 3)
        .ok_or(Error::InvalidKappa { got: kappa, max: crate::site::MAX_KAPPA })?;
    let field = match h {
        FieldJson::Along(v) => (0..d).map(|p| if p + 1 == d { *v } else { 0.0 }).collect(),
        FieldJson::Vector(v) => v.clone(),
    };
    match j {
        CouplingJson::Isotropic(v) => {
            if field.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: field.len() });
            }
            LocalInteractionSpec::isotropic(range, kappa, *v, field)
        }
        CouplingJson::Matrix(m) => {
            let spec = LocalInteractionSpec::new(range, m.clone(), field)?;
            if spec.kappa() != kappa {
                return Err(Error::DimensionMismatch { expected: kappa, got: spec.kappa() });
            }
            Ok(spec)
        }
    }
}

impl HamiltonianJson {
    pub fn kappa(&self) -> usize {
        match self {
            HamiltonianJson::Heisenberg { kappa, .. } | HamiltonianJson::Local { kappa, .. } => *kappa,
            HamiltonianJson::CurieWeiss { .. } => 2,
        }
    }

    /// `H_N` on `sites` sites.
    pub fn strings(&self, sites: usize) -> Result<StringOperator> {
        match self {
            HamiltonianJson::Heisenberg { j, h, kappa } => heisenberg_strings(&interaction_spec(1, j, h, *kappa)?, sites),
            HamiltonianJson::Local { range, j, h, kappa } => {
                local_interaction_strings(&interaction_spec(*range, j, h, *kappa)?, sites)
            }
            HamiltonianJson::CurieWeiss { j, h } => curie_weiss_strings(*j, *h, sites),
        }
    }

    /// The γ-polynomial quantizing to `H_N / N`; for Curie-Weiss it is
    /// `−(J/4)[σ_3]² − h[σ_1]`.
    pub fn symbol(&self) -> Result<GammaPolynomial> {
        match self {
            HamiltonianJson::Heisenberg { j, h, kappa } => heisenberg_symbol(&interaction_spec(1, j, h, *kappa)?),
            HamiltonianJson::Local { range, j, h, kappa } => {
                local_interaction_symbol(&interaction_spec(*range, j, h, *kappa)?)
            }
            HamiltonianJson::CurieWeiss { j, h } => {
                let s3 = GammaPolynomial::from_tensor(&LocalTensor::from_pauli(&[3]));
                let s1 = GammaPolynomial::from_tensor(&LocalTensor::from_pauli(&[1]));
                Ok(s3.mul(&s3).scale(c64::new(-j / 4.0, 0.0)).sub(&s1.scale(c64::new(*h, 0.0))))
            }
        }
    }
}

/// Checks every word factor's indices against the basis.
pub fn validate_polynomial(p: &GammaPolynomial, basis: &SiteBasis) -> Result<()> {
    for w in p.terms().keys() {
        for idx in w.factors() {
            for &k in idx {
                basis.check_index(k as usize)?;
            }
        }
    }
    Ok(())
}

/// Parses a value, reporting the JSON path of the first schema violation.
pub fn parse_with_path<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::build_basis;

    #[test]
    fn tensor_roundtrip_is_bit_exact() {
        let t = LocalTensor::from_terms(2, [(vec![1, 3], c64::new(0.1, -1e-300)), (vec![0, 2], c64::new(1.0 / 3.0, 0.0))])
            .unwrap();
        let text = serde_json::to_string(&TensorJson::from(&t)).unwrap();
        let back: TensorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(LocalTensor::try_from(&back).unwrap(), t);
        assert_eq!(text, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn polynomial_roundtrip_and_composite_factors() {
        let text = r#"{"scalar": [0.5, 0], "words": [
            {"coeff": 2.0, "factors": [{"degree": 1, "terms": [{"coeff": [1, 0], "indices": [3]}]}]},
            {"coeff": [1, 0], "factors": [{"degree": 2, "terms": [
                {"coeff": [1, 0], "indices": [1, 0]}, {"coeff": [1, 0], "indices": [3, 3]}]}]}]}"#;
        let p = GammaPolynomial::try_from(&parse_with_path::<PolynomialJson>(text).unwrap()).unwrap();
        assert_eq!(p.scalar(), c64::new(0.5, 0.0));
        let q = GammaPolynomial::try_from(&PolynomialJson::from(&p)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let err = parse_with_path::<PolynomialJson>(r#"{"words": [{"coeff": [1, 0], "factors": [{"degree": "x"}]}]}"#)
            .unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "words[0].factors[0].degree"),
            e => panic!("{e}"),
        }
        let bad = r#"{"words": [{"coeff": [1, 0], "factors": [{"degree": 1, "terms": [{"coeff": 1, "indices": [9]}]}]}]}"#;
        let p = GammaPolynomial::try_from(&parse_with_path::<PolynomialJson>(bad).unwrap()).unwrap();
        assert!(validate_polynomial(&p, &build_basis(2).unwrap()).is_err());
        assert!(validate_polynomial(&p, &build_basis(4).unwrap()).is_ok());
    }

    #[test]
    fn hamiltonian_specs() {
        let basis = build_basis(2).unwrap();
        let h: HamiltonianJson = parse_with_path(r#"{"type": "heisenberg", "J": 1.0, "h": [0.2, 0, 0.3]}"#).unwrap();
        let n = 6;
        let q = crate::symbolic::quantize_strings(&h.symbol().unwrap(), n).unwrap();
        let hn = h.strings(n).unwrap().scale(c64::new(1.0 / n as f64, 0.0));
        assert!(q.max_coeff_diff(&hn).unwrap() < 1e-12);
        let l: HamiltonianJson =
            parse_with_path(r#"{"type": "local", "range": 2, "J": [[1,0,0],[0,1,0],[0,0,0.5]], "h": 0.1}"#).unwrap();
        assert!(l.strings(6).unwrap().is_hermitian(0.0));
        let cw: HamiltonianJson = parse_with_path(r#"{"type": "curie_weiss", "J": 1.0, "h": 0.5}"#).unwrap();
        assert_eq!(cw.strings(4).unwrap().to_dense(&basis).unwrap().dim(), 16);
        let sym = cw.symbol().unwrap();
        for n in [4usize, 7] {
            let hn = cw.strings(n).unwrap().scale(c64::new(1.0 / n as f64, 0.0));
            let diff = crate::symbolic::quantize_strings(&sym, n).unwrap().sub(&hn).unwrap();
            assert!(diff.max_abs_coeff() < 1e-15);
        }
        assert!(parse_with_path::<HamiltonianJson>(r#"{"type": "ising", "J": 1}"#).is_err());
        let qutrit: HamiltonianJson = parse_with_path(r#"{"type": "heisenberg", "J": 1.0, "kappa": 3}"#).unwrap();
        assert_eq!(qutrit.strings(4).unwrap().len(), 4 * 8);
    }
}
