//! γ-classes of local tensors, their canonical decomposition, the class
//! product and the quantization maps.

pub mod decomposition;
pub mod polynomial;
pub mod quantize;
pub mod tensor;

pub use decomposition::{decompose, is_irreducible, is_irreducible_dense, recompose, CanonicalDecomposition, IrreducibleTensor};
pub use polynomial::{word_make, GammaPolynomial, GammaWord};
pub use quantize::{
    naive_product, naive_product_strings, poly_is_zero, quantize, quantize_implicit, quantize_strings, ZeroCheck,
    ZeroReport,
};
pub use tensor::{LocalTensor, MultiIndex};
