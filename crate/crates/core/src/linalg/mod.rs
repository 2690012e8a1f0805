//! Dense complex linear algebra on composite systems.

mod dims;
mod matrix;
mod ops;
pub mod space;
mod spectral;

pub use dims::DimVector;
pub use matrix::{ComplexMatrix, C64};
pub use ops::{
    partial_trace, partial_transpose, permutation_index_map, permutation_operator, permute_dims,
    permute_systems, tensor, tensor_all,
};
pub use spectral::{
    eigh, eigvalsh, hermitian_function, inv_sqrt_pd, max_eigenvalue, operator_norm, psd_margin,
    sqrt_psd, trace_norm,
};

/// Default Hermiticity tolerance for inputs.
pub const HERMITIAN_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Trace distance 1/2 ||a - b||_1.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    0.5 * trace_norm(&(a - b))
}
