//! Desk-scale numerics for finite stages of Lᵖ UHF algebras of tensor product type.
//!
//! The crate provides the substrate (weighted atomic measures, ℓᵖ norms, norming
//! functionals), a certified p→p operator norm engine, the matrix algebra M_d^p
//! with its flip element, systems of d-similarities and their representations,
//! truncated tensor-product stages, spatiality checks, and the numerical
//! diagnostics that separate spatial/amenable algebras from the rest.
//!
//! Scalars are generic: every algebraic construction works over any [`Scalar`],
//! with [`C64`] (complex pairs of `f64`) as the numerical path and [`CRat`]
//! (complex pairs of arbitrary-precision rationals) as the exact path used to
//! verify algebraic identities. Norm computations are `f64`-only.

pub mod criteria;
pub mod error;
pub mod json;
pub mod matalg;
pub mod perturbation;
pub mod pnorm;
pub mod scalar;
pub mod simsys;
pub mod spaces;
pub mod spatial_check;
pub mod tensor_type;

pub use error::{Error, Result};

/// Complex scalar over `f64`, the numerical path.
pub type C64 = num::complex::Complex<f64>;

/// Complex scalar over arbitrary-precision rationals, the exact path.
pub type CRat = num::complex::Complex<num::rational::BigRational>;

/// Dense matrix over the numerical scalar.
pub type MatF = pnorm::Mat<C64>;

/// Dense matrix over the exact rational scalar.
pub type MatQ = pnorm::Mat<CRat>;

/// Elementary tensor sum over the numerical scalar.
pub type TensorSumF = matalg::ElementaryTensorSum<C64>;

/// Elementary tensor sum over the exact rational scalar.
pub type TensorSumQ = matalg::ElementaryTensorSum<CRat>;

/// Default cap on the total dimension of materialized stage matrices.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Current cap on materialized dimensions; `LPUHF_MAX_DIM` overrides the default.
pub fn max_dim() -> usize {
    std::env::var("LPUHF_MAX_DIM")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_MAX_DIM)
}

/// Rejects a requested dimension above the capacity cap.
pub fn check_dim(dim: usize) -> Result<()> {
    let cap = max_dim();
    if dim > cap {
        Err(Error::Capacity(format!(
            "dimension {dim} exceeds the cap {cap} (set LPUHF_MAX_DIM to raise it)"
        )))
    } else {
        Ok(())
    }
}
