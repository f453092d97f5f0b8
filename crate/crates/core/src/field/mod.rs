//! Arithmetic of F_q, of F_q[t1..td] and its fraction field, and the
//! exponent-lattice encoding of finitely generated subgroups of K^*.

pub mod basis;
pub mod gf;
pub mod mpoly;
pub mod parse;
pub mod point;
pub mod ratfunc;

pub use basis::{coprime_basis, mult_dependence, to_exponents, CoprimeBasis};
pub use gf::{Embedding, Gf, GfCtx};
pub use mpoly::MPoly;
pub use parse::{parse_rational_function, ParseError};
pub use point::ExpPoint;
pub use ratfunc::RationalFunction;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("element not generated by the basis; residual factor {0}")]
    NotInSpan(String),
    #[error("p-divisibility is not supported: {0}")]
    Inseparable(String),
}
