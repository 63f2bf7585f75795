//! Integration of overdetermined linear PDE systems through syzygies.
//!
//! Equations are linear in the unknown functions with polynomial
//! coefficients. Reduction records how every derived equation arises from
//! the inputs, so identities between equations (syzygies) fall out for free.
//! A syzygy in divergence or curl form is integrated to new, lower order
//! equations; conventional integration and separation finish the job.

pub mod calculus;
pub mod conventional;
pub mod driver;
pub mod expr;
pub mod integrator;
pub mod potentials;
pub mod reduction;
pub mod system;

pub use expr::{Deriv, LinExpr, MultiIndex, Namespace, Poly, Registry};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("registry: {0}")]
    Registry(String),
    #[error("expressions live in different namespaces")]
    NamespaceMismatch,
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("current is not conserved, divergence leaves {0}")]
    NotConserved(String),
    #[error("potential computation failed: {0}")]
    Potential(String),
    #[error("reduction: {0}")]
    Reduction(String),
    #[error("integration: {0}")]
    Integration(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("label `{0}` refers to a deleted equation")]
    DeletedLabel(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
