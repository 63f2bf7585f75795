//! Polynomials, multi-indices and linear differential expressions.

mod display;
mod linexpr;
mod multiindex;
mod poly;
mod registry;

pub use display::{fmt_linexpr, fmt_poly, fmt_suffix};
pub use linexpr::{Deriv, LinExpr, Namespace};
pub use multiindex::{Monomial, MultiIndex};
pub use poly::{rat, Poly};
pub use registry::{FuncSymbol, Origin, Registry};
