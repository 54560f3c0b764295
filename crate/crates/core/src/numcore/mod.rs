//! Exact forward-mode differentiation, small dense real/complex linear
//! algebra, and the generalized symmetric eigensolver.

pub mod cvec;
pub mod dual;
pub mod eig;
pub mod map;

pub use cvec::{bil, herm, re_inner, CVec};
pub use dual::{Dual, Dual2, Dual3, DualOf, Real};
pub use eig::{generalized_sym_eig, SymEigResult};
pub use map::{hessians, jacobian, jet1, Jacobian, Level, RealMap, Scheme, Smooth};
