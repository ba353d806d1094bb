//! Optimal constants of anisotropic Hardy-Sobolev inequalities
//!
//! ```text
//! S (int |y|^Theta |z|^{-gamma q/p} |u|^q)^{p/q} <= int |y|^a |z|^{-b} |grad u|^p
//! ```
//!
//! computed over cylindrically symmetric profiles `u(|x|, |y|)`: parameter
//! algebra and verdicts, weighted quadrature on graded grids, the quotients and
//! identities, explicit competitor families, a preconditioned descent and
//! parameter sweeps.
//!
//! All computed constants are symmetric-class constants: they bound the true
//! infimum from above and coincide with it where minimizers are known to be
//! cylindrically symmetric.

pub mod error;
pub mod families;
pub mod functionals;
pub mod io;
pub mod mesh;
pub mod minimizer;
pub mod params;
pub mod quad;
pub mod radial;
pub mod scanner;

pub use error::{Error, Result};
pub use params::ParamSet;
