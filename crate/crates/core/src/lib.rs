//! Elliptic scaling functions for isotropic dilation matrices.
//!
//! The pipeline runs from a dilation matrix `A` to its quadratic form `W`,
//! the refinement mask built on `W`, and finally the polynomial space that
//! integer shifts of the scaling function reproduce. The Strang-Fix analysis
//! is exact over ℚ(i); a floating point route is kept alongside as a
//! cross-check.

pub mod error;
pub mod isotropic;
pub mod masks;
pub mod multiindex;
pub mod numeric;
pub mod par;
pub mod polyops;
pub mod presets;
pub mod ratcore;
pub mod scalingfn;
pub mod serial;
pub mod strangfix;

pub use error::{Error, ParseError, Result};
pub use isotropic::{DilationMatrix, IsotropicDecomposition};
pub use masks::{MaskSpec, TrigPoly};
pub use multiindex::{GradedBasis, MultiIndex};
pub use par::Exec;
pub use polyops::{MultiPoly, PolynomialSpace};
pub use ratcore::{GaussianRational, RatMatrix, Rational};
pub use scalingfn::ScalingFunctionSpec;
pub use strangfix::SFResult;
