//! Curvature of reductive homogeneous Finsler spaces carrying the square
//! metric `F = (α+β)²/α` and its Randers change `F = (α+β)²/α + β`.
//!
//! The crate is organised bottom-up:
//!
//! * [`liealg`] holds the Lie-algebra model `g = h ⊕ k` of the space and checks
//!   every algebraic hypothesis the curvature formulas need.
//! * [`jet`] is a truncated Taylor arithmetic used as a generic
//!   differentiation oracle.
//! * [`metric`] evaluates `(α,β)`-metrics, Shen's validity criterion, the
//!   fundamental tensor and the distortion.
//! * [`phicalc`] computes the Cheng–Shen quantities `Q, Δ, ψ, Φ`, `T(s)` and the
//!   volume factor `f(b)`, both generically and in closed form.
//! * [`scurvature`] and [`meanberwald`] compute `S(H,y)` and `E_ij(H,y)` at the
//!   origin.
//! * [`ratcheck`] is a small exact rational-function engine that certifies the
//!   closed forms symbolically.
//!
//! Sweeps over grids, sample directions and quadrature nodes run on rayon when
//! the `parallel` feature is enabled (the default); see [`par`].

pub mod error;
pub mod fixtures;
pub mod jet;
pub mod liealg;
pub mod meanberwald;
pub mod metric;
pub mod model_io;
pub mod par;
pub mod phicalc;
pub mod quadrature;
pub mod ratcheck;
pub mod sampling;
pub mod scurvature;

pub use error::{Error, Result};
pub use jet::Jet4;
pub use liealg::{KVector, LieModel, ValidatedModel, ValidationReport};
pub use metric::{PhiFamily, PhiSpec};
pub use phicalc::{CurvContext, PhiQuantities};
