//! Stability theory, root maps, continuity paths and inequality suites for
//! general inverse sigma_k equations `λ_1⋯λ_n = Σ c_k σ_k(λ)`.

pub mod binom;
pub mod continuity;
pub mod dhym;
pub mod error;
pub mod figures;
pub mod proplab;
pub mod sampling;
pub mod stability;
pub mod symmfunc;
pub mod tol;
pub mod toymodel;
pub mod unipoly;

pub use error::{GiskError, Result};
pub use stability::{RootTuple, StabilityCertificate, Status, Tee};
pub use symmfunc::{FullCoeffs, GiskCoeffs, LambdaPoint};
pub use toymodel::{IntersectionNumbers, ToyModel};
pub use unipoly::UniPoly;
