//! Picard iteration for the gradient-form Yamabe Dirichlet problem
//!
//! ```text
//! Δf = −[R e^{2f} + (n−1)(n−2)|∇f|²] / (2(n−1)) + S   in Ω,   f = c on ∂Ω
//! ```
//!
//! on small convex domains of R³ and small balls of Rⁿ, with the explicit
//! admissibility certificate that guarantees convergence before anything is
//! solved.

pub mod analysis;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod iteration;
pub mod poisson;
pub mod verify;

pub use error::{Error, Result};
