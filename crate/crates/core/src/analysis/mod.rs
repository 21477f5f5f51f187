//! Scalar machinery behind the certificate: the gradient majorant and its
//! smallest fixed point, the contraction constant, and the Green's-function
//! gradient integrals that supply the gradient-estimate constants.

pub mod green;
pub mod majorant;
pub mod quadrature;

pub use green::{
    ball_green_constant, ball_green_function, ball_green_gradient, estimate_ball_green_constant,
    green_gradient_integral, GreenEstimate,
};
pub use majorant::{
    contraction_constant, convex_gradient_constant, evans_bound, smallest_fixed_point,
    FixedPointResult, MajorantParams, SizeParameter,
};
