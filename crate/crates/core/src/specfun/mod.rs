//! Special functions used throughout: theta series, `K(m)`, Jacobi `dn`, and
//! adaptive quadrature.

pub mod elliptic;
pub mod quad;
pub mod theta;

pub use elliptic::{
    complete_elliptic_k, complete_elliptic_k_mc, jacobi_dn, jacobi_dn_mc, jacobi_sncndn, jacobi_sncndn_mc,
};
pub use quad::{
    integrate, integrate_semi_infinite, integrate_with_breaks, QuadValue, QuadratureSpec,
    Singularity,
};
pub use theta::{
    theta, theta_direct, theta_poisson, theta_scaled, ScaledTheta, ThetaParams,
};
