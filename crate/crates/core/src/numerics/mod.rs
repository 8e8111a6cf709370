//! Numerical building blocks shared by the geometric modules.

pub mod fd;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod roots;
