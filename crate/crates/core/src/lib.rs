//! Mean curvature flow solitons `c X^perp = H` in warped products `I x_h P`
//! for the closed conformal field `X = h(t) d_t`.

pub mod error;
pub mod flows;
pub mod geometry;
pub mod graph;
pub mod identities;
pub mod numerics;
pub mod report;
pub mod rotational;
pub mod stability;

pub use error::{Error, Result};
