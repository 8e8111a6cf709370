pub mod context;
pub mod expr;
pub mod profile;
pub mod space;

pub use context::{Leaf, SolitonContext};
pub use expr::Expr;
pub use profile::{ProfileKind, WarpingProfile};
pub use space::{TangentVector, WarpedSpace};
