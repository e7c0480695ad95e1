//! Numerical verification of pointwise bi-slant submanifolds of flat
//! locally product Riemannian spaces.

pub mod ambient;
pub mod check;
pub mod conn;
pub mod dist;
pub mod error;
pub mod expr;
pub mod immersion;
pub mod structops;
pub mod tol;
pub mod warp;

pub use error::{GeomError, GeomResult};
