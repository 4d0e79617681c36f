//! Random 2CSP instances from matrix-polynomial lifts, and the eigenvalue,
//! basic SDP and partitioned SDP bounds on their value.
//!
//! A [`poly::MatrixPolynomial`] is a recipe for random graphs. Evaluating it on
//! a random signed [`lift::LiftInstance`] yields a sparse Hermitian matrix whose
//! SDP value concentrates around the partitioned SDP value of the infinite lift,
//! which [`ball`] approximates on finite balls of the free product.

pub mod ball;
pub mod builtins;
pub mod dsl;
pub mod error;
pub mod experiment;
pub mod lift;
pub mod operator;
pub mod pasting;
pub mod poly;
pub mod sdp;
pub mod spectral;
pub mod word;

pub use error::{Error, Result};
