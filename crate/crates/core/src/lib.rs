//! Four-periodic boundary laws of the solid-on-solid model on Cayley trees and the
//! gradient Gibbs measures they induce.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary_law;
pub mod error;
pub mod external_field;
pub mod format;
pub mod ggm;
pub mod phase_diagram;
pub mod polyroots;
pub mod rational;
pub mod verify;

pub use error::{Error, Result};
