//! Gradient Gibbs measures built from periodic boundary laws on finite windows.

mod law;
mod measure;
mod window;

pub use law::*;
pub use measure::*;
pub use window::*;
