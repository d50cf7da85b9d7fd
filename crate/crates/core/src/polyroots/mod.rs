//! Polynomial arithmetic, exact positive-root isolation and closed-form cubic/quartic solvers.

mod cubic;
mod isolate;
mod poly;
mod quartic;

pub use cubic::{solve_cubic, CubicRoot, CubicSolution, DiscriminantCase};
pub use isolate::{
    count_roots_in, isolate_positive_roots, isolate_roots_in, Certificate, IsolatedRoot, RootSet,
    DEFAULT_TOL,
};
pub use poly::{Coefficients, RealPolynomial};
pub use quartic::{quartic_value, solve_quartic_ferrari, QuarticSolution, ResolventCase};

pub(crate) use poly::rat;
