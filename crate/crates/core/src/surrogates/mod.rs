//! Surrogate models: polynomial regression for 1-D subproblems, a cubic RBF
//! interpolant for nonseparable groups, and fitness distance correlation
//! for picking the polynomial degree.

mod fdc;
pub mod linalg;
mod pr;
mod rbf;
mod samples;

pub use fdc::{fdc, pearson};
pub use pr::{fit_pr, fit_pr_xy, maximize_poly, real_roots_in, PrModel};
pub use rbf::{fit_rbf, RbfDiagnostics, RbfModel, DEDUP_TOL};
pub use samples::SampleSet;
