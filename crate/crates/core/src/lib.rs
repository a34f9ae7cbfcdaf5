//! Cooperative coevolution for large-scale black-box minimization, with
//! polynomial-regression search for separable variables and RBF-prescreened
//! SHADE for nonseparable groups.
//!
//! ```
//! use ccopt::benchmarks::{build_benchmark, BenchmarkId};
//! use ccopt::cc::{run_variant, CcConfig, Variant};
//!
//! let problem = build_benchmark(BenchmarkId::F1, 10, 5, 0).unwrap();
//! let config = CcConfig { max_fes: 5_000, ..CcConfig::default() };
//! let result = run_variant(Variant::Asmcc, &problem, &config, 1).unwrap();
//! assert!(result.fes_used <= 5_000);
//! assert!(result.f_star < 1e-6);
//! ```

pub mod benchmarks;
pub mod cc;
pub mod decomposition;
pub mod error;
pub mod harness;
pub mod pr_search;
pub mod problem;
pub mod rbf_shade;
pub mod shade;
pub mod surrogates;

pub use error::{CcError, Result};
pub use problem::{Bounds, GroupStructure, Objective, Problem};
