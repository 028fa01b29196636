//! Arbitrary-order finite-difference formulas by deferred correction.
//!
//! Formulas are synthesized exactly over big rationals ([`defcor`]),
//! flattened to node/weight stencils and checked against an independent
//! moment-condition oracle ([`stencil`]), then evaluated in floating point
//! or exactly ([`numdiff`]).
//!
//! ```
//! use fdgen::{centered_formula, flatten, rat};
//!
//! let stencil = flatten(&centered_formula(1).unwrap()).unwrap();
//! assert_eq!(stencil.weights()[0], rat(1, 24));
//! ```

pub mod defcor;
pub mod error;
pub mod exactmath;
pub mod formula_id;
pub mod gridops;
pub mod numdiff;
pub mod scalar;
pub mod stencil;
pub mod taylorseries;

pub use defcor::{
    backward_centered, centered_average_formula, centered_formula, forward_centered, general_defcor, interior_centered,
    standard_backward, standard_forward, CorrectionFormula, Family, Term,
};
pub use error::{FdError, Result};
pub use exactmath::{format_rational, int, parse_rational, rat};
pub use formula_id::FormulaId;
pub use gridops::{apply, expand, GridFunction, OperatorExpr, RawStencil};
pub use numdiff::{apply_stencil, apply_to_samples, convergence_study, ConvergenceReport, Evaluator};
pub use scalar::Scalar;
pub use stencil::{flatten, oracle_weights, verify, Provenance, Stencil, VerifyReport};
pub use taylorseries::{error_series, ErrorSeries};

/// Exact coefficients: arbitrary-precision rationals in lowest terms.
pub type Rational = num_rational::BigRational;

pub type ExactGrid = GridFunction<Rational>;
pub type Grid64 = GridFunction<f64>;
pub type Evaluator64 = Evaluator<f64>;
pub type Evaluator32 = Evaluator<f32>;
