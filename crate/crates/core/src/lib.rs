//! Spectra, nodal classification and nonlinear solvers for `−u″ = λu` on
//! `(−1, 1)` under multi-point Sturm–Liouville boundary conditions.
//!
//! Every numerical routine is generic over [`Real`] (`f32` or `f64`); the
//! `*64` and `*32` aliases below fix the scalar type.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod scalar;
pub mod problem;
pub mod trig;
pub mod roots;
pub mod reference;
pub mod spectrum;
pub mod nodal;
pub mod conditions;
pub mod expr;
pub mod quadrature;
pub mod nonlinearity;
pub mod ode;
pub mod shooting;
pub mod bifurcation;
pub mod sampling;

pub use bifurcation::{
    branch_from_infinity, branch_from_zero, branch_nodal_audit, nodal_solutions_at_one, AuditReport, Branch,
    BranchError, BranchOptions, BranchPoint, NodalSolutions, NodalSolveError, Termination,
};
pub use conditions::{predict_nodal_class, Prediction, TheoremTag, Verdict};
pub use expr::{parse_expr, Expr, ParseError};
pub use nodal::{classify, Classification, Family, FunctionTrace, NodalClass, SampledTrace, Sign};
pub use nonlinearity::{certify_hypotheses, Certificate, Envelope, ForcingTerm, NonlinearitySpec};
pub use problem::{scale_coefficients, validate_problem, BoundarySide, HypothesisLevel, ProblemSpec, Side, ValidationReport};
pub use scalar::Real;
pub use shooting::{nonresonance_check, solve_bvp, solve_multistart, BvpSystem, SampledSolution, SolveError, SolveOptions};
pub use spectrum::{continuation_window, eigen_continuation, eigen_scan, Eigenpair, SpectrumError, SpectrumWindow};

pub type ProblemSpec64 = ProblemSpec<f64>;
pub type ProblemSpec32 = ProblemSpec<f32>;
pub type Eigenpair64 = Eigenpair<f64>;
pub type Eigenpair32 = Eigenpair<f32>;
pub type NonlinearitySpec64 = NonlinearitySpec<f64>;
pub type NonlinearitySpec32 = NonlinearitySpec<f32>;
pub type SampledSolution64 = SampledSolution<f64>;
pub type SampledSolution32 = SampledSolution<f32>;
pub type Branch64 = Branch<f64>;
pub type Branch32 = Branch<f32>;
