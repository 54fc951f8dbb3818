//! Flat-model Bargmann-Fock kernel calculus.
//!
//! Polynomial-times-Gaussian kernels on `C^n`, their closed-form
//! compositions, a Gauss-Hermite quadrature oracle that checks them,
//! Toeplitz-type model operators with their leading-term contractions, and
//! evaluators for curvature constants from sampled geometric data.

pub mod composition;
pub mod eigen;
pub mod error;
pub mod fock_oracle;
pub mod geometry;
pub mod golden;
pub mod json;
pub mod kernel;
pub mod ladder;
pub mod model_operators;
pub mod poly;
pub mod quadrature;
pub mod selftest;
pub mod testing;

pub use composition::{compose, compose_with_plan, k_base, k_e, k_ep, k_nm, k_prime_nm, plan, ComposePlan, Rule};
pub use error::{Error, Result};
pub use kernel::{kernel_eval, KernelExpr, KernelKind};
pub use ladder::{apply_ladder, apply_model_laplacian, Ladder};
pub use poly::{poly_arith, CMatrix, CPoint, Dims, Monomial, Parity, Poly, PolyOp, Slot, VarId, VarKind, C64};
pub use eigen::hermitian_eigs;
pub use fock_oracle::{
    check_composition, laplacian_eigencheck, norm_estimate, oracle_compose, standard_points, CompiledKernel, EigenCheck,
    FockIndex, KernelOperator, NormConfig, NormEstimate, OracleReport, PointPair,
};
pub use geometry::{c0, c3_c4, dp3, tower_dp3, GeometryData};
pub use model_operators::{
    bracket, c1_c2, flat_defect_checks, h_gp, lambda_a, lambda_eq, lambda_h, m_dagger, m_op, toeplitz_leading,
    CutoffSpec, Symbol, ToeplitzKind,
};
pub use quadrature::{GhRule, QuadGrid};
