//! Numerical normal forms at fixed points of planar map germs, with
//! quasiconformal diagnostics: Koenigs and Boettcher coordinates, Beltrami
//! fields and modulus curves, control-condition checks, and explicit
//! holomorphic motions with measured dilatation.

pub mod boettcher;
pub mod cxserde;
pub mod dilatation;
pub mod error;
pub mod export;
pub mod grid;
pub mod koenigs;
pub mod map;
pub mod motion;

pub use boettcher::{
    boettcher_coordinate, boettcher_psi_at, boettcher_uniqueness, covering_lift_h,
    covering_lift_phi, normalize_leading, BoettcherResult,
};
pub use dilatation::{
    beltrami_field, beltrami_field_fn, compose_dilatation, dilatation_k, holder_mu_bound_check,
    omega_curve, tilde_omega, wirtinger, BeltramiField, ModulusCurve, PowerFit,
};
pub use error::{GermError, Result};
pub use grid::PolarGrid;
pub use koenigs::{
    annulus_lift_phi, classify_fixed_point, control_condition, koenigs_backward, koenigs_forward,
    koenigs_psi_at, uniqueness_check, ControlReport, CoordinateGrid, EstimationMethod,
    FixedPointClass, FixedPointReport, LiftResult,
};
pub use map::{moebius_germ, EvalBudget, MapSpec};
pub use motion::{
    build_motion_boettcher, build_motion_custom, build_motion_koenig, check_motion_axioms,
    default_c_samples, extend_motion_radial, motion_dilatation_bound, Circle, ExtendedMotion,
    MotionAxiomReport, MotionEval, MotionKind, MotionSample,
};

pub use num_complex::Complex64;
