//! Linear special Lagrangian geometry on flat hyperkähler R^8, machine-checked.
//!
//! The crate builds the quaternionic linear model (metric, complex-structure
//! triple, Kähler forms, holomorphic volume forms), evaluates calibrations on
//! oriented 4-planes, classifies planes into Lagrangian / symplectic / complex
//! configurations, and runs seeded verification sweeps over the claims that
//! hold in this model: the bi-Lagrangian dichotomy on calibrated planes, the
//! case identities behind it, comass certification by Riemannian ascent, the
//! rotation/Wirtinger equivalence, label constancy along calibrated paths,
//! the real-linear coordinate change between holomorphic frames, and a flat
//! torus fibration analogue.
//!
//! Everything is deterministic per seed: sweeps derive one RNG stream per
//! trial, so results do not depend on the worker count.

pub mod cli;
pub mod exterior;
pub mod fibration;
pub mod frame;
pub mod grassmann;
pub mod rng;
pub mod verify;

use thiserror::Error;

/// 3-vector on (or near) the twistor sphere S^2.
pub type Vec3 = nalgebra::SVector<f64, 3>;
pub type Mat3 = nalgebra::SMatrix<f64, 3, 3>;
/// Ambient vector in R^8.
pub type Vec8 = nalgebra::SVector<f64, 8>;
pub type Mat8 = nalgebra::SMatrix<f64, 8, 8>;
pub type Mat4 = nalgebra::SMatrix<f64, 4, 4>;
/// Ordered 4-frame in R^8, one column per frame vector.
pub type FrameMat = nalgebra::SMatrix<f64, 8, 4>;
pub type Complex = nalgebra::Complex<f64>;
pub type CMat4 = nalgebra::SMatrix<Complex, 4, 4>;

/// Tolerance for structural identities on the standard frame (quaternion
/// relations, isometry). All quantities are O(1) on unit-normalized data.
pub const TOL_EXACT: f64 = 1e-12;
/// Tolerance for derived identities (rotated operators, random-axis checks).
pub const TOL_DERIVED: f64 = 1e-10;
/// Orthonormality tolerance on input frames; frames are re-orthonormalized
/// on construction, not at each call.
pub const TOL_FRAME: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum Error {
    #[error("axis has norm {norm:.6e}; pass a unit 3-vector (divide by its norm first)")]
    NonUnitAxis { norm: f64 },
    #[error("triple is not a right-handed orthonormal frame of S^2: {detail}")]
    BadTriple { detail: String },
    #[error("hyperkähler structure invariant violated: {detail}")]
    BadStructure { detail: String },
    #[error("not a proper rotation: {detail}")]
    BadRotation { detail: String },
    #[error("frame is not orthonormal: Gram residual {residual:.3e} exceeds {tol:.1e}")]
    FrameNotOrthonormal { residual: f64, tol: f64 },
    #[error("input columns are rank-deficient: numerical rank {rank} of 4, condition {cond:.3e}")]
    RankDeficient { rank: usize, cond: f64 },
    #[error("matrix is not antisymmetric: residual {residual:.3e}")]
    NotAntisymmetric { residual: f64 },
    #[error("coordinate frame is degenerate: realification is not invertible")]
    DegenerateCoordFrame,
    #[error("sampler projection collapsed {redraws} times in a row; constraint set too thin")]
    SamplerCollapse { redraws: u32 },
    #[error("fiber direction rejected: fails the {predicate} predicate")]
    NotSpecialLagrangian { predicate: String },
    #[error("integer spanning matrix has rank {rank}, need 4")]
    IntegerRankDeficient { rank: usize },
    #[error("calibrated path construction left the calibrated set at step {step} (re = {re:.12})")]
    PathLeftCalibratedSet { step: usize, re: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Largest absolute entry, the sup-norm used for residual reporting.
pub(crate) fn sup_norm<const R: usize, const C: usize>(
    m: &nalgebra::SMatrix<f64, R, C>,
) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}
