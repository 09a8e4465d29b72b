//! Dense complex linear algebra on labelled multi-site Hilbert spaces.
//!
//! Everything here works on full `D x D` matrices. Sites are composed in
//! [`SiteRegistry`] order, time evolution goes through a cached Hermitian
//! eigendecomposition, and entropies are reported in bits.

mod operator;
pub mod pauli;
mod registry;
mod state;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use operator::{embed, evolve, hermitian_eig, EigenSystem, HermitianOperator, Propagator};
pub use registry::{dim_cap, Site, SiteRegistry, DEFAULT_DIM_CAP, DIM_CAP_ENV};
pub use state::{
    binary_entropy, entropy_of_spectrum, partial_trace, validate_state, von_neumann_entropy,
    von_neumann_entropy_with_clip, DensityMatrix, StateReport,
};

pub type CMatrix = DMatrix<Complex64>;

/// Hermiticity tolerance (max elementwise deviation from the adjoint).
pub const TOL_HERMITIAN: f64 = 1e-10;
/// Allowed deviation of a density matrix trace from one.
pub const TOL_TRACE: f64 = 1e-10;
/// Most negative eigenvalue still accepted as round-off.
pub const TOL_NEGATIVE_EIGENVALUE: f64 = 1e-9;
/// Eigenvalues below this contribute nothing to an entropy.
pub const ENTROPY_CLIP: f64 = 1e-12;

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest elementwise deviation of `U^dagger U` from the identity.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let id = CMatrix::identity(u.nrows(), u.ncols());
    (g - id).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest elementwise `|a - b|`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}
