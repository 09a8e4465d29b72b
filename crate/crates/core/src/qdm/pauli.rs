//! Single-qubit matrices in the computational basis `{|0>, |1>}` with
//! `sigma_z |0> = |0>`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CMatrix;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat2(a: [[Complex64; 2]; 2]) -> CMatrix {
    DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn sigma_x() -> CMatrix {
    mat2([[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]])
}

pub fn sigma_y() -> CMatrix {
    mat2([[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]])
}

pub fn sigma_z() -> CMatrix {
    mat2([[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]])
}

/// `(sigma_x + i sigma_y) / 2 = |0><1|`.
pub fn sigma_plus() -> CMatrix {
    mat2([[c(0., 0.), c(1., 0.)], [c(0., 0.), c(0., 0.)]])
}

/// `(sigma_x - i sigma_y) / 2 = |1><0|`.
pub fn sigma_minus() -> CMatrix {
    mat2([[c(0., 0.), c(0., 0.)], [c(1., 0.), c(0., 0.)]])
}

/// `|k><k|` on a `d`-level site.
pub fn projector(d: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(k, k)] = c(1., 0.);
    m
}
