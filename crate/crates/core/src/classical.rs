//! Classical bivariate information flow for deterministic planar systems.
//!
//! A density on a rectangular grid is advected by the continuity equation
//! `d rho/dt + div(F rho) = 0`. The rate of information flow from `x2` to
//! `x1` is
//!
//! ```text
//! T_{2->1} = -E[ F1 (d rho1/dx1) / rho1 + dF1/dx1 ]
//! ```
//!
//! reported in bits per unit time.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Marginals below this floor are excluded from the flow quotient.
pub const MARGINAL_FLOOR: f64 = 1e-14;
/// Largest mass allowed in the outermost ring of cells.
pub const MAX_BOUNDARY_MASS: f64 = 1e-6;
/// Largest Courant number accepted by [`evolve_density`].
pub const MAX_COURANT: f64 = 0.5;
/// Convention used by [`marginal_entropy`] and [`joint_entropy`].
pub const ENTROPY_CONVENTION: &str = "differential entropy in bits: -sum p log2 p * dx over cell-centre densities";

type Component = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X1 => Axis::X2,
            Axis::X2 => Axis::X1,
        }
    }
}

/// Rectangular domain `[a1, b1] x [a2, b2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domain {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

impl Domain {
    pub fn new(x1: (f64, f64), x2: (f64, f64)) -> Result<Self> {
        for (a, b) in [x1, x2] {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
            }
        }
        Ok(Self { x1, x2 })
    }

    /// The square `[-half, half]^2`.
    pub fn square(half: f64) -> Result<Self> {
        Self::new((-half, half), (-half, half))
    }
}

/// Planar vector field `F = (F1, F2)`.
pub struct VectorField2D {
    f1: Component,
    f2: Component,
    df1_dx1: Option<Component>,
    df2_dx2: Option<Component>,
}

impl std::fmt::Debug for VectorField2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorField2D")
            .field("analytic_df1", &self.df1_dx1.is_some())
            .field("analytic_df2", &self.df2_dx2.is_some())
            .finish()
    }
}

impl VectorField2D {
    /// Field whose diagonal derivatives are taken by central differences.
    pub fn new(
        f1: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        f2: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { f1: Box::new(f1), f2: Box::new(f2), df1_dx1: None, df2_dx2: None }
    }

    /// Supplies `dF1/dx1` and `dF2/dx2` in closed form.
    pub fn with_derivatives(
        mut self,
        df1_dx1: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        df2_dx2: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.df1_dx1 = Some(Box::new(df1_dx1));
        self.df2_dx2 = Some(Box::new(df2_dx2));
        self
    }

    /// Linear field `F = M x`.
    pub fn linear(m: [[f64; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = m;
        Self::new(move |x1, x2| a * x1 + b * x2, move |x1, x2| c * x1 + d * x2)
            .with_derivatives(move |_, _| a, move |_, _| d)
    }

    pub fn component(&self, axis: Axis, x1: f64, x2: f64) -> f64 {
        match axis {
            Axis::X1 => (self.f1)(x1, x2),
            Axis::X2 => (self.f2)(x1, x2),
        }
    }

    /// `dF_axis / dx_axis`.
    pub fn diagonal_derivative(&self, axis: Axis, x1: f64, x2: f64) -> f64 {
        let analytic = match axis {
            Axis::X1 => &self.df1_dx1,
            Axis::X2 => &self.df2_dx2,
        };
        if let Some(d) = analytic {
            return d(x1, x2);
        }
        let x = match axis {
            Axis::X1 => x1,
            Axis::X2 => x2,
        };
        let h = 1e-6 * x.abs().max(1.0);
        let (p, m) = match axis {
            Axis::X1 => (self.component(axis, x1 + h, x2), self.component(axis, x1 - h, x2)),
            Axis::X2 => (self.component(axis, x1, x2 + h), self.component(axis, x1, x2 - h)),
        };
        (p - m) / (2.0 * h)
    }

    pub fn divergence(&self, x1: f64, x2: f64) -> f64 {
        self.diagonal_derivative(Axis::X1, x1, x2) + self.diagonal_derivative(Axis::X2, x1, x2)
    }
}

/// Nonnegative cell-centred density on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid {
    domain: Domain,
    n1: usize,
    n2: usize,
    /// Row-major, `values[i1 * n2 + i2]`.
    values: Vec<f64>,
}

impl DensityGrid {
    /// Samples `f` at cell centres and normalizes to unit mass.
    pub fn from_fn(domain: Domain, n1: usize, n2: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if n1 < 3 || n2 < 3 {
            return Err(Error::InvalidArgument(format!("grid {n1}x{n2} is too small")));
        }
        let mut grid = Self { domain, n1, n2, values: vec![0.0; n1 * n2] };
        for i in 0..n1 {
            for j in 0..n2 {
                grid.values[i * n2 + j] = f(grid.x1(i), grid.x2(j));
            }
        }
        if grid.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidState("density must be finite and nonnegative".into()));
        }
        let mass = grid.mass();
        if mass <= 0.0 {
            return Err(Error::InvalidState("density has zero mass".into()));
        }
        grid.values.iter_mut().for_each(|v| *v /= mass);
        Ok(grid)
    }

    /// Centred Gaussian with covariance `cov`.
    pub fn gaussian(domain: Domain, n1: usize, n2: usize, cov: [[f64; 2]; 2]) -> Result<Self> {
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        if !(det > 0.0 && cov[0][0] > 0.0) || (cov[0][1] - cov[1][0]).abs() > 1e-12 {
            return Err(Error::InvalidArgument("covariance must be symmetric positive definite".into()));
        }
        let (p11, p12, p22) = (cov[1][1] / det, -cov[0][1] / det, cov[0][0] / det);
        Self::from_fn(domain, n1, n2, |x, y| (-0.5 * (p11 * x * x + 2.0 * p12 * x * y + p22 * y * y)).exp())
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.values[i1 * self.n2 + i2]
    }

    pub fn dx1(&self) -> f64 {
        (self.domain.x1.1 - self.domain.x1.0) / self.n1 as f64
    }

    pub fn dx2(&self) -> f64 {
        (self.domain.x2.1 - self.domain.x2.0) / self.n2 as f64
    }

    pub fn x1(&self, i: usize) -> f64 {
        self.domain.x1.0 + (i as f64 + 0.5) * self.dx1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        self.domain.x2.0 + (j as f64 + 0.5) * self.dx2()
    }

    fn cell_area(&self) -> f64 {
        self.dx1() * self.dx2()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// Mass held by the outermost ring of cells.
    pub fn boundary_mass(&self) -> f64 {
        let (n1, n2) = (self.n1, self.n2);
        let mut sum = 0.0;
        for i in 0..n1 {
            for j in 0..n2 {
                if i == 0 || j == 0 || i == n1 - 1 || j == n2 - 1 {
                    sum += self.get(i, j);
                }
            }
        }
        sum * self.cell_area()
    }

    /// Marginal density along `axis`, at that axis's cell centres.
    pub fn marginal(&self, axis: Axis) -> Vec<f64> {
        match axis {
            Axis::X1 => (0..self.n1)
                .map(|i| self.values[i * self.n2..(i + 1) * self.n2].iter().sum::<f64>() * self.dx2())
                .collect(),
            Axis::X2 => (0..self.n2).map(|j| (0..self.n1).map(|i| self.get(i, j)).sum::<f64>() * self.dx1()).collect(),
        }
    }

    fn spacing(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X1 => self.dx1(),
            Axis::X2 => self.dx2(),
        }
    }

    fn check_boundary(&self) -> Result<()> {
        let b = self.boundary_mass();
        if b > MAX_BOUNDARY_MASS {
            return Err(Error::InvalidState(format!(
                "boundary mass {b:.3e} exceeds {MAX_BOUNDARY_MASS:e}; enlarge the domain"
            )));
        }
        Ok(())
    }
}

/// Entropy value together with the convention used to compute it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub bits: f64,
    pub convention: &'static str,
}

fn differential_entropy(density: &[f64], cell: f64) -> f64 {
    -density.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>() * cell
}

pub fn marginal_entropy(rho: &DensityGrid, axis: Axis) -> EntropyEstimate {
    EntropyEstimate {
        bits: differential_entropy(&rho.marginal(axis), rho.spacing(axis)),
        convention: ENTROPY_CONVENTION,
    }
}

pub fn joint_entropy(rho: &DensityGrid) -> EntropyEstimate {
    EntropyEstimate { bits: differential_entropy(&rho.values, rho.cell_area()), convention: ENTROPY_CONVENTION }
}

/// Largest Courant number `|F| dt / dx` over the grid faces.
pub fn courant_number(rho: &DensityGrid, field: &VectorField2D, dt: f64) -> f64 {
    let (n1, n2) = rho.shape();
    let (dx1, dx2) = (rho.dx1(), rho.dx2());
    let mut worst = 0.0f64;
    for i in 0..n1 {
        for j in 0..n2 {
            let (x, y) = (rho.x1(i), rho.x2(j));
            worst =
                worst.max(field.component(Axis::X1, x, y).abs() / dx1).max(field.component(Axis::X2, x, y).abs() / dx2);
        }
    }
    worst * dt.abs()
}

fn van_leer(a: f64, b: f64) -> f64 {
    if a * b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

/// Face velocities, averaged from the neighbouring cell centres. Faces on
/// the domain boundary carry zero flux.
struct FaceVelocities {
    /// `u[i * n2 + j]`: face between cells `(i, j)` and `(i + 1, j)`.
    u: Vec<f64>,
    /// `v[i * n2 + j]`: face between cells `(i, j)` and `(i, j + 1)`.
    v: Vec<f64>,
}

impl FaceVelocities {
    fn new(rho: &DensityGrid, field: &VectorField2D) -> Self {
        let (n1, n2) = rho.shape();
        let mut f1 = vec![0.0; n1 * n2];
        let mut f2 = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                let (x, y) = (rho.x1(i), rho.x2(j));
                f1[i * n2 + j] = field.component(Axis::X1, x, y);
                f2[i * n2 + j] = field.component(Axis::X2, x, y);
            }
        }
        let mut u = vec![0.0; n1 * n2];
        let mut v = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                let k = i * n2 + j;
                if i + 1 < n1 {
                    u[k] = 0.5 * (f1[k] + f1[k + n2]);
                }
                if j + 1 < n2 {
                    v[k] = 0.5 * (f2[k] + f2[k + 1]);
                }
            }
        }
        Self { u, v }
    }
}

/// Upwinded flux through the face after cell `k` along a line with stride
/// `s`, using limited linear reconstruction.
fn face_flux(r: &[f64], k: usize, s: usize, pos: usize, len: usize, vel: f64) -> f64 {
    let slope = |c: usize, p: usize| {
        if p == 0 || p + 1 == len {
            0.0
        } else {
            van_leer(r[c] - r[c - s], r[c + s] - r[c])
        }
    };
    if vel > 0.0 {
        vel * (r[k] + 0.5 * slope(k, pos))
    } else {
        vel * (r[k + s] - 0.5 * slope(k + s, pos + 1))
    }
}

fn advection_rhs(r: &[f64], faces: &FaceVelocities, n1: usize, n2: usize, dx1: f64, dx2: f64) -> Vec<f64> {
    (0..n1)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..n2).map(move |j| {
                let flux1 = |ii: usize| {
                    let kk = ii * n2 + j;
                    face_flux(r, kk, n2, ii, n1, faces.u[kk])
                };
                let flux2 = |jj: usize| {
                    let kk = i * n2 + jj;
                    face_flux(r, kk, 1, jj, n2, faces.v[kk])
                };
                let out1 = if i + 1 < n1 { flux1(i) } else { 0.0 };
                let in1 = if i > 0 { flux1(i - 1) } else { 0.0 };
                let out2 = if j + 1 < n2 { flux2(j) } else { 0.0 };
                let in2 = if j > 0 { flux2(j - 1) } else { 0.0 };
                -(out1 - in1) / dx1 - (out2 - in2) / dx2
            })
        })
        .collect()
}

/// Advances `rho` by `steps` steps of size `dt` (negative `dt` runs
/// backwards) with a conservative second-order finite-volume scheme:
/// van Leer limited reconstruction, upwind face fluxes and Heun time
/// stepping. Boundary faces carry no flux, so mass is conserved exactly.
pub fn evolve_density(rho: &DensityGrid, field: &VectorField2D, dt: f64, steps: usize) -> Result<DensityGrid> {
    if !dt.is_finite() {
        return Err(Error::InvalidArgument("time step must be finite".into()));
    }
    let c = courant_number(rho, field, dt);
    if c >= MAX_COURANT {
        return Err(Error::Stability(format!("Courant number {c:.3} is not below {MAX_COURANT}")));
    }
    let (n1, n2) = rho.shape();
    let (dx1, dx2) = (rho.dx1(), rho.dx2());
    let faces = FaceVelocities::new(rho, field);
    let mut r = rho.values.clone();
    for _ in 0..steps {
        let k1 = advection_rhs(&r, &faces, n1, n2, dx1, dx2);
        let stage: Vec<f64> = r.iter().zip(&k1).map(|(a, b)| a + dt * b).collect();
        let k2 = advection_rhs(&stage, &faces, n1, n2, dx1, dx2);
        r.par_iter_mut().zip(stage.par_iter().zip(k2.par_iter())).for_each(|(x, (s, k))| *x = 0.5 * (*x + s + dt * k));
    }
    Ok(DensityGrid { values: r, ..rho.clone() })
}

/// Central differences in the interior, one-sided at the ends.
fn gradient(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|k| match k {
            0 => (values[1] - values[0]) / h,
            k if k == n - 1 => (values[n - 1] - values[n - 2]) / h,
            k => (values[k + 1] - values[k - 1]) / (2.0 * h),
        })
        .collect()
}

/// Rate of information flow into `target` from the other coordinate, in
/// bits per unit time.
pub fn classical_flow_rate(rho: &DensityGrid, field: &VectorField2D, target: Axis) -> Result<f64> {
    rho.check_boundary()?;
    let marginal = rho.marginal(target);
    let grad = gradient(&marginal, rho.spacing(target));
    let quotient: Vec<f64> =
        marginal.iter().zip(&grad).map(|(&m, &g)| if m > MARGINAL_FLOOR { g / m } else { 0.0 }).collect();
    let (n1, n2) = rho.shape();
    let integral: f64 = (0..n1)
        .into_par_iter()
        .map(|i| {
            let mut row = 0.0;
            for j in 0..n2 {
                let (x, y) = (rho.x1(i), rho.x2(j));
                let q = match target {
                    Axis::X1 => quotient[i],
                    Axis::X2 => quotient[j],
                };
                let integrand = field.component(target, x, y) * q + field.diagonal_derivative(target, x, y);
                row += rho.get(i, j) * integrand;
            }
            row
        })
        .sum();
    Ok(-integral * rho.cell_area() / std::f64::consts::LN_2)
}
