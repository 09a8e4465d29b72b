use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use super::{
    hermiticity_deviation, CMatrix, SiteRegistry, ENTROPY_CLIP, TOL_HERMITIAN, TOL_NEGATIVE_EIGENVALUE, TOL_TRACE,
};
use crate::error::{Error, Result};

/// Trace-one positive Hermitian matrix on a registry's full space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    registry: SiteRegistry,
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(registry: SiteRegistry, entries: CMatrix) -> Result<Self> {
        let d = registry.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, registry dimension is {d}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let report = validate_state(&entries, TOL_HERMITIAN);
        if !report.hermitian_ok {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {:.3e})", report.hermiticity_deviation)));
        }
        if report.trace_deviation > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace deviates from 1 by {:.3e}", report.trace_deviation)));
        }
        if report.min_eigenvalue < -TOL_NEGATIVE_EIGENVALUE {
            return Err(Error::InvalidState(format!("negative eigenvalue {:.3e}", report.min_eigenvalue)));
        }
        Ok(Self { registry, entries })
    }

    pub(crate) fn from_parts(registry: SiteRegistry, entries: CMatrix) -> Self {
        Self { registry, entries }
    }

    /// `|psi><psi|` after normalizing `psi`.
    pub fn pure(registry: SiteRegistry, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != registry.dim() {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                registry.dim()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let psi = nalgebra::DVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|a| a / norm));
        Ok(Self::from_parts(registry, &psi * psi.adjoint()))
    }

    /// Tensor product of per-site states, given in registry order.
    pub fn product(registry: SiteRegistry, factors: &[CMatrix]) -> Result<Self> {
        if factors.len() != registry.len() {
            return Err(Error::InvalidState(format!("{} factors for {} sites", factors.len(), registry.len())));
        }
        let mut acc = CMatrix::identity(1, 1);
        for (site, f) in registry.sites().iter().zip(factors) {
            if f.nrows() != site.dim || f.ncols() != site.dim {
                return Err(Error::DimensionMismatch {
                    label: site.label.clone(),
                    expected: site.dim,
                    found: f.nrows().max(f.ncols()),
                });
            }
            // validates each factor as a density matrix in its own right
            let single = SiteRegistry::with_cap([(site.label.clone(), site.dim)], usize::MAX)?;
            DensityMatrix::new(single, f.clone())?;
            acc = acc.kronecker(f);
        }
        Ok(Self::from_parts(registry, acc))
    }

    pub fn maximally_mixed(registry: SiteRegistry) -> Self {
        let d = registry.dim();
        let entries = CMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        Self::from_parts(registry, entries)
    }

    pub fn registry(&self) -> &SiteRegistry {
        &self.registry
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.registry.dim()
    }

    pub fn report(&self, tol: f64) -> StateReport {
        validate_state(&self.entries, tol)
    }
}

/// Contracts every site not in `keep`. The result registry lists the kept
/// sites in their original order.
pub fn partial_trace<S: AsRef<str>>(rho: &DensityMatrix, keep: &[S]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let reg = rho.registry();
    let kept = reg.subset(keep)?;
    if kept.len() == reg.len() {
        return Ok(rho.clone());
    }
    let strides = reg.strides();
    let dims: Vec<usize> = reg.sites().iter().map(|s| s.dim).collect();
    let is_kept: Vec<bool> = reg.sites().iter().map(|s| kept.contains(&s.label)).collect();

    // flat index -> (index in kept space, index in traced space)
    let d = reg.dim();
    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
    let traced_dim: usize = dims.iter().zip(&is_kept).filter(|(_, &k)| !k).map(|(d, _)| d).product();
    groups.resize(traced_dim, Vec::new());
    for i in 0..d {
        let (mut ki, mut ti) = (0usize, 0usize);
        for k in 0..dims.len() {
            let digit = (i / strides[k]) % dims[k];
            if is_kept[k] {
                ki = ki * dims[k] + digit;
            } else {
                ti = ti * dims[k] + digit;
            }
        }
        groups[ti].push((i, ki));
    }

    let dk = kept.dim();
    let mut out = CMatrix::zeros(dk, dk);
    for group in &groups {
        for &(i, ki) in group {
            for &(j, kj) in group {
                out[(ki, kj)] += rho.entries()[(i, j)];
            }
        }
    }
    Ok(DensityMatrix::from_parts(kept, out))
}

/// Von Neumann entropy in bits with the default eigenvalue clip.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    von_neumann_entropy_with_clip(rho, ENTROPY_CLIP)
}

/// Von Neumann entropy in bits; eigenvalues below `clip` contribute zero.
pub fn von_neumann_entropy_with_clip(rho: &DensityMatrix, clip: f64) -> Result<f64> {
    let spectrum = hermitian_spectrum(rho.entries());
    entropy_of_spectrum(&spectrum, clip)
}

/// `-sum p log2 p` over a spectrum. Negative round-off in
/// `[-1e-9, 0)` is zeroed and the remainder renormalized.
pub fn entropy_of_spectrum(spectrum: &[f64], clip: f64) -> Result<f64> {
    let min = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -TOL_NEGATIVE_EIGENVALUE {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    let total: f64 = spectrum.iter().map(|&p| p.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::InvalidState("zero trace".into()));
    }
    Ok(spectrum.iter().map(|&p| p.max(0.0) / total).filter(|&p| p >= clip).map(|p| -p * p.log2()).sum::<f64>().max(0.0))
}

/// Shannon entropy of `(p, 1 - p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    [p, 1.0 - p].iter().filter(|&&x| x >= ENTROPY_CLIP).map(|&x| -x * x.log2()).sum()
}

fn hermitian_spectrum(m: &CMatrix) -> Vec<f64> {
    match m.nrows() {
        1 => vec![m[(0, 0)].re],
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(0, 1)];
            let mean = 0.5 * (a + d);
            let gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            vec![mean - gap, mean + gap]
        }
        _ => {
            let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
            SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect()
        }
    }
}

/// Diagnostic report on a candidate density matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateReport {
    pub hermiticity_deviation: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub hermitian_ok: bool,
    pub trace_ok: bool,
    pub positive_ok: bool,
}

impl StateReport {
    pub fn passed(&self) -> bool {
        self.hermitian_ok && self.trace_ok && self.positive_ok
    }
}

/// Checks Hermiticity, unit trace and positivity against `tol`.
/// The positivity check uses `max(tol, 1e-9)` as the negative-eigenvalue floor.
pub fn validate_state(m: &CMatrix, tol: f64) -> StateReport {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return StateReport {
            hermiticity_deviation: f64::INFINITY,
            trace_deviation: f64::INFINITY,
            min_eigenvalue: f64::NEG_INFINITY,
            hermitian_ok: false,
            trace_ok: false,
            positive_ok: false,
        };
    }
    let hermiticity = hermiticity_deviation(m);
    let trace = m.trace();
    let trace_deviation = (trace - Complex64::new(1.0, 0.0)).norm();
    let min_eigenvalue = hermitian_spectrum(m).into_iter().fold(f64::INFINITY, f64::min);
    StateReport {
        hermiticity_deviation: hermiticity,
        trace_deviation,
        min_eigenvalue,
        hermitian_ok: hermiticity <= tol,
        trace_ok: trace_deviation <= tol,
        positive_ok: min_eigenvalue >= -tol.max(TOL_NEGATIVE_EIGENVALUE),
    }
}
