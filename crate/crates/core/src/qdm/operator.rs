use std::sync::{Arc, OnceLock};

use faer::{Mat, Side};
use nalgebra::DVector;
use num_complex::Complex64;

use super::{hermiticity_deviation, CMatrix, DensityMatrix, SiteRegistry, TOL_HERMITIAN};
use crate::error::{Error, Result};

/// Hermitian operator on a registry's full space. The eigendecomposition is
/// computed on first use and shared by clones.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    registry: SiteRegistry,
    entries: CMatrix,
    eig: Arc<OnceLock<Arc<EigenSystem>>>,
}

impl HermitianOperator {
    pub fn new(registry: SiteRegistry, entries: CMatrix) -> Result<Self> {
        let d = registry.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "operator is {}x{}, registry dimension is {d}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("operator has non-finite entries".into()));
        }
        let dev = hermiticity_deviation(&entries);
        if dev > TOL_HERMITIAN {
            return Err(Error::NonHermitian(dev));
        }
        Ok(Self::from_parts(registry, entries))
    }

    pub(crate) fn from_parts(registry: SiteRegistry, entries: CMatrix) -> Self {
        Self { registry, entries, eig: Arc::new(OnceLock::new()) }
    }

    pub fn zero(registry: SiteRegistry) -> Self {
        let d = registry.dim();
        Self::from_parts(registry, CMatrix::zeros(d, d))
    }

    pub fn registry(&self) -> &SiteRegistry {
        &self.registry
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.registry.dim()
    }

    /// Cached eigensystem.
    pub fn eigen(&self) -> Arc<EigenSystem> {
        self.eig.get_or_init(|| Arc::new(EigenSystem::decompose(&self.entries))).clone()
    }
}

/// `H = V diag(eigenvalues) V^dagger`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    fn decompose(h: &CMatrix) -> Self {
        let n = h.nrows();
        if n == 0 {
            return Self { eigenvalues: Vec::new(), eigenvectors: CMatrix::zeros(0, 0) };
        }
        // symmetrize away round-off before handing to the solver; nalgebra's
        // complex SymmetricEigen is unreliable on degenerate spectra
        let sym = Mat::<Complex64>::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
        let Ok(eig) = sym.self_adjoint_eigen(Side::Lower) else {
            // only reachable with non-finite entries; poison every result
            return Self {
                eigenvalues: vec![f64::NAN; n],
                eigenvectors: CMatrix::from_element(n, n, Complex64::new(f64::NAN, 0.0)),
            };
        };
        let (u, s) = (eig.U(), eig.S());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
        let eigenvalues = order.iter().map(|&k| s[k].re).collect();
        let eigenvectors = CMatrix::from_fn(n, n, |i, col| u[(i, order[col])]);
        Self { eigenvalues, eigenvectors }
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= s);
        }
        scaled * v.adjoint()
    }

    /// `exp(-i H t)`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        self.reconstruct_with(|lam| Complex64::new(0.0, -lam * t).exp())
    }
}

/// Eigendecomposition of a Hermitian operator.
pub fn hermitian_eig(h: &HermitianOperator) -> Result<Arc<EigenSystem>> {
    let dev = hermiticity_deviation(h.entries());
    if dev > TOL_HERMITIAN {
        return Err(Error::NonHermitian(dev));
    }
    Ok(h.eigen())
}

/// Embeds a product of single-site factors into the full space. Unlisted
/// sites carry the identity; repeated labels multiply in list order.
pub fn embed<S: AsRef<str>>(factors: &[(S, CMatrix)], registry: &SiteRegistry) -> Result<CMatrix> {
    let n_sites = registry.len();
    let mut local: Vec<Option<CMatrix>> = vec![None; n_sites];
    for (label, m) in factors {
        let label = label.as_ref();
        let k = registry.index_of(label)?;
        let d = registry.sites()[k].dim;
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                label: label.to_string(),
                expected: d,
                found: m.nrows().max(m.ncols()),
            });
        }
        local[k] = Some(match local[k].take() {
            Some(prev) => prev * m,
            None => m.clone(),
        });
    }

    let dim = registry.dim();
    let strides = registry.strides();
    let dims: Vec<usize> = registry.sites().iter().map(|s| s.dim).collect();
    let active: Vec<usize> = (0..n_sites).filter(|&k| local[k].is_some()).collect();
    let mut out = CMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; n_sites];
    let mut choice = vec![0usize; active.len()];

    for row in 0..dim {
        for k in 0..n_sites {
            digits[k] = (row / strides[k]) % dims[k];
        }
        // base column: row with every active digit zeroed
        let base = active.iter().fold(row, |acc, &k| acc - digits[k] * strides[k]);
        choice.iter_mut().for_each(|c| *c = 0);
        'odometer: loop {
            let mut col = base;
            let mut value = Complex64::new(1.0, 0.0);
            for (slot, &k) in active.iter().enumerate() {
                let m = local[k].as_ref().expect("active site has a factor");
                value *= m[(digits[k], choice[slot])];
                col += choice[slot] * strides[k];
            }
            if value != Complex64::new(0.0, 0.0) {
                out[(row, col)] += value;
            }
            for slot in (0..active.len()).rev() {
                choice[slot] += 1;
                if choice[slot] < dims[active[slot]] {
                    continue 'odometer;
                }
                choice[slot] = 0;
            }
            break;
        }
    }
    Ok(out)
}

/// `U(t) rho U(t)^dagger` with `U(t) = exp(-i H t)`.
///
/// The eigensystem is cached on `h`; evaluating many times against the same
/// operator only decomposes once. `t == 0` returns `rho` unchanged.
pub fn evolve(rho: &DensityMatrix, h: &HermitianOperator, t: f64) -> Result<DensityMatrix> {
    if rho.registry() != h.registry() {
        return Err(Error::RegistryMismatch);
    }
    if t == 0.0 {
        return Ok(rho.clone());
    }
    Ok(Propagator::new(h).evolve(rho, t))
}

/// Time evolution under a fixed Hamiltonian, working in its eigenbasis.
#[derive(Debug, Clone)]
pub struct Propagator {
    registry: SiteRegistry,
    eig: Arc<EigenSystem>,
}

impl Propagator {
    pub fn new(h: &HermitianOperator) -> Self {
        Self { registry: h.registry().clone(), eig: h.eigen() }
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eig
    }

    /// Caller guarantees `rho` shares this propagator's registry.
    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> DensityMatrix {
        debug_assert_eq!(rho.registry(), &self.registry);
        if t == 0.0 {
            return rho.clone();
        }
        let in_eigenbasis = self.to_eigenbasis(rho);
        self.evolve_from_eigenbasis(&in_eigenbasis, t)
    }

    /// `V^dagger rho V`, the starting point for [`Self::evolve_from_eigenbasis`].
    pub fn to_eigenbasis(&self, rho: &DensityMatrix) -> CMatrix {
        let v = &self.eig.eigenvectors;
        v.adjoint() * rho.entries() * v
    }

    /// Evolves a state already expressed in the eigenbasis; avoids repeating
    /// the basis change over a time grid.
    pub fn evolve_from_eigenbasis(&self, w: &CMatrix, t: f64) -> DensityMatrix {
        let lam = &self.eig.eigenvalues;
        let phases: DVector<Complex64> =
            DVector::from_iterator(lam.len(), lam.iter().map(|&l| Complex64::new(0.0, -l * t).exp()));
        let mut rotated = w.clone();
        for j in 0..lam.len() {
            let pj = phases[j].conj();
            for i in 0..lam.len() {
                rotated[(i, j)] *= phases[i] * pj;
            }
        }
        let v = &self.eig.eigenvectors;
        let entries = v * rotated * v.adjoint();
        DensityMatrix::from_parts(self.registry.clone(), entries)
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        self.eig.unitary(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdm::{max_abs_diff, pauli, unitarity_deviation};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a.kronecker(b)
    }

    #[test]
    fn embed_single_factor_is_kron_with_identity() {
        let reg = SiteRegistry::qubits(["A", "B"]).unwrap();
        let m = embed(&[("A", pauli::sigma_z())], &reg).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(m.iter().filter(|z| z.norm() > 0.0).count(), 4);
    }

    #[test]
    fn embed_two_site_product_matches_brute_force_kron() {
        let reg = SiteRegistry::qubits(["A", "B", "C"]).unwrap();
        let m = embed(&[("A", pauli::sigma_plus()), ("C", pauli::sigma_minus())], &reg).unwrap();
        let oracle = kron(&kron(&pauli::sigma_plus(), &pauli::identity(2)), &pauli::sigma_minus());
        assert_eq!(m, oracle);
        assert_eq!(m.iter().filter(|z| z.norm() > 0.0).count(), 2);
    }

    #[test]
    fn embed_empty_product_is_identity() {
        let reg = SiteRegistry::qubits(["A", "B"]).unwrap();
        let m = embed::<&str>(&[], &reg).unwrap();
        assert_eq!(m, CMatrix::identity(4, 4));
    }

    #[test]
    fn embed_mixed_dimensions() {
        let reg = SiteRegistry::new([("A", 2), ("Q", 3)]).unwrap();
        let mut x3 = CMatrix::zeros(3, 3);
        x3[(0, 2)] = c(1.0);
        x3[(2, 0)] = c(1.0);
        let m = embed(&[("Q", x3.clone()), ("A", pauli::sigma_x())], &reg).unwrap();
        assert_eq!(m, kron(&pauli::sigma_x(), &x3));
    }

    #[test]
    fn embed_errors() {
        let reg = SiteRegistry::qubits(["A", "B"]).unwrap();
        assert_eq!(embed(&[("Z", pauli::sigma_z())], &reg), Err(Error::UnknownLabel("Z".into())));
        assert!(matches!(
            embed(&[("A", pauli::identity(3))], &reg),
            Err(Error::DimensionMismatch { expected: 2, found: 3, .. })
        ));
    }

    #[test]
    fn embed_repeated_label_multiplies() {
        let reg = SiteRegistry::qubits(["A"]).unwrap();
        let m = embed(&[("A", pauli::sigma_plus()), ("A", pauli::sigma_minus())], &reg).unwrap();
        assert_eq!(m, pauli::projector(2, 0));
    }

    #[test]
    fn eig_of_paulis() {
        let reg = SiteRegistry::qubits(["A"]).unwrap();
        let z = HermitianOperator::new(reg.clone(), pauli::sigma_z()).unwrap();
        let ez = hermitian_eig(&z).unwrap();
        assert!((ez.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((ez.eigenvalues[1] - 1.0).abs() < 1e-12);

        let x = HermitianOperator::new(reg, pauli::sigma_x()).unwrap();
        let ex = hermitian_eig(&x).unwrap();
        assert!((ex.eigenvalues[0] + 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // (|0> - |1>)/sqrt2 up to a global phase
        let v0 = ex.eigenvectors.column(0);
        let phase = v0[0] / v0[0].norm();
        assert!((v0[0] / phase - c(s)).norm() < 1e-12);
        assert!((v0[1] / phase + c(s)).norm() < 1e-12);
    }

    #[test]
    fn xy_pair_spectrum() {
        let reg = SiteRegistry::qubits(["A", "B"]).unwrap();
        let h = embed(&[("A", pauli::sigma_plus()), ("B", pauli::sigma_minus())], &reg).unwrap()
            + embed(&[("A", pauli::sigma_minus()), ("B", pauli::sigma_plus())], &reg).unwrap();
        let h = HermitianOperator::new(reg, h).unwrap();
        let e = hermitian_eig(&h).unwrap();
        let expect = [-1.0, 0.0, 0.0, 1.0];
        for (a, b) in e.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let rebuilt = e.reconstruct_with(c);
        assert!(max_abs_diff(&rebuilt, h.entries()) < 1e-9);
        assert!(unitarity_deviation(&e.eigenvectors) < 1e-9);
    }

    #[test]
    fn non_hermitian_rejected() {
        let reg = SiteRegistry::qubits(["A"]).unwrap();
        assert!(matches!(HermitianOperator::new(reg, pauli::sigma_plus()), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn full_excitation_transfer_at_half_pi() {
        let reg = SiteRegistry::qubits(["A", "B"]).unwrap();
        let h = embed(&[("A", pauli::sigma_plus()), ("B", pauli::sigma_minus())], &reg).unwrap()
            + embed(&[("A", pauli::sigma_minus()), ("B", pauli::sigma_plus())], &reg).unwrap();
        let h = HermitianOperator::new(reg.clone(), h).unwrap();
        // |10> is basis index 2, |01> is index 1
        let rho = DensityMatrix::new(reg.clone(), pauli::projector(4, 2)).unwrap();
        let out = evolve(&rho, &h, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(max_abs_diff(out.entries(), &pauli::projector(4, 1)) < 1e-12);
    }

    #[test]
    fn evolve_at_zero_is_exact_and_registry_checked() {
        let reg = SiteRegistry::qubits(["A"]).unwrap();
        let h = HermitianOperator::new(reg.clone(), pauli::sigma_x()).unwrap();
        let rho = DensityMatrix::new(reg, pauli::projector(2, 0)).unwrap();
        let out = evolve(&rho, &h, 0.0).unwrap();
        assert_eq!(out.entries(), rho.entries());

        let other = SiteRegistry::qubits(["B"]).unwrap();
        let rho_b = DensityMatrix::new(other, pauli::projector(2, 0)).unwrap();
        assert_eq!(evolve(&rho_b, &h, 1.0).unwrap_err(), Error::RegistryMismatch);
    }
}
