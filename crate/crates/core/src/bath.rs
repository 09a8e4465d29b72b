//! Two qubits in a common zero-temperature bosonic reservoir, restricted to
//! the single-excitation sector.
//!
//! The rotating-wave Hamiltonian conserves the excitation number, so a state
//! with one excitation stays in the span of `|A excited>`, `|B excited>` and
//! `|mode k excited>`. The sector Hamiltonian is an `(N + 2)`-dimensional
//! real symmetric "arrow" matrix: diagonal energies plus couplings from each
//! qubit to every mode.
//!
//! The reservoir is a Lorentzian spectral density
//! `J(w) = (W_T^2 lambda / pi) / ((w - w0)^2 + lambda^2)` with `W_T = R lambda`,
//! discretized on a uniform window around `w0`.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{differentiate, FlowSeries, RateMode, TimeGrid, DEFAULT_RATE_STEP, MIN_RATE_STEP};
use crate::qdm::{binary_entropy, CMatrix, HermitianOperator, SiteRegistry};

pub const DEFAULT_MODES: usize = 401;
/// Half-width of the frequency window, in units of lambda.
pub const DEFAULT_CUTOFF_WIDTHS: f64 = 40.0;
const MIN_MODES: usize = 8;
const TOL_NORM: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianParams {
    pub lambda: f64,
    pub big_r: f64,
    #[serde(default)]
    pub omega0: f64,
    pub n_modes: usize,
    /// Half-width of the frequency window.
    pub cutoff_width: f64,
}

impl LorentzianParams {
    /// Defaults for `n_modes` and `cutoff_width`, resonant at `omega0 = 0`.
    pub fn new(lambda: f64, big_r: f64) -> Self {
        Self { lambda, big_r, omega0: 0.0, n_modes: DEFAULT_MODES, cutoff_width: DEFAULT_CUTOFF_WIDTHS * lambda }
    }

    pub fn with_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self
    }

    pub fn with_cutoff(mut self, width: f64) -> Self {
        self.cutoff_width = width;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReservoirSpec {
    /// `(omega_k, g_k)` pairs.
    pub modes: Vec<(f64, f64)>,
    pub omega0: f64,
    pub lambda: f64,
    pub big_r: f64,
}

impl ReservoirSpec {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn total_coupling_sq(&self) -> f64 {
        self.modes.iter().map(|(_, g)| g * g).sum()
    }
}

/// Discretizes the Lorentzian reservoir on `n_modes` uniformly spaced
/// frequencies in `[omega0 - cutoff, omega0 + cutoff]` with
/// `g_k^2 = J(omega_k) d_omega`.
pub fn discretize_lorentzian(p: LorentzianParams) -> Result<ReservoirSpec> {
    if !p.lambda.is_finite() || p.lambda <= 0.0 || !p.big_r.is_finite() || p.big_r < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need lambda > 0 and R >= 0, got lambda = {}, R = {}",
            p.lambda, p.big_r
        )));
    }
    if p.n_modes < MIN_MODES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_MODES} modes, got {}", p.n_modes)));
    }
    if p.cutoff_width < 10.0 * p.lambda {
        return Err(Error::InvalidArgument(format!("cutoff {} is narrower than 10 lambda", p.cutoff_width)));
    }
    let n = p.n_modes;
    let d_omega = 2.0 * p.cutoff_width / (n - 1) as f64;
    // the line must be resolved by several modes
    if d_omega > 0.5 * p.lambda {
        return Err(Error::Convergence(format!(
            "mode spacing {d_omega:.3} does not resolve spectral width {}",
            p.lambda
        )));
    }
    let rabi = p.big_r * p.lambda;
    let density = |w: f64| (rabi * rabi * p.lambda / PI) / ((w - p.omega0).powi(2) + p.lambda * p.lambda);
    let modes: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let w = p.omega0 - p.cutoff_width + k as f64 * d_omega;
            (w, (density(w) * d_omega).sqrt())
        })
        .collect();
    let spec = ReservoirSpec { modes, omega0: p.omega0, lambda: p.lambda, big_r: p.big_r };
    // Riemann sum against the window integral of J
    let window = rabi * rabi * (2.0 / PI) * (p.cutoff_width / p.lambda).atan();
    let sum = spec.total_coupling_sq();
    if window > 0.0 && ((sum - window) / window).abs() > 0.01 {
        return Err(Error::Convergence(format!(
            "sum g_k^2 = {sum:.4} misses the window integral {window:.4} by more than 1%"
        )));
    }
    Ok(spec)
}

/// Normalized couplings with `alpha_a / alpha_b = ratio` and
/// `alpha_a^2 + alpha_b^2 = 1`.
pub fn normalized_alphas(ratio: f64) -> (f64, f64) {
    let norm = (ratio * ratio + 1.0).sqrt();
    (ratio / norm, 1.0 / norm)
}

/// Real symmetric sector Hamiltonian in the basis
/// `(A excited, B excited, mode 1..N)`.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    matrix: DMatrix<f64>,
    eig: Arc<OnceLock<SymmetricEigen<f64, nalgebra::Dyn>>>,
}

impl SectorHamiltonian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn eigen(&self) -> &SymmetricEigen<f64, nalgebra::Dyn> {
        self.eig.get_or_init(|| SymmetricEigen::new(self.matrix.clone()))
    }

    /// The same matrix as a complex operator on a single `N + 2` level site.
    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let registry = SiteRegistry::with_cap([("sector", self.dim())], usize::MAX)?;
        let entries: CMatrix = self.matrix.map(|x| Complex64::new(x, 0.0));
        HermitianOperator::new(registry, entries)
    }
}

pub fn sector_hamiltonian(reservoir: &ReservoirSpec, alpha_a: f64, alpha_b: f64) -> SectorHamiltonian {
    let n = reservoir.n_modes();
    let mut h = DMatrix::<f64>::zeros(n + 2, n + 2);
    h[(0, 0)] = reservoir.omega0;
    h[(1, 1)] = reservoir.omega0;
    for (k, &(w, g)) in reservoir.modes.iter().enumerate() {
        let m = k + 2;
        h[(m, m)] = w;
        h[(0, m)] = alpha_a * g;
        h[(m, 0)] = alpha_a * g;
        h[(1, m)] = alpha_b * g;
        h[(m, 1)] = alpha_b * g;
    }
    SectorHamiltonian { matrix: h, eig: Arc::new(OnceLock::new()) }
}

/// Amplitudes of the single-excitation state.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    pub c_a: Complex64,
    pub c_b: Complex64,
    pub c_modes: Vec<Complex64>,
}

impl SingleExcitationState {
    /// Qubit amplitudes with the reservoir in vacuum.
    pub fn qubits(c_a: Complex64, c_b: Complex64, n_modes: usize) -> Result<Self> {
        let s = Self { c_a, c_b, c_modes: vec![Complex64::new(0.0, 0.0); n_modes] };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidState(format!("sector state has norm^2 {norm}")));
        }
        Ok(s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_a.norm_sqr() + self.c_b.norm_sqr() + self.c_modes.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn amplitude(&self, q: BathQubit) -> Complex64 {
        match q {
            BathQubit::A => self.c_a,
            BathQubit::B => self.c_b,
        }
    }

    fn to_vector(&self) -> DVector<Complex64> {
        let mut v = DVector::zeros(self.c_modes.len() + 2);
        v[0] = self.c_a;
        v[1] = self.c_b;
        for (k, c) in self.c_modes.iter().enumerate() {
            v[k + 2] = *c;
        }
        v
    }

    fn from_vector(v: &DVector<Complex64>) -> Self {
        Self { c_a: v[0], c_b: v[1], c_modes: v.iter().skip(2).cloned().collect() }
    }
}

/// Evolves a sector state; `t == 0` returns it unchanged.
pub fn evolve_sector(psi0: &SingleExcitationState, h: &SectorHamiltonian, t: f64) -> Result<SingleExcitationState> {
    if psi0.c_modes.len() + 2 != h.dim() {
        return Err(Error::InvalidArgument(format!(
            "state has {} modes, Hamiltonian has {}",
            psi0.c_modes.len(),
            h.dim() - 2
        )));
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    let eig = h.eigen();
    let coeffs = project(eig, &psi0.to_vector());
    Ok(SingleExcitationState::from_vector(&propagate(eig, &coeffs, t)))
}

fn project(eig: &SymmetricEigen<f64, nalgebra::Dyn>, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let v = &eig.eigenvectors;
    DVector::from_iterator(
        v.ncols(),
        (0..v.ncols()).map(|k| v.column(k).iter().zip(psi.iter()).map(|(a, b)| b * *a).sum()),
    )
}

fn propagate(eig: &SymmetricEigen<f64, nalgebra::Dyn>, coeffs: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
    let v = &eig.eigenvectors;
    let phased: DVector<Complex64> = DVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, &e)| c * Complex64::new(0.0, -e * t).exp()),
    );
    let mut out = DVector::zeros(v.nrows());
    for k in 0..v.ncols() {
        let p = phased[k];
        for (o, &x) in out.iter_mut().zip(v.column(k).iter()) {
            *o += p * x;
        }
    }
    out
}

/// Populations `|c(t)|^2` of one qubit on a grid.
fn population_series(h: &SectorHamiltonian, psi0: &SingleExcitationState, q: BathQubit, times: &[f64]) -> Vec<f64> {
    let eig = h.eigen();
    let coeffs = project(eig, &psi0.to_vector());
    let row = q.index();
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return psi0.amplitude(q).norm_sqr();
            }
            let v = &eig.eigenvectors;
            let amp: Complex64 = (0..v.ncols())
                .map(|k| coeffs[k] * Complex64::new(0.0, -eig.eigenvalues[k] * t).exp() * v[(row, k)])
                .sum();
            amp.norm_sqr()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BathQubit {
    A,
    B,
}

impl BathQubit {
    pub fn other(self) -> BathQubit {
        match self {
            BathQubit::A => BathQubit::B,
            BathQubit::B => BathQubit::A,
        }
    }

    fn index(self) -> usize {
        match self {
            BathQubit::A => 0,
            BathQubit::B => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BathQubit::A => "A",
            BathQubit::B => "B",
        }
    }

    pub fn from_label(s: &str) -> Result<BathQubit> {
        match s {
            "A" => Ok(BathQubit::A),
            "B" => Ok(BathQubit::B),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// Settings for [`bath_flow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathFlowRequest {
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub source: BathQubit,
    pub target: BathQubit,
    pub grid: TimeGrid,
    pub rate_mode: RateMode,
    pub rate_step: f64,
}

impl BathFlowRequest {
    pub fn new(alpha_a: f64, alpha_b: f64, source: BathQubit, grid: TimeGrid) -> Self {
        Self {
            alpha_a,
            alpha_b,
            source,
            target: source.other(),
            grid,
            rate_mode: RateMode::FromStart,
            rate_step: DEFAULT_RATE_STEP,
        }
    }

    fn frozen_alphas(&self) -> (f64, f64) {
        match self.source {
            BathQubit::A => (0.0, self.alpha_b),
            BathQubit::B => (self.alpha_a, 0.0),
        }
    }
}

/// Flow from `source` to the other qubit. The target's marginal is
/// diagonal in the sector, so its entropy is the binary entropy of its
/// excited population. Freezing drops the source's reservoir coupling.
pub fn bath_flow(psi0: &SingleExcitationState, reservoir: &ReservoirSpec, req: &BathFlowRequest) -> Result<FlowSeries> {
    if req.source == req.target {
        return Err(Error::TargetSourceOverlap(req.source.label().to_string()));
    }
    if psi0.c_modes.len() != reservoir.n_modes() {
        return Err(Error::InvalidArgument("state and reservoir disagree on mode count".into()));
    }
    let full = sector_hamiltonian(reservoir, req.alpha_a, req.alpha_b);
    let (fa, fb) = req.frozen_alphas();
    let frozen = sector_hamiltonian(reservoir, fa, fb);
    let times = req.grid.times();
    let s_target: Vec<f64> =
        population_series(&full, psi0, req.target, &times).into_iter().map(binary_entropy).collect();
    let s_target_frozen: Vec<f64> =
        population_series(&frozen, psi0, req.target, &times).into_iter().map(binary_entropy).collect();
    let cumulative: Vec<f64> = s_target.iter().zip(&s_target_frozen).map(|(a, b)| a - b).collect();
    let rate = match req.rate_mode {
        RateMode::FromStart => differentiate(&times, &cumulative),
        RateMode::Instantaneous => {
            times.iter().map(|&t| instantaneous_bath_rate(psi0, &full, &frozen, req, t)).collect::<Result<_>>()?
        }
    };
    Ok(FlowSeries {
        label: format!("{}->{}", req.source.label(), req.target.label()),
        times,
        s_target,
        s_target_frozen,
        cumulative,
        rate,
    })
}

fn instantaneous_bath_rate(
    psi0: &SingleExcitationState,
    full: &SectorHamiltonian,
    frozen: &SectorHamiltonian,
    req: &BathFlowRequest,
    t: f64,
) -> Result<f64> {
    let h = req.rate_step;
    if h.is_nan() || h < MIN_RATE_STEP {
        return Err(Error::InvalidArgument(format!("rate step {h:e} below {MIN_RATE_STEP:e}")));
    }
    let psi_t = evolve_sector(psi0, full, t)?;
    let s = |ham: &SectorHamiltonian, dt: f64| -> Result<f64> {
        Ok(binary_entropy(evolve_sector(&psi_t, ham, dt)?.amplitude(req.target).norm_sqr()))
    };
    Ok((s(full, h)? - s(full, -h)?) / (2.0 * h) - (s(frozen, h)? - s(frozen, -h)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn fig4_state(n: usize) -> SingleExcitationState {
        SingleExcitationState::qubits(c((2.0f64 / 3.0).sqrt()), c((1.0f64 / 3.0).sqrt()), n).unwrap()
    }

    #[test]
    fn zero_r_gives_zero_couplings() {
        let r = discretize_lorentzian(LorentzianParams::new(1.0, 0.0)).unwrap();
        assert!(r.modes.iter().all(|&(_, g)| g == 0.0));
    }

    #[test]
    fn default_discretization_captures_rabi_strength() {
        let r = discretize_lorentzian(LorentzianParams::new(1.0, 10.0)).unwrap();
        assert_eq!(r.n_modes(), 401);
        // (2/pi) atan(40) of the full weight lies inside the window
        let rel = r.total_coupling_sq() / 100.0;
        assert!((rel - 1.0).abs() < 0.02, "{rel}");
        assert!((r.modes[0].0 + 40.0).abs() < 1e-12 && (r.modes[400].0 - 40.0).abs() < 1e-12);
    }

    #[test]
    fn discretization_preconditions() {
        let base = LorentzianParams::new(1.0, 10.0);
        assert!(discretize_lorentzian(base.with_modes(4)).is_err());
        assert!(discretize_lorentzian(LorentzianParams { cutoff_width: 5.0, ..base }).is_err());
        assert!(matches!(discretize_lorentzian(base.with_modes(41)), Err(Error::Convergence(_))));
    }

    #[test]
    fn alpha_ratio_normalization() {
        let (a, b) = normalized_alphas(10.0);
        assert!((a - 10.0 / 101f64.sqrt()).abs() < 1e-15);
        assert!((a * a + b * b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sector_layout() {
        let r = discretize_lorentzian(LorentzianParams::new(1.0, 10.0).with_modes(41).with_cutoff(10.0)).unwrap();
        let h = sector_hamiltonian(&r, 0.8, 0.6);
        let m = h.matrix();
        assert_eq!(m.nrows(), 43);
        assert_eq!(m[(0, 1)], 0.0);
        assert_eq!(m[(2, 3)], 0.0);
        assert!((m[(0, 5)] - 0.8 * r.modes[3].1).abs() < 1e-15);
        assert!((m[(1, 5)] - 0.6 * r.modes[3].1).abs() < 1e-15);
        assert_eq!(m[(5, 5)], r.modes[3].0);
        assert!(h.to_operator().is_ok());

        let decoupled = sector_hamiltonian(&r, 1.0, 0.0);
        let dm = decoupled.matrix();
        assert!((0..43).filter(|&k| k != 1).all(|k| dm[(1, k)] == 0.0 && dm[(k, 1)] == 0.0));
    }

    #[test]
    fn symmetric_couplings_commute_with_swap() {
        let r = discretize_lorentzian(LorentzianParams::new(1.0, 5.0).with_modes(81).with_cutoff(10.0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = sector_hamiltonian(&r, s, s).matrix().clone();
        let mut p = m.clone();
        p.swap_rows(0, 1);
        p.swap_columns(0, 1);
        assert_eq!(m, p);
    }

    #[test]
    fn evolution_preserves_norm_and_is_exact_at_zero() {
        let r = discretize_lorentzian(LorentzianParams::new(1.0, 10.0)).unwrap();
        let (a, b) = normalized_alphas(10.0);
        let h = sector_hamiltonian(&r, a, b);
        let psi0 = fig4_state(401);
        assert_eq!(evolve_sector(&psi0, &h, 0.0).unwrap(), psi0);
        for t in [0.1, 0.7, 2.0, 10.0] {
            let psi = evolve_sector(&psi0, &h, t).unwrap();
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn decoupled_qubit_keeps_its_population() {
        let r = discretize_lorentzian(LorentzianParams::new(1.0, 10.0)).unwrap();
        let h = sector_hamiltonian(&r, 1.0, 0.0);
        let psi0 = fig4_state(401);
        for t in [0.3, 1.0, 2.0] {
            let psi = evolve_sector(&psi0, &h, t).unwrap();
            assert!((psi.c_b.norm() - psi0.c_b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_initial_norm_rejected() {
        assert!(SingleExcitationState::qubits(c(1.0), c(1.0), 3).is_err());
    }

    #[test]
    fn decoupled_limit_has_no_flow() {
        let r = discretize_lorentzian(LorentzianParams::new(1.0, 10.0)).unwrap();
        let psi0 = fig4_state(401);
        let grid = TimeGrid::new(2.0, 100).unwrap();
        for source in [BathQubit::A, BathQubit::B] {
            let s = bath_flow(&psi0, &r, &BathFlowRequest::new(1.0, 0.0, source, grid)).unwrap();
            assert!(s.cumulative.iter().all(|v| v.abs() < 1e-12), "{source:?}");
        }
    }

    #[test]
    fn target_equal_to_source_rejected() {
        let r = discretize_lorentzian(LorentzianParams::new(1.0, 1.0)).unwrap();
        let mut req = BathFlowRequest::new(0.5, 0.5, BathQubit::A, TimeGrid::new(1.0, 10).unwrap());
        req.target = BathQubit::A;
        assert!(bath_flow(&fig4_state(401), &r, &req).is_err());
    }
}
