//! Liang information flow between subsystems.
//!
//! For a target `A` and senders `F`, the state is evolved twice from the same
//! `rho(0)`: once under the full Hamiltonian and once under the Hamiltonian
//! with every term touching `F` removed. The cumulative flow is the
//! difference of the target's entropies along the two trajectories, and the
//! rate is its time derivative.

pub mod analysis;
mod cache;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonians::{FreezeOptions, FrozenSet, HamiltonianSpec};
use crate::qdm::{
    partial_trace, unitarity_deviation, von_neumann_entropy_with_clip, CMatrix, DensityMatrix, HermitianOperator,
    Propagator, ENTROPY_CLIP,
};

pub use cache::EigenCache;

/// Smallest derivative step accepted by [`instantaneous_rate`].
pub const MIN_RATE_STEP: f64 = 1e-6;
/// Default derivative step for instantaneous rates.
pub const DEFAULT_RATE_STEP: f64 = 1e-3;
const TOL_UNITARY: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// Differentiate the cumulative series (frozen from `t = 0`).
    #[default]
    FromStart,
    /// Re-freeze at each queried time and differentiate locally.
    Instantaneous,
}

/// Uniform grid `t_k = k * t_max / steps`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidArgument(format!("grid needs at least 2 steps, got {steps}")));
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
        }
        Ok(Self { t_max, steps })
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..=self.steps).map(|k| k as f64 * dt).collect()
    }
}

/// Everything needed to evaluate one directed flow.
#[derive(Debug, Clone)]
pub struct FlowRequest {
    pub hamiltonian: HamiltonianSpec,
    pub initial: DensityMatrix,
    pub target: Vec<String>,
    pub sources: FrozenSet,
    pub grid: TimeGrid,
    pub rate_mode: RateMode,
    pub rate_step: f64,
    pub entropy_clip: f64,
    pub freeze: FreezeOptions,
}

impl FlowRequest {
    pub fn new<S: Into<String>>(
        hamiltonian: HamiltonianSpec,
        initial: DensityMatrix,
        target: impl IntoIterator<Item = S>,
        sources: FrozenSet,
        grid: TimeGrid,
    ) -> Result<Self> {
        let req = Self {
            hamiltonian,
            initial,
            target: target.into_iter().map(Into::into).collect(),
            sources,
            grid,
            rate_mode: RateMode::FromStart,
            rate_step: DEFAULT_RATE_STEP,
            entropy_clip: ENTROPY_CLIP,
            freeze: FreezeOptions::default(),
        };
        req.validate()?;
        Ok(req)
    }

    pub fn with_rate_mode(mut self, mode: RateMode) -> Self {
        self.rate_mode = mode;
        self
    }

    pub fn with_rate_step(mut self, h: f64) -> Self {
        self.rate_step = h;
        self
    }

    pub fn with_entropy_clip(mut self, clip: f64) -> Self {
        self.entropy_clip = clip;
        self
    }

    pub fn with_freeze_options(mut self, opts: FreezeOptions) -> Self {
        self.freeze = opts;
        self
    }

    pub fn with_sources(mut self, sources: FrozenSet) -> Result<Self> {
        self.sources = sources;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let reg = self.hamiltonian.registry();
        if self.initial.registry() != reg {
            return Err(Error::RegistryMismatch);
        }
        if self.target.is_empty() {
            return Err(Error::EmptyKeep);
        }
        for label in &self.target {
            reg.index_of(label)?;
            if self.sources.contains(label) {
                return Err(Error::TargetSourceOverlap(label.clone()));
            }
        }
        for label in self.sources.labels() {
            reg.index_of(label)?;
        }
        if self.grid.steps < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2 steps".into()));
        }
        Ok(())
    }

    /// `"AB->C"` style label.
    pub fn label(&self) -> String {
        format!("{}->{}", self.sources, self.target.join(""))
    }
}

/// Entropy trajectories and flows on a time grid, all in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSeries {
    pub label: String,
    pub times: Vec<f64>,
    /// `S_A(t)` under the full dynamics.
    pub s_target: Vec<f64>,
    /// `S_A(t)` with the sources frozen.
    pub s_target_frozen: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// Bits per unit time.
    pub rate: Vec<f64>,
}

impl FlowSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Cumulative flow at the grid point nearest `t`.
    pub fn cumulative_at(&self, t: f64) -> f64 {
        self.cumulative[nearest_index(&self.times, t)]
    }
}

pub(crate) fn nearest_index(times: &[f64], t: f64) -> usize {
    times.iter().enumerate().min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs())).map(|(k, _)| k).unwrap_or(0)
}

/// Central differences in the interior, one-sided at the ends.
pub fn differentiate(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let (lo, hi) = match k {
                0 => (0, 1),
                k if k == n - 1 => (n - 2, n - 1),
                k => (k - 1, k + 1),
            };
            (values[hi] - values[lo]) / (times[hi] - times[lo])
        })
        .collect()
}

/// Entropy of the marginal on `keep`, in bits.
pub fn reduced_entropy<S: AsRef<str>>(rho: &DensityMatrix, keep: &[S], clip: f64) -> Result<f64> {
    von_neumann_entropy_with_clip(&partial_trace(rho, keep)?, clip)
}

/// Flow evaluator sharing eigensystems across requests.
#[derive(Debug, Default)]
pub struct FlowEngine {
    cache: EigenCache,
}

impl FlowEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cache(&self) -> &EigenCache {
        &self.cache
    }

    fn operators(&self, req: &FlowRequest) -> Result<(HermitianOperator, HermitianOperator)> {
        req.validate()?;
        let full = self.cache.materialize(&req.hamiltonian)?;
        let frozen_spec = req.hamiltonian.freeze_with(&req.sources, req.freeze)?;
        let frozen = self.cache.materialize(&frozen_spec)?;
        Ok((full, frozen))
    }

    /// Entropy of the target along `times` under `h`, starting from `rho0`.
    pub fn entropy_trajectory(
        &self,
        h: &HermitianOperator,
        rho0: &DensityMatrix,
        target: &[String],
        times: &[f64],
        clip: f64,
    ) -> Result<Vec<f64>> {
        let prop = Propagator::new(h);
        let w = prop.to_eigenbasis(rho0);
        times
            .par_iter()
            .map(|&t| {
                let rho = if t == 0.0 { rho0.clone() } else { prop.evolve_from_eigenbasis(&w, t) };
                reduced_entropy(&rho, target, clip)
            })
            .collect()
    }

    pub fn cumulative_flow(&self, req: &FlowRequest) -> Result<FlowSeries> {
        let (full, frozen) = self.operators(req)?;
        let times = req.grid.times();
        let s_target = self.entropy_trajectory(&full, &req.initial, &req.target, &times, req.entropy_clip)?;
        let s_target_frozen = self.entropy_trajectory(&frozen, &req.initial, &req.target, &times, req.entropy_clip)?;
        let cumulative: Vec<f64> = s_target.iter().zip(&s_target_frozen).map(|(a, b)| a - b).collect();
        let rate = match req.rate_mode {
            RateMode::FromStart => differentiate(&times, &cumulative),
            RateMode::Instantaneous => {
                times.par_iter().map(|&t| self.instantaneous_rate(req, t)).collect::<Result<_>>()?
            }
        };
        Ok(FlowSeries { label: req.label(), times, s_target, s_target_frozen, cumulative, rate })
    }

    /// Rate with the freeze applied at `t`: both branches start from the
    /// full-dynamics state `rho(t)` and are differentiated over `t +- h`.
    pub fn instantaneous_rate(&self, req: &FlowRequest, t: f64) -> Result<f64> {
        let h = req.rate_step;
        if h.is_nan() || h < MIN_RATE_STEP {
            return Err(Error::InvalidArgument(format!("rate step {h:e} is below the minimum {MIN_RATE_STEP:e}")));
        }
        if !(0.0..=req.grid.t_max).contains(&t) {
            return Err(Error::InvalidArgument(format!("t = {t} outside [0, {}]", req.grid.t_max)));
        }
        let (full, frozen) = self.operators(req)?;
        let full_prop = Propagator::new(&full);
        let frozen_prop = Propagator::new(&frozen);
        let rho_t = full_prop.evolve(&req.initial, t);
        let s = |p: &Propagator, dt: f64| reduced_entropy(&p.evolve(&rho_t, dt), &req.target, req.entropy_clip);
        let d_full = (s(&full_prop, h)? - s(&full_prop, -h)?) / (2.0 * h);
        let d_frozen = (s(&frozen_prop, h)? - s(&frozen_prop, -h)?) / (2.0 * h);
        Ok(d_full - d_frozen)
    }

    /// Cumulative flow `i -> j` at `grid.t_max` for every ordered pair of sites.
    pub fn pairwise_flow_matrix(
        &self,
        hamiltonian: &HamiltonianSpec,
        initial: &DensityMatrix,
        grid: TimeGrid,
    ) -> Result<FlowMatrix> {
        let labels: Vec<String> = hamiltonian.registry().labels().map(String::from).collect();
        let n = labels.len();
        let full = self.cache.materialize(hamiltonian)?;
        let t = grid.t_max;
        let rho_t = Propagator::new(&full).evolve(initial, t);
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        let flows: Vec<((usize, usize), f64)> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let target = [labels[j].clone()];
                let frozen_spec = hamiltonian.freeze(&FrozenSet::new([labels[i].clone()]))?;
                let frozen = self.cache.materialize(&frozen_spec)?;
                let s_full = reduced_entropy(&rho_t, &target, ENTROPY_CLIP)?;
                let s_frozen = reduced_entropy(&Propagator::new(&frozen).evolve(initial, t), &target, ENTROPY_CLIP)?;
                Ok(((i, j), s_full - s_frozen))
            })
            .collect::<Result<_>>()?;
        let mut values = vec![vec![None; n]; n];
        for ((i, j), v) in flows {
            values[i][j] = Some(v);
        }
        Ok(FlowMatrix { labels, time: t, values })
    }

    /// First time the target's entropy reaches its capacity
    /// `log2(dim target)` under the full dynamics, refined between grid
    /// points. `None` if it is not reached on the grid.
    pub fn capacity_time(
        &self,
        hamiltonian: &HamiltonianSpec,
        initial: &DensityMatrix,
        target: &[String],
        grid: TimeGrid,
    ) -> Result<Option<f64>> {
        let capacity = (hamiltonian.registry().subset(target)?.dim() as f64).log2();
        let h = self.cache.materialize(hamiltonian)?;
        let times = grid.times();
        let values = self.entropy_trajectory(&h, initial, target, &times, ENTROPY_CLIP)?;
        let prop = Propagator::new(&h);
        let entropy_at = |t: f64| reduced_entropy(&prop.evolve(initial, t), target, ENTROPY_CLIP).unwrap_or(f64::NAN);
        Ok(analysis::first_capacity_time(&times, &values, capacity, entropy_at, 1e-2, 1e-6))
    }

    /// Joint flow from the union of `sources` against the sum of the
    /// individual flows, per grid time.
    pub fn superadditivity_report(
        &self,
        hamiltonian: &HamiltonianSpec,
        initial: &DensityMatrix,
        sources: &[FrozenSet],
        target: &[&str],
        grid: TimeGrid,
    ) -> Result<SuperadditivityReport> {
        if sources.is_empty() {
            return Err(Error::InvalidArgument("no sources given".into()));
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for s in sources {
            for l in s.labels() {
                if !seen.insert(l.as_str()) {
                    return Err(Error::InvalidArgument(format!("sources must be pairwise disjoint; `{l}` repeats")));
                }
            }
        }
        let union = sources.iter().fold(FrozenSet::default(), |acc, s| acc.union(s));
        let base = FlowRequest::new(hamiltonian.clone(), initial.clone(), target.iter().copied(), union, grid)?;
        let joint = self.cumulative_flow(&base)?;
        let singles: Vec<FlowSeries> = sources
            .iter()
            .map(|s| self.cumulative_flow(&base.clone().with_sources(s.clone())?))
            .collect::<Result<_>>()?;
        let sum: Vec<f64> = (0..joint.len()).map(|k| singles.iter().map(|s| s.cumulative[k]).sum()).collect();
        let gap = joint.cumulative.iter().zip(&sum).map(|(j, s)| j - s).collect();
        Ok(SuperadditivityReport {
            times: joint.times.clone(),
            joint: joint.cumulative,
            singles: singles.into_iter().map(|s| (s.label, s.cumulative)).collect(),
            sum_of_singles: sum,
            gap,
        })
    }
}

pub fn cumulative_flow(req: &FlowRequest) -> Result<FlowSeries> {
    FlowEngine::new().cumulative_flow(req)
}

pub fn instantaneous_rate(req: &FlowRequest, t: f64) -> Result<f64> {
    FlowEngine::new().instantaneous_rate(req, t)
}

pub fn pairwise_flow_matrix(
    hamiltonian: &HamiltonianSpec,
    initial: &DensityMatrix,
    grid: TimeGrid,
) -> Result<FlowMatrix> {
    FlowEngine::new().pairwise_flow_matrix(hamiltonian, initial, grid)
}

pub fn superadditivity_report(
    hamiltonian: &HamiltonianSpec,
    initial: &DensityMatrix,
    sources: &[FrozenSet],
    target: &[&str],
    grid: TimeGrid,
) -> Result<SuperadditivityReport> {
    FlowEngine::new().superadditivity_report(hamiltonian, initial, sources, target, grid)
}

/// Cumulative flow of a single discrete map.
///
/// Returns `dS_target(full) - dS_target(frozen)`. Without `u_frozen` the
/// frozen evolution is taken to be local to the target, so its entropy
/// change is zero (the bipartite case).
pub fn discrete_map_flow<S: AsRef<str>>(
    rho0: &DensityMatrix,
    u_full: &CMatrix,
    target: &[S],
    u_frozen: Option<&CMatrix>,
) -> Result<f64> {
    let apply = |u: &CMatrix| -> Result<DensityMatrix> {
        let d = rho0.dim();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "unitary is {}x{}, state dimension is {d}",
                u.nrows(),
                u.ncols()
            )));
        }
        let dev = unitarity_deviation(u);
        if dev > TOL_UNITARY {
            return Err(Error::NonUnitary(dev));
        }
        DensityMatrix::new(rho0.registry().clone(), u * rho0.entries() * u.adjoint())
    };
    let s0 = reduced_entropy(rho0, target, ENTROPY_CLIP)?;
    let full = reduced_entropy(&apply(u_full)?, target, ENTROPY_CLIP)? - s0;
    let frozen = match u_frozen {
        Some(u) => reduced_entropy(&apply(u)?, target, ENTROPY_CLIP)? - s0,
        None => 0.0,
    };
    Ok(full - frozen)
}

/// Cumulative flows between all ordered site pairs at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowMatrix {
    pub labels: Vec<String>,
    pub time: f64,
    /// `values[i][j]` is the flow from site `i` to site `j`; the diagonal is empty.
    pub values: Vec<Vec<Option<f64>>>,
}

impl FlowMatrix {
    pub fn get(&self, from: &str, to: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == from)?;
        let j = self.labels.iter().position(|l| l == to)?;
        self.values[i][j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperadditivityReport {
    pub times: Vec<f64>,
    pub joint: Vec<f64>,
    pub singles: Vec<(String, Vec<f64>)>,
    pub sum_of_singles: Vec<f64>,
    /// `joint - sum_of_singles`; positive means superadditive.
    pub gap: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{gate_unitary, Gate};
    use crate::qdm::{pauli, SiteRegistry};
    use num_complex::Complex64;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn eq9(eta_ac: f64, eta_bc: f64) -> HamiltonianSpec {
        HamiltonianSpec::new(SiteRegistry::qubits(["A", "B", "C"]).unwrap())
            .add_coupling("A", "C", eta_ac)
            .unwrap()
            .add_coupling("B", "C", eta_bc)
            .unwrap()
    }

    fn rho_mm_mm_0() -> DensityMatrix {
        let half = pauli::identity(2) * c(0.5);
        DensityMatrix::product(
            SiteRegistry::qubits(["A", "B", "C"]).unwrap(),
            &[half.clone(), half, pauli::projector(2, 0)],
        )
        .unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, 10).is_err());
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn overlapping_target_and_sources_rejected() {
        let err = FlowRequest::new(
            eq9(1., 3.),
            rho_mm_mm_0(),
            ["C"],
            FrozenSet::new(["A", "C"]),
            TimeGrid::new(0.5, 10).unwrap(),
        )
        .unwrap_err();
        assert_eq!(err, Error::TargetSourceOverlap("C".into()));
    }

    #[test]
    fn cumulative_is_entropy_difference_and_starts_at_zero() {
        let req =
            FlowRequest::new(eq9(1., 3.), rho_mm_mm_0(), ["C"], FrozenSet::new(["B"]), TimeGrid::new(0.5, 50).unwrap())
                .unwrap();
        let s = cumulative_flow(&req).unwrap();
        assert_eq!(s.cumulative[0], 0.0);
        for k in 0..s.len() {
            assert!((s.cumulative[k] - (s.s_target[k] - s.s_target_frozen[k])).abs() < 1e-12);
        }
        assert_eq!(s.label, "B->C");
    }

    #[test]
    fn joint_flow_equals_entropy_change() {
        let req = FlowRequest::new(
            eq9(1., 3.),
            rho_mm_mm_0(),
            ["C"],
            FrozenSet::new(["A", "B"]),
            TimeGrid::new(0.5, 50).unwrap(),
        )
        .unwrap();
        let s = cumulative_flow(&req).unwrap();
        for k in 0..s.len() {
            assert!((s.cumulative[k] - (s.s_target[k] - s.s_target[0])).abs() < 1e-10);
        }
    }

    #[test]
    fn rate_from_start_differentiates_cumulative() {
        let req = FlowRequest::new(
            eq9(1., 3.),
            rho_mm_mm_0(),
            ["C"],
            FrozenSet::new(["B"]),
            TimeGrid::new(0.4, 400).unwrap(),
        )
        .unwrap();
        let s = cumulative_flow(&req).unwrap();
        let k = 200;
        let expect = (s.cumulative[k + 1] - s.cumulative[k - 1]) / (2.0 * 0.001);
        assert!((s.rate[k] - expect).abs() < 1e-9);
    }

    #[test]
    fn instantaneous_rate_step_floor() {
        let req =
            FlowRequest::new(eq9(1., 3.), rho_mm_mm_0(), ["C"], FrozenSet::new(["B"]), TimeGrid::new(0.4, 40).unwrap())
                .unwrap()
                .with_rate_step(1e-7);
        assert!(matches!(instantaneous_rate(&req, 0.1), Err(Error::InvalidArgument(_))));
        let req = req.with_rate_step(1e-3);
        assert!(instantaneous_rate(&req, 0.5).is_err());
        assert!(instantaneous_rate(&req, 0.2).unwrap().is_finite());
    }

    #[test]
    fn instantaneous_rate_at_zero_matches_from_start_slope() {
        // both freeze at t = 0, so the initial slopes agree
        let req =
            FlowRequest::new(eq9(1., 3.), rho_mm_mm_0(), ["C"], FrozenSet::new(["B"]), TimeGrid::new(0.3, 30).unwrap())
                .unwrap()
                .with_rate_mode(RateMode::Instantaneous);
        let s = cumulative_flow(&req).unwrap();
        // entropy grows like t^2 |log t| at first, so the slope at 0 vanishes
        assert!(s.rate[0].abs() < 1e-2);
        assert!(s.rate.iter().all(|r| r.is_finite()));
    }

    #[test]
    fn cnot_discrete_flows() {
        let reg = SiteRegistry::qubits(["A", "B"]).unwrap();
        let rho = DensityMatrix::product(reg.clone(), &[pauli::identity(2) * c(0.5), pauli::projector(2, 0)]).unwrap();
        let u = gate_unitary(&Gate::Cnot, &["A", "B"], &reg).unwrap();
        let to_b = discrete_map_flow(&rho, &u, &["B"], None).unwrap();
        let to_a = discrete_map_flow(&rho, &u, &["A"], None).unwrap();
        assert!((to_b - 1.0).abs() < 1e-12);
        assert!(to_a.abs() < 1e-12);
    }

    #[test]
    fn discrete_map_rejects_non_unitary() {
        let reg = SiteRegistry::qubits(["A"]).unwrap();
        let rho = DensityMatrix::maximally_mixed(reg);
        assert!(matches!(discrete_map_flow(&rho, &pauli::sigma_plus(), &["A"], None), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn superadditivity_single_source_has_zero_gap() {
        let rep = superadditivity_report(
            &eq9(1., 3.),
            &rho_mm_mm_0(),
            &[FrozenSet::new(["A"])],
            &["C"],
            TimeGrid::new(0.4, 20).unwrap(),
        )
        .unwrap();
        assert!(rep.gap.iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn superadditivity_rejects_overlap() {
        let err = superadditivity_report(
            &eq9(1., 3.),
            &rho_mm_mm_0(),
            &[FrozenSet::new(["A"]), FrozenSet::new(["A", "B"])],
            &["C"],
            TimeGrid::new(0.4, 20).unwrap(),
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn pairwise_matrix_disconnected_pairs() {
        let reg = SiteRegistry::qubits(["A", "B", "C", "D"]).unwrap();
        let spec =
            HamiltonianSpec::new(reg.clone()).add_coupling("A", "B", 1.0).unwrap().add_coupling("C", "D", 2.0).unwrap();
        let half = pauli::identity(2) * c(0.5);
        let rho =
            DensityMatrix::product(reg, &[half.clone(), pauli::projector(2, 0), half, pauli::projector(2, 1)]).unwrap();
        let m = pairwise_flow_matrix(&spec, &rho, TimeGrid::new(0.7, 7).unwrap()).unwrap();
        for (x, y) in [("A", "C"), ("A", "D"), ("B", "C"), ("D", "A"), ("C", "B")] {
            assert!(m.get(x, y).unwrap().abs() < 1e-12, "{x}->{y}");
        }
        assert!(m.get("A", "B").unwrap() > 0.1);
        assert!(m.get("A", "A").is_none());
    }
}
