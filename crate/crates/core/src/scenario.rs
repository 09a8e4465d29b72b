//! JSON scenario files: a network (or a qubit pair in a reservoir), an
//! initial state, a list of directed flows and a time grid.
//!
//! ```json
//! {
//!   "name": "chain",
//!   "sites": ["A", "B", {"label": "C", "dim": 2}],
//!   "couplings": [["A", "C", 1.0], ["B", "C", 3.0]],
//!   "fields_z": [["C", 0.5]],
//!   "initial": {"A": "maximally_mixed", "B": {"mixed": [[0.9, "0"], [0.1, "1"]]}, "C": {"pure": "0"}},
//!   "flows": [{"sources": ["A", "B"], "target": ["C"]}],
//!   "grid": {"t_max": 0.5, "steps": 50}
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{
    bath_flow, discretize_lorentzian, normalized_alphas, BathFlowRequest, BathQubit, LorentzianParams,
    SingleExcitationState, DEFAULT_CUTOFF_WIDTHS, DEFAULT_MODES,
};
use crate::error::{Error, Result};
use crate::flow::{FlowEngine, FlowRequest, FlowSeries, RateMode, TimeGrid, DEFAULT_RATE_STEP};
use crate::hamiltonians::{FreezeOptions, FrozenSet, HamiltonianSpec};
use crate::qdm::{CMatrix, DensityMatrix, SiteRegistry, ENTROPY_CLIP};

const TOL_PROBABILITY: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteDecl {
    Qubit(String),
    Site { label: String, dim: usize },
}

impl SiteDecl {
    pub fn label(&self) -> &str {
        match self {
            SiteDecl::Qubit(l) | SiteDecl::Site { label: l, .. } => l,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SiteDecl::Qubit(_) => 2,
            SiteDecl::Site { dim, .. } => *dim,
        }
    }
}

/// Single-site state. Basis labels are `"0"`, `"1"`, ... and `"+"` for
/// the uniform superposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteState {
    MaximallyMixed,
    Pure(String),
    /// Probabilistic mixture of basis labels.
    Mixed(Vec<(f64, String)>),
}

impl SiteState {
    pub fn matrix(&self, dim: usize) -> Result<CMatrix> {
        match self {
            SiteState::MaximallyMixed => Ok(CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0)),
            SiteState::Pure(label) => {
                let v = basis_vector(label, dim)?;
                Ok(&v * v.adjoint())
            }
            SiteState::Mixed(parts) => {
                if parts.is_empty() {
                    return Err(Error::Config("empty mixture".into()));
                }
                let total: f64 = parts.iter().map(|(p, _)| p).sum();
                if parts.iter().any(|(p, _)| p.is_nan() || *p < 0.0) || (total - 1.0).abs() > TOL_PROBABILITY {
                    return Err(Error::Config(format!(
                        "mixture probabilities must be nonnegative and sum to 1 (sum {total})"
                    )));
                }
                let mut m = CMatrix::zeros(dim, dim);
                for (p, label) in parts {
                    let v = basis_vector(label, dim)?;
                    m += &v * v.adjoint() * Complex64::new(*p, 0.0);
                }
                Ok(m)
            }
        }
    }
}

fn basis_vector(label: &str, dim: usize) -> Result<nalgebra::DVector<Complex64>> {
    if label == "+" {
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        return Ok(nalgebra::DVector::from_element(dim, a));
    }
    let k: usize = label.parse().map_err(|_| Error::Config(format!("unknown basis state `{label}`")))?;
    if k >= dim {
        return Err(Error::Config(format!("basis state {k} out of range for dimension {dim}")));
    }
    let mut v = nalgebra::DVector::zeros(dim);
    v[k] = Complex64::new(1.0, 0.0);
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub sources: Vec<String>,
    pub target: Vec<String>,
}

impl FlowSpec {
    /// `"AB->C"` style label, matching [`FlowRequest::label`].
    pub fn label(&self) -> String {
        let sources: BTreeSet<&str> = self.sources.iter().map(String::as_str).collect();
        format!("{}->{}", sources.into_iter().collect::<String>(), self.target.join(""))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_max: f64,
    pub steps: usize,
}

/// An alternative initial state; unlisted sites keep the base state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub initial: BTreeMap<String, SiteState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    fn value(&self) -> Complex64 {
        match *self {
            Amplitude::Real(x) => Complex64::new(x, 0.0),
            Amplitude::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Qubit amplitudes of the initial single-excitation state, with the
/// reservoir in vacuum. Normalized on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathPsi0 {
    pub c_a: Amplitude,
    pub c_b: Amplitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathConfig {
    pub lambda: f64,
    pub big_r: f64,
    /// `alpha_a / alpha_b`; the pair is normalized to unit norm.
    pub alpha_ratio: f64,
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    /// Half-width of the frequency window in units of `lambda`.
    #[serde(default = "default_cutoff")]
    pub cutoff_widths: f64,
    #[serde(default)]
    pub omega0: f64,
    pub psi0: BathPsi0,
}

fn default_modes() -> usize {
    DEFAULT_MODES
}

fn default_cutoff() -> f64 {
    DEFAULT_CUTOFF_WIDTHS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Also write an SVG next to every CSV.
    #[serde(default)]
    pub svg: bool,
    /// Write `<name>_summary.csv` holding every flow's cumulative column.
    #[serde(default = "yes")]
    pub summary: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { svg: false, summary: true }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub sites: Vec<SiteDecl>,
    #[serde(default)]
    pub couplings: Vec<(String, String, f64)>,
    #[serde(default)]
    pub fields_z: Vec<(String, f64)>,
    #[serde(default)]
    pub initial: BTreeMap<String, SiteState>,
    #[serde(default)]
    pub variants: Vec<Variant>,
    pub flows: Vec<FlowSpec>,
    /// Extra summary columns, each the sum of the listed flows.
    #[serde(default)]
    pub sums: Vec<Vec<String>>,
    pub grid: GridSpec,
    #[serde(default)]
    pub rate_mode: RateMode,
    #[serde(default = "default_rate_step")]
    pub rate_step: f64,
    #[serde(default = "default_clip")]
    pub entropy_clip: f64,
    /// Keep terms acting only on frozen sites.
    #[serde(default)]
    pub retain_frozen_local: bool,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub bath: Option<BathConfig>,
}

fn default_rate_step() -> f64 {
    DEFAULT_RATE_STEP
}

fn default_clip() -> f64 {
    ENTROPY_CLIP
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::Config(format!("scenario name `{}` must be a plain identifier", self.name)));
        }
        if self.flows.is_empty() {
            return Err(Error::Config("no flows requested".into()));
        }
        TimeGrid::new(self.grid.t_max, self.grid.steps).map_err(|e| Error::Config(e.to_string()))?;
        let labels: BTreeSet<String> = self.flows.iter().map(FlowSpec::label).collect();
        if labels.len() != self.flows.len() {
            return Err(Error::Config("duplicate flow".into()));
        }
        for sum in &self.sums {
            if sum.len() < 2 {
                return Err(Error::Config("a sum needs at least two flows".into()));
            }
            for l in sum {
                if !labels.contains(l) {
                    return Err(Error::Config(format!("sum refers to unknown flow `{l}`")));
                }
            }
        }
        for f in &self.flows {
            if f.sources.is_empty() || f.target.is_empty() {
                return Err(Error::Config(format!("flow `{}` needs sources and a target", f.label())));
            }
            if let Some(s) = f.sources.iter().find(|s| f.target.contains(s)) {
                return Err(Error::Config(format!("flow `{}` has `{s}` on both sides", f.label())));
            }
        }
        match &self.bath {
            Some(b) => self.validate_bath(b),
            None => self.validate_network(),
        }
    }

    fn validate_network(&self) -> Result<()> {
        if self.sites.is_empty() {
            return Err(Error::Config("no sites declared".into()));
        }
        let declared: BTreeSet<&str> = self.sites.iter().map(SiteDecl::label).collect();
        if declared.len() != self.sites.len() {
            return Err(Error::Config("duplicate site label".into()));
        }
        let check = |l: &str, what: &str| -> Result<()> {
            if declared.contains(l) {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} refers to undeclared site `{l}`")))
            }
        };
        for (i, j, _) in &self.couplings {
            check(i, "coupling")?;
            check(j, "coupling")?;
            if i == j {
                return Err(Error::Config(format!("coupling of `{i}` with itself")));
            }
        }
        for (s, _) in &self.fields_z {
            check(s, "field")?;
        }
        for f in &self.flows {
            for l in f.sources.iter().chain(&f.target) {
                check(l, "flow")?;
            }
        }
        for l in self.initial.keys() {
            check(l, "initial state")?;
        }
        for v in &self.variants {
            for l in v.initial.keys() {
                check(l, "variant")?;
            }
        }
        for site in &self.sites {
            let base = self
                .initial
                .get(site.label())
                .ok_or_else(|| Error::Config(format!("no initial state for site `{}`", site.label())))?;
            let overrides = self.variants.iter().filter_map(|v| v.initial.get(site.label()));
            for state in std::iter::once(base).chain(overrides) {
                state.matrix(site.dim())?;
            }
        }
        Ok(())
    }

    fn validate_bath(&self, b: &BathConfig) -> Result<()> {
        if !self.sites.is_empty()
            || !self.couplings.is_empty()
            || !self.fields_z.is_empty()
            || !self.variants.is_empty()
        {
            return Err(Error::Config("a bath scenario takes no sites, couplings, fields or variants".into()));
        }
        if !(b.alpha_ratio.is_finite() && b.alpha_ratio >= 0.0) {
            return Err(Error::Config("alpha_ratio must be nonnegative".into()));
        }
        for f in &self.flows {
            if f.sources.len() != 1 || f.target.len() != 1 {
                return Err(Error::Config("bath flows run between the single qubits A and B".into()));
            }
            BathQubit::from_label(&f.sources[0]).map_err(|e| Error::Config(e.to_string()))?;
            BathQubit::from_label(&f.target[0]).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.grid.t_max, self.grid.steps)
    }

    pub fn registry(&self) -> Result<SiteRegistry> {
        SiteRegistry::new(self.sites.iter().map(|s| (s.label().to_string(), s.dim())))
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianSpec> {
        let mut spec = HamiltonianSpec::new(self.registry()?);
        for (i, j, eta) in &self.couplings {
            spec = spec.add_coupling(i, j, *eta)?;
        }
        for (s, b) in &self.fields_z {
            spec = spec.add_field_z(s, *b)?;
        }
        Ok(spec)
    }

    /// Initial state of the base configuration (`None`) or a variant.
    pub fn initial_state(&self, variant: Option<&str>) -> Result<DensityMatrix> {
        let reg = self.registry()?;
        let overrides = match variant {
            None => None,
            Some(name) => Some(
                self.variants
                    .iter()
                    .find(|v| v.name == name)
                    .ok_or_else(|| Error::Config(format!("unknown variant `{name}`")))?,
            ),
        };
        let factors: Vec<CMatrix> = self
            .sites
            .iter()
            .map(|s| {
                let state = overrides
                    .and_then(|v| v.initial.get(s.label()))
                    .or_else(|| self.initial.get(s.label()))
                    .ok_or_else(|| Error::Config(format!("no initial state for `{}`", s.label())))?;
                state.matrix(s.dim())
            })
            .collect::<Result<_>>()?;
        DensityMatrix::product(reg, &factors)
    }

    /// The flow request for one entry of `flows`.
    pub fn request(&self, flow: &FlowSpec, variant: Option<&str>) -> Result<FlowRequest> {
        let req = FlowRequest::new(
            self.hamiltonian()?,
            self.initial_state(variant)?,
            flow.target.iter().cloned(),
            FrozenSet::new(flow.sources.iter().cloned()),
            self.time_grid()?,
        )?;
        Ok(req
            .with_rate_mode(self.rate_mode)
            .with_rate_step(self.rate_step)
            .with_entropy_clip(self.entropy_clip)
            .with_freeze_options(FreezeOptions { retain_frozen_local: self.retain_frozen_local }))
    }

    fn variant_names(&self) -> Vec<Option<String>> {
        if self.variants.is_empty() {
            vec![None]
        } else {
            self.variants.iter().map(|v| Some(v.name.clone())).collect()
        }
    }
}

/// All flows of one initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantResult {
    pub variant: Option<String>,
    pub series: Vec<FlowSeries>,
}

impl VariantResult {
    pub fn get(&self, label: &str) -> Option<&FlowSeries> {
        self.series.iter().find(|s| s.label == label)
    }

    /// File stem shared by this variant's outputs.
    pub fn stem(&self, scenario: &str) -> String {
        match &self.variant {
            Some(v) => format!("{scenario}_{v}"),
            None => scenario.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub name: String,
    pub variants: Vec<VariantResult>,
}

impl ScenarioResult {
    /// The only variant, or the named one.
    pub fn variant(&self, name: Option<&str>) -> Option<&VariantResult> {
        self.variants.iter().find(|v| v.variant.as_deref() == name)
    }

    pub fn series(&self, label: &str) -> Option<&FlowSeries> {
        self.variants.first()?.get(label)
    }
}

/// Evaluates every flow of every variant.
pub fn evaluate(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let variants = match &cfg.bath {
        Some(b) => vec![VariantResult { variant: None, series: evaluate_bath(cfg, b)? }],
        None => {
            let engine = FlowEngine::new();
            cfg.variant_names()
                .into_iter()
                .map(|v| {
                    let series = cfg
                        .flows
                        .par_iter()
                        .map(|f| engine.cumulative_flow(&cfg.request(f, v.as_deref())?))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(VariantResult { variant: v, series })
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(ScenarioResult { name: cfg.name.clone(), variants })
}

fn evaluate_bath(cfg: &ScenarioConfig, b: &BathConfig) -> Result<Vec<FlowSeries>> {
    let params = LorentzianParams {
        lambda: b.lambda,
        big_r: b.big_r,
        omega0: b.omega0,
        n_modes: b.n_modes,
        cutoff_width: b.cutoff_widths * b.lambda,
    };
    let reservoir = discretize_lorentzian(params)?;
    let (ca, cb) = (b.psi0.c_a.value(), b.psi0.c_b.value());
    let norm = (ca.norm_sqr() + cb.norm_sqr()).sqrt();
    if norm == 0.0 {
        return Err(Error::Config("psi0 has zero norm".into()));
    }
    let psi0 = SingleExcitationState::qubits(ca / norm, cb / norm, reservoir.n_modes())?;
    let (alpha_a, alpha_b) = normalized_alphas(b.alpha_ratio);
    let grid = cfg.time_grid()?;
    cfg.flows
        .par_iter()
        .map(|f| {
            let source = BathQubit::from_label(&f.sources[0])?;
            let mut req = BathFlowRequest::new(alpha_a, alpha_b, source, grid);
            req.target = BathQubit::from_label(&f.target[0])?;
            req.rate_mode = cfg.rate_mode;
            req.rate_step = cfg.rate_step;
            bath_flow(&psi0, &reservoir, &req)
        })
        .collect()
}

/// Process exit status for an error: 3 for the dimension cap, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DimensionCap { .. } => 3,
        _ => 2,
    }
}

/// Bundled scenario files, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("fig1a", include_str!("../scenarios/fig1a.json")),
    ("fig1b", include_str!("../scenarios/fig1b.json")),
    ("fig2_B0", include_str!("../scenarios/fig2_B0.json")),
    ("fig2_B3", include_str!("../scenarios/fig2_B3.json")),
    ("fig2_B5", include_str!("../scenarios/fig2_B5.json")),
    ("fig2_B15", include_str!("../scenarios/fig2_B15.json")),
    ("fig3a", include_str!("../scenarios/fig3a.json")),
    ("fig3b", include_str!("../scenarios/fig3b.json")),
    ("appD", include_str!("../scenarios/appD.json")),
    ("fig4", include_str!("../scenarios/fig4.json")),
];

pub fn bundled(name: &str) -> Result<ScenarioConfig> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("no bundled scenario `{name}`")))?;
    ScenarioConfig::from_json(text)
}
