//! Self-check suite behind `qliang validate`: invariants of every module
//! and the reference numbers of the bundled scenarios.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bath::{
    bath_flow, discretize_lorentzian, normalized_alphas, BathFlowRequest, BathQubit, LorentzianParams,
    SingleExcitationState,
};
use crate::classical::{
    classical_flow_rate, evolve_density, marginal_entropy, Axis, DensityGrid, Domain, VectorField2D,
};
use crate::error::Result;
use crate::flow::analysis::{first_downward_zero_crossing, period_by_peak_spacing};
use crate::flow::{discrete_map_flow, FlowEngine, FlowRequest, TimeGrid};
use crate::hamiltonians::{gate_unitary, FreezeOptions, FrozenSet, Gate, HamiltonianSpec, LocalOp, OperatorTerm};
use crate::qdm::{
    binary_entropy, partial_trace, von_neumann_entropy, CMatrix, DensityMatrix, HermitianOperator, Propagator,
    SiteRegistry, ENTROPY_CLIP,
};
use crate::scenario::{bundled, evaluate, ScenarioConfig, ScenarioResult};

/// Knobs that perturb the numerics, for sensitivity checks of the suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationSettings {
    pub entropy_clip: f64,
    pub retain_frozen_local: bool,
    /// Random instances in the nil-causality check.
    pub nil_instances: usize,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        Self { entropy_clip: ENTROPY_CLIP, retain_frozen_local: false, nil_instances: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(check: &str, passed: bool, detail: String) -> Self {
        Self { check: check.to_string(), passed, detail }
    }

    fn from_result(check: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(check, passed, detail),
            Err(e) => Self::new(check, false, format!("error: {e}")),
        }
    }
}

type Check = fn(&ValidationSettings) -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("entropy_mixture_0.9_0.1", entropy_mixture),
    ("partial_trace_oracle", partial_trace_oracle),
    ("global_entropy_conservation", global_entropy_conservation),
    ("freeze_golden_terms", freeze_golden_terms),
    ("nil_causality", nil_causality),
    ("cnot_discrete_flow", cnot_discrete_flow),
    ("fig1a_ordering", fig1a_ordering),
    ("fig1b_initial_dependence", fig1b_initial_dependence),
    ("fig2_super_exchange", fig2_super_exchange),
    ("fig3a_identical_leaves", fig3a_identical_leaves),
    ("fig3b_negative_flow", fig3b_negative_flow),
    ("appD_golden_numbers", app_d_golden_numbers),
    ("bath_features", bath_features),
    ("classical_correspondence", classical_correspondence),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs one named check.
pub fn run_check(name: &str, settings: &ValidationSettings) -> Option<CheckResult> {
    CHECKS.iter().find(|(n, _)| *n == name).map(|(n, f)| CheckResult::from_result(n, f(settings)))
}

/// Runs every check, in order.
pub fn run_suite(settings: &ValidationSettings) -> Vec<CheckResult> {
    CHECKS.iter().map(|(n, f)| CheckResult::from_result(n, f(settings))).collect()
}

fn scenario(name: &str, s: &ValidationSettings) -> Result<ScenarioConfig> {
    let mut cfg = bundled(name)?;
    cfg.entropy_clip = s.entropy_clip;
    cfg.retain_frozen_local = s.retain_frozen_local;
    Ok(cfg)
}

fn run(name: &str, s: &ValidationSettings) -> Result<(ScenarioConfig, ScenarioResult)> {
    let cfg = scenario(name, s)?;
    let res = evaluate(&cfg)?;
    Ok((cfg, res))
}

fn capacity_time(cfg: &ScenarioConfig, target: &str, t_max: f64) -> Result<Option<f64>> {
    FlowEngine::new().capacity_time(
        &cfg.hamiltonian()?,
        &cfg.initial_state(None)?,
        &[target.to_string()],
        TimeGrid::new(t_max, (t_max * 200.0) as usize)?,
    )
}

fn random_density(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let m = &g * g.adjoint();
    let tr = m.trace();
    m / tr
}

fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random two-qubit Hamiltonian on `a, b` as a sum of Pauli products.
pub(crate) fn random_pair_terms(rng: &mut impl Rng, a: &str, b: &str) -> Vec<OperatorTerm> {
    let paulis = || [LocalOp::Matrix(CMatrix::identity(2, 2)), LocalOp::X, LocalOp::Y, LocalOp::Z];
    let mut out = Vec::new();
    for p in paulis() {
        for q in paulis() {
            out.push(OperatorTerm::new(rng.random::<f64>() - 0.5, [(a, p.clone()), (b, q)]));
        }
    }
    out
}

fn entropy_mixture(_: &ValidationSettings) -> Result<(bool, String)> {
    let reg = SiteRegistry::qubits(["A"])?;
    let rho = DensityMatrix::new(
        reg,
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(0.9, 0.0), Complex64::new(0.1, 0.0)])),
    )?;
    let s = von_neumann_entropy(&rho)?;
    Ok(((s - 0.4690).abs() <= 5e-4, format!("S = {s:.6} bits")))
}

fn partial_trace_oracle(_: &ValidationSettings) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let reg = SiteRegistry::qubits(["A", "B", "C"])?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let m = random_density(&mut rng, 8);
        let rho = DensityMatrix::new(reg.clone(), m.clone())?;
        let got = partial_trace(&rho, &["A", "C"])?;
        // rho_AC[(a c), (a' c')] = sum_b rho[(a b c), (a' b c')]
        for a in 0..2 {
            for c in 0..2 {
                for a2 in 0..2 {
                    for c2 in 0..2 {
                        let want: Complex64 = (0..2).map(|b| m[(4 * a + 2 * b + c, 4 * a2 + 2 * b + c2)]).sum();
                        worst = worst.max((got.entries()[(2 * a + c, 2 * a2 + c2)] - want).norm());
                    }
                }
            }
        }
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.2e}")))
}

fn global_entropy_conservation(_: &ValidationSettings) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let reg = SiteRegistry::qubits(["A", "B", "C"])?;
    let rho = DensityMatrix::new(reg.clone(), random_density(&mut rng, 8))?;
    let h = HermitianOperator::new(reg, random_hermitian(&mut rng, 8))?;
    let s0 = von_neumann_entropy(&rho)?;
    let prop = Propagator::new(&h);
    let mut worst = 0.0f64;
    for k in 1..=20 {
        let s = von_neumann_entropy(&prop.evolve(&rho, 0.37 * k as f64))?;
        worst = worst.max((s - s0).abs());
    }
    Ok((worst < 1e-8, format!("max |S(t) - S(0)| = {worst:.2e}")))
}

fn freeze_golden_terms(s: &ValidationSettings) -> Result<(bool, String)> {
    let spec = HamiltonianSpec::new(SiteRegistry::qubits(["A", "B", "C"])?)
        .add_coupling("A", "C", 1.0)?
        .add_coupling("B", "C", 3.0)?
        .add_field_z("A", 0.7)?
        .add_field_z("C", 0.4)?;
    let frozen =
        spec.freeze_with(&FrozenSet::new(["A"]), FreezeOptions { retain_frozen_local: s.retain_frozen_local })?;
    let expected = vec![
        OperatorTerm::new(3.0, [("B", LocalOp::Plus), ("C", LocalOp::Minus)]),
        OperatorTerm::new(3.0, [("B", LocalOp::Minus), ("C", LocalOp::Plus)]),
        OperatorTerm::new(0.4, [("C", LocalOp::Z)]),
    ];
    let got: Vec<String> = frozen.terms().iter().map(|t| t.to_string()).collect();
    Ok((frozen.terms() == expected.as_slice(), got.join(" + ")))
}

fn nil_causality(s: &ValidationSettings) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let reg = SiteRegistry::qubits(["A", "B", "C"])?;
    let grid = TimeGrid::new(3.0, 30)?;
    let mut worst = 0.0f64;
    for k in 0..s.nil_instances {
        let mut spec = HamiltonianSpec::new(reg.clone());
        // alternate the two product shapes: A | BC and AC | B
        let (lone, pair) = if k % 2 == 0 { ("A", ["B", "C"]) } else { ("B", ["A", "C"]) };
        spec.push(OperatorTerm::new(1.0, [(lone, LocalOp::Matrix(random_hermitian(&mut rng, 2)))]))?;
        for term in random_pair_terms(&mut rng, pair[0], pair[1]) {
            spec.push(term)?;
        }
        let rho = DensityMatrix::new(reg.clone(), random_density(&mut rng, 8))?;
        // flow from the isolated block into the other one and vice versa
        let (target, source) = if k % 2 == 0 { ("A", "B") } else { ("B", "A") };
        let req = FlowRequest::new(spec, rho, [target], FrozenSet::new([source]), grid)?
            .with_entropy_clip(s.entropy_clip)
            .with_freeze_options(FreezeOptions { retain_frozen_local: s.retain_frozen_local });
        let series = FlowEngine::new().cumulative_flow(&req)?;
        worst = series.cumulative.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    Ok((worst < 1e-8, format!("max |T| = {worst:.2e} over {} instances", s.nil_instances)))
}

fn cnot_discrete_flow(_: &ValidationSettings) -> Result<(bool, String)> {
    let reg = SiteRegistry::qubits(["A", "B"])?;
    let mixed = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
    let zero = crate::qdm::pauli::projector(2, 0);
    let rho = DensityMatrix::product(reg.clone(), &[mixed, zero])?;
    let u = gate_unitary(&Gate::Cnot, &["A", "B"], &reg)?;
    let ab = discrete_map_flow(&rho, &u, &["B"], None)?;
    let ba = discrete_map_flow(&rho, &u, &["A"], None)?;
    Ok(((ab - 1.0).abs() < 1e-12 && ba.abs() < 1e-12, format!("A->B = {ab:.12}, B->A = {ba:.3e}")))
}

fn fig1a_ordering(s: &ValidationSettings) -> Result<(bool, String)> {
    let (cfg, res) = run("fig1a", s)?;
    let t_cap = capacity_time(&cfg, "C", 1.0)?.unwrap_or(f64::NAN);
    let v = &res.variants[0];
    let (ab, b, a) = (v.get("AB->C"), v.get("B->C"), v.get("A->C"));
    let (Some(ab), Some(b), Some(a)) = (ab, b, a) else {
        return Ok((false, "missing flow".into()));
    };
    let ordered = (1..ab.len())
        .all(|k| ab.cumulative[k] > a.cumulative[k] + b.cumulative[k] && b.cumulative[k] > a.cumulative[k]);
    Ok((
        (t_cap - 0.49).abs() <= 0.01 && ordered,
        format!("S_C capacity at t = {t_cap:.4}, ordering {}", if ordered { "holds" } else { "fails" }),
    ))
}

fn fig1b_initial_dependence(s: &ValidationSettings) -> Result<(bool, String)> {
    let (_, res) = run("fig1b", s)?;
    let dominance = |variant: &str| -> Option<(bool, bool)> {
        let v = res.variant(Some(variant))?;
        let (a, b) = (v.get("A->C")?, v.get("B->C")?);
        let k = 1..a.len();
        Some((
            k.clone().all(|k| a.cumulative[k] > b.cumulative[k]),
            k.clone().all(|k| b.cumulative[k] > a.cumulative[k]),
        ))
    };
    let (Some((a1, _)), Some((_, b2))) = (dominance("rho01"), dominance("rho02")) else {
        return Ok((false, "missing variant".into()));
    };
    Ok((a1 && b2, format!("rho01: A->C dominates = {a1}; rho02: B->C dominates = {b2}")))
}

fn fig2_super_exchange(s: &ValidationSettings) -> Result<(bool, String)> {
    let (_, b0) = run("fig2_B0", s)?;
    let (Some(ab), Some(cb)) = (b0.series("A->B"), b0.series("C->B")) else {
        return Ok((false, "missing flow".into()));
    };
    let (k_peak, peak) =
        cb.cumulative
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    let declines = cb.cumulative[k_peak..].iter().any(|&v| v < peak - 0.1);
    // C is B's only neighbour, so C->B minus A->B is the entropy of B in the
    // A-frozen branch: A->B can only catch up where that branch refocuses.
    let gap = (k_peak..ab.len()).map(|k| cb.cumulative[k] - ab.cumulative[k]).fold(f64::INFINITY, f64::min);
    let caught_up = gap < 1e-3;
    let feature = (peak - 1.0).abs() < 0.05 && declines && caught_up;

    let period = |name: &str| -> Result<f64> {
        let (_, r) = run(name, s)?;
        let series = r.series("A->B").ok_or_else(|| crate::error::Error::Config("missing A->B".into()))?;
        period_by_peak_spacing(&series.times, &series.cumulative, 0.3)
    };
    let (p5, p15) = (period("fig2_B5")?, period("fig2_B15")?);
    let ratio = p15 / p5;
    Ok((
        feature && (ratio - 3.0).abs() <= 0.3,
        format!(
            "B=0: C->B peak {peak:.4} at t = {:.2}, declines {declines}, closest approach of A->B {gap:.1e}; period ratio {ratio:.3} ({p15:.2}/{p5:.2})",
            cb.times[k_peak]
        ),
    ))
}

fn fig3a_identical_leaves(s: &ValidationSettings) -> Result<(bool, String)> {
    let (cfg, res) = run("fig3a", s)?;
    let t_cap = capacity_time(&cfg, "E", 1.5)?.unwrap_or(f64::NAN);
    let v = &res.variants[0];
    let mut spread = 0.0f64;
    for k in 0..v.series[0].len() {
        let vals: Vec<f64> = v.series.iter().map(|s| s.cumulative[k]).collect();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        spread = spread.max(hi - lo);
    }
    Ok((
        (t_cap - 0.69).abs() <= 0.01 && spread < 1e-9,
        format!("S_E capacity at t = {t_cap:.4}, max leaf spread {spread:.2e}"),
    ))
}

fn fig3b_negative_flow(s: &ValidationSettings) -> Result<(bool, String)> {
    let (_, with_edge) = run("fig3b", s)?;
    let (_, without) = run("fig3a", s)?;
    let (Some(ce), Some(ae), Some(ae0)) = (with_edge.series("C->E"), with_edge.series("A->E"), without.series("A->E"))
    else {
        return Ok((false, "missing flow".into()));
    };
    let t0 = first_downward_zero_crossing(&ce.times, &ce.cumulative).unwrap_or(f64::NAN);
    let (a_with, a_without) = (ae.cumulative_at(0.69), ae0.cumulative_at(0.69));
    Ok((
        (t0 - 0.49).abs() <= 0.02 && a_with > a_without,
        format!("C->E crosses zero at t = {t0:.4}; A->E at 0.69: {a_with:.4} with edge, {a_without:.4} without"),
    ))
}

fn app_d_golden_numbers(s: &ValidationSettings) -> Result<(bool, String)> {
    let (_, res) = run("appD", s)?;
    let v = &res.variants[0];
    let golden = [("A->E", 0.0731), ("B->E", 0.0132), ("C->E", 0.0022), ("D->E", 0.0001)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, want) in golden {
        let Some(series) = v.get(label) else {
            return Ok((false, format!("missing {label}")));
        };
        let got = series.cumulative_at(0.26);
        ok &= (got - want).abs() <= 5e-4;
        parts.push(format!("{label} {got:.5}"));
    }
    let order: Vec<&[f64]> =
        ["A->E", "B->E", "C->E", "D->E"].iter().filter_map(|l| v.get(l).map(|s| s.cumulative.as_slice())).collect();
    let strictly_ordered = (1..order[0].len()).all(|k| order.windows(2).all(|w| w[0][k] > w[1][k]));
    let joint = v.get("ABCD->E").map(|s| s.cumulative_at(0.26)).unwrap_or(f64::NAN);
    let sum: f64 = order.iter().map(|c| c[c.len() - 1]).sum();
    let superadditive = joint > sum;
    Ok((
        ok && strictly_ordered && superadditive,
        format!("{}; ordered {strictly_ordered}; joint {joint:.5} > sum {sum:.5}: {superadditive}", parts.join(", ")),
    ))
}

fn bath_features(_: &ValidationSettings) -> Result<(bool, String)> {
    let cfg = bundled("fig4")?;
    let res = evaluate(&cfg)?;
    let (Some(ba), Some(ab)) = (res.series("B->A"), res.series("A->B")) else {
        return Ok((false, "missing flow".into()));
    };
    let early_peak = |s: &crate::flow::FlowSeries| {
        s.times.iter().zip(&s.rate).filter(|(t, _)| **t <= 2.0).fold(f64::NEG_INFINITY, |m, (_, &r)| m.max(r))
    };
    let (pba, pab) = (early_peak(ba), early_peak(ab));
    let t_end = *ba.times.last().unwrap_or(&0.0);
    let (cab, cba) = (ab.cumulative_at(t_end), ba.cumulative_at(t_end));

    // decoupled limit
    let reservoir = discretize_lorentzian(LorentzianParams::new(1.0, 10.0))?;
    let psi0 = SingleExcitationState::qubits(
        Complex64::new((2.0f64 / 3.0).sqrt(), 0.0),
        Complex64::new((1.0f64 / 3.0).sqrt(), 0.0),
        reservoir.n_modes(),
    )?;
    let (alpha_a, _) = normalized_alphas(1.0);
    let grid = TimeGrid::new(2.0, 100)?;
    let mut decoupled = 0.0f64;
    for source in [BathQubit::A, BathQubit::B] {
        let series = bath_flow(&psi0, &reservoir, &BathFlowRequest::new(alpha_a, 0.0, source, grid))?;
        decoupled = series.cumulative.iter().chain(&series.rate).fold(decoupled, |m, v| m.max(v.abs()));
    }
    // binary entropy oracle for the initial target entropy
    let s0_ok = (ba.s_target[0] - binary_entropy(2.0 / 3.0)).abs() < 1e-12;
    Ok((
        pba > pab && cab > cba && decoupled < 1e-12 && s0_ok,
        format!(
            "early rate peaks B->A {pba:.3} vs A->B {pab:.3}; cumulative at t = {t_end}: A->B {cab:.4} vs B->A {cba:.4}; decoupled max {decoupled:.1e}"
        ),
    ))
}

fn classical_correspondence(_: &ValidationSettings) -> Result<(bool, String)> {
    let domain = Domain::square(6.0)?;
    let rho0 = DensityGrid::gaussian(domain, 240, 240, [[1.0, 0.0], [0.0, 0.25]])?;
    let rotation = VectorField2D::linear([[0.0, -1.0], [1.0, 0.0]]);
    let dt = 0.004;
    let before = evolve_density(&rho0, &rotation, dt, 98)?;
    let at = evolve_density(&before, &rotation, dt, 2)?;
    let after = evolve_density(&at, &rotation, dt, 2)?;
    let ds1 = (marginal_entropy(&after, Axis::X1).bits - marginal_entropy(&before, Axis::X1).bits) / (4.0 * dt);
    let t21 = classical_flow_rate(&at, &rotation, Axis::X1)?;
    let nil = classical_flow_rate(&at, &VectorField2D::linear([[-1.0, 0.0], [1.0, -1.0]]), Axis::X1)?;
    Ok((
        (t21 - ds1).abs() < 1e-3 && nil.abs() < 1e-3,
        format!("T21 = {t21:.5}, dS1/dt = {ds1:.5}, nil-causal T21 = {nil:.1e}"),
    ))
}
