use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qliang::flow::{FlowEngine, FlowRequest, TimeGrid};
use qliang::hamiltonians::{FrozenSet, HamiltonianSpec, LocalOp, OperatorTerm};
use qliang::qdm::{
    embed, max_abs_diff, partial_trace, von_neumann_entropy, CMatrix, DensityMatrix, HermitianOperator, Propagator,
    SiteRegistry,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SITES: [&str; 4] = ["A", "B", "C", "D"];

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = random_matrix(rng, d);
    let m = &g * g.adjoint();
    let tr = m.trace();
    m / tr
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = random_matrix(rng, d);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

fn random_pure(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> =
        (0..d).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Random XY chain-plus-fields spec on the first `n` of `SITES`.
fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> HamiltonianSpec {
    let mut spec = HamiltonianSpec::new(SiteRegistry::qubits(SITES[..n].iter().copied()).unwrap());
    for (i, a) in SITES[..n].iter().enumerate() {
        for b in &SITES[i + 1..n] {
            if rng.random::<f64>() < 0.7 {
                spec = spec.add_coupling(a, b, rng.random::<f64>() * 4.0 - 2.0).unwrap();
            }
        }
        if rng.random::<f64>() < 0.5 {
            spec = spec.add_field_z(a, rng.random::<f64>() * 2.0 - 1.0).unwrap();
        }
    }
    spec
}

/// Random non-empty subset of the first `n` sites, encoded by `mask`.
fn subset(mask: u8, n: usize) -> FrozenSet {
    FrozenSet::new((0..n).filter(|k| mask >> k & 1 == 1).map(|k| SITES[k]))
}

fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b - b * a).iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn freeze_is_idempotent(seed in any::<u64>(), mask in 0u8..16) {
        let spec = random_spec(&mut ChaCha8Rng::seed_from_u64(seed), 4);
        let f = subset(mask, 4);
        let once = spec.freeze(&f).unwrap();
        prop_assert_eq!(once.freeze(&f).unwrap(), once);
    }

    #[test]
    fn freeze_commutes_with_union(seed in any::<u64>(), m1 in 0u8..16, m2 in 0u8..16) {
        let spec = random_spec(&mut ChaCha8Rng::seed_from_u64(seed), 4);
        let (f, g) = (subset(m1, 4), subset(m2, 4));
        let joint = spec.freeze(&f.union(&g)).unwrap();
        prop_assert_eq!(&joint, &spec.freeze(&f).unwrap().freeze(&g).unwrap());
        prop_assert_eq!(&joint, &spec.freeze(&g).unwrap().freeze(&f).unwrap());
    }

    #[test]
    fn frozen_dynamics_commute_with_frozen_local_operators(seed in any::<u64>(), mask in 1u8..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, 4);
        let f = subset(mask, 4);
        let h = spec.freeze(&f).unwrap().materialize().unwrap();
        for label in f.labels() {
            let local = embed(&[(label.as_str(), random_matrix(&mut rng, 2))], spec.registry()).unwrap();
            prop_assert!(commutator_norm(h.entries(), &local) < 1e-10);
        }
    }

    #[test]
    fn freezing_an_untouched_site_is_the_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // D is declared but no term touches it
        let mut spec = HamiltonianSpec::new(SiteRegistry::qubits(SITES).unwrap());
        for t in random_spec(&mut rng, 3).terms() {
            spec.push(t.clone()).unwrap();
        }
        prop_assert_eq!(spec.freeze(&FrozenSet::new(["D"])).unwrap(), spec);
    }

    #[test]
    fn partial_traces_compose(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = SiteRegistry::qubits(SITES).unwrap();
        let rho = DensityMatrix::new(reg, random_density(&mut rng, 16)).unwrap();
        let direct = partial_trace(&rho, &["B", "D"]).unwrap();
        let staged = partial_trace(&partial_trace(&rho, &["B", "C", "D"]).unwrap(), &["B", "D"]).unwrap();
        prop_assert!(max_abs_diff(direct.entries(), staged.entries()) < 1e-12);
        prop_assert!((direct.entries().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigensystem_reconstructs_block_degenerate_operators(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = SiteRegistry::qubits(["A", "B", "C"]).unwrap();
        let h = random_hermitian(&mut rng, 2).kronecker(&CMatrix::identity(4, 4));
        let op = HermitianOperator::new(reg, h.clone()).unwrap();
        let back = op.eigen().reconstruct_with(|l| Complex64::new(l, 0.0));
        prop_assert!(max_abs_diff(&back, &h) < 1e-12);
    }

    #[test]
    fn evolution_is_a_one_parameter_group(seed in any::<u64>(), s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = SiteRegistry::qubits(["A", "B", "C"]).unwrap();
        let rho = DensityMatrix::new(reg.clone(), random_density(&mut rng, 8)).unwrap();
        let prop = Propagator::new(&HermitianOperator::new(reg, random_hermitian(&mut rng, 8)).unwrap());
        let direct = prop.evolve(&rho, s + t);
        let staged = prop.evolve(&prop.evolve(&rho, s), t);
        prop_assert!(max_abs_diff(direct.entries(), staged.entries()) < 1e-9);
        let ds = von_neumann_entropy(&direct).unwrap() - von_neumann_entropy(&rho).unwrap();
        prop_assert!(ds.abs() < 1e-8);
    }

    #[test]
    fn complement_flow_is_the_target_entropy_change(seed in any::<u64>(), target in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, 4);
        let rho = DensityMatrix::new(spec.registry().clone(), random_density(&mut rng, 16)).unwrap();
        let others = FrozenSet::new(SITES.iter().filter(|s| **s != SITES[target]).copied());
        let req = FlowRequest::new(spec, rho, [SITES[target]], others, TimeGrid::new(2.0, 20).unwrap()).unwrap();
        let series = FlowEngine::new().cumulative_flow(&req).unwrap();
        for (t, s) in series.cumulative.iter().zip(&series.s_target) {
            prop_assert!((t - (s - series.s_target[0])).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_bipartite_flows_are_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reg = SiteRegistry::qubits(["A", "B"]).unwrap();
        let spec = HamiltonianSpec::new(reg.clone())
            .add_coupling("A", "B", rng.random::<f64>() * 3.0 + 0.1).unwrap()
            .add_field_z("A", rng.random::<f64>()).unwrap()
            .add_field_z("B", rng.random::<f64>()).unwrap();
        let rho = DensityMatrix::pure(reg, &random_pure(&mut rng, 4)).unwrap();
        let grid = TimeGrid::new(2.0, 40).unwrap();
        let ab = FlowEngine::new()
            .cumulative_flow(&FlowRequest::new(spec.clone(), rho.clone(), ["B"], FrozenSet::new(["A"]), grid).unwrap())
            .unwrap();
        let ba = FlowEngine::new()
            .cumulative_flow(&FlowRequest::new(spec, rho, ["A"], FrozenSet::new(["B"]), grid).unwrap())
            .unwrap();
        for k in 0..ab.len() {
            prop_assert!((ab.s_target[k] - ba.s_target[k]).abs() < 1e-9);
            prop_assert!((ab.cumulative[k] - ba.cumulative[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn refining_the_grid_only_changes_sampling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, 3);
        let rho = DensityMatrix::new(spec.registry().clone(), random_density(&mut rng, 8)).unwrap();
        let req = |steps| {
            FlowRequest::new(spec.clone(), rho.clone(), ["C"], FrozenSet::new(["A"]), TimeGrid::new(1.5, steps).unwrap())
                .unwrap()
        };
        let coarse = FlowEngine::new().cumulative_flow(&req(15)).unwrap();
        let fine = FlowEngine::new().cumulative_flow(&req(30)).unwrap();
        for k in 0..coarse.len() {
            prop_assert!((coarse.cumulative[k] - fine.cumulative[2 * k]).abs() < 1e-9);
        }
    }
}

/// Random two-site Hamiltonian on `a, b` as a sum of Pauli products.
fn pair_terms(rng: &mut ChaCha8Rng, a: &str, b: &str) -> Vec<OperatorTerm> {
    let paulis = || [LocalOp::Matrix(CMatrix::identity(2, 2)), LocalOp::X, LocalOp::Y, LocalOp::Z];
    let mut out = Vec::new();
    for p in paulis() {
        for q in paulis() {
            out.push(OperatorTerm::new(rng.random::<f64>() - 0.5, [(a, p.clone()), (b, q)]));
        }
    }
    out
}

#[test]
fn nil_causality_for_both_product_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let reg = SiteRegistry::qubits(["A", "B", "C"]).unwrap();
    let grid = TimeGrid::new(4.0, 40).unwrap();
    let mut worst = 0.0f64;
    for k in 0..100 {
        // M_A (x) N_BC: nothing reaches A from B; O_AC (x) Q_B: nothing reaches B from A
        let (lone, pair, source) = if k % 2 == 0 { ("A", ["B", "C"], "B") } else { ("B", ["A", "C"], "A") };
        let mut spec = HamiltonianSpec::new(reg.clone());
        spec.push(OperatorTerm::new(1.0, [(lone, LocalOp::Matrix(random_hermitian(&mut rng, 2)))])).unwrap();
        for t in pair_terms(&mut rng, pair[0], pair[1]) {
            spec.push(t).unwrap();
        }
        let rho = DensityMatrix::new(reg.clone(), random_density(&mut rng, 8)).unwrap();
        let series = FlowEngine::new()
            .cumulative_flow(&FlowRequest::new(spec, rho, [lone], FrozenSet::new([source]), grid).unwrap())
            .unwrap();
        worst = series.cumulative.iter().chain(&series.rate).fold(worst, |m, v| m.max(v.abs()));

        let s0 = series.s_target[0];
        assert!(series.s_target.iter().all(|s| (s - s0).abs() < 1e-8));
    }
    assert!(worst < 1e-8, "max |T| = {worst:.2e}");
}
