use qliang::classical::{
    classical_flow_rate, evolve_density, joint_entropy, marginal_entropy, Axis, DensityGrid, Domain, VectorField2D,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SIGMA: (f64, f64) = (1.0, 0.5);

fn rotation() -> VectorField2D {
    VectorField2D::linear([[0.0, -1.0], [1.0, 0.0]])
}

/// Covariance of the anisotropic Gaussian after rotating by `theta`.
fn rotated_cov(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    let (a, b) = (SIGMA.0 * SIGMA.0, SIGMA.1 * SIGMA.1);
    [[c * c * a + s * s * b, c * s * (a - b)], [c * s * (a - b), s * s * a + c * c * b]]
}

fn rotated(theta: f64, n: usize) -> DensityGrid {
    DensityGrid::gaussian(Domain::square(6.0).unwrap(), n, n, rotated_cov(theta)).unwrap()
}

/// `dS1/dt` of a Gaussian marginal under rigid rotation, in closed form.
fn analytic_marginal_rate(theta: f64) -> f64 {
    let c = rotated_cov(theta);
    -std::f64::consts::LOG2_E * c[0][1] / c[0][0]
}

#[test]
fn rotation_flow_matches_closed_form() {
    let rho = rotated(0.4, 240);
    let t = classical_flow_rate(&rho, &rotation(), Axis::X1).unwrap();
    let exact = analytic_marginal_rate(0.4);
    assert!((t - exact).abs() < 1e-4, "T = {t}, exact {exact}");
    assert!(t.abs() > 0.1);
}

#[test]
fn divergence_free_flow_equals_marginal_entropy_rate() {
    let field = rotation();
    let dt = 0.004;
    let mut states = vec![rotated(0.0, 240)];
    for _ in 0..102 {
        let next = evolve_density(states.last().unwrap(), &field, dt, 1).unwrap();
        states.push(next);
    }
    let k = 100;
    let ds1 = (marginal_entropy(&states[k + 2], Axis::X1).bits - marginal_entropy(&states[k - 2], Axis::X1).bits)
        / (4.0 * dt);
    let t21 = classical_flow_rate(&states[k], &field, Axis::X1).unwrap();
    assert!((t21 - ds1).abs() < 1e-3, "T = {t21}, dS1/dt = {ds1}");
    assert!((t21 - analytic_marginal_rate(0.4)).abs() < 1e-3);
    assert!((states[k].mass() - 1.0).abs() < 1e-10);
}

#[test]
fn rotation_keeps_joint_entropy() {
    let rho = rotated(0.0, 240);
    let out = evolve_density(&rho, &rotation(), 0.004, 250).unwrap();
    let drift = joint_entropy(&out).bits - joint_entropy(&rho).bits;
    assert!(drift.abs() < 5e-3, "{drift}");
}

#[test]
fn linear_damping_contracts_at_divergence_rate() {
    let rho = DensityGrid::gaussian(Domain::square(6.0).unwrap(), 240, 240, [[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let field = VectorField2D::linear([[-1.0, 0.0], [0.0, -1.0]]);
    let (dt, steps) = (0.004, 25);
    let out = evolve_density(&rho, &field, dt, steps).unwrap();
    let rate = (joint_entropy(&out).bits - joint_entropy(&rho).bits) / (dt * steps as f64);
    let expected = -2.0 / std::f64::consts::LN_2;
    assert!((rate - expected).abs() < 1e-2 * expected.abs(), "{rate} vs {expected}");
}

#[test]
fn nil_causality_and_asymmetry() {
    // x1 evolves on its own; x2 is driven by x1
    let field = VectorField2D::linear([[-1.0, 0.0], [1.0, -1.0]]);
    let rho = rotated(0.4, 240);
    let t21 = classical_flow_rate(&rho, &field, Axis::X1).unwrap();
    let t12 = classical_flow_rate(&rho, &field, Axis::X2).unwrap();
    assert!(t21.abs() < 1e-3, "{t21}");
    assert!(t12.abs() > 0.05, "{t12}");
    // refining the grid keeps it zero
    let fine = classical_flow_rate(&rotated(0.4, 480), &field, Axis::X1).unwrap();
    assert!(fine.abs() < 1e-3);
}

#[test]
fn numeric_field_derivatives_agree_with_analytic() {
    let analytic = rotation();
    let numeric = VectorField2D::new(|_, x2| -x2, |x1, _| x1);
    let rho = rotated(0.7, 120);
    let a = classical_flow_rate(&rho, &analytic, Axis::X1).unwrap();
    let b = classical_flow_rate(&rho, &numeric, Axis::X1).unwrap();
    assert!((a - b).abs() < 1e-9);
}

/// Histogram estimate of the differential entropy of `xs` in bits.
fn histogram_entropy(xs: &[f64], lo: f64, hi: f64, bins: usize) -> f64 {
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        if x >= lo && x < hi {
            counts[((x - lo) / w) as usize] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * (p / w).log2()
        })
        .sum()
}

#[test]
fn rotation_flow_matches_monte_carlo_differencing() {
    let theta = 0.4;
    let h = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let samples: Vec<(f64, f64)> = (0..1_000_000)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            (SIGMA.0 * z1, SIGMA.1 * z2)
        })
        .collect();
    // the flow of F = (-x2, x1) is rotation by the elapsed time
    let x1_at = |angle: f64| -> Vec<f64> {
        let (s, c) = angle.sin_cos();
        samples.iter().map(|&(a, b)| c * a - s * b).collect()
    };
    let mc = (histogram_entropy(&x1_at(theta + h), -6.0, 6.0, 240)
        - histogram_entropy(&x1_at(theta - h), -6.0, 6.0, 240))
        / (2.0 * h);
    let t = classical_flow_rate(&rotated(theta, 240), &rotation(), Axis::X1).unwrap();
    assert!((t - mc).abs() < 5e-3, "T = {t}, Monte Carlo {mc}");
}

#[test]
fn identical_gaussian_factors_have_equal_marginals() {
    let rho = DensityGrid::gaussian(Domain::square(6.0).unwrap(), 100, 100, [[0.8, 0.0], [0.0, 0.8]]).unwrap();
    let a = marginal_entropy(&rho, Axis::X1).bits;
    let b = marginal_entropy(&rho, Axis::X2).bits;
    assert!((a - b).abs() < 1e-12);
}
