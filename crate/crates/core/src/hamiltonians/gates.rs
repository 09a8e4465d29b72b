use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qdm::{unitarity_deviation, CMatrix, SiteRegistry};

const TOL_UNITARY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// Controlled NOT; the first site is the control.
    Cnot,
    Swap,
    /// Unitary on the listed sites, in the order they are listed.
    Custom(CMatrix),
}

impl Gate {
    /// Parses `CNOT` or `SWAP` (case-insensitive).
    pub fn from_name(name: &str) -> Result<Gate> {
        match name.to_ascii_uppercase().as_str() {
            "CNOT" | "CX" => Ok(Gate::Cnot),
            "SWAP" => Ok(Gate::Swap),
            _ => Err(Error::UnknownGate(name.to_string())),
        }
    }
}

/// Full-space unitary for `gate` acting on `sites`.
pub fn gate_unitary(gate: &Gate, sites: &[&str], registry: &SiteRegistry) -> Result<CMatrix> {
    for (k, a) in sites.iter().enumerate() {
        if sites[..k].contains(a) {
            return Err(Error::DuplicateLabel(a.to_string()));
        }
    }
    let local = match gate {
        Gate::Cnot => {
            check_arity("CNOT", sites, 2)?;
            for s in sites {
                if registry.site_dim(s)? != 2 {
                    return Err(Error::InvalidArgument(format!("CNOT needs qubits, `{s}` is not")));
                }
            }
            let mut m = CMatrix::zeros(4, 4);
            for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                m[(row, col)] = Complex64::new(1.0, 0.0);
            }
            m
        }
        Gate::Swap => {
            check_arity("SWAP", sites, 2)?;
            let d = registry.site_dim(sites[0])?;
            if registry.site_dim(sites[1])? != d {
                return Err(Error::InvalidArgument("SWAP needs sites of equal dimension".into()));
            }
            let mut m = CMatrix::zeros(d * d, d * d);
            for a in 0..d {
                for b in 0..d {
                    m[(b * d + a, a * d + b)] = Complex64::new(1.0, 0.0);
                }
            }
            m
        }
        Gate::Custom(m) => {
            let dev = unitarity_deviation(m);
            if dev > TOL_UNITARY {
                return Err(Error::NonUnitary(dev));
            }
            m.clone()
        }
    };
    embed_on_sites(&local, sites, registry)
}

fn check_arity(name: &str, sites: &[&str], n: usize) -> Result<()> {
    if sites.len() != n {
        return Err(Error::InvalidArgument(format!("{name} acts on {n} sites, got {}", sites.len())));
    }
    Ok(())
}

/// Lifts an operator on the listed sites (their product space, in list
/// order) to the full registry space.
pub fn embed_on_sites(local: &CMatrix, sites: &[&str], registry: &SiteRegistry) -> Result<CMatrix> {
    let idx: Vec<usize> = sites.iter().map(|s| registry.index_of(s)).collect::<Result<_>>()?;
    let dims: Vec<usize> = idx.iter().map(|&k| registry.sites()[k].dim).collect();
    let local_dim: usize = dims.iter().product();
    if local.nrows() != local_dim || local.ncols() != local_dim {
        return Err(Error::InvalidArgument(format!(
            "local operator is {}x{}, sites span dimension {local_dim}",
            local.nrows(),
            local.ncols()
        )));
    }
    let strides = registry.strides();
    let all_dims: Vec<usize> = registry.sites().iter().map(|s| s.dim).collect();
    let d = registry.dim();
    let mut out = CMatrix::zeros(d, d);
    for row in 0..d {
        let mut local_row = 0;
        let mut base = row;
        for &k in &idx {
            let digit = (row / strides[k]) % all_dims[k];
            local_row = local_row * all_dims[k] + digit;
            base -= digit * strides[k];
        }
        for local_col in 0..local_dim {
            let v = local[(local_row, local_col)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut col = base;
            let mut rem = local_col;
            for (slot, &k) in idx.iter().enumerate().rev() {
                col += (rem % dims[slot]) * strides[k];
                rem /= dims[slot];
            }
            out[(row, col)] += v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdm::{max_abs_diff, pauli, unitarity_deviation};

    fn reg() -> SiteRegistry {
        SiteRegistry::qubits(["A", "B"]).unwrap()
    }

    #[test]
    fn cnot_truth_table() {
        let u = gate_unitary(&Gate::Cnot, &["A", "B"], &reg()).unwrap();
        // |10> (index 2) -> |11> (index 3)
        assert_eq!(u[(3, 2)], Complex64::new(1.0, 0.0));
        assert_eq!(u[(0, 0)], Complex64::new(1.0, 0.0));
        assert!(unitarity_deviation(&u) < 1e-12);
        // reversed control
        let r = gate_unitary(&Gate::Cnot, &["B", "A"], &reg()).unwrap();
        assert_eq!(r[(3, 1)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn swap_is_three_alternating_cnots() {
        let ab = gate_unitary(&Gate::Cnot, &["A", "B"], &reg()).unwrap();
        let ba = gate_unitary(&Gate::Cnot, &["B", "A"], &reg()).unwrap();
        let swap = gate_unitary(&Gate::Swap, &["A", "B"], &reg()).unwrap();
        assert!(max_abs_diff(&(&ab * &ba * &ab), &swap) < 1e-15);
    }

    #[test]
    fn custom_gate_checks_unitarity() {
        let h = (pauli::sigma_x() + pauli::sigma_z()) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let u = gate_unitary(&Gate::Custom(h.clone()), &["B"], &reg()).unwrap();
        assert!(max_abs_diff(&u, &pauli::identity(2).kronecker(&h)) < 1e-15);
        assert!(matches!(gate_unitary(&Gate::Custom(pauli::sigma_plus()), &["A"], &reg()), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn gate_errors() {
        assert_eq!(Gate::from_name("toffoli"), Err(Error::UnknownGate("toffoli".into())));
        assert_eq!(Gate::from_name("cnot"), Ok(Gate::Cnot));
        assert!(gate_unitary(&Gate::Cnot, &["A", "A"], &reg()).is_err());
        assert!(gate_unitary(&Gate::Swap, &["A"], &reg()).is_err());
    }

    #[test]
    fn embed_on_sites_respects_listed_order() {
        let r = SiteRegistry::qubits(["A", "B", "C"]).unwrap();
        let m = pauli::sigma_plus().kronecker(&pauli::sigma_z());
        let got = embed_on_sites(&m, &["C", "A"], &r).unwrap();
        let oracle = pauli::sigma_z().kronecker(&pauli::identity(2)).kronecker(&pauli::sigma_plus());
        assert!(max_abs_diff(&got, &oracle) < 1e-15);
    }
}
