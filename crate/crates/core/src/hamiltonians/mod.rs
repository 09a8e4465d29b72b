//! Term-level Hamiltonian algebra.
//!
//! A [`HamiltonianSpec`] is a list of [`OperatorTerm`]s, each a real
//! coefficient times a product of single-site factors. Because a term's
//! support is syntactic, freezing a set of sites is a filter over terms and
//! needs no matrix arithmetic; matrices only appear in [`HamiltonianSpec::materialize`].

mod gates;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qdm::{
    embed, hermiticity_deviation, max_abs_diff, pauli, CMatrix, HermitianOperator, SiteRegistry, TOL_HERMITIAN,
};

pub use gates::{embed_on_sites, gate_unitary, Gate};

/// A named or explicit single-site matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalOp {
    X,
    Y,
    Z,
    /// `sigma_+ = |0><1|`
    Plus,
    /// `sigma_- = |1><0|`
    Minus,
    Matrix(CMatrix),
}

impl LocalOp {
    pub fn matrix(&self, dim: usize, label: &str) -> Result<CMatrix> {
        let m = match self {
            LocalOp::X => pauli::sigma_x(),
            LocalOp::Y => pauli::sigma_y(),
            LocalOp::Z => pauli::sigma_z(),
            LocalOp::Plus => pauli::sigma_plus(),
            LocalOp::Minus => pauli::sigma_minus(),
            LocalOp::Matrix(m) => m.clone(),
        };
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                label: label.to_string(),
                expected: dim,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(m)
    }

    pub fn adjoint(&self) -> LocalOp {
        match self {
            LocalOp::Plus => LocalOp::Minus,
            LocalOp::Minus => LocalOp::Plus,
            LocalOp::Matrix(m) => LocalOp::Matrix(m.adjoint()),
            other => other.clone(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        match self {
            LocalOp::X | LocalOp::Y | LocalOp::Z => true,
            LocalOp::Plus | LocalOp::Minus => false,
            LocalOp::Matrix(m) => m.nrows() == m.ncols() && hermiticity_deviation(m) <= TOL_HERMITIAN,
        }
    }

    fn same_as(&self, other: &LocalOp) -> bool {
        match (self, other) {
            (LocalOp::Matrix(a), LocalOp::Matrix(b)) => a.shape() == b.shape() && max_abs_diff(a, b) <= TOL_HERMITIAN,
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for LocalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalOp::X => write!(f, "sx"),
            LocalOp::Y => write!(f, "sy"),
            LocalOp::Z => write!(f, "sz"),
            LocalOp::Plus => write!(f, "s+"),
            LocalOp::Minus => write!(f, "s-"),
            LocalOp::Matrix(m) => write!(f, "M{}", m.nrows()),
        }
    }
}

/// `coefficient * prod_site factor(site)`. An empty factor map is an
/// identity shift.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    pub coefficient: f64,
    pub factors: BTreeMap<String, LocalOp>,
}

impl OperatorTerm {
    pub fn new<S: Into<String>>(coefficient: f64, factors: impl IntoIterator<Item = (S, LocalOp)>) -> Self {
        Self { coefficient, factors: factors.into_iter().map(|(l, op)| (l.into(), op)).collect() }
    }

    pub fn identity_shift(coefficient: f64) -> Self {
        Self { coefficient, factors: BTreeMap::new() }
    }

    pub fn is_identity_shift(&self) -> bool {
        self.factors.is_empty()
    }

    /// Labels carrying a non-identity factor.
    pub fn support(&self) -> BTreeSet<&str> {
        self.factors.keys().map(String::as_str).collect()
    }

    pub fn touches(&self, labels: &BTreeSet<String>) -> bool {
        self.factors.keys().any(|l| labels.contains(l))
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.factors.values().all(LocalOp::is_hermitian)
    }

    pub fn adjoint(&self) -> OperatorTerm {
        OperatorTerm {
            coefficient: self.coefficient,
            factors: self.factors.iter().map(|(l, op)| (l.clone(), op.adjoint())).collect(),
        }
    }

    fn same_as(&self, other: &OperatorTerm) -> bool {
        self.coefficient == other.coefficient
            && self.factors.len() == other.factors.len()
            && self.factors.iter().zip(&other.factors).all(|((la, a), (lb, b))| la == lb && a.same_as(b))
    }

    pub fn materialize(&self, registry: &SiteRegistry) -> Result<CMatrix> {
        let mut factors = Vec::with_capacity(self.factors.len());
        for (label, op) in &self.factors {
            let dim = registry.site_dim(label)?;
            factors.push((label.as_str(), op.matrix(dim, label)?));
        }
        Ok(embed(&factors, registry)? * Complex64::new(self.coefficient, 0.0))
    }
}

impl fmt::Display for OperatorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        if self.factors.is_empty() {
            return write!(f, " I");
        }
        for (label, op) in &self.factors {
            write!(f, " {op}[{label}]")?;
        }
        Ok(())
    }
}

/// Set of site labels removed from the dynamics.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FrozenSet {
    labels: BTreeSet<String>,
}

impl FrozenSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        Self { labels: labels.into_iter().map(Into::into).collect() }
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn union(&self, other: &FrozenSet) -> FrozenSet {
        FrozenSet { labels: self.labels.union(&other.labels).cloned().collect() }
    }
}

impl fmt::Display for FrozenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        write!(f, "{}", v.join(""))
    }
}

/// Options for [`HamiltonianSpec::freeze_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FreezeOptions {
    /// Keep terms acting only inside the frozen set (their free
    /// Hamiltonians). Off by default.
    pub retain_frozen_local: bool,
}

/// Sum of operator terms over a site registry.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    registry: SiteRegistry,
    terms: Vec<OperatorTerm>,
}

impl HamiltonianSpec {
    pub fn new(registry: SiteRegistry) -> Self {
        Self { registry, terms: Vec::new() }
    }

    pub fn with_terms(registry: SiteRegistry, terms: Vec<OperatorTerm>) -> Result<Self> {
        for t in &terms {
            for label in t.factors.keys() {
                registry.index_of(label)?;
            }
        }
        Ok(Self { registry, terms })
    }

    pub fn registry(&self) -> &SiteRegistry {
        &self.registry
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    pub fn push(&mut self, term: OperatorTerm) -> Result<()> {
        for label in term.factors.keys() {
            self.registry.index_of(label)?;
        }
        self.terms.push(term);
        Ok(())
    }

    /// Returns a copy with `eta (s+_i s-_j + s-_i s+_j)` appended.
    pub fn add_coupling(&self, i: &str, j: &str, eta: f64) -> Result<HamiltonianSpec> {
        let mut out = self.clone();
        for term in build_xy_coupling(i, j, eta)? {
            out.push(term)?;
        }
        Ok(out)
    }

    /// Returns a copy with `b sigma_z` on `site` appended.
    pub fn add_field_z(&self, site: &str, b: f64) -> Result<HamiltonianSpec> {
        let mut out = self.clone();
        out.push(build_field_z(&self.registry, site, b)?)?;
        Ok(out)
    }

    /// Removes every term touching `frozen`, plus identity shifts.
    pub fn freeze(&self, frozen: &FrozenSet) -> Result<HamiltonianSpec> {
        self.freeze_with(frozen, FreezeOptions::default())
    }

    pub fn freeze_with(&self, frozen: &FrozenSet, opts: FreezeOptions) -> Result<HamiltonianSpec> {
        for label in frozen.labels() {
            self.registry.index_of(label)?;
        }
        let terms = self
            .terms
            .iter()
            .filter(|t| !t.is_identity_shift())
            .filter(|t| {
                if !t.touches(frozen.labels()) {
                    return true;
                }
                opts.retain_frozen_local && t.factors.keys().all(|l| frozen.contains(l))
            })
            .cloned()
            .collect();
        Ok(HamiltonianSpec { registry: self.registry.clone(), terms })
    }

    /// Checks that every non-self-adjoint term has a distinct conjugate
    /// partner in the spec.
    pub fn check_conjugate_pairs(&self) -> Result<()> {
        let mut used = vec![false; self.terms.len()];
        for (i, term) in self.terms.iter().enumerate() {
            if term.is_self_adjoint() || used[i] {
                continue;
            }
            let adj = term.adjoint();
            let partner = self.terms.iter().enumerate().position(|(j, t)| j != i && !used[j] && t.same_as(&adj));
            match partner {
                Some(j) => {
                    used[i] = true;
                    used[j] = true;
                }
                None => return Err(Error::UnpairedTerm(term.to_string())),
            }
        }
        Ok(())
    }

    /// Full `D x D` operator. Fails on unpaired non-Hermitian terms or a
    /// non-Hermitian sum.
    pub fn materialize(&self) -> Result<HermitianOperator> {
        self.check_conjugate_pairs()?;
        let d = self.registry.dim();
        let mut sum = CMatrix::zeros(d, d);
        for term in &self.terms {
            sum += term.materialize(&self.registry)?;
        }
        HermitianOperator::new(self.registry.clone(), sum)
    }
}

impl fmt::Display for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `eta s+_i s-_j` and `eta s-_i s+_j`.
pub fn build_xy_coupling(i: &str, j: &str, eta: f64) -> Result<Vec<OperatorTerm>> {
    if i == j {
        return Err(Error::SelfCoupling(i.to_string()));
    }
    Ok(vec![
        OperatorTerm::new(eta, [(i, LocalOp::Plus), (j, LocalOp::Minus)]),
        OperatorTerm::new(eta, [(i, LocalOp::Minus), (j, LocalOp::Plus)]),
    ])
}

/// `b sigma_z` on `site`.
pub fn build_field_z(registry: &SiteRegistry, site: &str, b: f64) -> Result<OperatorTerm> {
    registry.index_of(site)?;
    Ok(OperatorTerm::new(b, [(site, LocalOp::Z)]))
}

/// XY star with `center` coupled to each leaf. The registry is the leaves in
/// order followed by the center, all qubits.
pub fn build_star(center: &str, leaves: &[(&str, f64)]) -> Result<HamiltonianSpec> {
    let mut labels: Vec<&str> = leaves.iter().map(|(l, _)| *l).collect();
    if labels.contains(&center) {
        return Err(Error::DuplicateLabel(center.to_string()));
    }
    labels.push(center);
    let registry = SiteRegistry::qubits(labels)?;
    let mut spec = HamiltonianSpec::new(registry);
    for (leaf, eta) in leaves {
        spec = spec.add_coupling(leaf, center, *eta)?;
    }
    Ok(spec)
}
