use std::collections::HashMap;

use parking_lot::RwLock;

use crate::error::Result;
use crate::hamiltonians::HamiltonianSpec;
use crate::qdm::HermitianOperator;

/// Materialized operators keyed by their spec. Each operator carries its own
/// lazily computed eigensystem, so a cache hit also reuses the
/// diagonalization.
#[derive(Debug, Default)]
pub struct EigenCache {
    entries: RwLock<HashMap<String, HermitianOperator>>,
}

impl EigenCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.read().is_empty()
    }

    pub fn materialize(&self, spec: &HamiltonianSpec) -> Result<HermitianOperator> {
        // Debug output round-trips every f64, so equal keys mean equal specs
        let key = format!("{spec:?}");
        if let Some(op) = self.entries.read().get(&key) {
            return Ok(op.clone());
        }
        let op = spec.materialize()?;
        let mut guard = self.entries.write();
        Ok(guard.entry(key).or_insert(op).clone())
    }
}
