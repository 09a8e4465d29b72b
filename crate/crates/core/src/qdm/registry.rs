use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the total Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 1 << 14;

/// Environment variable that overrides [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "QLIANG_DIM_CAP";

/// The dimension cap in effect, honouring `QLIANG_DIM_CAP` when it parses.
pub fn dim_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_DIM_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Site {
    pub label: String,
    pub dim: usize,
}

/// Ordered, labelled tensor factors of a Hilbert space.
///
/// The first site is the most significant factor of the Kronecker product,
/// so basis index `i` decomposes into digits `(i_0, i_1, ...)` with
/// `i = i_0 * (d_1 d_2 ...) + i_1 * (d_2 ...) + ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteRegistry {
    sites: Vec<Site>,
    total: usize,
}

impl SiteRegistry {
    /// Builds a registry checked against [`dim_cap`].
    pub fn new<S: Into<String>>(sites: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        Self::with_cap(sites, dim_cap())
    }

    pub fn with_cap<S: Into<String>>(sites: impl IntoIterator<Item = (S, usize)>, cap: usize) -> Result<Self> {
        let mut out: Vec<Site> = Vec::new();
        let mut total: usize = 1;
        for (label, dim) in sites {
            let label = label.into();
            if out.iter().any(|s| s.label == label) {
                return Err(Error::DuplicateLabel(label));
            }
            if dim < 2 {
                return Err(Error::SiteTooSmall(label));
            }
            total = total.checked_mul(dim).ok_or(Error::DimensionCap { dim: usize::MAX, cap })?;
            if total > cap {
                return Err(Error::DimensionCap { dim: total, cap });
            }
            out.push(Site { label, dim });
        }
        Ok(Self { sites: out, total })
    }

    /// All sites are qubits.
    pub fn qubits<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(labels.into_iter().map(|l| (l, 2)))
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Total dimension `D`.
    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.sites.iter().map(|s| s.label.as_str())
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.sites.iter().position(|s| s.label == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.sites.iter().any(|s| s.label == label)
    }

    pub fn site_dim(&self, label: &str) -> Result<usize> {
        Ok(self.sites[self.index_of(label)?].dim)
    }

    /// Row-major stride of each site in the flat basis index.
    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.sites.len()];
        for k in (0..self.sites.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.sites[k + 1].dim;
        }
        strides
    }

    /// Sub-registry of `keep`, in this registry's order. Unknown labels are
    /// an error; duplicates in `keep` are ignored.
    pub fn subset<S: AsRef<str>>(&self, keep: &[S]) -> Result<SiteRegistry> {
        for k in keep {
            self.index_of(k.as_ref())?;
        }
        let sites: Vec<Site> =
            self.sites.iter().filter(|s| keep.iter().any(|k| k.as_ref() == s.label)).cloned().collect();
        let total = sites.iter().map(|s| s.dim).product();
        Ok(SiteRegistry { sites, total })
    }
}

impl fmt::Display for SiteRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sites.iter().map(|s| format!("{}:{}", s.label, s.dim)).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}
