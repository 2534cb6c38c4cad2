//! Exact symbolic calculus on coordinate charts: polynomials, jets,
//! differential forms and multivector fields.
//!
//! Conventions: `dx_I` and `∂_I` are indexed by strictly increasing index
//! lists; a 2-form `Σ_{i<j} c_ij dx_i∧dx_j` takes the value `c_ij` on
//! `(∂_i, ∂_j)`; the Schouten bracket satisfies `[v, f] = v(f)` and
//! reduces to the Lie bracket on vector fields.

mod field;
pub mod jet;
pub mod poly;
mod text;

use std::sync::Arc;

use thiserror::Error;

pub use field::{
    exterior_d, interior, invert_two_form_jet, pullback, pushforward_linear, schouten, wedge,
    Alternating, Contravariant, Covariant, DiffForm, MultiVector, PolyMap,
};
pub use jet::{JetMeta, JetScalar};
pub use poly::Poly;
pub use text::{format_form, format_multivector, format_poly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("operands live on different charts")]
    ChartMismatch,
    #[error("jets with different base points or jet variables")]
    JetBaseMismatch,
    #[error("accuracy exhausted: {needed} orders needed, {available} available")]
    AccuracyExhausted { available: u32, needed: u32 },
    #[error("2-form block {block:?} is degenerate at the base point")]
    Degenerate { block: Vec<usize> },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("expected a vector field (degree 1)")]
    NotVector,
    #[error("{0}")]
    Unsupported(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChartError {
    #[error("duplicate coordinate name `{0}`")]
    DuplicateName(String),
    #[error("empty coordinate name")]
    EmptyName,
}

/// Coordinate names, optionally split into base and fiber blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    names: Vec<String>,
    split: Option<(usize, usize)>,
}

impl Chart {
    pub fn new(names: Vec<String>) -> Result<Arc<Chart>, ChartError> {
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(ChartError::EmptyName);
            }
            if names[..i].contains(n) {
                return Err(ChartError::DuplicateName(n.clone()));
            }
        }
        Ok(Arc::new(Chart { names, split: None }))
    }

    /// `x1, .., xn`.
    pub fn standard(n: usize) -> Arc<Chart> {
        Arc::new(Chart { names: (1..=n).map(|i| format!("x{i}")).collect(), split: None })
    }

    pub fn split(base: Vec<String>, fiber: Vec<String>) -> Result<Arc<Chart>, ChartError> {
        let (b, f) = (base.len(), fiber.len());
        let mut names = base;
        names.extend(fiber);
        let chart = Chart::new(names)?;
        Ok(Arc::new(Chart { split: Some((b, f)), ..(*chart).clone() }))
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn split_dims(&self) -> Option<(usize, usize)> {
        self.split
    }

    pub fn base_dims(&self) -> usize {
        self.split.map_or(self.dim(), |(b, _)| b)
    }

    pub fn fiber_indices(&self) -> Vec<usize> {
        match self.split {
            Some((b, f)) => (b..b + f).collect(),
            None => vec![],
        }
    }
}

pub(crate) fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
