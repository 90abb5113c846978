//! Multiplication, triangular solves and permutation application over Z/pZ.
//!
//! Every routine records the reductions it performs in a caller-supplied
//! [`RedLedger`](crate::ledger::RedLedger). Parallel versions split a free
//! dimension into `grain` independent blocks, give each task its own ledger
//! and merge after the join.

mod gemm;
mod kernel;
mod laswp;
mod trsm;

pub use gemm::{fgemm, fgemm_classical, pfgemm};
pub use laswp::pflaswp;
pub use trsm::{ftrsm, pftrsm};


/// Multiplication strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GemmPolicy {
    /// Maximum number of Winograd steps; zero means classical only.
    pub winograd_levels: usize,
    /// Smallest dimension for which a Winograd step is taken.
    pub winograd_threshold: usize,
    /// Parts per split dimension in parallel runs; `None` uses the worker count.
    pub parallel_grain: Option<usize>,
}

impl Default for GemmPolicy {
    fn default() -> Self {
        Self {
            winograd_levels: 3,
            winograd_threshold: 2400,
            parallel_grain: None,
        }
    }
}

impl GemmPolicy {
    /// Classical multiplication only, as required for exact count checks.
    pub fn classical() -> Self {
        Self {
            winograd_levels: 0,
            ..Self::default()
        }
    }

    pub fn winograd(levels: usize, threshold: usize) -> Self {
        Self {
            winograd_levels: levels,
            winograd_threshold: threshold,
            parallel_grain: None,
        }
    }

    pub fn with_grain(mut self, grain: usize) -> Self {
        self.parallel_grain = Some(grain);
        self
    }

    pub(crate) fn grain(&self, workers: usize) -> usize {
        self.parallel_grain.unwrap_or(workers).max(1)
    }
}

/// Side of the triangular operand in a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Solve `A X = B`.
    Left,
    /// Solve `X A = B`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uplo {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diag {
    Unit,
    NonUnit,
}
