//! PLUQ factorizations.
//!
//! Every routine overwrites its input with the packed factors: `L` is unit
//! lower triangular in the first `r` columns (diagonal implicit) and `U` is
//! upper triangular in the first `r` rows. Applying `P` forward to the rows
//! and `Q` forward to the columns of the original matrix yields `L U`.
//!
//! Full-rank block LU ([`pluq_fullrank`]) needs a generic rank profile and
//! never permutes. The rank-revealing routines accept any matrix and only
//! use order-preserving rotations, so the row and column rank profiles can be
//! read off the permutations with [`extract_profiles`].

mod base;
mod fullrank;
mod iterative;
mod recursive;

pub use base::{crout_base, rr_base};
pub use fullrank::{
    pluq_fullrank, variant_task_graph, BlockRegion, FullRankVariant, IterationTasks, LoopKind,
    TaskNode,
};
pub use iterative::{pluq_slab_iterative, pluq_tile_iterative};
pub use recursive::{pluq_slab_recursive, pluq_tile_recursive};

use crate::blas::GemmPolicy;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::ledger::RedLedger;
use crate::matrix::Mat;
use crate::perm::{Move, PermSeq};

/// How the pivots of a factorization were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pivoting {
    /// No pivoting; the input was assumed to have a generic rank profile.
    Generic,
    /// Row-major pivot search with order-preserving rotations.
    RankRevealing,
}

/// Permutations and rank of an in-place factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pluq {
    pub p: PermSeq,
    pub q: PermSeq,
    pub rank: usize,
    pub pivoting: Pivoting,
}

impl Pluq {
    pub(crate) fn identity(m: usize, n: usize, rank: usize, pivoting: Pivoting) -> Self {
        Self {
            p: PermSeq::identity(m),
            q: PermSeq::identity(n),
            rank,
            pivoting,
        }
    }

    pub fn into_result(self, lu: Mat) -> PluqResult {
        PluqResult {
            lu,
            p: self.p,
            q: self.q,
            rank: self.rank,
            pivoting: self.pivoting,
        }
    }
}

/// Packed factors together with their permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PluqResult {
    pub lu: Mat,
    pub p: PermSeq,
    pub q: PermSeq,
    pub rank: usize,
    pub pivoting: Pivoting,
}

/// Row and column rank profiles.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankProfiles {
    pub rank: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Sorted original indices of the first `rank` positions under `p`.
fn leading_indices(p: &PermSeq, rank: usize) -> Vec<usize> {
    let mut v = p.to_array();
    v.truncate(rank);
    v.sort_unstable();
    v
}

/// Reads the rank profiles off a rank-revealing factorization.
pub fn extract_profiles(res: &PluqResult) -> Result<RankProfiles> {
    let swaps = |s: &PermSeq| s.moves().iter().any(|m| matches!(m, Move::Swap(..)));
    if res.pivoting != Pivoting::RankRevealing || swaps(&res.p) || swaps(&res.q) {
        return Err(Error::NotRankRevealing);
    }
    Ok(RankProfiles {
        rank: res.rank,
        rows: leading_indices(&res.p, res.rank),
        cols: leading_indices(&res.q, res.rank),
    })
}

/// Factorization strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Unblocked rank-revealing elimination.
    BaseCrout,
    SlabRecursive,
    TileRecursive,
    SlabIterative,
    TileIterative,
    RightLooking,
    LeftLooking,
    Crout,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::BaseCrout,
        Algorithm::SlabRecursive,
        Algorithm::TileRecursive,
        Algorithm::SlabIterative,
        Algorithm::TileIterative,
        Algorithm::RightLooking,
        Algorithm::LeftLooking,
        Algorithm::Crout,
    ];

    pub const RANK_REVEALING: [Algorithm; 5] = [
        Algorithm::BaseCrout,
        Algorithm::SlabRecursive,
        Algorithm::TileRecursive,
        Algorithm::SlabIterative,
        Algorithm::TileIterative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BaseCrout => "base",
            Algorithm::SlabRecursive => "slab-recursive",
            Algorithm::TileRecursive => "tile-recursive",
            Algorithm::SlabIterative => "slab-iterative",
            Algorithm::TileIterative => "tile-iterative",
            Algorithm::RightLooking => "right-looking",
            Algorithm::LeftLooking => "left-looking",
            Algorithm::Crout => "crout",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    pub fn is_full_rank(self) -> bool {
        matches!(self, Algorithm::RightLooking | Algorithm::LeftLooking | Algorithm::Crout)
    }
}

/// Tuning knobs shared by all strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorOptions {
    /// Block size of the iterative strategies.
    pub k: usize,
    /// Recursion cutoff of the recursive strategies.
    pub threshold: usize,
    pub policy: GemmPolicy,
    pub workers: usize,
}

impl Default for FactorOptions {
    fn default() -> Self {
        Self {
            k: 64,
            threshold: 64,
            policy: GemmPolicy::default(),
            workers: 1,
        }
    }
}

/// Factors `a` with the chosen strategy.
pub fn factor(
    f: &PrimeField,
    mut a: Mat,
    algo: Algorithm,
    opts: &FactorOptions,
    ledger: &mut RedLedger,
) -> Result<PluqResult> {
    let v = a.as_mut();
    let pluq = match algo {
        Algorithm::BaseCrout => rr_base(f, v, ledger),
        Algorithm::SlabRecursive => {
            pluq_slab_recursive(f, v, opts.threshold, &opts.policy, opts.workers, ledger)?
        }
        Algorithm::TileRecursive => {
            pluq_tile_recursive(f, v, opts.threshold, &opts.policy, opts.workers, ledger)?
        }
        Algorithm::SlabIterative => {
            pluq_slab_iterative(f, v, opts.k, &opts.policy, opts.workers, ledger)?
        }
        Algorithm::TileIterative => {
            pluq_tile_iterative(f, v, opts.k, &opts.policy, opts.workers, ledger)?
        }
        Algorithm::RightLooking | Algorithm::LeftLooking | Algorithm::Crout => {
            let kind = match algo {
                Algorithm::RightLooking => LoopKind::RightLooking,
                Algorithm::LeftLooking => LoopKind::LeftLooking,
                _ => LoopKind::Crout,
            };
            let variant = FullRankVariant { kind, k: opts.k };
            pluq_fullrank(f, v, variant, &opts.policy, opts.workers, ledger)?
        }
    };
    Ok(pluq.into_result(a))
}
