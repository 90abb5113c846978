//! Permutations as replayable sequences of elementary moves.
//!
//! A [`PermSeq`] acting on `size` indices is a list of [`Move`]s applied left
//! to right. `Swap(i, j)` exchanges two positions; `Rot(i, j)` with `i <= j`
//! sends position `j` to position `i` and shifts `i..j` down by one, so the
//! relative order of every other index is kept.

use crate::error::{Error, Result};
use crate::matrix::MatMut;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Swap(usize, usize),
    Rot(usize, usize),
}

impl Move {
    fn shifted(self, by: usize) -> Move {
        match self {
            Move::Swap(i, j) => Move::Swap(i + by, j + by),
            Move::Rot(i, j) => Move::Rot(i + by, j + by),
        }
    }

    fn span(self) -> (usize, usize) {
        match self {
            Move::Swap(i, j) => (i.min(j), i.max(j)),
            Move::Rot(i, j) => (i, j),
        }
    }

    fn is_noop(self) -> bool {
        let (a, b) = self.span();
        a == b
    }
}

/// Which dimension of a matrix a permutation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Rows,
    Cols,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PermSeq {
    size: usize,
    moves: Vec<Move>,
}

impl PermSeq {
    pub fn identity(size: usize) -> Self {
        Self { size, moves: Vec::new() }
    }

    pub fn from_moves(size: usize, moves: Vec<Move>) -> Result<Self> {
        let mut p = Self::identity(size);
        for m in moves {
            p.push(m)?;
        }
        Ok(p)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn is_identity(&self) -> bool {
        self.moves.is_empty()
    }

    /// True when every move is a rotation.
    pub fn is_rot_only(&self) -> bool {
        self.moves.iter().all(|m| matches!(m, Move::Rot(..)))
    }

    /// Appends a move; no-op moves are dropped.
    pub fn push(&mut self, m: Move) -> Result<()> {
        let (a, b) = m.span();
        if let Move::Rot(i, j) = m {
            if i > j {
                return Err(Error::DimMismatch(format!("Rot({i}, {j}) needs i <= j")));
            }
        }
        if b >= self.size {
            return Err(Error::DimMismatch(format!(
                "move {m:?} out of range for size {}",
                self.size
            )));
        }
        if a != b {
            self.moves.push(m);
        }
        Ok(())
    }

    /// Rotation bringing position `j` to `i`; does nothing when `i == j`.
    pub fn rot(&mut self, i: usize, j: usize) {
        self.push(Move::Rot(i, j)).expect("rotation out of range");
    }

    /// Appends the moves of `inner` shifted by `offset`.
    pub fn extend_embedded(&mut self, inner: &PermSeq, offset: usize) -> Result<()> {
        if offset + inner.size > self.size {
            return Err(Error::DimMismatch(format!(
                "cannot embed size {} at {offset} into size {}",
                inner.size, self.size
            )));
        }
        self.moves
            .extend(inner.moves.iter().filter(|m| !m.is_noop()).map(|m| m.shifted(offset)));
        Ok(())
    }

    /// Permutes a slice of items in place.
    pub fn apply_slice<T>(&self, v: &mut [T], dir: Dir) {
        assert_eq!(v.len(), self.size);
        match dir {
            Dir::Forward => {
                for &m in &self.moves {
                    forward(v, m);
                }
            }
            Dir::Inverse => {
                for &m in self.moves.iter().rev() {
                    backward(v, m);
                }
            }
        }
    }

    /// `pi[t]` is the original index found at position `t` after the forward
    /// application.
    pub fn to_array(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.size).collect();
        self.apply_slice(&mut v, Dir::Forward);
        v
    }

    /// Rotation-only sequence realising the arrangement `pi`.
    pub fn from_array(pi: &[usize]) -> Result<Self> {
        let n = pi.len();
        let mut seen = vec![false; n];
        for &x in pi {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::DimMismatch(format!("{pi:?} is not a permutation")));
            }
        }
        let mut cur: Vec<usize> = (0..n).collect();
        let mut p = Self::identity(n);
        for t in 0..n {
            let s = t + cur[t..].iter().position(|&x| x == pi[t]).expect("present");
            if s != t {
                cur[t..=s].rotate_right(1);
                p.moves.push(Move::Rot(t, s));
            }
        }
        Ok(p)
    }

    pub fn inverse(&self) -> Self {
        let pi = self.to_array();
        let mut inv = vec![0; self.size];
        for (t, &x) in pi.iter().enumerate() {
            inv[x] = t;
        }
        Self::from_array(&inv).expect("valid permutation")
    }

    /// Applies `self` after `inner` embedded on `[embed_at, embed_at + inner.size)`.
    pub fn compose(&self, inner: &PermSeq, embed_at: usize) -> Result<Self> {
        let mut out = Self::identity(self.size);
        out.extend_embedded(inner, embed_at)?;
        out.moves.extend_from_slice(&self.moves);
        Ok(out)
    }

    /// Net index map over the smallest span touched by the moves:
    /// `(lo, pi)` with `pi[t]` the original position of the item now at `lo + t`.
    fn net(&self, dir: Dir) -> Option<(usize, Vec<usize>)> {
        let lo = self.moves.iter().map(|m| m.span().0).min()?;
        let hi = self.moves.iter().map(|m| m.span().1).max()?;
        let mut v: Vec<usize> = (lo..=hi).collect();
        match dir {
            Dir::Forward => {
                for &m in &self.moves {
                    forward(&mut v, m.shifted_down(lo));
                }
            }
            Dir::Inverse => {
                for &m in self.moves.iter().rev() {
                    backward(&mut v, m.shifted_down(lo));
                }
            }
        }
        Some((lo, v))
    }

    /// Permutes the rows or columns of `a`.
    pub fn apply(&self, a: MatMut<'_>, side: Side, dir: Dir) -> Result<()> {
        let dim = match side {
            Side::Rows => a.rows(),
            Side::Cols => a.cols(),
        };
        if dim != self.size {
            return Err(Error::DimMismatch(format!(
                "permutation of size {} applied to dimension {dim}",
                self.size
            )));
        }
        let Some((lo, pi)) = self.net(dir) else {
            return Ok(());
        };
        match side {
            Side::Rows => gather_rows(a, lo, &pi),
            Side::Cols => gather_cols(a, lo, &pi),
        }
        Ok(())
    }
}

impl Move {
    fn shifted_down(self, by: usize) -> Move {
        match self {
            Move::Swap(i, j) => Move::Swap(i - by, j - by),
            Move::Rot(i, j) => Move::Rot(i - by, j - by),
        }
    }
}

fn forward<T>(v: &mut [T], m: Move) {
    match m {
        Move::Swap(i, j) => v.swap(i, j),
        Move::Rot(i, j) => v[i..=j].rotate_right(1),
    }
}

fn backward<T>(v: &mut [T], m: Move) {
    match m {
        Move::Swap(i, j) => v.swap(i, j),
        Move::Rot(i, j) => v[i..=j].rotate_left(1),
    }
}

fn gather_rows(mut a: MatMut<'_>, lo: usize, pi: &[usize]) {
    let cols = a.cols();
    let mut tmp = Vec::with_capacity(pi.len() * cols);
    for &src in pi {
        tmp.extend_from_slice(a.row(src));
    }
    for (t, chunk) in tmp.chunks_exact(cols.max(1)).enumerate().take(pi.len()) {
        if cols > 0 {
            a.row_mut(lo + t).copy_from_slice(chunk);
        }
    }
}

fn gather_cols(mut a: MatMut<'_>, lo: usize, pi: &[usize]) {
    let mut tmp = vec![0; pi.len()];
    for i in 0..a.rows() {
        let row = a.row_mut(i);
        for (t, &src) in pi.iter().enumerate() {
            tmp[t] = row[src];
        }
        row[lo..lo + pi.len()].copy_from_slice(&tmp);
    }
}
