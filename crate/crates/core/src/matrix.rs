//! Dense row-major matrices and rectangular views.
//!
//! A [`Mat`] owns its storage. [`MatRef`] and [`MatMut`] are strided views
//! into it; tiles, slabs and quadrants are views that alias the parent
//! buffer. Mutable views can only be split into disjoint pieces, which is
//! what lets the parallel kernels hand independent tiles to separate tasks.

use std::fmt;
use std::io::{BufRead, Write};
use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::field::{Elem, PrimeField};

/// Owned dense matrix of canonical residues, row-major with `stride == cols`.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from rows of arbitrary integers, reducing them mod p.
    pub fn from_rows<R: AsRef<[i64]>>(field: &PrimeField, rows: &[R]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(nrows, ncols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.as_ref().len(), ncols, "ragged rows");
            for (j, &v) in r.as_ref().iter().enumerate() {
                m[(i, j)] = field.from_i64(v);
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_ref(&self) -> MatRef<'_> {
        MatRef {
            ptr: self.data.as_ptr(),
            rows: self.rows,
            cols: self.cols,
            stride: self.cols,
            _life: PhantomData,
        }
    }

    pub fn as_mut(&mut self) -> MatMut<'_> {
        MatMut {
            ptr: self.data.as_mut_ptr(),
            rows: self.rows,
            cols: self.cols,
            stride: self.cols,
            _life: PhantomData,
        }
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn is_canonical(&self, field: &PrimeField) -> bool {
        self.data.iter().all(|&x| field.is_canonical(x))
    }

    /// Writes the `.zpm` text format: `m n p`, then one line per row.
    pub fn write_zpm<W: Write>(&self, field: &PrimeField, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.rows, self.cols, field.p())?;
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Parses the `.zpm` text format. Entries must already be canonical.
    pub fn read_zpm<R: BufRead>(r: R) -> Result<(PrimeField, Mat)> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))??;
        let dims: Vec<u64> = header
            .split_whitespace()
            .map(|t| t.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("header: {e}")))?;
        let [m, n, p] = dims[..] else {
            return Err(Error::Parse(format!("header must be `m n p`, got `{header}`")));
        };
        let field = PrimeField::new(p)?;
        let (m, n) = (m as usize, n as usize);
        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {i}")))??;
            let before = data.len();
            for tok in line.split_whitespace() {
                let v: u64 = tok
                    .parse()
                    .map_err(|e| Error::Parse(format!("row {i}: {e}")))?;
                if v >= p {
                    return Err(Error::Parse(format!("row {i}: {v} is not a residue mod {p}")));
                }
                data.push(v as Elem);
            }
            if data.len() - before != n {
                return Err(Error::Parse(format!(
                    "row {i} has {} entries, expected {n}",
                    data.len() - before
                )));
            }
        }
        Ok((field, Mat::from_vec(m, n, data)?))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Elem;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Elem {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Elem {
        assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Shared strided view.
#[derive(Clone, Copy)]
pub struct MatRef<'a> {
    ptr: *const Elem,
    rows: usize,
    cols: usize,
    stride: usize,
    _life: PhantomData<&'a [Elem]>,
}

// SAFETY: a MatRef is a shared borrow of plain integers.
unsafe impl Send for MatRef<'_> {}
unsafe impl Sync for MatRef<'_> {}

/// Exclusive strided view.
pub struct MatMut<'a> {
    ptr: *mut Elem,
    rows: usize,
    cols: usize,
    stride: usize,
    _life: PhantomData<&'a mut [Elem]>,
}

// SAFETY: a MatMut is an exclusive borrow of plain integers; splitting only
// ever produces views over disjoint index ranges.
unsafe impl Send for MatMut<'_> {}
unsafe impl Sync for MatMut<'_> {}

impl<'a> MatRef<'a> {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        assert!(i < self.rows && j < self.cols);
        // SAFETY: bounds checked above.
        unsafe { *self.ptr.add(i * self.stride + j) }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [Elem] {
        assert!(i < self.rows);
        // SAFETY: row i spans `cols` valid elements.
        unsafe { std::slice::from_raw_parts(self.ptr.add(i * self.stride), self.cols) }
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> MatRef<'a> {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "submatrix out of range");
        MatRef {
            // SAFETY: offset stays inside the viewed region (or one past for empty views).
            ptr: if nr == 0 || nc == 0 {
                self.ptr
            } else {
                unsafe { self.ptr.add(r0 * self.stride + c0) }
            },
            rows: nr,
            cols: nc,
            stride: self.stride,
            _life: PhantomData,
        }
    }

    pub fn rows_range(&self, r0: usize, r1: usize) -> MatRef<'a> {
        self.submatrix(r0, 0, r1 - r0, self.cols)
    }

    pub fn cols_range(&self, c0: usize, c1: usize) -> MatRef<'a> {
        self.submatrix(0, c0, self.rows, c1 - c0)
    }

    pub fn to_owned(&self) -> Mat {
        let mut m = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            m.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(self.row(i));
        }
        m
    }
}

impl<'a> MatMut<'a> {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    /// Shorter-lived mutable view of the same region.
    pub fn rb_mut(&mut self) -> MatMut<'_> {
        MatMut {
            ptr: self.ptr,
            rows: self.rows,
            cols: self.cols,
            stride: self.stride,
            _life: PhantomData,
        }
    }

    pub fn rb(&self) -> MatRef<'_> {
        MatRef {
            ptr: self.ptr,
            rows: self.rows,
            cols: self.cols,
            stride: self.stride,
            _life: PhantomData,
        }
    }

    /// Converts into a shared view with the full lifetime.
    pub fn into_ref(self) -> MatRef<'a> {
        MatRef {
            ptr: self.ptr,
            rows: self.rows,
            cols: self.cols,
            stride: self.stride,
            _life: PhantomData,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        assert!(i < self.rows && j < self.cols);
        // SAFETY: bounds checked above.
        unsafe { *self.ptr.add(i * self.stride + j) }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        assert!(i < self.rows && j < self.cols);
        // SAFETY: bounds checked above; we hold exclusive access.
        unsafe { *self.ptr.add(i * self.stride + j) = v }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Elem] {
        assert!(i < self.rows);
        // SAFETY: row i spans `cols` valid elements.
        unsafe { std::slice::from_raw_parts(self.ptr.add(i * self.stride), self.cols) }
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Elem] {
        assert!(i < self.rows);
        // SAFETY: row i spans `cols` valid elements, exclusively borrowed.
        unsafe { std::slice::from_raw_parts_mut(self.ptr.add(i * self.stride), self.cols) }
    }

    /// Mutable rows `i` and `j` (`i != j`) at once.
    pub fn two_rows_mut(&mut self, i: usize, j: usize) -> (&mut [Elem], &mut [Elem]) {
        assert!(i != j && i < self.rows && j < self.rows);
        // SAFETY: distinct rows of a view never overlap.
        unsafe {
            (
                std::slice::from_raw_parts_mut(self.ptr.add(i * self.stride), self.cols),
                std::slice::from_raw_parts_mut(self.ptr.add(j * self.stride), self.cols),
            )
        }
    }

    pub fn into_submatrix(self, r0: usize, c0: usize, nr: usize, nc: usize) -> MatMut<'a> {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "submatrix out of range");
        MatMut {
            ptr: if nr == 0 || nc == 0 {
                self.ptr
            } else {
                // SAFETY: offset stays inside the viewed region.
                unsafe { self.ptr.add(r0 * self.stride + c0) }
            },
            rows: nr,
            cols: nc,
            stride: self.stride,
            _life: PhantomData,
        }
    }

    pub fn submatrix_mut(&mut self, r0: usize, c0: usize, nr: usize, nc: usize) -> MatMut<'_> {
        self.rb_mut().into_submatrix(r0, c0, nr, nc)
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> MatRef<'_> {
        self.rb().submatrix(r0, c0, nr, nc)
    }

    /// Splits into rows `[0, i)` and `[i, rows)`.
    pub fn split_at_row(self, i: usize) -> (MatMut<'a>, MatMut<'a>) {
        assert!(i <= self.rows);
        let (rows, cols, stride, ptr) = (self.rows, self.cols, self.stride, self.ptr);
        let top = MatMut { ptr, rows: i, cols, stride, _life: PhantomData };
        let bottom = MatMut {
            ptr: if i == rows || cols == 0 {
                ptr
            } else {
                // SAFETY: row i exists.
                unsafe { ptr.add(i * stride) }
            },
            rows: rows - i,
            cols,
            stride,
            _life: PhantomData,
        };
        (top, bottom)
    }

    /// Splits into columns `[0, j)` and `[j, cols)`.
    pub fn split_at_col(self, j: usize) -> (MatMut<'a>, MatMut<'a>) {
        assert!(j <= self.cols);
        let (rows, cols, stride, ptr) = (self.rows, self.cols, self.stride, self.ptr);
        let left = MatMut { ptr, rows, cols: j, stride, _life: PhantomData };
        let right = MatMut {
            ptr: if j == cols || rows == 0 {
                ptr
            } else {
                // SAFETY: column j exists.
                unsafe { ptr.add(j) }
            },
            rows,
            cols: cols - j,
            stride,
            _life: PhantomData,
        };
        (left, right)
    }

    /// Splits into the four quadrants `[[a11, a12], [a21, a22]]` at `(i, j)`.
    pub fn split_at(self, i: usize, j: usize) -> (MatMut<'a>, MatMut<'a>, MatMut<'a>, MatMut<'a>) {
        let (top, bottom) = self.split_at_row(i);
        let (a11, a12) = top.split_at_col(j);
        let (a21, a22) = bottom.split_at_col(j);
        (a11, a12, a21, a22)
    }

    /// Splits rows into consecutive pieces with the given sizes.
    pub fn split_rows_by(self, sizes: &[usize]) -> Vec<MatMut<'a>> {
        let mut out = Vec::with_capacity(sizes.len());
        let mut rest = self;
        for &s in sizes {
            let (head, tail) = rest.split_at_row(s);
            out.push(head);
            rest = tail;
        }
        out
    }

    /// Splits columns into consecutive pieces with the given sizes.
    pub fn split_cols_by(self, sizes: &[usize]) -> Vec<MatMut<'a>> {
        let mut out = Vec::with_capacity(sizes.len());
        let mut rest = self;
        for &s in sizes {
            let (head, tail) = rest.split_at_col(s);
            out.push(head);
            rest = tail;
        }
        out
    }

    pub fn fill(&mut self, v: Elem) {
        for i in 0..self.rows {
            self.row_mut(i).fill(v);
        }
    }

    pub fn copy_from(&mut self, src: MatRef<'_>) {
        assert_eq!((self.rows, self.cols), (src.rows(), src.cols()));
        for i in 0..self.rows {
            self.row_mut(i).copy_from_slice(src.row(i));
        }
    }

    pub fn to_owned(&self) -> Mat {
        self.rb().to_owned()
    }
}

impl fmt::Debug for MatRef<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatRef {}x{} ", self.rows, self.cols)?;
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

impl fmt::Debug for MatMut<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rb().fmt(f)
    }
}

/// Block splitting modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// `[[A1, A2], [A3, A4]]` with `A1` of size `ceil(m/2) x ceil(n/2)`.
    Quadrants,
    /// Horizontal slabs of `k` rows (the last may be shorter).
    RowSlabs(usize),
    /// Vertical slabs of `k` columns (the last may be narrower).
    ColSlabs(usize),
    /// `k x k` tiles in row-major order (edge tiles may be ragged).
    Tiles(usize),
}

/// Sizes of consecutive blocks of length `k` covering `dim`; `k` is clamped to `dim`.
pub fn block_sizes(dim: usize, k: usize) -> Vec<usize> {
    let k = k.clamp(1, dim.max(1));
    (0..dim).step_by(k).map(|s| k.min(dim - s)).collect()
}

/// Sizes of `parts` nearly equal blocks covering `dim`, empty blocks dropped.
pub fn even_parts(dim: usize, parts: usize) -> Vec<usize> {
    let parts = parts.max(1).min(dim.max(1));
    (0..parts)
        .map(|i| dim / parts + usize::from(i < dim % parts))
        .filter(|&s| s > 0)
        .collect()
}

/// Partitions a view into sub-views according to `mode`.
pub fn split(a: MatMut<'_>, mode: SplitMode) -> Result<Vec<MatMut<'_>>> {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let check = |k: usize| {
        if k == 0 {
            Err(Error::InvalidBlock { n: m.min(n), k })
        } else {
            Ok(k)
        }
    };
    Ok(match mode {
        SplitMode::Quadrants => {
            let (a1, a2, a3, a4) = a.split_at(m.div_ceil(2), n.div_ceil(2));
            vec![a1, a2, a3, a4]
        }
        SplitMode::RowSlabs(k) => a.split_rows_by(&block_sizes(m, check(k)?)),
        SplitMode::ColSlabs(k) => a.split_cols_by(&block_sizes(n, check(k)?)),
        SplitMode::Tiles(k) => {
            let k = check(k)?;
            let cols = block_sizes(n, k);
            a.split_rows_by(&block_sizes(m, k))
                .into_iter()
                .flat_map(|slab| slab.split_cols_by(&cols))
                .collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(v: &[MatMut<'_>]) -> Vec<(usize, usize)> {
        v.iter().map(|x| (x.rows(), x.cols())).collect()
    }

    #[test]
    fn split_examples() {
        let mut a = Mat::zeros(4, 4);
        assert_eq!(shape(&split(a.as_mut(), SplitMode::Quadrants).unwrap()), vec![(2, 2); 4]);
        let mut b = Mat::zeros(5, 5);
        assert_eq!(
            shape(&split(b.as_mut(), SplitMode::RowSlabs(2)).unwrap()),
            vec![(2, 5), (2, 5), (1, 5)]
        );
        let mut c = Mat::zeros(3, 3);
        assert_eq!(shape(&split(c.as_mut(), SplitMode::Tiles(4)).unwrap()), vec![(3, 3)]);
        let mut d = Mat::zeros(5, 3);
        assert_eq!(
            shape(&split(d.as_mut(), SplitMode::Quadrants).unwrap()),
            vec![(3, 2), (3, 1), (2, 2), (2, 1)]
        );
        let mut e = Mat::zeros(0, 3);
        assert_eq!(split(e.as_mut(), SplitMode::Quadrants).unwrap_err(), Error::EmptyMatrix);
    }

    #[test]
    fn views_alias_exactly_their_range() {
        let mut a = Mat::zeros(7, 9);
        let tiles = split(a.as_mut(), SplitMode::Tiles(3)).unwrap();
        assert_eq!(tiles.len(), 9);
        for (t, mut tile) in tiles.into_iter().enumerate() {
            tile.fill(t as Elem + 1);
        }
        for i in 0..7 {
            for j in 0..9 {
                assert_eq!(a[(i, j)], (3 * (i / 3) + j / 3) as Elem + 1);
            }
        }
        // sentinel: writing through one quadrant leaves the rest untouched
        let mut b = Mat::zeros(4, 6);
        let (_, mut a12, _, _) = b.as_mut().split_at(2, 3);
        a12.set(1, 2, 7);
        let hits: Vec<_> = (0..4)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .filter(|&(i, j)| b[(i, j)] != 0)
            .collect();
        assert_eq!(hits, vec![(1, 5)]);
    }

    #[test]
    fn zpm_round_trip() {
        let f = PrimeField::new(131071).unwrap();
        let a = Mat::from_fn(3, 4, |i, j| ((i * 7919 + j * 104729) % 131071) as Elem);
        let mut buf = Vec::new();
        a.write_zpm(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 4 131071\n"));
        let (g, b) = Mat::read_zpm(&buf[..]).unwrap();
        assert_eq!(g, f);
        assert_eq!(a, b);
        let mut again = Vec::new();
        b.write_zpm(&g, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn zpm_rejects_bad_input() {
        assert!(Mat::read_zpm(&b"2 2 5\n1 2\n"[..]).is_err());
        assert!(Mat::read_zpm(&b"1 2 5\n1 7\n"[..]).is_err());
        assert!(Mat::read_zpm(&b"1 2 6\n1 2\n"[..]).is_err());
        assert!(Mat::read_zpm(&b"1 2\n1 2\n"[..]).is_err());
    }

    #[test]
    fn part_sizes() {
        assert_eq!(block_sizes(5, 2), vec![2, 2, 1]);
        assert_eq!(block_sizes(3, 4), vec![3]);
        assert_eq!(even_parts(10, 4), vec![3, 3, 2, 2]);
        assert_eq!(even_parts(2, 4), vec![1, 1]);
        assert!(even_parts(0, 4).is_empty());
    }
}
