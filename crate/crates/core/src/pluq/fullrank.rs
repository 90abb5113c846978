//! Tile-iterative block LU for inputs with a generic rank profile.

use rayon::prelude::*;

use super::base::crout_base;
use super::{Pivoting, Pluq};
use crate::blas::{fgemm, ftrsm, Diag, GemmPolicy, Side, Uplo};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::ledger::{crout_base_count, gemm_count, trsm_count, utrsm_count, KernelKind, RedLedger};
use crate::matrix::{block_sizes, MatMut, MatRef};
use crate::par;

/// Loop ordering of the block elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoopKind {
    RightLooking,
    LeftLooking,
    Crout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullRankVariant {
    pub kind: LoopKind,
    pub k: usize,
}

pub(super) type Task<'a> = Box<dyn FnOnce(&mut RedLedger) -> Result<()> + Send + 'a>;

pub(super) fn run_tasks(tasks: Vec<Task<'_>>, workers: usize, ledger: &mut RedLedger) -> Result<()> {
    if workers <= 1 || tasks.len() <= 1 {
        for t in tasks {
            t(ledger)?;
        }
        return Ok(());
    }
    let ledgers = par::install(workers, || {
        tasks
            .into_par_iter()
            .map(|t| {
                let mut l = RedLedger::new();
                t(&mut l).map(|_| l)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    *ledger += ledgers.into_iter().sum();
    Ok(())
}

fn minus_one(f: &PrimeField) -> u32 {
    f.p() - 1
}

pub(super) fn utrsm_task<'a>(f: &'a PrimeField, l: MatRef<'a>, b: MatMut<'a>) -> Task<'a> {
    Box::new(move |led| ftrsm(f, Side::Left, Uplo::Lower, Diag::Unit, l, b, led))
}

pub(super) fn trsm_task<'a>(f: &'a PrimeField, u: MatRef<'a>, b: MatMut<'a>) -> Task<'a> {
    Box::new(move |led| ftrsm(f, Side::Right, Uplo::Upper, Diag::NonUnit, u, b, led))
}

pub(super) fn gemm_task<'a>(
    f: &'a PrimeField,
    x: MatRef<'a>,
    y: MatRef<'a>,
    c: MatMut<'a>,
    policy: &'a GemmPolicy,
) -> Task<'a> {
    Box::new(move |led| fgemm(f, minus_one(f), x, y, 1, c, policy, led))
}

fn base(f: &PrimeField, a: MatMut<'_>, c0: usize, ledger: &mut RedLedger) -> Result<()> {
    crout_base(f, a, ledger).map(|_| ()).map_err(|e| match e {
        Error::ZeroPivot(i) => Error::ZeroPivot(c0 + i),
        e => e,
    })
}

fn right_looking_step(
    f: &PrimeField,
    mut a: MatMut<'_>,
    c0: usize,
    k: usize,
    policy: &GemmPolicy,
    workers: usize,
    ledger: &mut RedLedger,
) -> Result<()> {
    let n = a.rows();
    let b = k.min(n - c0);
    let rest = n - c0 - b;
    let (_, _, _, sub) = a.rb_mut().split_at(c0, c0);
    let (mut a11, mut a12, mut a21, a22) = sub.split_at(b, b);
    base(f, a11.rb_mut(), c0, ledger)?;
    if rest == 0 {
        return Ok(());
    }
    let lu11 = a11.into_ref();
    let tiles = block_sizes(rest, k);
    let mut tasks: Vec<Task<'_>> = Vec::new();
    for t in a12.rb_mut().split_cols_by(&tiles) {
        tasks.push(utrsm_task(f, lu11, t));
    }
    for t in a21.rb_mut().split_rows_by(&tiles) {
        tasks.push(trsm_task(f, lu11, t));
    }
    run_tasks(tasks, workers, ledger)?;
    let (l21, u12) = (a21.into_ref(), a12.into_ref());
    let mut tasks: Vec<Task<'_>> = Vec::new();
    let mut j0 = 0;
    for t in a22.split_cols_by(&tiles) {
        let w = t.cols();
        tasks.push(gemm_task(f, l21, u12.cols_range(j0, j0 + w), t, policy));
        j0 += w;
    }
    run_tasks(tasks, workers, ledger)
}

fn crout_step(
    f: &PrimeField,
    a: MatMut<'_>,
    c0: usize,
    k: usize,
    policy: &GemmPolicy,
    workers: usize,
    ledger: &mut RedLedger,
) -> Result<()> {
    let n = a.rows();
    let b = k.min(n - c0);
    let (left, right) = a.split_at_col(c0);
    let (_, lbot) = left.split_at_row(c0);
    let (rtop, rbot) = right.split_at_row(c0);
    let (lbot, rtop) = (lbot.into_ref(), rtop.into_ref());
    let (mut colpanel, rowside) = rbot.split_at_col(b);
    let (mut rowpanel, _) = rowside.split_at_row(b);
    if c0 > 0 {
        let tasks: Vec<Task<'_>> = vec![
            gemm_task(f, lbot, rtop.cols_range(0, b), colpanel.rb_mut(), policy),
            gemm_task(
                f,
                lbot.rows_range(0, b),
                rtop.cols_range(b, n - c0),
                rowpanel.rb_mut(),
                policy,
            ),
        ];
        run_tasks(tasks, workers, ledger)?;
    }
    let (mut a11, a21) = colpanel.split_at_row(b);
    base(f, a11.rb_mut(), c0, ledger)?;
    if n - c0 == b {
        return Ok(());
    }
    let lu11 = a11.into_ref();
    let tasks: Vec<Task<'_>> = vec![utrsm_task(f, lu11, rowpanel), trsm_task(f, lu11, a21)];
    run_tasks(tasks, workers, ledger)
}

fn left_looking_step(
    f: &PrimeField,
    a: MatMut<'_>,
    c0: usize,
    k: usize,
    policy: &GemmPolicy,
    ledger: &mut RedLedger,
) -> Result<()> {
    let n = a.rows();
    let b = k.min(n - c0);
    let (left, right) = a.split_at_col(c0);
    let (panel, _) = right.split_at_col(b);
    let (ltop, lbot) = left.split_at_row(c0);
    let (ltop, lbot) = (ltop.into_ref(), lbot.into_ref());
    let (mut utop, bottom) = panel.split_at_row(c0);
    if c0 > 0 {
        ftrsm(f, Side::Left, Uplo::Lower, Diag::Unit, ltop, utop.rb_mut(), ledger)?;
    }
    let mut bottom = bottom;
    if c0 > 0 {
        fgemm(f, minus_one(f), lbot, utop.into_ref(), 1, bottom.rb_mut(), policy, ledger)?;
    }
    let (mut a11, a21) = bottom.split_at_row(b);
    base(f, a11.rb_mut(), c0, ledger)?;
    if n - c0 > b {
        ftrsm(f, Side::Right, Uplo::Upper, Diag::NonUnit, a11.into_ref(), a21, ledger)?;
    }
    Ok(())
}

/// Block LU without pivoting of a square matrix with a generic rank profile,
/// following the right-looking, left-looking or Crout loop. All three produce
/// the same packed factors; they differ in operation order, task structure
/// and reduction count. A trailing block narrower than `k` is allowed.
pub fn pluq_fullrank(
    f: &PrimeField,
    mut a: MatMut<'_>,
    variant: FullRankVariant,
    policy: &GemmPolicy,
    workers: usize,
    ledger: &mut RedLedger,
) -> Result<Pluq> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimMismatch(format!("full-rank LU of a {}x{} matrix", n, a.cols())));
    }
    if variant.k == 0 {
        return Err(Error::InvalidBlock { n, k: 0 });
    }
    let k = variant.k.min(n.max(1));
    for c0 in (0..n).step_by(k) {
        match variant.kind {
            LoopKind::RightLooking => right_looking_step(f, a.rb_mut(), c0, k, policy, workers, ledger)?,
            LoopKind::Crout => crout_step(f, a.rb_mut(), c0, k, policy, workers, ledger)?,
            LoopKind::LeftLooking => left_looking_step(f, a.rb_mut(), c0, k, policy, ledger)?,
        }
    }
    Ok(Pluq::identity(n, n, n, Pivoting::Generic))
}

/// Half-open rectangle `[r0, r1) x [c0, c1)` of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRegion {
    pub r0: usize,
    pub r1: usize,
    pub c0: usize,
    pub c1: usize,
}

impl BlockRegion {
    fn new(r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self { r0, r1, c0, c1 }
    }

    pub fn overlaps(&self, o: &BlockRegion) -> bool {
        self.r0 < o.r1 && o.r0 < self.r1 && self.c0 < o.c1 && o.c0 < self.c1
    }

    fn is_empty(&self) -> bool {
        self.r0 >= self.r1 || self.c0 >= self.c1
    }
}

/// One kernel call of an iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskNode {
    pub kind: KernelKind,
    /// `(m, k, n)` of the call.
    pub dims: (usize, usize, usize),
    pub reads: Vec<BlockRegion>,
    pub writes: Vec<BlockRegion>,
    /// Indices of earlier tasks of the same iteration this one waits for.
    pub deps: Vec<usize>,
    /// Reductions the call performs.
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationTasks {
    pub index: usize,
    pub tasks: Vec<TaskNode>,
}

impl IterationTasks {
    /// Tasks of `kind` with no dependency on one another.
    pub fn independent(&self, kind: KernelKind) -> bool {
        let ids: Vec<usize> = (0..self.tasks.len()).filter(|&i| self.tasks[i].kind == kind).collect();
        ids.iter().all(|&i| self.tasks[i].deps.iter().all(|d| !ids.contains(d)))
    }

    pub fn count(&self, kind: KernelKind) -> usize {
        self.tasks.iter().filter(|t| t.kind == kind).count()
    }
}

fn node(kind: KernelKind, dims: (usize, usize, usize), reads: Vec<BlockRegion>, writes: Vec<BlockRegion>) -> TaskNode {
    let (m, k, n) = dims;
    let cost = match kind {
        KernelKind::Gemm => gemm_count(m, k, n),
        KernelKind::Utrsm => utrsm_count(m, n),
        KernelKind::Trsm => trsm_count(m, n),
        KernelKind::PluqBase => crout_base_count(m),
        KernelKind::Other => 0,
    };
    TaskNode {
        kind,
        dims,
        reads: reads.into_iter().filter(|r| !r.is_empty()).collect(),
        writes,
        deps: Vec::new(),
        cost,
    }
}

fn link(tasks: &mut [TaskNode]) {
    for j in 0..tasks.len() {
        let deps = (0..j)
            .filter(|&i| {
                let (a, b) = (&tasks[i], &tasks[j]);
                let hits = |xs: &[BlockRegion], ys: &[BlockRegion]| {
                    xs.iter().any(|x| ys.iter().any(|y| x.overlaps(y)))
                };
                hits(&a.writes, &b.reads) || hits(&a.writes, &b.writes) || hits(&a.reads, &b.writes)
            })
            .collect();
        tasks[j].deps = deps;
    }
}

/// Kernel tasks of each loop iteration as executed by [`pluq_fullrank`],
/// with their data regions and intra-iteration dependencies. Successive
/// iterations are separated by a barrier.
pub fn variant_task_graph(kind: LoopKind, n: usize, k: usize) -> Result<Vec<IterationTasks>> {
    if k == 0 || k > n {
        return Err(Error::InvalidBlock { n, k });
    }
    let br = BlockRegion::new;
    let mut out = Vec::new();
    for (it, c0) in (0..n).step_by(k).enumerate() {
        let c1 = (c0 + k).min(n);
        let b = c1 - c0;
        let rest = n - c1;
        let diag = br(c0, c1, c0, c1);
        let mut tasks = Vec::new();
        match kind {
            LoopKind::RightLooking => {
                tasks.push(node(KernelKind::PluqBase, (b, b, b), vec![diag], vec![diag]));
                let tiles: Vec<(usize, usize)> = (c1..n).step_by(k).map(|s| (s, (s + k).min(n))).collect();
                for &(s, e) in &tiles {
                    tasks.push(node(KernelKind::Utrsm, (b, b, e - s), vec![diag], vec![br(c0, c1, s, e)]));
                }
                for &(s, e) in &tiles {
                    tasks.push(node(KernelKind::Trsm, (b, b, e - s), vec![diag], vec![br(s, e, c0, c1)]));
                }
                for &(s, e) in &tiles {
                    tasks.push(node(
                        KernelKind::Gemm,
                        (rest, b, e - s),
                        vec![br(c1, n, c0, c1), br(c0, c1, s, e)],
                        vec![br(c1, n, s, e)],
                    ));
                }
            }
            LoopKind::Crout => {
                if c0 > 0 {
                    tasks.push(node(
                        KernelKind::Gemm,
                        (n - c0, c0, b),
                        vec![br(c0, n, 0, c0), br(0, c0, c0, c1)],
                        vec![br(c0, n, c0, c1)],
                    ));
                    tasks.push(node(
                        KernelKind::Gemm,
                        (b, c0, rest),
                        vec![br(c0, c1, 0, c0), br(0, c0, c1, n)],
                        vec![br(c0, c1, c1, n)],
                    ));
                }
                tasks.push(node(KernelKind::PluqBase, (b, b, b), vec![diag], vec![diag]));
                if rest > 0 {
                    tasks.push(node(KernelKind::Utrsm, (b, b, rest), vec![diag], vec![br(c0, c1, c1, n)]));
                    tasks.push(node(KernelKind::Trsm, (b, b, rest), vec![diag], vec![br(c1, n, c0, c1)]));
                }
            }
            LoopKind::LeftLooking => {
                if c0 > 0 {
                    tasks.push(node(
                        KernelKind::Utrsm,
                        (c0, c0, b),
                        vec![br(0, c0, 0, c0)],
                        vec![br(0, c0, c0, c1)],
                    ));
                    tasks.push(node(
                        KernelKind::Gemm,
                        (n - c0, c0, b),
                        vec![br(c0, n, 0, c0), br(0, c0, c0, c1)],
                        vec![br(c0, n, c0, c1)],
                    ));
                }
                tasks.push(node(KernelKind::PluqBase, (b, b, b), vec![diag], vec![diag]));
                if rest > 0 {
                    tasks.push(node(KernelKind::Trsm, (b, b, rest), vec![diag], vec![br(c1, n, c0, c1)]));
                }
            }
        }
        link(&mut tasks);
        out.push(IterationTasks { index: it + 1, tasks });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{model_count, CountedVariant};
    use crate::matrix::Mat;
    use crate::oracle::{naive_gemm, reconstruct};

    fn generic(f: &PrimeField, n: usize, seed: u64) -> Mat {
        let mut s = seed;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        };
        let p = f.p() as u64;
        let l = Mat::from_fn(n, n, |i, j| if i > j { (next() % p) as u32 } else { (i == j) as u32 });
        let u = Mat::from_fn(n, n, |i, j| if j > i { (next() % p) as u32 } else if i == j { (1 + next() % (p - 1)) as u32 } else { 0 });
        naive_gemm(f, &l, &u).unwrap()
    }

    fn counted(kind: LoopKind) -> CountedVariant {
        match kind {
            LoopKind::RightLooking => CountedVariant::RightLooking,
            LoopKind::LeftLooking => CountedVariant::LeftLooking,
            LoopKind::Crout => CountedVariant::Crout,
        }
    }

    const KINDS: [LoopKind; 3] = [LoopKind::RightLooking, LoopKind::LeftLooking, LoopKind::Crout];

    #[test]
    fn variants_agree_and_reconstruct() {
        let f = PrimeField::new(131071).unwrap();
        for n in [1usize, 2, 5, 8, 13] {
            let a = generic(&f, n, 7 + n as u64);
            let mut first: Option<Mat> = None;
            for kind in KINDS {
                for k in 1..=n {
                    let mut lu = a.clone();
                    let mut led = RedLedger::new();
                    let pl = pluq_fullrank(&f, lu.as_mut(), FullRankVariant { kind, k }, &GemmPolicy::classical(), 1, &mut led).unwrap();
                    assert_eq!(led.total(), model_count(counted(kind), n, k).unwrap(), "{kind:?} n={n} k={k}");
                    let res = pl.into_result(lu.clone());
                    assert_eq!(reconstruct(&f, &res), a);
                    match &first {
                        None => first = Some(lu),
                        Some(x) => assert_eq!(x, &lu),
                    }
                }
            }
        }
    }

    #[test]
    fn zero_pivot_reports_global_step() {
        let f = PrimeField::new(5).unwrap();
        let mut a = Mat::identity(4);
        a[(2, 2)] = 0;
        for kind in KINDS {
            let mut lu = a.clone();
            let r = pluq_fullrank(&f, lu.as_mut(), FullRankVariant { kind, k: 2 }, &GemmPolicy::classical(), 1, &mut RedLedger::new());
            assert_eq!(r, Err(Error::ZeroPivot(2)));
        }
    }

    #[test]
    fn task_graph_shapes() {
        let g = variant_task_graph(LoopKind::RightLooking, 16, 4).unwrap();
        assert_eq!(g.len(), 4);
        for it in &g {
            assert_eq!(it.count(KernelKind::Gemm), 4 - it.index);
            assert!(it.independent(KernelKind::Gemm));
        }
        let crout = variant_task_graph(LoopKind::Crout, 16, 4).unwrap();
        let it = &crout[1];
        let base = it.tasks.iter().position(|t| t.kind == KernelKind::PluqBase).unwrap();
        assert!(it.tasks[base].deps.contains(&0));
        let utrsm = it.tasks.iter().position(|t| t.kind == KernelKind::Utrsm).unwrap();
        assert!(it.tasks[utrsm].deps.contains(&1) && it.tasks[utrsm].deps.contains(&base));
        let left = variant_task_graph(LoopKind::LeftLooking, 16, 4).unwrap();
        assert!(left.iter().skip(1).all(|it| it.count(KernelKind::Utrsm) == 1));
        let single = variant_task_graph(LoopKind::Crout, 4, 4).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].tasks.len(), 1);
        assert_eq!(single[0].tasks[0].kind, KernelKind::PluqBase);
    }

    #[test]
    fn task_costs_sum_to_measured_ledger() {
        let f = PrimeField::new(131071).unwrap();
        for kind in KINDS {
            for (n, k) in [(8, 2), (12, 4), (16, 4), (9, 3)] {
                let a = generic(&f, n, 99);
                let mut lu = a.clone();
                let mut led = RedLedger::new();
                pluq_fullrank(&f, lu.as_mut(), FullRankVariant { kind, k }, &GemmPolicy::classical(), 2, &mut led).unwrap();
                let g = variant_task_graph(kind, n, k).unwrap();
                let cost: u64 = g.iter().flat_map(|it| &it.tasks).map(|t| t.cost).sum();
                assert_eq!(cost, led.total(), "{kind:?} n={n} k={k}");
                let per = |kk: KernelKind| -> u64 { g.iter().flat_map(|it| &it.tasks).filter(|t| t.kind == kk).map(|t| t.cost).sum() };
                for kk in [KernelKind::Gemm, KernelKind::Utrsm, KernelKind::Trsm, KernelKind::PluqBase] {
                    assert_eq!(per(kk), led.get(kk), "{kind:?} {kk:?}");
                }
            }
        }
    }
}
