//! Benchmark and verification harness behind the `ffpluq` binary.

use std::fs::{File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::blas::{fgemm_classical, GemmPolicy};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::ledger::{predicted_count_int, CountedVariant, RedLedger};
use crate::matrix::Mat;
use crate::oracle::{naive_rank_profiles, reconstruct};
use crate::pluq::{extract_profiles, factor, Algorithm, FactorOptions, PluqResult, RankProfiles};

/// Largest dimension accepted by check mode.
pub const CHECK_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Bench,
    Check,
    Count,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Bench => "bench",
            Mode::Check => "check",
            Mode::Count => "count",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub variant: Algorithm,
    /// Rows.
    pub n: usize,
    /// Columns.
    pub m: usize,
    pub p: u64,
    /// Target rank; `None` means full.
    pub rank: Option<usize>,
    pub k: usize,
    pub threshold: usize,
    pub workers: usize,
    pub seed: u64,
    pub winograd: bool,
    pub mode: Mode,
    /// Read the matrix from a `.zpm` file instead of generating it.
    pub input: Option<PathBuf>,
}

impl BenchConfig {
    pub fn new(variant: Algorithm, n: usize, p: u64) -> Self {
        Self {
            variant,
            n,
            m: n,
            p,
            rank: None,
            k: 64,
            threshold: 64,
            workers: 1,
            seed: 0,
            winograd: true,
            mode: Mode::Bench,
            input: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.threshold == 0 || self.workers == 0 {
            return Err(Error::Config("k, threshold and workers must be positive".into()));
        }
        if let Some(r) = self.rank {
            if r > self.n.min(self.m) {
                return Err(Error::InvalidRank { rank: r, rows: self.n, cols: self.m });
            }
        }
        if self.mode == Mode::Check && self.n.max(self.m) > CHECK_LIMIT {
            return Err(Error::Config(format!("check mode is limited to n, m <= {CHECK_LIMIT}")));
        }
        Ok(())
    }
}

/// Random `rows x cols` matrix with prescribed rank profiles.
///
/// Row and column profiles are drawn uniformly; the matrix is `X Y` where `X`
/// is unit lower triangular on the chosen rows and every other row of `X`
/// only combines the pivots above it, and symmetrically for `Y`. Full rank
/// square inputs have a generic rank profile.
pub fn generate_matrix(
    rows: usize,
    cols: usize,
    rank: usize,
    f: &PrimeField,
    seed: u64,
) -> Result<(Mat, RankProfiles)> {
    if rank > rows.min(cols) {
        return Err(Error::InvalidRank { rank, rows, cols });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = f.p();
    let pick = |len: usize, rng: &mut ChaCha8Rng| {
        let mut v = sample(rng, len, rank).into_vec();
        v.sort_unstable();
        v
    };
    let rsel = pick(rows, &mut rng);
    let csel = pick(cols, &mut rng);

    let mut x = Mat::zeros(rows, rank);
    let mut t = 0;
    for i in 0..rows {
        let pivot = t < rank && rsel[t] == i;
        for j in 0..t {
            x[(i, j)] = rng.random_range(0..p);
        }
        if pivot {
            x[(i, t)] = 1;
            t += 1;
        }
    }
    let mut y = Mat::zeros(rank, cols);
    let mut t = 0;
    for j in 0..cols {
        let pivot = t < rank && csel[t] == j;
        for i in 0..t {
            y[(i, j)] = rng.random_range(0..p);
        }
        if pivot {
            y[(t, j)] = rng.random_range(1..p);
            t += 1;
        }
    }
    let mut a = Mat::zeros(rows, cols);
    if rank > 0 {
        fgemm_classical(f, 1, x.as_ref(), y.as_ref(), 0, a.as_mut(), &mut RedLedger::new())?;
    }
    Ok((a, RankProfiles { rank, rows: rsel, cols: csel }))
}

/// Hex SHA-256 of the packed factors, the rank and both permutations.
pub fn checksum(res: &PluqResult) -> String {
    let mut h = Sha256::new();
    h.update((res.lu.rows() as u64).to_le_bytes());
    h.update((res.lu.cols() as u64).to_le_bytes());
    for &x in res.lu.data() {
        h.update(x.to_le_bytes());
    }
    h.update((res.rank as u64).to_le_bytes());
    for v in [res.p.to_array(), res.q.to_array()] {
        for x in v {
            h.update((x as u64).to_le_bytes());
        }
    }
    let d = h.finalize();
    d.iter().take(16).map(|b| format!("{b:02x}")).collect()
}

fn counted(variant: Algorithm) -> Option<CountedVariant> {
    match variant {
        Algorithm::RightLooking => Some(CountedVariant::RightLooking),
        Algorithm::LeftLooking => Some(CountedVariant::LeftLooking),
        Algorithm::Crout => Some(CountedVariant::Crout),
        Algorithm::TileRecursive => Some(CountedVariant::TileRecursive),
        Algorithm::SlabRecursive => Some(CountedVariant::SlabRecursive),
        _ => None,
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub variant: String,
    pub n: usize,
    pub m: usize,
    pub p: u64,
    pub rank_req: usize,
    pub rank_found: usize,
    pub k: usize,
    pub threshold: usize,
    pub workers: usize,
    pub winograd: String,
    pub seconds: f64,
    pub checksum: String,
    pub red_total: u64,
    pub red_gemm: u64,
    pub red_trsm: u64,
    pub red_utrsm: u64,
    pub red_base: u64,
    pub predicted: Option<i128>,
    pub status: String,
    #[serde(skip)]
    pub failure: Option<String>,
}

impl Report {
    /// Operation rate scaled like LU: `2 n^3 / 3` per run.
    pub fn gflops(&self) -> f64 {
        let n = self.n.min(self.m) as f64;
        2.0 * n * n * n / 3.0 / self.seconds.max(1e-9) / 1e9
    }

    pub fn diff(&self) -> Option<i128> {
        self.predicted.map(|p| self.red_total as i128 - p)
    }

    /// Turns a failed check into an error.
    pub fn check(&self) -> Result<()> {
        match &self.failure {
            Some(msg) => Err(Error::CheckFailed(msg.clone())),
            None => Ok(()),
        }
    }
}

/// Generates (or loads) the input, factors it and fills a report row.
pub fn run(cfg: &BenchConfig) -> Result<Report> {
    let (f, a, intended) = match &cfg.input {
        Some(path) => {
            let (f, a) = Mat::read_zpm(BufReader::new(File::open(path)?))?;
            (f, a, None)
        }
        None => {
            cfg.validate()?;
            let f = PrimeField::new(cfg.p)?;
            let rank = cfg.rank.unwrap_or(cfg.n.min(cfg.m));
            let (a, prof) = generate_matrix(cfg.n, cfg.m, rank, &f, cfg.seed)?;
            (f, a, Some(prof))
        }
    };
    let (rows, cols) = (a.rows(), a.cols());
    let mut cfg = cfg.clone();
    cfg.n = rows;
    cfg.m = cols;
    cfg.p = f.p() as u64;
    cfg.validate()?;
    if cfg.mode == Mode::Count {
        cfg.winograd = false;
    }
    if cfg.variant.is_full_rank() && rows != cols {
        return Err(Error::Config(format!("{} needs a square matrix", cfg.variant.name())));
    }
    let opts = FactorOptions {
        k: cfg.k,
        threshold: cfg.threshold,
        policy: if cfg.winograd { GemmPolicy::default() } else { GemmPolicy::classical() },
        workers: cfg.workers,
    };

    let original = (cfg.mode == Mode::Check).then(|| a.clone());
    let mut ledger = RedLedger::new();
    let start = Instant::now();
    let res = factor(&f, a, cfg.variant, &opts, &mut ledger)?;
    let seconds = start.elapsed().as_secs_f64();

    let describe = |what: &str| {
        format!(
            "{what}: variant={} n={rows} m={cols} p={} seed={}",
            cfg.variant.name(),
            cfg.p,
            cfg.seed
        )
    };
    let mut failure = None;
    let mut predicted = None;
    let status = match cfg.mode {
        Mode::Bench => "ok".to_string(),
        Mode::Check => {
            let a = original.expect("kept for check mode");
            failure = verify(&f, &a, &res, cfg.variant, intended.as_ref()).err().map(|w| describe(&w));
            if failure.is_some() { "fail" } else { "pass" }.to_string()
        }
        Mode::Count => match counted(cfg.variant).map(|v| predicted_count_int(v, rows, cfg.k)) {
            Some(Ok(p)) if rows == cols => {
                predicted = Some(p);
                format!("diff={}", ledger.total() as i128 - p)
            }
            _ => "unpredicted".to_string(),
        },
    };
    Ok(Report {
        variant: cfg.variant.name().to_string(),
        n: rows,
        m: cols,
        p: cfg.p,
        rank_req: intended.as_ref().map_or(res.rank, |pr| pr.rank),
        rank_found: res.rank,
        k: cfg.k,
        threshold: cfg.threshold,
        workers: cfg.workers,
        winograd: if cfg.winograd { "on" } else { "off" }.to_string(),
        seconds,
        checksum: checksum(&res),
        red_total: ledger.total(),
        red_gemm: ledger.gemm,
        red_trsm: ledger.trsm,
        red_utrsm: ledger.utrsm,
        red_base: ledger.pluq_base,
        predicted,
        status,
        failure,
    })
}

fn verify(
    f: &PrimeField,
    a: &Mat,
    res: &PluqResult,
    variant: Algorithm,
    intended: Option<&RankProfiles>,
) -> std::result::Result<(), String> {
    if &reconstruct(f, res) != a {
        return Err("reconstruction differs".into());
    }
    let oracle = naive_rank_profiles(f, a);
    if let Some(want) = intended {
        if want != &oracle {
            return Err("generated profiles disagree with the oracle".into());
        }
    }
    if res.rank != oracle.rank {
        return Err(format!("rank {} but oracle says {}", res.rank, oracle.rank));
    }
    if variant.is_full_rank() {
        return Ok(());
    }
    let got = extract_profiles(res).map_err(|e| e.to_string())?;
    if got.rows != oracle.rows {
        return Err("row rank profile differs".into());
    }
    if variant != Algorithm::SlabRecursive && got.cols != oracle.cols {
        return Err("column rank profile differs".into());
    }
    Ok(())
}

/// Appends a row, writing the header first when the file is new or empty.
pub fn append_csv(path: &Path, report: &Report) -> Result<()> {
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    w.serialize(report).map_err(|e| Error::Io(e.to_string()))?;
    w.flush()?;
    Ok(())
}

/// Writes a Python script plotting seconds against workers, one curve per
/// variant and size, from a CSV produced by [`append_csv`].
pub fn write_plot_script(csv_path: &Path, script: &Path) -> Result<()> {
    let png = csv_path.with_extension("png");
    let mut out = File::create(script)?;
    write!(
        out,
        r#"import csv
from collections import defaultdict
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

runs = defaultdict(dict)
with open({csv:?}) as fh:
    for row in csv.DictReader(fh):
        if row["status"] not in ("ok", "pass"):
            continue
        key = (row["variant"], int(row["n"]))
        w = int(row["workers"])
        t = float(row["seconds"])
        runs[key][w] = min(t, runs[key].get(w, t))

fig, ax = plt.subplots()
for (variant, n), pts in sorted(runs.items()):
    ws = sorted(pts)
    base = pts.get(1)
    ys = [base / pts[w] if base else pts[w] for w in ws]
    ax.plot(ws, ys, marker="o", label=f"{{variant}} n={{n}}")
ax.set_xlabel("workers")
ax.set_ylabel("speed-up over one worker")
ax.legend()
fig.savefig({png:?})
"#,
        csv = csv_path.display().to_string(),
        png = png.display().to_string(),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_profiles() {
        let f = PrimeField::new(65521).unwrap();
        let (a, pr) = generate_matrix(6, 6, 6, &f, 1).unwrap();
        assert_eq!(pr.rows, (0..6).collect::<Vec<_>>());
        assert_eq!(naive_rank_profiles(&f, &a), pr);

        let (z, pr) = generate_matrix(4, 7, 0, &f, 1).unwrap();
        assert_eq!(z, Mat::zeros(4, 7));
        assert!(pr.rows.is_empty());

        for seed in 0..20 {
            let (a, pr) = generate_matrix(17, 11, 6, &PrimeField::new(3).unwrap(), seed).unwrap();
            assert_eq!(naive_rank_profiles(&PrimeField::new(3).unwrap(), &a), pr);
        }
        assert_eq!(
            generate_matrix(3, 2, 3, &f, 0).unwrap_err(),
            Error::InvalidRank { rank: 3, rows: 3, cols: 2 }
        );
    }

    #[test]
    fn generator_is_seeded() {
        let f = PrimeField::new(131071).unwrap();
        assert_eq!(generate_matrix(9, 9, 5, &f, 7).unwrap(), generate_matrix(9, 9, 5, &f, 7).unwrap());
        assert_ne!(generate_matrix(9, 9, 5, &f, 7).unwrap().0, generate_matrix(9, 9, 5, &f, 8).unwrap().0);
    }

    #[test]
    fn check_and_count_modes() {
        let mut cfg = BenchConfig::new(Algorithm::TileRecursive, 64, 131071);
        cfg.rank = Some(48);
        cfg.threshold = 4;
        cfg.mode = Mode::Check;
        let r = run(&cfg).unwrap();
        assert_eq!(r.status, "pass");
        r.check().unwrap();

        let mut cfg = BenchConfig::new(Algorithm::RightLooking, 8, 131071);
        cfg.k = 2;
        cfg.mode = Mode::Count;
        let r = run(&cfg).unwrap();
        assert_eq!((r.red_total, r.predicted, r.diff()), (112, Some(112), Some(0)));

        cfg.mode = Mode::Check;
        cfg.n = 600;
        cfg.m = 600;
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn checksum_ignores_workers() {
        let mut cfg = BenchConfig::new(Algorithm::TileRecursive, 96, 131071);
        cfg.threshold = 8;
        cfg.rank = Some(80);
        let one = run(&cfg).unwrap();
        cfg.workers = 4;
        let four = run(&cfg).unwrap();
        assert_eq!(one.checksum, four.checksum);
        assert_eq!(one.red_total, four.red_total);
    }

    #[test]
    fn csv_header_written_once() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        let mut cfg = BenchConfig::new(Algorithm::Crout, 8, 131071);
        cfg.k = 2;
        let r = run(&cfg).unwrap();
        append_csv(&path, &r).unwrap();
        append_csv(&path, &r).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "variant,n,m,p,rank_req,rank_found,k,threshold,workers,winograd,seconds,checksum,\
             red_total,red_gemm,red_trsm,red_utrsm,red_base,predicted,status"
        );
        assert!(lines[1].starts_with("crout,8,8,131071,8,8,2,"));

        let script = dir.path().join("plot.py");
        write_plot_script(&path, &script).unwrap();
        assert!(std::fs::read_to_string(script).unwrap().contains("runs.csv"));
    }
}
