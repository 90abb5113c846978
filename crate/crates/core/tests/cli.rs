use std::process::Command;

use ffpluq::{Mat, PrimeField};

fn ffpluq(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ffpluq"))
        .args(args)
        .env_remove("FFPLUQ_WORKERS")
        .output()
        .unwrap();
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn count_reports_the_difference() {
    let (ok, out, _) = ffpluq(&["count", "--variant", "right-looking", "--n", "8", "--k", "2", "--p", "131071"]);
    assert!(ok);
    assert!(out.contains("measured 112 predicted 112 diff 0"), "{out}");
}

#[test]
fn check_passes_and_bench_appends_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let csv_s = csv.to_str().unwrap();
    let (ok, out, err) = ffpluq(&[
        "check", "--variant", "tile-recursive", "--n", "64", "--rank", "48", "--threshold", "4",
        "--p", "131071", "--out", csv_s,
    ]);
    assert!(ok, "{err}");
    assert!(out.trim_end().ends_with("pass"));
    for workers in ["1", "4"] {
        let (ok, _, err) = ffpluq(&[
            "bench", "--variant", "slab-iterative", "--n", "80", "--m", "60", "--rank", "50", "--k", "8",
            "--p", "65521", "--seed", "3", "--workers", workers, "--out", csv_s, "--plot",
            dir.path().join("plot.py").to_str().unwrap(),
        ]);
        assert!(ok, "{err}");
    }
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers.len(), 19);
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    assert_eq!(&rows[0][col("status")], "pass");
    assert_eq!(rows[1][col("checksum")], rows[2][col("checksum")]);
    assert_eq!(rows[1][col("red_total")], rows[2][col("red_total")]);
    assert_eq!(&rows[2][col("workers")], "4");
    assert!(dir.path().join("plot.py").exists());
}

#[test]
fn reads_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.zpm");
    let f = PrimeField::new(5).unwrap();
    let a = Mat::from_rows(&f, &[[0, 1, 2], [0, 2, 4], [1, 0, 0]]);
    a.write_zpm(&f, std::fs::File::create(&path).unwrap()).unwrap();
    let (ok, out, err) = ffpluq(&[
        "check", "--variant", "base", "--n", "1", "--p", "5", "--in", path.to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    assert!(out.contains("3x3 p=5 rank=2"), "{out}");
}

#[test]
fn rejects_bad_input() {
    let (ok, _, err) = ffpluq(&["bench", "--variant", "nope", "--n", "4", "--p", "5"]);
    assert!(!ok && err.contains("unknown variant"));
    let (ok, _, err) = ffpluq(&["bench", "--variant", "crout", "--n", "4", "--p", "6"]);
    assert!(!ok && err.contains("not a prime"), "{err}");
    let (ok, _, err) = ffpluq(&["check", "--variant", "crout", "--n", "600", "--p", "7"]);
    assert!(!ok && err.contains("512"), "{err}");
    let (ok, _, _) = ffpluq(&["bench", "--variant", "crout", "--n", "8", "--rank", "9", "--p", "7"]);
    assert!(!ok);
}
