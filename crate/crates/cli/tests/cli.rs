use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pdcgo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdcgo")).current_dir(dir).args(args).output().expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn cauchy_bench_writes_csv_with_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pdcgo(tmp.path(), &["--out", "res", "cauchy-bench", "--n", "16,32"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("res/cauchy_bench.csv")).unwrap();
    assert!(csv.starts_with("# pdcgo: "));
    assert!(csv.contains("# seed: 0") && csv.contains("# mesh_h: "));
    assert!(csv.lines().any(|l| l == "n,test_case,rel_l2_error"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 10);
    for r in rows {
        let err: f64 = r.split(',').nth(2).unwrap().parse().unwrap();
        assert!(err < 1e-2, "{r}");
    }
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.cfg"), "# small sweep\nfamily = 6\ntau = 10:30:10\ncarleman_grid = 32\nlambda = 0.5\n")
        .unwrap();
    let mut outputs = Vec::new();
    for dir in ["a", "b"] {
        let out = pdcgo(tmp.path(), &["--config", "run.cfg", "--seed", "11", "--out", dir, "carleman"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(fs::read(tmp.path().join(dir).join("carleman.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs.remove(0)).unwrap();
    assert!(csv.lines().any(|l| l == "tau,N,max_ratio,median_ratio,violations"));
    assert_eq!(data_rows(&csv).len(), 3);
    assert!(tmp.path().join("a/carleman.svg").exists());
    let reread = fs::read_to_string(tmp.path().join("a/carleman.config")).unwrap();
    assert!(reread.contains("seed = 11") && reread.contains("family = 6"));
}

#[test]
fn config_errors_report_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.cfg"), "mesh_h = 0.1\n\ntau = 50,40\n").unwrap();
    let out = pdcgo(tmp.path(), &["--config", "bad.cfg", "cgo"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3: schedule not increasing"), "{err}");
    assert!(err.contains("status=error kind=config"), "{err}");
    fs::write(tmp.path().join("typo.cfg"), "mesh_hh = 0.1\n").unwrap();
    let out = pdcgo(tmp.path(), &["--config", "typo.cfg", "phase"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1: unknown key 'mesh_hh'"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unwritable_output_leaves_nothing_behind() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("blocker"), "not a directory").unwrap();
    let out = pdcgo(tmp.path(), &["--out", "blocker/res", "cauchy-bench", "--n", "16"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("status=error kind=io"));
    let entries: Vec<_> = fs::read_dir(tmp.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
    assert_eq!(fs::read_to_string(tmp.path().join("blocker")).unwrap(), "not a directory");
}

#[test]
fn pipeline_failure_writes_no_files() {
    let tmp = tempfile::tempdir().unwrap();
    // τ below the CGO minimum.
    let out = pdcgo(tmp.path(), &["--out", "res", "cgo", "--tau-list", "1,2", "--grid-n", "32"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("status=error kind=pipeline"));
    assert!(!tmp.path().join("res").exists());
}

#[test]
fn phase_and_ndmap_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pdcgo(tmp.path(), &["--mesh-h", "0.1", "phase", "--target", "0", "0.3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(tmp.path().join("out/phase_report.txt")).unwrap();
    assert!(report.contains("status") && report.contains("pass"));
    assert!(tmp.path().join("out/phase.txt").exists());

    let out = pdcgo(tmp.path(), &["--mesh-h", "0.1", "ndmap", "--q", "zero", "--modes", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("out/ndmap.txt")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.split_whitespace().count() == 6));
}

#[test]
fn recover_grid_on_bump_vs_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pdcgo(
        tmp.path(),
        &[
            "--threads", "2", "--mesh-h", "0.02", "recover-grid", "--nx", "2", "--ny", "1", "--extent", "0.05",
            "--q1", "gaussian:1,0.3,0,0.3", "--q2", "zero", "--tau-min", "8", "--tau-max", "12.5", "--steps", "10",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("out/recover_grid.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "x,y,estimate,confidence,n_tau_used"));
    assert!(!csv.contains("# warning:") && !csv.contains("# skipped:"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    for r in rows {
        let cols: Vec<&str> = r.split(',').collect();
        let est: f64 = cols[2].parse().unwrap();
        assert!(est.is_finite() && est > 0.0, "{r}");
        assert!(cols[4].parse::<usize>().unwrap() >= 4);
    }
    let svg = fs::read_to_string(tmp.path().join("out/recover_grid.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("<rect").count() == 2);
}
