mod common;

use std::path::Path;
use std::process::{Command, Output};

fn lowcorr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowcorr"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn synth_writes_a_carpet() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lowcorr(&["synth", "--kind", "carpet:3", "--side", "27", "--out", "c.png"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let img = lowcorr::image_io::load_grayscale(tmp.path().join("c.png")).unwrap();
    assert_eq!(img.data().iter().filter(|&&v| v == 1.0).count(), 512);

    let bad = lowcorr(&["synth", "--kind", "carpet:3", "--side", "20", "--out", "c.png"], tmp.path());
    assert_eq!(code(&bad), 1);
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&lowcorr(&["extract", "--dir", "."], tmp.path())), 1);
    assert_eq!(code(&lowcorr(&["frobnicate"], tmp.path())), 1);
    let o = lowcorr(&["extract", "--dir", ".", "--label", "maybe", "--out", "f.csv"], tmp.path());
    assert_eq!(code(&o), 1);
    assert_eq!(code(&lowcorr(&["--help"], tmp.path())), 0);
}

#[test]
fn io_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lowcorr(&["extract", "--dir", "missing", "--label", "real", "--out", "f.csv"], tmp.path());
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&lowcorr(&["report", "--analysis", "none.json", "--out", "r"], tmp.path())), 2);
    std::fs::write(tmp.path().join("bad.cfg"), "real_dir = a\nbogus = 1\n").unwrap();
    let o = lowcorr(&["run", "--config", "bad.cfg"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("config stage failed"));
}

#[test]
fn too_few_rows_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    common::write_dataset(&tmp.path().join("a"), 1, 32, 1, 0.1);
    let args = ["extract", "--dir", "a", "--label", "real", "--components", "0", "--side", "32", "--out", "a.csv"];
    assert_eq!(code(&lowcorr(&args, tmp.path())), 0);
    let o = lowcorr(&["analyze", "--real", "a.csv", "--fake", "a.csv", "--components", "0", "--out", "an"], tmp.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn extract_analyze_report_chain() {
    let tmp = tempfile::tempdir().unwrap();
    common::write_dataset(&tmp.path().join("real"), 8, 64, 2, 0.05);
    common::write_dataset(&tmp.path().join("fake"), 8, 64, 3, 0.5);
    for label in ["real", "fake"] {
        let out = format!("{label}.csv");
        let args = [
            "extract", "--dir", label, "--label", label, "--components", "0,16", "--side", "64", "--workers", "2",
            "--dump-residuals", "dump", "--out", &out,
        ];
        let o = lowcorr(&args, tmp.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let csv = std::fs::read_to_string(tmp.path().join(&out)).unwrap();
        assert!(csv.starts_with("image_id,label,n,fd,fd_r2,entropy_bits,mean,std\n"));
        assert_eq!(csv.lines().count(), 17);
        assert!(tmp.path().join(format!("{label}.curves.jsonl")).is_file());
    }
    assert!(std::fs::read_dir(tmp.path().join("dump")).unwrap().count() > 0);

    let o = lowcorr(&["analyze", "--real", "real.csv", "--fake", "fake.csv", "--components", "0,16", "--out", "an"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Entropy"));

    let o = lowcorr(&["report", "--analysis", "an/analysis.json", "--out", "rep"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["table_normality.csv", "table_separation.csv", "ks_mfs.csv", "ks_lacunarity.csv", "heatmap_ks_tau.svg", "mfs_n16.svg"] {
        assert!(tmp.path().join("rep").join(f).is_file(), "{f}");
    }
}
