use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn motcom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motcom")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn geometry_only_run_leaves_vcom_blank() {
    let out = tempfile::tempdir().unwrap();
    let data = fixtures().join("data");
    let run = motcom(&["compute", "--data", s(&data), "--no-vcom", "--out", s(out.path())]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = fs::read_to_string(out.path().join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("SYN-BUSY,6,"));
    assert_eq!(rows[1].split(',').nth(5), Some(""));
    let report: String = fs::read_to_string(out.path().join("report.json")).unwrap();
    assert!(report.contains("\"partial\": true"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"data": ["{}"], "compute_vcom": false, "mean": "harmonic", "include": ["*CALM"]}}"#,
            s(&fixtures().join("data"))
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let run = motcom(&["compute", "--config", s(&cfg), "--out", s(&out), "--weights", "1,2,1"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.contains("SYN-CALM"));
}

#[test]
fn failed_sequence_sets_exit_status() {
    let root = tempfile::tempdir().unwrap();
    let seq = root.path().join("ONE-FRAME");
    fs::create_dir_all(seq.join("gt")).unwrap();
    fs::write(seq.join("gt/gt.txt"), "1,1,0,0,10,10,1,1,1\n").unwrap();
    let out = root.path().join("out");
    let run = motcom(&["compute", "--data", s(root.path()), "--no-vcom", "--out", s(&out)]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("ONE-FRAME"));
    assert!(out.join("report.json").is_file());
}

#[test]
fn rank_and_plot_from_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    fs::write(
        &summary,
        "name,tracks,density,ocom,mcom,vcom,motcom\na,10,2,0.1,0.2,0.3,0.2\nb,20,4,0.2,0.1,0.4,0.23\nc,30,3,0.5,0.6,0.2,0.43\nd,5,1,0.05,0.1,0.1,0.08\n",
    )
    .unwrap();
    let scores = dir.path().join("scores.csv");
    fs::write(&scores, "tracker,sequence,HOTA\nx,a,60\ny,a,62\nx,b,50\nx,c,30\nx,d,70\n").unwrap();

    let rank = motcom(&["rank", "--reports", s(&summary), "--scores", s(&scores), "--out", s(dir.path())]);
    assert!(rank.status.success(), "{}", String::from_utf8_lossy(&rank.stderr));
    let table = String::from_utf8_lossy(&rank.stdout);
    assert!(table.lines().any(|l| l.starts_with("motcom") && l.ends_with("0.00 (0.00)")), "{table}");
    let csv = fs::read_to_string(dir.path().join("correlation_matrix.csv")).unwrap();
    assert!(csv.starts_with("column,tracks,density,ocom,mcom,vcom,motcom,hota\n"));

    let plots = dir.path().join("plots");
    let plot = motcom(&["plot", "--reports", s(&summary), "--scores", s(&scores), "--out", s(&plots), "--columns", "motcom"]);
    assert!(plot.status.success());
    assert!(plots.join("motcom_vs_hota.svg").is_file());
    assert!(plots.join("motcom_vs_hota_ranks.svg").is_file());

    fs::write(&scores, "sequence,hota\nzz,1\n").unwrap();
    let bad = motcom(&["rank", "--reports", s(&summary), "--scores", s(&scores)]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("no overlapping sequences"));
}
