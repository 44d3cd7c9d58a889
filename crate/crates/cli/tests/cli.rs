use std::path::Path;
use std::process::Command;

fn featbench(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_featbench")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_run_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    let gen = featbench(&["generate-synthetic", "--output-dir", s(&data), "--points", "1", "--width", "200", "--height", "160"]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let manifest = data.join("manifest.tsv");
    let run = featbench(&[
        "run",
        "--manifest",
        s(&manifest),
        "--output-dir",
        s(&out),
        "--combinations",
        "ORB-ORB,FAST-BRIEF",
        "--hysteresis-lower",
        "10",
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("detector,descriptor,"));
    assert!(lines[1].starts_with("ORB,ORB,"));
    assert!(out.join("stats.json").exists() && out.join("run.json").exists());

    let rep = featbench(&["report", "--stats", s(&out.join("stats.json")), "--output-dir", s(&out)]);
    assert!(rep.status.success(), "{}", String::from_utf8_lossy(&rep.stderr));
    assert!(out.join("scatter_same.csv").exists());
    assert!(out.join("ranking.json").exists());
}

#[test]
fn configuration_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.tsv");
    let out = dir.path().join("out");
    assert_eq!(featbench(&["run", "--manifest", s(&missing), "--output-dir", s(&out)]).status.code(), Some(1));
    assert_eq!(featbench(&["frobnicate"]).status.code(), Some(1));
    std::fs::write(&missing, "").unwrap();
    let bad = featbench(&["run", "--manifest", s(&missing), "--output-dir", s(&out), "--combinations", "SIFT-ORB"]);
    assert_eq!(bad.status.code(), Some(1));
    let ratio = featbench(&["run", "--manifest", s(&missing), "--output-dir", s(&out), "--ratio", "1.5"]);
    assert_eq!(ratio.status.code(), Some(1));
}

#[test]
fn unreadable_image_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.tsv");
    std::fs::write(dir.path().join("broken.pgm"), b"P5\n10 10\n255\nshort").unwrap();
    std::fs::write(&manifest, "template\tbroken.pgm\t0\t1\t0\tthing\nquery\tbroken.pgm\t0\t1\t0\n").unwrap();
    let out = featbench(&["run", "--manifest", s(&manifest), "--output-dir", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.pgm"));
}
