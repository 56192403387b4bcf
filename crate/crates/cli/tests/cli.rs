use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpmlc"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cpmlc-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

const UNCODED: &str = r#"
seed = 9
[scheme]
kind = "uncoded"
d = 1
code = "ehamming-128-120"
[stopping]
min_bit_errors = 0
min_frames = 200
max_frames = 200
[sweep]
snr_db = [2.0, 4.0]
[threshold]
target_ber = 1e-2
bracket = [1.0, 7.0]
tol_db = 0.05
"#;

const ID: &str = r#"
seed = 3
[scheme]
kind = "cp-mlc-id"
d = 3
code = "ebch-128-106"
osd = "t0+t1+t2(10,4)"
iterations = 3
"#;

/// Drop the wall-clock column so runs can be compared.
fn strip_time(csv: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let t = header.iter().position(|h| *h == "wall_seconds").unwrap();
    lines
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(t);
            f.join(",")
        })
        .collect()
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let dir = scratch("sweep");
    let cfg = write(&dir, "u.toml", UNCODED);
    let out = dir.join("u.csv");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--workers", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("scheme,snr_db,frames,bits,bit_errors,pre_outer_ber,bypassed_bit_errors"));
    assert_eq!(text.lines().count(), 3);
    let meta = std::fs::read_to_string(dir.join("u.csv.meta.json")).unwrap();
    assert!(meta.contains("\"master_seed\": 9"));
    assert!(meta.contains("chacha8"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = scratch("workers");
    let cfg = write(&dir, "u.toml", UNCODED);
    let go = |w: &str| {
        let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--workers", w, "--seed", "5"]);
        assert!(o.status.success());
        strip_time(&String::from_utf8(o.stdout).unwrap())
    };
    let one = go("1");
    assert_eq!(one, go("4"));
    assert_eq!(one, go("8"));
    assert!(one[0].contains(",5,"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn threshold_exit_code_tracks_resolution() {
    let dir = scratch("threshold");
    let cfg = write(&dir, "u.toml", UNCODED);
    let c = cfg.to_str().unwrap();
    let ok = run(&["threshold", "--config", c, "--min-errors", "10", "--max-frames", "400"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let line = String::from_utf8(ok.stdout).unwrap();
    let snr: f64 = line.trim().split(['=', ' ']).nth(1).unwrap().parse().unwrap();
    assert!((snr - 4.32).abs() < 0.3, "{snr}");

    let starved = ["threshold", "--config", c, "--min-errors", "1000000", "--max-frames", "50"];
    assert!(!run(&starved).status.success());
    let mut allowed = starved.to_vec();
    allowed.push("--allow-unresolved");
    assert!(run(&allowed).status.success());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn ncg_row() {
    let dir = scratch("ncg");
    let cfg = write(&dir, "u.toml", UNCODED);
    let o = run(&["ncg", "--config", cfg.to_str().unwrap(), "--min-errors", "10", "--max-frames", "400"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("scheme,required_snr_db,total_rate,overhead_percent,ncg_db"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn schedule_trace_lists_lanes() {
    let dir = scratch("trace");
    let cfg = write(&dir, "id.toml", ID);
    let o = run(&["schedule-trace", "--config", cfg.to_str().unwrap(), "--snr", "4.0", "--frame", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("1,1,"));
    assert!(rows[1].starts_with("2,2,"));
    assert!(rows[2].starts_with("3,1,"));
    assert!(rows[1].contains("phi(B_3,delta_2)[2]"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_invocations_fail() {
    assert!(!run(&["sweep"]).status.success());
    let dir = scratch("bad");
    let cfg = write(&dir, "bad.toml", "[scheme]\nkind = \"cp-mlc-id\"\nd = 3\ncode = \"ebch-128-107\"\n");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--snr", "4"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let u = write(&dir, "u.toml", UNCODED);
    assert!(!run(&["schedule-trace", "--config", u.to_str().unwrap(), "--snr", "4"]).status.success());
    std::fs::remove_dir_all(dir).unwrap();
}
