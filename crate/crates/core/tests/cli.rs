use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bhlab::experiments::catalog;

const HALF_PLANE: &str = r#"
experiment = "exit-tail"
seed = 11
[params]
domain = { kind = "half_plane" }
start = [0.0, 1.0]
samples = 3000
t_max = 1e4
moments = [0.4]
"#;

// deterministic miss: the fit window sits before the asymptotic regime
const SHORT_WEDGE: &str = r#"
experiment = "exit-tail"
seed = 1
[params]
domain = { kind = "wedge", half_angle = 0.7853981633974483 }
start = [1.0, 0.0]
samples = 4000
t_max = 10
"#;

fn bhlab(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bhlab"));
    c.args(args).env_remove("BHLAB_OUT");
    if let Some(p) = env_out {
        c.env("BHLAB_OUT", p);
    }
    c.output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn only_dir(root: &Path) -> PathBuf {
    let mut dirs: Vec<_> = std::fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.pop().unwrap()
}

#[test]
fn list_names_every_experiment() {
    let o = bhlab(&["list"], None);
    assert!(o.status.success());
    let s = stdout(&o);
    for e in catalog() {
        assert!(s.contains(e.name), "{} missing", e.name);
    }
    assert!(s.contains("dashed-half-plane (Thm 3.1)"));
}

#[test]
fn run_writes_hashed_outputs_and_ignores_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "hp.toml", HALF_PLANE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let o1 = bhlab(&["--threads", "1", "run", &cfg, "--out", a.to_str().unwrap()], None);
    assert_eq!(o1.status.code(), Some(0), "{}", stderr(&o1));
    assert!(stdout(&o1).contains("PASS"));
    let o2 = bhlab(&["--threads", "3", "run", &cfg], Some(&b));
    assert_eq!(o2.status.code(), Some(0), "{}", stderr(&o2));

    let (da, db) = (only_dir(&a), only_dir(&b));
    assert_eq!(da.file_name(), db.file_name());
    let report = std::fs::read(da.join("report.json")).unwrap();
    assert_eq!(report, std::fs::read(db.join("report.json")).unwrap());
    let rec: serde_json::Value = serde_json::from_slice(&std::fs::read(da.join("record.json")).unwrap()).unwrap();
    let hash = rec["config_hash"].as_str().unwrap();
    assert!(da.file_name().unwrap().to_str().unwrap().ends_with(&hash[..12]));
    for f in std::fs::read_dir(&da).unwrap() {
        let body = std::fs::read_to_string(f.unwrap().path()).unwrap();
        assert!(body.contains(hash));
    }
    assert!(!a.join(".bhlab.lock").exists());
}

#[test]
fn failed_assertion_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "w.toml", SHORT_WEDGE);
    let o = bhlab(&["run", &cfg, "--out", tmp.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn bad_configs_exit_two_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let cases = [
        ("experiment = \"exit-tail\"\n[sampler]\nfoo = 1\n", "line 3"),
        ("experiment = \"nope\"\n", "exit-tail"),
        ("experiment = \"dashed-half-plane\"\n[params]\ngrid = [[2.0, 1.0]]\n", "params.grid[0]"),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let cfg = write(tmp.path(), &format!("bad{i}.toml"), body);
        let o = bhlab(&["run", &cfg, "--out", out], None);
        assert_eq!(o.status.code(), Some(2), "{body}");
        assert!(stderr(&o).contains(needle), "{}", stderr(&o));
    }
    let cfg = write(tmp.path(), "hp.toml", HALF_PLANE);
    let o = bhlab(&["run", &cfg, "--samples", "0", "--out", out], None);
    assert_eq!(o.status.code(), Some(2));
    let o = bhlab(&["run", "/nonexistent.toml"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn export_writes_sample_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "hp.toml", HALF_PLANE);
    let o = bhlab(&["export", &cfg, "--samples", "25", "--out", tmp.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(only_dir(tmp.path()).join("samples.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("time,x,y,feature,truncated,steps"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 26);
    assert!(csv.contains("# config_hash="));
}
