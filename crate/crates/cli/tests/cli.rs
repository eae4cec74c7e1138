use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gramscope(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gramscope"))
        .args(args)
        .current_dir(dir)
        .env("GRAMSCOPE_THREADS", "2")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(dir: &Path) -> String {
    fs::read_to_string(dir.join("report.txt")).unwrap()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('='))).unwrap_or_else(|| panic!("{key} missing"))
}

const KILL: &str = "experiment = kill\n[data]\nkind = embed\nn = 11\nd = 10\nd_prime = 3\nseed = 21\n[model]\nactivation = quadratic\nm = 50\nseeds = 21\n[run]\np = 2\n";

#[test]
fn kill_experiment_reports_exact_kill() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "kill.conf", KILL);
    let out = tmp.path().join("out");
    let o = gramscope(&["kill", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(value(&r, "status"), "pass");
    assert!(value(&r, "seed.21.nullspace_dim").parse::<usize>().unwrap() >= 2);
    let lmin: f64 = value(&r, "seed.21.lambda_min").parse().unwrap();
    let lmax: f64 = value(&r, "seed.21.lambda_max").parse().unwrap();
    assert!(lmin <= 1e-12 * lmax);
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("config_sha256=") && manifest.contains("seeds=21") && manifest.contains("version="));
}

#[test]
fn malformed_config_fails_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.conf", "[data]\nn = 10\nsize = 3\n");
    let out = tmp.path().join("out");
    let o = gramscope(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn module_errors_name_the_seed_and_leave_no_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    // sigmoid violates the depth preconditions
    let cfg = write(tmp.path(), "d.conf", "[data]\nn = 3\nd = 4\n[model]\nactivation = sigmoid\nm = 50\nseeds = 5\n[run]\nlayers = 2\n");
    let out = tmp.path().join("out");
    let o = gramscope(&["depth", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed 5"));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn reruns_are_byte_identical_and_seeds_can_be_overridden() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.conf",
        "[data]\nkind = circle\nn = 7\nd = 5\n[model]\nactivation = relu, elu, tanh, swish\nm = 2000\nseeds = 1\n",
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let o = Command::new(env!("CARGO_BIN_EXE_gramscope"))
            .args(["spectrum", "--config", &cfg, "--out", dir.to_str().unwrap(), "--seeds", "4,9"])
            .env("GRAMSCOPE_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.code() == Some(0) || o.status.code() == Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut csvs = 0;
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        let name = name.to_str().unwrap();
        if name.ends_with(".csv") || name == "manifest.txt" {
            assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
            csvs += name.ends_with(".csv") as usize;
        }
    }
    assert_eq!(csvs, 8);
    let r = report(&a);
    assert_eq!(value(&r, "seeds"), "4,9");
    assert!(r.contains("summary.ordering.majority="));
    assert!(r.contains("seed.9.ordering.holds="));
    let expect = if value(&r, "status") == "pass" { Some(0) } else { Some(1) };
    let o = Command::new(env!("CARGO_BIN_EXE_gramscope"))
        .args(["spectrum", "--config", &cfg, "--out", a.to_str().unwrap(), "--seeds", "4,9"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), expect);
}

#[test]
fn csv_values_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "k.conf", KILL);
    let out = tmp.path().join("out");
    assert!(gramscope(&["kill", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path()).status.success());
    let text = fs::read_to_string(out.join("kill_eigenvalues_seed21.csv")).unwrap();
    assert!(text.starts_with("index,eigenvalue\n"));
    for line in text.lines().skip(1) {
        let v = line.split(',').nth(1).unwrap();
        let x: f64 = v.parse().unwrap();
        assert_eq!(format!("{x:.16e}"), v);
    }
}

#[test]
fn wrong_experiment_and_bad_thread_count_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "k.conf", KILL);
    let o = gramscope(&["depth", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment `kill`"));
    let o = Command::new(env!("CARGO_BIN_EXE_gramscope"))
        .args(["kill", "--config", &cfg, "--out", "o"])
        .current_dir(tmp.path())
        .env("GRAMSCOPE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = gramscope(&["fit", "--config", &cfg], tmp.path());
    assert!(!o.status.success());
}

#[test]
fn train_csv_has_the_declared_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "t.conf",
        "[data]\nn = 5\nd = 4\n[model]\nactivation = tanh\nm = 300\nseeds = 2\n[run]\nsteps = 50\nrecord_every = 10\n",
    );
    let out = tmp.path().join("out");
    let o = gramscope(&["train", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("train_seed2.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,loss,residual_norm,max_drift,movement_ok,predicted_residual"));
    assert_eq!(lines.count(), 6);
}
