use std::path::Path;
use std::process::{Command, Output};

fn hslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hslab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CRIT3: [&str; 14] = ["-d", "3", "-k", "1", "-p", "2", "-q", "6", "-a", "0", "-b", "0", "--gamma", "0"];

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(args: &[String]) -> Output {
    hslab(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn classify_prints_json_verdict() {
    let o = hslab(&["classify", "-d", "4", "-k", "2", "-p", "2", "-q", "pstar", "-a", "1", "-b", "-0.5", "--gamma", "-0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["params"]["q"], 4.0);
    assert_eq!(v["verdict"]["positive"], true);
    assert_eq!(v["verdict"]["attainability"], "NotAchieved");
    assert!(o.stderr.is_empty());
}

#[test]
fn constant_sobolev_example() {
    let o = run(&with(&["constant"], &[&CRIT3[..], &["--nr", "128", "--ns", "128"]].concat()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let est = v["constant_estimate"].as_f64().unwrap();
    assert!((est - 5.478).abs() < 0.01 * 5.478, "{est}");
    assert_eq!(v["converged"], false);
}

#[test]
fn sweep_b_beyond_range_names_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bottom.toml");
    std::fs::write(&cfg, "d = 4\nk = 2\np = 2.0\nq = 3.0\na = 0.0\nb = 0.0\ngamma = 0.0\nbs = [0.5, 2.5]\n").unwrap();
    let o = hslab(&["sweep-b", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("b < 2H_a"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

/// One case per documented exit path.
#[test]
fn exit_code_matrix() {
    let cases: Vec<(Vec<&str>, i32, &str)> = vec![
        (vec!["frobnicate"], 2, "unrecognized"),
        (vec!["classify", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0", "--gamma", "0"], 2, "\"d\""),
        (vec!["classify", "-d", "4", "-k", "2", "-p", "2", "-q", "pstr", "-a", "0", "-b", "0", "--gamma", "0"], 2, "-q"),
        (vec!["classify", "--config", "/nonexistent/c.toml"], 2, "nonexistent"),
        (vec!["constant", "-d", "4", "-k", "5", "-p", "2", "-q", "3", "-a", "0", "-b", "0", "--gamma", "0"], 2, "invalid"),
        (vec!["constant", "-d", "4", "-k", "2", "-p", "2", "-q", "3", "-a", "-3", "-b", "0", "--gamma", "0"], 2, "k + a > 0"),
        (vec!["constant", "-d", "3", "-k", "1", "-p", "2", "-q", "6", "-a", "0", "-b", "0", "--gamma", "0", "--nr", "4"], 2, "resolution"),
        (vec!["sweep-b", "-d", "4", "-k", "2", "-p", "3", "-q", "4", "-a", "0", "-b", "0", "--gamma", "0", "--bs", "0.5"], 2, "p = 2"),
        (
            vec!["family", "--kind", "radial-power", "--r-in", "1", "--r-out", "2", "--values", "0.1", "-d", "4", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0", "--gamma", "0"],
            2,
            "cutoff radii",
        ),
        (
            vec!["family", "--kind", "translate", "--values", "1", "-d", "4", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0", "--gamma", "0"],
            2,
            "too large",
        ),
        (vec!["constant", "-d", "4", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0.5", "--gamma", "0"], 4, "zero"),
        (vec!["constant", "-d", "3", "-k", "1", "-p", "2", "-q", "7", "-a", "0", "-b", "0", "--gamma", "0"], 4, "zero"),
        (vec!["classify", "-d", "4", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0", "--gamma", "0", "--out", "/nonexistent/dir/x"], 2, "No such file"),
    ];
    for (args, code, needle) in cases {
        let o = hslab(&args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn gamma_below_b_is_a_query_not_a_parse_error() {
    let o = hslab(&["classify", "-d", "4", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0.5", "--gamma", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"]["positive"], false);
}

#[test]
fn file_values_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "d = 4\nk = 2\np = 2.0\nq = 4\na = 0.0\nb = 0.0\ngamma = 0.0\n").unwrap();
    let o = hslab(&["classify", "--config", cfg.to_str().unwrap(), "-q", "pstar"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["params"]["q"], 4.0);
    let o = hslab(&["classify", "--config", cfg.to_str().unwrap(), "-q", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["params"]["q"], 3.0);
}

fn sweep_csv(dir: &Path, name: &str) -> Vec<u8> {
    let out = dir.join(name);
    let o = hslab(&[
        "sweep-gamma", "-d", "4", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0", "--gamma", "0",
        "--gammas", "0,0.5,1", "--nr", "24", "--ns", "24", "--max-iters", "150", "--seed", "7",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(side["points"].as_array().unwrap().len(), 3);
    std::fs::read(out).unwrap()
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = sweep_csv(dir.path(), "a.csv");
    let b = sweep_csv(dir.path(), "b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("param,estimate,converged,flag\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn family_and_table_reports() {
    let o = hslab(&["family", "--kind", "concentrate", "--values", "4,16", "-d", "3", "-k", "1", "-p", "2", "-q", "6", "-a", "0", "-b", "0", "--gamma", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    let vals: Vec<f64> = s.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(vals.len(), 2);
    for v in vals {
        assert!((v - 5.4788).abs() < 1e-3, "{v}");
    }

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.toml");
    std::fs::write(
        &cfg,
        "[[rows]]\nd = 4\nk = 2\np = 2.0\nq = 3.0\na = 0.5\nb = 0.25\ngamma = 1.0\n\n[[rows]]\nd = 3\nk = 1\np = 2.0\nq = \"pstar\"\na = 0.0\nb = 0.0\ngamma = 0.0\n",
    )
    .unwrap();
    let o = hslab(&["table", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn profile_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("u.csv");
    let out = dir.path().join("r.csv");
    let o = hslab(&[
        "constant", "-d", "4", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0", "--gamma", "0.5",
        "--nr", "24", "--ns", "24", "--max-iters", "200", "--format", "csv",
        "--profile", prof.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let g = hslab::mesh::read_grid_csv(std::fs::File::open(&prof).unwrap(), hslab::mesh::Grading::LogGraded).unwrap();
    assert_eq!((g.nr(), g.ns()), (24, 24));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("constant_estimate,"));
}
