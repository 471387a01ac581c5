use std::path::Path;
use std::process::{Command, Output};

fn sardlab(dir: &Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sardlab"));
    c.current_dir(dir).env_remove("SARDLAB_OUT_DIR");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    sardlab(dir).args(args).output().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(run(p, &["schedule", "--n", "3"]).status.code(), Some(0));
    assert_eq!(run(p, &["pushforward", "--depth", "2"]).status.code(), Some(0));
    assert_eq!(run(p, &["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(p, &["eval", "--point", "1.5"]).status.code(), Some(2));
    assert_eq!(run(p, &["eval", "--dim", "3", "--point", "0.5"]).status.code(), Some(2));
    assert_eq!(run(p, &["pushforward", "--depth", "15"]).status.code(), Some(3));
    assert_eq!(run(p, &["eval", "--tol", "1e-300", "--point", "0.5"]).status.code(), Some(3));
    // digit 0 at position M violates the level-set precondition
    assert_eq!(
        run(p, &["probe", "levelset", "--address", "3033", "--m", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(run(p, &["probe", "nondiff", "--address", "1101011", "--n", "2"]).status.code(), Some(0));
}

#[test]
fn schedule_rows_are_exact() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["schedule", "--n", "3"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let last = text.lines().last().unwrap();
    let cols: Vec<&str> = last.split(',').collect();
    assert_eq!(cols[0], "3");
    assert_eq!(cols[1], "1/18");
    assert_eq!(cols[3], "7/64");
    assert_eq!(cols[5], "7/4608");
    assert_eq!(cols[7], "119/288");
}

#[test]
fn json_outputs_carry_the_schema_version() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["pushforward", "--depth", "3"][..],
        &["probe", "critical-values", "--n", "2"],
        &["probe", "critical", "--address", "0123012301", "--depth", "6"],
        &["eval", "--format", "json", "--dim", "2", "--point", "3/4,1/4"],
    ] {
        let o = run(d.path(), args);
        assert!(o.status.success(), "{args:?}");
        let v = json(&o);
        assert_eq!(v["schema_version"], 1, "{args:?}");
        assert!(v["quadrant_convention"].is_string());
    }
}

#[test]
fn grid_has_one_row_per_sample() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("grid.csv");
    let o = run(
        d.path(),
        &["eval", "--dim", "2", "--grid", "256", "--out", out.to_str().unwrap()],
    );
    assert!(o.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 256 * 256);
    assert!(text.starts_with("x,y,value,radius,n_used\n"));
}

#[test]
fn outputs_are_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let args = ["probe", "holder", "--alpha", "0.9", "--pairs", "2000", "--seed", "5"];
    let a = run(d.path(), &args);
    let b = run(d.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    for dir in ["a", "b"] {
        let o = run(d.path(), &["figure-data", "construction-2d", "--res", "32", "--out-dir", dir]);
        assert!(o.status.success());
    }
    for f in ["raster.csv", "plateaus.csv", "pushforward.csv"] {
        let a = std::fs::read(d.path().join("a/construction-2d").join(f)).unwrap();
        let b = std::fs::read(d.path().join("b/construction-2d").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.json");
    std::fs::write(&cfg, r#"{"dimension": 2, "schedule": "harmonic", "format": "json"}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let v = json(&run(d.path(), &["--config", c, "eval", "--point", "0.75,0.25"]));
    assert_eq!(v["result"]["dim"], 2);
    assert_eq!(v["result"]["schedule"], "harmonic");
    let v = json(&run(d.path(), &["--config", c, "eval", "--kind", "inverse-square", "--point", "0.75,0.25"]));
    assert_eq!(v["result"]["schedule"], "inverse-square");
    let o = run(d.path(), &["--config", c, "eval", "--dim", "1", "--format", "csv", "--point", "0.5"]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("x,value"));

    std::fs::write(&cfg, r#"{"dimensions": 2}"#).unwrap();
    assert_eq!(run(d.path(), &["--config", c, "schedule"]).status.code(), Some(2));
}

#[test]
fn output_directory_precedence() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let atoms = "pushforward-1d-inverse-square-n2.csv";
    assert!(run(p, &["pushforward", "--depth", "2"]).status.success());
    assert!(p.join("sardlab-out").join(atoms).exists());

    let env_dir = p.join("from-env");
    let o = sardlab(p)
        .env("SARDLAB_OUT_DIR", &env_dir)
        .args(["pushforward", "--depth", "2"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_dir.join(atoms).exists());

    let flag_dir = p.join("from-flag");
    let o = sardlab(p)
        .env("SARDLAB_OUT_DIR", &env_dir)
        .args(["pushforward", "--depth", "3", "--out-dir"])
        .arg(&flag_dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flag_dir.join("pushforward-1d-inverse-square-n3.csv").exists());
    assert!(!env_dir.join("pushforward-1d-inverse-square-n3.csv").exists());
}

#[test]
fn levelset_writes_a_raster() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &["probe", "levelset", "--address", "333333333333", "--M", "2", "--res", "64"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["result"]["report"]["pass"], true);
    let raster = d.path().join("sardlab-out/levelset-333333333333-m2.csv");
    let text = std::fs::read_to_string(raster).unwrap();
    assert_eq!(text.lines().count(), 1 + 64 * 64);
}
