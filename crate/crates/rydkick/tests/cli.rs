use std::process::Command;

fn rydkick() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rydkick"));
    c.env("RUST_LOG", "warn");
    c
}

const CONFIG: &str = r#"
engine = "classical"

[system]
n_i = 10
nu0 = [1.45, 1.46]
f0av = 0.02

[classical]
trajectories = 500

[schedule]
k_final = 30
ratio = 1.5

[ladder]
k_min = -4
k_max = 3
"#;

#[test]
fn verbs_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("out");

    let st = rydkick()
        .args(["scan", "--workers", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(out.join("manifest").is_file());
    assert!(out.join("series/classical/1.46/series.txt").is_file());

    let st = rydkick()
        .arg("resume")
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let st = rydkick()
        .args(["resume", "--seed", "99", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(!st.success());

    let t = rydkick()
        .arg("thresholds")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(t.status.success());
    assert!(String::from_utf8(t.stdout).unwrap().starts_with("nu0 dp0"));

    let l = rydkick()
        .arg("ladder")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(String::from_utf8(l.stdout)
        .unwrap()
        .contains("band_exponent"));
}

#[test]
fn bad_config_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, CONFIG.replace("k_final = 30", "k_final = 0")).unwrap();
    let out = dir.path().join("out");
    let st = rydkick()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(!st.success());
    assert!(!out.exists());
}
