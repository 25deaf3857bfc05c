use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cone-schauder"));
    c.env_remove("CONE_SCHAUDER_OUT");
    c
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cone-schauder-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn roots_for_rugby_ball() {
    let dir = scratch("roots");
    let spec = dir.join("spec.json");
    fs::write(&spec, r#"{"betas": [0.6666666666666666], "euclidean_dim": 1}"#).unwrap();
    let out = bin().arg("--spec").arg(&spec).args(["roots", "--dmax", "3"]).output().unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<(String, String)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap().to_string(), it.next().unwrap().to_string())
        })
        .collect();
    let want = [("0", "1"), ("1", "1"), ("1.5", "2"), ("2", "1"), ("2.5", "2"), ("3", "3")];
    assert_eq!(rows.len(), want.len());
    for ((d, k), (wd, wk)) in rows.iter().zip(want) {
        assert_eq!((d.as_str(), k.as_str()), (wd, wk));
    }
}

#[test]
fn scope_error_names_mu() {
    let out = bin().args(["verify-schauder", "--alpha", "0.4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("mu = 0.333"), "{err}");
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = scratch("badcfg");
    let cfg = dir.join("cfg.json");
    fs::write(&cfg, r#"{"spec": {"betas": [1.5], "euclidean_dim": 1}}"#).unwrap();
    let out = bin().arg("--config").arg(&cfg).arg("basis").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("spec"));
    let out = bin().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn replay_gives_identical_hashes() {
    let hashes = |tag: &str| {
        let dir = scratch(tag);
        let st = bin().arg("--out").arg(&dir).args(["--seed", "9", "verify-monotonicity"]).status().unwrap();
        assert!(st.success());
        let m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
        (m["config_sha256"].clone(), m["outputs"].clone())
    };
    assert_eq!(hashes("a"), hashes("b"));
}

#[test]
fn output_directory_from_environment() {
    let dir = scratch("env");
    let st = bin().env("CONE_SCHAUDER_OUT", &dir).arg("basis").status().unwrap();
    assert!(st.success());
    for f in ["basis.csv", "basis.json", "summary.json", "schema.json", "manifest.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
}

#[test]
fn help_documents_csv_columns() {
    let out = bin().args(["help", "verify-schauder"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("CSV columns"));
}
