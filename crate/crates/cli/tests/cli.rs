use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use rotmhd_cli::config::{load_config, ExperimentConfig, LoadedConfig};
use rotmhd_cli::output::config_hash;
use rotmhd_cli::{execute, CliError};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

fn parse_err(text: &str) -> String {
    match ExperimentConfig::from_toml(text) {
        Err(e @ CliError::Config(_)) => {
            assert_eq!(e.exit_code(), 2);
            e.to_string()
        }
        Err(e) => e.to_string(),
        Ok(_) => panic!("accepted:\n{text}"),
    }
}

fn rotmhd(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rotmhd"))
        .args(args)
        .env("ROTMHD_THREADS", "1")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

const SIM: &str = r#"kind = "simulate"
seed = 3

[grid]
n_h = 16
n_v = 12
box_h = 42.0
box_v = 42.0

[model]
eps = 0.1
alpha = 0.2

[cutoff]
c_product = 1.0

[solver]
dt = 0.01
t_end = 0.1
output_every = 2

[init]
h0s = 4.0

[simulate]
mode = "coupled-split"
"#;

#[test]
fn shipped_configs_validate() {
    let all = shipped();
    assert!(all.len() >= 6);
    for p in all {
        load_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn round_trip_through_toml() {
    for p in shipped() {
        let c = load_config(&p).unwrap().config;
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c, "{}", p.display());
    }
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    let e = parse_err(&SIM.replace("dt = 0.01", "dt = 0.01\ndtt = 0.02"));
    assert!(e.contains("dtt"), "{e}");
    let e = parse_err(&SIM.replace("seed = 3", "seed = 3\nsede = 4"));
    assert!(e.contains("sede"), "{e}");
}

#[test]
fn missing_keys_and_tables_are_named() {
    let e = parse_err(&SIM.replace("n_v = 12\n", ""));
    assert!(e.contains("n_v"), "{e}");
    let e = parse_err(&SIM.replace("[solver]\ndt = 0.01\nt_end = 0.1\noutput_every = 2\n", ""));
    assert!(e.contains("[solver]"), "{e}");
    let e = parse_err(&SIM.replace("h0s = 4.0", "h0s = 4.0\nl2 = 1.0"));
    assert!(e.contains("exactly one"), "{e}");
}

#[test]
fn unresolved_cutoff_is_a_config_error() {
    let e = parse_err(&SIM.replace("box_h = 42.0", "box_h = 8.0"));
    assert!(e.contains("enlarge the box"), "{e}");
}

#[test]
fn hash_is_pinned_and_ignores_line_endings() {
    // sha256 of "blob <len>\0" + text, computed independently
    let text = "kind = \"check\"\nseed = 5\n\n[check]\nchecks = [\"eigen\"]\n";
    let want = "a25c7c083f95534ee0c110f33f32a093fe60a3160e87477de0c6d9f683fc0138";
    assert_eq!(config_hash(text), want);
    assert_eq!(config_hash(&text.replace('\n', "\r\n")), want);
}

fn run_to(text: &str, dir: &Path) -> rotmhd_cli::RunManifest {
    let loaded = LoadedConfig {
        config: ExperimentConfig::from_toml(text).unwrap(),
        text: text.to_owned(),
    };
    execute(&loaded, Some(dir), None).unwrap()
}

#[test]
fn one_entry_sweep_reproduces_simulate() {
    let sweep = SIM.replace("kind = \"simulate\"", "kind = \"sweep\"").replace("[simulate]\nmode = \"coupled-split\"\n", "[sweep]\neps_list = [0.1]\n");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ms = run_to(SIM, a.path());
    let mw = run_to(&sweep, b.path());
    assert_eq!(ms.exit_code, 0);
    assert_eq!(mw.exit_code, 0);
    for f in ["diagnostics.csv", "summary.json"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join("eps_00").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn manifest_lists_every_artifact_with_its_hash() {
    let d = tempfile::tempdir().unwrap();
    let m = run_to(SIM, d.path());
    assert_eq!(m.config_hash, config_hash(SIM));
    let names: Vec<&str> = m.artifacts.iter().map(|a| a.file.as_str()).collect();
    assert_eq!(names, ["diagnostics.csv", "summary.json"]);
    let diag = &m.artifacts[0];
    assert!(!diag.columns.is_empty() && diag.columns.iter().all(|c| !c.description.is_empty()));
    let bytes = fs::read(d.path().join("diagnostics.csv")).unwrap();
    assert_eq!(rotmhd_cli::output::sha256_hex(&bytes), diag.sha256);
    let header = String::from_utf8(bytes).unwrap().lines().next().unwrap().to_owned();
    assert_eq!(header.split(',').count(), diag.columns.len());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(json["status"], "success");
    assert!(json["derived"]["cutoff"]["alpha0"].is_number());
    // no temporary files left behind
    assert!(fs::read_dir(d.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn binary_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.toml");
    fs::write(&bad, SIM.replace("eps = 0.1", "eps = 0.1\nepsilon = 0.2")).unwrap();
    let out = d.path().join("out");
    let o = rotmhd(&["simulate", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));

    let good = d.path().join("sim.toml");
    fs::write(&good, SIM).unwrap();
    // subcommand must match the config kind
    let o = rotmhd(&["kernels", "--config", good.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = rotmhd(&["simulate", "--config", good.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 9);
}

#[test]
fn check_subcommand_writes_passing_metrics() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("check.toml");
    fs::write(&cfg, "kind = \"check\"\n[check]\nchecks = [\"eigen\", \"cancellation\"]\nsamples = 50\n").unwrap();
    let out = d.path().join("out");
    let o = rotmhd(&["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("checks.csv")).unwrap();
    assert!(csv.lines().count() > 1, "{csv}");
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")), "{csv}");
}

#[test]
fn different_seeds_change_the_data() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_to(SIM, a.path());
    run_to(&SIM.replace("seed = 3", "seed = 4"), b.path());
    assert_ne!(fs::read(a.path().join("diagnostics.csv")).unwrap(), fs::read(b.path().join("diagnostics.csv")).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_round_trips(eps in 1e-4f64..1.0, alpha in 0.0f64..0.3, n in 4usize..64, seed in any::<u64>()) {
        let text = format!(
            "kind = \"linear\"\nseed = {seed}\n[model]\neps = {eps:e}\nalpha = {alpha:e}\n[linear]\nrandom = {n}\n"
        );
        let c = ExperimentConfig::from_toml(&text).unwrap();
        prop_assert_eq!(ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
    }

    #[test]
    fn hash_depends_only_on_normalized_text(s in "[a-z =\"\\n]{0,80}") {
        prop_assert_eq!(config_hash(&s), config_hash(&s.replace('\n', "\r\n")));
    }
}
