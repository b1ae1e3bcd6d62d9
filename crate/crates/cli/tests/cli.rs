use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn klab(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klab"))
        .env("KLAB_CACHE_DIR", cache)
        .args(args)
        .output()
        .expect("klab runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn sk_for_k2_q7() {
    let dir = tempfile::tempdir().unwrap();
    let out = klab(dir.path(), &["sk", "--k", "2", "--q", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let set = &v["results"]["multisets"][0];
    assert_eq!(set["entries"], serde_json::json!([[2, 1], [4, 4]]));
    assert_eq!(set["total"], 5);
    assert_eq!(set["zero_count"], 3);
    assert_eq!(v["command"], "sk");
    assert_eq!(v["tool"], "klab");
}

#[test]
fn unknown_flag_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(klab(dir.path(), &["kl-table", "--bogus"]).status.code(), Some(1));
    assert_eq!(klab(dir.path(), &["no-such-command"]).status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(klab(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(klab(dir.path(), &["--version"]).status.code(), Some(0));
}

#[test]
fn sampled_runs_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = klab(dir.path(), &["sumprod-scan", "--q", "11"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn seeded_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sumprod-scan", "--q", "11", "--seed", "5", "--samples", "20"];
    let a = klab(dir.path(), &args);
    let b = klab(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let sweep = ["bilinear-sweep", "--q", "101", "--M", "4", "--N", "4", "--seed", "2", "--samples", "1"];
    assert_eq!(klab(dir.path(), &sweep).stdout, klab(dir.path(), &sweep).stdout);
}

#[test]
fn cached_and_fresh_tables_agree() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["kl-table", "--q", "13", "--k", "3", "--format", "csv"];
    let fresh = klab(dir.path(), &args);
    assert!(dir.path().join("kl_k3_q13_d1_intro.bin").exists());
    let cached = klab(dir.path(), &args);
    assert_eq!(fresh.stdout, cached.stdout);
    let text = String::from_utf8(fresh.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("q,d,k,c,a,re,im,abs"));
    assert_eq!(text.lines().count(), 1 + 13);
}

#[test]
fn violated_constraints_give_header_only_csv_and_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("shift.csv");
    let out = klab(
        dir.path(),
        &["shift-check", "--seed", "1", "--A", "60", "--format", "csv", "--out", out_path.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(csv, "sample,seed,deviation\n");
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("shift.csv.meta.json")).unwrap()).unwrap();
    assert!(!meta["violations"].as_array().unwrap().is_empty());
    assert_eq!(meta["config"]["A"], 60);
}

#[test]
fn exponent_search_finds_one_over_twenty_six() {
    let dir = tempfile::tempdir().unwrap();
    let out = klab(dir.path(), &["exponent-lp", "--search"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let delta = v["results"]["delta_star"].as_f64().unwrap();
    assert!((delta - 1.0 / 26.0).abs() < 1e-3, "delta* = {delta}");
    let eta = v["results"]["eta_star"].as_f64().unwrap();
    assert!(eta > 0.0 && eta < delta);
}

#[test]
fn exponent_outside_region_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = klab(dir.path(), &["exponent-lp", "--delta", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!json_of(&out)["violations"].as_array().unwrap().is_empty());
}

#[test]
fn config_file_supplies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("klab.toml");
    std::fs::write(&cfg, "[sk]\nk = [3]\nq = 7\n").unwrap();
    let c = cfg.to_str().unwrap();

    let from_file = json_of(&klab(dir.path(), &["--config", c, "sk"]));
    assert_eq!(from_file["config"]["k"], serde_json::json!([3]));
    assert_eq!(from_file["config"]["q"], 7);

    let overridden = json_of(&klab(dir.path(), &["--config", c, "sk", "--k", "2"]));
    assert_eq!(overridden["config"]["k"], serde_json::json!([2]));
    assert_eq!(overridden["config"]["q"], 7);
    assert_eq!(overridden["results"]["multisets"][0]["entries"], serde_json::json!([[2, 1], [4, 4]]));
}

#[test]
fn bad_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("klab.toml");
    std::fs::write(&cfg, "[sk]\nwidth = 3\n").unwrap();
    assert_eq!(klab(dir.path(), &["--config", cfg.to_str().unwrap(), "sk"]).status.code(), Some(1));
    std::fs::write(&cfg, "[nonsense]\n").unwrap();
    assert_eq!(klab(dir.path(), &["--config", cfg.to_str().unwrap(), "sk"]).status.code(), Some(1));
}

#[test]
fn report_combines_sections() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("klab.toml");
    std::fs::write(&cfg, "[kl-check]\nq = [7]\nk = [2, 3]\n[sk]\nk = [2, 3]\n[progression]\nx = 2000\nq = [7, 11]\n").unwrap();
    let out = klab(dir.path(), &["--config", cfg.to_str().unwrap(), "report"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    for section in ["kl-check", "sk", "exponent-lp", "progression", "brackets"] {
        assert!(v["results"].get(section).is_some(), "missing {section}");
    }
    assert_eq!(v["results"]["kl-check"]["all_pass"], true);
    assert_eq!(v["results"]["progression"]["coefficient_checks"]["hecke_violations"], 0);
}
