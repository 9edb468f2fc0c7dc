use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

/// Dark-state `Q_p` in bits (independent numpy/scipy oracle).
const V_D_BITS: f64 = 0.187_298_598_568_77;

fn fermicorr(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermicorr"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn state_file(dir: &Path, text: &str) -> String {
    let p = dir.join("state.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn slater_determinant_has_no_quantumness() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = state_file(tmp.path(), "[state]\nbuiltin = \"slater\"\nmodes = 4\noccupied = [1, 3]\n");
    let out = tmp.path().join("run");
    let o = fermicorr(&["quantumness", &spec, "--quantifier", "q_particles", "--restarts", "4"], &out);
    assert!(o.status.success());
    let r = json(&out.join("result.json"));
    assert!(r["value"].as_f64().unwrap().abs() <= 1e-6, "{r}");
    assert_eq!(r["unit"], "bits");
    assert_eq!(r["converged"], true);
    assert_eq!(r["optimal_basis"]["single_particle"].as_array().unwrap().len(), 4);
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["command"], "quantumness");
    assert_eq!(m["outputs"][0]["file"], "result.json");
}

#[test]
fn dark_state_matches_oracle_in_both_units() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = state_file(tmp.path(), "[state]\nbuiltin = \"dark_4_2\"\n");
    let out = tmp.path().join("bits");
    assert!(fermicorr(&["quantumness", &spec, "--restarts", "8"], &out).status.success());
    let v = json(&out.join("result.json"))["value"].as_f64().unwrap();
    assert!((v - V_D_BITS).abs() <= 1e-4, "{v}");

    let out = tmp.path().join("nats");
    let o = fermicorr(&["quantumness", &spec, "--restarts", "8", "--log-base", "e", "--format", "csv"], &out);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.join("result.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "nats");
    let v: f64 = row[1].parse().unwrap();
    assert!((v - V_D_BITS * 2f64.ln()).abs() <= 1e-4, "{v}");
    // twelve significant digits
    assert_eq!(row[1].trim_start_matches("0.").len(), 12, "{}", row[1]);
}

#[test]
fn other_quantifiers_on_builtins() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = state_file(tmp.path(), "[state]\nbuiltin = \"bell_modes\"\n");
    let out = tmp.path().join("owd");
    let o = fermicorr(&["quantumness", &spec, "--quantifier", "one_way_deficit", "--measured", "1", "--restarts", "4"], &out);
    assert!(o.status.success());
    // a single shared particle: the symmetric measurement costs 1 bit
    let v = json(&out.join("result.json"))["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-6, "{v}");

    let out = tmp.path().join("occ");
    assert!(fermicorr(&["quantumness", &spec, "--quantifier", "occupation"], &out).status.success());
    assert!((json(&out.join("result.json"))["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = tmp.path().join("mreq");
    let o = fermicorr(&["quantumness", &spec, "--quantifier", "mreq", "--blocks", "1;2", "--restarts", "4"], &out);
    assert!(o.status.success());
    assert!((json(&out.join("result.json"))["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn explicit_matrix_spec() {
    let tmp = tempfile::tempdir().unwrap();
    // maximally mixed two-mode state: no quantumness
    let rows = "[state]\nrows = [\n  \"0.25,0 0,0 0,0 0,0\",\n  \"0,0 0.25,0 0,0 0,0\",\n  \"0,0 0,0 0.25,0 0,0\",\n  \"0,0 0,0 0,0 0.25,0\",\n]\n";
    let spec = state_file(tmp.path(), rows);
    let out = tmp.path().join("run");
    let o = fermicorr(&["quantumness", &spec, "--quantifier", "q_sp", "--restarts", "2"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&out.join("result.json"))["value"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn malformed_inputs_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let bad = state_file(tmp.path(), "[state]\nrows = [\"1,0 0,0\", \"0,0 1,0\"]\n");
    for args in [
        vec!["quantumness", bad.as_str()],
        vec!["quantumness", "/nonexistent/state.toml"],
        vec!["check", "nonsense"],
        vec!["evolve", "--L", "1"],
        vec!["landscape", "--grid", "61"],
        vec!["landscape", "--mode", "4"],
    ] {
        let o = fermicorr(&args, &out);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn unstable_step_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fermicorr(&["evolve", "--dt", "0.8", "--tmax", "20", "--record-every", "0.8"], &tmp.path().join("run"));
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("halve dt"), "{err}");
}

#[test]
fn short_evolution_writes_trajectory_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = fermicorr(&["evolve", "--tmax", "1", "--quantifier-every", "0.5", "--restarts", "2"], &out);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("final dark-state fidelity"), "{stdout}");
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,purity,q_particles_bits,concurrence,negativity,shifted_negativity,trace_err"
    );
    assert_eq!(csv.lines().count(), 1 + 101);
    let s = json(&out.join("summary.json"));
    assert!(s["max_trace_error"].as_f64().unwrap() <= 1e-7);
    assert_eq!(s["ppt_windows"].as_array().unwrap().len(), 1);

    let out = tmp.path().join("json");
    let o = fermicorr(&["evolve", "--tmax", "0.1", "--quantifier-every", "0.1", "--restarts", "1", "--format", "json"], &out);
    assert!(o.status.success());
    let t = json(&out.join("trajectory.json"));
    assert_eq!(t["t"].as_array().unwrap().len(), 11);
    assert!(t["series"]["q_particles"][1].is_null());
}

#[test]
fn landscape_is_reproducible_and_digested() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["landscape", "--ensemble", "par1", "--samples", "200", "--grid", "13x8", "--seed", "5"];
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(fermicorr(&args, &a).status.success());
    assert!(fermicorr(&[&args[..], &["--threads", "2"]].concat(), &b).status.success());
    for f in ["landscape.csv", "histogram.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.join("landscape.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "phi,theta,T_mean_bits,T_se_bits,n");
    assert_eq!(csv.lines().count(), 1 + 13 * 8);
    let hist = std::fs::read_to_string(a.join("histogram.csv")).unwrap();
    let total: f64 = hist.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let m = json(&a.join("manifest.json"));
    assert_eq!(m["seed"], 5);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
    assert_eq!(m["config"]["ensemble"]["kind"], "parity_sector");
    let s = json(&a.join("summary.json"));
    assert_eq!(s["symmetric_rows_max"]["T"].as_f64().unwrap(), 0.0);
}

#[test]
fn check_reports_status_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ok");
    let o = fermicorr(&["check", "theorem2", "--samples", "4"], &out);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS "));
    assert_eq!(json(&out.join("check.json"))["passed"], true);
    // no generated cases is no evidence: the property fails
    let o = fermicorr(&["check", "theorem3", "--samples", "0"], &tmp.path().join("empty"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL "));
}
