use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use late_phase::dgp::{sample, BinaryTheta, TypeShares};
use late_phase::document::DgpDocument;
use late_phase::fixtures::{builtin_base, random_theta};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_late-phase"));
    c.env_remove("LATE_PHASE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fertility_boundary() {
    let o = run(&["boundary", "--beta=-0.0950", "--k1=0.4105", "--k2=0.3557", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let b = json(&o)["boundary"].as_f64().unwrap();
    assert!((b - 0.0052).abs() <= 5e-5);
}

#[test]
fn training_one_sided_is_safe() {
    let o = run(&[
        "boundary", "--beta", "-0.0363", "--k1", "0.6228", "--k2", "0.0112", "--cell-prob",
        "0.0157", "--regime", "one-sided", "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert!((v["boundary"].as_f64().unwrap() - 0.0222).abs() <= 5e-5);
    assert_eq!(v["boundary_reports"][0]["verdict"], "safe-side");
    assert_eq!(v["boundary_reports"][0]["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn boundary_exit_codes() {
    let safe = run(&["boundary", "--beta=-0.01", "--k1=0.5", "--k2=0.3", "--eta=0"]);
    assert_eq!(safe.status.code(), Some(0));
    assert!(stdout(&safe).contains("SafeSide"));
    let danger = run(&["boundary", "--beta=-0.01", "--k1=0.5", "--k2=0.3", "--eta=0.05"]);
    assert_eq!(danger.status.code(), Some(2));
    let equal = run(&["boundary", "--beta=-0.5", "--k1=0.75", "--k2=0.25", "--eta=0.25"]);
    assert_eq!(equal.status.code(), Some(2), "equality is on the dangerous side");
    let flipped = run(&["boundary", "--beta=-0.01", "--k1=0.3", "--k2=0.5"]);
    assert_eq!(flipped.status.code(), Some(1));
    assert!(stderr(&flipped).contains("relabel Z"));
    let missing = run(&["boundary", "--beta=-0.01", "--k1=0.5", "--k2=0.3", "--regime=general"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(run(&["boundary"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

fn csv_from(theta: &late_phase::ThetaF64, n: usize, seed: u64) -> String {
    let data = sample(theta, n, seed).unwrap();
    let mut s = String::from("id,y,d,z\n");
    for (i, r) in data.rows().iter().enumerate() {
        s.push_str(&format!("{i},{},{},{}\n", r.y, r.d as u8, r.z as u8));
    }
    s
}

#[test]
fn estimate_from_known_process_brackets_truth() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
    let theta = loop {
        let t = random_theta(&mut rng, 3);
        if t.shares().complier - t.shares().defier > 0.3 {
            break t;
        }
    };
    let path = write(dir.path(), "data.csv", &csv_from(&theta, 4000, 9));
    let o = run(&["estimate", &path, "--json", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let truth = [("beta", theta.iv_beta().unwrap()), ("k1", theta.k1()), ("k2", theta.k2())];
    for (name, value) in truth {
        let ci = v["bootstrap"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["statistic"] == name)
            .unwrap();
        let (lo, hi) = (ci["lo"].as_f64().unwrap(), ci["hi"].as_f64().unwrap());
        assert!(lo <= value && value <= hi, "{name}: {value} outside [{lo}, {hi}]");
    }
    assert_eq!(v["schema"], "late-phase/analysis/v1");
    assert_eq!(v["provenance"]["seed"], 3);
    assert_eq!(v["provenance"]["input"], path.as_str());
    assert_eq!(v["provenance"]["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn estimate_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "data.csv", &csv_from(&builtin_base(), 1500, 2));
    let report = dir.path().join("report.json");
    let report = report.to_str().unwrap();
    let first = run(&["estimate", &path, "--bootstrap", "100", "-o", report]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let bytes = fs::read_to_string(report).unwrap();
    let again = run(&["estimate", &path, "--bootstrap", "100", "--json"]);
    assert_eq!(stdout(&again), bytes);

    // Parse and re-emit through the untyped model keeps every byte.
    let value: Value = serde_json::from_str(&bytes).unwrap();
    let mut re = serde_json::to_string_pretty(&value).unwrap();
    re.push('\n');
    assert_eq!(re, bytes);

    let other_seed = bin()
        .args(["estimate", &path, "--bootstrap", "100", "--json"])
        .env("LATE_PHASE_SEED", "11")
        .output()
        .unwrap();
    let v = json(&other_seed);
    assert_eq!(v["provenance"]["seed"], 11);
    assert_ne!(stdout(&other_seed), bytes);
}

#[test]
fn estimate_with_full_compliance_has_unit_gamma() {
    let mut text = String::from("y,d,z\n");
    for i in 0..200 {
        let z = i % 2;
        text.push_str(&format!("{},{z},{z}\n", (i % 7) as f64 * 0.5 + z as f64));
    }
    let mut child = bin()
        .args(["estimate", "-", "--json", "--bootstrap", "0"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["estimates"]["gamma_hat"], 1.0);
    assert_eq!(v["provenance"]["input"], "-");
}

#[test]
fn estimate_reports_bad_rows_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.csv", "y,d,z\n1,0,1\n,1,0\n2,abc,1\n3,1,2\nNaN,0,0\n");
    let o = run(&["estimate", &path]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 3: column 'y': missing value"), "{err}");
    assert!(err.contains("line 4: column 'd': not a number"), "{err}");
    assert!(err.contains("line 5: column 'z': must be 0 or 1"), "{err}");
    assert!(err.contains("line 6: column 'y': non-finite"), "{err}");

    let empty = write(dir.path(), "empty.csv", "");
    let o = run(&["estimate", &empty]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty"));

    let header_only = write(dir.path(), "header.csv", "y,d,z\n");
    assert_eq!(run(&["estimate", &header_only]).status.code(), Some(1));

    let renamed = write(dir.path(), "renamed.csv", "wage,took,offer\n1,1,1\n0,0,0\n1,0,1\n0,1,0\n");
    assert_eq!(run(&["estimate", &renamed]).status.code(), Some(1));
    let o = run(&[
        "estimate", &renamed, "--y-col", "wage", "--d-col", "took", "--z-col", "offer", "--bootstrap", "0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn dichotomize_keeps_other_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "w.csv", "id,y,d,z\na,0,1,1\nb,12,0,1\nc,3.5,1,0\n");
    let o = run(&["dichotomize", &path, "--threshold", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "id,y,d,z\na,0,1,1\nb,1,0,1\nc,1,1,0\n");
    let o = run(&["dichotomize", &path, "--threshold", "-5"]);
    assert_eq!(stdout(&o), "id,y,d,z\na,1,1,1\nb,1,0,1\nc,1,1,0\n");
}

#[test]
fn forge_then_audit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let base = write(dir.path(), "base.json", &DgpDocument::from_theta(&builtin_base()).to_json());
    let twin = dir.path().join("twin.json");
    let twin = twin.to_str().unwrap();
    let forged = dir.path().join("forged.json");
    let forged = forged.to_str().unwrap();
    let o = run(&[
        "forge", &base, "--eta", "0.05", "--eps1", "0.3", "--eps2", "0.3", "--twin-out", twin, "-o", forged,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&fs::read_to_string(forged).unwrap()).unwrap();
    assert!(doc["certificate"]["equivalence_distance"].as_f64().unwrap() <= 1e-12);
    assert!(doc["certificate"]["mu1_twin"].as_f64().unwrap() > 0.01);
    assert_eq!(doc["certificate"]["membership_holds"], true);

    for candidate in [twin, forged] {
        let o = run(&["audit", &base, candidate, "--eta", "0.05", "--json"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v = json(&o);
        assert!(v["equivalence_distance"].as_f64().unwrap() <= 1e-12);
        assert_eq!(v["passed"], true);
    }

    // Same inputs, same bytes.
    let again = run(&["forge", &base, "--eta", "0.05", "--eps1", "0.3", "--eps2", "0.3", "--json"]);
    assert_eq!(stdout(&again), fs::read_to_string(forged).unwrap());

    // A different process is not equivalent.
    let other = write(dir.path(), "other.json", &DgpDocument::from_theta(&builtin_base().negated()).to_json());
    let o = run(&["audit", &base, &other]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL"));

    // A failed precondition is named.
    let o = run(&["forge", &base, "--eta", "0.05", "--eps1", "0.2", "--eps2", "0.3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("eta < eps1*(k1-k2)"), "{}", stderr(&o));
}

#[test]
fn malformed_dgp_document_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\n  \"schema\": \"late-phase/dgp/v1\",\n  \"kind\": \n}\n");
    let o = run(&["forge", &bad, "--eta", "0.05"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn binary_forge_refuses_safe_side() {
    let dir = tempfile::tempdir().unwrap();
    let binary = |beta: f64| {
        BinaryTheta::new(
            TypeShares::from_take_up(0.5, 0.3, 0.0).unwrap(),
            0.5,
            [0.5, 0.5 + beta, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.4],
        )
        .unwrap()
    };
    let danger = write(dir.path(), "danger.json", &DgpDocument::from_binary(&binary(-0.01)).to_json());
    let o = run(&["forge", &danger, "--eta", "0.05", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&o)["construction"], "binary-interior");

    let safe = write(dir.path(), "safe.json", &DgpDocument::from_binary(&binary(-0.5)).to_json());
    let o = run(&["forge", &safe, "--eta", "0.05"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sign is identified"), "{}", stderr(&o));
}

#[test]
fn simulate_builtin_pair_is_deterministic_and_indistinguishable() {
    let args = [
        "simulate", "--procedure", "plug-in-sign", "--procedure", "always-ambiguous", "--n", "2000",
        "--replications", "200", "--seed", "5", "--json",
    ];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert_eq!(stdout(&first), stdout(&run(&args)));
    let v = json(&first);
    for e in v["experiments"].as_array().unwrap() {
        assert_eq!(e["rejects_at_one_percent"], false);
        assert_eq!(e["ledger_holds"], true);
    }
}

#[test]
fn simulate_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let base = DgpDocument::from_theta(&builtin_base());
    let config = serde_json::json!({
        "n": 500,
        "replications": 50,
        "seed": 2,
        "procedures": ["plug-in-sign"],
        "base": base,
        "forge": {"eps1": 0.3, "eps2": 0.3, "bound": 1.0, "eta": 0.05, "delta_rule": 0.5},
        "sizes": [100, 1000],
        "seeds": 5
    });
    let path = write(dir.path(), "sim.json", &config.to_string());
    let o = run(&["simulate", &path, "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["experiments"][0]["config"]["n"], 500);
    assert_eq!(v["provenance"]["seed"], 2);
    assert_eq!(v["consistency"]["sizes"].as_array().unwrap().len(), 2);

    let bad = write(dir.path(), "bad.json", "{\"n\": 5, \"colour\": 1}");
    assert_eq!(run(&["simulate", &bad]).status.code(), Some(1));
}
