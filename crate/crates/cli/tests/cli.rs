use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn threshold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_threshold")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn dkg(dir: &Path, backend: &str, t: &str, n: &str, seed: &str) {
    let o = threshold(&["--backend", backend, "--seed", seed, "dkg", "--t", t, "--n", n, "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn dkg_writes_one_share_per_node_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    dkg(a.path(), "toy", "3", "4", "9");
    dkg(b.path(), "toy", "3", "4", "9");
    for i in 1..=4 {
        let name = format!("share_{i}.hex");
        let s = fs::read_to_string(a.path().join(&name)).unwrap();
        // 4-byte big-endian id then one toy scalar byte
        assert_eq!(&s.trim()[..8], format!("{i:08x}"));
        assert_eq!(s, fs::read_to_string(b.path().join(&name)).unwrap());
    }
    for f in ["group.json", "group_pk.hex", "transcript.jsonl"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let lines = fs::read_to_string(a.path().join("transcript.jsonl")).unwrap();
    for line in lines.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn sign_verify_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().to_str().unwrap();
    dkg(dir.path(), "ed25519", "3", "4", "1");
    let sig = dir.path().join("sig.hex");
    let o = threshold(&["sign", "--keys", keys, "--coalition", "1,2,3", "--message", "hello", "--out", sig.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let hex = fs::read_to_string(&sig).unwrap();
    assert_eq!(hex.trim().len(), 128);

    let ok = threshold(&["verify", "--keys", keys, "--message", "hello", "--signature", sig.to_str().unwrap()]);
    assert_eq!(code(&ok), 0);
    let pk = fs::read_to_string(dir.path().join("group_pk.hex")).unwrap();
    let ok = threshold(&["verify", "--pk", pk.trim(), "--message", "hello", "--signature", sig.to_str().unwrap()]);
    assert_eq!(code(&ok), 0);

    let mut bytes = hex.trim().as_bytes().to_vec();
    bytes[70] = if bytes[70] == b'0' { b'1' } else { b'0' };
    fs::write(&sig, &bytes).unwrap();
    let bad = threshold(&["verify", "--keys", keys, "--message", "hello", "--signature", sig.to_str().unwrap()]);
    assert_eq!(code(&bad), 3);
}

#[test]
fn small_coalition_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    dkg(dir.path(), "toy", "3", "4", "1");
    let o = threshold(&["sign", "--keys", dir.path().to_str().unwrap(), "--coalition", "1,2", "--message", "m"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("needs 3"));
}

#[test]
fn bad_parameters_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = threshold(&["--backend", "toy", "dkg", "--t", "3", "--n", "12", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let o = threshold(&["simulate", "--scenario", "no-such-scenario"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn schema_violations_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    fs::write(&path, "seed = 1\nnodes = 3\n[[domains]]\nid = \"A\"\nmembers = [1, 2, 3]\nthreshold = 5\n").unwrap();
    let o = threshold(&["simulate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("domains[0].threshold"));
}

#[test]
fn simulate_bundled_scenarios_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = threshold(&["simulate", "--scenario", "three-domains", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let keys: std::collections::BTreeSet<_> =
        json["domains"].as_array().unwrap().iter().map(|d| d["frost"]["group_pk"].as_str().unwrap().to_string()).collect();
    assert_eq!(keys.len(), 3);

    let again = threshold(&["simulate", "--scenario", "three-domains", "--replay", report.to_str().unwrap()]);
    assert_eq!(code(&again), 0);
    let other = threshold(&["--seed", "99", "simulate", "--scenario", "three-domains", "--replay", report.to_str().unwrap()]);
    assert_eq!(code(&other), 3);

    let o = threshold(&["simulate", "--scenario", "corrupt-dealer", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(fs::read_to_string(&report).unwrap().contains("DealerFaulty"));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let o = threshold(&["--backend", "toy", "bench", "--t", "2", "--n", "4,6", "--repetitions", "2", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,n,round1_ms,round2_ms,sign_ms"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("2,4,"));
}

#[test]
fn avss_demo_verifies() {
    let o = threshold(&["--backend", "toy", "avss-demo", "--t", "3", "--n", "5", "--secret", "5"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("Secret=5") && out.contains("Verified share: true"));
}

#[test]
fn largest_table_row_completes() {
    let dir = tempfile::tempdir().unwrap();
    dkg(dir.path(), "ed25519", "3", "255", "2");
    assert!(dir.path().join("share_255.hex").exists());
}
