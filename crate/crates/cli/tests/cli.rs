use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zeth(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeth"))
        .arg("--state-dir")
        .arg(dir)
        .args(["--seed", "7"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Value {
    let out = zeth(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Setup, deploy and two funded wallets.
fn fresh() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["setup", "--depth", "8"]);
    ok(dir.path(), &["deploy"]);
    ok(dir.path(), &["keygen", "--wallet", "alice"]);
    ok(dir.path(), &["keygen", "--wallet", "bob"]);
    dir
}

fn ciphertext_events(receipt: &Value) -> usize {
    receipt["events"].as_array().unwrap().iter().filter(|e| e["kind"] == "CiphertextBroadcast").count()
}

#[test]
fn deposit_emits_two_ciphertexts_and_credits_the_wallet() {
    let dir = fresh();
    let out = ok(dir.path(), &["deposit", "--wallet", "alice", "--value", "10"]);
    assert_eq!(out["receipt"]["status"]["status"], "success");
    assert_eq!(ciphertext_events(&out["receipt"]), 2);
    assert_eq!(out["balance"], 10);
    assert_eq!(ok(dir.path(), &["balance", "--wallet", "alice"])["balance"], 10);
}

#[test]
fn transfer_then_receive_credits_the_recipient() {
    let dir = fresh();
    ok(dir.path(), &["deposit", "--wallet", "alice", "--value", "10"]);
    let bob = ok(dir.path(), &["balance", "--wallet", "bob"]);
    let before = bob["balance"].as_u64().unwrap();
    let to = bob["address"].as_str().unwrap();
    let out = ok(dir.path(), &["transfer", "--wallet", "alice", "--to", to, "--value", "3"]);
    assert_eq!(out["balance"], 7);
    let got = ok(dir.path(), &["receive", "--wallet", "bob", "--expect", "3"]);
    assert_eq!(got["received_value"], 3);
    assert_eq!(got["balance"].as_u64().unwrap(), before + 3);
}

#[test]
fn registry_names_resolve_as_recipients() {
    let dir = fresh();
    ok(dir.path(), &["register", "--wallet", "bob", "--name", "bob-shop"]);
    ok(dir.path(), &["deposit", "--wallet", "alice", "--value", "5"]);
    ok(dir.path(), &["transfer", "--wallet", "alice", "--to", "bob-shop", "--value", "5"]);
    assert_eq!(ok(dir.path(), &["receive", "--wallet", "bob"])["balance"], 5);
}

#[test]
fn withdraw_and_split_move_value() {
    let dir = fresh();
    ok(dir.path(), &["deposit", "--wallet", "alice", "--value", "9"]);
    let split = ok(dir.path(), &["split", "--wallet", "alice", "--part", "4", "--part", "5"]);
    assert_eq!(split["balance"], 9);
    let out = ok(dir.path(), &["withdraw", "--wallet", "alice", "--value", "4"]);
    assert_eq!(out["balance"], 5);
    let diag = ok(dir.path(), &["diagnostics"]);
    assert_eq!(diag["accepted_mix_calls"], 3);
}

#[test]
fn gas_reports_verification_below_two_million() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["gas", "--inputs", "2", "--outputs", "2"]);
    let total = out["verification"]["total"].as_u64().unwrap();
    assert_eq!(total, 1_826_500);
    assert_eq!(out["below_two_million"], true);
    let istanbul = ok(dir.path(), &["gas", "--preset", "istanbul"]);
    assert!(istanbul["verification"]["total"].as_u64().unwrap() < total);

    let table = zeth(dir.path(), &["gas", "--format", "table"]);
    assert!(String::from_utf8(table.stdout).unwrap().contains("1826500"));

    let sched = dir.path().join("sched.json");
    std::fs::write(&sched, r#"{"ecmul_gas": 0}"#).unwrap();
    let custom = ok(dir.path(), &["gas", "--schedule", sched.to_str().unwrap()]);
    assert_eq!(custom["verification"]["total"], 1_826_500 - 9 * 40_000);
}

#[test]
fn same_state_arguments_and_seed_give_identical_output() {
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let dir = fresh();
            ok(dir.path(), &["deposit", "--wallet", "alice", "--value", "10"]);
            let bob = ok(dir.path(), &["balance", "--wallet", "bob"])["address"].as_str().unwrap().to_owned();
            let out = zeth(dir.path(), &["transfer", "--wallet", "alice", "--to", &bob, "--value", "3"]);
            let mut bytes = out.stdout;
            bytes.extend(std::fs::read(dir.path().join("chain.json")).unwrap());
            bytes.extend(std::fs::read(dir.path().join("events.jsonl")).unwrap());
            bytes
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn secrets_stay_off_stdout_unless_requested() {
    let dir = fresh();
    let wallet: Value = serde_json::from_slice(&std::fs::read(dir.path().join("wallets/alice.json")).unwrap()).unwrap();
    let a_sk = wallet["wallet"]["addresses"][0]["a_sk"].as_str().unwrap().to_owned();
    let k_sk = wallet["wallet"]["addresses"][0]["k_sk"].as_str().unwrap().to_owned();

    let mut stdout = Vec::new();
    for args in [
        &["deposit", "--wallet", "alice", "--value", "6"][..],
        &["split", "--wallet", "alice", "--part", "1", "--part", "5"],
        &["receive", "--wallet", "alice"],
        &["balance", "--wallet", "alice"],
        &["diagnostics"],
    ] {
        stdout.extend(zeth(dir.path(), args).stdout);
    }
    let text = String::from_utf8(stdout).unwrap();
    assert!(!text.contains(&a_sk) && !text.contains(&k_sk));
    assert!(!text.contains("\"rho\""));

    let revealed = zeth(dir.path(), &["--reveal-secrets", "balance", "--wallet", "alice"]);
    let text = String::from_utf8(revealed.stdout).unwrap();
    assert!(text.contains("\"rho\""));
}

#[test]
fn exit_codes_separate_domain_and_usage_errors() {
    let dir = fresh();
    let out = zeth(dir.path(), &["withdraw", "--wallet", "alice", "--value", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "wallet");

    let missing = zeth(dir.path(), &["balance", "--wallet", "carol"]);
    assert_eq!(missing.status.code(), Some(1));

    assert_eq!(zeth(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(zeth(dir.path(), &["deposit", "--wallet", "alice"]).status.code(), Some(2));
    assert_eq!(zeth(dir.path(), &["transfer", "--wallet", "alice", "--to", "x"]).status.code(), Some(2));
}

#[test]
fn harness_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["harness", "--game", "ik-cca", "--trials", "50"]);
    let reports = out["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r["trials"] == 50));
    let leaky = ok(dir.path(), &["harness", "--game", "ik-cca", "--trials", "50", "--scheme", "leaky-recipient"]);
    assert!(leaky["reports"][1]["advantage"].as_f64().unwrap() > 0.9);
}
