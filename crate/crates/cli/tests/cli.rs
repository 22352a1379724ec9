use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn fsmsolc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsmsolc")).args(args).env_remove("FSMSOLC_CALIBRATION").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_fixture_succeeds() {
    let o = fsmsolc(&["validate", fixture("blind_auction.fsm").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stderr.is_empty());
}

#[test]
fn validate_reports_errors_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.fsm");
    std::fs::write(&path, "contract T { state A; transition t { from A; to B; } }").unwrap();
    let o = fsmsolc(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("E_INITIAL_COUNT") && err.contains("E_UNKNOWN_STATE"), "{err}");

    let o = fsmsolc(&["validate", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schemaVersion"], 1);
    assert_eq!(v["diagnostics"][0]["nodePath"], "states");
}

#[test]
fn emit_writes_checked_output_and_leaves_input_alone() {
    let input = fixture("blind_auction.fsm");
    let before = std::fs::read(&input).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.sol");
    let o = fsmsolc(&["emit", input.to_str().unwrap(), "--plugins", "locking,counter", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sol = std::fs::read_to_string(&out).unwrap();
    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/locking+counter.sol"),
    )
    .unwrap();
    assert_eq!(sol, golden);
    assert_eq!(std::fs::read(&input).unwrap(), before);
}

#[test]
fn emit_requires_access_plugin_for_admin_tags() {
    let o = fsmsolc(&["emit", fixture("blind_auction_admin.fsm").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stderr).unwrap().contains("E_PLUGIN_REQUIRED"));
}

#[test]
fn search_exit_codes() {
    let vulnerable = fixture("blind_auction_vulnerable.fsm");
    let o = fsmsolc(&["search", vulnerable.to_str().unwrap(), "--depth", "2"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("reentrancy counterexample"));
    let o = fsmsolc(&["search", vulnerable.to_str().unwrap(), "--depth", "2", "--plugins", "locking"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("no finding"));
    let o = fsmsolc(&["search", vulnerable.to_str().unwrap(), "--depth", "9"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn simulate_exit_codes_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("s.json");
    std::fs::write(
        &sched,
        r#"[{"transition": "bid", "now": 10, "sender": "0xa1", "value": 1, "args": {"blindedBid": 0}},
            {"transition": "close", "now": 432010, "sender": "0xa1"}]"#,
    )
    .unwrap();
    let fsm = fixture("blind_auction.fsm");
    let args = ["simulate", fsm.to_str().unwrap(), "--schedule", sched.to_str().unwrap(), "--creation-time", "10"];
    let o = fsmsolc(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("final state RB"));

    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&fsmsolc(&json_args))).unwrap();
    assert_eq!(v["schemaVersion"], 1);
    assert_eq!(v["trace"]["finalState"]["currentState"], "RB");

    let early = ["simulate", fsm.to_str().unwrap(), "--schedule", sched.to_str().unwrap(), "--creation-time", "100"];
    let o = fsmsolc(&early);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("rejected R_GUARD_FALSE"));

    std::fs::write(&sched, "not json").unwrap();
    assert_eq!(code(&fsmsolc(&args)), 1);
}

#[test]
fn gas_report_formats_and_calibration_override() {
    let fsm = fixture("blind_auction.fsm");
    let o = fsmsolc(&["gas-report", fsm.to_str().unwrap(), "--plugins", "locking"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("30407"));

    let o = fsmsolc(&["gas-report", fsm.to_str().unwrap(), "--plugins", "locking,counter", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["estimate"]["perTransition"]["reveal"], 82048);
    assert_eq!(v["estimate"]["deployment"], 637518);

    let o = fsmsolc(&["gas-report", fsm.to_str().unwrap(), "--plugins", "timed"]);
    assert_eq!(code(&o), 1);

    let dir = tempfile::tempdir().unwrap();
    let cal = dir.path().join("cal.json");
    std::fs::write(&cal, "{}").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fsmsolc"))
        .args(["gas-report", fsm.to_str().unwrap()])
        .env("FSMSOLC_CALIBRATION", &cal)
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stderr).unwrap().contains("E_CALIBRATION"));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&fsmsolc(&["frobnicate"])), 64);
    assert_eq!(code(&fsmsolc(&["emit"])), 64);
    assert_eq!(code(&fsmsolc(&["--help"])), 0);
}

#[test]
fn missing_input_is_exit_1() {
    assert_eq!(code(&fsmsolc(&["validate", "/nonexistent/x.fsm"])), 1);
}
