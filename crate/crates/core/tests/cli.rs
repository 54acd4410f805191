use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fermicode::io::save_state;
use fermicode::states::FermionicState;
use tempfile::TempDir;

fn fermicode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermicode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn state_file(dir: &Path) -> PathBuf {
    let path = dir.join("rho.json");
    save_state(&path, &FermionicState::diagonal(&[0.9, 0.1]).unwrap()).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn entropy_reports_bits_and_json() {
    let dir = TempDir::new().unwrap();
    let state = state_file(dir.path());
    let json = dir.path().join("entropy.json");
    let o = fermicode(&[
        "entropy",
        "--state",
        state.to_str().unwrap(),
        "--out",
        json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("S = 0.468996 bits\n"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!((report["entropy_bits"].as_f64().unwrap() - 0.4689955935892812).abs() < 1e-12);
}

#[test]
fn compress_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let state = state_file(dir.path());
    let run = |seed: &str| {
        fermicode(&[
            "compress",
            "--state",
            state.to_str().unwrap(),
            "--epsilon",
            "0.2",
            "--n",
            "4:10:2,",
            "--seed",
            seed,
        ])
    };
    // a trailing comma is not a valid range
    assert_eq!(run("1").status.code(), Some(2));

    let args = |out: &Path| {
        vec![
            "compress".to_string(),
            "--state".into(),
            state.to_str().unwrap().into(),
            "--epsilon".into(),
            "0.2".into(),
            "--n".into(),
            "10,200,8".into(),
            "--seed".into(),
            "3".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let argv = args(out);
        let o = fermicode(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# fermicode compress seed=3 epsilon=0.200000");
    assert_eq!(
        lines[1],
        "N,epsilon,M,rate,typical_mass,fidelity,delta,dense_checked"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("8,0.200000,"));
    assert!(lines[2].ends_with(",true"));
    assert!(lines[3].starts_with("10,0.200000,"));
    assert!(lines[3].ends_with(",true"));
    assert!(lines[4].starts_with("200,0.200000,"));
    assert!(lines[4].ends_with(",false"));
}

#[test]
fn converse_rows() {
    let dir = TempDir::new().unwrap();
    let state = state_file(dir.path());
    let o = fermicode(&[
        "converse",
        "--state",
        state.to_str().unwrap(),
        "--rate",
        "0.3",
        "--n",
        "2,500",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "N,R,best_mass,fidelity_bound");
    assert_eq!(lines[2], "2,0.300000,0.856414,0.733446");
    assert!(lines[3].starts_with("500,0.300000,0.000178,0.000000"));

    let above = fermicode(&[
        "converse",
        "--state",
        state.to_str().unwrap(),
        "--rate",
        "0.6",
        "--n",
        "10",
    ]);
    assert_eq!(above.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&above.stderr).contains("[RateNotBelowEntropy]"));
}

#[test]
fn parity_demo_and_selftest() {
    let o = fermicode(&["parity-demo"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("extended trace distance = 0.500000"));

    let o = fermicode(&["selftest", "--dense-cap", "6", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("all suites passed\n"));
}

#[test]
fn corrupted_state_is_named() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"modes":1,"matrix":{"dim":2,"data":[[0.5,0],[0.5,0],[0.5,0],[0.5,0]]}}"#,
    )
    .unwrap();
    let o = fermicode(&["entropy", "--state", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error [ParityViolation]"));

    let o = fermicode(&[
        "selftest",
        "--dense-cap",
        "4",
        "--state",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL state-file: ParityViolation"));

    let missing = fermicode(&["compress", "--epsilon", "0.1", "--n", "5"]);
    assert_eq!(missing.status.code(), Some(2));
}
