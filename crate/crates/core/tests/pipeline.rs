use std::fs;
use std::process::Command;

fn cmoment(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cmoment")).args(args).output().unwrap()
}

#[test]
fn random_solve_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
    assert_eq!(cmoment(&["random", &p("p.json"), "--n", "2", "--d", "2", "--atoms", "2", "--seed", "3"]).status.code(), Some(0));
    assert!(dir.path().join("p.truth.json").exists());
    assert_eq!(cmoment(&["solve", &p("p.json"), &p("m.json")]).status.code(), Some(0));
    assert!(dir.path().join("m.report").exists());
    let out = cmoment(&["verify", &p("p.json"), &p("m.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn batch_mode_solves_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
    for (i, name) in ["a.json", "b.json"].iter().enumerate() {
        let seed = i.to_string();
        assert_eq!(cmoment(&["random", &p(name), "--n", "1", "--d", "2", "--seed", &seed]).status.code(), Some(0));
    }
    assert_eq!(cmoment(&["solve", "--batch", &p("")]).status.code(), Some(0));
    for stem in ["a", "b"] {
        assert!(dir.path().join(format!("{stem}.measure.json")).exists());
        assert!(dir.path().join(format!("{stem}.measure.report")).exists());
    }
    assert!(!dir.path().join("a.truth.measure.json").exists());
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json").to_string_lossy().into_owned();
    let out = dir.path().join("out.json").to_string_lossy().into_owned();
    assert_eq!(cmoment(&["solve", &missing, &out]).status.code(), Some(1));
    assert!(fs::metadata(&out).is_err());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(cmoment(&["solve", "--frobnicate"]).status.code(), Some(1));
    assert_eq!(cmoment(&["--help"]).status.code(), Some(0));
}
