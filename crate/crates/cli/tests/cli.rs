//! End-to-end tests against the compiled binary: exit codes, determinism,
//! and the failure messages for corrupted inputs.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bellactiv_cli::artifact::{ArtifactFile, Payload};
use tempfile::TempDir;

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellactiv"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn bellactiv")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["--no-such-flag"]);
    assert_eq!(code(&out), 2);

    let out = run_in(dir.path(), &[]);
    assert_eq!(code(&out), 2);

    let out = run_in(
        dir.path(),
        &["search", "--scenario", "chsh-backwards", "--out", "x.json"],
    );
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("scenario"));
}

#[test]
fn missing_and_malformed_files_exit_3() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["verify", "no-such-file.json"]);
    assert_eq!(code(&out), 3);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ this is not json").unwrap();
    for cmd in ["verify", "show"] {
        let out = run_in(dir.path(), &[cmd, "bad.json"]);
        assert_eq!(code(&out), 3, "{cmd} stderr: {}", stderr(&out));
    }

    // Valid JSON, wrong envelope.
    let json = common::state_artifact().to_json().unwrap();
    let foreign = json.replace("bellactiv-artifact", "some-other-format");
    fs::write(dir.path().join("foreign.json"), foreign).unwrap();
    let out = run_in(dir.path(), &["verify", "foreign.json"]);
    assert_eq!(code(&out), 3);

    // Explicitly named config files must exist.
    let out = run_in(
        dir.path(),
        &["search", "--config", "absent.toml", "--out", "x.json"],
    );
    assert_eq!(code(&out), 3);
}

#[test]
fn corrupted_state_fails_verification_naming_the_trace() {
    let dir = TempDir::new().unwrap();
    let mut artifact = common::state_artifact();
    let Payload::State(repr) = &mut artifact.payload else {
        unreachable!()
    };
    repr.matrix.entries[0][0][0].0 += 0.02;
    let path = dir.path().join("state.json");
    artifact.save(&path).unwrap();

    let out = run_in(dir.path(), &["verify", "state.json"]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("trace"),
        "expected the trace invariant to be named: {}",
        stderr(&out)
    );

    // show never recomputes invariants, so it still dumps the payload.
    let out = run_in(dir.path(), &["show", "state.json"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
}

#[test]
fn corrupted_observable_fails_verification_naming_the_projector() {
    let dir = TempDir::new().unwrap();
    let mut artifact = common::observable_artifact();
    let Payload::Observable(repr) = &mut artifact.payload else {
        unreachable!()
    };
    repr.proj_plus.entries[0][0][0].0 += 0.1;
    artifact.save(&dir.path().join("obs.json")).unwrap();

    let out = run_in(dir.path(), &["verify", "obs.json"]);
    assert_eq!(code(&out), 1);
    assert!(
        stderr(&out).contains("projector"),
        "expected the projector invariant to be named: {}",
        stderr(&out)
    );
}

#[test]
fn tampered_pair_value_fails_verification() {
    let dir = TempDir::new().unwrap();
    let mut artifact = common::pair_artifact();
    let Payload::ActivationPair(payload) = &mut artifact.payload else {
        unreachable!()
    };
    payload.value.0 += 1e-3;
    artifact.save(&dir.path().join("pair.json")).unwrap();

    let out = run_in(dir.path(), &["verify", "pair.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("value.recomputed"));
}

#[test]
fn wrong_payload_kind_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    common::state_artifact()
        .save(&dir.path().join("state.json"))
        .unwrap();
    common::pair_artifact()
        .save(&dir.path().join("pair.json"))
        .unwrap();

    // construct wants an activation pair.
    let out = run_in(
        dir.path(),
        &[
            "construct",
            "--construction",
            "symmetric-embed",
            "--in",
            "state.json",
        ],
    );
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));

    // measurements-only search wants a state.
    let out = run_in(
        dir.path(),
        &[
            "search",
            "--scenario",
            "chsh-meas-only",
            "--state",
            "pair.json",
            "--restarts",
            "1",
            "--out",
            "x.json",
        ],
    );
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn search_artifacts_are_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let args = |out: &str, seed: &str| {
        vec![
            "search".to_string(),
            "--scenario".into(),
            "chsh-asym".into(),
            "--dims".into(),
            "2".into(),
            "--restarts".into(),
            "2".into(),
            "--max-cycles".into(),
            "25".into(),
            "--seed".into(),
            seed.into(),
            "--out".into(),
            out.into(),
            "--quiet".into(),
        ]
    };
    for (file, seed) in [("a.json", "7"), ("b.json", "7"), ("c.json", "8")] {
        let argv: Vec<String> = args(file, seed);
        let argv: Vec<&str> = argv.iter().map(|s| s.as_str()).collect();
        let out = run_in(dir.path(), &argv);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    let b = fs::read(dir.path().join("b.json")).unwrap();
    let c = fs::read(dir.path().join("c.json")).unwrap();
    assert_eq!(a, b, "same seed must reproduce the identical file");
    assert_ne!(a, c, "different seeds should explore different starts");
}

#[test]
fn search_verify_show_roundtrip() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "search",
            "--scenario",
            "chsh-asym",
            "--restarts",
            "2",
            "--max-cycles",
            "40",
            "--seed",
            "11",
            "--out",
            "run.json",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    // one progress line per restart
    assert_eq!(
        stderr(&out).lines().filter(|l| l.starts_with("restart ")).count(),
        2,
        "stderr: {}",
        stderr(&out)
    );

    let out = run_in(dir.path(), &["verify", "run.json"]);
    assert_eq!(code(&out), 0, "stdout: {}\nstderr: {}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("verdict pass"));

    let out = run_in(dir.path(), &["show", "run.json"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("chsh-asym"));
}

#[test]
fn zero_cycle_search_stays_below_tsirelson() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "search",
            "--scenario",
            "chsh-asym",
            "--restarts",
            "1",
            "--max-cycles",
            "0",
            "--seed",
            "5",
            "--out",
            "seeded.json",
            "--quiet",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let artifact = ArtifactFile::load(&dir.path().join("seeded.json")).unwrap();
    let Payload::SearchResult(payload) = &artifact.payload else {
        panic!("expected a search result")
    };
    assert_eq!(payload.trace.len(), 1);
    assert!(payload.best_value.0 <= 2.0 * 2.0_f64.sqrt() + 1e-9);
}

#[test]
fn show_reports_maximally_mixed_purity() {
    let dir = TempDir::new().unwrap();
    common::maximally_mixed_artifact()
        .save(&dir.path().join("mixed.json"))
        .unwrap();
    let out = run_in(dir.path(), &["show", "mixed.json"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("purity"), "stdout: {text}");
    assert!(text.contains("0.2500"), "stdout: {text}");
}

#[test]
fn sample_artifacts_verify_cleanly() {
    let dir = TempDir::new().unwrap();
    for (name, artifact) in common::all_artifacts() {
        let path = dir.path().join(name);
        artifact.save(&path).unwrap();
        let out = run_in(dir.path(), &["verify", name]);
        assert_eq!(
            code(&out),
            0,
            "{name}: stdout: {}\nstderr: {}",
            stdout(&out),
            stderr(&out)
        );
    }
}

#[test]
fn config_file_supplies_defaults_flags_override() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("bellactiv.toml"),
        "[search]\nscenario = \"chsh-asym\"\ndims = 2\nrestarts = 1\nseed = 3\nmax-cycles = 4\n",
    )
    .unwrap();

    let out = run_in(dir.path(), &["search", "--out", "from-config.json", "--quiet"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let artifact = ArtifactFile::load(&dir.path().join("from-config.json")).unwrap();
    assert_eq!(artifact.metadata.seed, Some(3));

    let out = run_in(
        dir.path(),
        &["search", "--seed", "9", "--out", "from-flag.json", "--quiet"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let artifact = ArtifactFile::load(&dir.path().join("from-flag.json")).unwrap();
    assert_eq!(artifact.metadata.seed, Some(9));
}
