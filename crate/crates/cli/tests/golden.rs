//! Keeps the example artifacts under docs/artifacts/ honest: every file
//! must parse, survive a byte-exact load/save round trip, and pass full
//! verification. Regenerate with `BLESS=1 cargo test -p bellactiv-cli
//! --test golden -- --ignored`.

mod common;

use std::fs;
use std::path::PathBuf;

use bellactiv_cli::artifact::ArtifactFile;
use bellactiv_cli::commands::verify::{verify_artifact, DEFAULT_VALUE_TOLERANCE};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/artifacts")
}

#[test]
fn golden_artifacts_parse_roundtrip_and_verify() {
    for (name, _) in common::all_artifacts() {
        let path = golden_dir().join(name);
        let text = fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));

        let artifact = ArtifactFile::from_json(&text)
            .unwrap_or_else(|e| panic!("{name} does not parse: {e}"));
        assert_eq!(artifact.format, "bellactiv-artifact", "{name}");
        assert_eq!(artifact.version, "1", "{name}");
        assert_eq!(
            format!("{}.json", artifact.payload.kind()),
            name,
            "{name} holds the wrong payload kind"
        );

        // Numbers are written with 17 significant digits, which pin down
        // every f64 bit: parse -> print must reproduce the exact file.
        let reprinted = artifact.to_json().unwrap();
        assert_eq!(text, reprinted, "{name} is not byte-stable under reload");

        let report = verify_artifact(&artifact, DEFAULT_VALUE_TOLERANCE);
        assert!(
            report.pass(),
            "{name} fails verification:\n{:?}",
            report
                .failed_checks()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
        );
    }
}

/// Rewrites the golden files from the deterministic generators.
#[test]
#[ignore]
fn bless_golden_artifacts() {
    if std::env::var_os("BLESS").is_none() {
        panic!("set BLESS=1 to rewrite the golden artifacts");
    }
    let dir = golden_dir();
    fs::create_dir_all(&dir).unwrap();
    for (name, artifact) in common::all_artifacts() {
        artifact.save(&dir.join(name)).unwrap();
        println!("wrote {}", dir.join(name).display());
    }
}
