//! Deterministic sample artifacts shared by the integration suites: one
//! per payload kind, small enough to double as committed format examples.

#![allow(dead_code)] // each integration target uses a subset

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bellactiv_core::bell::{
    horodecki_max_chsh, werner_state, DichotomicObservable, Povm, QState,
};
use bellactiv_core::construct::{symmetric_embed, ActivationPair, LocalityCertificate};
use bellactiv_core::seesaw::{multi_restart_search, Scenario, SearchConfig};
use bellactiv_core::{CMat, C64};

use bellactiv_cli::artifact::{
    ArtifactFile, ConstructionPayload, Metadata, ObservableRepr, PairPayload, Payload, PovmRepr,
    SchemeRepr, SearchPayload, StateRepr, F17,
};

pub fn state_artifact() -> ArtifactFile {
    let state = werner_state(0.5).unwrap();
    let mut metadata = Metadata {
        description: Some("Werner state at visibility 0.5".into()),
        ..Metadata::default()
    };
    metadata.values.insert(
        "horodecki_max".into(),
        F17(horodecki_max_chsh(&state).unwrap()),
    );
    ArtifactFile::new(Payload::State(StateRepr::from_state(&state)), metadata)
}

pub fn observable_artifact() -> ArtifactFile {
    // sigma_x as a dichotomic observable: P_+ projects onto |+>.
    let half = C64::new(0.5, 0.0);
    let proj = CMat::from_fn(2, 2, |_, _| half);
    let obs = DichotomicObservable::new(proj).unwrap();
    ArtifactFile::new(
        Payload::Observable(ObservableRepr::from_observable(&obs)),
        Metadata {
            description: Some("Pauli X".into()),
            ..Metadata::default()
        },
    )
}

pub fn povm_artifact() -> ArtifactFile {
    // Qubit trine: three equiangular rank-1 elements summing to identity.
    let elements = (0..3)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let v = [angle.cos(), angle.sin()];
            CMat::from_fn(2, 2, |i, j| C64::new(2.0 / 3.0 * v[i] * v[j], 0.0))
        })
        .collect();
    let povm = Povm::new(elements).unwrap();
    ArtifactFile::new(
        Payload::Povm(PovmRepr::from_povm(&povm)),
        Metadata {
            description: Some("qubit trine".into()),
            ..Metadata::default()
        },
    )
}

/// A certified CHSH-local pair of Werner states with seeded random
/// two-copy observables. Not activating; exercises the format and the
/// constructions without a search.
pub fn sample_pair() -> ActivationPair {
    let mut rng = ChaCha8Rng::seed_from_u64(2501);
    let sigma1 = werner_state(0.55).unwrap();
    let sigma2 = werner_state(0.62).unwrap();
    let cert1 = LocalityCertificate::horodecki(&sigma1).unwrap();
    let cert2 = LocalityCertificate::horodecki(&sigma2).unwrap();
    let obs = |rng: &mut ChaCha8Rng| DichotomicObservable::random(4, rng);
    ActivationPair::new(
        sigma1,
        sigma2,
        [obs(&mut rng), obs(&mut rng)],
        [obs(&mut rng), obs(&mut rng)],
        cert1,
        cert2,
    )
    .unwrap()
}

pub fn pair_artifact() -> ArtifactFile {
    let pair = sample_pair();
    let mut metadata = Metadata {
        description: Some("Werner pair with random joint observables".into()),
        ..Metadata::default()
    };
    metadata.values.insert("delta".into(), F17(pair.delta()));
    ArtifactFile::new(Payload::ActivationPair(PairPayload::from_pair(&pair)), metadata)
}

pub fn search_artifact() -> ArtifactFile {
    let mut config = SearchConfig::new(Scenario::ChshAsymmetric, 2);
    config.restarts = 2;
    config.max_cycles = 40;
    config.master_seed = 11;
    let result = multi_restart_search(&config).unwrap();
    let mut metadata = Metadata {
        scenario: Some(result.scenario.name().into()),
        seed: Some(config.master_seed),
        ..Metadata::default()
    };
    metadata
        .values
        .insert("best_value".into(), F17(result.best_value));
    metadata
        .tolerances
        .insert("epsilon".into(), F17(config.epsilon));
    ArtifactFile::new(
        Payload::SearchResult(SearchPayload::from_result(&result)),
        metadata,
    )
}

pub fn construction_artifact() -> ArtifactFile {
    let pair = sample_pair();
    let embedding = symmetric_embed(&pair).unwrap();
    let payload = ConstructionPayload {
        construction: "symmetric-embed".into(),
        states: vec![
            StateRepr::from_state(&embedding.rho1),
            StateRepr::from_state(&embedding.rho2),
        ],
        alice_schemes: embedding
            .alice_schemes
            .iter()
            .map(SchemeRepr::from_scheme)
            .collect(),
        bob_schemes: embedding
            .bob_schemes
            .iter()
            .map(SchemeRepr::from_scheme)
            .collect(),
        value: F17(embedding.value),
        input_value: F17(pair.value()),
    };
    let mut metadata = Metadata::default();
    metadata.values.insert("value".into(), F17(embedding.value));
    metadata
        .values
        .insert("input_value".into(), F17(pair.value()));
    ArtifactFile::new(Payload::Construction(payload), metadata)
}

/// Every payload kind with its golden-file name.
pub fn all_artifacts() -> Vec<(&'static str, ArtifactFile)> {
    vec![
        ("state.json", state_artifact()),
        ("observable.json", observable_artifact()),
        ("povm.json", povm_artifact()),
        ("activation_pair.json", pair_artifact()),
        ("search_result.json", search_artifact()),
        ("construction.json", construction_artifact()),
    ]
}

/// A maximally mixed two-qubit state artifact (purity exactly 1/4).
pub fn maximally_mixed_artifact() -> ArtifactFile {
    let state = QState::maximally_mixed(bellactiv_core::DimsSpec::bipartite(2, 2));
    ArtifactFile::new(
        Payload::State(StateRepr::from_state(&state)),
        Metadata::default(),
    )
}
