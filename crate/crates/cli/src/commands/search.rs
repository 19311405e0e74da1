//! `bellactiv search`: multi-restart see-saw drivers with line-per-restart
//! progress, writing a `search_result` artifact (and optionally an
//! `activation_pair` artifact for CHSH scenarios).

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use bellactiv_core::construct::ActivationPair;
use bellactiv_core::extend::certify_extension;
use bellactiv_core::seesaw::{
    measurements_only_search_with, multi_restart_search_with, Scenario, SearchConfig,
    SearchResult, StateCertificate,
};
use bellactiv_core::tol;

use crate::artifact::{
    scenario_from_name, ArtifactFile, MatrixRepr, MeasurementsRepr, Metadata, PairPayload,
    Payload, SearchPayload, StateRepr, F17,
};
use crate::config::SearchSection;
use crate::Failure;

#[derive(Debug, Clone)]
pub struct SearchFlags {
    pub scenario: Option<String>,
    pub dims: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub max_cycles: Option<usize>,
    pub epsilon: Option<f64>,
    /// Fixed-state artifact, required by (and only by) chsh-meas-only.
    pub state: Option<PathBuf>,
    pub out: PathBuf,
    /// Also write the best pair as an activation_pair artifact.
    pub pair_out: Option<PathBuf>,
    pub quiet: bool,
}

/// Flags > config file > defaults.
fn resolve(flags: &SearchFlags, file: &SearchSection) -> Result<(Scenario, SearchConfig), Failure> {
    let scenario_name = flags
        .scenario
        .clone()
        .or_else(|| file.scenario.clone())
        .unwrap_or_else(|| "chsh-asym".into());
    let scenario = scenario_from_name(&scenario_name).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown scenario {scenario_name:?} (expected chsh-asym, chsh-sym-mix, \
             chsh-meas-only or cglmp3-asym)"
        ))
    })?;
    let dims = flags.dims.or(file.dims).unwrap_or(2);
    let mut config = SearchConfig::new(scenario, dims);
    if let Some(r) = flags.restarts.or(file.restarts) {
        config.restarts = r;
    }
    if let Some(s) = flags.seed.or(file.seed) {
        config.master_seed = s;
    }
    if let Some(c) = flags.max_cycles.or(file.max_cycles) {
        config.max_cycles = c;
    }
    if let Some(e) = flags.epsilon.or(file.epsilon) {
        config.epsilon = e;
    }
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((scenario, config))
}

/// Thread-safe running maximum for progress lines.
struct RunningBest(AtomicU64);

impl RunningBest {
    fn new() -> Self {
        Self(AtomicU64::new(f64::NEG_INFINITY.to_bits()))
    }

    fn update(&self, value: f64) -> f64 {
        let mut current = self.0.load(Ordering::Relaxed);
        loop {
            if value <= f64::from_bits(current) {
                return f64::from_bits(current);
            }
            match self.0.compare_exchange_weak(
                current,
                value.to_bits(),
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => return value,
                Err(seen) => current = seen,
            }
        }
    }
}

pub fn run(flags: &SearchFlags, file: &SearchSection) -> Result<(), Failure> {
    let (scenario, config) = resolve(flags, file)?;
    match scenario {
        Scenario::ChshMeasurementsOnly => run_measurements_only(flags, &config),
        _ => run_state_search(flags, scenario, &config),
    }
}

fn run_state_search(
    flags: &SearchFlags,
    scenario: Scenario,
    config: &SearchConfig,
) -> Result<(), Failure> {
    if flags.state.is_some() {
        return Err(Failure::Usage(
            "--state only applies to the chsh-meas-only scenario".into(),
        ));
    }
    if flags.pair_out.is_some() && scenario == Scenario::Cglmp3Asymmetric {
        return Err(Failure::Usage(
            "--pair-out needs dichotomic CHSH measurements; cglmp3-asym stores POVMs".into(),
        ));
    }

    let quiet = flags.quiet;
    let total = config.restarts;
    let best_seen = RunningBest::new();
    let result = multi_restart_search_with(config, |i, value| {
        let best = best_seen.update(value);
        if !quiet {
            eprintln!("restart {i}/{total}: value {value:.9} (best {best:.9})");
        }
    })
    .map_err(Failure::from_core)?;

    print_summary(&result, config);

    let artifact = ArtifactFile::new(
        Payload::SearchResult(SearchPayload::from_result(&result)),
        search_metadata(&result, config),
    );
    artifact.save(&flags.out)?;
    println!("wrote {}", flags.out.display());

    if let Some(pair_out) = &flags.pair_out {
        let pair = ActivationPair::from_search_result(&result).map_err(Failure::from_core)?;
        let mut metadata = search_metadata(&result, config);
        metadata.values.insert("delta".into(), F17(pair.delta()));
        let pair_artifact =
            ArtifactFile::new(Payload::ActivationPair(PairPayload::from_pair(&pair)), metadata);
        pair_artifact.save(pair_out)?;
        println!("wrote {}", pair_out.display());
    }
    Ok(())
}

fn run_measurements_only(flags: &SearchFlags, config: &SearchConfig) -> Result<(), Failure> {
    let state_path = flags.state.as_ref().ok_or_else(|| {
        Failure::Usage("chsh-meas-only needs --state with a state artifact".into())
    })?;
    if flags.pair_out.is_some() {
        return Err(Failure::Usage(
            "--pair-out does not apply to chsh-meas-only (no locality certificates)".into(),
        ));
    }
    let state_artifact = ArtifactFile::load(state_path)?;
    let state = match &state_artifact.payload {
        Payload::State(repr) => repr.to_state().map_err(Failure::from_core)?,
        other => {
            return Err(Failure::Usage(format!(
                "--state expects a state artifact, {} holds {}",
                state_path.display(),
                other.kind()
            )))
        }
    };

    let quiet = flags.quiet;
    let total = config.restarts;
    let best_seen = RunningBest::new();
    let result = measurements_only_search_with(&state, config.restarts, config.master_seed, |i, value| {
        let best = best_seen.update(value);
        if !quiet {
            eprintln!("restart {i}/{total}: value {value:.9} (best {best:.9})");
        }
    })
    .map_err(Failure::from_core)?;

    let n = result.trace.len();
    let converged = n >= 2 && (result.trace[n - 1] - result.trace[n - 2]).abs() < config.epsilon;
    println!("scenario      chsh-meas-only");
    println!(
        "state         {} ({}x{})",
        state_path.display(),
        state.dim_a(),
        state.dim_b()
    );
    println!("restarts      {} (master seed {})", config.restarts, config.master_seed);
    println!(
        "best value    {:.9} (restart seed {}, {})",
        result.value,
        result.seed_used,
        if converged { "converged" } else { "stopped" }
    );
    println!(
        "violation     {}",
        if result.value > 2.0 + 1e-9 {
            format!("yes (margin {:.6e})", result.value - 2.0)
        } else {
            "no (CHSH-local for these settings)".into()
        }
    );

    let payload = SearchPayload {
        scenario: Scenario::ChshMeasurementsOnly.name().into(),
        best_value: F17(result.value),
        converged,
        seed_used: result.seed_used,
        rho1: StateRepr::from_state(&state),
        rho2: None,
        measurements: MeasurementsRepr::Observables {
            alice: result.alice.iter().map(MatrixRepr::from_cmat).collect(),
            bob: result.bob.iter().map(MatrixRepr::from_cmat).collect(),
        },
        cert1: None,
        cert2: None,
        trace: result.trace.iter().map(|&v| F17(v)).collect(),
    };
    let mut metadata = Metadata {
        scenario: Some(Scenario::ChshMeasurementsOnly.name().into()),
        seed: Some(config.master_seed),
        ..Metadata::default()
    };
    metadata.values.insert("best_value".into(), F17(result.value));
    metadata
        .tolerances
        .insert("epsilon".into(), F17(config.epsilon));
    let artifact = ArtifactFile::new(Payload::SearchResult(payload), metadata);
    artifact.save(&flags.out)?;
    println!("wrote {}", flags.out.display());
    Ok(())
}

fn print_summary(result: &SearchResult, config: &SearchConfig) {
    println!("scenario      {}", result.scenario.name());
    println!("local dims    {0}x{0} per state", config.local_dim);
    println!("restarts      {} (master seed {})", config.restarts, config.master_seed);
    println!(
        "best value    {:.9} (restart seed {}, {})",
        result.best_value,
        result.seed_used,
        if result.converged { "converged" } else { "stopped" }
    );
    println!("cycles        {}", result.trace.len().saturating_sub(1));
    println!(
        "activation    {}",
        if result.best_value > 2.0 + 1e-9 {
            format!("yes (delta {:.6e})", result.best_value - 2.0)
        } else {
            "no".into()
        }
    );
    for (label, cert) in [("rho1", &result.cert1), ("rho2", &result.cert2)] {
        let kind = match cert {
            StateCertificate::Extension(_) => "extension",
            StateCertificate::SymmetrizedMixture(_) => "symmetrized mixture",
        };
        let report = certify_extension(cert.witness());
        println!(
            "certificate   {label}: {kind} {} (max deviation {:.3e}, threshold {:.1e})",
            if report.pass() { "pass" } else { "FAIL" },
            report.max_deviation(),
            report.threshold
        );
    }
}

fn search_metadata(result: &SearchResult, config: &SearchConfig) -> Metadata {
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
    metadata
        .tolerances
        .insert("certificate".into(), F17(tol::CERTIFICATE));
    metadata
}
