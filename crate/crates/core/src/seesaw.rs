//! Alternating optimization for activation searches.
//!
//! One cycle updates, in order: Alice's observables, the first state, Bob's
//! observables, the second state. Every step is an exact coordinate maximum
//! — measurement updates come from a signed spectral decomposition, state
//! updates from the top eigenvector of a symmetrized lift — so the
//! objective trace is non-decreasing. Restarts from random seeds work
//! around local maxima; they are embarrassingly parallel and deterministic
//! for a fixed master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bell::{
    bell_operator, bell_value, cglmp3_functional, chsh_operator, DichotomicObservable, Povm,
    QState,
};
use crate::error::{Error, Result};
use crate::extend::{
    conjugate_by_swap, extremal_extendible_state, extremal_symmetrized_state_with_witness,
    random_extendible_state, reduce_bell_operator, reduce_bell_operator_first,
    SymmetricExtensionWitness, Side,
};
use crate::qmat::{herm_eig, herm_svd, weighted_partial_trace, CMat, DimsSpec, Party};
use crate::tol;

pub mod povm;

/// What is being searched over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Two independent states, rho1 2-extendible on B, rho2 on A; CHSH on
    /// the pair with joint measurements.
    ChshAsymmetric,
    /// Both states constrained to swap-symmetric mixtures
    /// (rho0 + V rho0 V)/2 with rho0 2-extendible on B.
    ChshSymmetricMixture,
    /// Measurements only, on a fixed state supplied separately.
    ChshMeasurementsOnly,
    /// CHSH replaced by the three-outcome CGLMP functional; measurements
    /// are POVMs updated by the semidefinite solver.
    Cglmp3Asymmetric,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::ChshAsymmetric => "chsh-asym",
            Scenario::ChshSymmetricMixture => "chsh-sym-mix",
            Scenario::ChshMeasurementsOnly => "chsh-meas-only",
            Scenario::Cglmp3Asymmetric => "cglmp3-asym",
        }
    }
}

/// Search parameters. Defaults follow the module conventions: epsilon
/// 1e-9, 500 cycles, restart budget 500 for local dimension 2 and 2000
/// above.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub scenario: Scenario,
    /// Local dimension d: each state lives on C^d (x) C^d.
    pub local_dim: usize,
    pub max_cycles: usize,
    pub epsilon: f64,
    pub restarts: usize,
    pub master_seed: u64,
}

impl SearchConfig {
    pub fn new(scenario: Scenario, local_dim: usize) -> Self {
        Self {
            scenario,
            local_dim,
            max_cycles: 500,
            epsilon: tol::SEESAW_EPSILON,
            restarts: if local_dim <= 2 { 500 } else { 2000 },
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.local_dim < 2 {
            return Err(Error::InvalidConfig {
                reason: "local dimension must be at least 2".into(),
            });
        }
        if self.epsilon <= 0.0 {
            return Err(Error::InvalidConfig {
                reason: "convergence epsilon must be positive".into(),
            });
        }
        if self.restarts < 1 {
            return Err(Error::InvalidConfig {
                reason: "need at least one restart".into(),
            });
        }
        Ok(())
    }
}

/// How a found state's 2-setting locality is certified.
#[derive(Debug, Clone)]
pub enum StateCertificate {
    /// The state is the reduction of this extension.
    Extension(SymmetricExtensionWitness),
    /// The state is (rho0 + V rho0 V)/2 for the witness's reduced rho0.
    SymmetrizedMixture(SymmetricExtensionWitness),
}

impl StateCertificate {
    pub fn witness(&self) -> &SymmetricExtensionWitness {
        match self {
            StateCertificate::Extension(w) | StateCertificate::SymmetrizedMixture(w) => w,
        }
    }
}

/// Measurements carried by a search result.
#[derive(Debug, Clone)]
pub enum SearchMeasurements {
    Dichotomic {
        alice: [DichotomicObservable; 2],
        bob: [DichotomicObservable; 2],
    },
    Povms {
        alice: Vec<Povm>,
        bob: Vec<Povm>,
    },
}

/// Outcome of one see-saw run (or the best over many restarts).
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub scenario: Scenario,
    pub best_value: f64,
    pub rho1: QState,
    pub rho2: QState,
    pub measurements: SearchMeasurements,
    pub cert1: StateCertificate,
    pub cert2: StateCertificate,
    /// Objective after each full cycle, starting with the random
    /// initialization's value.
    pub trace: Vec<f64>,
    pub seed_used: u64,
    pub converged: bool,
}

impl SearchResult {
    /// Re-evaluates the objective from the stored states and measurements.
    pub fn recompute_value(&self) -> Result<f64> {
        let joint = self.rho1.product(&self.rho2);
        let op = match &self.measurements {
            SearchMeasurements::Dichotomic { alice, bob } => {
                chsh_operator(&alice[0], &alice[1], &bob[0], &bob[1])?
            }
            SearchMeasurements::Povms { alice, bob } => {
                bell_operator(&cglmp3_functional(), alice, bob)?
            }
        };
        bell_value(&op, &joint)
    }
}

/// Deterministic per-restart seed derivation (splitmix64 of the master
/// seed offset by the restart index).
pub fn derive_seed(master: u64, index: usize) -> u64 {
    let mut z = master.wrapping_add((index as u64 + 1).wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn product_dims(d: usize) -> DimsSpec {
    DimsSpec::new(vec![
        (d, Party::Alice),
        (d, Party::Alice),
        (d, Party::Bob),
        (d, Party::Bob),
    ])
    .expect("positive dims")
}

/// Observable maximizing tr(N F) over -I <= N <= I: +1 on the nonnegative
/// eigenspace of F, -1 on the negative one (sign of zero fixed to +1 for
/// determinism). The achieved value is the trace norm of F.
fn sign_optimal_observable(f: &CMat) -> Result<(DichotomicObservable, f64)> {
    let eig = herm_svd(f)?;
    let value: f64 = eig.values.iter().map(|v| v.abs()).sum();
    let proj = eig.reconstruct_with(|_, lam| if lam >= 0.0 { 1.0 } else { 0.0 });
    Ok((DichotomicObservable::new(proj.hermitian_part())?, value))
}

/// Optimal (N1, N2) for fixed Alice observables and joint state: the signed
/// spectral decompositions of F1, F2 built from M1 +- M2.
pub fn update_bob_observables(
    m1: &DichotomicObservable,
    m2: &DichotomicObservable,
    rho12: &QState,
) -> Result<(DichotomicObservable, DichotomicObservable, f64)> {
    if m1.dim() != rho12.dim_a() || m2.dim() != rho12.dim_a() {
        return Err(Error::DimensionMismatch {
            context: "update_bob_observables",
            expected: rho12.dim_a(),
            got: m1.dim(),
        });
    }
    let fdims = vec![rho12.dim_a(), rho12.dim_b()];
    let msum = &m1.matrix() + &m2.matrix();
    let mdiff = &m1.matrix() - &m2.matrix();
    let f1 = weighted_partial_trace(&msum, rho12.mat(), &fdims, &[0])?;
    let f2 = weighted_partial_trace(&mdiff, rho12.mat(), &fdims, &[0])?;
    let (n1, v1) = sign_optimal_observable(&f1)?;
    let (n2, v2) = sign_optimal_observable(&f2)?;
    Ok((n1, n2, v1 + v2))
}

/// Mirror update for Alice: F operators are built on the A side from
/// N1 +- N2.
pub fn update_alice_observables(
    n1: &DichotomicObservable,
    n2: &DichotomicObservable,
    rho12: &QState,
) -> Result<(DichotomicObservable, DichotomicObservable, f64)> {
    if n1.dim() != rho12.dim_b() || n2.dim() != rho12.dim_b() {
        return Err(Error::DimensionMismatch {
            context: "update_alice_observables",
            expected: rho12.dim_b(),
            got: n1.dim(),
        });
    }
    let fdims = vec![rho12.dim_a(), rho12.dim_b()];
    let nsum = &n1.matrix() + &n2.matrix();
    let ndiff = &n1.matrix() - &n2.matrix();
    let f1 = weighted_partial_trace(&nsum, rho12.mat(), &fdims, &[1])?;
    let f2 = weighted_partial_trace(&ndiff, rho12.mat(), &fdims, &[1])?;
    let (m1, v1) = sign_optimal_observable(&f1)?;
    let (m2, v2) = sign_optimal_observable(&f2)?;
    Ok((m1, m2, v1 + v2))
}

/// Which state slot a state update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSlot {
    Rho1,
    Rho2,
}

/// Replaces one state with the extendible maximizer of the current Bell
/// operator, the other state held fixed. Slot 1 states are extendible on
/// the B side, slot 2 on the A side; the returned value is the new global
/// objective.
pub fn update_state(
    which: StateSlot,
    alice: &[DichotomicObservable; 2],
    bob: &[DichotomicObservable; 2],
    other: &QState,
) -> Result<(f64, QState, SymmetricExtensionWitness)> {
    let (value, rho, witness, _) = update_state_inner(which, alice, bob, other, false)?;
    Ok((value, rho, witness))
}

fn update_state_inner(
    which: StateSlot,
    alice: &[DichotomicObservable; 2],
    bob: &[DichotomicObservable; 2],
    other: &QState,
    symmetrized_mixture: bool,
) -> Result<(f64, QState, SymmetricExtensionWitness, bool)> {
    let b_op = chsh_operator(&alice[0], &alice[1], &bob[0], &bob[1])?;
    let (oa, ob) = (other.dim_a(), other.dim_b());
    if alice[0].dim() % oa != 0 || bob[0].dim() % ob != 0 {
        return Err(Error::DimensionMismatch {
            context: "update_state",
            expected: oa,
            got: alice[0].dim(),
        });
    }
    let (na, nb) = (alice[0].dim() / oa, bob[0].dim() / ob);
    let (eff, side) = match which {
        StateSlot::Rho2 => {
            let dims = DimsSpec::new(vec![
                (oa, Party::Alice),
                (na, Party::Alice),
                (ob, Party::Bob),
                (nb, Party::Bob),
            ])?;
            (reduce_bell_operator(&b_op, &dims, other)?, Side::A)
        }
        StateSlot::Rho1 => {
            let dims = DimsSpec::new(vec![
                (na, Party::Alice),
                (oa, Party::Alice),
                (nb, Party::Bob),
                (ob, Party::Bob),
            ])?;
            (reduce_bell_operator_first(&b_op, &dims, other)?, Side::B)
        }
    };
    // numerical symmetrization: eff is Hermitian up to rounding
    let eff = eff.hermitian_part();
    if symmetrized_mixture {
        if na != nb {
            return Err(Error::DimensionMismatch {
                context: "symmetrized mixture update",
                expected: na,
                got: nb,
            });
        }
        let (value, rho, witness) = extremal_symmetrized_state_with_witness(&eff, na)?;
        Ok((value, rho, witness, true))
    } else {
        let state_dims = DimsSpec::bipartite(na, nb);
        let (value, rho, witness) = extremal_extendible_state(&eff, &state_dims, side)?;
        Ok((value, rho, witness, false))
    }
}

fn random_chsh_measurements(
    d2: usize,
    rng: &mut ChaCha8Rng,
) -> ([DichotomicObservable; 2], [DichotomicObservable; 2]) {
    (
        [
            DichotomicObservable::random(d2, rng),
            DichotomicObservable::random(d2, rng),
        ],
        [
            DichotomicObservable::random(d2, rng),
            DichotomicObservable::random(d2, rng),
        ],
    )
}

fn init_state(
    scenario: Scenario,
    d: usize,
    slot: StateSlot,
    rng: &mut ChaCha8Rng,
) -> Result<(QState, StateCertificate)> {
    let dims = DimsSpec::bipartite(d, d);
    match scenario {
        Scenario::ChshSymmetricMixture => {
            let (rho0, w) = random_extendible_state(&dims, Side::B, rng)?;
            let mixed = (rho0.mat() + &conjugate_by_swap(rho0.mat(), d)).scale_re(0.5);
            Ok((
                QState::new(mixed, dims)?,
                StateCertificate::SymmetrizedMixture(w),
            ))
        }
        _ => {
            let side = match slot {
                StateSlot::Rho1 => Side::B,
                StateSlot::Rho2 => Side::A,
            };
            let (rho, w) = random_extendible_state(&dims, side, rng)?;
            Ok((rho, StateCertificate::Extension(w)))
        }
    }
}

/// Stop reasons for a single run.
enum StopReason {
    Converged,
    Plateau,
    Budget,
}

fn run_chsh_cycle(config: &SearchConfig, seed: u64) -> Result<SearchResult> {
    let d = config.local_dim;
    let symmetric = config.scenario == Scenario::ChshSymmetricMixture;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (mut rho1, mut cert1) = init_state(config.scenario, d, StateSlot::Rho1, &mut rng)?;
    let (mut rho2, mut cert2) = init_state(config.scenario, d, StateSlot::Rho2, &mut rng)?;
    let (mut alice, mut bob) = random_chsh_measurements(d * d, &mut rng);

    let initial = bell_value(
        &chsh_operator(&alice[0], &alice[1], &bob[0], &bob[1])?,
        &rho1.product(&rho2),
    )?;
    let mut trace = vec![initial];
    let mut stop = StopReason::Budget;

    for _ in 0..config.max_cycles {
        let joint = rho1.product(&rho2);
        let (m1, m2, _) = update_alice_observables(&bob[0], &bob[1], &joint)?;
        alice = [m1, m2];

        let (_, new1, w1, _) = update_state_inner(StateSlot::Rho1, &alice, &bob, &rho2, symmetric)?;
        rho1 = new1;
        cert1 = if symmetric {
            StateCertificate::SymmetrizedMixture(w1)
        } else {
            StateCertificate::Extension(w1)
        };

        let joint = rho1.product(&rho2);
        let (n1, n2, _) = update_bob_observables(&alice[0], &alice[1], &joint)?;
        bob = [n1, n2];

        let (value, new2, w2, _) =
            update_state_inner(StateSlot::Rho2, &alice, &bob, &rho1, symmetric)?;
        rho2 = new2;
        cert2 = if symmetric {
            StateCertificate::SymmetrizedMixture(w2)
        } else {
            StateCertificate::Extension(w2)
        };

        trace.push(value);
        let n = trace.len();
        if (trace[n - 1] - trace[n - 2]).abs() < config.epsilon {
            stop = StopReason::Converged;
            break;
        }
        if n > tol::PLATEAU_WINDOW
            && trace[n - 1] - trace[n - 1 - tol::PLATEAU_WINDOW] < tol::PLATEAU_IMPROVEMENT
        {
            stop = StopReason::Plateau;
            break;
        }
    }

    Ok(SearchResult {
        scenario: config.scenario,
        best_value: *trace.last().expect("trace never empty"),
        rho1,
        rho2,
        measurements: SearchMeasurements::Dichotomic { alice, bob },
        cert1,
        cert2,
        trace,
        seed_used: seed,
        converged: matches!(stop, StopReason::Converged),
    })
}

fn run_cglmp3_cycle(config: &SearchConfig, seed: u64) -> Result<SearchResult> {
    let d = config.local_dim;
    let d2 = d * d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let functional = cglmp3_functional();

    let (mut rho1, mut cert1) = init_state(config.scenario, d, StateSlot::Rho1, &mut rng)?;
    let (mut rho2, mut cert2) = init_state(config.scenario, d, StateSlot::Rho2, &mut rng)?;
    let mut alice: Vec<Povm> = (0..2).map(|_| povm::random_povm(d2, 3, &mut rng)).collect();
    let mut bob: Vec<Povm> = (0..2).map(|_| povm::random_povm(d2, 3, &mut rng)).collect();

    let dims = product_dims(d);

    let value_of = |alice: &[Povm], bob: &[Povm], rho1: &QState, rho2: &QState| -> Result<f64> {
        bell_value(&bell_operator(&functional, alice, bob)?, &rho1.product(rho2))
    };
    let mut trace = vec![value_of(&alice, &bob, &rho1, &rho2)?];
    let mut stop = StopReason::Budget;

    for _ in 0..config.max_cycles {
        // Alice POVMs: conditional operators of Bob's elements, combined
        // with the functional coefficients per Alice setting/outcome
        let joint = rho1.product(&rho2);
        alice = update_party_povms(&functional, &alice, &bob, &joint, Party::Alice)?;

        let b_op = bell_operator(&functional, &alice, &bob)?;
        let eff = reduce_bell_operator_first(&b_op, &dims, &rho2)?.hermitian_part();
        let sdims = DimsSpec::bipartite(d, d);
        let (_, new1, w1) = extremal_extendible_state(&eff, &sdims, Side::B)?;
        rho1 = new1;
        cert1 = StateCertificate::Extension(w1);

        let joint = rho1.product(&rho2);
        bob = update_party_povms(&functional, &alice, &bob, &joint, Party::Bob)?;

        let b_op = bell_operator(&functional, &alice, &bob)?;
        let eff = reduce_bell_operator(&b_op, &dims, &rho1)?.hermitian_part();
        let (value, new2, w2) = extremal_extendible_state(&eff, &sdims, Side::A)?;
        rho2 = new2;
        cert2 = StateCertificate::Extension(w2);

        trace.push(value);
        let n = trace.len();
        if (trace[n - 1] - trace[n - 2]).abs() < config.epsilon {
            stop = StopReason::Converged;
            break;
        }
        if n > tol::PLATEAU_WINDOW
            && trace[n - 1] - trace[n - 1 - tol::PLATEAU_WINDOW] < tol::PLATEAU_IMPROVEMENT
        {
            stop = StopReason::Plateau;
            break;
        }
    }

    Ok(SearchResult {
        scenario: config.scenario,
        best_value: *trace.last().expect("trace never empty"),
        rho1,
        rho2,
        measurements: SearchMeasurements::Povms { alice, bob },
        cert1,
        cert2,
        trace,
        seed_used: seed,
        converged: matches!(stop, StopReason::Converged),
    })
}

/// One party's POVM update: build the effective operator for every
/// (setting, outcome) pair and hand each setting to the semidefinite
/// solver. The conditional operators contract the joint state against the
/// other party's factors, whichever slots those occupy.
fn update_party_povms(
    functional: &crate::bell::BellFunctional,
    alice: &[Povm],
    bob: &[Povm],
    joint: &QState,
    party: Party,
) -> Result<Vec<Povm>> {
    let (own, other, own_settings, own_outcomes) = match party {
        Party::Alice => (alice, bob, functional.settings_a, functional.outcomes_a),
        Party::Bob => (bob, alice, functional.settings_b, functional.outcomes_b),
    };
    let fdims = joint.dims().factor_dims();
    let positions = joint.dims().party_positions(match party {
        Party::Alice => Party::Bob,
        Party::Bob => Party::Alice,
    });
    // conditional operators on own side: one per other-party element
    let mut cond = Vec::new();
    for p in other {
        let mut per_setting = Vec::new();
        for e in p.elements() {
            per_setting.push(weighted_partial_trace(e, joint.mat(), &fdims, &positions)?);
        }
        cond.push(per_setting);
    }
    let own_dim = own[0].dim();
    let mut out = Vec::with_capacity(own_settings);
    for s in 0..own_settings {
        let mut fs = vec![CMat::zeros(own_dim, own_dim); own_outcomes];
        for (o_set, per) in cond.iter().enumerate() {
            for (o_out, g) in per.iter().enumerate() {
                for (own_out, f) in fs.iter_mut().enumerate() {
                    let c = match party {
                        Party::Alice => functional.coeff(own_out, o_out, s, o_set),
                        Party::Bob => functional.coeff(o_out, own_out, o_set, s),
                    };
                    if c != 0.0 {
                        *f = &*f + &g.scale_re(c);
                    }
                }
            }
        }
        let fs: Vec<CMat> = fs.into_iter().map(|f| f.hermitian_part()).collect();
        let sol = povm::update_povms(&fs, Some(&own[s]))?;
        out.push(sol.povm);
    }
    Ok(out)
}

/// One full see-saw run from a single seed.
pub fn seesaw_cycle(config: &SearchConfig, seed: u64) -> Result<SearchResult> {
    config.validate()?;
    match config.scenario {
        Scenario::ChshAsymmetric | Scenario::ChshSymmetricMixture => run_chsh_cycle(config, seed),
        Scenario::Cglmp3Asymmetric => run_cglmp3_cycle(config, seed),
        Scenario::ChshMeasurementsOnly => Err(Error::InvalidConfig {
            reason: "measurements-only runs need a fixed state; use measurements_only_search"
                .into(),
        }),
    }
}

/// Best result over independently seeded restarts, run in parallel.
/// The aggregation picks the highest value, breaking ties by restart
/// index, so the outcome is independent of scheduling.
pub fn multi_restart_search(config: &SearchConfig) -> Result<SearchResult> {
    multi_restart_search_with(config, |_, _| {})
}

/// Like [`multi_restart_search`], invoking `on_restart(index, value)` as
/// each restart completes (from worker threads).
pub fn multi_restart_search_with(
    config: &SearchConfig,
    on_restart: impl Fn(usize, f64) + Sync,
) -> Result<SearchResult> {
    config.validate()?;
    let runs: Vec<(usize, Result<SearchResult>)> = (0..config.restarts)
        .into_par_iter()
        .map(|i| {
            let r = seesaw_cycle(config, derive_seed(config.master_seed, i));
            if let Ok(ref res) = r {
                on_restart(i, res.best_value);
            }
            (i, r)
        })
        .collect();
    let mut best: Option<(usize, SearchResult)> = None;
    for (i, r) in runs {
        let r = r?;
        let better = match &best {
            None => true,
            Some((bi, b)) => {
                r.best_value > b.best_value || (r.best_value == b.best_value && i < *bi)
            }
        };
        if better {
            best = Some((i, r));
        }
    }
    Ok(best.expect("restarts >= 1").1)
}

/// Result of the fixed-state measurement search.
#[derive(Debug, Clone)]
pub struct MeasurementsOnlyResult {
    pub value: f64,
    /// Balanced observables (+1/-1 eigenvalues in equal number, one zero
    /// for odd dimensions) achieving `value`.
    pub alice: [CMat; 2],
    pub bob: [CMat; 2],
    pub trace: Vec<f64>,
    pub seed_used: u64,
}

/// Best observable in the balanced class for a given contraction F:
/// +1 on the top floor(d/2) eigenvectors, -1 on the bottom floor(d/2),
/// zero in the middle for odd d.
fn balanced_sign_observable(f: &CMat) -> Result<(CMat, f64)> {
    let eig = herm_eig(f)?;
    let d = f.rows();
    let k = d / 2;
    let obs = eig.reconstruct_with(|j, _| {
        if j < k {
            1.0
        } else if j >= d - k {
            -1.0
        } else {
            0.0
        }
    });
    let value: f64 = (0..k)
        .map(|j| eig.values[j] - eig.values[d - 1 - j])
        .sum();
    Ok((obs.hermitian_part(), value))
}

fn measurements_only_cycle(rho: &QState, max_cycles: usize, epsilon: f64, seed: u64) -> Result<(f64, [CMat; 2], [CMat; 2], Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let fdims = vec![da, db];
    let random_balanced = |d: usize, rng: &mut ChaCha8Rng| -> Result<CMat> {
        let g = crate::qmat::ginibre(d, d, rng).hermitian_part();
        Ok(balanced_sign_observable(&g)?.0)
    };
    let mut alice = [random_balanced(da, &mut rng)?, random_balanced(da, &mut rng)?];
    let mut bob = [random_balanced(db, &mut rng)?, random_balanced(db, &mut rng)?];

    let eval = |alice: &[CMat; 2], bob: &[CMat; 2]| -> Result<f64> {
        let op = crate::bell::chsh_operator_raw(&alice[0], &alice[1], &bob[0], &bob[1]);
        bell_value(&op, rho)
    };
    let mut trace = vec![eval(&alice, &bob)?];

    for _ in 0..max_cycles {
        // Alice update from N1 +- N2
        let nsum = &bob[0] + &bob[1];
        let ndiff = &bob[0] - &bob[1];
        let fa1 = weighted_partial_trace(&nsum, rho.mat(), &fdims, &[1])?.hermitian_part();
        let fa2 = weighted_partial_trace(&ndiff, rho.mat(), &fdims, &[1])?.hermitian_part();
        alice = [
            balanced_sign_observable(&fa1)?.0,
            balanced_sign_observable(&fa2)?.0,
        ];
        // Bob update from M1 +- M2
        let msum = &alice[0] + &alice[1];
        let mdiff = &alice[0] - &alice[1];
        let fb1 = weighted_partial_trace(&msum, rho.mat(), &fdims, &[0])?.hermitian_part();
        let fb2 = weighted_partial_trace(&mdiff, rho.mat(), &fdims, &[0])?.hermitian_part();
        let (n1, v1) = balanced_sign_observable(&fb1)?;
        let (n2, v2) = balanced_sign_observable(&fb2)?;
        bob = [n1, n2];

        trace.push(v1 + v2);
        let n = trace.len();
        if (trace[n - 1] - trace[n - 2]).abs() < epsilon {
            break;
        }
        if n > tol::PLATEAU_WINDOW
            && trace[n - 1] - trace[n - 1 - tol::PLATEAU_WINDOW] < tol::PLATEAU_IMPROVEMENT
        {
            break;
        }
    }
    let value = *trace.last().expect("non-empty");
    Ok((value, alice, bob, trace))
}

/// See-saw over two-setting measurements with the state fixed, restricted
/// to balanced observables (equally many +1 and -1 eigenvalues). The
/// result is a lower bound on the state's CHSH maximum; for two-qubit
/// states it converges to the exact Horodecki value given enough restarts.
pub fn measurements_only_search(
    rho: &QState,
    restarts: usize,
    master_seed: u64,
) -> Result<MeasurementsOnlyResult> {
    measurements_only_search_with(rho, restarts, master_seed, |_, _| {})
}

/// [`measurements_only_search`] with a per-restart completion callback,
/// invoked from worker threads with the restart index and its value.
pub fn measurements_only_search_with(
    rho: &QState,
    restarts: usize,
    master_seed: u64,
    on_restart: impl Fn(usize, f64) + Sync,
) -> Result<MeasurementsOnlyResult> {
    if restarts < 1 {
        return Err(Error::InvalidConfig {
            reason: "need at least one restart".into(),
        });
    }
    let runs: Vec<(usize, Result<(f64, [CMat; 2], [CMat; 2], Vec<f64>)>)> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let run =
                measurements_only_cycle(rho, 500, tol::SEESAW_EPSILON, derive_seed(master_seed, i));
            if let Ok((value, ..)) = &run {
                on_restart(i, *value);
            }
            (i, run)
        })
        .collect();
    let mut best: Option<(usize, MeasurementsOnlyResult)> = None;
    for (i, r) in runs {
        let (value, alice, bob, trace) = r?;
        let candidate = MeasurementsOnlyResult {
            value,
            alice,
            bob,
            trace,
            seed_used: derive_seed(master_seed, i),
        };
        let better = match &best {
            None => true,
            Some((bi, b)) => value > b.value || (value == b.value && i < *bi),
        };
        if better {
            best = Some((i, candidate));
        }
    }
    Ok(best.expect("restarts >= 1").1)
}

/// Convenience wrapper returning just the value of
/// [`measurements_only_search`].
pub fn measurements_only_max(rho: &QState, restarts: usize, master_seed: u64) -> Result<f64> {
    Ok(measurements_only_search(rho, restarts, master_seed)?.value)
}
