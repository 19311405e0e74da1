//! Deterministic flag constructions on top of an activating pair.
//!
//! Starting from two states whose tensor product violates CHSH by 2+Δ,
//! ancilla flags buy structural properties at an exact cost in violation:
//! a symmetric pair keeping 2+Δ/2, a single self-activating state whose
//! two copies give 2+Δ/2, and the combination of both giving a symmetric
//! self-activating state at 2+Δ/4. Measurements become conditional
//! schemes: read the flags in the computational basis, then apply the
//! branch's sub-observable (or output +1 when the flags mismatch).

use crate::bell::{
    horodecki_max_chsh, pair_product_trace, two_copy_chsh_value, DichotomicObservable, QState,
};
use crate::error::{Error, Result};
use crate::extend::{certify_extension, conjugate_by_swap, SymmetricExtensionWitness};
use crate::qmat::{permute_factors, tensor, CMat, DimsSpec, Party, C_ZERO};
use crate::seesaw::{SearchMeasurements, SearchResult, StateCertificate};

/// What a measurement branch does once the flags are read.
#[derive(Debug, Clone)]
pub enum Branch {
    /// Ignore the main system and output +1.
    ConstantPlus,
    /// Measure this observable on the main factors.
    Observable(DichotomicObservable),
}

/// Flag-conditioned measurement: ancilla factors are read in the
/// computational basis and the outcome pattern selects a branch. The
/// main factor list records the per-copy split used when the observable
/// is laid out against physical systems.
#[derive(Debug, Clone)]
pub struct ConditionalScheme {
    ancilla_dims: Vec<usize>,
    main_factor_dims: Vec<usize>,
    table: Vec<Branch>,
}

impl ConditionalScheme {
    pub fn new(
        ancilla_dims: Vec<usize>,
        main_factor_dims: Vec<usize>,
        entries: Vec<(Vec<usize>, Branch)>,
    ) -> Result<Self> {
        if ancilla_dims.is_empty() || ancilla_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig {
                reason: "ancilla dimensions must be positive".into(),
            });
        }
        if main_factor_dims.is_empty() || main_factor_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig {
                reason: "main factor dimensions must be positive".into(),
            });
        }
        let patterns: usize = ancilla_dims.iter().product();
        let main_dim: usize = main_factor_dims.iter().product();
        let mut table: Vec<Option<Branch>> = vec![None; patterns];
        for (pattern, branch) in entries {
            if pattern.len() != ancilla_dims.len()
                || pattern.iter().zip(&ancilla_dims).any(|(&p, &d)| p >= d)
            {
                return Err(Error::InvalidConfig {
                    reason: format!("flag pattern {pattern:?} is out of range"),
                });
            }
            if let Branch::Observable(obs) = &branch {
                if obs.dim() != main_dim {
                    return Err(Error::DimensionMismatch {
                        context: "scheme branch observable",
                        expected: main_dim,
                        got: obs.dim(),
                    });
                }
            }
            let idx = pattern
                .iter()
                .zip(&ancilla_dims)
                .fold(0, |acc, (&p, &d)| acc * d + p);
            if table[idx].is_some() {
                return Err(Error::InvalidConfig {
                    reason: format!("flag pattern {pattern:?} assigned twice"),
                });
            }
            table[idx] = Some(branch);
        }
        if let Some(idx) = table.iter().position(Option::is_none) {
            return Err(Error::IncompleteScheme {
                pattern: decode_pattern(idx, &ancilla_dims),
            });
        }
        Ok(Self {
            ancilla_dims,
            main_factor_dims,
            table: table.into_iter().map(Option::unwrap).collect(),
        })
    }

    pub fn ancilla_dims(&self) -> &[usize] {
        &self.ancilla_dims
    }

    pub fn main_factor_dims(&self) -> &[usize] {
        &self.main_factor_dims
    }

    pub fn main_dim(&self) -> usize {
        self.main_factor_dims.iter().product()
    }

    pub fn branch(&self, pattern: &[usize]) -> Option<&Branch> {
        if pattern.len() != self.ancilla_dims.len()
            || pattern.iter().zip(&self.ancilla_dims).any(|(&p, &d)| p >= d)
        {
            return None;
        }
        let idx = pattern
            .iter()
            .zip(&self.ancilla_dims)
            .fold(0, |acc, (&p, &d)| acc * d + p);
        Some(&self.table[idx])
    }

    pub fn patterns(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let total: usize = self.ancilla_dims.iter().product();
        (0..total).map(move |i| decode_pattern(i, &self.ancilla_dims))
    }
}

fn decode_pattern(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in dims.iter().enumerate().rev() {
        out[slot] = idx % d;
        idx /= d;
    }
    out
}

/// Flattens a scheme into one observable on ancilla (x) main, block
/// diagonal over flag patterns; the constant branch contributes +I.
pub fn compile_scheme(scheme: &ConditionalScheme) -> Result<DichotomicObservable> {
    let m = scheme.main_dim();
    let k = scheme.table.len();
    let mut proj = CMat::zeros(k * m, k * m);
    for (p, branch) in scheme.table.iter().enumerate() {
        let block = match branch {
            Branch::ConstantPlus => CMat::identity(m),
            Branch::Observable(obs) => obs.proj_plus().clone(),
        };
        for i in 0..m {
            for j in 0..m {
                proj[(p * m + i, p * m + j)] = block[(i, j)];
            }
        }
    }
    DichotomicObservable::new(proj)
}

/// Compiled observable rearranged for two physical copies side by side:
/// factor order (flag_1, main_1, flag_2, main_2) instead of all flags
/// first. This is the layout joint two-copy evaluation expects. Requires
/// one ancilla per main factor.
pub fn two_copy_observable(scheme: &ConditionalScheme) -> Result<DichotomicObservable> {
    if scheme.ancilla_dims.len() != scheme.main_factor_dims.len() {
        return Err(Error::InvalidConfig {
            reason: "interleaving needs one ancilla per main factor".into(),
        });
    }
    let compiled = compile_scheme(scheme)?;
    let k = scheme.ancilla_dims.len();
    let mut dims = scheme.ancilla_dims.clone();
    dims.extend_from_slice(&scheme.main_factor_dims);
    let mut perm = Vec::with_capacity(2 * k);
    for i in 0..k {
        perm.push(i);
        perm.push(k + i);
    }
    let proj = permute_factors(compiled.proj_plus(), &dims, &perm);
    DichotomicObservable::new(proj)
}

/// How a state's CHSH-locality is certified in an [`ActivationPair`].
#[derive(Debug, Clone)]
pub enum LocalityCertificate {
    /// Two-qubit state with Horodecki CHSH maximum at most 2.
    TwoQubitHorodecki { value: f64 },
    /// The state reduces from this symmetric extension.
    Extension(SymmetricExtensionWitness),
    /// The state is the swap-symmetrization of the witness's reduction.
    SymmetrizedMixture(SymmetricExtensionWitness),
}

impl LocalityCertificate {
    /// Horodecki certificate for a two-qubit state; fails when the state
    /// already violates CHSH on its own.
    pub fn horodecki(state: &QState) -> Result<Self> {
        let value = horodecki_max_chsh(state)?;
        if value > 2.0 + 1e-8 {
            return Err(Error::InvalidConfig {
                reason: format!("state is not CHSH-local: Horodecki maximum {value}"),
            });
        }
        Ok(Self::TwoQubitHorodecki { value })
    }

    /// Checks the certificate against the state it is supposed to cover.
    pub fn validate(&self, state: &QState) -> Result<()> {
        match self {
            LocalityCertificate::TwoQubitHorodecki { value } => {
                let recomputed = horodecki_max_chsh(state)?;
                if (recomputed - value).abs() > 1e-9 || recomputed > 2.0 + 1e-8 {
                    return Err(Error::InvalidConfig {
                        reason: format!(
                            "Horodecki certificate mismatch: stored {value}, recomputed {recomputed}"
                        ),
                    });
                }
            }
            LocalityCertificate::Extension(w) => {
                let report = certify_extension(w);
                if !report.pass() {
                    return Err(Error::InvalidConfig {
                        reason: format!("extension certificate fails: {report}"),
                    });
                }
                if w.reduced().mat().max_abs_diff(state.mat()) > 1e-9 {
                    return Err(Error::InvalidConfig {
                        reason: "extension witness reduces to a different state".into(),
                    });
                }
            }
            LocalityCertificate::SymmetrizedMixture(w) => {
                let report = certify_extension(w);
                if !report.pass() {
                    return Err(Error::InvalidConfig {
                        reason: format!("extension certificate fails: {report}"),
                    });
                }
                let base = w.reduced();
                if base.dim_a() != base.dim_b() {
                    return Err(Error::DimensionMismatch {
                        context: "symmetrized mixture certificate",
                        expected: base.dim_a(),
                        got: base.dim_b(),
                    });
                }
                let sym = (base.mat() + &conjugate_by_swap(base.mat(), base.dim_a())).scale_re(0.5);
                if sym.max_abs_diff(state.mat()) > 1e-9 {
                    return Err(Error::InvalidConfig {
                        reason: "symmetrized witness does not match the state".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Two certified CHSH-local states together with joint two-copy
/// observables achieving value 2+Δ on their product.
#[derive(Debug, Clone)]
pub struct ActivationPair {
    sigma1: QState,
    sigma2: QState,
    alice: [DichotomicObservable; 2],
    bob: [DichotomicObservable; 2],
    value: f64,
    cert1: LocalityCertificate,
    cert2: LocalityCertificate,
}

impl ActivationPair {
    pub fn new(
        sigma1: QState,
        sigma2: QState,
        alice: [DichotomicObservable; 2],
        bob: [DichotomicObservable; 2],
        cert1: LocalityCertificate,
        cert2: LocalityCertificate,
    ) -> Result<Self> {
        cert1.validate(&sigma1)?;
        cert2.validate(&sigma2)?;
        let value = two_copy_chsh_value(
            [&alice[0].matrix(), &alice[1].matrix()],
            [&bob[0].matrix(), &bob[1].matrix()],
            &sigma1,
            &sigma2,
        )?;
        Ok(Self {
            sigma1,
            sigma2,
            alice,
            bob,
            value,
            cert1,
            cert2,
        })
    }

    /// Packages the best pair found by a CHSH search.
    pub fn from_search_result(r: &SearchResult) -> Result<Self> {
        let (alice, bob) = match &r.measurements {
            SearchMeasurements::Dichotomic { alice, bob } => (alice.clone(), bob.clone()),
            SearchMeasurements::Povms { .. } => {
                return Err(Error::InvalidConfig {
                    reason: "constructions take dichotomic CHSH measurements".into(),
                })
            }
        };
        let to_cert = |c: &StateCertificate| match c {
            StateCertificate::Extension(w) => LocalityCertificate::Extension(w.clone()),
            StateCertificate::SymmetrizedMixture(w) => {
                LocalityCertificate::SymmetrizedMixture(w.clone())
            }
        };
        let pair = Self::new(
            r.rho1.clone(),
            r.rho2.clone(),
            alice,
            bob,
            to_cert(&r.cert1),
            to_cert(&r.cert2),
        )?;
        if (pair.value - r.best_value).abs() > 1e-9 {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "search result value {} does not match recomputed {}",
                    r.best_value, pair.value
                ),
            });
        }
        Ok(pair)
    }

    pub fn sigma1(&self) -> &QState {
        &self.sigma1
    }

    pub fn sigma2(&self) -> &QState {
        &self.sigma2
    }

    pub fn alice(&self) -> &[DichotomicObservable; 2] {
        &self.alice
    }

    pub fn bob(&self) -> &[DichotomicObservable; 2] {
        &self.bob
    }

    /// CHSH value of sigma1 (x) sigma2 under the stored observables.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn certificates(&self) -> (&LocalityCertificate, &LocalityCertificate) {
        (&self.cert1, &self.cert2)
    }

    /// Violation margin Δ = value - 2 (may be non-positive for a pair
    /// that does not activate).
    pub fn delta(&self) -> f64 {
        self.value - 2.0
    }

    fn equal_local_dim(&self) -> Result<usize> {
        let d = self.sigma1.dim_a();
        for (got, context) in [
            (self.sigma1.dim_b(), "sigma1 Bob side"),
            (self.sigma2.dim_a(), "sigma2 Alice side"),
            (self.sigma2.dim_b(), "sigma2 Bob side"),
        ] {
            if got != d {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: d,
                    got,
                });
            }
        }
        Ok(d)
    }
}

/// Flagged state layout shared by all constructions: per party a flag
/// factor followed by the main factor.
fn flagged_dims(flag: usize, main: usize) -> DimsSpec {
    DimsSpec::new(vec![
        (flag, Party::Alice),
        (main, Party::Alice),
        (flag, Party::Bob),
        (main, Party::Bob),
    ])
    .expect("positive dims")
}

fn basis_projector(dim: usize, idx: usize) -> CMat {
    let mut p = CMat::zeros(dim, dim);
    p[(idx, idx)] = crate::qmat::C_ONE;
    p
}

/// (|fa><fa| (x) |fb><fb| (x) main) permuted into the flagged layout
/// (flag_A, main_A, flag_B, main_B).
fn flag_tagged(fa: usize, fb: usize, main: &CMat, d: usize) -> CMat {
    let flags = tensor(&basis_projector(2, fa), &basis_projector(2, fb));
    let full = tensor(&flags, main);
    permute_factors(&full, &[2, 2, d, d], &[0, 2, 1, 3])
}

/// Symmetric pair built from an activating pair: each state hides the
/// original behind one flag value and its swap behind the other, making
/// both outputs invariant under exchanging the parties' full systems.
#[derive(Debug, Clone)]
pub struct SymmetricEmbedding {
    pub rho1: QState,
    pub rho2: QState,
    pub alice_schemes: [ConditionalScheme; 2],
    pub bob_schemes: [ConditionalScheme; 2],
    /// Compiled two-copy CHSH value, equal to 2 + Δ/2.
    pub value: f64,
}

pub fn symmetric_embed(pair: &ActivationPair) -> Result<SymmetricEmbedding> {
    let d = pair.equal_local_dim()?;
    let dims = flagged_dims(2, d);
    let build = |rho: &QState| -> Result<QState> {
        let direct = flag_tagged(0, 1, rho.mat(), d);
        let swapped = flag_tagged(1, 0, &conjugate_by_swap(rho.mat(), d), d);
        QState::new((&direct + &swapped).scale_re(0.5), dims.clone())
    };
    let rho1 = build(&pair.sigma1)?;
    let rho2 = build(&pair.sigma2)?;

    // flags (0,0): the party holds Alice halves of the originals, measure
    // the Alice observable; flags (1,1): Bob halves, measure the Bob
    // observable; mixed flags output +1. Both parties use the same
    // scheme per setting, so the whole strategy is party-symmetric.
    let scheme = |setting: usize| {
        ConditionalScheme::new(
            vec![2, 2],
            vec![d, d],
            vec![
                (vec![0, 0], Branch::Observable(pair.alice[setting].clone())),
                (vec![1, 1], Branch::Observable(pair.bob[setting].clone())),
                (vec![0, 1], Branch::ConstantPlus),
                (vec![1, 0], Branch::ConstantPlus),
            ],
        )
    };
    let alice_schemes = [scheme(0)?, scheme(1)?];
    let bob_schemes = [scheme(0)?, scheme(1)?];
    let value = evaluate_construction(&rho1, &rho2, &alice_schemes, &bob_schemes)?;
    Ok(SymmetricEmbedding {
        rho1,
        rho2,
        alice_schemes,
        bob_schemes,
        value,
    })
}

/// Single state whose two copies activate: one flag value hides sigma1,
/// the other sigma2, so the cross-flag branches of two copies recover the
/// activating product.
#[derive(Debug, Clone)]
pub struct SelfActivation {
    pub sigma: QState,
    pub alice_schemes: [ConditionalScheme; 2],
    pub bob_schemes: [ConditionalScheme; 2],
    /// Compiled CHSH value of sigma (x) sigma, equal to 2 + Δ/2.
    pub two_copy_value: f64,
}

fn self_activation_core(
    sigma1: &QState,
    sigma2: &QState,
    alice: &[DichotomicObservable; 2],
    bob: &[DichotomicObservable; 2],
) -> Result<SelfActivation> {
    let d = sigma1.dim_a();
    let term1 = flag_tagged(1, 1, sigma1.mat(), d);
    let term2 = flag_tagged(0, 0, sigma2.mat(), d);
    let sigma = QState::new(
        (&term1 + &term2).scale_re(0.5),
        flagged_dims(2, d),
    )?;

    // copy order (1,0) holds sigma1 (x) sigma2 directly; (0,1) holds the
    // copies reversed, fixed by conjugating with the copy swap; equal
    // flags carry sigma1 (x) sigma1 or sigma2 (x) sigma2 and output +1
    let swap_copies =
        |o: &DichotomicObservable| DichotomicObservable::new(conjugate_by_swap(o.proj_plus(), d));
    let scheme = |obs: &DichotomicObservable| -> Result<ConditionalScheme> {
        ConditionalScheme::new(
            vec![2, 2],
            vec![d, d],
            vec![
                (vec![1, 0], Branch::Observable(obs.clone())),
                (vec![0, 1], Branch::Observable(swap_copies(obs)?)),
                (vec![1, 1], Branch::ConstantPlus),
                (vec![0, 0], Branch::ConstantPlus),
            ],
        )
    };
    let alice_schemes = [scheme(&alice[0])?, scheme(&alice[1])?];
    let bob_schemes = [scheme(&bob[0])?, scheme(&bob[1])?];
    let two_copy_value = evaluate_construction(&sigma, &sigma, &alice_schemes, &bob_schemes)?;
    Ok(SelfActivation {
        sigma,
        alice_schemes,
        bob_schemes,
        two_copy_value,
    })
}

pub fn self_activation_state(pair: &ActivationPair) -> Result<SelfActivation> {
    pair.equal_local_dim()?;
    self_activation_core(&pair.sigma1, &pair.sigma2, &pair.alice, &pair.bob)
}

/// Self-activation applied to the symmetric embedding: a single
/// swap-symmetric state whose two copies violate CHSH by 2 + Δ/4.
#[derive(Debug, Clone)]
pub struct CombinedConstruction {
    pub sigma: QState,
    pub alice_schemes: [ConditionalScheme; 2],
    pub bob_schemes: [ConditionalScheme; 2],
    /// Compiled CHSH value of sigma (x) sigma, equal to 2 + Δ/4.
    pub two_copy_value: f64,
}

pub fn combined_construction(pair: &ActivationPair) -> Result<CombinedConstruction> {
    let emb = symmetric_embed(pair)?;
    let alice = [
        two_copy_observable(&emb.alice_schemes[0])?,
        two_copy_observable(&emb.alice_schemes[1])?,
    ];
    let bob = [
        two_copy_observable(&emb.bob_schemes[0])?,
        two_copy_observable(&emb.bob_schemes[1])?,
    ];
    let inner = self_activation_core(&emb.rho1, &emb.rho2, &alice, &bob)?;
    Ok(CombinedConstruction {
        sigma: inner.sigma,
        alice_schemes: inner.alice_schemes,
        bob_schemes: inner.bob_schemes,
        two_copy_value: inner.two_copy_value,
    })
}

/// CHSH value of rho1 (x) rho2 under the compiled schemes, with each
/// party's observable laid out over (flag_1, main_1, flag_2, main_2).
pub fn evaluate_construction(
    rho1: &QState,
    rho2: &QState,
    alice_schemes: &[ConditionalScheme; 2],
    bob_schemes: &[ConditionalScheme; 2],
) -> Result<f64> {
    let a1 = two_copy_observable(&alice_schemes[0])?;
    let a2 = two_copy_observable(&alice_schemes[1])?;
    let b1 = two_copy_observable(&bob_schemes[0])?;
    let b2 = two_copy_observable(&bob_schemes[1])?;
    two_copy_chsh_value(
        [&a1.matrix(), &a2.matrix()],
        [&b1.matrix(), &b2.matrix()],
        rho1,
        rho2,
    )
}

/// One flag branch of a two-copy evaluation.
#[derive(Debug, Clone)]
pub struct BranchValue {
    /// Alice's flag outcomes on copies 1 and 2.
    pub flags_a: [usize; 2],
    /// Bob's flag outcomes on copies 1 and 2.
    pub flags_b: [usize; 2],
    pub weight: f64,
    /// CHSH value of the branch's normalized main-space state under the
    /// flag-projected observables.
    pub value: f64,
}

/// Flag block <pa qb| rho |pa' qb'> of a flagged state, as an operator on
/// the main factors.
fn flag_block(
    rho: &CMat,
    main_a: usize,
    flag_b: usize,
    main_b: usize,
    row: (usize, usize),
    col: (usize, usize),
) -> CMat {
    let (pa, qb) = row;
    let (pa2, qb2) = col;
    CMat::from_fn(main_a * main_b, main_a * main_b, |r, c| {
        let (ma, mb) = (r / main_b, r % main_b);
        let (ma2, mb2) = (c / main_b, c % main_b);
        rho[(
            ((pa * main_a + ma) * flag_b + qb) * main_b + mb,
            ((pa2 * main_a + ma2) * flag_b + qb2) * main_b + mb2,
        )]
    })
}

/// Block of a two-copy observable at the given flag pattern: for X over
/// (flag_1, main_1, flag_2, main_2), the sub-operator on (main_1, main_2).
fn pattern_block(x: &CMat, flag: usize, main: usize, pattern: [usize; 2]) -> CMat {
    CMat::from_fn(main * main, main * main, |r, c| {
        let (m1, m2) = (r / main, r % main);
        let (m1p, m2p) = (c / main, c % main);
        x[(
            ((pattern[0] * main + m1) * flag + pattern[1]) * main + m2,
            ((pattern[0] * main + m1p) * flag + pattern[1]) * main + m2p,
        )]
    })
}

struct FlagDecomposition {
    /// (alice flag, bob flag, weight, normalized main state)
    blocks: Vec<(usize, usize, f64, QState)>,
}

fn decompose_flagged_state(rho: &QState, flag_a: usize, flag_b: usize) -> Result<FlagDecomposition> {
    if rho.dim_a() % flag_a != 0 || rho.dim_b() % flag_b != 0 {
        return Err(Error::DimensionMismatch {
            context: "flagged state layout",
            expected: flag_a,
            got: rho.dim_a(),
        });
    }
    let main_a = rho.dim_a() / flag_a;
    let main_b = rho.dim_b() / flag_b;
    let mut overlap = 0.0f64;
    let mut blocks = Vec::new();
    for pa in 0..flag_a {
        for qb in 0..flag_b {
            for pa2 in 0..flag_a {
                for qb2 in 0..flag_b {
                    let block =
                        flag_block(rho.mat(), main_a, flag_b, main_b, (pa, qb), (pa2, qb2));
                    if (pa, qb) == (pa2, qb2) {
                        let w = block.trace().re;
                        if w > 1e-12 {
                            let state = QState::trusted(
                                block.scale_re(1.0 / w),
                                DimsSpec::bipartite(main_a, main_b),
                            );
                            blocks.push((pa, qb, w, state));
                        }
                    } else {
                        overlap = overlap.max(block.max_abs());
                    }
                }
            }
        }
    }
    if overlap > 1e-10 {
        return Err(Error::NonOrthogonalFlags { overlap });
    }
    Ok(FlagDecomposition { blocks })
}

/// Splits the two-copy CHSH value of two flagged states into flag
/// branches. Requires both states to be diagonal in their flag factors
/// (orthogonal product flags); the weighted branch values sum to the
/// total CHSH value.
pub fn branch_value_decomposition(
    rho1: &QState,
    rho2: &QState,
    flag_dims: (usize, usize),
    alice: [&CMat; 2],
    bob: [&CMat; 2],
) -> Result<Vec<BranchValue>> {
    let (flag_a, flag_b) = flag_dims;
    let dec1 = decompose_flagged_state(rho1, flag_a, flag_b)?;
    let dec2 = decompose_flagged_state(rho2, flag_a, flag_b)?;
    let main_a = rho1.dim_a() / flag_a;
    let main_b = rho1.dim_b() / flag_b;
    if rho2.dim_a() / flag_a != main_a || rho2.dim_b() / flag_b != main_b {
        return Err(Error::DimensionMismatch {
            context: "branch decomposition copies",
            expected: main_a,
            got: rho2.dim_a() / flag_a,
        });
    }

    let mut out = Vec::new();
    for (pa1, qb1, w1, tau1) in &dec1.blocks {
        for (pa2, qb2, w2, tau2) in &dec2.blocks {
            let flags_a = [*pa1, *pa2];
            let flags_b = [*qb1, *qb2];
            let a_eff: Vec<CMat> = alice
                .iter()
                .map(|x| pattern_block(x, flag_a, main_a, flags_a))
                .collect();
            let b_eff: Vec<CMat> = bob
                .iter()
                .map(|y| pattern_block(y, flag_b, main_b, flags_b))
                .collect();
            let mut v = C_ZERO;
            v += pair_product_trace(&a_eff[0], &b_eff[0], tau1, tau2)?;
            v += pair_product_trace(&a_eff[1], &b_eff[0], tau1, tau2)?;
            v += pair_product_trace(&a_eff[0], &b_eff[1], tau1, tau2)?;
            v -= pair_product_trace(&a_eff[1], &b_eff[1], tau1, tau2)?;
            out.push(BranchValue {
                flags_a,
                flags_b,
                weight: w1 * w2,
                value: v.re,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::werner_state;
    use crate::qmat::{herm_svd, random_density};
    use crate::seesaw::{
        measurements_only_max, multi_restart_search, Scenario, SearchConfig,
    };
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    /// One activating qubit pair shared across tests (search is the slow
    /// part; everything downstream is deterministic).
    fn activating_pair() -> &'static ActivationPair {
        static PAIR: OnceLock<ActivationPair> = OnceLock::new();
        PAIR.get_or_init(|| {
            let mut config = SearchConfig::new(Scenario::ChshAsymmetric, 2);
            config.restarts = 60;
            config.master_seed = 2024;
            let r = multi_restart_search(&config).unwrap();
            assert!(r.best_value > 2.0 + 1e-3, "search found no activation");
            ActivationPair::from_search_result(&r).unwrap()
        })
    }

    fn local_pair_with_random_observables(seed: u64) -> ActivationPair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w1 = werner_state(0.55).unwrap();
        let w2 = werner_state(0.62).unwrap();
        ActivationPair::new(
            w1.clone(),
            w2.clone(),
            [
                DichotomicObservable::random(4, &mut rng),
                DichotomicObservable::random(4, &mut rng),
            ],
            [
                DichotomicObservable::random(4, &mut rng),
                DichotomicObservable::random(4, &mut rng),
            ],
            LocalityCertificate::horodecki(&w1).unwrap(),
            LocalityCertificate::horodecki(&w2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn all_constant_scheme_compiles_to_identity() {
        let scheme = ConditionalScheme::new(
            vec![2, 2],
            vec![3],
            (0..2usize)
                .flat_map(|a| (0..2usize).map(move |b| (vec![a, b], Branch::ConstantPlus)))
                .collect(),
        )
        .unwrap();
        let o = compile_scheme(&scheme).unwrap();
        assert!(o.matrix().max_abs_diff(&CMat::identity(12)) < 1e-12);
    }

    #[test]
    fn trivial_ancilla_scheme_is_the_sub_observable() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let obs = DichotomicObservable::random(4, &mut rng);
        let scheme = ConditionalScheme::new(
            vec![1],
            vec![4],
            vec![(vec![0], Branch::Observable(obs.clone()))],
        )
        .unwrap();
        let o = compile_scheme(&scheme).unwrap();
        assert!(o.matrix().max_abs_diff(&obs.matrix()) < 1e-12);
    }

    #[test]
    fn scheme_validation_errors() {
        let missing = ConditionalScheme::new(
            vec![2],
            vec![2],
            vec![(vec![0], Branch::ConstantPlus)],
        );
        assert!(matches!(missing, Err(Error::IncompleteScheme { pattern }) if pattern == vec![1]));
        let duplicate = ConditionalScheme::new(
            vec![2],
            vec![2],
            vec![
                (vec![0], Branch::ConstantPlus),
                (vec![0], Branch::ConstantPlus),
                (vec![1], Branch::ConstantPlus),
            ],
        );
        assert!(duplicate.is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let wrong_dim = ConditionalScheme::new(
            vec![2],
            vec![3],
            vec![
                (vec![0], Branch::Observable(DichotomicObservable::random(4, &mut rng))),
                (vec![1], Branch::ConstantPlus),
            ],
        );
        assert!(matches!(wrong_dim, Err(Error::DimensionMismatch { .. })));
        let out_of_range = ConditionalScheme::new(
            vec![2],
            vec![2],
            vec![
                (vec![2], Branch::ConstantPlus),
                (vec![0], Branch::ConstantPlus),
            ],
        );
        assert!(out_of_range.is_err());
    }

    #[test]
    fn compiled_observable_squares_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let scheme = ConditionalScheme::new(
            vec![2, 2],
            vec![2, 2],
            vec![
                (vec![0, 0], Branch::Observable(DichotomicObservable::random(4, &mut rng))),
                (vec![0, 1], Branch::ConstantPlus),
                (vec![1, 0], Branch::Observable(DichotomicObservable::random(4, &mut rng))),
                (vec![1, 1], Branch::Observable(DichotomicObservable::random(4, &mut rng))),
            ],
        )
        .unwrap();
        for o in [compile_scheme(&scheme).unwrap(), two_copy_observable(&scheme).unwrap()] {
            let m = o.matrix();
            assert!(m.matmul(&m).max_abs_diff(&CMat::identity(16)) < 1e-10);
            assert!(m.max_abs_diff(&m.adjoint()) < 1e-12);
        }
    }

    #[test]
    fn exact_ratio_law_for_arbitrary_pairs() {
        // the halving identities are arithmetic, not tied to activation
        for seed in [80u64, 81, 82] {
            let pair = local_pair_with_random_observables(seed);
            let delta = pair.delta();
            let emb = symmetric_embed(&pair).unwrap();
            assert_abs_diff_eq!(emb.value, 2.0 + delta / 2.0, epsilon = 1e-9);
            let selfa = self_activation_state(&pair).unwrap();
            assert_abs_diff_eq!(selfa.two_copy_value, 2.0 + delta / 2.0, epsilon = 1e-9);
            let comb = combined_construction(&pair).unwrap();
            assert_abs_diff_eq!(comb.two_copy_value, 2.0 + delta / 4.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_pair_gives_exactly_two() {
        // observables fixed to +1 make the pair value exactly 2
        let w = werner_state(0.5).unwrap();
        let id = DichotomicObservable::always_plus(4);
        let pair = ActivationPair::new(
            w.clone(),
            w.clone(),
            [id.clone(), id.clone()],
            [id.clone(), id.clone()],
            LocalityCertificate::horodecki(&w).unwrap(),
            LocalityCertificate::horodecki(&w).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(pair.value(), 2.0, epsilon = 1e-12);
        let emb = symmetric_embed(&pair).unwrap();
        assert_abs_diff_eq!(emb.value, 2.0, epsilon = 1e-10);
        let comb = combined_construction(&pair).unwrap();
        assert_abs_diff_eq!(comb.two_copy_value, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn activating_pair_reproduces_halved_violations() {
        let pair = activating_pair();
        let delta = pair.delta();
        assert!(delta > 1e-3);
        let emb = symmetric_embed(pair).unwrap();
        assert_abs_diff_eq!(emb.value, 2.0 + delta / 2.0, epsilon = 1e-9);
        assert!(emb.value > 2.0);
        let comb = combined_construction(pair).unwrap();
        assert_abs_diff_eq!(comb.two_copy_value, 2.0 + delta / 4.0, epsilon = 1e-9);
        assert!(comb.two_copy_value > 2.0);
    }

    #[test]
    fn embedded_states_are_swap_symmetric_and_valid() {
        let pair = activating_pair();
        let emb = symmetric_embed(pair).unwrap();
        for rho in [&emb.rho1, &emb.rho2] {
            assert_eq!(rho.dim_a(), 4);
            assert_eq!(rho.dim_b(), 4);
            assert!(conjugate_by_swap(rho.mat(), 4).max_abs_diff(rho.mat()) < 1e-10);
        }
        let comb = combined_construction(pair).unwrap();
        assert_eq!(comb.sigma.dim_a(), 8);
        assert_eq!(comb.sigma.dim_b(), 8);
        assert!(conjugate_by_swap(comb.sigma.mat(), 8).max_abs_diff(comb.sigma.mat()) < 1e-10);
    }

    #[test]
    fn branch_decomposition_matches_displayed_average() {
        let pair = activating_pair();
        let delta = pair.delta();
        let emb = symmetric_embed(pair).unwrap();
        let a = [
            two_copy_observable(&emb.alice_schemes[0]).unwrap(),
            two_copy_observable(&emb.alice_schemes[1]).unwrap(),
        ];
        let b = [
            two_copy_observable(&emb.bob_schemes[0]).unwrap(),
            two_copy_observable(&emb.bob_schemes[1]).unwrap(),
        ];
        let branches = branch_value_decomposition(
            &emb.rho1,
            &emb.rho2,
            (2, 2),
            [&a[0].matrix(), &a[1].matrix()],
            [&b[0].matrix(), &b[1].matrix()],
        )
        .unwrap();
        assert_eq!(branches.len(), 4);
        let mut values: Vec<f64> = branches.iter().map(|b| b.value).collect();
        values.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for b in &branches {
            assert_abs_diff_eq!(b.weight, 0.25, epsilon = 1e-10);
            assert!(b.value.abs() <= 2.0 * std::f64::consts::SQRT_2 + 1e-9);
        }
        assert_abs_diff_eq!(values[0], 2.0 + delta, epsilon = 1e-10);
        assert_abs_diff_eq!(values[1], 2.0 + delta, epsilon = 1e-10);
        assert_abs_diff_eq!(values[2], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(values[3], 2.0, epsilon = 1e-10);
        let total: f64 = branches.iter().map(|b| b.weight * b.value).sum();
        assert_abs_diff_eq!(total, emb.value, epsilon = 1e-10);
    }

    #[test]
    fn branch_reconstruction_on_random_flagged_mixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..5 {
            // random flag-diagonal states, arbitrary (non-block) observables
            let dims = flagged_dims(2, 2);
            let build = |rng: &mut ChaCha8Rng| -> QState {
                let mut m = CMat::zeros(16, 16);
                let mut total = 0.0;
                let mut parts = Vec::new();
                for fa in 0..2 {
                    for fb in 0..2 {
                        let w: f64 = rng.random::<f64>();
                        parts.push((fa, fb, w));
                        total += w;
                    }
                }
                for (fa, fb, w) in parts {
                    let main = random_density(4, 3, rng).scale_re(w / total);
                    m = &m + &flag_tagged(fa, fb, &main, 2);
                }
                QState::new(m, dims.clone()).unwrap()
            };
            let rho1 = build(&mut rng);
            let rho2 = build(&mut rng);
            let obs: Vec<DichotomicObservable> = (0..4)
                .map(|_| DichotomicObservable::random(16, &mut rng))
                .collect();
            let total = two_copy_chsh_value(
                [&obs[0].matrix(), &obs[1].matrix()],
                [&obs[2].matrix(), &obs[3].matrix()],
                &rho1,
                &rho2,
            )
            .unwrap();
            let branches = branch_value_decomposition(
                &rho1,
                &rho2,
                (2, 2),
                [&obs[0].matrix(), &obs[1].matrix()],
                [&obs[2].matrix(), &obs[3].matrix()],
            )
            .unwrap();
            assert_eq!(branches.len(), 16);
            let sum: f64 = branches.iter().map(|b| b.weight * b.value).sum();
            assert_abs_diff_eq!(sum, total, epsilon = 1e-10);
            let weight_sum: f64 = branches.iter().map(|b| b.weight).sum();
            assert_abs_diff_eq!(weight_sum, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_branch_decomposition_is_the_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let rho1 = QState::new(random_density(4, 2, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
        let rho2 = QState::new(random_density(4, 2, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
        let obs: Vec<DichotomicObservable> = (0..4)
            .map(|_| DichotomicObservable::random(4, &mut rng))
            .collect();
        let alice = [&obs[0].matrix(), &obs[1].matrix()];
        let bob = [&obs[2].matrix(), &obs[3].matrix()];
        let total = two_copy_chsh_value(
            [alice[0], alice[1]],
            [bob[0], bob[1]],
            &rho1,
            &rho2,
        )
        .unwrap();
        let branches =
            branch_value_decomposition(&rho1, &rho2, (1, 1), [alice[0], alice[1]], [bob[0], bob[1]])
                .unwrap();
        assert_eq!(branches.len(), 1);
        assert_abs_diff_eq!(branches[0].weight, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(branches[0].value, total, epsilon = 1e-10);
    }

    #[test]
    fn coherent_flags_are_rejected() {
        // pure state with flag coherence on Alice's side
        let d = 4; // 2 flag x 2 main per party
        let mut v = vec![C_ZERO; d * d];
        // (|0>_f|0>_m + |1>_f|1>_m)/sqrt(2) on Alice, |0>_f|0>_m on Bob
        let amp = crate::qmat::C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[0] = amp; // (0,0) x (0,0)
        v[3 * 4] = amp; // (1,1) x (0,0)
        let rho = QState::from_pure(&v, flagged_dims(2, 2)).unwrap();
        let id = CMat::identity(16);
        let err = branch_value_decomposition(&rho, &rho, (2, 2), [&id, &id], [&id, &id]);
        assert!(matches!(err, Err(Error::NonOrthogonalFlags { .. })));
    }

    #[test]
    fn flag_reduction_bound_holds_per_branch() {
        let pair = activating_pair();
        let emb = symmetric_embed(pair).unwrap();
        for scheme in emb.alice_schemes.iter().chain(emb.bob_schemes.iter()) {
            let o = two_copy_observable(scheme).unwrap();
            for p1 in 0..2 {
                for p2 in 0..2 {
                    let block = pattern_block(&o.matrix(), 2, 2, [p1, p2]);
                    let top = herm_svd(&block.hermitian_part())
                        .unwrap()
                        .values
                        .first()
                        .map(|v| v.abs())
                        .unwrap_or(0.0);
                    assert!(top <= 1.0 + 1e-10, "projected block norm {top} > 1");
                }
            }
        }
    }

    #[test]
    fn self_activation_state_is_local_by_probe() {
        let pair = activating_pair();
        let selfa = self_activation_state(pair).unwrap();
        assert_eq!(selfa.sigma.dim_a(), 4);
        // two-copy flag branches each carry weight 1/4
        let a = [
            two_copy_observable(&selfa.alice_schemes[0]).unwrap(),
            two_copy_observable(&selfa.alice_schemes[1]).unwrap(),
        ];
        let b = [
            two_copy_observable(&selfa.bob_schemes[0]).unwrap(),
            two_copy_observable(&selfa.bob_schemes[1]).unwrap(),
        ];
        let branches = branch_value_decomposition(
            &selfa.sigma,
            &selfa.sigma,
            (2, 2),
            [&a[0].matrix(), &a[1].matrix()],
            [&b[0].matrix(), &b[1].matrix()],
        )
        .unwrap();
        assert_eq!(branches.len(), 4);
        for br in &branches {
            assert_abs_diff_eq!(br.weight, 0.25, epsilon = 1e-12);
        }
        // numerical probe: no single-copy CHSH violation found
        let probe = measurements_only_max(&selfa.sigma, 200, 17).unwrap();
        assert!(probe <= 2.0 + 1e-6, "locality probe found {probe}");
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let uneven = QState::new(
            random_density(6, 2, &mut rng),
            DimsSpec::bipartite(2, 3),
        )
        .unwrap();
        let square = QState::new(
            random_density(4, 2, &mut rng),
            DimsSpec::bipartite(2, 2),
        )
        .unwrap();
        // build a pair with mismatched local dims through the Extension path
        let (r1, w1) =
            crate::extend::random_extendible_state(uneven.dims(), crate::extend::Side::B, &mut rng)
                .unwrap();
        let (r2, w2) =
            crate::extend::random_extendible_state(square.dims(), crate::extend::Side::A, &mut rng)
                .unwrap();
        let pair = ActivationPair::new(
            r1,
            r2,
            [
                DichotomicObservable::always_plus(4),
                DichotomicObservable::always_plus(4),
            ],
            [
                DichotomicObservable::always_plus(6),
                DichotomicObservable::always_plus(6),
            ],
            LocalityCertificate::Extension(w1),
            LocalityCertificate::Extension(w2),
        )
        .unwrap();
        assert!(matches!(
            symmetric_embed(&pair),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            self_activation_state(&pair),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn certificates_are_validated() {
        let mut rng = ChaCha8Rng::seed_from_u64(76);
        let w = werner_state(0.5).unwrap();
        let other = QState::new(random_density(4, 2, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
        let cert = LocalityCertificate::horodecki(&w).unwrap();
        assert!(cert.validate(&w).is_ok());
        assert!(cert.validate(&other).is_err());
        // singlet violates CHSH: no Horodecki certificate
        assert!(LocalityCertificate::horodecki(&crate::bell::singlet()).is_err());
    }
}
