//! Two-symmetric extensions.
//!
//! A bipartite state admits a 2-symmetric extension with respect to one of
//! its parties when there is a tripartite state, invariant under swapping
//! that party's system with a fresh copy, whose partial trace recovers the
//! original. Such states can never violate a Bell inequality with two
//! measurement settings on the extended side: an explicit local model is
//! constructed in [`lhvm_from_extension`]. The set is closed under tensor
//! products, so the same holds for any number of copies.
//!
//! Extension factor order is fixed: `(A, B, B')` for B-side extensions and
//! `(C, A', B')` for A-side, with the duplicated system's copy as the extra
//! factor (`B'` and `C` respectively).

use rand::Rng;
use std::fmt;

use crate::bell::{behavior, BehaviorTable, Povm, QState};
use crate::error::{Error, Result};
use crate::qmat::{
    herm_eig, min_eigenvalue, partial_trace, permute_factors, random_pure_state, tensor,
    weighted_partial_trace, CMat, DimsSpec, Party,
};
use crate::tol;

/// Which party's system is duplicated by the extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => write!(f, "A-side"),
            Side::B => write!(f, "B-side"),
        }
    }
}

/// Tripartite extension certifying 2-extendibility of `reduced`.
#[derive(Debug, Clone)]
pub struct SymmetricExtensionWitness {
    ext: QState,
    side: Side,
    reduced: QState,
}

impl SymmetricExtensionWitness {
    /// Checks the structural layout (factor count, party tags, dimension
    /// consistency); numerical invariants are the job of
    /// [`certify_extension`].
    pub fn new(ext: QState, side: Side, reduced: QState) -> Result<Self> {
        let f = ext.dims().factors();
        if f.len() != 3 {
            return Err(Error::InvalidConfig {
                reason: format!("extension must have 3 factors, got {}", f.len()),
            });
        }
        let (parties, dup_ok, red_dims) = match side {
            Side::A => (
                [Party::Alice, Party::Alice, Party::Bob],
                f[0].0 == f[1].0,
                (f[1].0, f[2].0),
            ),
            Side::B => (
                [Party::Alice, Party::Bob, Party::Bob],
                f[1].0 == f[2].0,
                (f[0].0, f[1].0),
            ),
        };
        if f.iter().map(|&(_, p)| p).collect::<Vec<_>>() != parties || !dup_ok {
            return Err(Error::InvalidConfig {
                reason: format!("extension factor layout does not match {side} order"),
            });
        }
        if (reduced.dim_a(), reduced.dim_b()) != red_dims {
            return Err(Error::DimensionMismatch {
                context: "extension reduced state",
                expected: red_dims.0 * red_dims.1,
                got: reduced.total_dim(),
            });
        }
        Ok(Self { ext, side, reduced })
    }

    pub fn ext(&self) -> &QState {
        &self.ext
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn reduced(&self) -> &QState {
        &self.reduced
    }

    /// Index of the duplicated-copy factor inside the extension.
    fn extra_factor(&self) -> usize {
        match self.side {
            Side::A => 0,
            Side::B => 2,
        }
    }

    /// Indices of the swapped factor pair.
    fn swap_pair(&self) -> (usize, usize) {
        match self.side {
            Side::A => (0, 1),
            Side::B => (1, 2),
        }
    }
}

/// Deviations of an extension from its defining invariants.
#[derive(Debug, Clone)]
pub struct ExtensionReport {
    pub psd_deviation: f64,
    pub trace_deviation: f64,
    pub permutation_deviation: f64,
    pub reduction_deviation: f64,
    pub threshold: f64,
}

impl ExtensionReport {
    pub fn max_deviation(&self) -> f64 {
        self.psd_deviation
            .max(self.trace_deviation)
            .max(self.permutation_deviation)
            .max(self.reduction_deviation)
    }

    pub fn pass(&self) -> bool {
        self.max_deviation() <= self.threshold
    }
}

impl fmt::Display for ExtensionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "psd {:.3e} | trace {:.3e} | permutation {:.3e} | reduction {:.3e} | threshold {:.1e} | {}",
            self.psd_deviation,
            self.trace_deviation,
            self.permutation_deviation,
            self.reduction_deviation,
            self.threshold,
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }
}

/// Joint distribution over all of Alice's setting outcomes and both of
/// Bob's: the global measure behind the local model.
#[derive(Debug, Clone)]
pub struct GlobalModel {
    settings_a: usize,
    outcomes_a: usize,
    outcomes_b: usize,
    p: Vec<f64>,
}

impl GlobalModel {
    pub fn new(settings_a: usize, outcomes_a: usize, outcomes_b: usize, p: Vec<f64>) -> Result<Self> {
        let expect = outcomes_a.pow(settings_a as u32) * outcomes_b * outcomes_b;
        if p.len() != expect {
            return Err(Error::DimensionMismatch {
                context: "GlobalModel",
                expected: expect,
                got: p.len(),
            });
        }
        if let Some(&bad) = p.iter().find(|&&v| v < -1e-12) {
            return Err(Error::InvalidConfig {
                reason: format!("negative model probability {bad:.3e}"),
            });
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidConfig {
                reason: format!("model normalization off by {:.3e}", sum - 1.0),
            });
        }
        Ok(Self {
            settings_a,
            outcomes_a,
            outcomes_b,
            p,
        })
    }

    fn index(&self, a_of: &[usize], b1: usize, b2: usize) -> usize {
        debug_assert_eq!(a_of.len(), self.settings_a);
        let mut code = 0;
        for &a in a_of {
            code = code * self.outcomes_a + a;
        }
        (code * self.outcomes_b + b1) * self.outcomes_b + b2
    }

    pub fn prob(&self, a_of: &[usize], b1: usize, b2: usize) -> f64 {
        self.p[self.index(a_of, b1, b2)]
    }

    /// Behavior obtained by marginalizing: setting x reads slot a_x,
    /// Bob's setting y in {0, 1} reads b_{y+1}.
    pub fn behavior(&self) -> Result<BehaviorTable> {
        let s = self.settings_a;
        let (da, db) = (self.outcomes_a, self.outcomes_b);
        let mut table = vec![0.0; s * 2 * da * db];
        let codes = da.pow(s as u32);
        for code in 0..codes {
            let mut a_of = vec![0usize; s];
            let mut rem = code;
            for slot in a_of.iter_mut().rev() {
                *slot = rem % da;
                rem /= da;
            }
            for b1 in 0..db {
                for b2 in 0..db {
                    let w = self.p[(code * db + b1) * db + b2];
                    if w == 0.0 {
                        continue;
                    }
                    for (x, &a) in a_of.iter().enumerate() {
                        for (y, &b) in [b1, b2].iter().enumerate() {
                            table[((x * 2 + y) * da + a) * db + b] += w;
                        }
                    }
                }
            }
        }
        BehaviorTable::new(s, 2, da, db, table)
    }
}

/// V M V for a bipartite operator on d (x) d, V the swap.
pub fn conjugate_by_swap(m: &CMat, d: usize) -> CMat {
    permute_factors(m, &[d, d], &[1, 0])
}

fn check_four_factor_layout(b_op: &CMat, dims: &DimsSpec) -> Result<()> {
    let f = dims.factors();
    if f.len() != 4
        || f.iter().map(|&(_, p)| p).collect::<Vec<_>>()
            != vec![Party::Alice, Party::Alice, Party::Bob, Party::Bob]
    {
        return Err(Error::InvalidConfig {
            reason: "Bell operator reduction expects factor layout (A, A', B, B')".into(),
        });
    }
    if b_op.rows() != dims.total_dim() || !b_op.is_square() {
        return Err(Error::DimensionMismatch {
            context: "reduce_bell_operator operator",
            expected: dims.total_dim(),
            got: b_op.rows(),
        });
    }
    Ok(())
}

/// B2 = tr_AB[(rho1 (x) I) B] for a Bell operator on factors (A, A', B, B'):
/// the effective operator seen by the second state once the first is fixed.
pub fn reduce_bell_operator(b_op: &CMat, dims: &DimsSpec, rho1: &QState) -> Result<CMat> {
    check_four_factor_layout(b_op, dims)?;
    let f = dims.factors();
    if rho1.dim_a() != f[0].0 || rho1.dim_b() != f[2].0 {
        return Err(Error::DimensionMismatch {
            context: "reduce_bell_operator state",
            expected: f[0].0 * f[2].0,
            got: rho1.total_dim(),
        });
    }
    weighted_partial_trace(rho1.mat(), b_op, &dims.factor_dims(), &[0, 2])
}

/// Mirror reduction fixing the second state: B1 = tr_{A'B'}[(I (x) rho2) B]
/// on the (A, B) factors.
pub fn reduce_bell_operator_first(b_op: &CMat, dims: &DimsSpec, rho2: &QState) -> Result<CMat> {
    check_four_factor_layout(b_op, dims)?;
    let f = dims.factors();
    if rho2.dim_a() != f[1].0 || rho2.dim_b() != f[3].0 {
        return Err(Error::DimensionMismatch {
            context: "reduce_bell_operator_first state",
            expected: f[1].0 * f[3].0,
            got: rho2.total_dim(),
        });
    }
    weighted_partial_trace(rho2.mat(), b_op, &dims.factor_dims(), &[1, 3])
}

/// Lift an operator on (A', B') to (C, A', B') and average with its
/// V_{CA'} conjugate. The top eigenvalue of the result is the maximum of
/// tr(B2 rho) over A-side 2-extendible rho.
pub fn symmetrize_operator(b2: &CMat, d_c: usize) -> Result<CMat> {
    if !b2.is_square() || b2.rows() % d_c != 0 {
        return Err(Error::DimensionMismatch {
            context: "symmetrize_operator",
            expected: d_c,
            got: b2.rows(),
        });
    }
    let d_b = b2.rows() / d_c;
    let big = tensor(&CMat::identity(d_c), b2);
    let swapped = permute_factors(&big, &[d_c, d_c, d_b], &[1, 0, 2]);
    Ok((&big + &swapped).scale_re(0.5))
}

/// Mirror of [`symmetrize_operator`] for B-side extensions: lift an
/// operator on (A, B) to (A, B, B') and average over V_{BB'}.
pub fn symmetrize_operator_b_side(b1: &CMat, d_b: usize) -> Result<CMat> {
    if !b1.is_square() || b1.rows() % d_b != 0 {
        return Err(Error::DimensionMismatch {
            context: "symmetrize_operator_b_side",
            expected: d_b,
            got: b1.rows(),
        });
    }
    let d_a = b1.rows() / d_b;
    let big = tensor(b1, &CMat::identity(d_b));
    let swapped = permute_factors(&big, &[d_a, d_b, d_b], &[0, 2, 1]);
    Ok((&big + &swapped).scale_re(0.5))
}

fn ext_dims(d_a: usize, d_b: usize, side: Side) -> DimsSpec {
    let factors = match side {
        Side::A => vec![(d_a, Party::Alice), (d_a, Party::Alice), (d_b, Party::Bob)],
        Side::B => vec![(d_a, Party::Alice), (d_b, Party::Bob), (d_b, Party::Bob)],
    };
    DimsSpec::new(factors).expect("positive dims")
}

/// Maximum of tr(b_red rho) over states 2-extendible on `side`, together
/// with the maximizer and its certifying extension.
///
/// The maximum is the top eigenvalue of the symmetrized lift; the
/// extension is the symmetrized projector onto its top eigenvector. With a
/// degenerate top eigenvalue any eigenvector gives the same value; the
/// first one returned by the solver is used.
pub fn extremal_extendible_state(
    b_red: &CMat,
    dims: &DimsSpec,
    side: Side,
) -> Result<(f64, QState, SymmetricExtensionWitness)> {
    let (d_a, d_b) = (dims.party_dim(Party::Alice), dims.party_dim(Party::Bob));
    if b_red.rows() != d_a * d_b || !b_red.is_square() {
        return Err(Error::DimensionMismatch {
            context: "extremal_extendible_state",
            expected: d_a * d_b,
            got: b_red.rows(),
        });
    }
    let sym = match side {
        Side::A => symmetrize_operator(b_red, d_a)?,
        Side::B => symmetrize_operator_b_side(b_red, d_b)?,
    };
    let eig = herm_eig(&sym)?;
    let value = eig.values[0];
    let psi = eig.vectors.column(0);

    let edims = ext_dims(d_a, d_b, side);
    let fdims = edims.factor_dims();
    let proj = CMat::outer(&psi);
    let (i, j) = match side {
        Side::A => (0usize, 1usize),
        Side::B => (1usize, 2usize),
    };
    let mut perm = vec![0, 1, 2];
    perm.swap(i, j);
    let swapped = permute_factors(&proj, &fdims, &perm);
    let ext_mat = (&proj + &swapped).scale_re(0.5);
    let extra = match side {
        Side::A => 0,
        Side::B => 2,
    };
    let keep: Vec<usize> = (0..3).filter(|&k| k != extra).collect();
    let rho_mat = partial_trace(&ext_mat, &fdims, &keep)?;
    let rho = QState::new(rho_mat, dims.clone())?;
    let ext = QState::new(ext_mat, edims)?;
    let witness = SymmetricExtensionWitness::new(ext, side, rho.clone())?;
    Ok((value, rho, witness))
}

/// Maximum of tr(M rho) over swap-symmetric mixtures
/// rho = (rho0 + V rho0 V)/2 with rho0 2-extendible on the B side.
/// Requires equal local dimensions.
pub fn extremal_symmetrized_state(m: &CMat, d: usize) -> Result<(f64, QState)> {
    let (value, rho, _) = extremal_symmetrized_state_with_witness(m, d)?;
    Ok((value, rho))
}

/// Like [`extremal_symmetrized_state`], additionally returning the B-side
/// witness for the unsymmetrized component rho0. The returned state is
/// (rho0 + V rho0 V)/2; the swapped component V rho0 V is A-side
/// extendible with the mirror-image extension.
pub fn extremal_symmetrized_state_with_witness(
    m: &CMat,
    d: usize,
) -> Result<(f64, QState, SymmetricExtensionWitness)> {
    if m.rows() != d * d || !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "extremal_symmetrized_state",
            expected: d * d,
            got: m.rows(),
        });
    }
    let m_sym = (m + &conjugate_by_swap(m, d)).scale_re(0.5);
    let dims = DimsSpec::bipartite(d, d);
    let (value, rho0, witness) = extremal_extendible_state(&m_sym, &dims, Side::B)?;
    let rho_mat = (rho0.mat() + &conjugate_by_swap(rho0.mat(), d)).scale_re(0.5);
    Ok((value, QState::new(rho_mat, dims)?, witness))
}

/// Measures how far a witness is from the defining invariants; never
/// errors — failures are entries in the report.
pub fn certify_extension(w: &SymmetricExtensionWitness) -> ExtensionReport {
    let ext = w.ext().mat();
    let fdims = w.ext().dims().factor_dims();

    let psd_deviation = match min_eigenvalue(ext) {
        Ok(min) => (-min).max(0.0),
        Err(_) => f64::INFINITY,
    };
    let trace_deviation = (ext.trace().re - 1.0).abs();

    let (i, j) = w.swap_pair();
    let mut perm = vec![0, 1, 2];
    perm.swap(i, j);
    let permutation_deviation = permute_factors(ext, &fdims, &perm).max_abs_diff(ext);

    let keep: Vec<usize> = (0..3).filter(|&k| k != w.extra_factor()).collect();
    let reduction_deviation = match partial_trace(ext, &fdims, &keep) {
        Ok(red) => red.max_abs_diff(w.reduced().mat()),
        Err(_) => f64::INFINITY,
    };

    ExtensionReport {
        psd_deviation,
        trace_deviation,
        permutation_deviation,
        reduction_deviation,
        threshold: tol::CERTIFICATE,
    }
}

/// Extension for the tensor product of two witnessed states, on the same
/// side: the composite slots are the pairwise tensor factors, reordered so
/// each role (original systems, duplicated copies) stays contiguous.
pub fn tensor_extension(
    w1: &SymmetricExtensionWitness,
    w2: &SymmetricExtensionWitness,
) -> Result<SymmetricExtensionWitness> {
    if w1.side() != w2.side() {
        return Err(Error::SideMismatch);
    }
    let side = w1.side();
    let f1 = w1.ext().dims().factor_dims();
    let f2 = w2.ext().dims().factor_dims();
    let big = tensor(w1.ext().mat(), w2.ext().mat());
    let concat = [f1[0], f1[1], f1[2], f2[0], f2[1], f2[2]];
    // (s1, t1, u1, s2, t2, u2) -> (s1 s2, t1 t2, u1 u2)
    let regrouped = permute_factors(&big, &concat, &[0, 3, 1, 4, 2, 5]);
    let edims = DimsSpec::new(vec![
        (f1[0] * f2[0], w1.ext().dims().factors()[0].1),
        (f1[1] * f2[1], w1.ext().dims().factors()[1].1),
        (f1[2] * f2[2], w1.ext().dims().factors()[2].1),
    ])?;
    let ext = QState::new(regrouped, edims)?;
    let reduced = w1.reduced().product(w2.reduced());
    SymmetricExtensionWitness::new(ext, side, reduced)
}

/// Witness for the party-swapped state: factors reversed, party labels
/// exchanged, side flipped. Lets B-side-only machinery (the explicit
/// local model) run on A-side witnesses after moving to the swapped
/// frame.
pub fn swap_parties(w: &SymmetricExtensionWitness) -> Result<SymmetricExtensionWitness> {
    let flip = |p: Party| match p {
        Party::Alice => Party::Bob,
        Party::Bob => Party::Alice,
    };
    let fdims = w.ext().dims().factor_dims();
    let ext_mat = permute_factors(w.ext().mat(), &fdims, &[2, 1, 0]);
    let ext_dims = DimsSpec::new(
        w.ext()
            .dims()
            .factors()
            .iter()
            .rev()
            .map(|&(d, p)| (d, flip(p)))
            .collect(),
    )?;
    let ext = QState::new(ext_mat, ext_dims)?;

    let (ra, rb) = (w.reduced().dim_a(), w.reduced().dim_b());
    let red_mat = permute_factors(w.reduced().mat(), &[ra, rb], &[1, 0]);
    let reduced = QState::new(red_mat, DimsSpec::bipartite(rb, ra))?;

    let side = match w.side() {
        Side::A => Side::B,
        Side::B => Side::A,
    };
    SymmetricExtensionWitness::new(ext, side, reduced)
}

/// Random rank-deficient extendible state: symmetrize a Haar-random pure
/// tripartite state. Used to seed searches and to sample the extendible
/// set in tests.
pub fn random_extendible_state(
    dims: &DimsSpec,
    side: Side,
    rng: &mut impl Rng,
) -> Result<(QState, SymmetricExtensionWitness)> {
    let (d_a, d_b) = (dims.party_dim(Party::Alice), dims.party_dim(Party::Bob));
    let edims = ext_dims(d_a, d_b, side);
    let fdims = edims.factor_dims();
    let psi = random_pure_state(edims.total_dim(), rng);
    let proj = CMat::outer(&psi);
    let (i, j) = match side {
        Side::A => (0usize, 1usize),
        Side::B => (1usize, 2usize),
    };
    let mut perm = vec![0, 1, 2];
    perm.swap(i, j);
    let ext_mat = (&proj + &permute_factors(&proj, &fdims, &perm)).scale_re(0.5);
    let extra = match side {
        Side::A => 0,
        Side::B => 2,
    };
    let keep: Vec<usize> = (0..3).filter(|&k| k != extra).collect();
    let rho = QState::new(partial_trace(&ext_mat, &fdims, &keep)?, dims.clone())?;
    let ext = QState::new(ext_mat, edims)?;
    let w = SymmetricExtensionWitness::new(ext, side, rho.clone())?;
    Ok((rho, w))
}

/// Explicit local model for a B-side extendible state under any Alice
/// measurements and two Bob measurements:
///
///   P(a_1..a_s, b_1, b_2) = p(b_1, b_2) prod_x p(a_x | x, b_1, b_2)
///
/// with both factors read off the extension (first Bob measurement on B,
/// second on B'). Zero-weight (b_1, b_2) branches get the uniform
/// conditional; their contribution is zero either way.
pub fn lhvm_from_extension(
    w: &SymmetricExtensionWitness,
    alice_povms: &[Povm],
    bob_povm_1: &Povm,
    bob_povm_2: &Povm,
) -> Result<GlobalModel> {
    if w.side() != Side::B {
        return Err(Error::SideMismatch);
    }
    let report = certify_extension(w);
    if !report.pass() {
        return Err(Error::InvalidConfig {
            reason: format!("witness fails certification: {report}"),
        });
    }
    let (d_a, d_b) = (w.reduced().dim_a(), w.reduced().dim_b());
    if alice_povms.is_empty() {
        return Err(Error::InvalidConfig {
            reason: "need at least one Alice measurement".into(),
        });
    }
    for p in alice_povms {
        if p.dim() != d_a {
            return Err(Error::DimensionMismatch {
                context: "lhvm Alice POVM",
                expected: d_a,
                got: p.dim(),
            });
        }
    }
    for p in [bob_povm_1, bob_povm_2] {
        if p.dim() != d_b {
            return Err(Error::DimensionMismatch {
                context: "lhvm Bob POVM",
                expected: d_b,
                got: p.dim(),
            });
        }
    }
    let oa = alice_povms[0].outcomes();
    if alice_povms.iter().any(|p| p.outcomes() != oa) {
        return Err(Error::InvalidPovm {
            reason: "Alice outcome counts differ across settings".into(),
        });
    }
    let ob = bob_povm_1.outcomes();
    if bob_povm_2.outcomes() != ob {
        return Err(Error::InvalidPovm {
            reason: "Bob outcome counts differ across settings".into(),
        });
    }

    let s = alice_povms.len();
    let ext = w.ext().mat();
    let id_a = CMat::identity(d_a);
    let mut joint = vec![0.0; ob * ob]; // p(b1, b2)
    let mut cond = vec![0.0; s * oa * ob * ob]; // p(a | x, b1, b2)
    for b1 in 0..ob {
        for b2 in 0..ob {
            let f12 = tensor(
                &bob_povm_1.elements()[b1],
                &bob_povm_2.elements()[b2],
            );
            let weight = tensor(&id_a, &f12).trace_product(ext).re.max(0.0);
            joint[b1 * ob + b2] = weight;
            for (x, pa) in alice_povms.iter().enumerate() {
                let mut qs = vec![0.0; oa];
                if weight > 0.0 {
                    for (a, ea) in pa.elements().iter().enumerate() {
                        let num = tensor(ea, &f12).trace_product(ext).re;
                        qs[a] = (num / weight).max(0.0);
                    }
                    let total: f64 = qs.iter().sum();
                    if total > 0.0 {
                        for q in &mut qs {
                            *q /= total;
                        }
                    } else {
                        qs = vec![1.0 / oa as f64; oa];
                    }
                } else {
                    qs = vec![1.0 / oa as f64; oa];
                }
                for (a, &q) in qs.iter().enumerate() {
                    cond[((x * oa + a) * ob + b1) * ob + b2] = q;
                }
            }
        }
    }
    // renormalize the joint against clamping residue
    let jsum: f64 = joint.iter().sum();
    for v in &mut joint {
        *v /= jsum;
    }

    let codes = oa.pow(s as u32);
    let mut p = vec![0.0; codes * ob * ob];
    for code in 0..codes {
        let mut a_of = vec![0usize; s];
        let mut rem = code;
        for slot in a_of.iter_mut().rev() {
            *slot = rem % oa;
            rem /= oa;
        }
        for b1 in 0..ob {
            for b2 in 0..ob {
                let mut v = joint[b1 * ob + b2];
                for (x, &a) in a_of.iter().enumerate() {
                    v *= cond[((x * oa + a) * ob + b1) * ob + b2];
                }
                p[(code * ob + b1) * ob + b2] = v;
            }
        }
    }
    GlobalModel::new(s, oa, ob, p)
}

/// Quantum behavior of the reduced state, for comparison with the model's
/// marginals.
pub fn extension_behavior(
    w: &SymmetricExtensionWitness,
    alice_povms: &[Povm],
    bob_povm_1: &Povm,
    bob_povm_2: &Povm,
) -> Result<BehaviorTable> {
    behavior(
        w.reduced(),
        alice_povms,
        &[bob_povm_1.clone(), bob_povm_2.clone()],
    )
}
