//! Bell scenarios: quantum states, dichotomic observables, POVMs, Bell
//! functionals and their operators, behavior tables, and the exact
//! two-qubit CHSH maximum.
//!
//! Conventions fixed here and used everywhere else:
//!
//! * CHSH operator: `B = M1(x)N1 + M2(x)N1 + M1(x)N2 - M2(x)N2`.
//! * Outcome `0` of a two-outcome measurement carries value `+1`,
//!   outcome `1` carries value `-1`.
//! * Behavior tables are indexed `p(a, b | x, y)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::qmat::{
    herm_eig, min_eigenvalue, partial_trace, permute_factors, random_observable, tensor, CMat,
    DimsSpec, Party, C64, C_ONE, C_ZERO,
};
use crate::tol;

/// Density matrix together with its tensor-factor layout.
#[derive(Debug, Clone, PartialEq)]
pub struct QState {
    mat: CMat,
    dims: DimsSpec,
}

impl QState {
    /// Validates positivity and normalization before wrapping.
    pub fn new(mat: CMat, dims: DimsSpec) -> Result<Self> {
        if mat.rows() != dims.total_dim() || !mat.is_square() {
            return Err(Error::DimensionMismatch {
                context: "QState",
                expected: dims.total_dim(),
                got: mat.rows(),
            });
        }
        let min = min_eigenvalue(&mat)?;
        if min < -tol::PSD {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > tol::TRACE {
            return Err(Error::TraceNotOne { trace: tr });
        }
        Ok(Self { mat, dims })
    }

    pub fn from_pure(v: &[C64], dims: DimsSpec) -> Result<Self> {
        Self::new(CMat::outer(v), dims)
    }

    pub fn maximally_mixed(dims: DimsSpec) -> Self {
        let n = dims.total_dim();
        Self {
            mat: CMat::identity(n).scale_re(1.0 / n as f64),
            dims,
        }
    }

    /// |Phi_d> = sum_i |ii>/sqrt(d) on d(x)d.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = vec![C_ZERO; d * d];
        let a = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            v[i * d + i] = C64::new(a, 0.0);
        }
        Self {
            mat: CMat::outer(&v),
            dims: DimsSpec::bipartite(d, d),
        }
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn dims(&self) -> &DimsSpec {
        &self.dims
    }

    pub fn dim_a(&self) -> usize {
        self.dims.party_dim(Party::Alice)
    }

    pub fn dim_b(&self) -> usize {
        self.dims.party_dim(Party::Bob)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.total_dim()
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// Eigenvalues in descending order.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(herm_eig(&self.mat)?.values)
    }

    /// Tensor product, regrouped so both parties' factors stay contiguous:
    /// factors come out as (A, A', B, B') for bipartite inputs.
    pub fn product(&self, other: &QState) -> QState {
        let (dims, perm) = self.dims.product(&other.dims);
        let mut concat = self.dims.factor_dims();
        concat.extend(other.dims.factor_dims());
        let mat = permute_factors(&tensor(&self.mat, &other.mat), &concat, &perm);
        QState { mat, dims }
    }

    /// Marginal on one party.
    pub fn marginal(&self, party: Party) -> Result<QState> {
        let keep = self.dims.party_positions(party);
        let mat = partial_trace(&self.mat, &self.dims.factor_dims(), &keep)?;
        let factors = keep.iter().map(|&k| self.dims.factors()[k]).collect();
        Ok(QState {
            mat,
            dims: DimsSpec::new(factors)?,
        })
    }

    /// Wraps without re-validating; for internal construction paths whose
    /// outputs are valid by arithmetic.
    pub(crate) fn trusted(mat: CMat, dims: DimsSpec) -> QState {
        debug_assert!((mat.trace().re - 1.0).abs() < 1e-6);
        QState { mat, dims }
    }
}

/// Pauli matrices (sigma_x, sigma_y, sigma_z).
pub fn paulis() -> [CMat; 3] {
    let x = CMat::from_fn(2, 2, |i, j| if i != j { C_ONE } else { C_ZERO });
    let y = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => C_ZERO,
    });
    let z = CMat::diag(&[1.0, -1.0]);
    [x, y, z]
}

/// Two-qubit singlet (|01> - |10>)/sqrt(2).
pub fn singlet() -> QState {
    let s = 1.0 / 2.0_f64.sqrt();
    let v = vec![C_ZERO, C64::new(s, 0.0), C64::new(-s, 0.0), C_ZERO];
    QState::trusted(CMat::outer(&v), DimsSpec::bipartite(2, 2))
}

/// Werner state v|psi-><psi-| + (1-v) I/4.
pub fn werner_state(v: f64) -> Result<QState> {
    let s = singlet();
    let mixed = CMat::identity(4).scale_re((1.0 - v) / 4.0);
    QState::new(&s.mat().scale_re(v) + &mixed, DimsSpec::bipartite(2, 2))
}

/// Two-outcome observable stored through its +1-eigenspace projector,
/// so the +-1 spectrum is structural.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicObservable {
    proj_plus: CMat,
    dim: usize,
}

impl DichotomicObservable {
    pub fn new(proj_plus: CMat) -> Result<Self> {
        if !proj_plus.is_square() {
            return Err(Error::NotSquare {
                rows: proj_plus.rows(),
                cols: proj_plus.cols(),
            });
        }
        let herm = proj_plus.herm_deviation();
        let idem = proj_plus.matmul(&proj_plus).max_abs_diff(&proj_plus);
        let dev = herm.max(idem);
        if dev > tol::PROJECTOR {
            return Err(Error::InvalidProjector { deviation: dev });
        }
        let dim = proj_plus.rows();
        Ok(Self { proj_plus, dim })
    }

    /// Decomposes a Hermitian matrix with +-1 spectrum; eigenvalues are
    /// rounded to their sign, anything far from +-1 is rejected.
    pub fn from_matrix(m: &CMat) -> Result<Self> {
        let eig = herm_eig(m)?;
        let worst = eig
            .values
            .iter()
            .map(|l| (l.abs() - 1.0).abs())
            .fold(0.0, f64::max);
        if worst > 1e-8 {
            return Err(Error::InvalidProjector { deviation: worst });
        }
        let proj = eig.reconstruct_with(|_, lam| if lam > 0.0 { 1.0 } else { 0.0 });
        Self::new(proj.hermitian_part())
    }

    /// Constant +1 outcome: M = I.
    pub fn always_plus(dim: usize) -> Self {
        Self {
            proj_plus: CMat::identity(dim),
            dim,
        }
    }

    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        Self::from_matrix(&random_observable(dim, rng)).expect("random observable is valid")
    }

    pub fn proj_plus(&self) -> &CMat {
        &self.proj_plus
    }

    pub fn proj_minus(&self) -> CMat {
        &CMat::identity(self.dim) - &self.proj_plus
    }

    /// M = 2P - I.
    pub fn matrix(&self) -> CMat {
        &self.proj_plus.scale_re(2.0) - &CMat::identity(self.dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Complete set of POVM elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMat>,
}

impl Povm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm {
                reason: "no elements".into(),
            });
        }
        let d = elements[0].rows();
        let mut sum = CMat::zeros(d, d);
        for e in &elements {
            if e.rows() != d || !e.is_square() {
                return Err(Error::InvalidPovm {
                    reason: "element dimensions disagree".into(),
                });
            }
            let min = min_eigenvalue(e)?;
            if min < -tol::PSD {
                return Err(Error::InvalidPovm {
                    reason: format!("element has eigenvalue {min:.3e}"),
                });
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&CMat::identity(d));
        if dev > tol::PSD {
            return Err(Error::InvalidPovm {
                reason: format!("elements sum to identity only within {dev:.3e}"),
            });
        }
        Ok(Self { elements })
    }

    /// {P+, P-} with outcome 0 carrying value +1.
    pub fn from_dichotomic(obs: &DichotomicObservable) -> Self {
        Self {
            elements: vec![obs.proj_plus().clone(), obs.proj_minus()],
        }
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }
}

/// Linear functional on behaviors: sum of c[a,b,x,y] * p(a,b|x,y).
#[derive(Debug, Clone, PartialEq)]
pub struct BellFunctional {
    pub settings_a: usize,
    pub settings_b: usize,
    pub outcomes_a: usize,
    pub outcomes_b: usize,
    coeffs: Vec<f64>,
    pub classical_bound: f64,
}

fn table_index(
    (d_a, d_b, s_b): (usize, usize, usize),
    a: usize,
    b: usize,
    x: usize,
    y: usize,
) -> usize {
    ((x * s_b + y) * d_a + a) * d_b + b
}

impl BellFunctional {
    pub fn new(
        settings_a: usize,
        settings_b: usize,
        outcomes_a: usize,
        outcomes_b: usize,
        coeffs: Vec<f64>,
        classical_bound: f64,
    ) -> Result<Self> {
        let expect = settings_a * settings_b * outcomes_a * outcomes_b;
        if coeffs.len() != expect {
            return Err(Error::DimensionMismatch {
                context: "BellFunctional coefficients",
                expected: expect,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            settings_a,
            settings_b,
            outcomes_a,
            outcomes_b,
            coeffs,
            classical_bound,
        })
    }

    /// CHSH in probability coefficients: value equals
    /// E(0,0) + E(1,0) + E(0,1) - E(1,1) with outcome 0 valued +1.
    pub fn chsh() -> Self {
        let mut coeffs = vec![0.0; 16];
        for x in 0..2 {
            for y in 0..2 {
                let sign = if x == 1 && y == 1 { -1.0 } else { 1.0 };
                for a in 0..2 {
                    for b in 0..2 {
                        let v = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                        coeffs[table_index((2, 2, 2), a, b, x, y)] = sign * v;
                    }
                }
            }
        }
        Self {
            settings_a: 2,
            settings_b: 2,
            outcomes_a: 2,
            outcomes_b: 2,
            coeffs,
            classical_bound: 2.0,
        }
    }

    pub fn coeff(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.coeffs[table_index(
            (self.outcomes_a, self.outcomes_b, self.settings_b),
            a,
            b,
            x,
            y,
        )]
    }

    pub fn value_of(&self, table: &BehaviorTable) -> f64 {
        let mut v = 0.0;
        for x in 0..self.settings_a {
            for y in 0..self.settings_b {
                for a in 0..self.outcomes_a {
                    for b in 0..self.outcomes_b {
                        v += self.coeff(a, b, x, y) * table.prob(a, b, x, y);
                    }
                }
            }
        }
        v
    }
}

/// Three-outcome CGLMP functional for d = 3, in the normalization whose
/// classical bound is 2:
///
/// I3 = P(A1=B1) + P(B1=A2+1) + P(A2=B2) + P(B2=A1)
///    - P(A1=B1-1) - P(B1=A2) - P(A2=B2-1) - P(B2=A1-1)
///
/// with all arithmetic mod 3 and settings indexed from 0 (A1 = x=0 etc.).
pub fn cglmp3_functional() -> BellFunctional {
    let mut coeffs = vec![0.0; 2 * 2 * 3 * 3];
    let mut add = |x: usize, y: usize, rel: i32, w: f64| {
        // rel is the required (b - a) mod 3
        for a in 0..3usize {
            let b = ((a as i32 + rel).rem_euclid(3)) as usize;
            coeffs[table_index((3, 3, 2), a, b, x, y)] += w;
        }
    };
    add(0, 0, 0, 1.0); //  P(A1 = B1)
    add(1, 0, 1, 1.0); //  P(B1 = A2 + 1)
    add(1, 1, 0, 1.0); //  P(A2 = B2)
    add(0, 1, 0, 1.0); //  P(B2 = A1)
    add(0, 0, 1, -1.0); // -P(A1 = B1 - 1), i.e. b = a + 1
    add(1, 0, 0, -1.0); // -P(B1 = A2)
    add(1, 1, 1, -1.0); // -P(A2 = B2 - 1)
    add(0, 1, -1, -1.0); // -P(B2 = A1 - 1), i.e. b = a - 1
    BellFunctional {
        settings_a: 2,
        settings_b: 2,
        outcomes_a: 3,
        outcomes_b: 3,
        coeffs,
        classical_bound: 2.0,
    }
}

/// Conditional outcome probabilities p(a, b | x, y).
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorTable {
    pub settings_a: usize,
    pub settings_b: usize,
    pub outcomes_a: usize,
    pub outcomes_b: usize,
    p: Vec<f64>,
}

impl BehaviorTable {
    pub fn new(
        settings_a: usize,
        settings_b: usize,
        outcomes_a: usize,
        outcomes_b: usize,
        p: Vec<f64>,
    ) -> Result<Self> {
        let t = Self {
            settings_a,
            settings_b,
            outcomes_a,
            outcomes_b,
            p,
        };
        if t.p.len() != settings_a * settings_b * outcomes_a * outcomes_b {
            return Err(Error::DimensionMismatch {
                context: "BehaviorTable",
                expected: settings_a * settings_b * outcomes_a * outcomes_b,
                got: t.p.len(),
            });
        }
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        for &v in &self.p {
            if v < -1e-12 {
                return Err(Error::InvalidConfig {
                    reason: format!("negative probability {v:.3e}"),
                });
            }
        }
        for x in 0..self.settings_a {
            for y in 0..self.settings_b {
                let mut s = 0.0;
                for a in 0..self.outcomes_a {
                    for b in 0..self.outcomes_b {
                        s += self.prob(a, b, x, y);
                    }
                }
                if (s - 1.0).abs() > tol::TRACE {
                    return Err(Error::InvalidConfig {
                        reason: format!("behavior not normalized at (x={x}, y={y}): {s}"),
                    });
                }
            }
        }
        // no-signaling: Alice's marginal independent of y, Bob's of x
        for x in 0..self.settings_a {
            for a in 0..self.outcomes_a {
                let m0: f64 = (0..self.outcomes_b).map(|b| self.prob(a, b, x, 0)).sum();
                for y in 1..self.settings_b {
                    let m: f64 = (0..self.outcomes_b).map(|b| self.prob(a, b, x, y)).sum();
                    if (m - m0).abs() > tol::TRACE {
                        return Err(Error::InvalidConfig {
                            reason: format!("signaling marginal at (a={a}, x={x})"),
                        });
                    }
                }
            }
        }
        for y in 0..self.settings_b {
            for b in 0..self.outcomes_b {
                let m0: f64 = (0..self.outcomes_a).map(|a| self.prob(a, b, 0, y)).sum();
                for x in 1..self.settings_a {
                    let m: f64 = (0..self.outcomes_a).map(|a| self.prob(a, b, x, y)).sum();
                    if (m - m0).abs() > tol::TRACE {
                        return Err(Error::InvalidConfig {
                            reason: format!("signaling marginal at (b={b}, y={y})"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn prob(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.p[table_index(
            (self.outcomes_a, self.outcomes_b, self.settings_b),
            a,
            b,
            x,
            y,
        )]
    }

    /// Correlator E(x,y) for two-outcome tables, outcome 0 valued +1.
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        assert_eq!(self.outcomes_a, 2);
        assert_eq!(self.outcomes_b, 2);
        let mut e = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let v = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                e += v * self.prob(a, b, x, y);
            }
        }
        e
    }
}

/// E(0,0) + E(1,0) + E(0,1) - E(1,1).
pub fn chsh_value_from_behavior(t: &BehaviorTable) -> f64 {
    t.correlator(0, 0) + t.correlator(1, 0) + t.correlator(0, 1) - t.correlator(1, 1)
}

/// CHSH Bell operator M1(x)N1 + M2(x)N1 + M1(x)N2 - M2(x)N2.
pub fn chsh_operator(
    m1: &DichotomicObservable,
    m2: &DichotomicObservable,
    n1: &DichotomicObservable,
    n2: &DichotomicObservable,
) -> Result<CMat> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch {
            context: "chsh_operator Alice observables",
            expected: m1.dim(),
            got: m2.dim(),
        });
    }
    if n1.dim() != n2.dim() {
        return Err(Error::DimensionMismatch {
            context: "chsh_operator Bob observables",
            expected: n1.dim(),
            got: n2.dim(),
        });
    }
    Ok(chsh_operator_raw(
        &m1.matrix(),
        &m2.matrix(),
        &n1.matrix(),
        &n2.matrix(),
    ))
}

/// Same combination for raw Hermitian contractions (no +-1 spectrum
/// requirement); used by the norm-bounded measurement class.
pub fn chsh_operator_raw(m1: &CMat, m2: &CMat, n1: &CMat, n2: &CMat) -> CMat {
    let t11 = tensor(m1, n1);
    let t21 = tensor(m2, n1);
    let t12 = tensor(m1, n2);
    let t22 = tensor(m2, n2);
    &(&(&t11 + &t21) + &t12) - &t22
}

/// General Bell operator sum_{a b x y} c[a,b,x,y] E_x^a (x) F_y^b.
pub fn bell_operator(f: &BellFunctional, alice: &[Povm], bob: &[Povm]) -> Result<CMat> {
    if alice.len() != f.settings_a || bob.len() != f.settings_b {
        return Err(Error::DimensionMismatch {
            context: "bell_operator settings",
            expected: f.settings_a,
            got: alice.len(),
        });
    }
    for p in alice {
        if p.outcomes() != f.outcomes_a {
            return Err(Error::InvalidPovm {
                reason: "Alice POVM outcome count does not match functional".into(),
            });
        }
    }
    for p in bob {
        if p.outcomes() != f.outcomes_b {
            return Err(Error::InvalidPovm {
                reason: "Bob POVM outcome count does not match functional".into(),
            });
        }
    }
    let d = alice[0].dim() * bob[0].dim();
    let mut op = CMat::zeros(d, d);
    for (x, pa) in alice.iter().enumerate() {
        for (y, pb) in bob.iter().enumerate() {
            for (a, ea) in pa.elements().iter().enumerate() {
                for (b, fb) in pb.elements().iter().enumerate() {
                    let c = f.coeff(a, b, x, y);
                    if c == 0.0 {
                        continue;
                    }
                    op = &op + &tensor(ea, fb).scale_re(c);
                }
            }
        }
    }
    Ok(op)
}

/// tr(B rho), with the imaginary residue checked and discarded.
pub fn bell_value(b_op: &CMat, rho: &QState) -> Result<f64> {
    if b_op.rows() != rho.total_dim() || !b_op.is_square() {
        return Err(Error::DimensionMismatch {
            context: "bell_value",
            expected: rho.total_dim(),
            got: b_op.rows(),
        });
    }
    b_op.trace_product(rho.mat()).re_checked()
}

trait ReChecked {
    fn re_checked(self) -> Result<f64>;
}

impl ReChecked for C64 {
    fn re_checked(self) -> Result<f64> {
        if self.im.abs() > tol::IMAG_RESIDUE {
            return Err(Error::ImaginaryResidue { residue: self.im });
        }
        Ok(self.re)
    }
}

/// Full outcome table p(a,b|x,y) = tr(E_x^a (x) F_y^b rho).
pub fn behavior(rho: &QState, alice: &[Povm], bob: &[Povm]) -> Result<BehaviorTable> {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    for p in alice {
        if p.dim() != da {
            return Err(Error::DimensionMismatch {
                context: "behavior Alice POVM",
                expected: da,
                got: p.dim(),
            });
        }
    }
    for p in bob {
        if p.dim() != db {
            return Err(Error::DimensionMismatch {
                context: "behavior Bob POVM",
                expected: db,
                got: p.dim(),
            });
        }
    }
    let oa = alice.first().map_or(0, |p| p.outcomes());
    let ob = bob.first().map_or(0, |p| p.outcomes());
    if alice.iter().any(|p| p.outcomes() != oa) || bob.iter().any(|p| p.outcomes() != ob) {
        return Err(Error::InvalidPovm {
            reason: "outcome counts differ across settings".into(),
        });
    }
    let mut p = vec![0.0; alice.len() * bob.len() * oa * ob];
    for (x, pa) in alice.iter().enumerate() {
        for (y, pb) in bob.iter().enumerate() {
            for (a, ea) in pa.elements().iter().enumerate() {
                for (b, fb) in pb.elements().iter().enumerate() {
                    let val = tensor(ea, fb).trace_product(rho.mat()).re_checked()?;
                    p[table_index((oa, ob, bob.len()), a, b, x, y)] = val.max(0.0);
                }
            }
        }
    }
    BehaviorTable::new(alice.len(), bob.len(), oa, ob, p)
}

/// Exhaustive maximum of a Bell functional over deterministic strategies.
pub fn classical_bound_bruteforce(f: &BellFunctional) -> Result<f64> {
    let bits = (f.settings_a as f64) * (f.outcomes_a as f64).log2()
        + (f.settings_b as f64) * (f.outcomes_b as f64).log2();
    if bits > 20.0 {
        return Err(Error::ScenarioTooLarge {
            bits: bits.ceil() as u32,
            limit: 20,
        });
    }
    let strategies_b = f.outcomes_b.pow(f.settings_b as u32);
    let mut best = f64::NEG_INFINITY;
    let mut b_of = vec![0usize; f.settings_b];
    for code in 0..strategies_b {
        let mut rem = code;
        for slot in b_of.iter_mut() {
            *slot = rem % f.outcomes_b;
            rem /= f.outcomes_b;
        }
        // Alice's settings decouple once Bob's assignment is fixed.
        let mut total = 0.0;
        for x in 0..f.settings_a {
            let mut best_a = f64::NEG_INFINITY;
            for a in 0..f.outcomes_a {
                let mut s = 0.0;
                for (y, &b) in b_of.iter().enumerate() {
                    s += f.coeff(a, b, x, y);
                }
                best_a = best_a.max(s);
            }
            total += best_a;
        }
        best = best.max(total);
    }
    Ok(best)
}

/// Exact CHSH maximum of a two-qubit state: 2 sqrt(t1 + t2) where t1 >= t2
/// are the top eigenvalues of T^t T built from the correlation matrix
/// T_ij = tr(rho sigma_i (x) sigma_j).
pub fn horodecki_max_chsh(rho: &QState) -> Result<f64> {
    if rho.dims().factor_dims() != vec![2, 2] {
        return Err(Error::DimensionMismatch {
            context: "horodecki_max_chsh",
            expected: 4,
            got: rho.total_dim(),
        });
    }
    let sig = paulis();
    let mut t = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = tensor(&sig[i], &sig[j]).trace_product(rho.mat()).re;
        }
    }
    // T^t T as a real symmetric 3x3
    let mut tt = CMat::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += t[k][i] * t[k][j];
            }
            tt[(i, j)] = C64::new(s, 0.0);
        }
    }
    let eig = herm_eig(&tt)?;
    Ok(2.0 * (eig.values[0] + eig.values[1]).max(0.0).sqrt())
}

/// tr[(X (x) Y) (rho (x) sigma)] for two bipartite states measured jointly:
/// X acts on both Alice systems (copy 1 then copy 2), Y on both Bob systems.
/// Contracted directly so the four-party product is never materialized.
pub fn pair_product_trace(x: &CMat, y: &CMat, rho: &QState, sigma: &QState) -> Result<C64> {
    let (da1, db1) = (rho.dim_a(), rho.dim_b());
    let (da2, db2) = (sigma.dim_a(), sigma.dim_b());
    if x.rows() != da1 * da2 || !x.is_square() {
        return Err(Error::DimensionMismatch {
            context: "pair_product_trace Alice operator",
            expected: da1 * da2,
            got: x.rows(),
        });
    }
    if y.rows() != db1 * db2 || !y.is_square() {
        return Err(Error::DimensionMismatch {
            context: "pair_product_trace Bob operator",
            expected: db1 * db2,
            got: y.rows(),
        });
    }
    let r = rho.mat();
    let s = sigma.mat();
    // g[(a2, b1), (a2', b1')] = sum_{a1, a1'} X[(a1,a2),(a1',a2')] rho[(a1',b1'),(a1,b1)]
    let gd = da2 * db1;
    let mut g = vec![C_ZERO; gd * gd];
    for a2 in 0..da2 {
        for b1 in 0..db1 {
            for a2p in 0..da2 {
                for b1p in 0..db1 {
                    let mut acc = C_ZERO;
                    for a1 in 0..da1 {
                        for a1p in 0..da1 {
                            acc += x[(a1 * da2 + a2, a1p * da2 + a2p)]
                                * r[(a1p * db1 + b1p, a1 * db1 + b1)];
                        }
                    }
                    g[(a2 * db1 + b1) * gd + (a2p * db1 + b1p)] = acc;
                }
            }
        }
    }
    // total = sum g[(a2,b1),(a2',b1')] Y[(b1,b2),(b1',b2')] sigma[(a2',b2'),(a2,b2)]
    let mut total = C_ZERO;
    for a2 in 0..da2 {
        for b1 in 0..db1 {
            for a2p in 0..da2 {
                for b1p in 0..db1 {
                    let gv = g[(a2 * db1 + b1) * gd + (a2p * db1 + b1p)];
                    if gv == C_ZERO {
                        continue;
                    }
                    let mut acc = C_ZERO;
                    for b2 in 0..db2 {
                        for b2p in 0..db2 {
                            acc += y[(b1 * db2 + b2, b1p * db2 + b2p)]
                                * s[(a2p * db2 + b2p, a2 * db2 + b2)];
                        }
                    }
                    total += gv * acc;
                }
            }
        }
    }
    Ok(total)
}

/// CHSH value of rho (x) sigma under joint two-copy observables
/// (Alice operators on A1 A2, Bob operators on B1 B2).
pub fn two_copy_chsh_value(
    alice: [&CMat; 2],
    bob: [&CMat; 2],
    rho: &QState,
    sigma: &QState,
) -> Result<f64> {
    let mut v = C_ZERO;
    v += pair_product_trace(alice[0], bob[0], rho, sigma)?;
    v += pair_product_trace(alice[1], bob[0], rho, sigma)?;
    v += pair_product_trace(alice[0], bob[1], rho, sigma)?;
    v -= pair_product_trace(alice[1], bob[1], rho, sigma)?;
    v.re_checked()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{ginibre, random_density};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn obs_from(m: &CMat) -> DichotomicObservable {
        DichotomicObservable::from_matrix(m).unwrap()
    }

    fn optimal_chsh_settings() -> [DichotomicObservable; 4] {
        let [x, _, z] = paulis();
        let m1 = obs_from(&z);
        let m2 = obs_from(&x);
        let n1 = obs_from(&(&z + &x).scale_re(1.0 / SQRT2));
        let n2 = obs_from(&(&z - &x).scale_re(1.0 / SQRT2));
        [m1, m2, n1, n2]
    }

    #[test]
    fn qstate_validation() {
        let ok = QState::new(
            CMat::identity(4).scale_re(0.25),
            DimsSpec::bipartite(2, 2),
        );
        assert!(ok.is_ok());
        let bad_trace = QState::new(CMat::identity(4), DimsSpec::bipartite(2, 2));
        assert!(matches!(bad_trace, Err(Error::TraceNotOne { .. })));
        let neg = QState::new(CMat::diag(&[1.5, -0.5]), DimsSpec::bipartite(1, 2));
        assert!(matches!(
            neg,
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn qstate_product_regroups_parties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r1 = QState::new(random_density(4, 4, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
        let r2 = QState::new(random_density(4, 4, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
        let prod = r1.product(&r2);
        assert_eq!(prod.dims().factor_dims(), vec![2, 2, 2, 2]);
        assert_eq!(prod.dim_a(), 4);
        assert_abs_diff_eq!(prod.mat().trace().re, 1.0, epsilon = 1e-12);
        // marginal on (A, A') equals rho1_A (x) rho2_A
        let ma = prod.marginal(Party::Alice).unwrap();
        let expect = tensor(
            &r1.marginal(Party::Alice).unwrap().mat().clone(),
            &r2.marginal(Party::Alice).unwrap().mat().clone(),
        );
        assert!(ma.mat().max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn chsh_operator_all_z() {
        let [_, _, z] = paulis();
        let o = obs_from(&z);
        let op = chsh_operator(&o, &o, &o, &o).unwrap();
        let expect = tensor(&z, &z).scale_re(2.0);
        assert!(op.max_abs_diff(&expect) < 1e-12);
        let eig = herm_eig(&op).unwrap();
        assert_abs_diff_eq!(eig.values[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn chsh_operator_reaches_tsirelson() {
        let [m1, m2, n1, n2] = optimal_chsh_settings();
        let op = chsh_operator(&m1, &m2, &n1, &n2).unwrap();
        let eig = herm_eig(&op).unwrap();
        assert_abs_diff_eq!(eig.values[0], 2.0 * SQRT2, epsilon = 1e-12);
    }

    #[test]
    fn chsh_norm_within_tsirelson_on_random_observables() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let d = if rng.random::<f64>() < 0.5 { 2 } else { 3 };
            let m1 = DichotomicObservable::random(d, &mut rng);
            let m2 = DichotomicObservable::random(d, &mut rng);
            let n1 = DichotomicObservable::random(d, &mut rng);
            let n2 = DichotomicObservable::random(d, &mut rng);
            let op = chsh_operator(&m1, &m2, &n1, &n2).unwrap();
            let top = herm_eig(&op).unwrap().values[0];
            assert!(top <= 2.0 * SQRT2 + 1e-9, "norm {top} above Tsirelson");
        }
    }

    #[test]
    fn bell_value_singlet_and_mixed() {
        let [m1, m2, n1, n2] = optimal_chsh_settings();
        // with the singlet, correlators flip sign; swap Bob's outputs
        let n1f = obs_from(&-&n1.matrix());
        let n2f = obs_from(&-&n2.matrix());
        let op = chsh_operator(&m1, &m2, &n1f, &n2f).unwrap();
        let v = bell_value(&op, &singlet()).unwrap();
        assert_abs_diff_eq!(v, 2.0 * SQRT2, epsilon = 1e-12);

        let mixed = QState::maximally_mixed(DimsSpec::bipartite(2, 2));
        let v0 = bell_value(&op, &mixed).unwrap();
        assert_abs_diff_eq!(v0, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_value_linear_in_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let [m1, m2, n1, n2] = optimal_chsh_settings();
        let op = chsh_operator(&m1, &m2, &n1, &n2).unwrap();
        let r1 = QState::new(random_density(4, 2, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
        let r2 = QState::new(random_density(4, 4, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
        let mix = QState::new(
            &r1.mat().scale_re(0.5) + &r2.mat().scale_re(0.5),
            DimsSpec::bipartite(2, 2),
        )
        .unwrap();
        let v = bell_value(&op, &mix).unwrap();
        let expect = 0.5 * bell_value(&op, &r1).unwrap() + 0.5 * bell_value(&op, &r2).unwrap();
        assert_abs_diff_eq!(v, expect, epsilon = 1e-12);
    }

    #[test]
    fn behavior_factorizes_on_product_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let ra = random_density(2, 2, &mut rng);
        let rb = random_density(2, 1, &mut rng);
        let rho = QState::new(tensor(&ra, &rb), DimsSpec::bipartite(2, 2)).unwrap();
        let alice: Vec<Povm> = (0..2)
            .map(|_| Povm::from_dichotomic(&DichotomicObservable::random(2, &mut rng)))
            .collect();
        let bob: Vec<Povm> = (0..2)
            .map(|_| Povm::from_dichotomic(&DichotomicObservable::random(2, &mut rng)))
            .collect();
        let t = behavior(&rho, &alice, &bob).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let pa = alice[x].elements()[a].trace_product(&ra).re;
                        let pb = bob[y].elements()[b].trace_product(&rb).re;
                        assert_abs_diff_eq!(t.prob(a, b, x, y), pa * pb, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn behavior_of_maximally_mixed_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let rho = QState::maximally_mixed(DimsSpec::bipartite(2, 2));
        let alice: Vec<Povm> = (0..2)
            .map(|_| Povm::from_dichotomic(&DichotomicObservable::random(2, &mut rng)))
            .collect();
        let bob: Vec<Povm> = (0..2)
            .map(|_| Povm::from_dichotomic(&DichotomicObservable::random(2, &mut rng)))
            .collect();
        let t = behavior(&rho, &alice, &bob).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        assert_abs_diff_eq!(t.prob(a, b, x, y), 0.25, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn behavior_path_matches_operator_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..20 {
            let rho =
                QState::new(random_density(4, 4, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
            let ms: Vec<DichotomicObservable> =
                (0..4).map(|_| DichotomicObservable::random(2, &mut rng)).collect();
            let op = chsh_operator(&ms[0], &ms[1], &ms[2], &ms[3]).unwrap();
            let via_op = bell_value(&op, &rho).unwrap();
            let alice = vec![
                Povm::from_dichotomic(&ms[0]),
                Povm::from_dichotomic(&ms[1]),
            ];
            let bob = vec![
                Povm::from_dichotomic(&ms[2]),
                Povm::from_dichotomic(&ms[3]),
            ];
            let t = behavior(&rho, &alice, &bob).unwrap();
            assert_abs_diff_eq!(chsh_value_from_behavior(&t), via_op, epsilon = 1e-10);
            // functional-coefficient path agrees as well
            assert_abs_diff_eq!(
                BellFunctional::chsh().value_of(&t),
                via_op,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn bell_operator_matches_chsh_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let ms: Vec<DichotomicObservable> =
            (0..4).map(|_| DichotomicObservable::random(3, &mut rng)).collect();
        let via_chsh = chsh_operator(&ms[0], &ms[1], &ms[2], &ms[3]).unwrap();
        let alice = vec![
            Povm::from_dichotomic(&ms[0]),
            Povm::from_dichotomic(&ms[1]),
        ];
        let bob = vec![
            Povm::from_dichotomic(&ms[2]),
            Povm::from_dichotomic(&ms[3]),
        ];
        let via_general = bell_operator(&BellFunctional::chsh(), &alice, &bob).unwrap();
        assert!(via_general.max_abs_diff(&via_chsh) < 1e-12);
    }

    #[test]
    fn classical_bounds() {
        assert_abs_diff_eq!(
            classical_bound_bruteforce(&BellFunctional::chsh()).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            classical_bound_bruteforce(&cglmp3_functional()).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let zero = BellFunctional::new(2, 2, 2, 2, vec![0.0; 16], 0.0).unwrap();
        assert_abs_diff_eq!(classical_bound_bruteforce(&zero).unwrap(), 0.0);
        let big = BellFunctional::new(8, 8, 8, 8, vec![0.0; 4096], 0.0).unwrap();
        assert!(matches!(
            classical_bound_bruteforce(&big),
            Err(Error::ScenarioTooLarge { .. })
        ));
    }

    #[test]
    fn cglmp3_uniform_behavior_scores_zero() {
        let f = cglmp3_functional();
        let t = BehaviorTable::new(2, 2, 3, 3, vec![1.0 / 9.0; 36]).unwrap();
        assert_abs_diff_eq!(f.value_of(&t), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn horodecki_known_states() {
        assert_abs_diff_eq!(
            horodecki_max_chsh(&singlet()).unwrap(),
            2.0 * SQRT2,
            epsilon = 1e-12
        );
        let mixed = QState::maximally_mixed(DimsSpec::bipartite(2, 2));
        assert_abs_diff_eq!(horodecki_max_chsh(&mixed).unwrap(), 0.0, epsilon = 1e-12);
        for v in [0.3, 0.5, 1.0 / SQRT2, 0.9] {
            let w = werner_state(v).unwrap();
            assert_abs_diff_eq!(
                horodecki_max_chsh(&w).unwrap(),
                2.0 * SQRT2 * v,
                epsilon = 1e-10
            );
        }
        // threshold: CHSH-local iff v <= 1/sqrt(2)
        let at = horodecki_max_chsh(&werner_state(1.0 / SQRT2).unwrap()).unwrap();
        assert_abs_diff_eq!(at, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn horodecki_upper_bounds_fixed_settings() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..20 {
            let rho =
                QState::new(random_density(4, 4, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
            let cap = horodecki_max_chsh(&rho).unwrap();
            let ms: Vec<DichotomicObservable> =
                (0..4).map(|_| DichotomicObservable::random(2, &mut rng)).collect();
            let op = chsh_operator(&ms[0], &ms[1], &ms[2], &ms[3]).unwrap();
            let v = bell_value(&op, &rho).unwrap().abs();
            assert!(v <= cap + 1e-9, "fixed settings {v} exceed Horodecki {cap}");
        }
    }

    #[test]
    fn pair_product_trace_matches_explicit_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let rho =
                QState::new(random_density(4, 4, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
            let sigma =
                QState::new(random_density(4, 3, &mut rng), DimsSpec::bipartite(2, 2)).unwrap();
            let x = ginibre(4, 4, &mut rng).hermitian_part();
            let y = ginibre(4, 4, &mut rng).hermitian_part();
            let got = pair_product_trace(&x, &y, &rho, &sigma).unwrap();
            // oracle: materialize rho (x) sigma, reorder to (A1 A2 B1 B2)
            let big = tensor(rho.mat(), sigma.mat());
            let reordered = permute_factors(&big, &[2, 2, 2, 2], &[0, 2, 1, 3]);
            let expect = tensor(&x, &y).trace_product(&reordered);
            assert!((got - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn two_copy_chsh_on_product_of_singlets() {
        // measuring each copy separately: A1 gets the optimal settings on
        // copy 1 and identity on copy 2, so the two-copy value reduces to
        // the single-copy one
        let [m1, m2, n1, n2] = optimal_chsh_settings();
        let i2 = CMat::identity(2);
        let a1 = tensor(&m1.matrix(), &i2);
        let a2 = tensor(&m2.matrix(), &i2);
        let b1 = tensor(&-&n1.matrix(), &i2);
        let b2 = tensor(&-&n2.matrix(), &i2);
        let s = singlet();
        let v = two_copy_chsh_value([&a1, &a2], [&b1, &b2], &s, &s).unwrap();
        assert_abs_diff_eq!(v, 2.0 * SQRT2, epsilon = 1e-10);
    }

    #[test]
    fn dichotomic_observable_validation() {
        let [x, _, z] = paulis();
        assert!(DichotomicObservable::from_matrix(&z).is_ok());
        assert!(DichotomicObservable::from_matrix(&x).is_ok());
        // not +-1 spectrum
        let bad = CMat::diag(&[0.5, -1.0]);
        assert!(DichotomicObservable::from_matrix(&bad).is_err());
        // projector validation
        assert!(DichotomicObservable::new(CMat::diag(&[1.0, 0.0])).is_ok());
        assert!(DichotomicObservable::new(CMat::diag(&[0.7, 0.0])).is_err());
        let id = DichotomicObservable::always_plus(3);
        assert!(id.matrix().max_abs_diff(&CMat::identity(3)) < 1e-15);
    }

    #[test]
    fn povm_validation() {
        let [_, _, z] = paulis();
        let o = obs_from(&z);
        let p = Povm::from_dichotomic(&o);
        assert_eq!(p.outcomes(), 2);
        assert!(Povm::new(p.elements().to_vec()).is_ok());
        // broken completeness
        let bad = Povm::new(vec![CMat::identity(2).scale_re(0.5)]);
        assert!(bad.is_err());
        // negative element
        let bad2 = Povm::new(vec![CMat::diag(&[1.5, 1.0]), CMat::diag(&[-0.5, 0.0])]);
        assert!(bad2.is_err());
    }
}
