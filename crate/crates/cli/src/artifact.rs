//! Versioned on-disk artifact format.
//!
//! Artifacts are JSON documents with a fixed envelope (`format`,
//! `version`, `metadata`, `kind`, `payload`) and one payload schema per
//! kind. Every complex entry is stored as a `[re, im]` pair of decimal
//! numbers printed with 17 significant digits, which is enough to
//! reproduce the underlying `f64` bit patterns exactly on reload.
//!
//! Loading performs structural (schema) validation only; numerical
//! invariants such as positivity or certificate consistency are checked
//! by the commands that reconstruct core objects from the raw payload.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use bellactiv_core::bell::{DichotomicObservable, Povm, QState};
use bellactiv_core::construct::{
    ActivationPair, Branch, ConditionalScheme, LocalityCertificate,
};
use bellactiv_core::extend::{Side, SymmetricExtensionWitness};
use bellactiv_core::seesaw::{
    Scenario, SearchMeasurements, SearchResult, StateCertificate,
};
use bellactiv_core::{CMat, DimsSpec, Error, Party, C64};

use crate::Failure;

pub const FORMAT_NAME: &str = "bellactiv-artifact";
pub const FORMAT_VERSION: &str = "1";

/// An `f64` serialized as a JSON number with 17 significant digits.
///
/// 17 decimal digits uniquely identify every finite double, so
/// serialization followed by deserialization is the identity on bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(
                "artifact numbers must be finite",
            ));
        }
        let text = format!("{:.16e}", self.0);
        let raw = serde_json::value::RawValue::from_string(text)
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        f64::deserialize(deserializer).map(F17)
    }
}

/// Dense complex matrix: row-major nested arrays of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRepr {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<[F17; 2]>>,
}

impl MatrixRepr {
    pub fn from_cmat(m: &CMat) -> Self {
        let entries = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| {
                        let z = m[(i, j)];
                        [F17(z.re), F17(z.im)]
                    })
                    .collect()
            })
            .collect();
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries,
        }
    }

    pub fn to_cmat(&self) -> bellactiv_core::Result<CMat> {
        self.shape_check().map_err(|reason| Error::InvalidConfig { reason })?;
        Ok(CMat::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.entries[i][j];
            C64::new(re.0, im.0)
        }))
    }

    fn shape_check(&self) -> Result<(), String> {
        if self.rows == 0 || self.cols == 0 {
            return Err("matrix must have positive dimensions".into());
        }
        if self.entries.len() != self.rows {
            return Err(format!(
                "matrix declares {} rows but stores {}",
                self.rows,
                self.entries.len()
            ));
        }
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != self.cols {
                return Err(format!(
                    "matrix row {i} has {} entries, expected {}",
                    row.len(),
                    self.cols
                ));
            }
        }
        Ok(())
    }
}

/// Tensor factor list as `[dim, party]` pairs, parties named "A"/"B".
pub type DimsRepr = Vec<(usize, String)>;

fn dims_repr(dims: &DimsSpec) -> DimsRepr {
    dims.factors()
        .iter()
        .map(|&(d, p)| {
            let name = match p {
                Party::Alice => "A",
                Party::Bob => "B",
            };
            (d, name.to_string())
        })
        .collect()
}

fn dims_schema_check(dims: &DimsRepr) -> Result<(), String> {
    if dims.is_empty() {
        return Err("dims must list at least one factor".into());
    }
    for (d, p) in dims {
        if *d == 0 {
            return Err("dims must be positive".into());
        }
        if p != "A" && p != "B" {
            return Err(format!("unknown party tag {p:?} (expected \"A\" or \"B\")"));
        }
    }
    Ok(())
}

fn dims_from_repr(dims: &DimsRepr) -> bellactiv_core::Result<DimsSpec> {
    let factors = dims
        .iter()
        .map(|(d, p)| {
            let party = match p.as_str() {
                "A" => Party::Alice,
                "B" => Party::Bob,
                other => {
                    return Err(Error::InvalidConfig {
                        reason: format!("unknown party tag {other:?}"),
                    })
                }
            };
            Ok((*d, party))
        })
        .collect::<bellactiv_core::Result<Vec<_>>>()?;
    DimsSpec::new(factors)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRepr {
    pub dims: DimsRepr,
    pub matrix: MatrixRepr,
}

impl StateRepr {
    pub fn from_state(state: &QState) -> Self {
        Self {
            dims: dims_repr(state.dims()),
            matrix: MatrixRepr::from_cmat(state.mat()),
        }
    }

    /// Rebuilds the state, re-validating hermiticity, positivity and
    /// unit trace.
    pub fn to_state(&self) -> bellactiv_core::Result<QState> {
        QState::new(self.matrix.to_cmat()?, dims_from_repr(&self.dims)?)
    }

    fn schema_check(&self) -> Result<(), String> {
        dims_schema_check(&self.dims)?;
        self.matrix.shape_check()?;
        let total: usize = self.dims.iter().map(|(d, _)| d).product();
        if total != self.matrix.rows || self.matrix.rows != self.matrix.cols {
            return Err(format!(
                "state dims give total dimension {total}, matrix is {}x{}",
                self.matrix.rows, self.matrix.cols
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableRepr {
    pub dim: usize,
    /// Projector onto the +1 eigenspace; the observable is 2P - I.
    pub proj_plus: MatrixRepr,
}

impl ObservableRepr {
    pub fn from_observable(obs: &DichotomicObservable) -> Self {
        Self {
            dim: obs.dim(),
            proj_plus: MatrixRepr::from_cmat(obs.proj_plus()),
        }
    }

    pub fn to_observable(&self) -> bellactiv_core::Result<DichotomicObservable> {
        DichotomicObservable::new(self.proj_plus.to_cmat()?)
    }

    fn schema_check(&self) -> Result<(), String> {
        self.proj_plus.shape_check()?;
        if self.proj_plus.rows != self.dim || self.proj_plus.cols != self.dim {
            return Err(format!(
                "observable declares dimension {} but stores a {}x{} matrix",
                self.dim, self.proj_plus.rows, self.proj_plus.cols
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmRepr {
    pub dim: usize,
    pub elements: Vec<MatrixRepr>,
}

impl PovmRepr {
    pub fn from_povm(p: &Povm) -> Self {
        Self {
            dim: p.dim(),
            elements: p.elements().iter().map(MatrixRepr::from_cmat).collect(),
        }
    }

    pub fn to_povm(&self) -> bellactiv_core::Result<Povm> {
        let elements = self
            .elements
            .iter()
            .map(|m| m.to_cmat())
            .collect::<bellactiv_core::Result<Vec<_>>>()?;
        Povm::new(elements)
    }

    fn schema_check(&self) -> Result<(), String> {
        if self.elements.is_empty() {
            return Err("POVM must have at least one element".into());
        }
        for (b, m) in self.elements.iter().enumerate() {
            m.shape_check()?;
            if m.rows != self.dim || m.cols != self.dim {
                return Err(format!(
                    "POVM element {b} is {}x{}, declared dimension {}",
                    m.rows, m.cols, self.dim
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessRepr {
    /// Extended side: "A" (duplicated Alice) or "B" (duplicated Bob).
    pub side: String,
    pub ext: StateRepr,
    pub reduced: StateRepr,
}

impl WitnessRepr {
    pub fn from_witness(w: &SymmetricExtensionWitness) -> Self {
        Self {
            side: match w.side() {
                Side::A => "A".into(),
                Side::B => "B".into(),
            },
            ext: StateRepr::from_state(w.ext()),
            reduced: StateRepr::from_state(w.reduced()),
        }
    }

    pub fn to_witness(&self) -> bellactiv_core::Result<SymmetricExtensionWitness> {
        let side = match self.side.as_str() {
            "A" => Side::A,
            "B" => Side::B,
            other => {
                return Err(Error::InvalidConfig {
                    reason: format!("unknown extension side {other:?}"),
                })
            }
        };
        SymmetricExtensionWitness::new(self.ext.to_state()?, side, self.reduced.to_state()?)
    }

    fn schema_check(&self) -> Result<(), String> {
        if self.side != "A" && self.side != "B" {
            return Err(format!("unknown extension side {:?}", self.side));
        }
        self.ext.schema_check()?;
        self.reduced.schema_check()
    }
}

/// Locality certificate carried next to a state.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CertRepr {
    TwoQubitHorodecki { value: F17 },
    Extension { witness: WitnessRepr },
    SymmetrizedMixture { witness: WitnessRepr },
}

impl CertRepr {
    pub fn from_locality_certificate(cert: &LocalityCertificate) -> Self {
        match cert {
            LocalityCertificate::TwoQubitHorodecki { value } => {
                CertRepr::TwoQubitHorodecki { value: F17(*value) }
            }
            LocalityCertificate::Extension(w) => CertRepr::Extension {
                witness: WitnessRepr::from_witness(w),
            },
            LocalityCertificate::SymmetrizedMixture(w) => CertRepr::SymmetrizedMixture {
                witness: WitnessRepr::from_witness(w),
            },
        }
    }

    pub fn from_state_certificate(cert: &StateCertificate) -> Self {
        match cert {
            StateCertificate::Extension(w) => CertRepr::Extension {
                witness: WitnessRepr::from_witness(w),
            },
            StateCertificate::SymmetrizedMixture(w) => CertRepr::SymmetrizedMixture {
                witness: WitnessRepr::from_witness(w),
            },
        }
    }

    pub fn to_locality_certificate(&self) -> bellactiv_core::Result<LocalityCertificate> {
        Ok(match self {
            CertRepr::TwoQubitHorodecki { value } => {
                LocalityCertificate::TwoQubitHorodecki { value: value.0 }
            }
            CertRepr::Extension { witness } => {
                LocalityCertificate::Extension(witness.to_witness()?)
            }
            CertRepr::SymmetrizedMixture { witness } => {
                LocalityCertificate::SymmetrizedMixture(witness.to_witness()?)
            }
        })
    }

    pub fn to_state_certificate(&self) -> bellactiv_core::Result<StateCertificate> {
        Ok(match self {
            CertRepr::TwoQubitHorodecki { .. } => {
                return Err(Error::InvalidConfig {
                    reason: "search certificates must carry an extension witness".into(),
                })
            }
            CertRepr::Extension { witness } => {
                StateCertificate::Extension(witness.to_witness()?)
            }
            CertRepr::SymmetrizedMixture { witness } => {
                StateCertificate::SymmetrizedMixture(witness.to_witness()?)
            }
        })
    }

    fn schema_check(&self) -> Result<(), String> {
        match self {
            CertRepr::TwoQubitHorodecki { .. } => Ok(()),
            CertRepr::Extension { witness } | CertRepr::SymmetrizedMixture { witness } => {
                witness.schema_check()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasurementsRepr {
    Dichotomic {
        alice: Vec<ObservableRepr>,
        bob: Vec<ObservableRepr>,
    },
    Povms {
        alice: Vec<PovmRepr>,
        bob: Vec<PovmRepr>,
    },
    /// Raw Hermitian observables with spectrum in [-1, 1]. Used by the
    /// measurements-only scenario, whose balanced observables pick up a
    /// zero eigenvalue in odd dimensions and so are not dichotomic.
    Observables {
        alice: Vec<MatrixRepr>,
        bob: Vec<MatrixRepr>,
    },
}

impl MeasurementsRepr {
    pub fn from_measurements(m: &SearchMeasurements) -> Self {
        match m {
            SearchMeasurements::Dichotomic { alice, bob } => MeasurementsRepr::Dichotomic {
                alice: alice.iter().map(ObservableRepr::from_observable).collect(),
                bob: bob.iter().map(ObservableRepr::from_observable).collect(),
            },
            SearchMeasurements::Povms { alice, bob } => MeasurementsRepr::Povms {
                alice: alice.iter().map(PovmRepr::from_povm).collect(),
                bob: bob.iter().map(PovmRepr::from_povm).collect(),
            },
        }
    }

    pub fn to_measurements(&self) -> bellactiv_core::Result<SearchMeasurements> {
        match self {
            MeasurementsRepr::Dichotomic { alice, bob } => {
                let build = |reprs: &[ObservableRepr]| -> bellactiv_core::Result<_> {
                    let v = reprs
                        .iter()
                        .map(|r| r.to_observable())
                        .collect::<bellactiv_core::Result<Vec<_>>>()?;
                    <[DichotomicObservable; 2]>::try_from(v).map_err(|v| Error::InvalidConfig {
                        reason: format!("expected 2 observables, got {}", v.len()),
                    })
                };
                Ok(SearchMeasurements::Dichotomic {
                    alice: build(alice)?,
                    bob: build(bob)?,
                })
            }
            MeasurementsRepr::Povms { alice, bob } => {
                let build = |reprs: &[PovmRepr]| {
                    reprs
                        .iter()
                        .map(|r| r.to_povm())
                        .collect::<bellactiv_core::Result<Vec<_>>>()
                };
                Ok(SearchMeasurements::Povms {
                    alice: build(alice)?,
                    bob: build(bob)?,
                })
            }
            MeasurementsRepr::Observables { .. } => Err(Error::InvalidConfig {
                reason: "raw observables do not form projective search measurements".into(),
            }),
        }
    }

    fn schema_check(&self) -> Result<(), String> {
        match self {
            MeasurementsRepr::Dichotomic { alice, bob } => {
                if alice.len() != 2 || bob.len() != 2 {
                    return Err(format!(
                        "dichotomic measurements need 2 settings per party, got {} and {}",
                        alice.len(),
                        bob.len()
                    ));
                }
                for o in alice.iter().chain(bob) {
                    o.schema_check()?;
                }
                Ok(())
            }
            MeasurementsRepr::Povms { alice, bob } => {
                if alice.is_empty() || bob.is_empty() {
                    return Err("POVM measurements need at least one setting per party".into());
                }
                for p in alice.iter().chain(bob) {
                    p.schema_check()?;
                }
                Ok(())
            }
            MeasurementsRepr::Observables { alice, bob } => {
                if alice.len() != 2 || bob.len() != 2 {
                    return Err(format!(
                        "observable measurements need 2 settings per party, got {} and {}",
                        alice.len(),
                        bob.len()
                    ));
                }
                for m in alice.iter().chain(bob) {
                    m.shape_check()?;
                    if m.rows != m.cols {
                        return Err("observables must be square".into());
                    }
                }
                Ok(())
            }
        }
    }
}

/// One conditional-measurement branch: a flag pattern and what it triggers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchRepr {
    pub pattern: Vec<usize>,
    pub branch: BranchKindRepr,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BranchKindRepr {
    ConstantPlus,
    Observable { proj_plus: MatrixRepr },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeRepr {
    pub ancilla_dims: Vec<usize>,
    pub main_factor_dims: Vec<usize>,
    pub branches: Vec<BranchRepr>,
}

impl SchemeRepr {
    pub fn from_scheme(s: &ConditionalScheme) -> Self {
        let branches = s
            .patterns()
            .map(|pattern| {
                let branch = match s.branch(&pattern).expect("complete scheme") {
                    Branch::ConstantPlus => BranchKindRepr::ConstantPlus,
                    Branch::Observable(obs) => BranchKindRepr::Observable {
                        proj_plus: MatrixRepr::from_cmat(obs.proj_plus()),
                    },
                };
                BranchRepr { pattern, branch }
            })
            .collect();
        Self {
            ancilla_dims: s.ancilla_dims().to_vec(),
            main_factor_dims: s.main_factor_dims().to_vec(),
            branches,
        }
    }

    pub fn to_scheme(&self) -> bellactiv_core::Result<ConditionalScheme> {
        let entries = self
            .branches
            .iter()
            .map(|b| {
                let branch = match &b.branch {
                    BranchKindRepr::ConstantPlus => Branch::ConstantPlus,
                    BranchKindRepr::Observable { proj_plus } => {
                        Branch::Observable(DichotomicObservable::new(proj_plus.to_cmat()?)?)
                    }
                };
                Ok((b.pattern.clone(), branch))
            })
            .collect::<bellactiv_core::Result<Vec<_>>>()?;
        ConditionalScheme::new(
            self.ancilla_dims.clone(),
            self.main_factor_dims.clone(),
            entries,
        )
    }

    fn schema_check(&self) -> Result<(), String> {
        if self.ancilla_dims.is_empty() || self.main_factor_dims.is_empty() {
            return Err("scheme needs at least one ancilla and one main factor".into());
        }
        if self.branches.is_empty() {
            return Err("scheme stores no branches".into());
        }
        for b in &self.branches {
            if b.pattern.len() != self.ancilla_dims.len() {
                return Err(format!(
                    "branch pattern {:?} does not match {} ancilla factors",
                    b.pattern,
                    self.ancilla_dims.len()
                ));
            }
            if let BranchKindRepr::Observable { proj_plus } = &b.branch {
                proj_plus.shape_check()?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchPayload {
    pub scenario: String,
    pub best_value: F17,
    pub converged: bool,
    pub seed_used: u64,
    pub rho1: StateRepr,
    /// Absent for the measurements-only scenario, which optimizes over a
    /// single fixed state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho2: Option<StateRepr>,
    pub measurements: MeasurementsRepr,
    /// Absent for the measurements-only scenario, where the fixed input
    /// state carries no locality certificate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cert1: Option<CertRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cert2: Option<CertRepr>,
    pub trace: Vec<F17>,
}

impl SearchPayload {
    pub fn from_result(r: &SearchResult) -> Self {
        Self {
            scenario: r.scenario.name().into(),
            best_value: F17(r.best_value),
            converged: r.converged,
            seed_used: r.seed_used,
            rho1: StateRepr::from_state(&r.rho1),
            rho2: Some(StateRepr::from_state(&r.rho2)),
            measurements: MeasurementsRepr::from_measurements(&r.measurements),
            cert1: Some(CertRepr::from_state_certificate(&r.cert1)),
            cert2: Some(CertRepr::from_state_certificate(&r.cert2)),
            trace: r.trace.iter().map(|&v| F17(v)).collect(),
        }
    }

    pub fn to_result(&self) -> bellactiv_core::Result<SearchResult> {
        let scenario = scenario_from_name(&self.scenario).ok_or_else(|| Error::InvalidConfig {
            reason: format!("unknown scenario {:?}", self.scenario),
        })?;
        let (cert1, cert2) = match (&self.cert1, &self.cert2) {
            (Some(c1), Some(c2)) => (c1.to_state_certificate()?, c2.to_state_certificate()?),
            _ => {
                return Err(Error::InvalidConfig {
                    reason: "search result without certificates cannot be reconstructed".into(),
                })
            }
        };
        let rho2 = self.rho2.as_ref().ok_or_else(|| Error::InvalidConfig {
            reason: "search result without a second state cannot be reconstructed".into(),
        })?;
        Ok(SearchResult {
            scenario,
            best_value: self.best_value.0,
            rho1: self.rho1.to_state()?,
            rho2: rho2.to_state()?,
            measurements: self.measurements.to_measurements()?,
            cert1,
            cert2,
            trace: self.trace.iter().map(|v| v.0).collect(),
            seed_used: self.seed_used,
            converged: self.converged,
        })
    }

    fn schema_check(&self) -> Result<(), String> {
        let Some(scenario) = scenario_from_name(&self.scenario) else {
            return Err(format!("unknown scenario {:?}", self.scenario));
        };
        self.rho1.schema_check()?;
        if let Some(rho2) = &self.rho2 {
            rho2.schema_check()?;
        }
        self.measurements.schema_check()?;
        for cert in self.cert1.iter().chain(&self.cert2) {
            cert.schema_check()?;
        }
        if self.trace.is_empty() {
            return Err("search trace must record at least the initial value".into());
        }
        let fixed_state = scenario == Scenario::ChshMeasurementsOnly;
        if fixed_state {
            if self.rho2.is_some() || self.cert1.is_some() || self.cert2.is_some() {
                return Err(
                    "chsh-meas-only stores a single state and no certificates".into()
                );
            }
        } else if self.rho2.is_none() || self.cert1.is_none() || self.cert2.is_none() {
            return Err(format!(
                "scenario {} stores two states with certificates",
                self.scenario
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairPayload {
    pub value: F17,
    pub sigma1: StateRepr,
    pub sigma2: StateRepr,
    pub alice: Vec<ObservableRepr>,
    pub bob: Vec<ObservableRepr>,
    pub cert1: CertRepr,
    pub cert2: CertRepr,
}

impl PairPayload {
    pub fn from_pair(p: &ActivationPair) -> Self {
        Self {
            value: F17(p.value()),
            sigma1: StateRepr::from_state(p.sigma1()),
            sigma2: StateRepr::from_state(p.sigma2()),
            alice: p.alice().iter().map(ObservableRepr::from_observable).collect(),
            bob: p.bob().iter().map(ObservableRepr::from_observable).collect(),
            cert1: CertRepr::from_locality_certificate(p.certificates().0),
            cert2: CertRepr::from_locality_certificate(p.certificates().1),
        }
    }

    /// Rebuilds the pair; certificate validation and the stored-value
    /// consistency check run as part of the constructor.
    pub fn to_pair(&self) -> bellactiv_core::Result<ActivationPair> {
        let build = |reprs: &[ObservableRepr]| -> bellactiv_core::Result<_> {
            let v = reprs
                .iter()
                .map(|r| r.to_observable())
                .collect::<bellactiv_core::Result<Vec<_>>>()?;
            <[DichotomicObservable; 2]>::try_from(v).map_err(|v| Error::InvalidConfig {
                reason: format!("expected 2 observables, got {}", v.len()),
            })
        };
        let pair = ActivationPair::new(
            self.sigma1.to_state()?,
            self.sigma2.to_state()?,
            build(&self.alice)?,
            build(&self.bob)?,
            self.cert1.to_locality_certificate()?,
            self.cert2.to_locality_certificate()?,
        )?;
        if (pair.value() - self.value.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "stored pair value {} differs from recomputed {}",
                    self.value.0,
                    pair.value()
                ),
            });
        }
        Ok(pair)
    }

    fn schema_check(&self) -> Result<(), String> {
        self.sigma1.schema_check()?;
        self.sigma2.schema_check()?;
        if self.alice.len() != 2 || self.bob.len() != 2 {
            return Err(format!(
                "activation pair needs 2 observables per party, got {} and {}",
                self.alice.len(),
                self.bob.len()
            ));
        }
        for o in self.alice.iter().chain(&self.bob) {
            o.schema_check()?;
        }
        self.cert1.schema_check()?;
        self.cert2.schema_check()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionPayload {
    /// One of "symmetric-embed", "self-activation", "combined".
    pub construction: String,
    /// Two states for the embedding, one (used for both copies) for the
    /// self-activating constructions.
    pub states: Vec<StateRepr>,
    pub alice_schemes: Vec<SchemeRepr>,
    pub bob_schemes: Vec<SchemeRepr>,
    /// Two-copy CHSH value of the construction.
    pub value: F17,
    /// CHSH value 2+Δ of the input pair the construction was compiled from.
    pub input_value: F17,
}

impl ConstructionPayload {
    fn schema_check(&self) -> Result<(), String> {
        match self.construction.as_str() {
            "symmetric-embed" => {
                if self.states.len() != 2 {
                    return Err("symmetric-embed stores two states".into());
                }
            }
            "self-activation" | "combined" => {
                if self.states.len() != 1 {
                    return Err(format!("{} stores one state", self.construction));
                }
            }
            other => return Err(format!("unknown construction {other:?}")),
        }
        for s in &self.states {
            s.schema_check()?;
        }
        if self.alice_schemes.len() != 2 || self.bob_schemes.len() != 2 {
            return Err("constructions need 2 schemes per party".into());
        }
        for s in self.alice_schemes.iter().chain(&self.bob_schemes) {
            s.schema_check()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    State(StateRepr),
    Observable(ObservableRepr),
    Povm(PovmRepr),
    ActivationPair(PairPayload),
    SearchResult(SearchPayload),
    Construction(ConstructionPayload),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::State(_) => "state",
            Payload::Observable(_) => "observable",
            Payload::Povm(_) => "povm",
            Payload::ActivationPair(_) => "activation_pair",
            Payload::SearchResult(_) => "search_result",
            Payload::Construction(_) => "construction",
        }
    }

    fn schema_check(&self) -> Result<(), String> {
        match self {
            Payload::State(p) => p.schema_check(),
            Payload::Observable(p) => p.schema_check(),
            Payload::Povm(p) => p.schema_check(),
            Payload::ActivationPair(p) => p.schema_check(),
            Payload::SearchResult(p) => p.schema_check(),
            Payload::Construction(p) => p.schema_check(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, F17>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, F17>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactFile {
    pub format: String,
    pub version: String,
    pub metadata: Metadata,
    #[serde(flatten)]
    pub payload: Payload,
}

impl ArtifactFile {
    pub fn new(payload: Payload, metadata: Metadata) -> Self {
        Self {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION.into(),
            metadata,
            payload,
        }
    }

    pub fn to_json(&self) -> Result<String, Failure> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Failure::Io(format!("cannot serialize artifact: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let artifact: ArtifactFile =
            serde_json::from_str(text).map_err(|e| Failure::Parse(e.to_string()))?;
        if artifact.format != FORMAT_NAME {
            return Err(Failure::Parse(format!(
                "not a {FORMAT_NAME} file (format field is {:?})",
                artifact.format
            )));
        }
        if artifact.version != FORMAT_VERSION {
            return Err(Failure::Parse(format!(
                "unsupported format version {:?} (this build reads {FORMAT_VERSION})",
                artifact.version
            )));
        }
        artifact
            .payload
            .schema_check()
            .map_err(Failure::Parse)?;
        Ok(artifact)
    }

    pub fn save(&self, path: &Path) -> Result<(), Failure> {
        let text = self.to_json()?;
        fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
            .map_err(|f| f.with_context(&path.display().to_string()))
    }
}

impl fmt::Display for ArtifactFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} v{} [{}]", self.format, self.version, self.payload.kind())
    }
}

pub fn scenario_from_name(name: &str) -> Option<Scenario> {
    [
        Scenario::ChshAsymmetric,
        Scenario::ChshSymmetricMixture,
        Scenario::ChshMeasurementsOnly,
        Scenario::Cglmp3Asymmetric,
    ]
    .into_iter()
    .find(|s| s.name() == name)
}
