//! Numerical toolkit for hunting down activation of Bell non-locality:
//! states that admit a local model for two-setting correlation tests, yet
//! violate the CHSH inequality once several copies are measured jointly.
//!
//! The crate is layered bottom-up:
//!
//! * [`qmat`] — dense complex matrices, tensor-factor bookkeeping, Hermitian
//!   spectral decompositions, seeded random ensembles;
//! * [`bell`] — states, dichotomic observables, POVMs, Bell functionals and
//!   their operators, behavior tables, classical bounds, the two-qubit CHSH
//!   maximum in closed form;
//! * [`extend`] — two-symmetric extensions: reduction and symmetrization of
//!   Bell operators, extremal extendible states, certificates, tensor
//!   products of extensions, and explicit local models;
//! * [`seesaw`] — alternating optimization of measurements and states over
//!   the extendible set, with multi-restart search drivers;
//! * [`construct`] — flag-based constructions that turn one activation
//!   instance into new ones (embedding, self-activation, composition).

pub mod bell;
pub mod construct;
pub mod error;
pub mod extend;
pub mod qmat;
pub mod seesaw;
pub mod tol;

pub use error::{Error, Result};
pub use qmat::{CMat, DimsSpec, Party, C64};
