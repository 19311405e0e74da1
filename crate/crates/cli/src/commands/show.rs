//! `bellactiv show`: formatted dump of an artifact — dims, spectra,
//! purity, stored values, certificates. Works from the raw payload so
//! that even artifacts violating numerical invariants can be inspected.

use std::path::Path;

use bellactiv_core::qmat::herm_eig;
use bellactiv_core::CMat;

use crate::artifact::{
    ArtifactFile, CertRepr, DimsRepr, MatrixRepr, MeasurementsRepr, Payload, StateRepr,
};
use crate::Failure;

pub fn run(path: &Path) -> Result<(), Failure> {
    let artifact = ArtifactFile::load(path)?;
    println!("artifact {}", path.display());
    println!("format   {} v{}", artifact.format, artifact.version);
    println!("kind     {}", artifact.payload.kind());
    if let Some(d) = &artifact.metadata.description {
        println!("note     {d}");
    }
    if let Some(s) = &artifact.metadata.scenario {
        println!("scenario {s}");
    }
    if let Some(seed) = artifact.metadata.seed {
        println!("seed     {seed}");
    }
    for (key, value) in &artifact.metadata.values {
        println!("value    {key} = {:.12}", value.0);
    }
    for (key, value) in &artifact.metadata.tolerances {
        println!("tol      {key} = {:.1e}", value.0);
    }

    match &artifact.payload {
        Payload::State(repr) => show_state("state", repr),
        Payload::Observable(repr) => {
            show_spectrum("observable", &repr.proj_plus, Form::Observable)
        }
        Payload::Povm(repr) => {
            println!("povm     dim {}, {} outcomes", repr.dim, repr.elements.len());
            for (b, m) in repr.elements.iter().enumerate() {
                show_spectrum(&format!("element {b}"), m, Form::Plain);
            }
        }
        Payload::ActivationPair(p) => {
            println!("pair     CHSH value {:.12} (delta {:.6e})", p.value.0, p.value.0 - 2.0);
            show_state("sigma1", &p.sigma1);
            show_state("sigma2", &p.sigma2);
            show_certificate("cert1", &p.cert1);
            show_certificate("cert2", &p.cert2);
        }
        Payload::SearchResult(p) => {
            println!("search   scenario {}, best value {:.12}", p.scenario, p.best_value.0);
            println!(
                "         restart seed {}, {}",
                p.seed_used,
                if p.converged { "converged" } else { "stopped at the cycle cap" }
            );
            show_state("rho1", &p.rho1);
            if let Some(rho2) = &p.rho2 {
                show_state("rho2", rho2);
            }
            match &p.measurements {
                MeasurementsRepr::Dichotomic { alice, bob } => {
                    println!("meas     dichotomic, {} + {} settings", alice.len(), bob.len());
                }
                MeasurementsRepr::Povms { alice, bob } => {
                    let outcomes: Vec<usize> =
                        alice.iter().chain(bob).map(|p| p.elements.len()).collect();
                    println!("meas     POVMs with outcomes {outcomes:?}");
                }
                MeasurementsRepr::Observables { alice, bob } => {
                    println!("meas     raw observables, {} + {} settings", alice.len(), bob.len());
                }
            }
            if let Some(c) = &p.cert1 {
                show_certificate("cert1", c);
            }
            if let Some(c) = &p.cert2 {
                show_certificate("cert2", c);
            }
            show_trace(&p.trace);
        }
        Payload::Construction(p) => {
            println!(
                "constr   {} from input value {:.12}",
                p.construction, p.input_value.0
            );
            println!("         two-copy value {:.12}", p.value.0);
            for (i, s) in p.states.iter().enumerate() {
                show_state(&format!("state{}", i + 1), s);
            }
            for (party, schemes) in [("alice", &p.alice_schemes), ("bob", &p.bob_schemes)] {
                for (i, s) in schemes.iter().enumerate() {
                    let constant = s
                        .branches
                        .iter()
                        .filter(|b| matches!(b.branch, crate::artifact::BranchKindRepr::ConstantPlus))
                        .count();
                    println!(
                        "scheme   {party}[{i}]: flags {:?} over mains {:?}, {} branches ({constant} constant)",
                        s.ancilla_dims,
                        s.main_factor_dims,
                        s.branches.len()
                    );
                }
            }
        }
    }
    Ok(())
}

fn dims_label(dims: &DimsRepr) -> String {
    dims.iter()
        .map(|(d, p)| format!("{d}({p})"))
        .collect::<Vec<_>>()
        .join(" x ")
}

enum Form {
    Plain,
    State,
    Observable,
}

fn show_state(label: &str, repr: &StateRepr) {
    println!("{label:<8} dims {}", dims_label(&repr.dims));
    show_spectrum(label, &repr.matrix, Form::State);
}

fn show_spectrum(label: &str, repr: &MatrixRepr, form: Form) {
    let m = match repr.to_cmat() {
        Ok(m) => m,
        Err(e) => {
            println!("{label:<8} unreadable matrix: {e}");
            return;
        }
    };
    if matches!(form, Form::Observable) {
        // Spectrum of the observable 2P - I, not of the projector.
        let obs = &m.scale_re(2.0) - &CMat::identity(m.rows());
        print_eigs(label, &obs);
        return;
    }
    print_eigs(label, &m);
    if matches!(form, Form::State) {
        let purity = m.matmul(&m).trace().re;
        println!("{label:<8} purity {purity:.12}");
    }
}

fn print_eigs(label: &str, m: &CMat) {
    match herm_eig(&m.hermitian_part()) {
        Ok(eig) => {
            let line = eig
                .values
                .iter()
                .map(|v| format!("{v:.10}"))
                .collect::<Vec<_>>()
                .join(" ");
            let sum: f64 = eig.values.iter().sum();
            println!("{label:<8} spectrum {line}");
            println!("{label:<8} spectrum sum {sum:.12}");
        }
        Err(e) => println!("{label:<8} spectrum unavailable: {e}"),
    }
}

fn show_trace(trace: &[crate::artifact::F17]) {
    println!("trace    {} cycle values", trace.len());
    let mut line = String::from("        ");
    for (i, v) in trace.iter().enumerate() {
        line.push_str(&format!(" {:.9}", v.0));
        if (i + 1) % 6 == 0 || i + 1 == trace.len() {
            println!("{line}");
            line = String::from("        ");
        }
    }
}

fn show_certificate(label: &str, cert: &CertRepr) {
    match cert {
        CertRepr::TwoQubitHorodecki { value } => {
            println!("{label:<8} two-qubit Horodecki maximum {:.12}", value.0);
        }
        CertRepr::Extension { witness } => {
            println!(
                "{label:<8} {}-side extension on dims {}",
                witness.side,
                dims_label(&witness.ext.dims)
            );
        }
        CertRepr::SymmetrizedMixture { witness } => {
            println!(
                "{label:<8} symmetrized mixture of a {}-side extendible state on dims {}",
                witness.side,
                dims_label(&witness.ext.dims)
            );
        }
    }
}
