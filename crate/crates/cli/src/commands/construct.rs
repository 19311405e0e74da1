//! `bellactiv construct`: compiles the flag-based constructions from an
//! activation-pair artifact and writes the resulting states and
//! conditional measurement schemes.

use std::path::Path;

use bellactiv_core::construct::{
    combined_construction, self_activation_state, symmetric_embed, ActivationPair,
    ConditionalScheme,
};
use bellactiv_core::bell::QState;

use crate::artifact::{
    ArtifactFile, ConstructionPayload, Metadata, Payload, SchemeRepr, StateRepr, F17,
};
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    SymmetricEmbed,
    SelfActivation,
    Combined,
}

impl Construction {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "symmetric-embed" => Some(Self::SymmetricEmbed),
            "self-activation" => Some(Self::SelfActivation),
            "combined" => Some(Self::Combined),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::SymmetricEmbed => "symmetric-embed",
            Self::SelfActivation => "self-activation",
            Self::Combined => "combined",
        }
    }

    /// The exact value each construction reaches from an input pair at
    /// 2 + delta.
    pub fn expected_value(self, input_value: f64) -> f64 {
        let delta = input_value - 2.0;
        match self {
            Self::SymmetricEmbed | Self::SelfActivation => 2.0 + delta / 2.0,
            Self::Combined => 2.0 + delta / 4.0,
        }
    }
}

pub fn run(construction: &str, input: &Path, out: &Path) -> Result<(), Failure> {
    let which = Construction::parse(construction).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown construction {construction:?} (expected symmetric-embed, \
             self-activation or combined)"
        ))
    })?;
    let artifact = ArtifactFile::load(input)?;
    let pair = match &artifact.payload {
        Payload::ActivationPair(p) => p.to_pair().map_err(Failure::from_core)?,
        other => {
            return Err(Failure::Usage(format!(
                "construct expects an activation_pair artifact, {} holds {}",
                input.display(),
                other.kind()
            )))
        }
    };

    let (states, alice, bob, value) = build(which, &pair)?;

    let expected = which.expected_value(pair.value());
    println!("construction  {}", which.name());
    println!("input value   {:.12} (delta {:.6e})", pair.value(), pair.delta());
    println!("output value  {value:.12}");
    println!(
        "exact ratio   expected {:.12}, deviation {:.3e}",
        expected,
        (value - expected).abs()
    );

    let payload = ConstructionPayload {
        construction: which.name().into(),
        states: states.iter().map(StateRepr::from_state).collect(),
        alice_schemes: alice.iter().map(SchemeRepr::from_scheme).collect(),
        bob_schemes: bob.iter().map(SchemeRepr::from_scheme).collect(),
        value: F17(value),
        input_value: F17(pair.value()),
    };
    let mut metadata = Metadata::default();
    metadata.values.insert("value".into(), F17(value));
    metadata
        .values
        .insert("input_value".into(), F17(pair.value()));
    metadata
        .values
        .insert("expected_value".into(), F17(expected));
    let out_artifact = ArtifactFile::new(Payload::Construction(payload), metadata);
    out_artifact.save(out)?;
    println!("wrote {}", out.display());
    Ok(())
}

type Built = (
    Vec<QState>,
    [ConditionalScheme; 2],
    [ConditionalScheme; 2],
    f64,
);

fn build(which: Construction, pair: &ActivationPair) -> Result<Built, Failure> {
    match which {
        Construction::SymmetricEmbed => {
            let e = symmetric_embed(pair).map_err(Failure::from_core)?;
            Ok((
                vec![e.rho1.clone(), e.rho2.clone()],
                e.alice_schemes.clone(),
                e.bob_schemes.clone(),
                e.value,
            ))
        }
        Construction::SelfActivation => {
            let s = self_activation_state(pair).map_err(Failure::from_core)?;
            Ok((
                vec![s.sigma.clone()],
                s.alice_schemes.clone(),
                s.bob_schemes.clone(),
                s.two_copy_value,
            ))
        }
        Construction::Combined => {
            let c = combined_construction(pair).map_err(Failure::from_core)?;
            Ok((
                vec![c.sigma.clone()],
                c.alice_schemes.clone(),
                c.bob_schemes.clone(),
                c.two_copy_value,
            ))
        }
    }
}
