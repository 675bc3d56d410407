//! Public setup shared by all parties of a session, and party construction from seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use super::eckap::{decode_family, encode_family};
use super::{Chain, CkapParty, EckapParty, EckapSetup, FamilyPair, MultiParty, Party, ProtocolKind, Role};
use crate::category::{CategoryModel, Morphism};
use crate::error::{Error, Result};
use crate::matrix::{decode_hom_matrix, encode_hom_matrix};

/// Seed of the fixed generator used to re-check family commutation while decoding.
const VERIFY_SEED: u64 = 0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PublicSetup<P> {
    Ckap { g: Morphism<P> },
    Eckap(EckapSetup<P>),
    Multi(Chain<P>),
}

impl<P: Clone + PartialEq> PublicSetup<P> {
    pub fn kind(&self) -> ProtocolKind {
        match self {
            Self::Ckap { .. } => ProtocolKind::Ckap,
            Self::Eckap(_) => ProtocolKind::Eckap,
            Self::Multi(_) => ProtocolKind::Multi,
        }
    }

    pub fn parties(&self) -> usize {
        match self {
            Self::Multi(chain) => chain.parties(),
            _ => 2,
        }
    }

    pub fn encode<C>(&self, model: &C) -> Value
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        match self {
            Self::Ckap { g } => json!({
                "g": {
                    "hom": model.hom_tag(g.dom(), g.cod()),
                    "payload": model.encode(g),
                }
            }),
            Self::Eckap(s) => json!({
                "phi": encode_hom_matrix(model, &s.phi),
                "families": {
                    "alice": {
                        "psi": encode_family(model, &s.alice.psi),
                        "omega": encode_family(model, &s.alice.omega),
                    },
                    "bob": {
                        "psi": encode_family(model, &s.bob.psi),
                        "omega": encode_family(model, &s.bob.omega),
                    },
                },
            }),
            Self::Multi(chain) => chain.encode(model),
        }
    }

    /// Decodes and validates a public setup; families must still commute.
    pub fn decode<C>(model: &C, kind: ProtocolKind, value: &Value) -> Result<Self>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        match kind {
            ProtocolKind::Ckap => {
                let hom = value["g"]["hom"]
                    .as_str()
                    .ok_or_else(|| Error::Decode("public g lacks a hom tag".into()))?;
                let (d, c) = hom
                    .split_once("->")
                    .ok_or_else(|| Error::Decode(format!("bad hom tag {hom}")))?;
                let g = model.decode(
                    model.object_by_name(d)?,
                    model.object_by_name(c)?,
                    &value["g"]["payload"],
                )?;
                Ok(Self::Ckap { g })
            }
            ProtocolKind::Eckap => {
                let phi = decode_hom_matrix(model, &value["phi"])?;
                let fams = &value["families"];
                let pair = |who: &str| -> Result<FamilyPair<P>> {
                    Ok(FamilyPair {
                        psi: decode_family(model, &fams[who]["psi"])?,
                        omega: decode_family(model, &fams[who]["omega"])?,
                    })
                };
                let mut rng = ChaCha20Rng::seed_from_u64(VERIFY_SEED);
                Ok(Self::Eckap(EckapSetup::new(
                    model,
                    phi,
                    pair("alice")?,
                    pair("bob")?,
                    &mut rng,
                )?))
            }
            ProtocolKind::Multi => Ok(Self::Multi(Chain::decode(model, value)?)),
        }
    }
}

/// One state machine per party, each with its own seeded generator.
pub fn make_parties<'a, C>(
    model: &'a C,
    setup: &PublicSetup<C::Payload>,
    session: &str,
    seeds: &[u64],
) -> Result<Vec<Box<dyn Party + 'a>>>
where
    C: CategoryModel + ?Sized,
{
    if seeds.len() != setup.parties() {
        return Err(Error::InvalidParams(format!(
            "{} parties need {} seeds, got {}",
            setup.parties(),
            setup.parties(),
            seeds.len()
        )));
    }
    let rng = |i: usize| ChaCha20Rng::seed_from_u64(seeds[i]);
    let mut out: Vec<Box<dyn Party + 'a>> = Vec::with_capacity(seeds.len());
    match setup {
        PublicSetup::Ckap { g } => {
            for (i, role) in [Role::Alice, Role::Bob].into_iter().enumerate() {
                out.push(Box::new(CkapParty::new(model, role, session, g.clone(), &mut rng(i))?));
            }
        }
        PublicSetup::Eckap(s) => {
            for (i, role) in [Role::Alice, Role::Bob].into_iter().enumerate() {
                out.push(Box::new(EckapParty::new(model, role, session, s, &mut rng(i))?));
            }
        }
        PublicSetup::Multi(chain) => {
            for i in 1..=chain.parties() {
                out.push(Box::new(MultiParty::new(
                    model,
                    i,
                    session,
                    chain.clone(),
                    &mut rng(i - 1),
                )?));
            }
        }
    }
    Ok(out)
}
