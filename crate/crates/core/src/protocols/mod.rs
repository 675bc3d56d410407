//! Protocol state machines: two-party CKAP, matrix ECKAP, and the `n`-party chain protocol.
//!
//! Each party computes all of its outgoing messages up front from its secret
//! and the public setup, so offers can be exchanged in any order. Messages
//! carry sequence numbers that fix their position in a transcript.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

pub mod ckap;
pub mod config;
pub mod eckap;
pub mod multi;
pub mod setup;
pub mod transcript;

pub use ckap::{ckap_finalize, ckap_offer, CkapParty, Role};
pub use config::{EckapOptions, FamilyMode, SessionConfig};
pub use eckap::{eckap_finalize, eckap_offer, EckapParty, EckapSetup, FamilyPair};
pub use multi::{multiparty_finalize, multiparty_messages, Chain, MultiParty, Outgoing};
pub use setup::{make_parties, PublicSetup};
pub use transcript::{
    lift_ckap_transcript, verify_transcript, Header, InstanceSpec, Outcome, Transcript,
    TranscriptRole, VerifyReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Ckap,
    Eckap,
    Multi,
}

impl ProtocolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ckap => "ckap",
            Self::Eckap => "eckap",
            Self::Multi => "multi",
        }
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ckap" => Ok(Self::Ckap),
            "eckap" => Ok(Self::Eckap),
            "multi" => Ok(Self::Multi),
            other => Err(crate::error::Error::InvalidParams(format!(
                "unknown protocol `{other}` (expected ckap, eckap or multi)"
            ))),
        }
    }
}

/// What a message carries, relative to the protocol's public chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// A two-party offer.
    Offer,
    /// `g_i f_i`, sent to every later party.
    Upstream,
    /// `f_i g_{i-1}`, sent to every earlier party.
    Downstream,
}

/// One public message on the channel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub session: String,
    pub sender: String,
    pub seq: u64,
    pub to: Vec<String>,
    pub direction: Direction,
    pub payload: Value,
}

/// A party's single-owner state machine.
pub trait Party {
    fn id(&self) -> &str;

    /// All messages this party sends; computed from its secret alone.
    fn offers(&mut self) -> Result<Vec<Message>>;

    /// Accepts one delivered message after validating it.
    fn receive(&mut self, msg: &Message) -> Result<()>;

    /// The derived key, canonically encoded.
    fn finalize(&mut self) -> Result<Value>;
}

pub const ALICE: &str = "alice";
pub const BOB: &str = "bob";

/// Name of the `i`-th party (1-based) of a multi-party session.
pub fn party_name(i: usize) -> String {
    format!("P{i}")
}

/// Party names for a session of the given kind.
pub fn party_names(kind: ProtocolKind, parties: usize) -> Vec<String> {
    match kind {
        ProtocolKind::Ckap | ProtocolKind::Eckap => vec![ALICE.into(), BOB.into()],
        ProtocolKind::Multi => (1..=parties).map(party_name).collect(),
    }
}
