//! Transcript documents: header, ordered messages, outcome block, digest.
//!
//! The digest is SHA-256 over the compact JSON of the transcript with an
//! empty `digest` field, so any edit to a stored transcript is detected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::eckap::EckapSetup;
use super::{make_parties, party_names, Message, ProtocolKind, PublicSetup};
use crate::category::CategoryModel;
use crate::enrichment::FreeEnrichment;
use crate::error::{Error, Result};
use crate::matrix::{decode_hom_matrix, encode_hom_matrix, HomMatrix};

/// Registry name and parameter document of an instantiation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub name: String,
    pub params: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TranscriptRole {
    /// Written by the session driver; may disclose keys and seeds.
    Session,
    /// What a passive eavesdropper holds: public setup and messages only.
    View,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub session: String,
    pub protocol: ProtocolKind,
    pub instance: InstanceSpec,
    pub model: String,
    pub public: Value,
    pub parties: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub agreement: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keys: Option<BTreeMap<String, Value>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub role: TranscriptRole,
    pub header: Header,
    pub messages: Vec<Message>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    pub digest: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Session identifier: a SHA-256 prefix over everything public about the session.
pub fn session_id(
    protocol: ProtocolKind,
    instance: &InstanceSpec,
    model: &str,
    public: &Value,
    parties: &[String],
) -> String {
    let doc = serde_json::json!({
        "protocol": protocol,
        "instance": instance,
        "model": model,
        "public": public,
        "parties": parties,
    });
    let bytes = serde_json::to_vec(&doc).expect("json value serializes");
    hex(&Sha256::digest(bytes)[..8])
}

impl Transcript {
    /// Sorts messages by sequence number and computes the digest.
    pub fn seal(
        role: TranscriptRole,
        header: Header,
        mut messages: Vec<Message>,
        outcome: Option<Outcome>,
    ) -> Self {
        messages.sort_by_key(|m| m.seq);
        let mut t = Self {
            role,
            header,
            messages,
            outcome,
            digest: String::new(),
        };
        t.digest = t.compute_digest();
        t
    }

    pub fn compute_digest(&self) -> String {
        let mut blank = self.clone();
        blank.digest.clear();
        let bytes = serde_json::to_vec(&blank).expect("transcript serializes");
        hex(&Sha256::digest(bytes))
    }

    pub fn digest_ok(&self) -> bool {
        self.digest == self.compute_digest()
    }

    /// The eavesdropper's copy: no seeds, no keys.
    pub fn view(&self) -> Self {
        let mut header = self.header.clone();
        header.seeds = None;
        Self::seal(TranscriptRole::View, header, self.messages.clone(), None)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("transcript serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Decode(format!("transcript: {e}")))
    }

    /// The message sent by `sender`, if any (first in sequence order).
    pub fn message_from(&self, sender: &str) -> Option<&Message> {
        self.messages.iter().find(|m| m.sender == sender)
    }
}

/// What [`verify_transcript`] established.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    /// Every message decoded into its expected hom-set with the expected envelope.
    pub messages_valid: bool,
    /// Recomputed from disclosed keys; `None` when keys are redacted.
    pub agreement: Option<bool>,
    /// Whether disclosed seeds were replayed to reproduce the messages.
    pub replayed: bool,
    pub problems: Vec<String>,
}

impl VerifyReport {
    pub fn consistent(&self) -> bool {
        self.messages_valid && self.problems.is_empty() && self.agreement != Some(false)
    }
}

fn decode_key<C: CategoryModel + ?Sized>(
    model: &C,
    setup: &PublicSetup<C::Payload>,
    key: &Value,
) -> Result<()> {
    match setup {
        PublicSetup::Ckap { g } => model.decode(g.dom(), g.cod(), key).map(|_| ()),
        PublicSetup::Eckap(s) => {
            let k = decode_hom_matrix(model, key)?;
            if (k.rows(), k.cols(), k.dom(), k.cod())
                != (s.phi.rows(), s.phi.cols(), s.phi.dom(), s.phi.cod())
            {
                return Err(Error::ShapeMismatch("key matrix does not match φ".into()));
            }
            Ok(())
        }
        PublicSetup::Multi(chain) => {
            let (first, last) = (chain.object(1), chain.object(chain.parties()));
            model.decode(first, last, key).map(|_| ())
        }
    }
}

/// Re-validates a transcript against `model`.
///
/// Checks the digest and session id, decodes the public setup, checks every
/// message envelope against the protocol's fan-out and decodes its payload
/// into the expected hom-set, decodes disclosed keys and recomputes
/// agreement, and replays the session when seeds are disclosed.
pub fn verify_transcript<C: CategoryModel + ?Sized>(model: &C, t: &Transcript) -> VerifyReport {
    let mut report = VerifyReport::default();
    if !t.digest_ok() {
        report.problems.push("digest does not match contents".into());
    }
    let h = &t.header;
    if h.model != model.model_id() {
        report
            .problems
            .push(format!("model `{}` differs from `{}`", h.model, model.model_id()));
    }
    if h.session != session_id(h.protocol, &h.instance, &h.model, &h.public, &h.parties) {
        report.problems.push("session id does not match header".into());
    }
    let setup = match PublicSetup::decode(model, h.protocol, &h.public) {
        Ok(s) => s,
        Err(e) => {
            report.problems.push(format!("public setup: {e}"));
            return report;
        }
    };
    if h.parties != party_names(h.protocol, setup.parties()) {
        report.problems.push("party list does not match the protocol".into());
    }

    // Envelopes from stand-in parties; their secrets never touch the check.
    let dummy_seeds = vec![0; setup.parties()];
    let mut checkers = match make_parties(model, &setup, &h.session, &dummy_seeds) {
        Ok(p) => p,
        Err(e) => {
            report.problems.push(format!("cannot build parties: {e}"));
            return report;
        }
    };
    let mut expected = Vec::new();
    for p in checkers.iter_mut() {
        match p.offers() {
            Ok(msgs) => expected.extend(msgs),
            Err(e) => report.problems.push(format!("cannot derive envelopes: {e}")),
        }
    }
    expected.sort_by_key(|m| m.seq);
    let envelope = |m: &Message| (m.session.clone(), m.sender.clone(), m.seq, m.to.clone(), m.direction);
    let mut valid = expected.len() == t.messages.len();
    if !valid {
        report.problems.push(format!(
            "expected {} messages, found {}",
            expected.len(),
            t.messages.len()
        ));
    }
    for (want, got) in expected.iter().zip(&t.messages) {
        if envelope(want) != envelope(got) {
            valid = false;
            report.problems.push(format!(
                "message #{} from {} has an unexpected envelope",
                got.seq, got.sender
            ));
            continue;
        }
        for to in &got.to {
            if let Some(p) = checkers.iter_mut().find(|p| p.id() == to) {
                if let Err(e) = p.receive(got) {
                    valid = false;
                    report.problems.push(format!("message #{} to {to}: {e}", got.seq));
                }
            }
        }
    }
    report.messages_valid = valid;

    if let Some(outcome) = &t.outcome {
        if let Some(keys) = &outcome.keys {
            let mut ok = keys.len() == h.parties.len() && h.parties.iter().all(|p| keys.contains_key(p));
            for (who, key) in keys {
                if let Err(e) = decode_key(model, &setup, key) {
                    ok = false;
                    report.problems.push(format!("key of {who}: {e}"));
                }
            }
            let first = keys.values().next();
            let agree = ok && keys.values().all(|k| Some(k) == first);
            if agree != outcome.agreement {
                report.problems.push("agreement flag disagrees with the disclosed keys".into());
            }
            report.agreement = Some(agree);
        }
    }

    if let Some(seeds) = &h.seeds {
        match replay(model, &setup, &h.session, seeds) {
            Ok((messages, keys)) => {
                report.replayed = true;
                if messages != t.messages {
                    report.problems.push("replayed messages differ".into());
                }
                if let Some(disclosed) = t.outcome.as_ref().and_then(|o| o.keys.as_ref()) {
                    if *disclosed != keys {
                        report.problems.push("replayed keys differ".into());
                    }
                }
            }
            Err(e) => report.problems.push(format!("replay failed: {e}")),
        }
    }
    report
}

type Replay = (Vec<Message>, BTreeMap<String, Value>);

/// Runs every party locally: all offers, direct delivery, all keys.
pub fn replay<C: CategoryModel + ?Sized>(
    model: &C,
    setup: &PublicSetup<C::Payload>,
    session: &str,
    seeds: &[u64],
) -> Result<Replay> {
    let mut parties = make_parties(model, setup, session, seeds)?;
    let mut messages = Vec::new();
    for p in parties.iter_mut() {
        messages.extend(p.offers()?);
    }
    messages.sort_by_key(|m| m.seq);
    for m in &messages {
        for to in &m.to {
            let p = parties
                .iter_mut()
                .find(|p| p.id() == to)
                .ok_or_else(|| Error::DeliveryFailure(format!("no party named {to}")))?;
            p.receive(m)?;
        }
    }
    let mut keys = BTreeMap::new();
    for p in parties.iter_mut() {
        keys.insert(p.id().to_string(), p.finalize()?);
    }
    Ok((messages, keys))
}

/// Rewrites a two-party transcript over `C` as the `1 x 1` matrix transcript over `T(C)`.
///
/// Every payload `x` becomes the `1 x 1` matrix holding the formal sum `1·x`,
/// the public setup becomes [`EckapSetup::reduction`] on the lifted `g`, and
/// the session id and digest are recomputed. The result is what a matrix
/// session over `T(C)` with the same seeds writes, byte for byte.
pub fn lift_ckap_transcript<C: CategoryModel>(
    t: &FreeEnrichment<C>,
    transcript: &Transcript,
    instance: InstanceSpec,
) -> Result<Transcript> {
    let base = t.base();
    let h = &transcript.header;
    if h.protocol != ProtocolKind::Ckap {
        return Err(Error::InvalidParams("only two-party transcripts lift".into()));
    }
    let PublicSetup::Ckap { g } = PublicSetup::decode(base, ProtocolKind::Ckap, &h.public)? else {
        unreachable!("decoded with the two-party kind");
    };
    let lift_value = |v: &Value| -> Result<Value> {
        let m = base.decode(g.dom(), g.cod(), v)?;
        Ok(encode_hom_matrix(t, &HomMatrix::from_morphism(&t.lift(&m)?)))
    };
    let setup = PublicSetup::Eckap(EckapSetup::reduction(t, &t.lift(&g)?)?);
    let public = setup.encode(t);
    let model = t.model_id();
    let session = session_id(ProtocolKind::Eckap, &instance, &model, &public, &h.parties);
    let messages = transcript
        .messages
        .iter()
        .map(|m| {
            Ok(Message {
                session: session.clone(),
                payload: lift_value(&m.payload)?,
                ..m.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let outcome = match &transcript.outcome {
        None => None,
        Some(o) => Some(Outcome {
            agreement: o.agreement,
            keys: match &o.keys {
                None => None,
                Some(keys) => Some(
                    keys.iter()
                        .map(|(k, v)| Ok((k.clone(), lift_value(v)?)))
                        .collect::<Result<BTreeMap<_, _>>>()?,
                ),
            },
        }),
    };
    let header = Header {
        session,
        protocol: ProtocolKind::Eckap,
        instance,
        model,
        public,
        parties: h.parties.clone(),
        seeds: h.seeds.clone(),
    };
    Ok(Transcript::seal(transcript.role, header, messages, outcome))
}
