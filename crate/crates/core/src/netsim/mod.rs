//! A simulated network: a broker that delivers messages between parties,
//! passive taps, session driving, and exhaustive-search attacks at toy sizes.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::category::Diagnostic;
use crate::error::{Error, Result};
use crate::protocols::transcript::session_id;
use crate::protocols::{
    make_parties, party_names, Header, Message, Outcome, Party, ProtocolKind, SessionConfig,
    Transcript, TranscriptRole,
};
use crate::registry::{build_setup, setup_diagnostics, Instance, Platform};
use crate::with_model;

pub mod attack;

pub use attack::{brute_force_dh, brute_force_generic, AttackOutcome, SEARCH_CEILING};

/// Order in which the broker hands queued messages to their recipients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeliveryPolicy {
    /// Sequence-number order.
    InOrder,
    /// A seeded permutation of the queue.
    Shuffle { seed: u64 },
}

/// One hand-off recorded by the broker.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub seq: u64,
    pub sender: String,
    pub to: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TapId(usize);

/// Routes messages between registered parties; taps see every message.
#[derive(Debug)]
pub struct Broker {
    policy: DeliveryPolicy,
    taps: Vec<Vec<Message>>,
    log: Vec<Delivery>,
}

impl Default for Broker {
    fn default() -> Self {
        Self::new(DeliveryPolicy::InOrder)
    }
}

impl Broker {
    pub fn new(policy: DeliveryPolicy) -> Self {
        Self {
            policy,
            taps: Vec::new(),
            log: Vec::new(),
        }
    }

    /// A passive observer; it records but cannot alter or inject.
    pub fn add_tap(&mut self) -> TapId {
        self.taps.push(Vec::new());
        TapId(self.taps.len() - 1)
    }

    pub fn tapped(&self, tap: TapId) -> &[Message] {
        &self.taps[tap.0]
    }

    pub fn log(&self) -> &[Delivery] {
        &self.log
    }

    /// Collects every party's offers and delivers them. Returns the sent messages by sequence number.
    pub fn exchange(&mut self, parties: &mut [Box<dyn Party + '_>]) -> Result<Vec<Message>> {
        let mut queue = Vec::new();
        for p in parties.iter_mut() {
            queue.extend(p.offers()?);
        }
        for m in &queue {
            for to in &m.to {
                if !parties.iter().any(|p| p.id() == to) {
                    return Err(Error::DeliveryFailure(format!(
                        "message #{} from {} is addressed to unknown party {to}",
                        m.seq, m.sender
                    )));
                }
            }
        }
        queue.sort_by_key(|m| m.seq);
        let mut order = queue.clone();
        if let DeliveryPolicy::Shuffle { seed } = self.policy {
            order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
        }
        for m in &order {
            for tap in self.taps.iter_mut() {
                tap.push(m.clone());
            }
            for to in &m.to {
                let p = parties
                    .iter_mut()
                    .find(|p| p.id() == to)
                    .expect("addressees checked above");
                p.receive(m)?;
                self.log.push(Delivery {
                    seq: m.seq,
                    sender: m.sender.clone(),
                    to: to.clone(),
                });
            }
        }
        Ok(queue)
    }
}

/// What the parties learned.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SessionOutcome {
    pub keys: BTreeMap<String, Value>,
    pub agreement: bool,
}

/// What a passive tap holds after a session: public header and the messages it saw.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EavesdropperView {
    pub header: Header,
    pub messages: Vec<Message>,
}

impl EavesdropperView {
    pub fn from_transcript(t: &Transcript) -> Self {
        let mut header = t.header.clone();
        header.seeds = None;
        Self {
            header,
            messages: t.messages.clone(),
        }
    }

    pub fn to_transcript(&self) -> Transcript {
        Transcript::seal(
            TranscriptRole::View,
            self.header.clone(),
            self.messages.clone(),
            None,
        )
    }

    pub fn message_from(&self, sender: &str) -> Option<&Message> {
        self.messages.iter().find(|m| m.sender == sender)
    }
}

#[derive(Clone, Debug)]
pub struct SessionRun {
    pub transcript: Transcript,
    pub outcome: SessionOutcome,
    pub view: EavesdropperView,
    pub diagnostics: Vec<Diagnostic>,
}

/// Expands a single seed to one per party (`seed + i`); otherwise checks the count.
pub fn expand_seeds(seeds: &[u64], parties: usize) -> Result<Vec<u64>> {
    match seeds {
        [s] if parties > 1 => Ok((0..parties as u64).map(|i| s.wrapping_add(i)).collect()),
        _ if seeds.len() == parties => Ok(seeds.to_vec()),
        _ => Err(Error::InvalidParams(format!(
            "{parties} parties need 1 or {parties} seeds, got {}",
            seeds.len()
        ))),
    }
}

/// Runs one session through `broker` and writes its transcript.
pub fn run_session(config: &SessionConfig, broker: &mut Broker) -> Result<SessionRun> {
    let instance = Instance::build(&config.instance, config.protocol, config.parties)?;
    with_model!(&instance, m => run_on(m, &instance, config, broker))
}

/// Runs one session over an already-built model.
pub fn run_on<C: Platform>(
    model: &C,
    instance: &Instance,
    config: &SessionConfig,
    broker: &mut Broker,
) -> Result<SessionRun> {
    let parties = match config.protocol {
        ProtocolKind::Multi => config.parties,
        _ => 2,
    };
    if parties < 2 {
        return Err(Error::InvalidParams(format!("a session needs at least 2 parties, got {parties}")));
    }
    let seeds = expand_seeds(&config.seeds, parties)?;
    let eckap = config.eckap.clone().unwrap_or_else(|| instance.default_eckap());
    let setup = build_setup(model, config.protocol, parties, &eckap, config.setup_seed)?;
    let diagnostics = setup_diagnostics(model, &setup, config.setup_seed)?;
    let public = setup.encode(model);
    let model_id = model.model_id();
    let names = party_names(config.protocol, parties);
    let session = session_id(config.protocol, &config.instance, &model_id, &public, &names);

    let mut members = make_parties(model, &setup, &session, &seeds)?;
    let tap = broker.add_tap();
    let messages = broker.exchange(&mut members)?;
    let mut keys = BTreeMap::new();
    for p in members.iter_mut() {
        keys.insert(p.id().to_string(), p.finalize()?);
    }
    let first = keys.values().next().cloned();
    let agreement = keys.values().all(|k| Some(k) == first.as_ref());

    let header = Header {
        session,
        protocol: config.protocol,
        instance: config.instance.clone(),
        model: model_id,
        public,
        parties: names,
        seeds: config.disclose_seeds.then(|| seeds.clone()),
    };
    let outcome = Outcome {
        agreement,
        keys: config.disclose_keys.then(|| keys.clone()),
    };
    let transcript = Transcript::seal(TranscriptRole::Session, header.clone(), messages, Some(outcome));
    let mut seen = broker.tapped(tap).to_vec();
    seen.sort_by_key(|m| m.seq);
    let mut view_header = header;
    view_header.seeds = None;
    Ok(SessionRun {
        transcript,
        outcome: SessionOutcome { keys, agreement },
        view: EavesdropperView {
            header: view_header,
            messages: seen,
        },
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::InstanceSpec;
    use serde_json::json;

    fn toy() -> InstanceSpec {
        InstanceSpec {
            name: "dh".into(),
            params: json!({"p": 23, "g": 5, "s": 22}),
        }
    }

    #[test]
    fn seeds_expand_from_one() {
        assert_eq!(expand_seeds(&[7], 3).unwrap(), vec![7, 8, 9]);
        assert_eq!(expand_seeds(&[1, 2], 2).unwrap(), vec![1, 2]);
        assert!(expand_seeds(&[1, 2], 3).is_err());
    }

    #[test]
    fn tap_sees_what_the_transcript_records() {
        let cfg = SessionConfig::new(ProtocolKind::Ckap, toy(), vec![3, 4]);
        let run = run_session(&cfg, &mut Broker::default()).unwrap();
        assert!(run.outcome.agreement);
        assert_eq!(run.view.messages, run.transcript.messages);
        assert_eq!(run.view.to_transcript(), run.transcript.view());
    }

    #[test]
    fn shuffled_delivery_changes_nothing_observable() {
        let cfg = SessionConfig::new(ProtocolKind::Multi, toy(), vec![1, 2, 3, 4, 5]);
        let a = run_session(&cfg, &mut Broker::default()).unwrap();
        let mut shuffled = Broker::new(DeliveryPolicy::Shuffle { seed: 99 });
        let b = run_session(&cfg, &mut shuffled).unwrap();
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(shuffled.log().len(), 5 * 4);
    }
}
