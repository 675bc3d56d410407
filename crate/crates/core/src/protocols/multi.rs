//! The `n`-party chain protocol.
//!
//! Public objects `C_1..C_n` and links `g_i: C_i -> C_{i+1}`. Party `i` holds
//! `f_i: C_i -> C_i`, sends `u_i = g_i f_i` to every later party and
//! `d_i = f_i g_{i-1}` to every earlier party, and derives
//!
//! ```text
//! k_i = d_n ⋯ d_{i+1} · f_i · u_{i-1} ⋯ u_1   ∈ Hom(C_1, C_n)
//! ```

use std::collections::BTreeMap;

use rand::RngCore;
use serde_json::{json, Value};

use super::{party_name, Direction, Message, Party};
use crate::category::{CategoryModel, Morphism, ObjectRef};
use crate::error::{Error, Result};

/// The public chain `C_1 -g_1-> C_2 -> ... -> C_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain<P> {
    objects: Vec<ObjectRef>,
    links: Vec<Morphism<P>>,
}

impl<P: Clone> Chain<P> {
    pub fn new<C>(model: &C, objects: Vec<ObjectRef>, links: Vec<Morphism<P>>) -> Result<Self>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        if objects.len() < 2 || links.len() + 1 != objects.len() {
            return Err(Error::InvalidParams(format!(
                "a chain of {} objects needs {} links, got {}",
                objects.len(),
                objects.len().saturating_sub(1),
                links.len()
            )));
        }
        for (i, g) in links.iter().enumerate() {
            model.validate(g)?;
            if (g.dom(), g.cod()) != (objects[i], objects[i + 1]) {
                return Err(Error::InvalidParams(format!(
                    "link g_{} lies in {}, expected {}",
                    i + 1,
                    model.hom_tag(g.dom(), g.cod()),
                    model.hom_tag(objects[i], objects[i + 1])
                )));
            }
        }
        Ok(Self { objects, links })
    }

    /// Number of parties, `n`.
    pub fn parties(&self) -> usize {
        self.objects.len()
    }

    /// `C_i`, 1-based.
    pub fn object(&self, i: usize) -> ObjectRef {
        self.objects[i - 1]
    }

    pub fn objects(&self) -> &[ObjectRef] {
        &self.objects
    }

    /// `g_i: C_i -> C_{i+1}`, 1-based.
    pub fn link(&self, i: usize) -> &Morphism<P> {
        &self.links[i - 1]
    }

    pub fn links(&self) -> &[Morphism<P>] {
        &self.links
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if (1..=self.parties()).contains(&i) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                parties: self.parties(),
            })
        }
    }

    pub fn encode<C>(&self, model: &C) -> Value
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        json!({
            "objects": self.objects.iter().map(|&o| model.name(o)).collect::<Vec<_>>(),
            "links": self.links.iter().map(|g| json!({
                "hom": model.hom_tag(g.dom(), g.cod()),
                "payload": model.encode(g),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn decode<C>(model: &C, value: &Value) -> Result<Self>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        let objects = value["objects"]
            .as_array()
            .ok_or_else(|| Error::Decode("chain lacks `objects`".into()))?
            .iter()
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| Error::Decode("object name is not a string".into()))
                    .and_then(|s| model.object_by_name(s))
            })
            .collect::<Result<Vec<_>>>()?;
        let raw = value["links"]
            .as_array()
            .ok_or_else(|| Error::Decode("chain lacks `links`".into()))?;
        if raw.len() + 1 != objects.len() {
            return Err(Error::Decode("chain has the wrong number of links".into()));
        }
        let links = raw
            .iter()
            .enumerate()
            .map(|(i, v)| model.decode(objects[i], objects[i + 1], &v["payload"]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, objects, links)
    }
}

/// One outgoing composite and the (1-based) parties it is addressed to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outgoing<P> {
    pub direction: Direction,
    pub to: Vec<usize>,
    pub morphism: Morphism<P>,
}

fn check_secret<C: CategoryModel + ?Sized>(
    model: &C,
    chain: &Chain<C::Payload>,
    i: usize,
    f: &Morphism<C::Payload>,
) -> Result<()> {
    let home = chain.object(i);
    if (f.dom(), f.cod()) != (home, home) {
        return Err(Error::NonComposable {
            left_dom: model.name(home),
            right_cod: model.name(f.cod()),
        });
    }
    Ok(())
}

/// Party `i`'s upstream `g_i f_i` (if `i < n`) and downstream `f_i g_{i-1}` (if `i > 1`).
pub fn multiparty_messages<C: CategoryModel + ?Sized>(
    model: &C,
    chain: &Chain<C::Payload>,
    i: usize,
    f: &Morphism<C::Payload>,
) -> Result<Vec<Outgoing<C::Payload>>> {
    chain.check_index(i)?;
    check_secret(model, chain, i, f)?;
    let n = chain.parties();
    let mut out = Vec::with_capacity(2);
    if i < n {
        out.push(Outgoing {
            direction: Direction::Upstream,
            to: (i + 1..=n).collect(),
            morphism: model.compose(chain.link(i), f)?,
        });
    }
    if i > 1 {
        out.push(Outgoing {
            direction: Direction::Downstream,
            to: (1..i).collect(),
            morphism: model.compose(f, chain.link(i - 1))?,
        });
    }
    Ok(out)
}

/// `k_i` from the upstream composites of parties `1..i` and downstream ones of `i+1..=n`.
///
/// `received` maps each other party's index to the one composite it sent to `i`.
pub fn multiparty_finalize<C: CategoryModel + ?Sized>(
    model: &C,
    chain: &Chain<C::Payload>,
    i: usize,
    f: &Morphism<C::Payload>,
    received: &BTreeMap<usize, Morphism<C::Payload>>,
) -> Result<Morphism<C::Payload>> {
    chain.check_index(i)?;
    check_secret(model, chain, i, f)?;
    let n = chain.parties();
    let get = |j: usize| {
        received.get(&j).ok_or_else(|| {
            Error::MissingContribution(format!("party {i} has nothing from party {j}"))
        })
    };
    let mut acc: Option<Morphism<C::Payload>> = None;
    for j in 1..i {
        let u = get(j)?;
        acc = Some(match acc {
            None => u.clone(),
            Some(prev) => model.compose(u, &prev)?,
        });
    }
    let mut key = match acc {
        None => f.clone(),
        Some(prev) => model.compose(f, &prev)?,
    };
    for j in i + 1..=n {
        key = model.compose(get(j)?, &key)?;
    }
    if let Some(extra) = received.keys().find(|&&j| j == i || j > n) {
        return Err(Error::IndexOutOfRange {
            index: *extra,
            parties: n,
        });
    }
    Ok(key)
}

pub struct MultiParty<'a, C: CategoryModel + ?Sized> {
    model: &'a C,
    index: usize,
    name: String,
    session: String,
    chain: Chain<C::Payload>,
    secret: Morphism<C::Payload>,
    received: BTreeMap<usize, Morphism<C::Payload>>,
}

impl<'a, C: CategoryModel + ?Sized> MultiParty<'a, C> {
    pub fn new(
        model: &'a C,
        index: usize,
        session: &str,
        chain: Chain<C::Payload>,
        rng: &mut dyn RngCore,
    ) -> Result<Self> {
        chain.check_index(index)?;
        let secret = model.sample_endo(chain.object(index), rng)?;
        Self::with_secret(model, index, session, chain, secret)
    }

    pub fn with_secret(
        model: &'a C,
        index: usize,
        session: &str,
        chain: Chain<C::Payload>,
        secret: Morphism<C::Payload>,
    ) -> Result<Self> {
        chain.check_index(index)?;
        model.validate(&secret)?;
        check_secret(model, &chain, index, &secret)?;
        Ok(Self {
            model,
            index,
            name: party_name(index),
            session: session.to_string(),
            chain,
            secret,
            received: BTreeMap::new(),
        })
    }

    pub fn secret(&self) -> &Morphism<C::Payload> {
        &self.secret
    }
}

/// Sequence number of party `i`'s message in the given direction.
pub fn multi_seq(i: usize, direction: Direction) -> u64 {
    let base = 2 * (i as u64 - 1);
    match direction {
        Direction::Downstream => base + 1,
        _ => base,
    }
}

/// Parses a `P<i>` party name.
pub fn party_index(name: &str) -> Option<usize> {
    name.strip_prefix('P')?.parse().ok().filter(|&i| i > 0)
}

impl<C: CategoryModel + ?Sized> Party for MultiParty<'_, C> {
    fn id(&self) -> &str {
        &self.name
    }

    fn offers(&mut self) -> Result<Vec<Message>> {
        let out = multiparty_messages(self.model, &self.chain, self.index, &self.secret)?;
        Ok(out
            .into_iter()
            .map(|o| Message {
                session: self.session.clone(),
                sender: self.name.clone(),
                seq: multi_seq(self.index, o.direction),
                to: o.to.into_iter().map(party_name).collect(),
                direction: o.direction,
                payload: self.model.encode(&o.morphism),
            })
            .collect())
    }

    fn receive(&mut self, msg: &Message) -> Result<()> {
        if msg.session != self.session {
            return Err(Error::DeliveryFailure(format!(
                "message for session {} delivered to session {}",
                msg.session, self.session
            )));
        }
        let n = self.chain.parties();
        let j = party_index(&msg.sender)
            .filter(|&j| j <= n && j != self.index)
            .ok_or_else(|| Error::RoleMismatch(format!("unexpected sender {}", msg.sender)))?;
        let expected = if j < self.index {
            Direction::Upstream
        } else {
            Direction::Downstream
        };
        if msg.direction != expected || msg.seq != multi_seq(j, expected) {
            return Err(Error::RoleMismatch(format!(
                "{} expected {:?} #{} from {}, got {:?} #{}",
                self.name,
                expected,
                multi_seq(j, expected),
                msg.sender,
                msg.direction,
                msg.seq
            )));
        }
        if self.received.contains_key(&j) {
            return Err(Error::DeliveryFailure(format!(
                "duplicate contribution from {} to {}",
                msg.sender, self.name
            )));
        }
        let (dom, cod) = match expected {
            Direction::Upstream => (self.chain.object(j), self.chain.object(j + 1)),
            _ => (self.chain.object(j - 1), self.chain.object(j)),
        };
        let m = self.model.decode(dom, cod, &msg.payload)?;
        self.received.insert(j, m);
        Ok(())
    }

    fn finalize(&mut self) -> Result<Value> {
        let key = multiparty_finalize(
            self.model,
            &self.chain,
            self.index,
            &self.secret,
            &self.received,
        )?;
        Ok(self.model.encode(&key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instantiations::dh::{dh_chain, DhParams};

    fn chain4() -> (crate::instantiations::dh::DhCategory, Chain<u64>) {
        let m = dh_chain(DhParams { p: 23, g: 5, s: 22 }, 4).unwrap();
        let objs: Vec<_> = (0..4).map(ObjectRef).collect();
        let links = vec![
            m.generator(),
            m.morphism(ObjectRef(1), ObjectRef(2), 3).unwrap(),
            m.morphism(ObjectRef(2), ObjectRef(3), 7).unwrap(),
        ];
        let chain = Chain::new(&m, objs, links).unwrap();
        (m, chain)
    }

    #[test]
    fn fan_out_follows_the_index_rule() {
        let (m, chain) = chain4();
        let f = |i: usize, e: u64| m.morphism(chain.object(i), chain.object(i), e).unwrap();
        let first = multiparty_messages(&m, &chain, 1, &f(1, 2)).unwrap();
        assert_eq!(first.len(), 1);
        assert_eq!(first[0].to, vec![2, 3, 4]);
        // g_1 f_1 = 5^2 mod 23
        assert_eq!(*first[0].morphism.payload(), 2);
        let inner = multiparty_messages(&m, &chain, 3, &f(3, 5)).unwrap();
        assert_eq!(inner.len(), 2);
        // g_3 f_3 = 7*5, f_3 g_2 = 5*3, both mod 22
        assert_eq!(*inner[0].morphism.payload(), 35 % 22);
        assert_eq!(inner[1].to, vec![1, 2]);
        assert_eq!(*inner[1].morphism.payload(), 15);
        let last = multiparty_messages(&m, &chain, 4, &f(4, 9)).unwrap();
        assert_eq!(last.len(), 1);
        assert_eq!(last[0].direction, Direction::Downstream);
        assert!(matches!(
            multiparty_messages(&m, &chain, 5, &f(4, 9)),
            Err(Error::IndexOutOfRange { index: 5, parties: 4 })
        ));
    }

    #[test]
    fn missing_contribution_is_reported() {
        let (m, chain) = chain4();
        let f = m.morphism(chain.object(2), chain.object(2), 3).unwrap();
        let err = multiparty_finalize(&m, &chain, 2, &f, &BTreeMap::new());
        assert!(matches!(err, Err(Error::MissingContribution(_))));
    }
}
