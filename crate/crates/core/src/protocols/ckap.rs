//! Two-party categorical key agreement.
//!
//! Public `g: A -> B`. Alice holds `f: A -> A` and sends `g·f`; Bob holds
//! `h: B -> B` and sends `h·g`. Alice's key is `(h·g)·f`, Bob's is `h·(g·f)`.

use rand::RngCore;
use serde_json::Value;

use super::{Direction, Message, Party, ALICE, BOB};
use crate::category::{CategoryModel, Morphism};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Self::Alice => ALICE,
            Self::Bob => BOB,
        }
    }

    pub fn peer(self) -> Self {
        match self {
            Self::Alice => Self::Bob,
            Self::Bob => Self::Alice,
        }
    }

    fn seq(self) -> u64 {
        match self {
            Self::Alice => 0,
            Self::Bob => 1,
        }
    }
}

fn check_secret<C: CategoryModel + ?Sized>(
    model: &C,
    role: Role,
    g: &Morphism<C::Payload>,
    secret: &Morphism<C::Payload>,
) -> Result<()> {
    let home = match role {
        Role::Alice => g.dom(),
        Role::Bob => g.cod(),
    };
    if !secret.is_endo() || secret.dom() != home {
        return Err(Error::RoleMismatch(format!(
            "{} needs a secret in Hom({h},{h}), got {}",
            role.name(),
            model.hom_tag(secret.dom(), secret.cod()),
            h = model.name(home),
        )));
    }
    Ok(())
}

/// Alice's `g·f` or Bob's `h·g`.
pub fn ckap_offer<C: CategoryModel + ?Sized>(
    model: &C,
    role: Role,
    g: &Morphism<C::Payload>,
    secret: &Morphism<C::Payload>,
) -> Result<Morphism<C::Payload>> {
    check_secret(model, role, g, secret)?;
    match role {
        Role::Alice => model.compose(g, secret),
        Role::Bob => model.compose(secret, g),
    }
}

/// Alice's `(h·g)·f` or Bob's `h·(g·f)` from the peer's offer.
pub fn ckap_finalize<C: CategoryModel + ?Sized>(
    model: &C,
    role: Role,
    received: &Morphism<C::Payload>,
    secret: &Morphism<C::Payload>,
) -> Result<Morphism<C::Payload>> {
    if !secret.is_endo() {
        return Err(Error::RoleMismatch(format!(
            "{}'s secret is not an endomorphism",
            role.name()
        )));
    }
    match role {
        Role::Alice => model.compose(received, secret),
        Role::Bob => model.compose(secret, received),
    }
}

pub struct CkapParty<'a, C: CategoryModel + ?Sized> {
    model: &'a C,
    role: Role,
    session: String,
    g: Morphism<C::Payload>,
    secret: Morphism<C::Payload>,
    received: Option<Morphism<C::Payload>>,
}

impl<'a, C: CategoryModel + ?Sized> CkapParty<'a, C> {
    /// Draws the party's secret endomorphism from `rng`.
    pub fn new(
        model: &'a C,
        role: Role,
        session: &str,
        g: Morphism<C::Payload>,
        rng: &mut dyn RngCore,
    ) -> Result<Self> {
        let home = match role {
            Role::Alice => g.dom(),
            Role::Bob => g.cod(),
        };
        let secret = model.sample_endo(home, rng)?;
        Self::with_secret(model, role, session, g, secret)
    }

    pub fn with_secret(
        model: &'a C,
        role: Role,
        session: &str,
        g: Morphism<C::Payload>,
        secret: Morphism<C::Payload>,
    ) -> Result<Self> {
        model.validate(&g)?;
        model.validate(&secret)?;
        check_secret(model, role, &g, &secret)?;
        Ok(Self {
            model,
            role,
            session: session.to_string(),
            g,
            secret,
            received: None,
        })
    }

    pub fn secret(&self) -> &Morphism<C::Payload> {
        &self.secret
    }
}

impl<C: CategoryModel + ?Sized> Party for CkapParty<'_, C> {
    fn id(&self) -> &str {
        self.role.name()
    }

    fn offers(&mut self) -> Result<Vec<Message>> {
        let offer = ckap_offer(self.model, self.role, &self.g, &self.secret)?;
        Ok(vec![Message {
            session: self.session.clone(),
            sender: self.role.name().into(),
            seq: self.role.seq(),
            to: vec![self.role.peer().name().into()],
            direction: Direction::Offer,
            payload: self.model.encode(&offer),
        }])
    }

    fn receive(&mut self, msg: &Message) -> Result<()> {
        let peer = self.role.peer();
        if msg.session != self.session {
            return Err(Error::DeliveryFailure(format!(
                "message for session {} delivered to session {}",
                msg.session, self.session
            )));
        }
        if msg.sender != peer.name() || msg.direction != Direction::Offer || msg.seq != peer.seq() {
            return Err(Error::RoleMismatch(format!(
                "{} expected an offer from {}, got {:?} #{} from {}",
                self.role.name(),
                peer.name(),
                msg.direction,
                msg.seq,
                msg.sender
            )));
        }
        if self.received.is_some() {
            return Err(Error::DeliveryFailure(format!(
                "duplicate offer from {} to {}",
                msg.sender,
                self.role.name()
            )));
        }
        self.received = Some(self.model.decode(self.g.dom(), self.g.cod(), &msg.payload)?);
        Ok(())
    }

    fn finalize(&mut self) -> Result<Value> {
        let received = self.received.as_ref().ok_or_else(|| {
            Error::MissingContribution(format!("{} has no offer from its peer", self.role.name()))
        })?;
        let key = ckap_finalize(self.model, self.role, received, &self.secret)?;
        Ok(self.model.encode(&key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instantiations::dh::{dh_category, DhCategory, DhParams};

    #[test]
    fn toy_dh_exchange() {
        let m = dh_category(DhParams { p: 23, g: 5, s: 22 }).unwrap();
        let g = m.generator();
        let f = m.exponent(DhCategory::A, 6).unwrap();
        let h = m.exponent(DhCategory::B, 15).unwrap();
        let a = ckap_offer(&m, Role::Alice, &g, &f).unwrap();
        let b = ckap_offer(&m, Role::Bob, &g, &h).unwrap();
        assert_eq!((*a.payload(), *b.payload()), (8, 19));
        let ka = ckap_finalize(&m, Role::Alice, &b, &f).unwrap();
        let kb = ckap_finalize(&m, Role::Bob, &a, &h).unwrap();
        assert_eq!(*ka.payload(), 2);
        assert_eq!(ka, kb);
    }

    #[test]
    fn identity_secrets_give_g() {
        let m = dh_category(DhParams { p: 23, g: 5, s: 22 }).unwrap();
        let g = m.generator();
        let f = m.identity(DhCategory::A).unwrap();
        let h = m.identity(DhCategory::B).unwrap();
        assert_eq!(ckap_offer(&m, Role::Alice, &g, &f).unwrap(), g);
        let b = ckap_offer(&m, Role::Bob, &g, &h).unwrap();
        assert_eq!(ckap_finalize(&m, Role::Alice, &b, &f).unwrap(), g);
    }

    #[test]
    fn wrong_side_secret_is_a_role_mismatch() {
        let m = dh_category(DhParams { p: 23, g: 5, s: 22 }).unwrap();
        let g = m.generator();
        let h = m.exponent(DhCategory::B, 3).unwrap();
        assert!(matches!(
            ckap_offer(&m, Role::Alice, &g, &h),
            Err(Error::RoleMismatch(_))
        ));
    }
}
