//! Enriched (matrix) key agreement.
//!
//! Public `φ`, an `m x n` matrix over `Hom(A,B)`. Each party draws
//! `ψ ∈ M_n(Hom(A,A))` and `ω ∈ M_m(Hom(B,B))` from its commuting families and
//! sends `ω·φ·ψ`. Alice's key is `ω_a·(ω_b·φ·ψ_b)·ψ_a`.

use rand::RngCore;
use serde_json::{json, Value};

use super::{Direction, Message, Party, Role};
use crate::category::{CategoryModel, Diagnostic, Morphism};
use crate::error::{Error, Result};
use crate::matrix::{
    self, act_left, act_right, decode_endo_matrix, decode_hom_matrix, encode_endo_matrix,
    encode_hom_matrix, sample_commuting, verify_commuting, CommutingFamily, EndoMatrix, FamilyKind,
    HomMatrix, Side,
};

/// The families one party draws its `ψ` and `ω` from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyPair<P> {
    pub psi: CommutingFamily<P>,
    pub omega: CommutingFamily<P>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EckapSetup<P> {
    pub phi: HomMatrix<P>,
    pub alice: FamilyPair<P>,
    pub bob: FamilyPair<P>,
}

fn check_family<C: CategoryModel + ?Sized>(
    model: &C,
    fam: &CommutingFamily<C::Payload>,
    obj: crate::category::ObjectRef,
    side: Side,
    size: usize,
) -> Result<()> {
    if fam.obj != obj || fam.side != side || fam.size != size {
        return Err(Error::ShapeMismatch(format!(
            "family over {} ({:?}, {}x{}) does not fit {} ({:?}, {size}x{size})",
            model.name(fam.obj),
            fam.side,
            fam.size,
            fam.size,
            model.name(obj),
            side
        )));
    }
    Ok(())
}

impl<P: Clone + PartialEq> EckapSetup<P> {
    /// Checks shapes and that the two parties' families commute.
    pub fn new<C>(
        model: &C,
        phi: HomMatrix<P>,
        alice: FamilyPair<P>,
        bob: FamilyPair<P>,
        rng: &mut dyn RngCore,
    ) -> Result<Self>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        let setup = Self::new_unverified(model, phi, alice, bob)?;
        verify_commuting(model, &setup.alice.psi, &setup.bob.psi, rng)?;
        verify_commuting(model, &setup.alice.omega, &setup.bob.omega, rng)?;
        Ok(setup)
    }

    /// Checks shapes only. Agreement is not guaranteed.
    pub fn new_unverified<C>(
        model: &C,
        phi: HomMatrix<P>,
        alice: FamilyPair<P>,
        bob: FamilyPair<P>,
    ) -> Result<Self>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        for pair in [&alice, &bob] {
            check_family(model, &pair.psi, phi.dom(), Side::Right, phi.cols())?;
            check_family(model, &pair.omega, phi.cod(), Side::Left, phi.rows())?;
        }
        Ok(Self { phi, alice, bob })
    }

    /// The `1 x 1` setup on `g` whose sessions replay a two-party run.
    ///
    /// Alice's `ψ` is a sampled secret and her `ω` the identity; Bob's are
    /// the other way round, so each party draws exactly one secret.
    pub fn reduction<C>(model: &C, g: &Morphism<P>) -> Result<Self>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        model.validate(g)?;
        let (a, b) = (g.dom(), g.cod());
        Self::new_unverified(
            model,
            HomMatrix::from_morphism(g),
            FamilyPair {
                psi: CommutingFamily::sampled(a, Side::Right, 1),
                omega: CommutingFamily::unit(b, Side::Left, 1),
            },
            FamilyPair {
                psi: CommutingFamily::unit(a, Side::Right, 1),
                omega: CommutingFamily::sampled(b, Side::Left, 1),
            },
        )
    }

    pub fn families(&self, role: Role) -> &FamilyPair<P> {
        match role {
            Role::Alice => &self.alice,
            Role::Bob => &self.bob,
        }
    }

    pub fn diagnostics<C>(&self, model: &C) -> Vec<Diagnostic>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        matrix::diagnose_public_matrix(model, &self.phi)
    }
}

/// `ω·φ·ψ`.
pub fn eckap_offer<C: CategoryModel + ?Sized>(
    model: &C,
    phi: &HomMatrix<C::Payload>,
    omega: &EndoMatrix<C::Payload>,
    psi: &EndoMatrix<C::Payload>,
) -> Result<HomMatrix<C::Payload>> {
    act_left(model, omega, &act_right(model, phi, psi)?)
}

/// Own-side sandwich of the peer's offer.
pub fn eckap_finalize<C: CategoryModel + ?Sized>(
    model: &C,
    received: &HomMatrix<C::Payload>,
    omega: &EndoMatrix<C::Payload>,
    psi: &EndoMatrix<C::Payload>,
) -> Result<HomMatrix<C::Payload>> {
    eckap_offer(model, received, omega, psi)
}

pub fn encode_family<C: CategoryModel + ?Sized>(model: &C, fam: &CommutingFamily<C::Payload>) -> Value {
    let mut out = json!({
        "hom": model.hom_tag(fam.obj, fam.obj),
        "side": fam.side,
        "size": fam.size,
    });
    match &fam.kind {
        FamilyKind::Unit => out["kind"] = json!("unit"),
        FamilyKind::Sampled => out["kind"] = json!("sampled"),
        FamilyKind::Polynomial {
            generator,
            degree,
            coef_lo,
            coef_hi,
        } => {
            out["kind"] = json!("polynomial");
            out["generator"] = encode_endo_matrix(model, generator);
            out["degree"] = json!(degree);
            out["coefficients"] = json!([coef_lo.to_string(), coef_hi.to_string()]);
        }
    }
    out
}

pub fn decode_family<C: CategoryModel + ?Sized>(
    model: &C,
    value: &Value,
) -> Result<CommutingFamily<C::Payload>> {
    let bad = |what: &str| Error::Decode(format!("family encoding: {what}"));
    let hom = value["hom"].as_str().ok_or_else(|| bad("missing hom"))?;
    let (d, c) = hom.split_once("->").ok_or_else(|| bad("bad hom tag"))?;
    let obj = model.object_by_name(d)?;
    if model.object_by_name(c)? != obj {
        return Err(bad("family hom is not an endo hom"));
    }
    let side: Side =
        serde_json::from_value(value["side"].clone()).map_err(|_| bad("bad side"))?;
    let size = value["size"].as_u64().ok_or_else(|| bad("missing size"))? as usize;
    let fam = match value["kind"].as_str() {
        Some("unit") => CommutingFamily::unit(obj, side, size),
        Some("sampled") => CommutingFamily::sampled(obj, side, size),
        Some("polynomial") => {
            let generator = decode_endo_matrix(model, &value["generator"])?;
            let degree = value["degree"].as_u64().ok_or_else(|| bad("missing degree"))? as usize;
            let coef = |i: usize| -> Result<u64> {
                value["coefficients"][i]
                    .as_str()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("bad coefficient range"))
            };
            CommutingFamily::polynomial(generator, degree, coef(0)?, coef(1)?)?
        }
        _ => return Err(bad("unknown kind")),
    };
    if (fam.obj, fam.side, fam.size) != (obj, side, size) {
        return Err(bad("generator does not match the header"));
    }
    Ok(fam)
}

pub struct EckapParty<'a, C: CategoryModel + ?Sized> {
    model: &'a C,
    role: Role,
    session: String,
    phi: HomMatrix<C::Payload>,
    psi: EndoMatrix<C::Payload>,
    omega: EndoMatrix<C::Payload>,
    received: Option<HomMatrix<C::Payload>>,
}

impl<'a, C: CategoryModel + ?Sized> EckapParty<'a, C> {
    /// Draws `ψ` first, then `ω`, from the party's own families.
    pub fn new(
        model: &'a C,
        role: Role,
        session: &str,
        setup: &EckapSetup<C::Payload>,
        rng: &mut dyn RngCore,
    ) -> Result<Self> {
        let fams = setup.families(role);
        let psi = sample_commuting(model, &fams.psi, rng)?;
        let omega = sample_commuting(model, &fams.omega, rng)?;
        Self::with_secrets(model, role, session, setup.phi.clone(), psi, omega)
    }

    pub fn with_secrets(
        model: &'a C,
        role: Role,
        session: &str,
        phi: HomMatrix<C::Payload>,
        psi: EndoMatrix<C::Payload>,
        omega: EndoMatrix<C::Payload>,
    ) -> Result<Self> {
        if psi.obj() != phi.dom() || omega.obj() != phi.cod() {
            return Err(Error::RoleMismatch(format!(
                "{}'s secrets do not act on {}",
                role.name(),
                model.hom_tag(phi.dom(), phi.cod())
            )));
        }
        Ok(Self {
            model,
            role,
            session: session.to_string(),
            phi,
            psi,
            omega,
            received: None,
        })
    }

    pub fn secrets(&self) -> (&EndoMatrix<C::Payload>, &EndoMatrix<C::Payload>) {
        (&self.psi, &self.omega)
    }
}

impl<C: CategoryModel + ?Sized> Party for EckapParty<'_, C> {
    fn id(&self) -> &str {
        self.role.name()
    }

    fn offers(&mut self) -> Result<Vec<Message>> {
        let offer = eckap_offer(self.model, &self.phi, &self.omega, &self.psi)?;
        Ok(vec![Message {
            session: self.session.clone(),
            sender: self.role.name().into(),
            seq: if self.role == Role::Alice { 0 } else { 1 },
            to: vec![self.role.peer().name().into()],
            direction: Direction::Offer,
            payload: encode_hom_matrix(self.model, &offer),
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
        if msg.sender != peer.name() || msg.direction != Direction::Offer {
            return Err(Error::RoleMismatch(format!(
                "{} expected an offer from {}, got {:?} from {}",
                self.role.name(),
                peer.name(),
                msg.direction,
                msg.sender
            )));
        }
        if self.received.is_some() {
            return Err(Error::DeliveryFailure(format!("duplicate offer from {}", msg.sender)));
        }
        let m = decode_hom_matrix(self.model, &msg.payload)?;
        if (m.rows(), m.cols(), m.dom(), m.cod())
            != (self.phi.rows(), self.phi.cols(), self.phi.dom(), self.phi.cod())
        {
            return Err(Error::ShapeMismatch(format!(
                "offer is {}x{} over {}, expected {}x{} over {}",
                m.rows(),
                m.cols(),
                self.model.hom_tag(m.dom(), m.cod()),
                self.phi.rows(),
                self.phi.cols(),
                self.model.hom_tag(self.phi.dom(), self.phi.cod())
            )));
        }
        self.received = Some(m);
        Ok(())
    }

    fn finalize(&mut self) -> Result<Value> {
        let received = self.received.as_ref().ok_or_else(|| {
            Error::MissingContribution(format!("{} has no offer from its peer", self.role.name()))
        })?;
        let key = eckap_finalize(self.model, received, &self.omega, &self.psi)?;
        Ok(encode_hom_matrix(self.model, &key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instantiations::mpf::{mpf_model, MpfModel, MpfParams};

    #[test]
    fn identity_secrets_reproduce_phi() {
        let m = mpf_model(MpfParams {
            p: 7,
            k: 2,
            base: vec![vec![3, 5], vec![2, 6]],
        })
        .unwrap();
        let phi = m.public_matrix().unwrap();
        let psi = EndoMatrix::identity(&m, MpfModel::A, Side::Right, 2).unwrap();
        let omega = EndoMatrix::identity(&m, MpfModel::B, Side::Left, 2).unwrap();
        let offer = eckap_offer(&m, &phi, &omega, &psi).unwrap();
        assert_eq!(offer, phi);
        assert_eq!(eckap_finalize(&m, &offer, &omega, &psi).unwrap(), phi);
    }

    #[test]
    fn family_encoding_round_trips() {
        let m = mpf_model(MpfParams {
            p: 7,
            k: 2,
            base: vec![vec![3, 5], vec![2, 6]],
        })
        .unwrap();
        let gen = EndoMatrix::new(&m, MpfModel::A, Side::Right, 2, vec![1, 2, 3, 4]).unwrap();
        let fam = CommutingFamily::polynomial(gen, 2, 0, 5).unwrap();
        assert_eq!(decode_family(&m, &encode_family(&m, &fam)).unwrap(), fam);
        let unit = CommutingFamily::unit(MpfModel::B, Side::Left, 2);
        assert_eq!(decode_family(&m, &encode_family(&m, &unit)).unwrap(), unit);
    }
}
