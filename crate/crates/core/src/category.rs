//! Objects, morphisms and the pluggable category models every protocol runs over.
//!
//! Composition is written `g·f` and means "apply `f` first": for
//! `f: X -> Y` and `g: Y -> Z`, `compose(g, f): X -> Z`. Every entry point
//! checks `f.cod == g.dom` before a model ever sees the payloads.

use std::fmt::Debug;
use std::hash::Hash;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Identifier of an object, unique within one model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectRef(pub u16);

/// A typed arrow `dom -> cod` carrying a model-specific payload in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism<P> {
    dom: ObjectRef,
    cod: ObjectRef,
    payload: P,
}

impl<P> Morphism<P> {
    /// Builds a morphism without validation. Prefer [`CategoryModel::morphism`].
    pub fn new_unchecked(dom: ObjectRef, cod: ObjectRef, payload: P) -> Self {
        Self { dom, cod, payload }
    }

    pub fn dom(&self) -> ObjectRef {
        self.dom
    }

    pub fn cod(&self) -> ObjectRef {
        self.cod
    }

    pub fn payload(&self) -> &P {
        &self.payload
    }

    pub fn into_payload(self) -> P {
        self.payload
    }

    pub fn is_endo(&self) -> bool {
        self.dom == self.cod
    }
}

/// Abelian group (or monoid) structure on every hom-set, with composition bilinear.
pub trait HomAddition<P: Clone> {
    fn zero_raw(&self, dom: ObjectRef, cod: ObjectRef) -> Result<P>;

    fn add_raw(&self, dom: ObjectRef, cod: ObjectRef, x: &P, y: &P) -> Result<P>;

    /// `x + x + ... + x` (`times` copies), by doubling.
    fn scale_raw(&self, dom: ObjectRef, cod: ObjectRef, x: &P, mut times: u64) -> Result<P> {
        let mut acc = self.zero_raw(dom, cod)?;
        let mut base = x.clone();
        while times > 0 {
            if times & 1 == 1 {
                acc = self.add_raw(dom, cod, &acc, &base)?;
            }
            times >>= 1;
            if times > 0 {
                base = self.add_raw(dom, cod, &base, &base)?;
            }
        }
        Ok(acc)
    }
}

/// A concrete category: objects, hom-sets, composition, identities and samplers.
///
/// Implementors supply the `*_raw` hooks, which may assume their inputs are
/// valid members of the stated hom-sets. The provided methods do the checking.
pub trait CategoryModel {
    type Payload: Clone + Debug + PartialEq + Eq + Hash + Ord + Send + Sync;

    /// Short stable identifier, used in transcripts.
    fn model_id(&self) -> String;

    fn objects(&self) -> Vec<ObjectRef>;

    fn object_name(&self, obj: ObjectRef) -> Option<String>;

    /// Whether `Hom(dom, cod)` is non-empty. Both objects are known to exist.
    fn hom_inhabited(&self, dom: ObjectRef, cod: ObjectRef) -> bool;

    /// Membership and canonical-form check for a payload in `Hom(dom, cod)`.
    fn check_payload(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        payload: &Self::Payload,
    ) -> std::result::Result<(), String>;

    /// Brings a raw payload into canonical form (reduced residues, dropped zero terms).
    fn canonicalize(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        payload: Self::Payload,
    ) -> Result<Self::Payload>;

    /// `g·f` for `f: x -> y`, `g: y -> z`.
    fn compose_raw(
        &self,
        x: ObjectRef,
        y: ObjectRef,
        z: ObjectRef,
        g: &Self::Payload,
        f: &Self::Payload,
    ) -> Result<Self::Payload>;

    fn identity_raw(&self, obj: ObjectRef) -> Result<Self::Payload>;

    /// The secret distribution on `Hom(obj, obj)` used by protocol parties.
    fn sample_endo_raw(&self, obj: ObjectRef, rng: &mut dyn RngCore) -> Result<Self::Payload>;

    /// A broad distribution on any inhabited hom-set, used by law checks.
    fn sample_raw(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        rng: &mut dyn RngCore,
    ) -> Result<Self::Payload>;

    fn encode_payload(&self, payload: &Self::Payload) -> Value;

    /// Parses a payload; membership is checked by [`CategoryModel::decode`].
    fn decode_payload(&self, dom: ObjectRef, cod: ObjectRef, value: &Value)
        -> Result<Self::Payload>;

    /// Full listing of a hom-set, when it is small enough to list.
    fn enumerate_hom(&self, _dom: ObjectRef, _cod: ObjectRef) -> Option<Vec<Self::Payload>> {
        None
    }

    /// Secrets of `Hom(obj, obj)` in ascending exponent order, for exhaustive search.
    fn secret_space(
        &self,
        _obj: ObjectRef,
    ) -> Option<Box<dyn Iterator<Item = Self::Payload> + '_>> {
        None
    }

    fn additive(&self) -> Option<&dyn HomAddition<Self::Payload>> {
        None
    }

    /// Modulus carried in matrix encodings, if the model has one.
    fn modulus(&self) -> Option<u64> {
        None
    }

    // ---- provided ----

    fn name(&self, obj: ObjectRef) -> String {
        self.object_name(obj)
            .unwrap_or_else(|| format!("#{}", obj.0))
    }

    fn hom_tag(&self, dom: ObjectRef, cod: ObjectRef) -> String {
        format!("{}->{}", self.name(dom), self.name(cod))
    }

    fn object_by_name(&self, name: &str) -> Result<ObjectRef> {
        self.objects()
            .into_iter()
            .find(|&o| self.object_name(o).as_deref() == Some(name))
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    fn require_object(&self, obj: ObjectRef) -> Result<()> {
        if self.objects().contains(&obj) {
            Ok(())
        } else {
            Err(Error::UnknownObject(format!("#{}", obj.0)))
        }
    }

    fn require_hom(&self, dom: ObjectRef, cod: ObjectRef) -> Result<()> {
        self.require_object(dom)?;
        self.require_object(cod)?;
        if self.hom_inhabited(dom, cod) {
            Ok(())
        } else {
            Err(Error::EmptyHom {
                dom: self.name(dom),
                cod: self.name(cod),
            })
        }
    }

    /// Checks that `m` is a canonical member of this model.
    fn validate(&self, m: &Morphism<Self::Payload>) -> Result<()> {
        self.require_hom(m.dom, m.cod)?;
        self.check_payload(m.dom, m.cod, &m.payload)
            .map_err(|reason| Error::ForeignMorphism {
                model: self.model_id(),
                dom: self.name(m.dom),
                cod: self.name(m.cod),
                reason,
            })
    }

    /// Canonicalizes and validates a payload into a morphism of this model.
    fn morphism(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        payload: Self::Payload,
    ) -> Result<Morphism<Self::Payload>> {
        self.require_hom(dom, cod)?;
        let payload = self.canonicalize(dom, cod, payload)?;
        let m = Morphism::new_unchecked(dom, cod, payload);
        self.validate(&m)?;
        Ok(m)
    }

    /// `g·f`: apply `f`, then `g`.
    fn compose(
        &self,
        g: &Morphism<Self::Payload>,
        f: &Morphism<Self::Payload>,
    ) -> Result<Morphism<Self::Payload>> {
        if f.cod != g.dom {
            return Err(Error::NonComposable {
                left_dom: self.name(g.dom),
                right_cod: self.name(f.cod),
            });
        }
        self.validate(f)?;
        self.validate(g)?;
        let payload = self.compose_raw(f.dom, f.cod, g.cod, &g.payload, &f.payload)?;
        Ok(Morphism::new_unchecked(f.dom, g.cod, payload))
    }

    fn identity(&self, obj: ObjectRef) -> Result<Morphism<Self::Payload>> {
        self.require_object(obj)?;
        Ok(Morphism::new_unchecked(obj, obj, self.identity_raw(obj)?))
    }

    /// Draws a secret endomorphism; deterministic for a seeded `rng`.
    fn sample_endo(
        &self,
        obj: ObjectRef,
        rng: &mut dyn RngCore,
    ) -> Result<Morphism<Self::Payload>> {
        self.require_hom(obj, obj)?;
        Ok(Morphism::new_unchecked(obj, obj, self.sample_endo_raw(obj, rng)?))
    }

    fn sample(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        rng: &mut dyn RngCore,
    ) -> Result<Morphism<Self::Payload>> {
        self.require_hom(dom, cod)?;
        Ok(Morphism::new_unchecked(dom, cod, self.sample_raw(dom, cod, rng)?))
    }

    fn encode(&self, m: &Morphism<Self::Payload>) -> Value {
        self.encode_payload(&m.payload)
    }

    /// Parses and validates an encoded element of `Hom(dom, cod)`.
    fn decode(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        value: &Value,
    ) -> Result<Morphism<Self::Payload>> {
        self.require_hom(dom, cod)?;
        let payload = self.decode_payload(dom, cod, value)?;
        let m = Morphism::new_unchecked(dom, cod, payload);
        self.validate(&m)?;
        Ok(m)
    }

    /// Hom-group addition of two parallel morphisms.
    fn add(
        &self,
        x: &Morphism<Self::Payload>,
        y: &Morphism<Self::Payload>,
    ) -> Result<Morphism<Self::Payload>> {
        let additive = self
            .additive()
            .ok_or_else(|| Error::NotEnriched(self.model_id()))?;
        if (x.dom, x.cod) != (y.dom, y.cod) {
            return Err(Error::ShapeMismatch(format!(
                "cannot add {} to {}",
                self.hom_tag(x.dom, x.cod),
                self.hom_tag(y.dom, y.cod)
            )));
        }
        self.validate(x)?;
        self.validate(y)?;
        let payload = additive.add_raw(x.dom, x.cod, &x.payload, &y.payload)?;
        Ok(Morphism::new_unchecked(x.dom, x.cod, payload))
    }

    /// All ordered object pairs with a non-empty hom-set.
    fn inhabited_homs(&self) -> Vec<(ObjectRef, ObjectRef)> {
        let objs = self.objects();
        let mut out = Vec::new();
        for &a in &objs {
            for &b in &objs {
                if self.hom_inhabited(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Non-fatal observations about a model or a public element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diagnostic {
    /// Every sampled endomorphism acted trivially on the public element.
    ConstantAction { side: ActionSide, hom: String },
    /// The public matrix is the zero of its hom-group; every derived key is predictable.
    DegeneratePublicMatrix { hom: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionSide {
    Right,
    Left,
}

/// Flags degenerate (constant) actions of the endomorphism monoids on `g`.
pub fn diagnose_action<C: CategoryModel + ?Sized>(
    model: &C,
    g: &Morphism<C::Payload>,
    rng: &mut dyn RngCore,
    samples: usize,
) -> Result<Vec<Diagnostic>> {
    let mut out = Vec::new();
    let mut right_constant = true;
    let mut left_constant = true;
    for _ in 0..samples {
        let f = model.sample_endo(g.dom(), rng)?;
        if model.compose(g, &f)? != *g {
            right_constant = false;
        }
        let h = model.sample_endo(g.cod(), rng)?;
        if model.compose(&h, g)? != *g {
            left_constant = false;
        }
    }
    let hom = model.hom_tag(g.dom(), g.cod());
    if right_constant {
        out.push(Diagnostic::ConstantAction {
            side: ActionSide::Right,
            hom: hom.clone(),
        });
    }
    if left_constant {
        out.push(Diagnostic::ConstantAction {
            side: ActionSide::Left,
            hom,
        });
    }
    Ok(out)
}
