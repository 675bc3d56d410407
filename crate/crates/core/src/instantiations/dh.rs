//! The Diffie-Hellman category and its multi-object chain variant.
//!
//! Two objects `A`, `B`: `Hom(A,A) = Hom(B,B)` are exponents modulo the public
//! order `s` under multiplication, `Hom(A,B) = <g>` inside `Z_p^*`, and
//! `Hom(B,A)` is empty. An endomorphism `n` acts on an arrow `x` by `x^n` from
//! either side.
//!
//! The chain variant has objects `C1..Cn`. `Hom(C1,Cj)` for `j > 1` is `<g>`,
//! `Hom(Ci,Cj)` for `2 <= i <= j` and `Hom(C1,C1)` are exponents, and every
//! backwards hom-set is empty. With `n = 2` it is the two-object category.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arith::{self, MAX_MODULUS};
use crate::category::{CategoryModel, ObjectRef};
use crate::error::{Error, Result};

/// Hom-sets at or below this size can be listed for exhaustive law checks.
const ENUMERATION_LIMIT: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DhParams {
    /// Prime modulus.
    pub p: u64,
    /// Public generator of the key group.
    pub g: u64,
    /// Multiplicative order of `g`.
    pub s: u64,
}

impl DhParams {
    pub fn validate(&self) -> Result<()> {
        let Self { p, g, s } = *self;
        if p >= MAX_MODULUS || !arith::is_prime(p) {
            return Err(Error::InvalidParams(format!(
                "p = {p} must be a prime below 2^32"
            )));
        }
        if s < 3 {
            return Err(Error::InvalidParams(format!(
                "order s = {s} leaves no exponents in [2, s-1]"
            )));
        }
        if g <= 1 || g >= p || !arith::has_order(g, s, p) {
            return Err(Error::InvalidParams(format!(
                "g = {g} does not have order s = {s} modulo p = {p}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum HomKind {
    Exponent,
    Group,
    Empty,
}

#[derive(Clone, Debug)]
pub struct DhCategory {
    params: DhParams,
    names: Vec<String>,
    chain: bool,
}

/// The two-object category whose CKAP is exactly Diffie-Hellman.
pub fn dh_category(params: DhParams) -> Result<DhCategory> {
    params.validate()?;
    Ok(DhCategory {
        params,
        names: vec!["A".into(), "B".into()],
        chain: false,
    })
}

/// An `n`-object chain `C1 -> C2 -> ... -> Cn` over the same group, for multi-party sessions.
pub fn dh_chain(params: DhParams, n: usize) -> Result<DhCategory> {
    params.validate()?;
    if !(2..=u16::MAX as usize).contains(&n) {
        return Err(Error::InvalidParams(format!(
            "a chain needs at least two objects, got {n}"
        )));
    }
    Ok(DhCategory {
        params,
        names: (1..=n).map(|i| format!("C{i}")).collect(),
        chain: true,
    })
}

impl DhCategory {
    pub const A: ObjectRef = ObjectRef(0);
    pub const B: ObjectRef = ObjectRef(1);

    pub fn params(&self) -> &DhParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// The public generator as an element of `Hom(A,B)` (or `Hom(C1,C2)`).
    pub fn generator(&self) -> crate::category::Morphism<u64> {
        crate::category::Morphism::new_unchecked(ObjectRef(0), ObjectRef(1), self.params.g)
    }

    /// Exponent endomorphism `e mod s` of `obj`.
    pub fn exponent(&self, obj: ObjectRef, e: u64) -> Result<crate::category::Morphism<u64>> {
        self.morphism(obj, obj, e)
    }

    fn kind(&self, dom: ObjectRef, cod: ObjectRef) -> HomKind {
        let (i, j) = (dom.0 as usize, cod.0 as usize);
        if i >= self.names.len() || j >= self.names.len() || i > j {
            HomKind::Empty
        } else if i == 0 && j > 0 {
            HomKind::Group
        } else {
            HomKind::Exponent
        }
    }
}

impl CategoryModel for DhCategory {
    type Payload = u64;

    fn model_id(&self) -> String {
        let DhParams { p, g, s } = self.params;
        if self.chain {
            format!("dh-chain{}(p={p},g={g},s={s})", self.names.len())
        } else {
            format!("dh(p={p},g={g},s={s})")
        }
    }

    fn objects(&self) -> Vec<ObjectRef> {
        (0..self.names.len() as u16).map(ObjectRef).collect()
    }

    fn object_name(&self, obj: ObjectRef) -> Option<String> {
        self.names.get(obj.0 as usize).cloned()
    }

    fn hom_inhabited(&self, dom: ObjectRef, cod: ObjectRef) -> bool {
        self.kind(dom, cod) != HomKind::Empty
    }

    fn check_payload(&self, dom: ObjectRef, cod: ObjectRef, x: &u64) -> std::result::Result<(), String> {
        let DhParams { p, s, .. } = self.params;
        match self.kind(dom, cod) {
            HomKind::Exponent if *x < s => Ok(()),
            HomKind::Exponent => Err(format!("exponent {x} not reduced mod {s}")),
            HomKind::Group if *x == 0 || *x >= p => Err(format!("{x} is not a unit mod {p}")),
            HomKind::Group if arith::pow_mod(*x, s, p) != 1 => {
                Err(format!("{x} is not in the subgroup of order {s}"))
            }
            HomKind::Group => Ok(()),
            HomKind::Empty => Err("empty hom-set".into()),
        }
    }

    fn canonicalize(&self, dom: ObjectRef, cod: ObjectRef, x: u64) -> Result<u64> {
        Ok(match self.kind(dom, cod) {
            HomKind::Exponent => x % self.params.s,
            _ => x % self.params.p,
        })
    }

    fn compose_raw(&self, x: ObjectRef, y: ObjectRef, z: ObjectRef, g: &u64, f: &u64) -> Result<u64> {
        let DhParams { p, s, .. } = self.params;
        match (self.kind(x, y), self.kind(y, z)) {
            (HomKind::Exponent, HomKind::Exponent) => Ok(arith::mul_mod(*g, *f, s)),
            // f is an exponent on C1, g an element: g^f
            (HomKind::Exponent, HomKind::Group) => Ok(arith::pow_mod(*g, *f, p)),
            // f an element, g an exponent downstream: f^g
            (HomKind::Group, HomKind::Exponent) => Ok(arith::pow_mod(*f, *g, p)),
            _ => Err(Error::EmptyHom {
                dom: self.name(x),
                cod: self.name(z),
            }),
        }
    }

    fn identity_raw(&self, _obj: ObjectRef) -> Result<u64> {
        Ok(1 % self.params.s)
    }

    fn sample_endo_raw(&self, _obj: ObjectRef, rng: &mut dyn RngCore) -> Result<u64> {
        Ok(rng.gen_range(2..self.params.s))
    }

    fn sample_raw(&self, dom: ObjectRef, cod: ObjectRef, rng: &mut dyn RngCore) -> Result<u64> {
        let DhParams { p, g, s } = self.params;
        let e = rng.gen_range(0..s);
        match self.kind(dom, cod) {
            HomKind::Exponent => Ok(e),
            HomKind::Group => Ok(arith::pow_mod(g, e, p)),
            HomKind::Empty => Err(Error::NoSampler {
                dom: self.name(dom),
                cod: self.name(cod),
            }),
        }
    }

    fn encode_payload(&self, x: &u64) -> Value {
        Value::String(x.to_string())
    }

    fn decode_payload(&self, _dom: ObjectRef, _cod: ObjectRef, value: &Value) -> Result<u64> {
        value
            .as_str()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| Error::Decode(format!("expected a decimal residue string, got {value}")))
    }

    fn enumerate_hom(&self, dom: ObjectRef, cod: ObjectRef) -> Option<Vec<u64>> {
        let DhParams { p, g, s } = self.params;
        if s > ENUMERATION_LIMIT {
            return None;
        }
        match self.kind(dom, cod) {
            HomKind::Exponent => Some((0..s).collect()),
            HomKind::Group => Some((0..s).map(|e| arith::pow_mod(g, e, p)).collect()),
            HomKind::Empty => Some(Vec::new()),
        }
    }

    fn secret_space(&self, obj: ObjectRef) -> Option<Box<dyn Iterator<Item = u64> + '_>> {
        (self.kind(obj, obj) == HomKind::Exponent).then(|| Box::new(0..self.params.s) as Box<_>)
    }

    fn modulus(&self) -> Option<u64> {
        Some(self.params.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn toy() -> DhCategory {
        dh_category(DhParams { p: 23, g: 5, s: 22 }).unwrap()
    }

    #[test]
    fn endo_acts_by_exponentiation() {
        let c = toy();
        let six = c.exponent(DhCategory::A, 6).unwrap();
        let g = c.generator();
        assert_eq!(*c.compose(&g, &six).unwrap().payload(), 8);
        let one = c.identity(DhCategory::A).unwrap();
        assert_eq!(*one.payload(), 1);
        assert_eq!(c.compose(&g, &one).unwrap(), g);
    }

    #[test]
    fn endo_composition_reduces_mod_order() {
        let c = toy();
        let six = c.exponent(DhCategory::A, 6).unwrap();
        let fifteen = c.exponent(DhCategory::A, 15).unwrap();
        let both = c.compose(&fifteen, &six).unwrap();
        assert_eq!(*both.payload(), 2);
        let g = c.generator();
        assert_eq!(*c.compose(&g, &both).unwrap().payload(), 2);
        // (5^6)^15 == 5^(90 mod 22) mod 23, checked by direct iteration
        let mut direct = 1u64;
        for _ in 0..90 {
            direct = direct * 5 % 23;
        }
        assert_eq!(direct, 2);
    }

    #[test]
    fn reverse_hom_is_empty() {
        let c = toy();
        assert!(!c.hom_inhabited(DhCategory::B, DhCategory::A));
        let err = c.morphism(DhCategory::B, DhCategory::A, 3).unwrap_err();
        assert!(matches!(err, Error::EmptyHom { .. }));
    }

    #[test]
    fn non_composable_pair_rejected() {
        let c = toy();
        let g = c.generator();
        let b_endo = c.exponent(DhCategory::B, 3).unwrap();
        assert!(matches!(
            c.compose(&g, &b_endo),
            Err(Error::NonComposable { .. })
        ));
    }

    #[test]
    fn invalid_generator_rejected() {
        assert!(dh_category(DhParams { p: 23, g: 4, s: 22 }).is_err());
        assert!(dh_category(DhParams { p: 24, g: 5, s: 22 }).is_err());
        assert!(dh_category(DhParams { p: 23, g: 5, s: 2 }).is_err());
    }

    #[test]
    fn foreign_payload_rejected() {
        let c = dh_category(DhParams { p: 23, g: 4, s: 11 }).unwrap();
        // 5 generates all of Z_23^*, so it is outside the order-11 subgroup
        let err = c.decode(DhCategory::A, DhCategory::B, &Value::String("5".into()));
        assert!(matches!(err, Err(Error::ForeignMorphism { .. })));
        assert!(c.decode(DhCategory::A, DhCategory::B, &Value::String("x".into())).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let c = toy();
        let draw = |seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            *c.sample_endo(DhCategory::A, &mut rng).unwrap().payload()
        };
        assert_eq!(draw(17), draw(17));
        for seed in 0..200 {
            assert!((2..22).contains(&draw(seed)));
        }
    }

    #[test]
    fn sampling_spreads_over_large_hom_sets() {
        let c = dh_category(DhParams {
            p: 2147483579,
            g: 4,
            s: 1073741789,
        })
        .unwrap();
        let mut seen = std::collections::HashSet::new();
        for seed in 0..100 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            seen.insert(*c.sample_endo(DhCategory::A, &mut rng).unwrap().payload());
        }
        assert!(seen.len() >= 99);
    }

    #[test]
    fn chain_of_two_matches_category() {
        let params = DhParams { p: 23, g: 5, s: 22 };
        let chain = dh_chain(params.clone(), 2).unwrap();
        let cat = dh_category(params).unwrap();
        for (a, b) in cat.inhabited_homs() {
            assert!(chain.hom_inhabited(a, b));
        }
        assert_eq!(chain.inhabited_homs().len(), cat.inhabited_homs().len());
        let f = cat.exponent(DhCategory::A, 7).unwrap();
        let g = cat.generator();
        assert_eq!(
            cat.compose(&g, &f).unwrap().payload(),
            chain.compose(&chain.generator(), &chain.exponent(ObjectRef(0), 7).unwrap()).unwrap().payload()
        );
    }
}
