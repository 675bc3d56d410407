//! Free enrichment of a category over abelian groups (or abelian monoids).
//!
//! `T(C)` keeps the objects of `C` and replaces each hom-set by the free
//! abelian group on it: finite formal sums `Σ c_i·m_i` with integer
//! coefficients. Composition is the bilinear extension of composition in `C`,
//! so `Hom(A,A)` becomes a unital ring and `lift` embeds `C` faithfully.
//! In [`CoefficientMode::NonNegative`] coefficients stay `>= 0`, giving the
//! free abelian-monoid enrichment instead.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::category::{CategoryModel, HomAddition, Morphism, ObjectRef};
use crate::error::{Error, Result};

pub const DEFAULT_TERM_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientMode {
    Integers,
    NonNegative,
}

/// A finite formal combination of parallel base morphisms. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormalSum<P: Ord> {
    terms: BTreeMap<P, BigInt>,
    mode: CoefficientMode,
}

impl<P: Ord + Clone> FormalSum<P> {
    pub fn zero(mode: CoefficientMode) -> Self {
        Self {
            terms: BTreeMap::new(),
            mode,
        }
    }

    pub fn generator(payload: P, mode: CoefficientMode) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(payload, BigInt::one());
        Self { terms, mode }
    }

    /// Builds a sum from `(payload, coefficient)` pairs, merging like terms.
    pub fn from_terms<I>(terms: I, mode: CoefficientMode) -> Self
    where
        I: IntoIterator<Item = (P, BigInt)>,
    {
        let mut out = Self::zero(mode);
        for (p, c) in terms {
            out.add_term(p, c);
        }
        out
    }

    pub fn mode(&self) -> CoefficientMode {
        self.mode
    }

    pub fn terms(&self) -> impl Iterator<Item = (&P, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: &P) -> BigInt {
        self.terms.get(p).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, p: P, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(p) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }
}

/// `T(C)`: the free enrichment of `base`.
#[derive(Clone, Debug)]
pub struct FreeEnrichment<C> {
    base: C,
    mode: CoefficientMode,
    term_cap: usize,
}

/// Builds `T(base)` with the default term cap.
pub fn enrich<C: CategoryModel>(base: C, mode: CoefficientMode) -> FreeEnrichment<C> {
    FreeEnrichment {
        base,
        mode,
        term_cap: DEFAULT_TERM_CAP,
    }
}

impl<C: CategoryModel> FreeEnrichment<C> {
    pub fn with_term_cap(mut self, cap: usize) -> Self {
        self.term_cap = cap;
        self
    }

    pub fn base(&self) -> &C {
        &self.base
    }

    pub fn mode(&self) -> CoefficientMode {
        self.mode
    }

    /// Embeds a base morphism as the one-term sum `1·m`.
    pub fn lift(&self, m: &Morphism<C::Payload>) -> Result<Morphism<FormalSum<C::Payload>>> {
        self.base.validate(m)?;
        Ok(Morphism::new_unchecked(
            m.dom(),
            m.cod(),
            FormalSum::generator(m.payload().clone(), self.mode),
        ))
    }

    /// Inverse of [`lift`](Self::lift) on its image.
    pub fn unlift(&self, x: &Morphism<FormalSum<C::Payload>>) -> Option<Morphism<C::Payload>> {
        let sum = x.payload();
        if sum.len() != 1 {
            return None;
        }
        let (p, c) = sum.terms().next()?;
        c.is_one()
            .then(|| Morphism::new_unchecked(x.dom(), x.cod(), p.clone()))
    }

    /// Bilinear composition; identical to [`CategoryModel::compose`] on `T(C)`.
    pub fn compose_bilinear(
        &self,
        x: &Morphism<FormalSum<C::Payload>>,
        y: &Morphism<FormalSum<C::Payload>>,
    ) -> Result<Morphism<FormalSum<C::Payload>>> {
        self.compose(x, y)
    }

    /// Additive inverse; only defined over the integers.
    pub fn negate(
        &self,
        x: &Morphism<FormalSum<C::Payload>>,
    ) -> Result<Morphism<FormalSum<C::Payload>>> {
        if self.mode == CoefficientMode::NonNegative {
            return Err(Error::ShapeMismatch(
                "negation is undefined over non-negative coefficients".into(),
            ));
        }
        self.validate(x)?;
        let terms = x.payload().terms().map(|(p, c)| (p.clone(), -c.clone()));
        Ok(Morphism::new_unchecked(
            x.dom(),
            x.cod(),
            FormalSum::from_terms(terms, self.mode),
        ))
    }

    fn check_cap(&self, terms: usize) -> Result<()> {
        if terms > self.term_cap {
            Err(Error::TermExplosion {
                cap: self.term_cap,
                terms,
            })
        } else {
            Ok(())
        }
    }

    fn sorted_encoding<'s>(&self, sum: &'s FormalSum<C::Payload>) -> Vec<(String, Value, &'s BigInt)> {
        let mut rows: Vec<_> = sum
            .terms()
            .map(|(p, c)| {
                let enc = self.base.encode_payload(p);
                (enc.to_string(), enc, c)
            })
            .collect();
        rows.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
        rows
    }
}

impl<C: CategoryModel> CategoryModel for FreeEnrichment<C> {
    type Payload = FormalSum<C::Payload>;

    fn model_id(&self) -> String {
        match self.mode {
            CoefficientMode::Integers => format!("T({})", self.base.model_id()),
            CoefficientMode::NonNegative => format!("T+({})", self.base.model_id()),
        }
    }

    fn objects(&self) -> Vec<ObjectRef> {
        self.base.objects()
    }

    fn object_name(&self, obj: ObjectRef) -> Option<String> {
        self.base.object_name(obj)
    }

    fn hom_inhabited(&self, dom: ObjectRef, cod: ObjectRef) -> bool {
        self.base.hom_inhabited(dom, cod)
    }

    fn check_payload(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        sum: &Self::Payload,
    ) -> std::result::Result<(), String> {
        if sum.mode != self.mode {
            return Err(format!("coefficient mode {:?}, expected {:?}", sum.mode, self.mode));
        }
        if sum.len() > self.term_cap {
            return Err(format!("{} terms exceed the cap of {}", sum.len(), self.term_cap));
        }
        for (p, c) in sum.terms() {
            if c.is_zero() {
                return Err("stored zero coefficient".into());
            }
            if self.mode == CoefficientMode::NonNegative && c.is_negative() {
                return Err(format!("negative coefficient {c} in monoid mode"));
            }
            self.base.check_payload(dom, cod, p)?;
        }
        Ok(())
    }

    fn canonicalize(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        sum: Self::Payload,
    ) -> Result<Self::Payload> {
        let mode = sum.mode;
        let mut out = FormalSum::zero(mode);
        for (p, c) in sum.terms {
            out.add_term(self.base.canonicalize(dom, cod, p)?, c);
        }
        Ok(out)
    }

    fn compose_raw(
        &self,
        x: ObjectRef,
        y: ObjectRef,
        z: ObjectRef,
        g: &Self::Payload,
        f: &Self::Payload,
    ) -> Result<Self::Payload> {
        if g.mode != f.mode {
            return Err(Error::ShapeMismatch("mixed coefficient modes".into()));
        }
        let mut out = FormalSum::zero(g.mode);
        for (gp, gc) in g.terms() {
            for (fp, fc) in f.terms() {
                let composite = self.base.compose_raw(x, y, z, gp, fp)?;
                out.add_term(composite, gc * fc);
                self.check_cap(out.len())?;
            }
        }
        Ok(out)
    }

    fn identity_raw(&self, obj: ObjectRef) -> Result<Self::Payload> {
        Ok(FormalSum::generator(self.base.identity_raw(obj)?, self.mode))
    }

    fn sample_endo_raw(&self, obj: ObjectRef, rng: &mut dyn RngCore) -> Result<Self::Payload> {
        Ok(FormalSum::generator(self.base.sample_endo_raw(obj, rng)?, self.mode))
    }

    /// One to three terms with coefficients in `±[1,3]` (or `[1,3]` in monoid mode).
    fn sample_raw(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        rng: &mut dyn RngCore,
    ) -> Result<Self::Payload> {
        let n = rng.gen_range(1..=3);
        let mut terms = Vec::with_capacity(n);
        for _ in 0..n {
            let p = self.base.sample_raw(dom, cod, rng)?;
            let mut c: i64 = rng.gen_range(1..=3);
            if self.mode == CoefficientMode::Integers && rng.gen_bool(0.5) {
                c = -c;
            }
            terms.push((p, BigInt::from(c)));
        }
        Ok(FormalSum::from_terms(terms, self.mode))
    }

    /// Sorted `[payload, "coefficient"]` pairs, ordered by the payload's JSON bytes.
    fn encode_payload(&self, sum: &Self::Payload) -> Value {
        Value::Array(
            self.sorted_encoding(sum)
                .into_iter()
                .map(|(_, enc, c)| Value::Array(vec![enc, Value::String(c.to_string())]))
                .collect(),
        )
    }

    fn decode_payload(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        value: &Value,
    ) -> Result<Self::Payload> {
        let rows = value
            .as_array()
            .ok_or_else(|| Error::Decode(format!("expected a list of terms, got {value}")))?;
        let mut out = FormalSum::zero(self.mode);
        let mut previous: Option<String> = None;
        for row in rows {
            let pair = row
                .as_array()
                .filter(|r| r.len() == 2)
                .ok_or_else(|| Error::Decode(format!("bad term {row}")))?;
            let key = pair[0].to_string();
            if previous.as_ref().is_some_and(|prev| prev.as_bytes() >= key.as_bytes()) {
                return Err(Error::Decode("terms not in canonical order".into()));
            }
            previous = Some(key);
            let coefficient: BigInt = pair[1]
                .as_str()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Decode(format!("bad coefficient {}", pair[1])))?;
            if coefficient.is_zero() {
                return Err(Error::Decode("zero coefficient in canonical sum".into()));
            }
            let p = self.base.decode_payload(dom, cod, &pair[0])?;
            out.terms.insert(p, coefficient);
        }
        Ok(out)
    }

    fn secret_space(&self, obj: ObjectRef) -> Option<Box<dyn Iterator<Item = Self::Payload> + '_>> {
        let mode = self.mode;
        let inner = self.base.secret_space(obj)?;
        Some(Box::new(inner.map(move |p| FormalSum::generator(p, mode))))
    }

    fn additive(&self) -> Option<&dyn HomAddition<Self::Payload>> {
        Some(self)
    }

    fn modulus(&self) -> Option<u64> {
        self.base.modulus()
    }
}

impl<C: CategoryModel> HomAddition<FormalSum<C::Payload>> for FreeEnrichment<C> {
    fn zero_raw(&self, _dom: ObjectRef, _cod: ObjectRef) -> Result<FormalSum<C::Payload>> {
        Ok(FormalSum::zero(self.mode))
    }

    fn add_raw(
        &self,
        _dom: ObjectRef,
        _cod: ObjectRef,
        x: &FormalSum<C::Payload>,
        y: &FormalSum<C::Payload>,
    ) -> Result<FormalSum<C::Payload>> {
        if x.mode != y.mode {
            return Err(Error::ShapeMismatch("mixed coefficient modes".into()));
        }
        let mut out = x.clone();
        for (p, c) in y.terms() {
            out.add_term(p.clone(), c.clone());
        }
        self.check_cap(out.len())?;
        Ok(out)
    }

    fn scale_raw(
        &self,
        _dom: ObjectRef,
        _cod: ObjectRef,
        x: &FormalSum<C::Payload>,
        times: u64,
    ) -> Result<FormalSum<C::Payload>> {
        let k = BigInt::from(times);
        Ok(FormalSum::from_terms(
            x.terms().map(|(p, c)| (p.clone(), c * &k)),
            x.mode,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instantiations::dh::{dh_category, DhCategory, DhParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn t_dh() -> FreeEnrichment<DhCategory> {
        enrich(
            dh_category(DhParams { p: 23, g: 5, s: 22 }).unwrap(),
            CoefficientMode::Integers,
        )
    }

    fn sum(t: &FreeEnrichment<DhCategory>, dom: ObjectRef, cod: ObjectRef, terms: &[(u64, i64)]) -> Morphism<FormalSum<u64>> {
        let terms = terms.iter().map(|&(p, c)| (p, BigInt::from(c)));
        t.morphism(dom, cod, FormalSum::from_terms(terms, t.mode())).unwrap()
    }

    #[test]
    fn lift_is_a_single_unit_term() {
        let t = t_dh();
        let g = t.base().generator();
        let lifted = t.lift(&g).unwrap();
        assert_eq!(lifted.payload().len(), 1);
        assert_eq!(lifted.payload().coefficient(&5), BigInt::one());
        assert_eq!(t.unlift(&lifted), Some(g));
    }

    #[test]
    fn addition_merges_and_cancels() {
        let t = t_dh();
        let (a, b) = (DhCategory::A, DhCategory::B);
        let x = sum(&t, a, b, &[(5, 1)]);
        let y = sum(&t, a, b, &[(5, 2)]);
        assert_eq!(t.add(&x, &y).unwrap(), sum(&t, a, b, &[(5, 3)]));
        let neg = sum(&t, a, b, &[(5, -1)]);
        assert!(t.add(&x, &neg).unwrap().payload().is_empty());
        assert_eq!(t.negate(&x).unwrap(), neg);
    }

    #[test]
    fn bilinear_expansion_of_single_terms() {
        let t = t_dh();
        let (a, b) = (DhCategory::A, DhCategory::B);
        let g = sum(&t, a, b, &[(5, 2)]);
        let f = sum(&t, a, a, &[(6, 3)]);
        // 2·5 composed with 3·(exp 6) = 6·(5^6) = 6·8
        assert_eq!(t.compose_bilinear(&g, &f).unwrap(), sum(&t, a, b, &[(8, 6)]));
    }

    #[test]
    fn bilinear_expansion_merges_like_terms() {
        let t = t_dh();
        let (a, b) = (DhCategory::A, DhCategory::B);
        // exponents 6 and 6+11 give the same image of a square (order 11)
        let g = sum(&t, a, b, &[(4, 1)]);
        let f = sum(&t, a, a, &[(6, 1), (17, 1)]);
        assert_eq!(t.compose(&g, &f).unwrap(), sum(&t, a, b, &[(4096 % 23, 2)]));
    }

    #[test]
    fn mode_mismatch_is_a_shape_error() {
        let t = t_dh();
        let (a, b) = (DhCategory::A, DhCategory::B);
        let x = sum(&t, a, b, &[(5, 1)]);
        let other = Morphism::new_unchecked(
            a,
            b,
            FormalSum::generator(5u64, CoefficientMode::NonNegative),
        );
        assert!(t.add(&x, &other).is_err());
    }

    #[test]
    fn term_cap_is_enforced() {
        let t = t_dh().with_term_cap(2);
        let (a, b) = (DhCategory::A, DhCategory::B);
        let x = Morphism::new_unchecked(a, b, FormalSum::from_terms([(5, BigInt::one()), (2, BigInt::one())], CoefficientMode::Integers));
        let y = Morphism::new_unchecked(a, b, FormalSum::generator(3u64, CoefficientMode::Integers));
        assert!(matches!(
            t.add(&x, &y),
            Err(Error::TermExplosion { cap: 2, terms: 3 })
        ));
    }

    #[test]
    fn monoid_mode_stays_non_negative() {
        let t = enrich(
            dh_category(DhParams { p: 23, g: 5, s: 22 }).unwrap(),
            CoefficientMode::NonNegative,
        );
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let (a, b) = (DhCategory::A, DhCategory::B);
        let mut acc = t.sample(a, b, &mut rng).unwrap();
        for _ in 0..1000 {
            let f = t.sample(a, a, &mut rng).unwrap();
            let y = t.sample(a, b, &mut rng).unwrap();
            acc = if rng.gen_bool(0.5) {
                t.add(&acc, &y).unwrap()
            } else {
                t.compose(&y, &f).unwrap()
            };
            assert!(acc.payload().terms().all(|(_, c)| !c.is_negative()));
            t.validate(&acc).unwrap();
        }
        assert!(t.negate(&acc).is_err());
    }

    #[test]
    fn encoding_is_sorted_and_round_trips() {
        let t = t_dh();
        let (a, b) = (DhCategory::A, DhCategory::B);
        let x = sum(&t, a, b, &[(10, 3), (2, -1), (9, 4)]);
        let enc = t.encode(&x);
        assert_eq!(enc, serde_json::json!([["10", "3"], ["2", "-1"], ["9", "4"]]));
        assert_eq!(t.decode(a, b, &enc).unwrap(), x);
        let unsorted = serde_json::json!([["9", "4"], ["2", "-1"]]);
        assert!(t.decode(a, b, &unsorted).is_err());
    }
}
