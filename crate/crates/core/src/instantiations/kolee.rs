//! The conjugation category over `G = GL(d, Z_q) x GL(d, Z_q)`.
//!
//! `H_A` is the cyclic group generated by `(a0, 1)` and `H_B` the one generated
//! by `(1, b0)`; the two commute elementwise. Composition:
//!
//! * `a·a' = a'a` on `Hom(A,A)` (the opposite of the group product),
//! * `b·b' = bb'` on `Hom(B,B)`,
//! * `g·a = a g a^-1` and `b·g = b g b^-1` for `g` in `Hom(A,B) = G`.

use std::collections::HashSet;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arith::{self, ModMatrix, MAX_MODULUS};
use crate::category::{CategoryModel, Morphism, ObjectRef};
use crate::error::{Error, Result};

/// Generator orders up to this bound are computed and tabulated at construction.
const ORDER_CAP: u64 = 1 << 16;
/// Exponent range for secrets when the generator order is unknown.
const UNKNOWN_ORDER_EXPONENTS: u64 = 1 << 32;
const MAX_DIM: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugationParams {
    /// Prime modulus.
    pub q: u64,
    /// Matrix dimension.
    pub d: usize,
    /// Generator of `H_A` (first coordinate).
    pub a0: Vec<Vec<u64>>,
    /// Generator of `H_B` (second coordinate).
    pub b0: Vec<Vec<u64>>,
    /// Public element of `G`, as `[first, second]`.
    pub g: [Vec<Vec<u64>>; 2],
}

/// An element `(x, y)` of `GL(d, Z_q) x GL(d, Z_q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupPair {
    pub first: ModMatrix,
    pub second: ModMatrix,
}

impl GroupPair {
    fn mul(&self, other: &Self, q: u64) -> Self {
        Self {
            first: self.first.mul(&other.first, q),
            second: self.second.mul(&other.second, q),
        }
    }

    fn inverse(&self, q: u64) -> Option<Self> {
        Some(Self {
            first: self.first.inverse(q)?,
            second: self.second.inverse(q)?,
        })
    }

    /// `h x h^-1`.
    fn conjugate(&self, h: &Self, q: u64) -> Result<Self> {
        let h_inv = h
            .inverse(q)
            .ok_or_else(|| Error::InvalidParams("conjugating by a singular element".into()))?;
        Ok(h.mul(self, q).mul(&h_inv, q))
    }
}

#[derive(Clone, Debug)]
pub struct KoLeeCategory {
    params: ConjugationParams,
    a0: ModMatrix,
    b0: ModMatrix,
    g: GroupPair,
    order_a: Option<u64>,
    order_b: Option<u64>,
    powers_a: Option<HashSet<ModMatrix>>,
    powers_b: Option<HashSet<ModMatrix>>,
}

/// Validates parameters and builds the conjugation category.
pub fn kolee_category(params: ConjugationParams) -> Result<KoLeeCategory> {
    let q = params.q;
    if q >= MAX_MODULUS || !arith::is_prime(q) {
        return Err(Error::InvalidParams(format!("q = {q} must be a prime below 2^32")));
    }
    if params.d == 0 || params.d > MAX_DIM {
        return Err(Error::InvalidParams(format!(
            "dimension d = {} outside 1..={MAX_DIM}",
            params.d
        )));
    }
    let square = |rows: &Vec<Vec<u64>>, what: &str| -> Result<ModMatrix> {
        if rows.len() != params.d || rows.iter().any(|r| r.len() != params.d) {
            return Err(Error::InvalidParams(format!("{what} is not {0}x{0}", params.d)));
        }
        let m = ModMatrix::from_rows(rows, q)?;
        if !m.is_invertible(q) {
            return Err(Error::InvalidParams(format!("{what} is not invertible mod {q}")));
        }
        Ok(m)
    };
    let a0 = square(&params.a0, "a0")?;
    let b0 = square(&params.b0, "b0")?;
    let g = GroupPair {
        first: square(&params.g[0], "g[0]")?,
        second: square(&params.g[1], "g[1]")?,
    };
    let order_a = a0.order(q, ORDER_CAP);
    let order_b = b0.order(q, ORDER_CAP);
    let table = |gen: &ModMatrix, order: Option<u64>| {
        order.map(|n| {
            let mut x = ModMatrix::identity(gen.dim());
            let mut set = HashSet::with_capacity(n as usize);
            for _ in 0..n {
                set.insert(x.clone());
                x = x.mul(gen, q);
            }
            set
        })
    };
    let model = KoLeeCategory {
        powers_a: table(&a0, order_a),
        powers_b: table(&b0, order_b),
        params,
        a0,
        b0,
        g,
        order_a,
        order_b,
    };
    model.check_subgroups_commute()?;
    Ok(model)
}

impl KoLeeCategory {
    pub const A: ObjectRef = ObjectRef(0);
    pub const B: ObjectRef = ObjectRef(1);

    pub fn params(&self) -> &ConjugationParams {
        &self.params
    }

    pub fn q(&self) -> u64 {
        self.params.q
    }

    pub fn order_a(&self) -> Option<u64> {
        self.order_a
    }

    pub fn order_b(&self) -> Option<u64> {
        self.order_b
    }

    /// The public element `g` of `Hom(A,B)`.
    pub fn public_element(&self) -> Morphism<GroupPair> {
        Morphism::new_unchecked(Self::A, Self::B, self.g.clone())
    }

    /// `(a0^e, 1)` as an endomorphism of `A`.
    pub fn alice_power(&self, e: u64) -> Morphism<GroupPair> {
        let d = self.params.d;
        Morphism::new_unchecked(
            Self::A,
            Self::A,
            GroupPair {
                first: self.a0.pow(e, self.q()),
                second: ModMatrix::identity(d),
            },
        )
    }

    /// `(1, b0^e)` as an endomorphism of `B`.
    pub fn bob_power(&self, e: u64) -> Morphism<GroupPair> {
        let d = self.params.d;
        Morphism::new_unchecked(
            Self::B,
            Self::B,
            GroupPair {
                first: ModMatrix::identity(d),
                second: self.b0.pow(e, self.q()),
            },
        )
    }

    fn exponent_bound(&self, obj: ObjectRef) -> u64 {
        let order = if obj == Self::A { self.order_a } else { self.order_b };
        order.unwrap_or(UNKNOWN_ORDER_EXPONENTS)
    }

    fn check_subgroups_commute(&self) -> Result<()> {
        let q = self.q();
        for e in 1..=4u64 {
            let a = self.alice_power(e).into_payload();
            let b = self.bob_power(e + 1).into_payload();
            if a.mul(&b, q) != b.mul(&a, q) {
                return Err(Error::InvalidParams(
                    "H_A and H_B do not commute elementwise".into(),
                ));
            }
        }
        Ok(())
    }

    fn random_invertible(&self, rng: &mut dyn RngCore) -> ModMatrix {
        let (d, q) = (self.params.d, self.q());
        loop {
            let entries = (0..d * d).map(|_| rng.gen_range(0..q)).collect();
            let m = ModMatrix::from_row_major(d, entries, q).expect("shape is d x d");
            if m.is_invertible(q) {
                return m;
            }
        }
    }

    fn in_cyclic(
        &self,
        x: &ModMatrix,
        generator: &ModMatrix,
        table: &Option<HashSet<ModMatrix>>,
    ) -> bool {
        match table {
            Some(set) => set.contains(x),
            // order too large to tabulate: fall back to the centralizer test
            None => {
                let q = self.q();
                x.is_invertible(q) && x.mul(generator, q) == generator.mul(x, q)
            }
        }
    }

    fn reduced(&self, m: &ModMatrix) -> bool {
        m.dim() == self.params.d && m.entries().iter().all(|&x| x < self.q())
    }
}

impl CategoryModel for KoLeeCategory {
    type Payload = GroupPair;

    fn model_id(&self) -> String {
        format!("kolee(q={},d={})", self.params.q, self.params.d)
    }

    fn objects(&self) -> Vec<ObjectRef> {
        vec![Self::A, Self::B]
    }

    fn object_name(&self, obj: ObjectRef) -> Option<String> {
        match obj.0 {
            0 => Some("A".into()),
            1 => Some("B".into()),
            _ => None,
        }
    }

    fn hom_inhabited(&self, dom: ObjectRef, cod: ObjectRef) -> bool {
        !(dom == Self::B && cod == Self::A) && dom.0 < 2 && cod.0 < 2
    }

    fn check_payload(
        &self,
        dom: ObjectRef,
        cod: ObjectRef,
        x: &GroupPair,
    ) -> std::result::Result<(), String> {
        if !self.reduced(&x.first) || !self.reduced(&x.second) {
            return Err("entries not reduced or wrong dimension".into());
        }
        let q = self.q();
        match (dom.0, cod.0) {
            (0, 1) if x.first.is_invertible(q) && x.second.is_invertible(q) => Ok(()),
            (0, 1) => Err("not an element of GL(d) x GL(d)".into()),
            (0, 0) if x.second.is_identity() && self.in_cyclic(&x.first, &self.a0, &self.powers_a) => {
                Ok(())
            }
            (0, 0) => Err("not in H_A".into()),
            (1, 1) if x.first.is_identity() && self.in_cyclic(&x.second, &self.b0, &self.powers_b) => {
                Ok(())
            }
            (1, 1) => Err("not in H_B".into()),
            _ => Err("empty hom-set".into()),
        }
    }

    fn canonicalize(&self, _dom: ObjectRef, _cod: ObjectRef, x: GroupPair) -> Result<GroupPair> {
        let q = self.q();
        Ok(GroupPair {
            first: ModMatrix::from_row_major(x.first.dim(), x.first.entries().to_vec(), q)?,
            second: ModMatrix::from_row_major(x.second.dim(), x.second.entries().to_vec(), q)?,
        })
    }

    fn compose_raw(
        &self,
        x: ObjectRef,
        y: ObjectRef,
        z: ObjectRef,
        g: &GroupPair,
        f: &GroupPair,
    ) -> Result<GroupPair> {
        let q = self.q();
        match (x.0, y.0, z.0) {
            // a·a' = a'a
            (0, 0, 0) => Ok(f.mul(g, q)),
            // b·b' = bb'
            (1, 1, 1) => Ok(g.mul(f, q)),
            // g·a = a g a^-1
            (0, 0, 1) => g.conjugate(f, q),
            // b·g = b g b^-1
            (0, 1, 1) => f.conjugate(g, q),
            _ => Err(Error::EmptyHom {
                dom: self.name(x),
                cod: self.name(z),
            }),
        }
    }

    fn identity_raw(&self, _obj: ObjectRef) -> Result<GroupPair> {
        let d = self.params.d;
        Ok(GroupPair {
            first: ModMatrix::identity(d),
            second: ModMatrix::identity(d),
        })
    }

    fn sample_endo_raw(&self, obj: ObjectRef, rng: &mut dyn RngCore) -> Result<GroupPair> {
        let e = rng.gen_range(0..self.exponent_bound(obj));
        match obj.0 {
            0 => Ok(self.alice_power(e).into_payload()),
            1 => Ok(self.bob_power(e).into_payload()),
            _ => Err(Error::UnknownObject(format!("#{}", obj.0))),
        }
    }

    fn sample_raw(&self, dom: ObjectRef, cod: ObjectRef, rng: &mut dyn RngCore) -> Result<GroupPair> {
        match (dom.0, cod.0) {
            (0, 1) => Ok(GroupPair {
                first: self.random_invertible(rng),
                second: self.random_invertible(rng),
            }),
            (a, b) if a == b => self.sample_endo_raw(dom, rng),
            _ => Err(Error::NoSampler {
                dom: self.name(dom),
                cod: self.name(cod),
            }),
        }
    }

    fn encode_payload(&self, x: &GroupPair) -> Value {
        Value::from(vec![
            Value::from(x.first.entries().to_vec()),
            Value::from(x.second.entries().to_vec()),
        ])
    }

    fn decode_payload(&self, _dom: ObjectRef, _cod: ObjectRef, value: &Value) -> Result<GroupPair> {
        let d = self.params.d;
        let parts = value
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::Decode(format!("expected a pair of matrices, got {value}")))?;
        let matrix = |v: &Value| -> Result<ModMatrix> {
            let entries = v
                .as_array()
                .ok_or_else(|| Error::Decode("matrix must be a row-major array".into()))?
                .iter()
                .map(|e| e.as_u64().ok_or_else(|| Error::Decode(format!("bad entry {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if entries.len() != d * d {
                return Err(Error::Decode(format!("expected {} entries", d * d)));
            }
            ModMatrix::from_raw(d, entries)
        };
        Ok(GroupPair {
            first: matrix(&parts[0])?,
            second: matrix(&parts[1])?,
        })
    }

    fn enumerate_hom(&self, dom: ObjectRef, cod: ObjectRef) -> Option<Vec<GroupPair>> {
        if dom != cod || self.exponent_bound(dom) > 4096 || self.object_name(dom).is_none() {
            return None;
        }
        self.secret_space(dom).map(Iterator::collect)
    }

    fn secret_space(&self, obj: ObjectRef) -> Option<Box<dyn Iterator<Item = GroupPair> + '_>> {
        let bound = self.exponent_bound(obj);
        let step = match obj.0 {
            0 => self.alice_power(1).into_payload(),
            1 => self.bob_power(1).into_payload(),
            _ => return None,
        };
        let q = self.q();
        let start = self.identity_raw(obj).ok()?;
        Some(Box::new(
            std::iter::successors(Some(start), move |x| Some(x.mul(&step, q))).take(bound as usize),
        ))
    }

    fn modulus(&self) -> Option<u64> {
        Some(self.params.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    pub(crate) fn toy_params() -> ConjugationParams {
        ConjugationParams {
            q: 7,
            d: 2,
            a0: vec![vec![0, 1], vec![2, 3]],
            b0: vec![vec![0, 1], vec![4, 1]],
            g: [vec![vec![1, 2], vec![3, 5]], vec![vec![2, 1], vec![1, 1]]],
        }
    }

    // Plain 2x2 arithmetic mod 7, independent of ModMatrix.
    fn mul2(a: [u64; 4], b: [u64; 4]) -> [u64; 4] {
        [
            (a[0] * b[0] + a[1] * b[2]) % 7,
            (a[0] * b[1] + a[1] * b[3]) % 7,
            (a[2] * b[0] + a[3] * b[2]) % 7,
            (a[2] * b[1] + a[3] * b[3]) % 7,
        ]
    }

    fn inv2(a: [u64; 4]) -> [u64; 4] {
        let det = (a[0] * a[3] + 49 - (a[1] * a[2]) % 7) % 7;
        let di = (1..7).find(|x| x * det % 7 == 1).unwrap();
        [a[3] * di % 7, (7 - a[1]) * di % 7, (7 - a[2]) * di % 7, a[0] * di % 7]
    }

    fn arr(m: &ModMatrix) -> [u64; 4] {
        m.entries().try_into().unwrap()
    }

    #[test]
    fn generator_orders() {
        let c = kolee_category(toy_params()).unwrap();
        assert_eq!(c.order_a(), Some(48));
        assert_eq!(c.order_b(), Some(48));
    }

    #[test]
    fn conjugation_by_identity_is_trivial() {
        let c = kolee_category(toy_params()).unwrap();
        let g = c.public_element();
        let e = c.identity(KoLeeCategory::A).unwrap();
        assert_eq!(c.compose(&g, &e).unwrap(), g);
        let e = c.identity(KoLeeCategory::B).unwrap();
        assert_eq!(c.compose(&e, &g).unwrap(), g);
    }

    #[test]
    fn reversed_endo_composition_is_associative() {
        let c = kolee_category(toy_params()).unwrap();
        let g = c.public_element();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = c.sample_endo(KoLeeCategory::A, &mut rng).unwrap();
            let a2 = c.sample_endo(KoLeeCategory::A, &mut rng).unwrap();
            let lhs = c.compose(&c.compose(&g, &a).unwrap(), &a2).unwrap();
            let rhs = c.compose(&g, &c.compose(&a, &a2).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            // a·a' = a'a computed directly
            let direct = mul2(arr(&a2.payload().first), arr(&a.payload().first));
            assert_eq!(arr(&c.compose(&a, &a2).unwrap().payload().first), direct);
            // (g·a)·a' = (a'a) g (a'a)^-1
            let x = direct;
            let expect = mul2(mul2(x, arr(&g.payload().first)), inv2(x));
            assert_eq!(arr(&lhs.payload().first), expect);
        }
    }

    #[test]
    fn left_and_right_actions_commute() {
        let c = kolee_category(toy_params()).unwrap();
        let g = c.public_element();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let a = c.sample_endo(KoLeeCategory::A, &mut rng).unwrap();
            let b = c.sample_endo(KoLeeCategory::B, &mut rng).unwrap();
            let lhs = c.compose(&b, &c.compose(&g, &a).unwrap()).unwrap();
            let rhs = c.compose(&c.compose(&b, &g).unwrap(), &a).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn sampled_endos_are_generator_powers() {
        let c = kolee_category(toy_params()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a = c.sample_endo(KoLeeCategory::A, &mut rng).unwrap();
        let a0 = [0, 1, 2, 3];
        let mut x = [1, 0, 0, 1];
        let mut found = false;
        for _ in 0..48 {
            if x == arr(&a.payload().first) {
                found = true;
            }
            x = mul2(x, a0);
        }
        assert!(found);
        assert!(a.payload().second.is_identity());
    }

    #[test]
    fn singular_parameters_rejected() {
        let mut p = toy_params();
        p.a0 = vec![vec![1, 2], vec![2, 4]];
        assert!(matches!(kolee_category(p), Err(Error::InvalidParams(_))));
        let mut p = toy_params();
        p.q = 8;
        assert!(kolee_category(p).is_err());
    }

    #[test]
    fn decode_rejects_non_members() {
        let c = kolee_category(toy_params()).unwrap();
        let bad = serde_json::json!([[1, 2, 2, 4], [1, 0, 0, 1]]);
        assert!(c.decode(KoLeeCategory::A, KoLeeCategory::B, &bad).is_err());
        let unreduced = serde_json::json!([[8, 2, 3, 5], [2, 1, 1, 1]]);
        assert!(c.decode(KoLeeCategory::A, KoLeeCategory::B, &unreduced).is_err());
        let good = c.encode(&c.public_element());
        assert_eq!(c.decode(KoLeeCategory::A, KoLeeCategory::B, &good).unwrap(), c.public_element());
    }
}
