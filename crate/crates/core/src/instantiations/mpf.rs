//! Matrix power functions as an enriched category over abelian monoids.
//!
//! `Hom(A,A) = Hom(B,B) = S = Z_{p-1}` (the exponent semiring), `Hom(A,B) = M = Z_p^*`
//! written additively: monoid "addition" on `M` is multiplication mod `p`, with
//! zero `1`. An exponent acts on an element by exponentiation from either
//! side, so matrix actions become
//!
//! ```text
//! (W·Ψ)_ij = Π_k w_ik^(ψ_kj)        (Ω·W)_ij = Π_k w_kj^(ω_ik)
//! ```

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arith::{self, MAX_MODULUS};
use crate::category::{CategoryModel, HomAddition, ObjectRef};
use crate::error::{Error, Result};
use crate::matrix::HomMatrix;

const MAX_DIM: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpfParams {
    /// Prime modulus; the exponent semiring is `Z_{p-1}`.
    pub p: u64,
    /// Matrix dimension.
    pub k: usize,
    /// Public base matrix, entries in `Z_p^*`.
    pub base: Vec<Vec<u64>>,
}

#[derive(Clone, Debug)]
pub struct MpfModel {
    params: MpfParams,
}

/// Validates parameters and builds the semibimodule model.
pub fn mpf_model(params: MpfParams) -> Result<MpfModel> {
    let MpfParams { p, k, ref base } = params;
    if !(3..MAX_MODULUS).contains(&p) || !arith::is_prime(p) {
        return Err(Error::InvalidParams(format!(
            "p = {p} must be an odd prime below 2^32"
        )));
    }
    if k == 0 || k > MAX_DIM {
        return Err(Error::InvalidParams(format!("dimension k = {k} outside 1..={MAX_DIM}")));
    }
    if base.len() != k || base.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidParams(format!("base matrix is not {k}x{k}")));
    }
    if let Some(bad) = base.iter().flatten().find(|&&x| x % p == 0) {
        return Err(Error::InvalidParams(format!(
            "base entry {bad} is not invertible mod {p}"
        )));
    }
    Ok(MpfModel { params })
}

impl MpfModel {
    pub const A: ObjectRef = ObjectRef(0);
    pub const B: ObjectRef = ObjectRef(1);

    pub fn params(&self) -> &MpfParams {
        &self.params
    }

    pub fn p(&self) -> u64 {
        self.params.p
    }

    /// Order of the exponent semiring, `p - 1`.
    pub fn exponent_modulus(&self) -> u64 {
        self.params.p - 1
    }

    /// The public base matrix as a `k x k` hom-matrix over `Hom(A,B)`.
    pub fn public_matrix(&self) -> Result<HomMatrix<u64>> {
        let k = self.params.k;
        let entries = self.params.base.iter().flatten().copied().collect();
        HomMatrix::new(self, Self::A, Self::B, k, k, entries)
    }

    fn is_exponent_hom(dom: ObjectRef, cod: ObjectRef) -> bool {
        dom == cod && dom.0 < 2
    }
}

impl CategoryModel for MpfModel {
    type Payload = u64;

    fn model_id(&self) -> String {
        format!("mpf(p={},k={})", self.params.p, self.params.k)
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
        dom.0 < 2 && cod.0 < 2 && dom.0 <= cod.0
    }

    fn check_payload(&self, dom: ObjectRef, cod: ObjectRef, x: &u64) -> std::result::Result<(), String> {
        let p = self.params.p;
        if Self::is_exponent_hom(dom, cod) {
            if *x < p - 1 {
                Ok(())
            } else {
                Err(format!("exponent {x} not reduced mod {}", p - 1))
            }
        } else if (1..p).contains(x) {
            Ok(())
        } else {
            Err(format!("{x} is not a reduced unit mod {p}"))
        }
    }

    fn canonicalize(&self, dom: ObjectRef, cod: ObjectRef, x: u64) -> Result<u64> {
        Ok(if Self::is_exponent_hom(dom, cod) {
            x % (self.params.p - 1)
        } else {
            x % self.params.p
        })
    }

    fn compose_raw(&self, x: ObjectRef, y: ObjectRef, z: ObjectRef, g: &u64, f: &u64) -> Result<u64> {
        let p = self.params.p;
        match (x.0, y.0, z.0) {
            (0, 0, 0) | (1, 1, 1) => Ok(arith::mul_mod(*g, *f, p - 1)),
            // right action: element g raised by exponent f
            (0, 0, 1) => Ok(arith::pow_mod(*g, *f, p)),
            // left action: element f raised by exponent g
            (0, 1, 1) => Ok(arith::pow_mod(*f, *g, p)),
            _ => Err(Error::EmptyHom {
                dom: self.name(x),
                cod: self.name(z),
            }),
        }
    }

    fn identity_raw(&self, _obj: ObjectRef) -> Result<u64> {
        Ok(1)
    }

    fn sample_endo_raw(&self, _obj: ObjectRef, rng: &mut dyn RngCore) -> Result<u64> {
        Ok(rng.gen_range(0..self.params.p - 1))
    }

    fn sample_raw(&self, dom: ObjectRef, cod: ObjectRef, rng: &mut dyn RngCore) -> Result<u64> {
        if Self::is_exponent_hom(dom, cod) {
            self.sample_endo_raw(dom, rng)
        } else {
            Ok(rng.gen_range(1..self.params.p))
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
        let p = self.params.p;
        if p > 4096 || !self.hom_inhabited(dom, cod) {
            return None;
        }
        Some(if Self::is_exponent_hom(dom, cod) {
            (0..p - 1).collect()
        } else {
            (1..p).collect()
        })
    }

    fn secret_space(&self, obj: ObjectRef) -> Option<Box<dyn Iterator<Item = u64> + '_>> {
        Self::is_exponent_hom(obj, obj).then(|| Box::new(0..self.params.p - 1) as Box<_>)
    }

    fn additive(&self) -> Option<&dyn HomAddition<u64>> {
        Some(self)
    }

    fn modulus(&self) -> Option<u64> {
        Some(self.params.p)
    }
}

impl HomAddition<u64> for MpfModel {
    fn zero_raw(&self, dom: ObjectRef, cod: ObjectRef) -> Result<u64> {
        Ok(if Self::is_exponent_hom(dom, cod) { 0 } else { 1 })
    }

    fn add_raw(&self, dom: ObjectRef, cod: ObjectRef, x: &u64, y: &u64) -> Result<u64> {
        let p = self.params.p;
        Ok(if Self::is_exponent_hom(dom, cod) {
            arith::add_mod(*x, *y, p - 1)
        } else {
            arith::mul_mod(*x, *y, p)
        })
    }

    fn scale_raw(&self, dom: ObjectRef, cod: ObjectRef, x: &u64, times: u64) -> Result<u64> {
        let p = self.params.p;
        Ok(if Self::is_exponent_hom(dom, cod) {
            arith::mul_mod(*x, times, p - 1)
        } else {
            arith::pow_mod(*x, times, p)
        })
    }
}
