//! Word-sized modular arithmetic and small square matrices over `Z_q`.
//!
//! Moduli are kept below `2^32` so every product fits comfortably in `u128`
//! and factoring by trial division stays cheap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted by parameter validation.
pub const MAX_MODULUS: u64 = 1 << 32;

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

/// Square-and-multiply.
pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut base = base % m;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    // deterministic for all u64 with these witnesses
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Inverse of `a` modulo a prime `p` via Fermat.
pub fn inv_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        None
    } else {
        Some(pow_mod(a, p - 2, p))
    }
}

/// Whether `g` has multiplicative order exactly `s` modulo `p`.
pub fn has_order(g: u64, s: u64, p: u64) -> bool {
    if s == 0 || pow_mod(g, s, p) != 1 {
        return false;
    }
    prime_factors(s)
        .into_iter()
        .all(|r| pow_mod(g, s / r, p) != 1)
}

/// A `d x d` matrix over `Z_q`, row-major, entries reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModMatrix {
    dim: usize,
    entries: Vec<u64>,
}

impl ModMatrix {
    pub fn from_rows(rows: &[Vec<u64>], q: u64) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParams(format!(
                "matrix must be square and non-empty, got {} rows",
                dim
            )));
        }
        Ok(Self {
            dim,
            entries: rows.iter().flatten().map(|&x| x % q).collect(),
        })
    }

    pub fn from_row_major(dim: usize, entries: Vec<u64>, q: u64) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self {
            dim,
            entries: entries.into_iter().map(|x| x % q).collect(),
        })
    }

    /// Keeps entries as given, so membership checks can reject unreduced input.
    pub fn from_raw(dim: usize, entries: Vec<u64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.dim).map(<[u64]>::to_vec).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn mul(&self, other: &Self, q: u64) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut entries = vec![0u64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0u128;
                for k in 0..d {
                    acc += self.get(i, k) as u128 * other.get(k, j) as u128;
                }
                entries[i * d + j] = (acc % q as u128) as u64;
            }
        }
        Self { dim: d, entries }
    }

    pub fn pow(&self, mut exp: u64, q: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base, q);
            }
            base = base.mul(&base, q);
            exp >>= 1;
        }
        acc
    }

    /// Gauss-Jordan inverse over the prime field `Z_q`.
    pub fn inverse(&self, q: u64) -> Option<Self> {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut inv = Self::identity(d).entries;
        for col in 0..d {
            let pivot = (col..d).find(|&r| a[r * d + col] != 0)?;
            if pivot != col {
                for k in 0..d {
                    a.swap(pivot * d + k, col * d + k);
                    inv.swap(pivot * d + k, col * d + k);
                }
            }
            let scale = inv_mod_prime(a[col * d + col], q)?;
            for k in 0..d {
                a[col * d + k] = mul_mod(a[col * d + k], scale, q);
                inv[col * d + k] = mul_mod(inv[col * d + k], scale, q);
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let factor = a[r * d + col];
                if factor == 0 {
                    continue;
                }
                for k in 0..d {
                    let sub_a = mul_mod(factor, a[col * d + k], q);
                    a[r * d + k] = (a[r * d + k] + q - sub_a) % q;
                    let sub_i = mul_mod(factor, inv[col * d + k], q);
                    inv[r * d + k] = (inv[r * d + k] + q - sub_i) % q;
                }
            }
        }
        Some(Self { dim: d, entries: inv })
    }

    pub fn is_invertible(&self, q: u64) -> bool {
        self.inverse(q).is_some()
    }

    /// Multiplicative order, if it is at most `cap`.
    pub fn order(&self, q: u64, cap: u64) -> Option<u64> {
        let id = Self::identity(self.dim);
        let mut x = self.clone();
        for n in 1..=cap {
            if x == id {
                return Some(n);
            }
            x = x.mul(self, q);
        }
        None
    }
}
