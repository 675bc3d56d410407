//! Session configuration: everything needed to reproduce a session.

use serde::{Deserialize, Serialize};

use super::transcript::InstanceSpec;
use super::ProtocolKind;

/// How the matrix protocol builds its commuting families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyMode {
    /// `1 x 1`; one sampled secret per party, identity on the other side.
    Reduction,
    /// Polynomials in public generator matrices, shared by both parties.
    Polynomial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EckapOptions {
    pub families: FamilyMode,
    pub rows: usize,
    pub cols: usize,
    pub degree: usize,
}

impl EckapOptions {
    pub fn reduction() -> Self {
        Self {
            families: FamilyMode::Reduction,
            rows: 1,
            cols: 1,
            degree: 0,
        }
    }

    pub fn polynomial(rows: usize, cols: usize, degree: usize) -> Self {
        Self {
            families: FamilyMode::Polynomial,
            rows,
            cols,
            degree,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub protocol: ProtocolKind,
    pub instance: InstanceSpec,
    /// Party count; always 2 for the two-party protocols.
    pub parties: usize,
    /// One seed per party, in party order.
    pub seeds: Vec<u64>,
    /// Seed for sampled public elements (matrices, generators, chain links).
    pub setup_seed: u64,
    /// Matrix-protocol options; `None` takes the instantiation's default.
    pub eckap: Option<EckapOptions>,
    pub disclose_keys: bool,
    pub disclose_seeds: bool,
}

impl SessionConfig {
    /// A two-party (or `seeds.len()`-party) session with keys and seeds redacted.
    pub fn new(protocol: ProtocolKind, instance: InstanceSpec, seeds: Vec<u64>) -> Self {
        let parties = match protocol {
            ProtocolKind::Multi => seeds.len(),
            _ => 2,
        };
        Self {
            protocol,
            instance,
            parties,
            seeds,
            setup_seed: 0,
            eckap: None,
            disclose_keys: false,
            disclose_seeds: false,
        }
    }

    pub fn with_setup_seed(mut self, seed: u64) -> Self {
        self.setup_seed = seed;
        self
    }

    pub fn with_eckap(mut self, opts: EckapOptions) -> Self {
        self.eckap = Some(opts);
        self
    }

    pub fn disclosing(mut self, keys: bool, seeds: bool) -> Self {
        self.disclose_keys = keys;
        self.disclose_seeds = seeds;
        self
    }
}
