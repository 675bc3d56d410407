//! Named instantiations and construction of public setups from a session config.

use rand::{Rng, RngCore};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::category::{diagnose_action, CategoryModel, Diagnostic, Morphism};
use crate::enrichment::{enrich, CoefficientMode, FreeEnrichment};
use crate::error::{Error, Result};
use crate::instantiations::{
    dh_category, dh_chain, kolee_category, mpf_model, ConjugationParams, DhCategory, DhParams,
    KoLeeCategory, MpfModel, MpfParams,
};
use crate::laws::{broken_dh, check_enriched, check_model, BrokenDh, LawConfig, LawReport};
use crate::matrix::{CommutingFamily, EndoMatrix, HomMatrix, Side};
use crate::protocols::{
    Chain, EckapOptions, EckapSetup, FamilyMode, FamilyPair, InstanceSpec, ProtocolKind,
    PublicSetup,
};

/// Instantiation names accepted by [`Instance::build`].
pub const INSTANCE_NAMES: &[&str] = &["dh", "kolee", "mpf", "t-dh", "t-kolee"];

/// Built-in desk parameters, used when no parameter file is given.
pub fn default_params(name: &str) -> Option<Value> {
    let dh = || serde_json::json!({"p": 23, "g": 5, "s": 22});
    let kolee = || {
        serde_json::json!({
            "q": 7,
            "d": 2,
            "a0": [[0, 1], [2, 3]],
            "b0": [[0, 1], [4, 1]],
            "g": [[[1, 2], [3, 5]], [[2, 1], [1, 1]]],
        })
    };
    match name {
        "dh" | "t-dh" | "broken-dh" => Some(dh()),
        "kolee" | "t-kolee" => Some(kolee()),
        "mpf" => Some(serde_json::json!({
            "p": 2147483579u64,
            "k": 2,
            "base": [[2, 3], [5, 7]],
        })),
        _ => None,
    }
}

/// A category model that knows its own public elements.
pub trait Platform: CategoryModel {
    /// The public arrow of a two-party session.
    fn public_arrow(&self) -> Result<Morphism<Self::Payload>>;

    /// Fixed public-matrix dimensions, when the platform dictates them.
    fn fixed_dims(&self) -> Option<(usize, usize)> {
        None
    }

    /// The public matrix of a matrix session.
    fn public_matrix(
        &self,
        rows: usize,
        cols: usize,
        rng: &mut dyn RngCore,
    ) -> Result<HomMatrix<Self::Payload>> {
        let g = self.public_arrow()?;
        HomMatrix::sample(self, g.dom(), g.cod(), rows, cols, rng)
    }

    /// Polynomial coefficient range for commuting families.
    fn coefficient_range(&self) -> (u64, u64) {
        (0, 3)
    }

    /// The public chain of an `n`-party session; the first link is the public arrow.
    fn public_chain(&self, n: usize, rng: &mut dyn RngCore) -> Result<Chain<Self::Payload>> {
        let objects = self.objects();
        if objects.len() < n {
            return Err(Error::InvalidParams(format!(
                "{} has {} objects, {n} parties need {n}",
                self.model_id(),
                objects.len()
            )));
        }
        let objects = objects[..n].to_vec();
        let mut links = vec![self.public_arrow()?];
        for w in objects.windows(2).skip(1) {
            links.push(self.sample(w[0], w[1], rng)?);
        }
        Chain::new(self, objects, links)
    }
}

impl Platform for DhCategory {
    fn public_arrow(&self) -> Result<Morphism<u64>> {
        Ok(self.generator())
    }

    /// Later links are exponents coprime to `s`, so no link collapses the group.
    fn public_chain(&self, n: usize, rng: &mut dyn RngCore) -> Result<Chain<u64>> {
        if self.len() < n {
            return Err(Error::InvalidParams(format!(
                "{} has {} objects, {n} parties need {n}",
                self.model_id(),
                self.len()
            )));
        }
        let objects = self.objects()[..n].to_vec();
        let s = self.params().s;
        let mut links = vec![self.generator()];
        for w in objects.windows(2).skip(1) {
            let e = loop {
                let e = rng.gen_range(1..s);
                if gcd(e, s) == 1 {
                    break e;
                }
            };
            links.push(self.morphism(w[0], w[1], e)?);
        }
        Chain::new(self, objects, links)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Platform for KoLeeCategory {
    fn public_arrow(&self) -> Result<Morphism<crate::instantiations::GroupPair>> {
        Ok(self.public_element())
    }
}

impl Platform for MpfModel {
    fn public_arrow(&self) -> Result<Morphism<u64>> {
        Ok(self.public_matrix()?.get(0, 0))
    }

    fn fixed_dims(&self) -> Option<(usize, usize)> {
        Some((self.params().k, self.params().k))
    }

    fn public_matrix(&self, rows: usize, cols: usize, _rng: &mut dyn RngCore) -> Result<HomMatrix<u64>> {
        let k = self.params().k;
        if (rows, cols) != (k, k) {
            return Err(Error::ShapeMismatch(format!(
                "the public base matrix is {k}x{k}, not {rows}x{cols}"
            )));
        }
        MpfModel::public_matrix(self)
    }

    fn coefficient_range(&self) -> (u64, u64) {
        (0, self.exponent_modulus() - 1)
    }
}

impl Platform for BrokenDh {
    fn public_arrow(&self) -> Result<Morphism<u64>> {
        let p = self.params();
        self.morphism(DhCategory::A, DhCategory::B, p.g)
    }
}

impl<C: Platform> Platform for FreeEnrichment<C> {
    fn public_arrow(&self) -> Result<Morphism<Self::Payload>> {
        self.lift(&self.base().public_arrow()?)
    }

    fn public_chain(&self, n: usize, rng: &mut dyn RngCore) -> Result<Chain<Self::Payload>> {
        let base = self.base().public_chain(n, rng)?;
        let links = base
            .links()
            .iter()
            .map(|l| self.lift(l))
            .collect::<Result<Vec<_>>>()?;
        Chain::new(self, base.objects().to_vec(), links)
    }
}

/// Builds the public setup of a session from a seeded generator.
pub fn build_setup<C: Platform>(
    model: &C,
    protocol: ProtocolKind,
    parties: usize,
    eckap: &EckapOptions,
    setup_seed: u64,
) -> Result<PublicSetup<C::Payload>> {
    let mut rng = ChaCha20Rng::seed_from_u64(setup_seed);
    match protocol {
        ProtocolKind::Ckap => Ok(PublicSetup::Ckap {
            g: model.public_arrow()?,
        }),
        ProtocolKind::Eckap => match eckap.families {
            FamilyMode::Reduction => Ok(PublicSetup::Eckap(EckapSetup::reduction(
                model,
                &model.public_arrow()?,
            )?)),
            FamilyMode::Polynomial => {
                let (rows, cols) = model.fixed_dims().unwrap_or((eckap.rows, eckap.cols));
                let phi = model.public_matrix(rows, cols, &mut rng)?;
                let (lo, hi) = model.coefficient_range();
                let mut generator = |obj, side, size: usize| -> Result<CommutingFamily<C::Payload>> {
                    let entries = (0..size * size)
                        .map(|_| model.sample_endo_raw(obj, &mut rng))
                        .collect::<Result<Vec<_>>>()?;
                    let gen = EndoMatrix::new(model, obj, side, size, entries)?;
                    CommutingFamily::polynomial(gen, eckap.degree, lo, hi)
                };
                let pair = FamilyPair {
                    psi: generator(phi.dom(), Side::Right, cols)?,
                    omega: generator(phi.cod(), Side::Left, rows)?,
                };
                Ok(PublicSetup::Eckap(EckapSetup::new(
                    model,
                    phi,
                    pair.clone(),
                    pair,
                    &mut rng,
                )?))
            }
        },
        ProtocolKind::Multi => Ok(PublicSetup::Multi(model.public_chain(parties, &mut rng)?)),
    }
}

/// Non-fatal warnings about a public setup.
pub fn setup_diagnostics<C: CategoryModel>(
    model: &C,
    setup: &PublicSetup<C::Payload>,
    seed: u64,
) -> Result<Vec<Diagnostic>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    match setup {
        PublicSetup::Ckap { g } => diagnose_action(model, g, &mut rng, 8),
        PublicSetup::Eckap(s) => Ok(s.diagnostics(model)),
        PublicSetup::Multi(_) => Ok(Vec::new()),
    }
}

/// A constructed instantiation.
#[derive(Clone, Debug)]
pub enum Instance {
    Dh(DhCategory),
    KoLee(KoLeeCategory),
    Mpf(MpfModel),
    TDh(FreeEnrichment<DhCategory>),
    TKoLee(FreeEnrichment<KoLeeCategory>),
    Broken(BrokenDh),
}

/// Runs `$body` with `$m` bound to the concrete model inside an [`Instance`].
#[macro_export]
macro_rules! with_model {
    ($inst:expr, $m:ident => $body:expr) => {
        match $inst {
            $crate::registry::Instance::Dh($m) => $body,
            $crate::registry::Instance::KoLee($m) => $body,
            $crate::registry::Instance::Mpf($m) => $body,
            $crate::registry::Instance::TDh($m) => $body,
            $crate::registry::Instance::TKoLee($m) => $body,
            $crate::registry::Instance::Broken($m) => $body,
        }
    };
}

fn params<T: DeserializeOwned>(name: &str, value: &Value) -> Result<T> {
    serde_json::from_value(value.clone())
        .map_err(|e| Error::InvalidParams(format!("{name} parameters: {e}")))
}

fn two_party_only(name: &str, protocol: ProtocolKind, parties: usize) -> Result<()> {
    if protocol == ProtocolKind::Multi && parties != 2 {
        return Err(Error::InvalidParams(format!(
            "{name} has two objects; multi-party sessions over it need exactly 2 parties, got {parties}"
        )));
    }
    Ok(())
}

impl Instance {
    /// Builds the model named by `spec`, sized for the given protocol and party count.
    pub fn build(spec: &InstanceSpec, protocol: ProtocolKind, parties: usize) -> Result<Self> {
        let dh = |name: &str| -> Result<DhCategory> {
            let p: DhParams = params(name, &spec.params)?;
            if protocol == ProtocolKind::Multi {
                dh_chain(p, parties)
            } else {
                dh_category(p)
            }
        };
        let kolee = |name: &str| -> Result<KoLeeCategory> {
            two_party_only(name, protocol, parties)?;
            kolee_category(params::<ConjugationParams>(name, &spec.params)?)
        };
        let name = spec.name.as_str();
        match name {
            "dh" => Ok(Self::Dh(dh(name)?)),
            "kolee" => Ok(Self::KoLee(kolee(name)?)),
            "mpf" => {
                two_party_only(name, protocol, parties)?;
                Ok(Self::Mpf(mpf_model(params::<MpfParams>(name, &spec.params)?)?))
            }
            "t-dh" => Ok(Self::TDh(enrich(dh(name)?, CoefficientMode::Integers))),
            "t-kolee" => Ok(Self::TKoLee(enrich(kolee(name)?, CoefficientMode::Integers))),
            "broken-dh" => {
                two_party_only(name, protocol, parties)?;
                Ok(Self::Broken(broken_dh(params(name, &spec.params)?)?))
            }
            other => Err(Error::InvalidParams(format!(
                "unknown instantiation `{other}` (expected one of {})",
                INSTANCE_NAMES.join(", ")
            ))),
        }
    }

    /// The default matrix-protocol options for this instantiation.
    pub fn default_eckap(&self) -> EckapOptions {
        match self {
            Self::Mpf(m) => EckapOptions::polynomial(m.params().k, m.params().k, 2),
            Self::TDh(_) | Self::TKoLee(_) => EckapOptions::polynomial(2, 2, 1),
            _ => EckapOptions::reduction(),
        }
    }

    pub fn model_id(&self) -> String {
        with_model!(self, m => m.model_id())
    }

    /// Runs the law suites that apply to this instantiation.
    pub fn check_laws(&self, cfg: &LawConfig) -> Result<LawReport> {
        match self {
            Self::TDh(t) => check_enriched(t, cfg),
            Self::TKoLee(t) => check_enriched(t, cfg),
            other => with_model!(other, m => check_model(m, cfg)),
        }
    }
}
