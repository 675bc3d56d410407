//! Sampled (and, for small hom-sets, exhaustive) checks of the algebraic laws protocols rely on.
//!
//! Every check returns a [`LawOutcome`]; a violation carries an encoded
//! witness so a failing run can be reproduced by hand.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::category::{CategoryModel, Morphism, ObjectRef};
use crate::enrichment::FreeEnrichment;
use crate::error::Result;
use crate::instantiations::dh::{dh_category, DhCategory, DhParams};
use crate::matrix::{
    self, act_left, act_right, ring_mul, CommutingFamily, EndoMatrix, HomMatrix, Side,
};

#[derive(Clone, Debug)]
pub struct LawConfig {
    /// Sampled composable triples for associativity.
    pub triples: usize,
    /// Samples for every other law.
    pub checks: usize,
    /// Triples of hom-sets whose product size is at most this are checked exhaustively.
    pub exhaustive_limit: u64,
    /// Largest matrix dimension used by the matrix suite.
    pub max_dim: usize,
    pub seed: u64,
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            triples: 10_000,
            checks: 1_000,
            exhaustive_limit: 10_000,
            max_dim: 4,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub inputs: Vec<Value>,
    pub lhs: Value,
    pub rhs: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawOutcome {
    pub law: String,
    pub checked: usize,
    pub exhaustive: bool,
    pub violation: Option<Witness>,
}

impl LawOutcome {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }

    fn new(law: &str) -> Self {
        Self {
            law: law.to_string(),
            checked: 0,
            exhaustive: false,
            violation: None,
        }
    }
}

/// All outcomes for one model.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LawReport {
    pub model: String,
    pub outcomes: Vec<LawOutcome>,
}

impl LawReport {
    pub fn is_clean(&self) -> bool {
        self.outcomes.iter().all(LawOutcome::passed)
    }

    pub fn first_violation(&self) -> Option<&LawOutcome> {
        self.outcomes.iter().find(|o| !o.passed())
    }
}

fn enc<C: CategoryModel + ?Sized>(model: &C, m: &Morphism<C::Payload>) -> Value {
    json!({
        "hom": model.hom_tag(m.dom(), m.cod()),
        "payload": model.encode(m),
    })
}

/// Runs one comparison, recording the first failure.
fn record(out: &mut LawOutcome, ok: bool, witness: impl FnOnce() -> Witness) {
    out.checked += 1;
    if !ok && out.violation.is_none() {
        out.violation = Some(witness());
    }
}

fn composable_chains<C: CategoryModel + ?Sized>(
    model: &C,
) -> Vec<(ObjectRef, ObjectRef, ObjectRef, ObjectRef)> {
    let homs = model.inhabited_homs();
    let mut out = Vec::new();
    for &(a, b) in &homs {
        for &(b2, c) in &homs {
            if b2 != b {
                continue;
            }
            for &(c2, d) in &homs {
                if c2 == c {
                    out.push((a, b, c, d));
                }
            }
        }
    }
    out
}

fn check_triple<C: CategoryModel + ?Sized>(
    model: &C,
    h: &Morphism<C::Payload>,
    g: &Morphism<C::Payload>,
    f: &Morphism<C::Payload>,
    assoc: &mut LawOutcome,
    canon: &mut LawOutcome,
    closure: &mut LawOutcome,
) -> Result<()> {
    let hg = model.compose(h, g)?;
    let gf = model.compose(g, f)?;
    let left = model.compose(&hg, f)?;
    let right = model.compose(h, &gf)?;
    record(assoc, left == right, || Witness {
        inputs: vec![enc(model, h), enc(model, g), enc(model, f)],
        lhs: enc(model, &left),
        rhs: enc(model, &right),
    });
    for c in [&hg, &gf, &left] {
        let canonical = model.canonicalize(c.dom(), c.cod(), c.payload().clone())?;
        record(canon, canonical == *c.payload(), || Witness {
            inputs: vec![enc(model, c)],
            lhs: enc(model, c),
            rhs: json!(model.encode_payload(&canonical)),
        });
        let valid = model.validate(c);
        record(closure, valid.is_ok(), || Witness {
            inputs: vec![enc(model, c)],
            lhs: enc(model, c),
            rhs: json!(valid.err().map(|e| e.to_string())),
        });
    }
    Ok(())
}

/// Associativity, identity, canonical form, closure, and commutation of secrets.
pub fn category_laws<C: CategoryModel + ?Sized>(model: &C, cfg: &LawConfig) -> Result<Vec<LawOutcome>> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut assoc = LawOutcome::new("associativity");
    let mut canon = LawOutcome::new("canonical-form");
    let mut closure = LawOutcome::new("closure");

    let chains = composable_chains(model);
    let mut sampled_chains = Vec::new();
    for &(a, b, c, d) in &chains {
        let lists = (
            model.enumerate_hom(a, b),
            model.enumerate_hom(b, c),
            model.enumerate_hom(c, d),
        );
        match lists {
            (Some(fs), Some(gs), Some(hs))
                if (fs.len() as u64)
                    .saturating_mul(gs.len() as u64)
                    .saturating_mul(hs.len() as u64)
                    <= cfg.exhaustive_limit =>
            {
                for f in &fs {
                    for g in &gs {
                        for h in &hs {
                            let f = Morphism::new_unchecked(a, b, f.clone());
                            let g = Morphism::new_unchecked(b, c, g.clone());
                            let h = Morphism::new_unchecked(c, d, h.clone());
                            check_triple(model, &h, &g, &f, &mut assoc, &mut canon, &mut closure)?;
                        }
                    }
                }
            }
            _ => sampled_chains.push((a, b, c, d)),
        }
    }
    assoc.exhaustive = sampled_chains.is_empty() && !chains.is_empty();
    if !sampled_chains.is_empty() {
        for t in 0..cfg.triples {
            let (a, b, c, d) = sampled_chains[t % sampled_chains.len()];
            let f = model.sample(a, b, &mut rng)?;
            let g = model.sample(b, c, &mut rng)?;
            let h = model.sample(c, d, &mut rng)?;
            check_triple(model, &h, &g, &f, &mut assoc, &mut canon, &mut closure)?;
        }
    }

    let homs = model.inhabited_homs();
    let mut identity = LawOutcome::new("identity");
    for t in 0..cfg.checks {
        let (a, b) = homs[t % homs.len()];
        let f = model.sample(a, b, &mut rng)?;
        let left = model.compose(&model.identity(b)?, &f)?;
        let right = model.compose(&f, &model.identity(a)?)?;
        record(&mut identity, left == f && right == f, || Witness {
            inputs: vec![enc(model, &f)],
            lhs: enc(model, &left),
            rhs: enc(model, &right),
        });
    }

    let mut commute = LawOutcome::new("secret-commutation");
    let endos: Vec<ObjectRef> = homs.iter().filter(|(a, b)| a == b).map(|&(a, _)| a).collect();
    for t in 0..cfg.checks {
        let o = endos[t % endos.len()];
        let x = model.sample_endo(o, &mut rng)?;
        let y = model.sample_endo(o, &mut rng)?;
        let xy = model.compose(&x, &y)?;
        let yx = model.compose(&y, &x)?;
        record(&mut commute, xy == yx, || Witness {
            inputs: vec![enc(model, &x), enc(model, &y)],
            lhs: enc(model, &xy),
            rhs: enc(model, &yx),
        });
    }

    Ok(vec![assoc, identity, canon, closure, commute])
}

/// Hom-group laws: bilinearity on both sides, commutativity of addition, zero.
pub fn additive_laws<C: CategoryModel + ?Sized>(model: &C, cfg: &LawConfig) -> Result<Vec<LawOutcome>> {
    let Some(additive) = model.additive() else {
        return Ok(Vec::new());
    };
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0xadd);
    let chains: Vec<_> = composable_chains(model)
        .into_iter()
        .map(|(a, b, c, _)| (a, b, c))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let homs = model.inhabited_homs();
    let mut left = LawOutcome::new("bilinearity-left");
    let mut right = LawOutcome::new("bilinearity-right");
    let mut abelian = LawOutcome::new("addition-commutes");
    let mut zero = LawOutcome::new("additive-zero");
    for t in 0..cfg.checks {
        let (a, b, c) = chains[t % chains.len()];
        let f1 = model.sample(a, b, &mut rng)?;
        let f2 = model.sample(a, b, &mut rng)?;
        let g1 = model.sample(b, c, &mut rng)?;
        let g2 = model.sample(b, c, &mut rng)?;

        let lhs = model.compose(&model.add(&g1, &g2)?, &f1)?;
        let rhs = model.add(&model.compose(&g1, &f1)?, &model.compose(&g2, &f1)?)?;
        record(&mut left, lhs == rhs, || Witness {
            inputs: vec![enc(model, &g1), enc(model, &g2), enc(model, &f1)],
            lhs: enc(model, &lhs),
            rhs: enc(model, &rhs),
        });

        let lhs = model.compose(&g1, &model.add(&f1, &f2)?)?;
        let rhs = model.add(&model.compose(&g1, &f1)?, &model.compose(&g1, &f2)?)?;
        record(&mut right, lhs == rhs, || Witness {
            inputs: vec![enc(model, &g1), enc(model, &f1), enc(model, &f2)],
            lhs: enc(model, &lhs),
            rhs: enc(model, &rhs),
        });

        let xy = model.add(&f1, &f2)?;
        let yx = model.add(&f2, &f1)?;
        record(&mut abelian, xy == yx, || Witness {
            inputs: vec![enc(model, &f1), enc(model, &f2)],
            lhs: enc(model, &xy),
            rhs: enc(model, &yx),
        });

        let (d, e) = homs[t % homs.len()];
        let x = model.sample(d, e, &mut rng)?;
        let z = Morphism::new_unchecked(d, e, additive.zero_raw(d, e)?);
        let sum = model.add(&x, &z)?;
        record(&mut zero, sum == x, || Witness {
            inputs: vec![enc(model, &x)],
            lhs: enc(model, &sum),
            rhs: enc(model, &x),
        });
    }
    Ok(vec![left, right, abelian, zero])
}

/// Functoriality and faithfulness of the embedding into `T(C)`.
pub fn enrichment_laws<C: CategoryModel>(t: &FreeEnrichment<C>, cfg: &LawConfig) -> Result<Vec<LawOutcome>> {
    let base = t.base();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x7);
    let chains: Vec<_> = composable_chains(base)
        .into_iter()
        .map(|(a, b, c, _)| (a, b, c))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let homs = base.inhabited_homs();
    let mut functor = LawOutcome::new("functoriality");
    let mut faithful = LawOutcome::new("faithfulness");
    let mut unit = LawOutcome::new("lifted-identity-is-unit");
    for i in 0..cfg.checks {
        let (a, b, c) = chains[i % chains.len()];
        let f = base.sample(a, b, &mut rng)?;
        let g = base.sample(b, c, &mut rng)?;
        let lhs = t.lift(&base.compose(&g, &f)?)?;
        let rhs = t.compose(&t.lift(&g)?, &t.lift(&f)?)?;
        record(&mut functor, lhs == rhs, || Witness {
            inputs: vec![enc(base, &g), enc(base, &f)],
            lhs: enc(t, &lhs),
            rhs: enc(t, &rhs),
        });

        let (d, e) = homs[i % homs.len()];
        let x = base.sample(d, e, &mut rng)?;
        let y = base.sample(d, e, &mut rng)?;
        let same_base = x == y;
        let same_lift = t.lift(&x)? == t.lift(&y)?;
        record(&mut faithful, same_base == same_lift, || Witness {
            inputs: vec![enc(base, &x), enc(base, &y)],
            lhs: json!(same_base),
            rhs: json!(same_lift),
        });

        let r = t.sample(d, e, &mut rng)?;
        let one = t.lift(&base.identity(d)?)?;
        let prod = t.compose(&r, &one)?;
        record(&mut unit, prod == r, || Witness {
            inputs: vec![enc(t, &r)],
            lhs: enc(t, &prod),
            rhs: enc(t, &r),
        });
    }
    Ok(vec![functor, faithful, unit])
}

/// Entry-by-entry `Σ_k` through the public morphism API, independent of [`matrix`].
fn naive_right<C: CategoryModel + ?Sized>(
    model: &C,
    phi: &HomMatrix<C::Payload>,
    psi: &EndoMatrix<C::Payload>,
) -> Result<Vec<C::Payload>> {
    let mut out = Vec::new();
    for i in 0..phi.rows() {
        for j in 0..phi.cols() {
            let mut acc: Option<Morphism<C::Payload>> = None;
            for k in 0..phi.cols() {
                let e = Morphism::new_unchecked(psi.obj(), psi.obj(), psi.entry(k, j).clone());
                let term = model.compose(&phi.get(i, k), &e)?;
                acc = Some(match acc {
                    None => term,
                    Some(s) => model.add(&s, &term)?,
                });
            }
            out.push(acc.expect("positive dimension").into_payload());
        }
    }
    Ok(out)
}

fn naive_left<C: CategoryModel + ?Sized>(
    model: &C,
    omega: &EndoMatrix<C::Payload>,
    phi: &HomMatrix<C::Payload>,
) -> Result<Vec<C::Payload>> {
    let mut out = Vec::new();
    for i in 0..phi.rows() {
        for j in 0..phi.cols() {
            let mut acc: Option<Morphism<C::Payload>> = None;
            for k in 0..phi.rows() {
                let e = Morphism::new_unchecked(omega.obj(), omega.obj(), omega.entry(i, k).clone());
                let term = model.compose(&e, &phi.get(k, j))?;
                acc = Some(match acc {
                    None => term,
                    Some(s) => model.add(&s, &term)?,
                });
            }
            out.push(acc.expect("positive dimension").into_payload());
        }
    }
    Ok(out)
}

fn sample_endo_matrix<C: CategoryModel + ?Sized>(
    model: &C,
    obj: ObjectRef,
    side: Side,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<EndoMatrix<C::Payload>> {
    let entries = (0..n * n)
        .map(|_| model.sample_raw(obj, obj, rng))
        .collect::<Result<Vec<_>>>()?;
    EndoMatrix::new(model, obj, side, n, entries)
}

/// Semibimodule laws for matrices, commutation inside polynomial families,
/// and agreement with a naive entrywise evaluator.
pub fn matrix_laws<C: CategoryModel + ?Sized>(model: &C, cfg: &LawConfig) -> Result<Vec<LawOutcome>> {
    if model.additive().is_none() {
        return Ok(Vec::new());
    }
    let Some((a, b)) = model.inhabited_homs().into_iter().find(|(a, b)| a != b) else {
        return Ok(Vec::new());
    };
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x3a7);
    let mut mixed = LawOutcome::new("matrix-mixed-associativity");
    let mut module_left = LawOutcome::new("matrix-module-left");
    let mut module_right = LawOutcome::new("matrix-module-right");
    let mut commute = LawOutcome::new("family-commutation");
    let mut oracle = LawOutcome::new("matrix-naive-oracle");
    let max = cfg.max_dim.max(1);
    let menc = |m: &HomMatrix<C::Payload>| matrix::encode_hom_matrix(model, m);
    let eenc = |m: &EndoMatrix<C::Payload>| matrix::encode_endo_matrix(model, m);
    for _ in 0..cfg.checks {
        let m = rng.gen_range(1..=max);
        let n = rng.gen_range(1..=max);
        let phi = HomMatrix::sample(model, a, b, m, n, &mut rng)?;
        let psi = sample_endo_matrix(model, a, Side::Right, n, &mut rng)?;
        let psi2 = sample_endo_matrix(model, a, Side::Right, n, &mut rng)?;
        let omega = sample_endo_matrix(model, b, Side::Left, m, &mut rng)?;
        let omega2 = sample_endo_matrix(model, b, Side::Left, m, &mut rng)?;

        let phi_psi = act_right(model, &phi, &psi)?;
        let omega_phi = act_left(model, &omega, &phi)?;
        let lhs = act_left(model, &omega, &phi_psi)?;
        let rhs = act_right(model, &omega_phi, &psi)?;
        record(&mut mixed, lhs == rhs, || Witness {
            inputs: vec![eenc(&omega), menc(&phi), eenc(&psi)],
            lhs: menc(&lhs),
            rhs: menc(&rhs),
        });

        let lhs = act_left(model, &ring_mul(model, &omega2, &omega)?, &phi)?;
        let rhs = act_left(model, &omega2, &omega_phi)?;
        record(&mut module_left, lhs == rhs, || Witness {
            inputs: vec![eenc(&omega2), eenc(&omega), menc(&phi)],
            lhs: menc(&lhs),
            rhs: menc(&rhs),
        });

        let lhs = act_right(model, &phi, &ring_mul(model, &psi, &psi2)?)?;
        let rhs = act_right(model, &phi_psi, &psi2)?;
        record(&mut module_right, lhs == rhs, || Witness {
            inputs: vec![menc(&phi), eenc(&psi), eenc(&psi2)],
            lhs: menc(&lhs),
            rhs: menc(&rhs),
        });

        let fam = CommutingFamily::polynomial(psi.clone(), 2, 0, 3)?;
        let x = matrix::sample_commuting(model, &fam, &mut rng)?;
        let y = matrix::sample_commuting(model, &fam, &mut rng)?;
        let xy = ring_mul(model, &x, &y)?;
        let yx = ring_mul(model, &y, &x)?;
        record(&mut commute, xy == yx, || Witness {
            inputs: vec![eenc(&x), eenc(&y)],
            lhs: eenc(&xy),
            rhs: eenc(&yx),
        });

        let naive_r = naive_right(model, &phi, &psi)?;
        let naive_l = naive_left(model, &omega, &phi)?;
        let ok = naive_r == phi_psi.entries() && naive_l == omega_phi.entries();
        record(&mut oracle, ok, || Witness {
            inputs: vec![eenc(&omega), menc(&phi), eenc(&psi)],
            lhs: json!([menc(&phi_psi), menc(&omega_phi)]),
            rhs: json!([
                naive_r.iter().map(|e| model.encode_payload(e)).collect::<Vec<_>>(),
                naive_l.iter().map(|e| model.encode_payload(e)).collect::<Vec<_>>()
            ]),
        });
    }
    Ok(vec![mixed, module_left, module_right, commute, oracle])
}

/// Category, additive and matrix suites in one report.
pub fn check_model<C: CategoryModel + ?Sized>(model: &C, cfg: &LawConfig) -> Result<LawReport> {
    let mut outcomes = category_laws(model, cfg)?;
    outcomes.extend(additive_laws(model, cfg)?);
    outcomes.extend(matrix_laws(model, cfg)?);
    Ok(LawReport {
        model: model.model_id(),
        outcomes,
    })
}

/// [`check_model`] on `T(C)` plus the functoriality and faithfulness suite.
pub fn check_enriched<C: CategoryModel>(t: &FreeEnrichment<C>, cfg: &LawConfig) -> Result<LawReport> {
    let mut report = check_model(t, cfg)?;
    report.outcomes.extend(enrichment_laws(t, cfg)?);
    Ok(report)
}

/// A DH category whose endomorphism composition adds exponents instead of multiplying them.
///
/// Exists only so the law suites can be shown to catch a wrong model.
#[derive(Clone, Debug)]
pub struct BrokenDh {
    inner: DhCategory,
}

pub fn broken_dh(params: DhParams) -> Result<BrokenDh> {
    Ok(BrokenDh {
        inner: dh_category(params)?,
    })
}

impl BrokenDh {
    pub fn params(&self) -> &DhParams {
        self.inner.params()
    }
}

impl CategoryModel for BrokenDh {
    type Payload = u64;

    fn model_id(&self) -> String {
        format!("broken-{}", self.inner.model_id())
    }

    fn objects(&self) -> Vec<ObjectRef> {
        self.inner.objects()
    }

    fn object_name(&self, obj: ObjectRef) -> Option<String> {
        self.inner.object_name(obj)
    }

    fn hom_inhabited(&self, dom: ObjectRef, cod: ObjectRef) -> bool {
        self.inner.hom_inhabited(dom, cod)
    }

    fn check_payload(&self, dom: ObjectRef, cod: ObjectRef, x: &u64) -> std::result::Result<(), String> {
        self.inner.check_payload(dom, cod, x)
    }

    fn canonicalize(&self, dom: ObjectRef, cod: ObjectRef, x: u64) -> Result<u64> {
        self.inner.canonicalize(dom, cod, x)
    }

    fn compose_raw(&self, x: ObjectRef, y: ObjectRef, z: ObjectRef, g: &u64, f: &u64) -> Result<u64> {
        if x == y && y == z {
            Ok((g + f) % self.inner.params().s)
        } else {
            self.inner.compose_raw(x, y, z, g, f)
        }
    }

    fn identity_raw(&self, obj: ObjectRef) -> Result<u64> {
        self.inner.identity_raw(obj)
    }

    fn sample_endo_raw(&self, obj: ObjectRef, rng: &mut dyn RngCore) -> Result<u64> {
        self.inner.sample_endo_raw(obj, rng)
    }

    fn sample_raw(&self, dom: ObjectRef, cod: ObjectRef, rng: &mut dyn RngCore) -> Result<u64> {
        self.inner.sample_raw(dom, cod, rng)
    }

    fn encode_payload(&self, x: &u64) -> Value {
        self.inner.encode_payload(x)
    }

    fn decode_payload(&self, dom: ObjectRef, cod: ObjectRef, value: &Value) -> Result<u64> {
        self.inner.decode_payload(dom, cod, value)
    }

    fn enumerate_hom(&self, dom: ObjectRef, cod: ObjectRef) -> Option<Vec<u64>> {
        self.inner.enumerate_hom(dom, cod)
    }
}
