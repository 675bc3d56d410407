//! Matrices over hom-groups, acted on from both sides by matrices over endomorphism rings.
//!
//! Entry "multiplication" is composition in the model and entry "addition" is
//! its hom-group addition. A `1 x 1` product is a single composite and needs no
//! additive structure, so plain (non-enriched) models work at that size.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::category::{CategoryModel, Diagnostic, Morphism, ObjectRef};
use crate::error::{Error, Result};

/// An `rows x cols` matrix over `Hom(dom, cod)`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HomMatrix<P> {
    rows: usize,
    cols: usize,
    dom: ObjectRef,
    cod: ObjectRef,
    entries: Vec<P>,
}

impl<P: Clone> HomMatrix<P> {
    /// Canonicalizes and validates every entry against `model`.
    pub fn new<C>(
        model: &C,
        dom: ObjectRef,
        cod: ObjectRef,
        rows: usize,
        cols: usize,
        entries: Vec<P>,
    ) -> Result<Self>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        check_shape(rows, cols, entries.len())?;
        let entries = entries
            .into_iter()
            .map(|e| model.morphism(dom, cod, e).map(Morphism::into_payload))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows,
            cols,
            dom,
            cod,
            entries,
        })
    }

    pub fn from_morphism(m: &Morphism<P>) -> Self {
        Self {
            rows: 1,
            cols: 1,
            dom: m.dom(),
            cod: m.cod(),
            entries: vec![m.payload().clone()],
        }
    }

    /// Draws each entry from the model's broad sampler on `Hom(dom, cod)`.
    pub fn sample<C>(
        model: &C,
        dom: ObjectRef,
        cod: ObjectRef,
        rows: usize,
        cols: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Self>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        check_shape(rows, cols, rows * cols)?;
        model.require_hom(dom, cod)?;
        let entries = (0..rows * cols)
            .map(|_| model.sample_raw(dom, cod, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows,
            cols,
            dom,
            cod,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dom(&self) -> ObjectRef {
        self.dom
    }

    pub fn cod(&self) -> ObjectRef {
        self.cod
    }

    pub fn entries(&self) -> &[P] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &P {
        &self.entries[i * self.cols + j]
    }

    pub fn get(&self, i: usize, j: usize) -> Morphism<P> {
        Morphism::new_unchecked(self.dom, self.cod, self.entry(i, j).clone())
    }

    /// The single entry of a `1 x 1` matrix.
    pub fn as_morphism(&self) -> Option<Morphism<P>> {
        (self.rows == 1 && self.cols == 1).then(|| self.get(0, 0))
    }
}

/// Which side of a hom-matrix an endo-matrix acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Entries in `Hom(A,A)`, multiplying `φ` from the right.
    Right,
    /// Entries in `Hom(B,B)`, multiplying `φ` from the left.
    Left,
}

/// A square matrix over the endomorphism ring of `obj`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EndoMatrix<P> {
    size: usize,
    obj: ObjectRef,
    side: Side,
    entries: Vec<P>,
}

impl<P: Clone> EndoMatrix<P> {
    pub fn new<C>(
        model: &C,
        obj: ObjectRef,
        side: Side,
        size: usize,
        entries: Vec<P>,
    ) -> Result<Self>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        check_shape(size, size, entries.len())?;
        let entries = entries
            .into_iter()
            .map(|e| model.morphism(obj, obj, e).map(Morphism::into_payload))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            size,
            obj,
            side,
            entries,
        })
    }

    pub fn from_morphism(m: &Morphism<P>, side: Side) -> Result<Self> {
        if !m.is_endo() {
            return Err(Error::ShapeMismatch("endo-matrix entry is not an endomorphism".into()));
        }
        Ok(Self {
            size: 1,
            obj: m.dom(),
            side,
            entries: vec![m.payload().clone()],
        })
    }

    /// Identity morphisms on the diagonal, hom-zeros elsewhere.
    pub fn identity<C>(model: &C, obj: ObjectRef, side: Side, size: usize) -> Result<Self>
    where
        C: CategoryModel<Payload = P> + ?Sized,
    {
        check_shape(size, size, size * size)?;
        let one = model.identity_raw(obj)?;
        let zero = if size > 1 {
            Some(additive_zero(model, obj, obj)?)
        } else {
            None
        };
        let mut entries = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                entries.push(if i == j {
                    one.clone()
                } else {
                    zero.clone().expect("size > 1")
                });
            }
        }
        Ok(Self {
            size,
            obj,
            side,
            entries,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn obj(&self) -> ObjectRef {
        self.obj
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn entries(&self) -> &[P] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &P {
        &self.entries[i * self.size + j]
    }

    pub fn as_morphism(&self) -> Option<Morphism<P>> {
        (self.size == 1).then(|| Morphism::new_unchecked(self.obj, self.obj, self.entries[0].clone()))
    }
}

fn check_shape(rows: usize, cols: usize, len: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::ShapeMismatch(format!(
            "dimensions must be positive, got {rows}x{cols}"
        )));
    }
    if rows * cols != len {
        return Err(Error::ShapeMismatch(format!(
            "{rows}x{cols} matrix needs {} entries, got {len}",
            rows * cols
        )));
    }
    Ok(())
}

fn additive_zero<C: CategoryModel + ?Sized>(
    model: &C,
    dom: ObjectRef,
    cod: ObjectRef,
) -> Result<C::Payload> {
    model
        .additive()
        .ok_or_else(|| Error::NotEnriched(model.model_id()))?
        .zero_raw(dom, cod)
}

/// `Σ_k left_k · right_k` inside `Hom(x, z)`, composing through `y`.
fn dot<'a, C, I>(model: &C, x: ObjectRef, y: ObjectRef, z: ObjectRef, pairs: I) -> Result<C::Payload>
where
    C: CategoryModel + ?Sized,
    C::Payload: 'a,
    I: IntoIterator<Item = (&'a C::Payload, &'a C::Payload)>,
{
    let mut acc: Option<C::Payload> = None;
    for (g, f) in pairs {
        let term = model.compose_raw(x, y, z, g, f)?;
        acc = Some(match acc {
            None => term,
            Some(sum) => model
                .additive()
                .ok_or_else(|| Error::NotEnriched(model.model_id()))?
                .add_raw(x, z, &sum, &term)?,
        });
    }
    acc.ok_or_else(|| Error::ShapeMismatch("empty inner dimension".into()))
}

/// `φ·ψ`: entry `(i,j)` is `Σ_k φ_ik · ψ_kj`.
pub fn act_right<C>(
    model: &C,
    phi: &HomMatrix<C::Payload>,
    psi: &EndoMatrix<C::Payload>,
) -> Result<HomMatrix<C::Payload>>
where
    C: CategoryModel + ?Sized,
{
    if psi.side != Side::Right {
        return Err(Error::ShapeMismatch("left-acting matrix used on the right".into()));
    }
    if psi.obj != phi.dom {
        return Err(Error::NonComposable {
            left_dom: model.name(phi.dom),
            right_cod: model.name(psi.obj),
        });
    }
    if phi.cols != psi.size {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} times {}x{}",
            phi.rows, phi.cols, psi.size, psi.size
        )));
    }
    let (a, b) = (phi.dom, phi.cod);
    let mut entries = Vec::with_capacity(phi.rows * phi.cols);
    for i in 0..phi.rows {
        for j in 0..phi.cols {
            let pairs = (0..phi.cols).map(|k| (phi.entry(i, k), psi.entry(k, j)));
            entries.push(dot(model, a, a, b, pairs)?);
        }
    }
    Ok(HomMatrix {
        entries,
        ..phi.clone()
    })
}

/// `ω·φ`: entry `(i,j)` is `Σ_k ω_ik · φ_kj`.
pub fn act_left<C>(
    model: &C,
    omega: &EndoMatrix<C::Payload>,
    phi: &HomMatrix<C::Payload>,
) -> Result<HomMatrix<C::Payload>>
where
    C: CategoryModel + ?Sized,
{
    if omega.side != Side::Left {
        return Err(Error::ShapeMismatch("right-acting matrix used on the left".into()));
    }
    if omega.obj != phi.cod {
        return Err(Error::NonComposable {
            left_dom: model.name(omega.obj),
            right_cod: model.name(phi.cod),
        });
    }
    if omega.size != phi.rows {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} times {}x{}",
            omega.size, omega.size, phi.rows, phi.cols
        )));
    }
    let (a, b) = (phi.dom, phi.cod);
    let mut entries = Vec::with_capacity(phi.rows * phi.cols);
    for i in 0..phi.rows {
        for j in 0..phi.cols {
            let pairs = (0..phi.rows).map(|k| (omega.entry(i, k), phi.entry(k, j)));
            entries.push(dot(model, a, b, b, pairs)?);
        }
    }
    Ok(HomMatrix {
        entries,
        ..phi.clone()
    })
}

/// Product in the matrix ring `M_n(Hom(obj, obj))`.
pub fn ring_mul<C>(
    model: &C,
    x: &EndoMatrix<C::Payload>,
    y: &EndoMatrix<C::Payload>,
) -> Result<EndoMatrix<C::Payload>>
where
    C: CategoryModel + ?Sized,
{
    if x.size != y.size || x.obj != y.obj || x.side != y.side {
        return Err(Error::ShapeMismatch(format!(
            "ring product of {}x{} over {} and {}x{} over {}",
            x.size,
            x.size,
            model.name(x.obj),
            y.size,
            y.size,
            model.name(y.obj)
        )));
    }
    let n = x.size;
    let o = x.obj;
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let pairs = (0..n).map(|k| (x.entry(i, k), y.entry(k, j)));
            entries.push(dot(model, o, o, o, pairs)?);
        }
    }
    Ok(EndoMatrix {
        entries,
        ..x.clone()
    })
}

/// Entrywise hom-group sum.
pub fn add_endo<C>(
    model: &C,
    x: &EndoMatrix<C::Payload>,
    y: &EndoMatrix<C::Payload>,
) -> Result<EndoMatrix<C::Payload>>
where
    C: CategoryModel + ?Sized,
{
    if x.size != y.size || x.obj != y.obj || x.side != y.side {
        return Err(Error::ShapeMismatch("endo-matrix sum of different shapes".into()));
    }
    let additive = model
        .additive()
        .ok_or_else(|| Error::NotEnriched(model.model_id()))?;
    let entries = x
        .entries
        .iter()
        .zip(&y.entries)
        .map(|(a, b)| additive.add_raw(x.obj, x.obj, a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(EndoMatrix {
        entries,
        ..x.clone()
    })
}

/// `c·x`, the `c`-fold hom-group sum of every entry.
pub fn scale_endo<C>(model: &C, x: &EndoMatrix<C::Payload>, c: u64) -> Result<EndoMatrix<C::Payload>>
where
    C: CategoryModel + ?Sized,
{
    let additive = model
        .additive()
        .ok_or_else(|| Error::NotEnriched(model.model_id()))?;
    let entries = x
        .entries
        .iter()
        .map(|e| additive.scale_raw(x.obj, x.obj, e, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(EndoMatrix {
        entries,
        ..x.clone()
    })
}

/// How a [`CommutingFamily`] produces its members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyKind<P> {
    /// Only the identity matrix.
    Unit,
    /// Entries drawn by the model's secret sampler; commutes only when that monoid does.
    Sampled,
    /// `Σ_{i<=degree} c_i P^i` with `c_i` uniform in `coef_lo..=coef_hi`.
    Polynomial {
        generator: EndoMatrix<P>,
        degree: usize,
        coef_lo: u64,
        coef_hi: u64,
    },
}

/// A sampler for a commutative subring of `M_n(Hom(obj, obj))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutingFamily<P> {
    pub obj: ObjectRef,
    pub side: Side,
    pub size: usize,
    pub kind: FamilyKind<P>,
}

impl<P: Clone> CommutingFamily<P> {
    pub fn unit(obj: ObjectRef, side: Side, size: usize) -> Self {
        Self {
            obj,
            side,
            size,
            kind: FamilyKind::Unit,
        }
    }

    pub fn sampled(obj: ObjectRef, side: Side, size: usize) -> Self {
        Self {
            obj,
            side,
            size,
            kind: FamilyKind::Sampled,
        }
    }

    pub fn polynomial(generator: EndoMatrix<P>, degree: usize, coef_lo: u64, coef_hi: u64) -> Result<Self> {
        if coef_lo > coef_hi {
            return Err(Error::InvalidParams(format!(
                "empty coefficient range {coef_lo}..={coef_hi}"
            )));
        }
        Ok(Self {
            obj: generator.obj,
            side: generator.side,
            size: generator.size,
            kind: FamilyKind::Polynomial {
                generator,
                degree,
                coef_lo,
                coef_hi,
            },
        })
    }

    pub fn generator(&self) -> Option<&EndoMatrix<P>> {
        match &self.kind {
            FamilyKind::Polynomial { generator, .. } => Some(generator),
            _ => None,
        }
    }
}

/// Draws one member of `fam`; deterministic for a seeded `rng`.
pub fn sample_commuting<C>(
    model: &C,
    fam: &CommutingFamily<C::Payload>,
    rng: &mut dyn RngCore,
) -> Result<EndoMatrix<C::Payload>>
where
    C: CategoryModel + ?Sized,
{
    match &fam.kind {
        FamilyKind::Unit => EndoMatrix::identity(model, fam.obj, fam.side, fam.size),
        FamilyKind::Sampled => {
            model.require_hom(fam.obj, fam.obj)?;
            let entries = (0..fam.size * fam.size)
                .map(|_| model.sample_endo_raw(fam.obj, rng))
                .collect::<Result<Vec<_>>>()?;
            Ok(EndoMatrix {
                size: fam.size,
                obj: fam.obj,
                side: fam.side,
                entries,
            })
        }
        FamilyKind::Polynomial {
            generator,
            degree,
            coef_lo,
            coef_hi,
        } => {
            let mut power = EndoMatrix::identity(model, fam.obj, fam.side, fam.size)?;
            let c0 = rng.gen_range(*coef_lo..=*coef_hi);
            let mut acc = scale_endo(model, &power, c0)?;
            for _ in 0..*degree {
                power = ring_mul(model, &power, generator)?;
                let c = rng.gen_range(*coef_lo..=*coef_hi);
                acc = add_endo(model, &acc, &scale_endo(model, &power, c)?)?;
            }
            Ok(acc)
        }
    }
}

/// Number of sampled pairs checked when commutation is not structural.
pub const COMMUTATION_CHECKS: usize = 16;

/// Checks that members of `x` commute with members of `y`.
///
/// A unit family, or two polynomial families over one generator, commute by
/// construction. Distinct generators must commute with each other, and every
/// other combination is tested on [`COMMUTATION_CHECKS`] sampled pairs; one
/// failure rejects.
pub fn verify_commuting<C>(
    model: &C,
    x: &CommutingFamily<C::Payload>,
    y: &CommutingFamily<C::Payload>,
    rng: &mut dyn RngCore,
) -> Result<()>
where
    C: CategoryModel + ?Sized,
{
    if (x.obj, x.side, x.size) != (y.obj, y.side, y.size) {
        return Err(Error::ShapeMismatch("families live in different rings".into()));
    }
    if matches!(x.kind, FamilyKind::Unit) || matches!(y.kind, FamilyKind::Unit) {
        return Ok(());
    }
    if let (Some(p), Some(q)) = (x.generator(), y.generator()) {
        if p == q {
            return Ok(());
        }
        if ring_mul(model, p, q)? != ring_mul(model, q, p)? {
            return Err(Error::NonCommutingFamilies("generators do not commute".into()));
        }
    }
    for trial in 0..COMMUTATION_CHECKS {
        let a = sample_commuting(model, x, rng)?;
        let b = sample_commuting(model, y, rng)?;
        if ring_mul(model, &a, &b)? != ring_mul(model, &b, &a)? {
            return Err(Error::NonCommutingFamilies(format!(
                "sampled pair {trial} over {} does not commute",
                model.name(x.obj)
            )));
        }
    }
    Ok(())
}

/// Flags a public matrix whose entries are all the hom-group zero.
pub fn diagnose_public_matrix<C>(model: &C, phi: &HomMatrix<C::Payload>) -> Vec<Diagnostic>
where
    C: CategoryModel + ?Sized,
{
    let Some(additive) = model.additive() else {
        return Vec::new();
    };
    match additive.zero_raw(phi.dom, phi.cod) {
        Ok(zero) if phi.entries.iter().all(|e| *e == zero) => vec![Diagnostic::DegeneratePublicMatrix {
            hom: model.hom_tag(phi.dom, phi.cod),
        }],
        _ => Vec::new(),
    }
}

fn encode_entries<C: CategoryModel + ?Sized>(
    model: &C,
    rows: usize,
    cols: usize,
    hom: String,
    entries: &[C::Payload],
) -> Value {
    let mut out = json!({
        "rows": rows,
        "cols": cols,
        "hom": hom,
    });
    if let Some(m) = model.modulus() {
        out["modulus"] = json!(m.to_string());
    }
    out["entries"] = Value::Array(entries.iter().map(|e| model.encode_payload(e)).collect());
    out
}

/// `{"rows","cols","hom","modulus"?,"entries"}` with row-major entry encodings.
pub fn encode_hom_matrix<C>(model: &C, m: &HomMatrix<C::Payload>) -> Value
where
    C: CategoryModel + ?Sized,
{
    encode_entries(model, m.rows, m.cols, model.hom_tag(m.dom, m.cod), &m.entries)
}

pub fn encode_endo_matrix<C>(model: &C, m: &EndoMatrix<C::Payload>) -> Value
where
    C: CategoryModel + ?Sized,
{
    let mut out = encode_entries(model, m.size, m.size, model.hom_tag(m.obj, m.obj), &m.entries);
    out["side"] = serde_json::to_value(m.side).expect("side serializes");
    out
}

struct Header {
    rows: usize,
    cols: usize,
    dom: ObjectRef,
    cod: ObjectRef,
}

fn decode_header<C: CategoryModel + ?Sized>(model: &C, value: &Value) -> Result<(Header, Vec<Value>)> {
    let field = |name: &str| {
        value
            .get(name)
            .ok_or_else(|| Error::Decode(format!("matrix encoding lacks `{name}`")))
    };
    let dim = |name: &str| -> Result<usize> {
        field(name)?
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| Error::Decode(format!("`{name}` is not a non-negative integer")))
    };
    let rows = dim("rows")?;
    let cols = dim("cols")?;
    let hom = field("hom")?
        .as_str()
        .ok_or_else(|| Error::Decode("`hom` is not a string".into()))?;
    let (d, c) = hom
        .split_once("->")
        .ok_or_else(|| Error::Decode(format!("bad hom tag {hom}")))?;
    let dom = model.object_by_name(d)?;
    let cod = model.object_by_name(c)?;
    match (model.modulus(), value.get("modulus")) {
        (None, None) => {}
        (Some(m), Some(v)) if v.as_str() == Some(m.to_string().as_str()) => {}
        _ => return Err(Error::Decode("modulus header does not match the model".into())),
    }
    let entries = field("entries")?
        .as_array()
        .ok_or_else(|| Error::Decode("`entries` is not a list".into()))?
        .clone();
    check_shape(rows, cols, entries.len())?;
    Ok((Header { rows, cols, dom, cod }, entries))
}

/// Decodes and validates a hom-matrix; every entry must be canonical.
pub fn decode_hom_matrix<C>(model: &C, value: &Value) -> Result<HomMatrix<C::Payload>>
where
    C: CategoryModel + ?Sized,
{
    let (h, raw) = decode_header(model, value)?;
    let entries = raw
        .iter()
        .map(|v| model.decode(h.dom, h.cod, v).map(Morphism::into_payload))
        .collect::<Result<Vec<_>>>()?;
    Ok(HomMatrix {
        rows: h.rows,
        cols: h.cols,
        dom: h.dom,
        cod: h.cod,
        entries,
    })
}

pub fn decode_endo_matrix<C>(model: &C, value: &Value) -> Result<EndoMatrix<C::Payload>>
where
    C: CategoryModel + ?Sized,
{
    let (h, raw) = decode_header(model, value)?;
    if h.dom != h.cod || h.rows != h.cols {
        return Err(Error::Decode("endo-matrix must be square over an endo hom".into()));
    }
    let side: Side = value
        .get("side")
        .cloned()
        .map(serde_json::from_value)
        .transpose()
        .map_err(|e| Error::Decode(e.to_string()))?
        .ok_or_else(|| Error::Decode("endo-matrix encoding lacks `side`".into()))?;
    let entries = raw
        .iter()
        .map(|v| model.decode(h.dom, h.dom, v).map(Morphism::into_payload))
        .collect::<Result<Vec<_>>>()?;
    Ok(EndoMatrix {
        size: h.rows,
        obj: h.dom,
        side,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instantiations::mpf::{mpf_model, MpfModel, MpfParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn toy() -> MpfModel {
        mpf_model(MpfParams {
            p: 7,
            k: 2,
            base: vec![vec![3, 5], vec![2, 6]],
        })
        .unwrap()
    }

    #[test]
    fn identity_actions_are_trivial() {
        let m = toy();
        let phi = m.public_matrix().unwrap();
        let right = EndoMatrix::identity(&m, MpfModel::A, Side::Right, 2).unwrap();
        let left = EndoMatrix::identity(&m, MpfModel::B, Side::Left, 2).unwrap();
        assert_eq!(act_right(&m, &phi, &right).unwrap(), phi);
        assert_eq!(act_left(&m, &left, &phi).unwrap(), phi);
        // off-diagonal exponent zero, diagonal exponent one
        assert_eq!(right.entries(), &[1, 0, 0, 1]);
    }

    #[test]
    fn matrix_power_function_by_hand() {
        let m = toy();
        let phi = m.public_matrix().unwrap();
        let psi = EndoMatrix::new(&m, MpfModel::A, Side::Right, 2, vec![1, 2, 3, 4]).unwrap();
        let out = act_right(&m, &phi, &psi).unwrap();
        // (0,0): 3^1 * 5^3 = 375 = 4 mod 7; (0,1): 3^2 * 5^4 = 5625 = 4 mod 7
        assert_eq!(*out.entry(0, 0), 4);
        assert_eq!(*out.entry(0, 1), 4);
    }

    #[test]
    fn side_and_shape_are_checked() {
        let m = toy();
        let phi = m.public_matrix().unwrap();
        let left = EndoMatrix::identity(&m, MpfModel::B, Side::Left, 2).unwrap();
        assert!(act_right(&m, &phi, &left).is_err());
        let small = EndoMatrix::identity(&m, MpfModel::A, Side::Right, 1).unwrap();
        assert!(matches!(act_right(&m, &phi, &small), Err(Error::ShapeMismatch(_))));
        assert!(HomMatrix::new(&m, MpfModel::A, MpfModel::B, 2, 2, vec![1, 2, 3]).is_err());
        assert!(HomMatrix::new(&m, MpfModel::A, MpfModel::B, 0, 2, vec![]).is_err());
    }

    #[test]
    fn degree_zero_is_scalar() {
        let m = toy();
        let gen = EndoMatrix::new(&m, MpfModel::A, Side::Right, 2, vec![1, 2, 3, 4]).unwrap();
        let fam = CommutingFamily::polynomial(gen, 0, 0, 5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = sample_commuting(&m, &fam, &mut rng).unwrap();
            assert_eq!(x.entry(0, 1), &0);
            assert_eq!(x.entry(1, 0), &0);
            assert_eq!(x.entry(0, 0), x.entry(1, 1));
        }
    }

    #[test]
    fn non_commuting_generators_are_rejected() {
        let m = toy();
        let p = EndoMatrix::new(&m, MpfModel::A, Side::Right, 2, vec![1, 1, 0, 1]).unwrap();
        let q = EndoMatrix::new(&m, MpfModel::A, Side::Right, 2, vec![1, 0, 1, 1]).unwrap();
        let fp = CommutingFamily::polynomial(p.clone(), 2, 0, 5).unwrap();
        let fq = CommutingFamily::polynomial(q, 2, 0, 5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        assert!(matches!(
            verify_commuting(&m, &fp, &fq, &mut rng),
            Err(Error::NonCommutingFamilies(_))
        ));
        let fp2 = CommutingFamily::polynomial(p, 1, 1, 3).unwrap();
        verify_commuting(&m, &fp, &fp2, &mut rng).unwrap();
    }

    #[test]
    fn encoding_round_trips() {
        let m = toy();
        let phi = m.public_matrix().unwrap();
        let enc = encode_hom_matrix(&m, &phi);
        assert_eq!(enc["hom"], "A->B");
        assert_eq!(enc["modulus"], "7");
        assert_eq!(decode_hom_matrix(&m, &enc).unwrap(), phi);
        let mut bad = enc.clone();
        bad["entries"][0] = json!("0");
        assert!(decode_hom_matrix(&m, &bad).is_err());
        let psi = EndoMatrix::new(&m, MpfModel::B, Side::Left, 2, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(decode_endo_matrix(&m, &encode_endo_matrix(&m, &psi)).unwrap(), psi);
    }
}
