//! Exhaustive search for a two-party secret from an eavesdropper's view.

use serde::Serialize;
use serde_json::Value;

use super::EavesdropperView;
use crate::arith::{mul_mod, pow_mod};
use crate::category::{CategoryModel, Morphism};
use crate::error::{Error, Result};
use crate::instantiations::{dh_category, DhCategory, DhParams};
use crate::protocols::{ProtocolKind, PublicSetup, ALICE, BOB};

/// Largest search space (or explicit bound) an attack will take on.
pub const SEARCH_CEILING: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum AttackOutcome {
    /// `index` is the exponent (position in the secret space) of Alice's secret.
    Recovered { index: u64, key: Value },
    /// The bound was reached without a match.
    Exhausted { searched: u64 },
}

fn search_limit(space: Option<u64>, bound: Option<u64>) -> Result<u64> {
    match (space, bound) {
        (_, Some(b)) if b > SEARCH_CEILING => Err(Error::ParamsTooLarge(format!(
            "bound {b} exceeds the search ceiling 2^24"
        ))),
        (Some(s), Some(b)) => Ok(s.min(b)),
        (None, Some(b)) => Ok(b),
        (Some(s), None) if s > SEARCH_CEILING => Err(Error::ParamsTooLarge(format!(
            "secret space of size {s} exceeds the search ceiling 2^24; pass a smaller bound"
        ))),
        (Some(s), None) => Ok(s),
        (None, None) => Ok(SEARCH_CEILING),
    }
}

fn two_party_view(view: &EavesdropperView) -> Result<(&Value, &Value)> {
    if view.header.protocol != ProtocolKind::Ckap {
        return Err(Error::InvalidParams(format!(
            "attacks take two-party transcripts, not {}",
            view.header.protocol.as_str()
        )));
    }
    let offer = |who: &str| {
        view.message_from(who)
            .map(|m| &m.payload)
            .ok_or_else(|| Error::MissingContribution(format!("no message from {who}")))
    };
    Ok((offer(ALICE)?, offer(BOB)?))
}

/// Discrete-log search on Alice's offer, then Bob's offer raised to the found exponent.
///
/// Without a `bound` the whole group order is scanned, which must not exceed
/// [`SEARCH_CEILING`]. A full scan with no match is [`Error::NotFound`].
pub fn brute_force_dh(
    view: &EavesdropperView,
    params: &DhParams,
    bound: Option<u64>,
) -> Result<AttackOutcome> {
    let model = dh_category(params.clone())?;
    if view.header.model != model.model_id() {
        return Err(Error::InvalidParams(format!(
            "view is over {}, not {}",
            view.header.model,
            model.model_id()
        )));
    }
    let limit = search_limit(Some(params.s), bound)?;
    let (a, b) = two_party_view(view)?;
    let a = *model.decode(DhCategory::A, DhCategory::B, a)?.payload();
    let b = *model.decode(DhCategory::A, DhCategory::B, b)?.payload();
    let DhParams { p, g, s } = *params;
    let mut x = 1;
    for m in 0..limit {
        if x == a {
            return Ok(AttackOutcome::Recovered {
                index: m,
                key: Value::String(pow_mod(b, m, p).to_string()),
            });
        }
        x = mul_mod(x, g, p);
    }
    if limit >= s {
        Err(Error::NotFound(format!("no exponent below {s} reproduces {a}")))
    } else {
        Ok(AttackOutcome::Exhausted { searched: limit })
    }
}

/// Walks the model's enumerable secret space for Alice's secret.
pub fn brute_force_generic<C: CategoryModel + ?Sized>(
    view: &EavesdropperView,
    model: &C,
    bound: Option<u64>,
) -> Result<AttackOutcome> {
    if view.header.model != model.model_id() {
        return Err(Error::InvalidParams(format!(
            "view is over {}, not {}",
            view.header.model,
            model.model_id()
        )));
    }
    let PublicSetup::Ckap { g } = PublicSetup::decode(model, ProtocolKind::Ckap, &view.header.public)?
    else {
        unreachable!("decoded with the two-party kind");
    };
    let (a, b) = two_party_view(view)?;
    let a = model.decode(g.dom(), g.cod(), a)?;
    let b = model.decode(g.dom(), g.cod(), b)?;
    let space = model
        .secret_space(g.dom())
        .ok_or_else(|| Error::NotEnumerable(model.hom_tag(g.dom(), g.dom())))?;
    let (lower, upper) = space.size_hint();
    let size = upper.filter(|&u| u == lower).map(|u| u as u64);
    let limit = search_limit(size, bound)?;
    let mut searched = 0;
    for f in space.take(limit as usize) {
        let f = Morphism::new_unchecked(g.dom(), g.dom(), f);
        if model.compose(&g, &f)? == a {
            return Ok(AttackOutcome::Recovered {
                index: searched,
                key: model.encode(&model.compose(&b, &f)?),
            });
        }
        searched += 1;
    }
    if searched < limit {
        Err(Error::NotFound("secret space exhausted without a match".into()))
    } else {
        Ok(AttackOutcome::Exhausted { searched })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceiling_applies_to_space_and_bound() {
        assert!(search_limit(Some(22), None).is_ok());
        assert!(matches!(
            search_limit(Some(SEARCH_CEILING + 1), None),
            Err(Error::ParamsTooLarge(_))
        ));
        assert_eq!(search_limit(Some(SEARCH_CEILING * 2), Some(100)).unwrap(), 100);
        assert!(matches!(
            search_limit(Some(10), Some(SEARCH_CEILING + 1)),
            Err(Error::ParamsTooLarge(_))
        ));
    }
}
