use thiserror::Error;

/// Errors raised by models, protocols and the simulated network.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("non-composable pair: codomain {right_cod} of the right factor differs from domain {left_dom} of the left factor")]
    NonComposable { left_dom: String, right_cod: String },

    #[error("morphism {dom}->{cod} is not a member of model `{model}`: {reason}")]
    ForeignMorphism {
        model: String,
        dom: String,
        cod: String,
        reason: String,
    },

    #[error("hom-set {dom}->{cod} is empty")]
    EmptyHom { dom: String, cod: String },

    #[error("unknown object {0}")]
    UnknownObject(String),

    #[error("no sampler for hom-set {dom}->{cod}")]
    NoSampler { dom: String, cod: String },

    #[error("model `{0}` has no additive hom structure")]
    NotEnriched(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("formal sum exceeds the term cap of {cap} (would hold {terms} terms)")]
    TermExplosion { cap: usize, terms: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("families do not commute: {0}")]
    NonCommutingFamilies(String),

    #[error("role mismatch: {0}")]
    RoleMismatch(String),

    #[error("party index {index} out of range 1..={parties}")]
    IndexOutOfRange { index: usize, parties: usize },

    #[error("missing contribution: {0}")]
    MissingContribution(String),

    #[error("delivery failure: {0}")]
    DeliveryFailure(String),

    #[error("search space too large: {0}")]
    ParamsTooLarge(String),

    #[error("no preimage found: {0}")]
    NotFound(String),

    #[error("model `{0}` does not expose an enumerable secret space")]
    NotEnumerable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
