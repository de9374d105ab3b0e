use thiserror::Error;

/// Why mod-G₃ initialisation of a pair failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InitFailure {
    /// `s₀` is not congruent to `s₁⋯s_b` modulo `G^p[G,G]`. Conclusive.
    #[error("homology obstruction: {0}")]
    HomologyObstruction(String),
    /// The quadratic part of `s₀` cannot match the standard word. Conclusive.
    #[error("degenerate form modulo G_3: {0}")]
    Degenerate(String),
    /// A supplied seed basis does not put `s₀` in standard form mod G₃.
    #[error("seed basis rejected: {0}")]
    SeedMismatch(String),
    /// The bounded search ran out of candidates or was too large. Inconclusive.
    #[error("search bound exhausted: {0}")]
    SearchExhausted(String),
}

impl InitFailure {
    /// Conclusive failures refute the input; the rest only say "not found".
    pub fn is_conclusive(&self) -> bool {
        matches!(self, InitFailure::HomologyObstruction(_) | InitFailure::Degenerate(_))
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid generator set: n = {n}, b = {b} (need n + b >= 1)")]
    InvalidGeneratorSet { n: usize, b: usize },
    #[error("generator index {index} out of range 1..={rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },
    #[error("words live over different generator sets")]
    MismatchedGenerators,
    #[error("expected {expected} generator images, got {got}")]
    ImageCountMismatch { expected: usize, got: usize },
    #[error("rank must be positive")]
    ZeroRank,
    #[error("word has rank {word} but the Hall basis has rank {basis}")]
    RankMismatch { word: usize, basis: usize },
    #[error("elements use different truncation parameters")]
    ParamMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("element has filtration weight {have}, need at least {need}")]
    WeightPrecondition { need: usize, have: usize },
    #[error("weight {weight} exceeds tracked class {class}")]
    WeightOverflow { weight: usize, class: usize },
    #[error("standard word undefined for n = {n}, character {chi}")]
    UndefinedStandardWord { n: usize, chi: String },
    #[error("boundary exponent {0} is not divisible by 4")]
    NotDivisibleByFour(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("target is not in the image of the linear map")]
    NoSolution,
    #[error("initialisation failed: {0}")]
    Init(#[from] InitFailure),
    #[error("no solution at refinement step j = {step}")]
    NoSolutionAt { step: usize },
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid collapse move: {0}")]
    InvalidMove(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
