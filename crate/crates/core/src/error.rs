use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field degree m={0} outside supported range 2..=16")]
    UnsupportedFieldDegree(u32),
    #[error("polynomial {poly:#x} is not primitive of degree {m}")]
    NotPrimitive { m: u32, poly: u32 },
    #[error("element {0} is outside the field")]
    ElementOutOfRange(u32),
    #[error("zero has no {0}")]
    ZeroElement(&'static str),
    #[error("design distance {design} invalid for code length {n}")]
    DesignDistance { design: usize, n: usize },
    #[error("no extended BCH code with k={k} over GF(2^{m})")]
    NoSuchCode { m: u32, k: usize },
    #[error("unknown code name {0:?}")]
    UnknownCode(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid flipping set: {0}")]
    FlippingSet(String),
    #[error("invalid interleaver: {0}")]
    Interleaver(String),
    #[error("invalid scheme: {0}")]
    Scheme(String),
    #[error("invalid channel: {0}")]
    Channel(String),
    #[error("empty input")]
    Empty,
    #[error("bracket [{lo}, {hi}] dB does not straddle target BER {target:e} (BER {ber_lo:e} at lo, {ber_hi:e} at hi)")]
    Unbracketed {
        lo: f64,
        hi: f64,
        target: f64,
        ber_lo: f64,
        ber_hi: f64,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
