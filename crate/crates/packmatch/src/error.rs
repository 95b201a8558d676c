use thiserror::Error;

/// Errors shared by the packing, template and search layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field layout: f = {f} on a {w}-bit word")]
    InvalidLayout { f: u32, w: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("symbol {symbol} at index {index} does not fit alphabet of size {sigma}")]
    Encoding { index: usize, symbol: u32, sigma: u32 },

    #[error("pattern of length {m} does not fit a {w}-bit word lane (limit {limit})")]
    PatternTooLong { m: usize, limit: usize, w: u32 },

    #[error("window at position {j} reads past the packed buffer (n = {n}, over-allocation = {over_alloc})")]
    OutOfBounds { j: usize, n: usize, over_alloc: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("malformed packed text: {0}")]
    Format(String),
}
