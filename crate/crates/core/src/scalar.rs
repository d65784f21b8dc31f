//! Scalar abstraction for embeddings, similarities and scores.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real number type the routing math is written against: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossless widening used for persistence and reporting.
    fn to_f64_lossless(self) -> f64 {
        self.to_f64().expect("f32/f64 always convert to f64")
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to every Scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Descending order on scalars; incomparable values (NaN) sort as equal.
pub(crate) fn cmp_desc<F: Scalar>(a: F, b: F) -> std::cmp::Ordering {
    b.partial_cmp(&a).unwrap_or(std::cmp::Ordering::Equal)
}
