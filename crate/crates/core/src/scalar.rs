//! Commutative scalar rings that exterior-algebra coefficients live in.
//!
//! The engine is generic over the coefficient ring: plain `f64` for numeric
//! work, polynomial rings in the fugacity variables for generating-function
//! work, and multilinear insertion rings for correlation extraction.

/// A commutative ring with a real scalar action.
///
/// `scale` multiplies by an `f64`; the exponential uses it for the 1/m!
/// factors, which are applied to coefficients term-wise regardless of ring.
pub trait ScalarRing: Clone + PartialEq + std::fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Multiply by a real number.
    fn scale(&self, factor: f64) -> Self;
}

impl ScalarRing for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn scale(&self, factor: f64) -> Self {
        self * factor
    }
}
