//! Partition and correlation functions of one-dimensional multicomponent
//! log-gases at coupling `beta = b^2`, computed through a finite exterior
//! algebra instead of high-dimensional integration.
//!
//! The pipeline: an [`ensemble::EnsembleSpec`] fixes species charges, a
//! confining potential, and a reference polynomial family; each species gets
//! a form assembled from one-dimensional weighted Wronskian integrals
//! ([`ensemble::EnsembleSpec::build_omega`]); the full Berezin integral of
//! the exponential of their fugacity-weighted sum is the grand partition
//! function, a polynomial whose coefficients are the canonical partition
//! functions ([`ensemble::EnsembleSpec::partition_grand`]). Nilpotent marker
//! variables extend the same expansion to correlation functions
//! ([`correlations`]). Every result can be checked against brute-force
//! integration ([`oracle`]) at small particle number, and an independent
//! pairing expansion ([`ensemble::EnsembleSpec::partition_canonical_laplace`])
//! recombines the identical cached quadratures.

pub mod cache;
pub mod correlations;
pub mod ensemble;
pub mod error;
pub mod exterior;
pub mod fugacity;
pub mod increasing;
pub mod insertion;
pub mod oracle;
pub mod poly;
pub mod quadrature;
pub mod scalar;

pub use cache::CoefficientCache;
pub use correlations::{
    correlation_canonical, correlation_grand, correlation_grand_wedge, InsertionSet,
};
pub use ensemble::{EnsembleSpec, OddConvention, OmegaForm};
pub use error::{Error, Result};
pub use exterior::{AntisymmetricMatrix, BasisWord, Form, MAX_DIM};
pub use fugacity::{FugacityPolynomial, TruncationRule};
pub use increasing::IncreasingMap;
pub use insertion::{FugacityInsertionPolynomial, InsertionPolynomial};
pub use oracle::{
    boltzmann_factor, direct_correlation, direct_partition, mehta_reference, OracleConfig,
    OracleMethod,
};
pub use poly::{CompleteFamily, Polynomial};
pub use quadrature::{Estimate, Potential, QuadMethod, QuadratureScheme, WeightedMeasure};
pub use scalar::ScalarRing;
