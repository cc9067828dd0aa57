pub mod channels;
pub mod characterizations;
pub mod entropy;
pub mod error;
pub mod frechet;
pub mod harness;
pub mod linalg;
pub mod phi;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod trials;

pub use channels::KrausChannel;
pub use entropy::{EntropyValue, MatrixEnsemble, ProductEnsemble, Variant};
pub use error::{Error, Result};
pub use harness::{RunConfig, SuiteReport};
pub use linalg::{CMatrix, HermitianMatrix, SpectralDecomposition};
pub use phi::{ClassTag, ScalarFunction};
pub use report::VerificationReport;
pub use trials::TrialConfig;
