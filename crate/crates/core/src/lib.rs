//! Resource-bounded algorithmic information theory on a small prefix machine.
//!
//! [`machine`] defines the reference interpreter, [`enumeration`] runs every
//! program up to a length and step bound and aggregates the results, and the
//! remaining modules read complexity, probability, prediction and
//! information estimates off those aggregates. [`lz`] offers a compression
//! surrogate for strings far beyond enumeration reach, and [`bayes`] the
//! classic discrete form of Bayes' rule.

pub mod bayes;
pub mod bits;
pub mod enumeration;
pub mod infotheory;
pub mod lz;
pub mod machine;
pub mod predictor;

pub use bits::BitString;
pub use enumeration::{enumerate, DyadicMass, EnumParams, OutputRecord, ProgramTable};
pub use infotheory::InfoLab;
pub use predictor::PredictiveModel;
