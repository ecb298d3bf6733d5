//! Computable modes of convergence for simple functions on rational
//! partitions, with machine-checkable certificates, plus a desk-scale
//! numerical study of the diffusive relaxation limit that motivates the
//! witness-set mode of convergence.

pub mod error;
pub mod measure;
pub mod modes;
pub mod preservation;
pub mod rational;
pub mod relaxation;
pub mod report;
pub mod sequences;
pub mod value;

pub use error::{Error, Result};
pub use measure::{integrate_p, superlevel_set, Domain, MeasurableSubset, Partition, SimpleFunction};
pub use value::{Exponent, Quantity, Value};
