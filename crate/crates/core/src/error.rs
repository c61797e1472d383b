use thiserror::Error;

use crate::spectrum::NoBoundReason;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("effective centrifugal coupling c1^2 = {0} is not positive")]
    NonPositiveC1Sq(f64),

    #[error("negative radicand {0} in the closed-form energy equation")]
    NegativeDiscriminant(f64),

    #[error("level has no bound state ({0})")]
    NotBound(NoBoundReason),

    #[error("partner component is undefined: {0} vanishes")]
    DegenerateLevel(&'static str),

    #[error("r_max = {r_max} is too small: estimated tail fraction {tail_fraction:e} exceeds {limit:e}")]
    RMaxTooSmall { r_max: f64, tail_fraction: f64, limit: f64 },

    #[error("cannot normalize a function with zero norm")]
    ZeroNorm,

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn require(cond: bool, name: &'static str, requirement: &'static str, value: f64) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            requirement,
            value,
        })
    }
}
