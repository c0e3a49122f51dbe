use alloc::string::String;
use core::fmt;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A configurable resource cap (element count, degree, subset count)
    /// was exceeded.
    SizeLimit(String),
    /// The arguments do not live on a common domain.
    DomainMismatch { expected: usize, got: usize },
    /// A subset was required to be stable under the group and is not.
    NotStable(String),
    /// A partition was required to be a block system and is not.
    NotBlockSystem(String),
    /// A subgroup-containment precondition failed.
    NotSubgroup(String),
    /// A normality precondition failed.
    NotNormal(String),
    /// Two points were required to lie in a common orbit and do not.
    DistinctOrbits(usize, usize),
    /// The supplied coset correspondence is not an isomorphism of quotients.
    BadCorrespondence(String),
    /// A precondition specific to one operation failed.
    Precondition(String),
    /// Recognition failed; the payload names the stage.
    Recognition(String),
    /// A property that must hold by theory was falsified; carries evidence.
    FalsifiedProperty(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SizeLimit(s) => write!(f, "size limit exceeded: {s}"),
            Error::DomainMismatch { expected, got } => {
                write!(f, "domain mismatch: expected degree {expected}, got {got}")
            }
            Error::NotStable(s) => write!(f, "set not stable: {s}"),
            Error::NotBlockSystem(s) => write!(f, "not a block system: {s}"),
            Error::NotSubgroup(s) => write!(f, "not a subgroup: {s}"),
            Error::NotNormal(s) => write!(f, "not normal: {s}"),
            Error::DistinctOrbits(p, q) => {
                write!(f, "points {p} and {q} lie in distinct orbits")
            }
            Error::BadCorrespondence(s) => write!(f, "bad coset correspondence: {s}"),
            Error::Precondition(s) => write!(f, "precondition failed: {s}"),
            Error::Recognition(s) => write!(f, "recognition failed at stage: {s}"),
            Error::FalsifiedProperty(s) => write!(f, "falsified property: {s}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
