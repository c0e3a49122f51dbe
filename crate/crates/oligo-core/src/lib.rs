//! Core algorithms for classifying P-oligomorphic permutation groups by
//! finite permutation groups with decorated blocks, and for computing their
//! profile generating series exactly.
//!
//! The crate is organised in layers:
//!
//! - [`perm`]: permutations of `{0..n-1}`, cycle notation, finite groups
//!   given by generators, stabilizer chains, orbits, ages, subdirect
//!   products;
//! - [`blocksys`]: set partitions, block-system validation and the lattice
//!   operations (meet, join, complete enumeration for small groups);
//! - [`decorated`]: the classification datum (finite group, block system,
//!   per-block decorations), its validation, constructors, isomorphism
//!   testing and enumeration;
//! - [`poly`]: exact integer polynomial and rational function arithmetic;
//! - [`series`]: orbit-variable tables, Hilbert/profile series by a
//!   degree-weighted Molien sum, growth rates and the nonnegative numerator
//!   normal form;
//! - [`oracle`]: ground truth by brute force on finite truncations,
//!   towers, subdirect reconstruction and recognition of decorated data.
//!
//! Everything is exact; there is no floating point in any computation path.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod blocksys;
pub mod decorated;
pub mod error;
pub mod perm;
pub mod poly;
pub mod series;


pub mod oracle;


pub use error::Error;
