//! Bing-Blankinship tube trees and the quantitative modulus dichotomy.
//!
//! The crate is organised bottom-up:
//!
//! * [`word`] addresses nodes of the binary defining tree and interlaces words.
//! * [`geom`] is the polyline kernel: tubes, Bing doubles, linking numbers,
//!   meridian-disk intersections, diameters and interlaced product tubes.
//! * [`tree`] assembles nested tube trees from the Bing pattern.
//! * [`shrink`] runs Bing's shrinking schedule and emits certificates.
//! * [`semmes`] realizes the quasi-self-similar metric on a voxel cell complex.
//! * [`modulus`] computes discrete p-modulus with a primal solver and an
//!   independent oracle, plus the analytic lower and upper bounds.
//! * [`intersect`] counts fiber-disk intersections and builds the dichotomy table.
//! * [`lab`] is the experiment driver behind the `bblab` binary.

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geom;
pub mod intersect;
pub mod lab;
pub mod modulus;
pub mod semmes;
pub mod shrink;
pub mod tree;
pub mod word;

pub use error::{Error, Result};
pub use word::{InterlacedWord, Word};
