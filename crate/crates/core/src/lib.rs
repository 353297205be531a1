//! Generalized binary search over finite hypothesis spaces.
//!
//! The crate is organised around [`space::HypothesisSpace`], the response
//! matrix of N hypotheses over the M cells of the query-space partition they
//! induce. On top of it:
//!
//! - [`geometry`] computes neighbor distances, k-neighborliness, the
//!   coherence parameter `c*` (a minimax LP over distributions on cells) and
//!   the rate constants that follow from them;
//! - [`oracle`] simulates noisy responses from a hidden truth;
//! - [`search`] runs the splitting algorithm, its repetition-coded variant and
//!   the soft-decision (posterior-weighted) searches;
//! - [`agnostic`] combines soft-decision search with ERM and a runoff on the
//!   disagreement region, for when the truth may lie outside the space;
//! - [`bench`] drives seeded Monte Carlo experiments and bound checks for the
//!   `gbs` command-line tool.

pub mod agnostic;
pub mod bench;
pub mod geometry;
pub mod lp;
pub mod oracle;
pub mod rng;
pub mod search;
pub mod space;

pub use space::{HypothesisSpace, Label};

/// Formats a float with 17 significant digits (exact round trip).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
