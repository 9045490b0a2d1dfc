//! Bond percolation on finite transitive graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] builds the graph families (tori, hypercubes, Cayley graphs,
//!   random cubic graphs) and computes their deterministic geometry:
//!   distances, diameter, isoperimetric constants.
//! * [`percolation`] is the sampler: single-`p` cluster statistics, the
//!   exhaustive small-graph law, and the monotone sweep that yields the
//!   crossing value `T_alpha` of every target fraction in one pass.
//! * [`threshold`] turns sweeps into threshold estimates, `theta_n(p)`
//!   curves, uniqueness probabilities, threshold gaps and critical-window
//!   exponents.
//! * [`bounds`] holds exact calculators for the disjoint-path argument and
//!   the connection-probability bound on Cayley graphs, plus the empirical
//!   verifier for the latter.
//! * [`eit`] samples oriented lattice paths on tori and fits their
//!   intersection tails; [`resistance`] computes effective resistances.
//!
//! Every ensemble is deterministic in its master [`Seed`]: sample `i` draws
//! from its own counter-based stream, so results do not depend on how many
//! worker threads ran it.

pub mod bounds;
pub mod eit;
mod error;
pub mod graph;
pub mod parallel;
pub mod percolation;
pub mod resistance;
pub mod rng;
pub mod stats;
pub mod threshold;
pub mod union_find;

pub use error::{Error, Result};
pub use graph::{Family, Graph};
pub use parallel::Exec;
pub use rng::Seed;
