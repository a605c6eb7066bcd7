//! Mechanical checks of a no-hidden-variables argument for two unentangled,
//! pre- and post-selected spin-½ particles.
//!
//! - [`hilbert`]: kets, tensor products, projectors and their predicates.
//! - [`scenario`]: scenario model, validation and the JSON file format.
//! - [`constructions`]: the concrete scenarios and the two-parameter family.
//! - [`prepost`]: selection probability, forced values, ABL cross-check.
//! - [`nchv`]: exhaustive noncontextual assignment search and propagation traces.
//! - [`optimizer`]: grid searches for the maximal selection probabilities.
//! - [`report`] and [`cli`]: the command-line front end.

pub mod cli;
pub mod constructions;
pub mod hilbert;
pub mod nchv;
pub mod optimizer;
pub mod prepost;
pub mod report;
pub mod scenario;
