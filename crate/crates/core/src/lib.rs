//! L^q-spectra and box dimensions of planar box-like graph-directed self-affine measures.
//!
//! Two closed-form engines (all-diagonal and general) compute `gamma(q)`;
//! brute-force oracles in [`oracles`] check them independently.

pub mod cli;
pub mod diagonal;
pub mod error;
pub mod general;
pub mod minimize;
pub mod model;
pub mod oracles;
pub mod projection;
pub mod spectral;
pub mod spectrum;

pub use error::{Error, Result, Violation};
pub use model::{check_rosc, compose_word, validate_gifs, GifsModel, Kind};
pub use projection::{tau_at, TauPair};
