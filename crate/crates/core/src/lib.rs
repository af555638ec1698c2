//! Spectral analysis and Mpemba-state construction for Markovian open
//! quantum systems with a quasi-degenerate excited doublet.
//!
//! The crate builds the reduced dissipative generator of the three-level
//! V configuration (and its Lambda sibling), estimates its spectrum
//! perturbatively in the level splitting, evaluates the closed-form
//! relaxation trajectories, and constructs initial states that bypass the
//! slow coherence mode entirely. A full nonsecular Redfield propagator and
//! an incoherent rate-equation model serve as independent references.

pub mod analysis;
pub mod classical;
pub mod closedform;
pub mod error;
pub mod generator;
pub mod lepe;
pub mod model;
pub mod mpemba;
pub mod validation;

pub use error::{Error, Result};
pub use model::{BathSpec, Rates, SystemSpec, VModelParams};
