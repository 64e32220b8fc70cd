//! Partial coherence of bipartite states measured through Fisher information.
//!
//! A state on `H_A (x) H_B` is probed by phase-parametrized channels acting on
//! A only. The post-selective Fisher information of the outcome distribution,
//! maximized over such channels, measures the coherence of A in its fixed
//! basis. This crate provides the channel model and its validation, Fisher and
//! quantum Fisher information, exact and certified values of the measure, and
//! the link to quantum state discrimination.
//!
//! ```
//! use pcfi::{coherence, estimation, presets};
//!
//! let rho = presets::rho3();
//! let fi = estimation::channel_fi(&presets::example1_channel(), &rho, 0.0).unwrap();
//! let ub = coherence::coherence_unitary_bound(&rho, coherence::UnitaryBoundMode::Full).unwrap();
//! assert!(fi > ub);
//! ```

pub mod coherence;
pub mod error;
pub mod estimation;
pub mod io;
pub mod lincore;
pub mod presets;
pub mod qsd;
pub mod resource;
pub mod sample;

pub use error::{Error, Result};
pub use lincore::{ComplexMatrix, DensityMatrix, C64};
pub use resource::{KrausElement, PioChannel};
