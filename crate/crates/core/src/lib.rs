//! Simulation tiers for light in periodically curved binary waveguide
//! superlattices, the optical analogue of field-induced pair production from
//! the Dirac sea.
//!
//! The tiers, from cheapest to most complete:
//!
//! * [`two_level`]: momentum-resolved occupation dynamics of the two minibands.
//! * [`tight_binding`]: coupled-mode equations on the binary lattice.
//! * [`dirac`]: the continuum spinor equation obtained near the zone edge.
//! * [`bpm`]: split-step propagation of the paraxial wave equation.
//!
//! [`bands`] computes the continuum band diagram and fits the tight-binding
//! constants; [`diagnostics`] turns trajectories into observables.

pub mod bands;
pub mod bpm;
pub mod diagnostics;
pub mod dirac;
pub mod drive;
pub mod error;
pub mod io;
pub mod numerics;
pub mod ode;
pub mod spectral;
pub mod tight_binding;
pub mod two_level;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
