//! Nodal radial solutions of Hénon and Lane–Emden type problems on the unit
//! ball, their singular and standard radial Sturm–Liouville spectra, and the
//! closed-form Morse-index machinery built on top of them.
//!
//! The crate is organised bottom-up:
//!
//! * [`radial_ode`] integrates the generalized Lane–Emden ODE and builds
//!   validated nodal profiles.
//! * [`henon_map`] holds the change of variables `t = r^{(2+α)/2}` and the
//!   eigenvalue / threshold relations it induces.
//! * [`spectral`] solves the weighted radial eigenproblems (Liouville
//!   transform + Sturm bisection, with an independent dense oracle).
//! * [`morse`] turns spectra into Morse-index reports.
//! * [`cli`] is the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod henon_map;
pub mod io;
pub mod morse;
pub mod radial_ode;
pub mod spectral;

pub use henon_map::DimensionMap;
pub use morse::{MorseReport, SymmetryMultiplicity};
pub use radial_ode::{Nonlinearity, RadialProfile};
pub use spectral::{EigenPair, Potential, SpectralConfig, Spectrum, WeightKind, WeightedSLProblem};
