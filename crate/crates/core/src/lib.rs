//! Direct and inverse spectral problems for the perturbed harmonic oscillator
//! `-ψ'' + x²ψ + q(x)ψ = λψ` on the half-line, with Dirichlet or Robin
//! (`ψ'(0) = bψ(0)`) boundary conditions.

pub mod coords;
pub mod darboux;
pub mod error;
pub mod hardy;
pub mod inverse;
pub mod io;
pub mod ode;
pub mod potential;
pub mod quad;
pub mod solutions;
pub mod specfun;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use potential::{Potential, Term};
pub use solutions::{Boundary, Shooter, SolverConfig};
pub use specfun::Parity;
pub use spectrum::{SpectralData, SpectralDatum, Spectrum};
