//! Quaternion body-attitude alignment.
//!
//! Particles carry a position in a periodic box and a unit quaternion
//! encoding their body frame. They align nematically with the local
//! average of their neighbours (the sign of a quaternion is irrelevant),
//! subject to angular noise. This crate provides
//!
//! * quaternion algebra and the double cover `Phi: H1 -> SO(3)`,
//!   [`quat`];
//! * nematic averaging, [`nematic`];
//! * the equilibria and their order parameter, [`equilibria`];
//! * the generalized collision invariant, [`gci`], and the coefficients of
//!   the macroscopic model, [`coeffs`];
//! * particle simulations in quaternion and rotation-matrix form, [`ibm`];
//! * a one-dimensional solver for the macroscopic equations, [`sohq_pde`].

pub mod cli;
pub mod coeffs;
pub mod equilibria;
pub mod error;
pub mod gci;
pub mod ibm;
pub mod linalg;
pub mod nematic;
pub mod quadrature;
pub mod quat;
pub mod sohq_pde;
pub mod stats;

pub use error::{Error, Result};
