//! Weyl-invariant real Monge-Ampère equations for Ricci-flat Kähler potentials
//! on complexified rank-one and rank-two symmetric spaces.
//!
//! * [`rootsys`]: restricted root systems, Weyl groups and chambers.
//! * [`convex`]: convex functions, multi-valued subgradients and the
//!   Alexandrov Monge-Ampère measure.
//! * [`ma`]: the Ricci-flat equation, solved by quadrature in rank one and by
//!   a damped Newton grid scheme in rank two.
//! * [`kaehler`]: metric-level quantities (complex Hessian blocks, induced
//!   metric, determinant identities) evaluated from a potential.

pub mod convex;
pub mod error;
pub mod kaehler;
pub mod ma;
pub mod quadrature;
pub mod rootsys;

pub use error::{Error, Result};
pub use rootsys::{ChamberPoint, Family, Membership, Root, RootSystem};
