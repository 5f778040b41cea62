//! Derived invariants of gentle algebras, computed two independent ways.
//!
//! A gentle algebra can be handed to this crate either as a bound quiver
//! (arrows plus monomial length-2 relations) or as an `(m+2)`-angulation of a
//! marked oriented surface. The [`walk`] module computes the
//! Avella-Alaminos–Geiss invariant directly on the bound quiver by pairing
//! permitted threads with forbidden threads; the [`bridge`] module evaluates
//! the closed-form expression read off the angulation's boundary, reducing
//! degenerate angulations first by cutting their boundary bridges. The
//! [`verify`] module cross-checks the two routes against each other.

pub mod bridge;
pub mod build;
pub mod quiver;
pub mod surface;
pub mod threads;
pub mod verify;
pub mod walk;

pub use quiver::{AgFunction, BoundQuiver};
pub use surface::Angulation;
