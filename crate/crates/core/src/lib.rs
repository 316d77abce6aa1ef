//! Independence polynomials of recursively glued graphs.
//!
//! A family of marked graphs `G_0, G_1, …` is produced by gluing `m` copies of
//! `G_n` along small connecting graphs ([`gluing`], [`recursion`]). The
//! independence polynomials conditioned on the marks obey an exact polynomial
//! recursion ([`polyengine`]) that is checked against brute force
//! ([`oracle`]). Evaluated at a fixed activity the recursion is a rational map of
//! projective space whose dynamics ([`dynamics`]) controls where the zeros of
//! the polynomials can accumulate ([`zeros`]).

pub mod dynamics;
pub mod error;
pub mod gluing;
pub mod graph;
pub mod numeric;
pub mod oracle;
pub mod polyengine;
pub mod poly;
pub mod recursion;
pub mod zeros;

pub use error::{Error, Result};
pub use gluing::{catalog, Gluing, GluingData};
pub use graph::{Assignment, MarkedGraph, MultiGraph};
pub use poly::Polynomial;
