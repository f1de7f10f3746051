//! Hyperbolic surfaces with totally geodesic boundary, built from
//! Fenchel–Nielsen data, and the spectra computed from them.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: isometries of the upper half-plane, geodesics, cross
//!   ratios and the pentagon/hexagon formulas for pants.
//! - [`surfaces`]: explicit Schottky-type generators for pants, one-holed
//!   tori and general pants gluings.
//! - [`dirichlet`] and [`ball`]: certified Dirichlet face pairings and the
//!   uniform-cost enumeration of group elements they allow.
//! - [`ortho`]: ortho spectra, boundary lifts, closed geodesics, systole.
//! - [`covers`]: finite cyclic covers via Reidemeister–Schreier.
//! - [`identities`]: Basmajian and Bridgeman sums, Rogers dilogarithm.
//! - [`spectra`]: analysis of spectra (granulosity, Poincaré sums,
//!   exponents, torus reconstruction, systole lower bounds).

pub mod ball;
pub mod covers;
pub mod dirichlet;
pub mod error;
pub mod geometry;
pub mod identities;
pub mod io;
pub mod ortho;
pub mod spectra;
pub mod surfaces;
pub mod words;

pub use error::{Error, Result};
