//! Exact computation of bigraded Khovanov cohomology for links presented as
//! braid closures and connected sums, over ℤ, ℚ and ℤ₍ₚ₎.
//!
//! The diagrammatic engine scans a braid word through the dotted cobordism
//! category (delooping and Gaussian elimination after every crossing), closes
//! the diagram with optional basepoints, and hands off a free complex over
//! R = ℤ[X]/(X²). A symbolic R-bimodule calculus handles connected sums by
//! tensoring reduced factors, and exact Smith normal form extracts free ranks
//! and torsion orders per bidegree.

pub mod braid;
pub mod cache;
pub mod cli;
pub mod cob;
pub mod cube;
pub mod homology;
pub mod linalg;
pub mod ring;
pub mod rmod;
pub mod scan;

pub use ring::{Coef, Ring};

/// Engine version: bumping invalidates cached complexes and dump headers.
pub const ENGINE_VERSION: &str = concat!("khv-", env!("CARGO_PKG_VERSION"));
