//! Mobility-aware coded storage and delivery for cache-enabled small-cell
//! networks.
//!
//! Small-cell base stations (SBSs) are colored so that every mobility path of
//! `T` cells meets `T` distinct colors. Each file is split into `T` pieces,
//! expanded to `L` coded fragments with an `(L, T)` MDS code, and every color
//! group caches its own fragment with the Maddah-Ali–Niesen placement. During
//! each of the `T` slots of a download session the macro base station runs
//! an XOR multicast delivery inside every color group; after `T` slots a user
//! holds `T` distinct fragments and recovers its file.
//!
//! Modules:
//! - [`topology`]: hexagonal and square cell grids, distances, mobility paths.
//! - [`coloring`]: reuse-pattern coloring, validity checks, exact chromatic oracle.
//! - [`mds`]: systematic `(L, T)` erasure code over GF(256).
//! - [`caching`]: placement, XOR delivery and decoding for all access models.
//! - [`rates`]: closed-form delivery rates and subpacketization.
//! - [`popularity`]: Zipf demand, file-removal cache planning, Monte Carlo rate.
//! - [`mobility_sim`]: random-mobility offloading simulation.

pub mod caching;
pub mod coloring;
pub mod combinatorics;
mod error;
mod gf256;
pub mod mds;
pub mod mobility_sim;
mod par;
pub mod popularity;
pub mod rates;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
