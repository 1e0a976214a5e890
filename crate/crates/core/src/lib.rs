//! Time-slotted simulator of adaptive video streaming over a mobile network
//! whose base stations carry edge caches.
//!
//! Clients move past base stations, fetch fixed-length chunks at bitrates
//! picked by a cache-aware utility scan, and pull misses over the backhaul
//! from the origin. Edge caches are maintained by a retention-based
//! heuristic or one of the LRU, LFU, one-slot-lookahead and fixed
//! baselines.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cli;
pub mod error;
pub mod metrics;
pub mod model;
pub mod radio;
pub mod scheduler;
pub mod workload;

pub use error::{Error, Result};
