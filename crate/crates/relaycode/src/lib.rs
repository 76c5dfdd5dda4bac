//! Low-latency streaming erasure codes for multi-hop relay networks.
//!
//! This crate implements a family of systematic streaming codes for chains
//! of relays with per-link erasure budgets, together with the machinery to
//! exercise them: finite-field arithmetic, maximum-distance-separable
//! generator matrices, diagonal interleaving, relay state machines,
//! channel models, closed-form rate/loss analysis, and a deterministic
//! simulation harness.
//!
//! The headline scheme lets every relay re-encode symbol by symbol as
//! information arrives, instead of waiting to decode whole blocks, which
//! cuts the end-to-end decoding delay below what per-hop block decoding
//! can achieve at the same rate. Two baselines are included for
//! comparison: decode-and-forward with a separate block code per hop, and
//! a single end-to-end code with verbatim forwarding.

pub mod analysis;
pub mod channel;
mod error;
pub mod field;
pub mod mds;
pub mod relay;
pub mod sim;
pub mod stream;

pub use error::Error;
