//! Analysis toolkit for multi-profile social networks: networks in which one
//! account manages several profiles, friendships connect profiles, and the
//! profile→account map induces a second, account-level network.
//!
//! The crate is organised around that two-level structure:
//!
//! - [`graph`] — the in-memory network, the account-level projection, and the
//!   family (same-household) pair structure.
//! - [`ingest`] — TSV loading/writing, validation, and a seeded synthetic
//!   network generator.
//! - [`netstats`] — degree statistics, power-law fits, Gini, clustering,
//!   connected components, and path lengths at either level.
//! - [`homophily`] — assortativity of profile attributes across friendship
//!   edges and within households, plus their ratio.
//! - [`spectral`] — a rank-k eigenbasis of the friendship adjacency operator
//!   and the diagonality test against the family operator.
//! - [`familytie`] — pairwise features, logistic regression, and AUC
//!   evaluation for predicting whether two profiles share an account.
//!
//! Heavy inner loops run on a rayon pool when the `parallel` feature
//! (default) is enabled, and fall back to sequential execution otherwise.
//! Either way results are bitwise identical: reductions in [`exec`] use fixed
//! evaluation orders that do not depend on the number of worker threads.

pub mod error;
pub mod exec;
pub mod familytie;
pub mod graph;
pub mod homophily;
pub mod ingest;
pub mod netstats;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{AccountGraph, AccountId, MultiProfileNetwork, ProfileId, ProfileMeta};

/// Version of the on-disk TSV/JSON formats emitted by this crate.
pub const FORMAT_VERSION: &str = "1";
