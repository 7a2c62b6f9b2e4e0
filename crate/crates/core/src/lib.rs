//! Spanning-forest maintenance by token random walks.
//!
//! Every tree of the forest owns exactly one token. Tokens walk inside their
//! tree; two tokens sitting on the two ends of a non-tree edge merge their
//! trees, and a vertex that loses the edge leading to its token regenerates
//! one. The protocol is a set of four local relabeling rules over vertex
//! labels (`T`/`N`) and per-endpoint edge labels (`∅`/`1`/`2`).
//!
//! * [`graph`]: dynamic graph with port labels and a topology event log.
//! * [`protocol`]: the rules, token bookkeeping, the scheduler and the
//!   invariant checker.
//! * [`walk`]: uniform and non-backtracking walk policies.
//! * [`analysis`]: stationary law, fusion probability, expected fusion time
//!   and an exact first-meeting oracle.
//! * [`experiments`]: scenario generators, meeting-time measurement, visit
//!   traces, figure tables and the churn driver.
//!
//! All randomness flows from one 64-bit seed, see [`seed`].

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod protocol;
pub mod seed;
pub mod stats;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{DynamicGraph, PortLabel, VertexId, VertexLabel};
pub use protocol::{Rule, World};
pub use tree::{BridgeSet, Tree};
pub use walk::WalkPolicy;
