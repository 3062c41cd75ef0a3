//! Instantly decodable network coding (IDNC) over broadcast erasure channels.
//!
//! The sender tracks which packets each receiver still wants, builds the IDNC
//! graph, and picks a clique whose packets are XORed into one transmission.
//! Two greedy policies are provided: one that keeps the *maximum* decoding
//! delay across receivers low (multilayer, delay-aware), and a baseline that
//! targets the *sum* of decoding delays. Exhaustive oracles over all maximal
//! cliques back both for small instances.
//!
//! - [`state`]: feedback matrix, Has/Wants sets, packet classification
//! - [`graph`]: IDNC graph, neighbourhood restriction, delay layers, cliques
//! - [`policies`]: vertex weights, selection policies, objective functions
//! - [`sim`]: frame-level Monte-Carlo simulation
//! - [`cli`]: the `idnc` command-line front end

mod bits;
pub mod cli;
pub mod error;
pub mod format;
pub mod graph;
pub mod policies;
pub mod sim;
pub mod state;

pub use error::{Error, Result};
pub use graph::{Clique, IdncGraph, Subgraph, Vertex, VertexId};
pub use policies::{Objective, PolicyKind};
pub use sim::{Deadline, ExperimentStats, FrameResult, SimConfig};
pub use state::{Classification, FeedbackMatrix, FrameState, PacketId, ReceiverId};
