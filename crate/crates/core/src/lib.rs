//! Knowledge-graph search for finding doctors and locations.
//!
//! Questions are interpreted against a library of query templates, run as
//! graph queries over a provider/location knowledge graph, and merged with a
//! BM25 keyword baseline so that the combined result set never loses a hit
//! from either path.

pub mod config;
pub mod eval;
pub mod gql;
pub mod graph;
pub mod ingest;
pub mod keyword;
pub mod nl;
pub mod pipeline;
pub mod rank;
pub mod synth;
pub mod text;

pub use graph::{Graph, GraphError, NodeId, Ontology};
