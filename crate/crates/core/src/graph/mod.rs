//! In-memory property graph with a label index and an ontology layer.
//!
//! Graphs are built append-only and then frozen. A frozen graph rejects any
//! further mutation and can be shared freely between threads.

mod ontology;
mod value;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ontology::{
    validate, Ontology, OntologyError, PropertyDecl, RelationDecl, Subject, Violation,
    ViolationKind,
};
pub use value::{
    GeoPoint, HoursOfOperation, Interval, PropertyValue, ValueKind, Weekday, MINUTES_PER_DAY,
};

pub type Props = BTreeMap<String, PropertyValue>;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("a node needs at least one label")]
    EmptyLabels,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("graph is frozen")]
    FrozenGraph,
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub labels: BTreeSet<String>,
    pub props: Props,
}

impl Node {
    pub fn has_label(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn prop(&self, name: &str) -> Option<&PropertyValue> {
        self.props.get(name)
    }

    /// The smallest label, used wherever a single kind name is needed.
    pub fn primary_label(&self) -> &str {
        self.labels.iter().next().map(String::as_str).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub rel_type: String,
    pub src: NodeId,
    pub dst: NodeId,
    pub props: Props,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
    Both,
}

/// Nodes and edges exactly as they appear in the JSON snapshot.
#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

#[derive(Debug, Clone, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<EdgeId>>,
    incoming: Vec<Vec<EdgeId>>,
    by_label: BTreeMap<String, Vec<NodeId>>,
    frozen: bool,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(
        &mut self,
        labels: impl IntoIterator<Item = impl Into<String>>,
        props: Props,
    ) -> Result<NodeId, GraphError> {
        if self.frozen {
            return Err(GraphError::FrozenGraph);
        }
        let labels: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(GraphError::EmptyLabels);
        }
        for value in props.values() {
            value.check()?;
        }
        let id = NodeId(self.nodes.len());
        for label in &labels {
            self.by_label.entry(label.clone()).or_default().push(id);
        }
        self.nodes.push(Node { id, labels, props });
        self.outgoing.push(Vec::new());
        self.incoming.push(Vec::new());
        Ok(id)
    }

    pub fn add_edge(
        &mut self,
        rel_type: impl Into<String>,
        src: NodeId,
        dst: NodeId,
        props: Props,
    ) -> Result<EdgeId, GraphError> {
        if self.frozen {
            return Err(GraphError::FrozenGraph);
        }
        for endpoint in [src, dst] {
            if endpoint.0 >= self.nodes.len() {
                return Err(GraphError::UnknownNode(endpoint));
            }
        }
        for value in props.values() {
            value.check()?;
        }
        let id = EdgeId(self.edges.len());
        self.edges.push(Edge {
            id,
            rel_type: rel_type.into(),
            src,
            dst,
            props,
        });
        self.outgoing[src.0].push(id);
        self.incoming[dst.0].push(id);
        Ok(id)
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(id.0)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Nodes carrying `label`, ascending by id.
    pub fn nodes_with_label(&self, label: &str) -> Vec<&Node> {
        self.node_ids_with_label(label)
            .iter()
            .map(|id| &self.nodes[id.0])
            .collect()
    }

    pub fn node_ids_with_label(&self, label: &str) -> &[NodeId] {
        self.by_label.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Adjacent (edge, node) pairs ordered by edge id. With `Direction::Both`
    /// a self-loop is reported once per direction, so the `Out` and `In`
    /// lists always partition the `Both` list.
    pub fn neighbors(
        &self,
        id: NodeId,
        rel_type: Option<&str>,
        direction: Direction,
    ) -> Result<Vec<(&Edge, &Node)>, GraphError> {
        if id.0 >= self.nodes.len() {
            return Err(GraphError::UnknownNode(id));
        }
        let matches = |e: &Edge| rel_type.is_none_or(|t| e.rel_type == t);
        let out = self.outgoing[id.0]
            .iter()
            .map(|e| &self.edges[e.0])
            .filter(|e| matches(e))
            .map(|e| (e, &self.nodes[e.dst.0]));
        let inc = self.incoming[id.0]
            .iter()
            .map(|e| &self.edges[e.0])
            .filter(|e| matches(e))
            .map(|e| (e, &self.nodes[e.src.0]));
        let mut result: Vec<(&Edge, &Node)> = match direction {
            Direction::Out => out.collect(),
            Direction::In => inc.collect(),
            Direction::Both => out.chain(inc).collect(),
        };
        result.sort_by_key(|(e, _)| e.id);
        Ok(result)
    }

    /// Neighbor ids only, for the matcher's inner loop.
    pub(crate) fn adjacent_ids<'a>(
        &'a self,
        id: NodeId,
        rel_type: Option<&'a str>,
        outgoing: bool,
    ) -> impl Iterator<Item = NodeId> + 'a {
        let list = if outgoing {
            &self.outgoing[id.0]
        } else {
            &self.incoming[id.0]
        };
        list.iter().filter_map(move |e| {
            let edge = &self.edges[e.0];
            if rel_type.is_none_or(|t| edge.rel_type == t) {
                Some(if outgoing { edge.dst } else { edge.src })
            } else {
                None
            }
        })
    }

    pub fn to_snapshot_json(&self) -> String {
        let snapshot = Snapshot {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&snapshot).expect("graph snapshot serializes")
    }

    /// Rebuilds a graph from its snapshot. The result is frozen.
    pub fn from_snapshot_json(text: &str) -> Result<Graph, GraphError> {
        let snapshot: Snapshot =
            serde_json::from_str(text).map_err(|e| GraphError::Snapshot(e.to_string()))?;
        let mut graph = Graph::new();
        for node in snapshot.nodes {
            if node.id.0 != graph.node_count() {
                return Err(GraphError::Snapshot(format!(
                    "node ids must be dense, found {} at position {}",
                    node.id,
                    graph.node_count()
                )));
            }
            graph.add_node(node.labels, node.props)?;
        }
        for edge in snapshot.edges {
            if edge.id.0 != graph.edge_count() {
                return Err(GraphError::Snapshot(format!(
                    "edge ids must be dense, found {} at position {}",
                    edge.id,
                    graph.edge_count()
                )));
            }
            graph.add_edge(edge.rel_type, edge.src, edge.dst, edge.props)?;
        }
        graph.freeze();
        Ok(graph)
    }
}
