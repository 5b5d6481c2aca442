use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EdgeId, Graph, NodeId, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDecl {
    #[serde(rename = "type")]
    pub rel_type: String,
    pub src: String,
    pub dst: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyDecl {
    pub class: String,
    pub name: String,
    pub kind: ValueKind,
    #[serde(default)]
    pub required: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum OntologyError {
    #[error("relation {rel_type} refers to undeclared class {class}")]
    UndeclaredClass { rel_type: String, class: String },
    #[error("property {class}.{name} is declared twice")]
    DuplicateProperty { class: String, name: String },
    #[error("property {class}.{name} belongs to an undeclared class")]
    PropertyOnUnknownClass { class: String, name: String },
    #[error("ontology json: {0}")]
    Json(String),
}

/// Semantic model the knowledge graph must conform to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ontology {
    classes: BTreeSet<String>,
    relations: Vec<RelationDecl>,
    properties: Vec<PropertyDecl>,
}

#[derive(Deserialize)]
struct RawOntology {
    classes: Vec<String>,
    #[serde(default)]
    relations: Vec<RelationDecl>,
    #[serde(default)]
    properties: Vec<PropertyDecl>,
}

impl Ontology {
    pub fn new(
        classes: impl IntoIterator<Item = impl Into<String>>,
        relations: Vec<RelationDecl>,
        properties: Vec<PropertyDecl>,
    ) -> Result<Self, OntologyError> {
        let classes: BTreeSet<String> = classes.into_iter().map(Into::into).collect();
        for rel in &relations {
            for class in [&rel.src, &rel.dst] {
                if !classes.contains(class) {
                    return Err(OntologyError::UndeclaredClass {
                        rel_type: rel.rel_type.clone(),
                        class: class.clone(),
                    });
                }
            }
        }
        let mut seen = HashSet::new();
        for prop in &properties {
            if !classes.contains(&prop.class) {
                return Err(OntologyError::PropertyOnUnknownClass {
                    class: prop.class.clone(),
                    name: prop.name.clone(),
                });
            }
            if !seen.insert((prop.class.as_str(), prop.name.as_str())) {
                return Err(OntologyError::DuplicateProperty {
                    class: prop.class.clone(),
                    name: prop.name.clone(),
                });
            }
        }
        Ok(Ontology {
            classes,
            relations,
            properties,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, OntologyError> {
        let raw: RawOntology =
            serde_json::from_str(text).map_err(|e| OntologyError::Json(e.to_string()))?;
        Ontology::new(raw.classes, raw.relations, raw.properties)
    }

    pub fn classes(&self) -> &BTreeSet<String> {
        &self.classes
    }

    pub fn relations(&self) -> &[RelationDecl] {
        &self.relations
    }

    pub fn properties(&self) -> &[PropertyDecl] {
        &self.properties
    }

    pub fn properties_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a PropertyDecl> {
        self.properties.iter().filter(move |p| p.class == class)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ViolationKind {
    UnknownClass,
    DomainMismatch,
    RangeMismatch,
    MissingRequiredProp,
    WrongPropKind,
}

/// What a violation is about. Node subjects sort before edge subjects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Subject {
    Node(NodeId),
    Edge(EdgeId),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Node(id) => write!(f, "node {id}"),
            Subject::Edge(id) => write!(f, "edge {id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: Subject,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} on {}: {}", self.kind, self.subject, self.detail)
    }
}

/// Checks every node and edge of `graph` against `ontology`.
///
/// Each label of a node is checked on its own. An edge conforms when some
/// declared relation of the same type has its source class among the source
/// node's labels and its destination class among the destination node's
/// labels. Undeclared relation types are reported as `UnknownClass`.
pub fn validate(graph: &Graph, ontology: &Ontology) -> Vec<Violation> {
    let mut out = Vec::new();
    for node in graph.nodes() {
        let subject = Subject::Node(node.id);
        for label in &node.labels {
            if !ontology.classes.contains(label) {
                out.push(Violation {
                    kind: ViolationKind::UnknownClass,
                    subject,
                    detail: format!("label {label} is not a declared class"),
                });
                continue;
            }
            for decl in ontology.properties_of(label) {
                match node.props.get(&decl.name) {
                    None if decl.required => out.push(Violation {
                        kind: ViolationKind::MissingRequiredProp,
                        subject,
                        detail: format!("{label} requires property {}", decl.name),
                    }),
                    Some(value) if value.kind() != decl.kind => out.push(Violation {
                        kind: ViolationKind::WrongPropKind,
                        subject,
                        detail: format!(
                            "{label}.{} should be {} but is {}",
                            decl.name,
                            decl.kind,
                            value.kind()
                        ),
                    }),
                    _ => {}
                }
            }
        }
    }
    for edge in graph.edges() {
        let subject = Subject::Edge(edge.id);
        let src = &graph.nodes()[edge.src.0];
        let dst = &graph.nodes()[edge.dst.0];
        let decls: Vec<&RelationDecl> = ontology
            .relations
            .iter()
            .filter(|r| r.rel_type == edge.rel_type)
            .collect();
        if decls.is_empty() {
            out.push(Violation {
                kind: ViolationKind::UnknownClass,
                subject,
                detail: format!("relation type {} is not declared", edge.rel_type),
            });
            continue;
        }
        let domain_ok: Vec<&&RelationDecl> =
            decls.iter().filter(|r| src.has_label(&r.src)).collect();
        if domain_ok.is_empty() {
            out.push(Violation {
                kind: ViolationKind::DomainMismatch,
                subject,
                detail: format!(
                    "{} source node {} has labels {:?}, expected {}",
                    edge.rel_type,
                    src.id,
                    src.labels,
                    decls.iter().map(|r| r.src.as_str()).collect::<Vec<_>>().join(" or ")
                ),
            });
        } else if !domain_ok.iter().any(|r| dst.has_label(&r.dst)) {
            out.push(Violation {
                kind: ViolationKind::RangeMismatch,
                subject,
                detail: format!(
                    "{} target node {} has labels {:?}, expected {}",
                    edge.rel_type,
                    dst.id,
                    dst.labels,
                    domain_ok.iter().map(|r| r.dst.as_str()).collect::<Vec<_>>().join(" or ")
                ),
            });
        }
    }
    out
}
