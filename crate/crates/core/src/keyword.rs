//! Keyword baseline: one flat text document per provider and location, an
//! inverted index, and BM25 ranking.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Direction, Graph, Node, NodeId};
use crate::ingest::{HAS_DEPARTMENT, HAS_SPECIALTY, LOCATION, PROVIDER, WORKS_AT};
use crate::text::{correct_all, normalize, Vocabulary};

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;

/// Display names for the language codes used in provider records.
const LANGUAGE_NAMES: &[(&str, &str)] = &[
    ("ar", "Arabic"),
    ("en", "English"),
    ("es", "Spanish"),
    ("fa", "Farsi"),
    ("fr", "French"),
    ("hi", "Hindi"),
    ("hy", "Armenian"),
    ("ja", "Japanese"),
    ("ko", "Korean"),
    ("ru", "Russian"),
    ("tl", "Tagalog"),
    ("vi", "Vietnamese"),
    ("zh", "Chinese"),
];

/// Language name for a code; unknown codes are returned as given.
pub fn language_name(code: &str) -> &str {
    LANGUAGE_NAMES
        .iter()
        .find(|(c, _)| *c == code)
        .map_or(code, |(_, name)| name)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Document {
    pub doc_id: usize,
    pub entity_ref: NodeId,
    pub text: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum KeywordError {
    #[error("unknown document {doc_id} (index has {n})")]
    UnknownDoc { doc_id: usize, n: usize },
    #[error("index snapshot: {0}")]
    Snapshot(String),
}

fn text_prop<'a>(node: &'a Node, name: &str) -> Option<&'a str> {
    node.prop(name).and_then(|v| v.as_text())
}

fn push_unique(parts: &mut Vec<String>, seen: &mut BTreeSet<String>, s: &str) {
    if seen.insert(s.to_string()) {
        parts.push(s.to_string());
    }
}

fn neighbor_names<'g>(graph: &'g Graph, id: NodeId, rel: &str) -> Vec<&'g Node> {
    graph
        .neighbors(id, Some(rel), Direction::Out)
        .map(|n| n.into_iter().map(|(_, node)| node).collect())
        .unwrap_or_default()
}

/// Text for one entity. A provider contributes its name, the cities and
/// departments of the locations it works at, its specialty names and its
/// language names; a location its name, city and department names.
fn entity_text(graph: &Graph, node: &Node) -> String {
    let mut parts = Vec::new();
    let mut seen = BTreeSet::new();
    if let Some(name) = text_prop(node, "name") {
        parts.push(name.to_string());
    }
    if node.has_label(PROVIDER) {
        let locations = neighbor_names(graph, node.id, WORKS_AT);
        for l in &locations {
            if let Some(city) = text_prop(l, "city") {
                push_unique(&mut parts, &mut seen, city);
            }
        }
        for s in neighbor_names(graph, node.id, HAS_SPECIALTY) {
            if let Some(name) = text_prop(s, "name") {
                push_unique(&mut parts, &mut seen, name);
            }
        }
        for l in &locations {
            for d in neighbor_names(graph, l.id, HAS_DEPARTMENT) {
                if let Some(name) = text_prop(d, "name") {
                    push_unique(&mut parts, &mut seen, name);
                }
            }
        }
        if let Some(langs) = node.prop("languages").and_then(|v| v.as_text_list()) {
            for code in langs {
                push_unique(&mut parts, &mut seen, language_name(code));
            }
        }
    } else {
        if let Some(city) = text_prop(node, "city") {
            parts.push(city.to_string());
        }
        for d in neighbor_names(graph, node.id, HAS_DEPARTMENT) {
            if let Some(name) = text_prop(d, "name") {
                push_unique(&mut parts, &mut seen, name);
            }
        }
    }
    parts.join(" ")
}

/// One document per Provider and Location node, in ascending node id order,
/// so document order and entity order agree.
pub fn documents(graph: &Graph) -> Vec<Document> {
    let mut ids: Vec<NodeId> = graph
        .node_ids_with_label(PROVIDER)
        .iter()
        .chain(graph.node_ids_with_label(LOCATION))
        .copied()
        .collect();
    ids.sort_unstable();
    ids.into_iter()
        .enumerate()
        .map(|(doc_id, id)| Document {
            doc_id,
            entity_ref: id,
            text: entity_text(graph, graph.node(id).expect("label index holds valid ids")),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    /// term -> (doc_id, term frequency), sorted by doc_id.
    pub postings: BTreeMap<String, Vec<(usize, u32)>>,
    pub doc_lengths: Vec<u32>,
    #[serde(rename = "N")]
    pub n: usize,
    pub avgdl: f64,
    /// Graph node behind each document.
    pub entity_refs: Vec<NodeId>,
}

impl InvertedIndex {
    pub fn from_documents(docs: &[Document]) -> Self {
        let mut postings: BTreeMap<String, Vec<(usize, u32)>> = BTreeMap::new();
        let mut doc_lengths = Vec::with_capacity(docs.len());
        for (doc_id, doc) in docs.iter().enumerate() {
            let tokens = normalize(&doc.text);
            doc_lengths.push(tokens.len() as u32);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in tokens {
                *tf.entry(t).or_default() += 1;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push((doc_id, count));
            }
        }
        let n = docs.len();
        let avgdl = if n == 0 {
            0.0
        } else {
            doc_lengths.iter().map(|&l| l as f64).sum::<f64>() / n as f64
        };
        InvertedIndex {
            postings,
            doc_lengths,
            n,
            avgdl,
            entity_refs: docs.iter().map(|d| d.entity_ref).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, KeywordError> {
        serde_json::from_str(text).map_err(|e| KeywordError::Snapshot(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("index serializes")
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn idf(&self, term: &str) -> f64 {
        let (n, df) = (self.n as f64, self.df(term) as f64);
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    fn tf(&self, term: &str, doc_id: usize) -> u32 {
        self.postings
            .get(term)
            .and_then(|p| {
                p.binary_search_by_key(&doc_id, |&(d, _)| d)
                    .ok()
                    .map(|i| p[i].1)
            })
            .unwrap_or(0)
    }
}

pub fn build_index(graph: &Graph) -> InvertedIndex {
    InvertedIndex::from_documents(&documents(graph))
}

/// BM25 score of one document, summed over query tokens (repeated tokens
/// count again).
pub fn bm25(query_tokens: &[String], doc_id: usize, index: &InvertedIndex) -> Result<f64, KeywordError> {
    if doc_id >= index.n {
        return Err(KeywordError::UnknownDoc { doc_id, n: index.n });
    }
    let dl = index.doc_lengths[doc_id] as f64;
    let norm = if index.avgdl > 0.0 { dl / index.avgdl } else { 0.0 };
    let mut score = 0.0;
    for term in query_tokens {
        let tf = index.tf(term, doc_id) as f64;
        if tf == 0.0 {
            continue;
        }
        score += index.idf(term) * tf * (K1 + 1.0) / (tf + K1 * (1.0 - B + B * norm));
    }
    Ok(score)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeywordHit {
    pub doc_id: usize,
    pub entity_ref: NodeId,
    pub score: f64,
}

/// Scores every document sharing a term with the query and keeps the top
/// `k` with positive score, by score desc then doc_id asc.
pub fn search_tokens(tokens: &[String], k: usize, index: &InvertedIndex) -> Vec<KeywordHit> {
    let candidates: BTreeSet<usize> = tokens
        .iter()
        .filter_map(|t| index.postings.get(t))
        .flat_map(|p| p.iter().map(|&(d, _)| d))
        .collect();
    let mut hits: Vec<KeywordHit> = candidates
        .into_iter()
        .map(|doc_id| KeywordHit {
            doc_id,
            entity_ref: index.entity_refs[doc_id],
            score: bm25(tokens, doc_id, index).expect("candidate ids come from postings"),
        })
        .filter(|h| h.score > 0.0)
        .collect();
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.doc_id.cmp(&b.doc_id)));
    hits.truncate(k);
    hits
}

/// Normalizes and spell-corrects `query`, then ranks documents.
pub fn search(query: &str, k: usize, index: &InvertedIndex, vocabulary: &Vocabulary) -> Vec<KeywordHit> {
    search_tokens(&correct_all(&normalize(query), vocabulary), k, index)
}
