//! Merging graph-query results with keyword results into one ranked,
//! deduplicated list.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Kg,
    Keyword,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Features {
    pub structural: u8,
    pub text_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proximity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedResult {
    pub entity_ref: NodeId,
    pub score: f64,
    pub source: Source,
    pub features: Features,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MergePolicy {
    pub w_struct: f64,
    pub w_text: f64,
    pub w_prox: f64,
    pub confidence_floor: f64,
}

impl Default for MergePolicy {
    fn default() -> Self {
        MergePolicy {
            w_struct: 0.6,
            w_text: 0.3,
            w_prox: 0.1,
            confidence_floor: 0.5,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RankError {
    #[error("invalid merge policy: {0}")]
    InvalidPolicy(String),
}

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

impl MergePolicy {
    pub fn validate(&self) -> Result<(), RankError> {
        let weights = [self.w_struct, self.w_text, self.w_prox];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(RankError::InvalidPolicy("weights must be finite and non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(RankError::InvalidPolicy(format!("weights sum to {sum}, expected 1")));
        }
        if !(0.0..=1.0).contains(&self.confidence_floor) {
            return Err(RankError::InvalidPolicy("confidence floor must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Min-max normalization into [0, 1]. A single score, or all-equal scores,
/// normalize to 1.
pub fn normalize_text_scores(scores: &[f64]) -> Vec<f64> {
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .map(|&s| if max > min { (s - min) / (max - min) } else { 1.0 })
        .collect()
}

/// Half score at 10 km.
pub fn proximity_feature(d_km: f64) -> f64 {
    1.0 / (1.0 + d_km / 10.0)
}

/// A graph-path hit in query order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KgCandidate {
    pub entity_ref: NodeId,
    pub distance_km: Option<f64>,
}

/// A keyword-path hit in keyword rank order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeywordCandidate {
    pub entity_ref: NodeId,
    pub bm25: f64,
    pub distance_km: Option<f64>,
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

struct Entry {
    features: Features,
    in_kg: bool,
    in_kw: bool,
}

/// Merges both result lists. Each entity appears once, keeping the maximum
/// of each feature across its occurrences.
///
/// At or above the confidence floor the score is the weighted feature sum
/// and results are sorted by score desc, entity asc. Below it the structural
/// feature is zeroed and only the text weight applies: keyword hits keep
/// their keyword order and graph-only entities follow in graph order.
pub fn merge(
    confidence: f64,
    kg: &[KgCandidate],
    kw: &[KeywordCandidate],
    policy: &MergePolicy,
) -> Result<Vec<RankedResult>, RankError> {
    policy.validate()?;
    let text = normalize_text_scores(&kw.iter().map(|c| c.bm25).collect::<Vec<_>>());
    let trusted = confidence >= policy.confidence_floor;

    let mut entries: BTreeMap<NodeId, Entry> = BTreeMap::new();
    let mut kw_order = Vec::new();
    let mut kg_order = Vec::new();
    for (c, &t) in kw.iter().zip(&text) {
        let features = Features {
            structural: 0,
            text_norm: t,
            proximity: c.distance_km.map(proximity_feature),
        };
        match entries.get_mut(&c.entity_ref) {
            Some(e) => {
                e.features.text_norm = e.features.text_norm.max(features.text_norm);
                e.features.proximity = max_opt(e.features.proximity, features.proximity);
            }
            None => {
                kw_order.push(c.entity_ref);
                entries.insert(c.entity_ref, Entry { features, in_kg: false, in_kw: true });
            }
        }
    }
    for c in kg {
        let proximity = c.distance_km.map(proximity_feature);
        let structural = u8::from(trusted);
        match entries.get_mut(&c.entity_ref) {
            Some(e) => {
                if !e.in_kg {
                    kg_order.push(c.entity_ref);
                }
                e.in_kg = true;
                e.features.structural = e.features.structural.max(structural);
                e.features.proximity = max_opt(e.features.proximity, proximity);
            }
            None => {
                kg_order.push(c.entity_ref);
                entries.insert(
                    c.entity_ref,
                    Entry {
                        features: Features { structural, text_norm: 0.0, proximity },
                        in_kg: true,
                        in_kw: false,
                    },
                );
            }
        }
    }

    let result = |id: NodeId, e: &Entry| {
        let f = e.features;
        let score = if trusted {
            policy.w_struct * f.structural as f64
                + policy.w_text * f.text_norm
                + policy.w_prox * f.proximity.unwrap_or(0.0)
        } else {
            policy.w_text * f.text_norm
        };
        let source = match (e.in_kg, e.in_kw) {
            (true, true) => Source::Both,
            (true, false) => Source::Kg,
            _ => Source::Keyword,
        };
        RankedResult { entity_ref: id, score, source, features: f }
    };

    if trusted {
        let mut out: Vec<RankedResult> = entries.iter().map(|(&id, e)| result(id, e)).collect();
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.entity_ref.cmp(&b.entity_ref)));
        Ok(out)
    } else {
        Ok(kw_order
            .iter()
            .chain(kg_order.iter().filter(|id| !entries[id].in_kw))
            .map(|id| result(*id, &entries[id]))
            .collect())
    }
}
