//! Coverage and precision evaluation of the keyword path against the hybrid
//! pipeline.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::pipeline::{Engine, ResultItem, SearchRequest};

/// Coordinates supplied with every evaluation query, so "near me" questions
/// can be answered.
pub const EVAL_LAT: f64 = 34.05;
pub const EVAL_LON: f64 = -118.24;

const PRECISION_DEPTH: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub n_queries: usize,
    pub zero_result_keyword: usize,
    pub zero_result_hybrid: usize,
    pub gained: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_at_5_keyword: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_at_5_hybrid: Option<f64>,
}

impl EvalReport {
    /// Gained coverage meets the threshold and, with labels, the hybrid
    /// precision is at least the keyword precision.
    pub fn passes(&self, min_gained: usize) -> bool {
        let precision_ok = match (self.precision_at_5_keyword, self.precision_at_5_hybrid) {
            (Some(kw), Some(hy)) => hy >= kw,
            _ => true,
        };
        self.n_queries > 0 && self.gained >= min_gained && precision_ok
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("labels line {line}: {reason}")]
    BadLabel { line: usize, reason: String },
    #[error("query {query:?}: {reason}")]
    Query { query: String, reason: String },
}

/// One query per non-blank line.
pub fn parse_queries(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

pub type Labels = BTreeMap<String, BTreeSet<String>>;

/// `query<TAB>id[,id...]` per line.
pub fn parse_labels(text: &str) -> Result<Labels, EvalError> {
    let mut labels = Labels::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| EvalError::BadLabel {
            line: i + 1,
            reason: reason.to_string(),
        };
        let (query, ids) = line.split_once('\t').ok_or_else(|| bad("missing tab"))?;
        let ids: BTreeSet<String> = ids
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        if query.trim().is_empty() || ids.is_empty() {
            return Err(bad("empty query or id list"));
        }
        labels.insert(query.trim().to_string(), ids);
    }
    Ok(labels)
}

fn precision_at_5(results: &[ResultItem], relevant: &BTreeSet<String>) -> f64 {
    let hits = results
        .iter()
        .take(PRECISION_DEPTH)
        .filter(|r| relevant.contains(&r.entity_id))
        .count();
    hits as f64 / PRECISION_DEPTH as f64
}

/// Runs every query through the keyword path and the hybrid pipeline with
/// the engine's default k.
pub fn evaluate(engine: &Engine, queries: &[String], labels: Option<&Labels>) -> Result<EvalReport, EvalError> {
    let k = engine.default_k();
    let mut report = EvalReport {
        n_queries: queries.len(),
        zero_result_keyword: 0,
        zero_result_hybrid: 0,
        gained: 0,
        precision_at_5_keyword: None,
        precision_at_5_hybrid: None,
    };
    let mut p_kw = Vec::new();
    let mut p_hy = Vec::new();
    for q in queries {
        let keyword = engine.keyword_search(q, k);
        let hybrid = engine
            .search(&SearchRequest {
                q: q.clone(),
                lat: Some(EVAL_LAT),
                lon: Some(EVAL_LON),
                city: None,
                k: Some(k),
            })
            .map_err(|e| EvalError::Query {
                query: q.clone(),
                reason: e.to_string(),
            })?
            .results;
        report.zero_result_keyword += usize::from(keyword.is_empty());
        report.zero_result_hybrid += usize::from(hybrid.is_empty());
        report.gained += usize::from(keyword.is_empty() && !hybrid.is_empty());
        if let Some(relevant) = labels.and_then(|l| l.get(q)) {
            p_kw.push(precision_at_5(&keyword, relevant));
            p_hy.push(precision_at_5(&hybrid, relevant));
        }
    }
    if labels.is_some() {
        let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        report.precision_at_5_keyword = Some(mean(&p_kw));
        report.precision_at_5_hybrid = Some(mean(&p_hy));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queries_and_labels_parse() {
        assert_eq!(parse_queries("a\n\n  b \n"), vec!["a", "b"]);
        assert!(parse_queries("").is_empty());
        let l = parse_labels("kids doctor\tprov-1, prov-2\n\nheart\tprov-3\n").unwrap();
        assert_eq!(l["kids doctor"].len(), 2);
        assert_eq!(
            parse_labels("x\n"),
            Err(EvalError::BadLabel { line: 1, reason: "missing tab".into() })
        );
        assert!(parse_labels("x\t ,\n").is_err());
    }

    #[test]
    fn pass_rule() {
        let mut r = EvalReport {
            n_queries: 10,
            zero_result_keyword: 5,
            zero_result_hybrid: 1,
            gained: 4,
            precision_at_5_keyword: Some(0.2),
            precision_at_5_hybrid: Some(0.2),
        };
        assert!(r.passes(4));
        assert!(!r.passes(5));
        r.precision_at_5_hybrid = Some(0.19);
        assert!(!r.passes(4));
        r.n_queries = 0;
        r.precision_at_5_hybrid = None;
        assert!(!r.passes(0));
    }
}
