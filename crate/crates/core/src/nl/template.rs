use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lexicon::{extract, Lexicon, SlotCandidate, SlotType, NEAR_ME};
use crate::gql::{self, Expr, Literal, ParseError};
use crate::text::{correct_all, is_stopword, normalize, Vocabulary};

/// A pre-built graph query with `{PLACEHOLDER}` slots.
///
/// Placeholders are slot type names (`{SPECIALTY}`, `{LANGUAGE}`, …), `{WINDOW}`
/// for the TEMPORAL slot, and the context fields `{CITY}`, `{LAT}`, `{LON}`
/// and `{K}`. `{CITY}` takes a GEO binding that names a city, falling back to
/// the caller's city when GEO is "near me".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub id: String,
    pub required_slots: BTreeSet<SlotType>,
    #[serde(default)]
    pub optional_slots: BTreeSet<SlotType>,
    #[serde(default)]
    pub priority: i32,
    pub query_pattern: String,
    /// Slots that must be bound to one specific canonical value.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub required_values: BTreeMap<SlotType, String>,
    /// Slots that must not be bound to the given canonical value.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub excluded_values: BTreeMap<SlotType, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placeholder {
    Slot(SlotType),
    City,
    Lat,
    Lon,
    K,
}

impl Placeholder {
    fn from_name(name: &str) -> Option<Placeholder> {
        Some(match name {
            "WINDOW" => Placeholder::Slot(SlotType::Temporal),
            "CITY" => Placeholder::City,
            "LAT" => Placeholder::Lat,
            "LON" => Placeholder::Lon,
            "K" => Placeholder::K,
            other => Placeholder::Slot(other.parse().ok()?),
        })
    }
}

/// `(byte range, placeholder name)` for every `{NAME}` in the pattern.
fn placeholders(pattern: &str) -> Vec<(std::ops::Range<usize>, &str)> {
    let mut out = Vec::new();
    let mut rest = 0;
    while let Some(open) = pattern[rest..].find('{') {
        let start = rest + open;
        let Some(close) = pattern[start..].find('}') else {
            break;
        };
        let end = start + close + 1;
        out.push((start..end, &pattern[start + 1..end - 1]));
        rest = end;
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum TemplateError {
    #[error("template {id}: unknown placeholder {{{name}}}")]
    UnknownPlaceholder { id: String, name: String },
    #[error("template {id}: placeholder {{{name}}} has no matching required or optional slot")]
    UnslottedPlaceholder { id: String, name: String },
    #[error("duplicate template id {0}")]
    DuplicateId(String),
    #[error("templates json: {0}")]
    Json(String),
}

impl Template {
    pub fn check(&self) -> Result<(), TemplateError> {
        for (_, name) in placeholders(&self.query_pattern) {
            match Placeholder::from_name(name) {
                None => {
                    return Err(TemplateError::UnknownPlaceholder {
                        id: self.id.clone(),
                        name: name.to_string(),
                    })
                }
                Some(Placeholder::Slot(t))
                    if !self.required_slots.contains(&t) && !self.optional_slots.contains(&t) =>
                {
                    return Err(TemplateError::UnslottedPlaceholder {
                        id: self.id.clone(),
                        name: name.to_string(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn accepts(&self, bindings: &BTreeMap<SlotType, &SlotCandidate>) -> bool {
        self.required_slots.iter().all(|t| bindings.contains_key(t))
            && self
                .required_values
                .iter()
                .all(|(t, v)| bindings.get(t).is_some_and(|c| &c.canonical_value == v))
            && self
                .excluded_values
                .iter()
                .all(|(t, v)| bindings.get(t).is_none_or(|c| &c.canonical_value != v))
    }
}

pub fn load_templates(text: &str) -> Result<Vec<Template>, TemplateError> {
    let templates: Vec<Template> =
        serde_json::from_str(text).map_err(|e| TemplateError::Json(e.to_string()))?;
    let mut ids = BTreeSet::new();
    for t in &templates {
        t.check()?;
        if !ids.insert(t.id.as_str()) {
            return Err(TemplateError::DuplicateId(t.id.clone()));
        }
    }
    Ok(templates)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interpretation {
    pub template_id: String,
    pub bindings: BTreeMap<SlotType, String>,
    pub confidence: f64,
    pub consumed_spans: Vec<(usize, usize)>,
}

/// Fraction of content (non-stopword) tokens covered by `spans`; 0 when the
/// question has no content tokens.
pub fn coverage_confidence(tokens: &[String], spans: &[(usize, usize)]) -> f64 {
    let content: Vec<usize> = (0..tokens.len()).filter(|&i| !is_stopword(&tokens[i])).collect();
    if content.is_empty() {
        return 0.0;
    }
    let covered = content
        .iter()
        .filter(|&&i| spans.iter().any(|&(s, e)| s <= i && i < e))
        .count();
    covered as f64 / content.len() as f64
}

/// Interprets already normalized and spell-corrected tokens.
pub fn interpret_tokens(tokens: &[String], templates: &[Template], lexicon: &Lexicon) -> Vec<Interpretation> {
    let candidates = extract(tokens, lexicon);
    let mut first_of_type: BTreeMap<SlotType, &SlotCandidate> = BTreeMap::new();
    for c in &candidates {
        first_of_type.entry(c.slot_type).or_insert(c);
    }
    let mut out: Vec<(i32, Interpretation)> = templates
        .iter()
        .filter(|t| t.accepts(&first_of_type))
        .map(|t| {
            let used: Vec<&SlotCandidate> = t
                .required_slots
                .iter()
                .chain(&t.optional_slots)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .filter_map(|ty| first_of_type.get(ty).copied())
                .collect();
            let mut spans: Vec<(usize, usize)> = used.iter().map(|c| c.span).collect();
            spans.sort_unstable();
            let interp = Interpretation {
                template_id: t.id.clone(),
                bindings: used
                    .iter()
                    .map(|c| (c.slot_type, c.canonical_value.clone()))
                    .collect(),
                confidence: coverage_confidence(tokens, &spans),
                consumed_spans: spans,
            };
            (t.priority, interp)
        })
        .collect();
    out.sort_by(|(pa, a), (pb, b)| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(pb.cmp(pa))
            .then_with(|| a.template_id.cmp(&b.template_id))
    });
    out.into_iter().map(|(_, i)| i).collect()
}

/// Normalizes, spell-corrects and interprets a question. Interpretations are
/// ranked by confidence, then template priority, then template id.
pub fn interpret(
    question: &str,
    templates: &[Template],
    lexicon: &Lexicon,
    vocabulary: &Vocabulary,
) -> Vec<Interpretation> {
    let tokens = correct_all(&normalize(question), vocabulary);
    interpret_tokens(&tokens, templates, lexicon)
}

/// Caller-supplied context used to fill location and size placeholders.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserContext {
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    pub city: Option<String>,
    pub k: Option<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum InstantiateError {
    #[error("missing context field {0}")]
    MissingContext(&'static str),
    #[error("missing slot {0}")]
    MissingSlot(SlotType),
    #[error("interpretation is for template {interp}, not {template}")]
    WrongTemplate { interp: String, template: String },
    #[error("instantiated query does not parse: {0}")]
    Invalid(ParseError),
}

fn quote(s: &str) -> String {
    Expr::Literal(Literal::Str(s.to_string())).to_string()
}

fn number(n: f64) -> String {
    Expr::Literal(Literal::Num(n)).to_string()
}

/// Fills the template's placeholders from the interpretation's bindings and
/// the user context. String values are emitted as escaped literals; the
/// result is checked to parse.
pub fn instantiate(
    interp: &Interpretation,
    template: &Template,
    context: &UserContext,
) -> Result<String, InstantiateError> {
    if interp.template_id != template.id {
        return Err(InstantiateError::WrongTemplate {
            interp: interp.template_id.clone(),
            template: template.id.clone(),
        });
    }
    let geo = interp.bindings.get(&SlotType::Geo).map(String::as_str);
    if geo == Some(NEAR_ME) {
        if context.lat.is_none() {
            return Err(InstantiateError::MissingContext("lat"));
        }
        if context.lon.is_none() {
            return Err(InstantiateError::MissingContext("lon"));
        }
    }
    let pattern = &template.query_pattern;
    let mut out = String::with_capacity(pattern.len());
    let mut last = 0;
    for (range, name) in placeholders(pattern) {
        out.push_str(&pattern[last..range.start]);
        last = range.end;
        let value = match Placeholder::from_name(name) {
            Some(Placeholder::Slot(t)) => quote(
                interp
                    .bindings
                    .get(&t)
                    .ok_or(InstantiateError::MissingSlot(t))?,
            ),
            Some(Placeholder::City) => match geo {
                Some(city) if city != NEAR_ME => quote(city),
                _ => quote(
                    context
                        .city
                        .as_deref()
                        .ok_or(InstantiateError::MissingContext("city"))?,
                ),
            },
            Some(Placeholder::Lat) => number(context.lat.ok_or(InstantiateError::MissingContext("lat"))?),
            Some(Placeholder::Lon) => number(context.lon.ok_or(InstantiateError::MissingContext("lon"))?),
            Some(Placeholder::K) => context.k.ok_or(InstantiateError::MissingContext("k"))?.to_string(),
            // Rejected by Template::check; leave untouched so parsing reports it.
            None => pattern[range].to_string(),
        };
        out.push_str(&value);
    }
    out.push_str(&pattern[last..]);
    gql::parse(&out).map_err(InstantiateError::Invalid)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const WEEKEND_QUERY: &str = "MATCH (p:Provider)-[:HAS_SPECIALTY]->(s:Specialty), (p)-[:WORKS_AT]->(l:Location) WHERE s.name = \"Pediatrics\" AND opens_during(l.hours, \"WEEKEND\") RETURN p, l ORDER BY distance(l.geo, point($lat, $lon)) ASC";

    fn templates() -> Vec<Template> {
        load_templates(r#"[
          {"id": "find_providers_by_specialty", "required_slots": ["SPECIALTY", "TEMPORAL", "GEO"],
           "priority": 10, "required_values": {"GEO": "NEAR_ME"},
           "query_pattern": "MATCH (p:Provider)-[:HAS_SPECIALTY]->(s:Specialty), (p)-[:WORKS_AT]->(l:Location) WHERE s.name = {SPECIALTY} AND opens_during(l.hours, {WINDOW}) RETURN p, l ORDER BY distance(l.geo, point($lat, $lon)) ASC"},
          {"id": "providers_by_specialty", "required_slots": ["SPECIALTY"], "priority": 1,
           "query_pattern": "MATCH (p:Provider)-[:HAS_SPECIALTY]->(s:Specialty) WHERE s.name = {SPECIALTY} RETURN p"},
          {"id": "specialty_in_city", "required_slots": ["SPECIALTY", "GEO"], "priority": 5,
           "excluded_values": {"GEO": "NEAR_ME"},
           "query_pattern": "MATCH (p:Provider)-[:HAS_SPECIALTY]->(s:Specialty), (p)-[:WORKS_AT]->(l:Location) WHERE s.name = {SPECIALTY} AND l.city = {CITY} RETURN p LIMIT {K}"},
          {"id": "all_locations", "required_slots": ["ENTITY_KIND"], "query_pattern": "MATCH (l:Location) RETURN l"}
        ]"#).unwrap()
    }

    fn lexicon() -> Lexicon {
        Lexicon::from_json(r#"[
            {"surface": "pediatrician", "slot_type": "SPECIALTY", "canonical": "Pediatrics"},
            {"surface": "weekend", "slot_type": "TEMPORAL", "canonical": "WEEKEND"},
            {"surface": "near me", "slot_type": "GEO", "canonical": "NEAR_ME"},
            {"surface": "pasadena", "slot_type": "GEO", "canonical": "Pasadena"},
            {"surface": "clinic", "slot_type": "ENTITY_KIND", "canonical": "Location"}
        ]"#).unwrap()
    }

    fn vocab() -> Vocabulary {
        let mut v = Vocabulary::new();
        lexicon().add_words_to(&mut v);
        v
    }

    #[test]
    fn weekend_question_interpretation_and_query() {
        let ranked = interpret(
            "What pediatricians are open on the weekend near me?",
            &templates(),
            &lexicon(),
            &vocab(),
        );
        let top = &ranked[0];
        assert_eq!(top.template_id, "find_providers_by_specialty");
        assert_eq!(top.bindings[&SlotType::Specialty], "Pediatrics");
        assert_eq!(top.bindings[&SlotType::Temporal], "WEEKEND");
        assert_eq!(top.bindings[&SlotType::Geo], "NEAR_ME");
        // content tokens: pediatricians, open, weekend, near
        assert_eq!(top.confidence, 0.75);
        let ctx = UserContext {
            lat: Some(34.05),
            lon: Some(-118.24),
            ..Default::default()
        };
        let text = instantiate(top, &templates()[0], &ctx).unwrap();
        assert_eq!(text, WEEKEND_QUERY);
        assert_eq!(gql::pretty(&gql::parse(&text).unwrap()), WEEKEND_QUERY);
    }

    #[test]
    fn near_me_needs_coordinates() {
        let ranked = interpret("pediatrician near me on the weekend", &templates(), &lexicon(), &vocab());
        let err = instantiate(&ranked[0], &templates()[0], &UserContext::default()).unwrap_err();
        assert_eq!(err, InstantiateError::MissingContext("lat"));
    }

    #[test]
    fn city_and_k_placeholders() {
        let ranked = interpret("pediatricians in pasadena", &templates(), &lexicon(), &vocab());
        assert_eq!(ranked[0].template_id, "specialty_in_city");
        assert_eq!(ranked[1].template_id, "providers_by_specialty");
        let t = &templates()[2];
        assert_eq!(
            instantiate(&ranked[0], t, &UserContext::default()),
            Err(InstantiateError::MissingContext("k"))
        );
        let ctx = UserContext {
            k: Some(5),
            ..Default::default()
        };
        let q = instantiate(&ranked[0], t, &ctx).unwrap();
        assert!(q.ends_with("l.city = \"Pasadena\" RETURN p LIMIT 5"), "{q}");
    }

    #[test]
    fn no_slots_no_interpretations() {
        assert!(interpret("hello world", &templates(), &lexicon(), &vocab()).is_empty());
    }

    #[test]
    fn placeholder_free_template_is_verbatim() {
        let ranked = interpret("clinic", &templates(), &lexicon(), &vocab());
        assert_eq!(ranked[0].template_id, "all_locations");
        let q = instantiate(&ranked[0], &templates()[3], &UserContext::default()).unwrap();
        assert_eq!(q, templates()[3].query_pattern);
    }

    #[test]
    fn values_are_escaped() {
        let interp = Interpretation {
            template_id: "providers_by_specialty".into(),
            bindings: [(SlotType::Specialty, "Ob \"Gyn\" \\ x".to_string())].into_iter().collect(),
            confidence: 1.0,
            consumed_spans: vec![],
        };
        let q = instantiate(&interp, &templates()[1], &UserContext::default()).unwrap();
        let parsed = gql::parse(&q).unwrap();
        let mut found = false;
        parsed.filter.unwrap().visit(&mut |e| {
            if let Expr::Literal(Literal::Str(s)) = e {
                found |= s == "Ob \"Gyn\" \\ x";
            }
        });
        assert!(found);
    }

    #[test]
    fn template_validation() {
        let bad = r#"[{"id":"x","required_slots":[],"query_pattern":"MATCH (a) WHERE a.n = {NOPE} RETURN a"}]"#;
        assert!(matches!(load_templates(bad), Err(TemplateError::UnknownPlaceholder { .. })));
        let unslotted = r#"[{"id":"x","required_slots":[],"query_pattern":"MATCH (a) WHERE a.n = {SPECIALTY} RETURN a"}]"#;
        assert!(matches!(load_templates(unslotted), Err(TemplateError::UnslottedPlaceholder { .. })));
        let dup = r#"[{"id":"x","required_slots":[],"query_pattern":"MATCH (a) RETURN a"},
                      {"id":"x","required_slots":[],"query_pattern":"MATCH (a) RETURN a"}]"#;
        assert!(matches!(load_templates(dup), Err(TemplateError::DuplicateId(_))));
    }

    #[test]
    fn confidence_bounds() {
        let t = normalize("the a of");
        assert_eq!(coverage_confidence(&t, &[]), 0.0);
        let t = normalize("kids doctor");
        assert_eq!(coverage_confidence(&t, &[(0, 2)]), 1.0);
    }
}
