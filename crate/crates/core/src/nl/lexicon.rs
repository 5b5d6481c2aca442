use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::SpecialtyRecord;
use crate::text::{normalize, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SlotType {
    Specialty,
    Temporal,
    Geo,
    Language,
    Gender,
    EntityKind,
    Modifier,
}

impl SlotType {
    pub const ALL: [SlotType; 7] = [
        SlotType::Specialty,
        SlotType::Temporal,
        SlotType::Geo,
        SlotType::Language,
        SlotType::Gender,
        SlotType::EntityKind,
        SlotType::Modifier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SlotType::Specialty => "SPECIALTY",
            SlotType::Temporal => "TEMPORAL",
            SlotType::Geo => "GEO",
            SlotType::Language => "LANGUAGE",
            SlotType::Gender => "GENDER",
            SlotType::EntityKind => "ENTITY_KIND",
            SlotType::Modifier => "MODIFIER",
        }
    }
}

impl fmt::Display for SlotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SlotType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SlotType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown slot type {s}"))
    }
}

/// Canonical value for "near me" style phrases.
pub const NEAR_ME: &str = "NEAR_ME";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub surface: String,
    pub slot_type: SlotType,
    pub canonical: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum LexiconError {
    #[error("lexicon surface {0:?} must be non-empty, lowercase and trimmed")]
    BadSurface(String),
    #[error("lexicon json: {0}")]
    Json(String),
}

/// Surface phrases (as token sequences) mapped to typed canonical values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<Vec<String>, (SlotType, String)>,
    max_phrase_len: usize,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        let entries: Vec<LexiconEntry> =
            serde_json::from_str(text).map_err(|e| LexiconError::Json(e.to_string()))?;
        let mut lexicon = Lexicon::new();
        for e in entries {
            lexicon.insert(&e.surface, e.slot_type, &e.canonical)?;
        }
        Ok(lexicon)
    }

    /// Adds an entry. The first entry for a surface form wins; later ones are
    /// ignored.
    pub fn insert(
        &mut self,
        surface: &str,
        slot_type: SlotType,
        canonical: &str,
    ) -> Result<(), LexiconError> {
        if surface.is_empty() || surface.trim() != surface || surface.to_lowercase() != surface {
            return Err(LexiconError::BadSurface(surface.to_string()));
        }
        let tokens = normalize(surface);
        if tokens.is_empty() {
            return Err(LexiconError::BadSurface(surface.to_string()));
        }
        self.max_phrase_len = self.max_phrase_len.max(tokens.len());
        self.entries
            .entry(tokens)
            .or_insert_with(|| (slot_type, canonical.to_string()));
        Ok(())
    }

    /// Adds every specialty's lowercased name and synonyms as SPECIALTY
    /// surfaces resolving to the canonical name.
    pub fn augment_with_specialties(&mut self, specialties: &[SpecialtyRecord]) {
        for s in specialties {
            let forms = std::iter::once(s.name.to_lowercase()).chain(s.synonyms.iter().cloned());
            for form in forms {
                // Records were validated on load; anything still odd is skipped.
                let _ = self.insert(&form, SlotType::Specialty, &s.name);
            }
        }
    }

    pub fn lookup(&self, tokens: &[String]) -> Option<(SlotType, &str)> {
        self.entries.get(tokens).map(|(t, c)| (*t, c.as_str()))
    }

    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[String], SlotType, &str)> {
        self.entries
            .iter()
            .map(|(k, (t, c))| (k.as_slice(), *t, c.as_str()))
    }

    /// Distinct canonical values per slot type.
    pub fn canonical_values(&self) -> BTreeMap<SlotType, Vec<String>> {
        let mut out: BTreeMap<SlotType, Vec<String>> = BTreeMap::new();
        for (_, t, c) in self.entries() {
            let values = out.entry(t).or_default();
            if !values.iter().any(|v| v == c) {
                values.push(c.to_string());
            }
        }
        out
    }

    pub fn add_words_to(&self, vocabulary: &mut Vocabulary) {
        for words in self.entries.keys() {
            vocabulary.extend(words.iter().cloned());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotCandidate {
    /// Token range, end exclusive.
    pub span: (usize, usize),
    pub slot_type: SlotType,
    pub canonical_value: String,
    pub matched_text: String,
}

fn token_variants(token: &str) -> Vec<&str> {
    match token.strip_suffix('s') {
        Some(stem) if !stem.is_empty() => vec![token, stem],
        _ => vec![token],
    }
}

/// Looks up a phrase allowing each token to drop a plural "s". Exact forms
/// are tried before stripped ones.
fn lookup_with_plurals<'a>(lexicon: &'a Lexicon, words: &[String]) -> Option<(SlotType, &'a str)> {
    let variants: Vec<Vec<&str>> = words.iter().map(|w| token_variants(w)).collect();
    let combos: usize = variants.iter().map(Vec::len).product();
    for mask in 0..combos {
        let mut rest = mask;
        let key: Vec<String> = variants
            .iter()
            .map(|v| {
                let pick = rest % v.len();
                rest /= v.len();
                v[pick].to_string()
            })
            .collect();
        if let Some(hit) = lexicon.lookup(&key) {
            return Some(hit);
        }
    }
    None
}

/// Greedy longest-match extraction: phrase lengths are tried from the longest
/// lexicon phrase down to single tokens, accepting spans that do not overlap
/// an already accepted one. Results are ordered by span start.
pub fn extract(tokens: &[String], lexicon: &Lexicon) -> Vec<SlotCandidate> {
    let mut used = vec![false; tokens.len()];
    let mut out = Vec::new();
    for n in (1..=lexicon.max_phrase_len().min(tokens.len())).rev() {
        for start in 0..=tokens.len() - n {
            let end = start + n;
            if used[start..end].iter().any(|&u| u) {
                continue;
            }
            if let Some((slot_type, canonical)) = lookup_with_plurals(lexicon, &tokens[start..end]) {
                used[start..end].iter_mut().for_each(|u| *u = true);
                out.push(SlotCandidate {
                    span: (start, end),
                    slot_type,
                    canonical_value: canonical.to_string(),
                    matched_text: tokens[start..end].join(" "),
                });
            }
        }
    }
    out.sort_by_key(|c| c.span.0);
    out
}
