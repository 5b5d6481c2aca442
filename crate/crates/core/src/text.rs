//! Tokenization and spell correction shared by the question interpreter and
//! the keyword engine, so both paths see the same corrected query.

use std::collections::BTreeSet;

/// Function words excluded from interpretation confidence. "near" is
/// deliberately absent because it is part of the "near me" phrase.
pub const STOPWORDS: &[&str] = &[
    "a", "an", "and", "any", "are", "at", "by", "can", "do", "does", "for", "how", "i", "in",
    "is", "me", "my", "of", "on", "or", "that", "the", "there", "to", "what", "which", "who",
    "with",
];

/// Tokens shorter than this are never spell-corrected.
const MIN_CORRECTABLE_LEN: usize = 4;

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Lowercases, strips punctuation and splits on whitespace.
pub fn normalize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|word| {
            word.chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Known terms that spell correction may map unknown tokens onto.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    terms: BTreeSet<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: impl Into<String>) {
        let term = term.into();
        if !term.is_empty() {
            self.terms.insert(term);
        }
    }

    pub fn extend<I: IntoIterator<Item = S>, S: Into<String>>(&mut self, terms: I) {
        for t in terms {
            self.insert(t);
        }
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains(term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }
}

/// Maps an unknown token to the closest vocabulary term by Damerau-Levenshtein
/// distance: at most 1 edit for tokens up to five characters, at most 2 for
/// longer ones. Ties go to the lexicographically smallest term. Known tokens,
/// short tokens and tokens containing digits are returned unchanged.
pub fn spell_correct(token: &str, vocabulary: &Vocabulary) -> String {
    let len = token.chars().count();
    if vocabulary.contains(token)
        || len < MIN_CORRECTABLE_LEN
        || token.chars().any(|c| c.is_ascii_digit())
    {
        return token.to_string();
    }
    let limit = if len <= 5 { 1 } else { 2 };
    let mut best: Option<(usize, &str)> = None;
    // Terms iterate in lexicographic order, so strict < keeps the smallest on ties.
    for term in vocabulary.iter() {
        if term.chars().count().abs_diff(len) > limit {
            continue;
        }
        let d = strsim::damerau_levenshtein(token, term);
        if d <= limit && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, term));
        }
    }
    best.map_or_else(|| token.to_string(), |(_, t)| t.to_string())
}

pub fn correct_all(tokens: &[String], vocabulary: &Vocabulary) -> Vec<String> {
    tokens.iter().map(|t| spell_correct(t, vocabulary)).collect()
}
