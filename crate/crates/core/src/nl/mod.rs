//! Natural-language question interpretation: slot extraction against a
//! lexicon and template matching.

mod lexicon;
mod template;

pub use lexicon::{extract, Lexicon, LexiconEntry, LexiconError, SlotCandidate, SlotType, NEAR_ME};
pub use template::{
    coverage_confidence, instantiate, interpret, interpret_tokens, load_templates,
    InstantiateError, Interpretation, Template, TemplateError, UserContext,
};
