//! Page-local wrapper induction and wrapper-based extraction.
//!
//! A wrapper is a triple of left context, right context and DOM path. It is
//! learned from occurrences of at least two distinct extended seeds that
//! share the same path and the same surrounding HTML, and it extracts every
//! string of the page bracketed by the same contexts at the same path.

mod extract;
mod learn;
mod matcher;

use serde::{Deserialize, Serialize};

use crate::dom::DomPath;
use crate::text::is_punctuation;
use crate::{Error, Result};

pub use extract::{extract_terms, Extraction, MAX_TERM_CHARS};
pub use learn::{learn_wrappers, ContextWindows, MAX_CONTEXT_CHARS};
pub use matcher::{MultiMatcher, PatternMatch};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Wrapper {
    /// Raw HTML immediately before the term.
    pub l: String,
    /// Raw HTML immediately after the term.
    pub r: String,
    pub p: DomPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WrapperConfig {
    /// Minimum `|l| + |r|` when neither context is punctuation.
    pub kappa: usize,
    pub min_distinct_seeds: usize,
}

impl Default for WrapperConfig {
    fn default() -> Self {
        Self {
            kappa: 4,
            min_distinct_seeds: 2,
        }
    }
}

impl WrapperConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kappa < 1 || self.min_distinct_seeds < 2 {
            return Err(Error::Config(
                "kappa must be >= 1 and min_distinct_seeds >= 2".into(),
            ));
        }
        Ok(())
    }
}

fn is_blank(s: &str) -> bool {
    s.chars().all(char::is_whitespace)
}

/// A context counts as punctuation when all its non-space characters are.
fn is_punct_context(s: &str) -> bool {
    let mut any = false;
    for c in s.chars().filter(|c| !c.is_whitespace()) {
        if !is_punctuation(c) {
            return false;
        }
        any = true;
    }
    any
}

/// The four wrapper filters:
///
/// 1. `l` and `r` are non-empty and not both whitespace,
/// 2. both or neither are punctuation,
/// 3. non-punctuation contexts have `|l| + |r| >= kappa`,
/// 4. the path ends in a text or attribute node.
pub fn is_valid_wrapper(w: &Wrapper, cfg: &WrapperConfig) -> bool {
    if w.l.is_empty() || w.r.is_empty() || (is_blank(&w.l) && is_blank(&w.r)) {
        return false;
    }
    let (lp, rp) = (is_punct_context(&w.l), is_punct_context(&w.r));
    if lp != rp {
        return false;
    }
    if !lp && w.l.chars().count() + w.r.chars().count() < cfg.kappa {
        return false;
    }
    w.p.is_textual()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(l: &str, r: &str, p: &str) -> Wrapper {
        Wrapper {
            l: l.into(),
            r: r.into(),
            p: DomPath::from_tags(p.split('/')),
        }
    }

    #[test]
    fn validity_rules() {
        let cfg = WrapperConfig::default();
        assert!(is_valid_wrapper(
            &w("<span>", "</span>", "root/a/span/#text"),
            &cfg
        ));
        assert!(!is_valid_wrapper(&w(" ", " ", "root/p/#text"), &cfg));
        assert!(!is_valid_wrapper(&w("a", "b", "root/p/#text"), &cfg));
        assert!(is_valid_wrapper(&w("ab", "cd", "root/p/#text"), &cfg));
        // Both punctuation: no length requirement.
        assert!(is_valid_wrapper(&w("、", "、", "root/p/#text"), &cfg));
        // Mixed punctuation.
        assert!(!is_valid_wrapper(&w("\">", "</a>", "root/a/#text"), &cfg));
        // Not textual.
        assert!(!is_valid_wrapper(&w("<li>", "</li>", "root/ul/li"), &cfg));
        assert!(is_valid_wrapper(
            &w("title=\"", "\" href", "root/a/#attr"),
            &cfg
        ));
        assert!(!is_valid_wrapper(&w("", "</td>", "root/td/#text"), &cfg));
    }

    #[test]
    fn config_bounds() {
        assert!(WrapperConfig::default().validate().is_ok());
        assert!(WrapperConfig {
            kappa: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(WrapperConfig {
            min_distinct_seeds: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
