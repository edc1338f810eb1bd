use std::collections::{BTreeMap, BTreeSet};

use super::{MultiMatcher, Wrapper};
use crate::dom::DomTree;

/// Extracted strings longer than this (after trimming) are noise.
pub const MAX_TERM_CHARS: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Extraction {
    /// Trimmed bracketed text.
    pub text: String,
    /// Raw bracketed span, in characters.
    pub start: usize,
    pub end: usize,
}

/// Why a bracketed span is rejected. Every reason is inherited by any span
/// that extends it further to the left, which lets the scan stop early.
fn rejects(span: &[char], l: &[char], r: &[char]) -> bool {
    let contains = |needle: &[char]| span.windows(needle.len()).any(|w| w == needle);
    span.iter().any(|&c| c == '<' || c == '>')
        || contains(l)
        || contains(r)
        || trimmed(span).len() > MAX_TERM_CHARS
}

fn trimmed(span: &[char]) -> &[char] {
    let start = span
        .iter()
        .position(|c| !c.is_whitespace())
        .unwrap_or(span.len());
    let end = span
        .iter()
        .rposition(|c| !c.is_whitespace())
        .map_or(start, |e| e + 1);
    &span[start..end]
}

/// Applies the wrappers learned on `page` back to it.
///
/// Left and right contexts are located in one pass of a multi-pattern
/// matcher. Each left-context hit is remembered per `(l, r)` pair; when a
/// right context is hit, every remembered left position whose bracketed
/// text lies in a node with the same path as the text right before `r`, and
/// whose path belongs to a wrapper for `(l, r)`, yields an extraction.
///
/// Bracketed text is discarded when it contains markup characters or the
/// wrapper's own contexts, or is longer than [`MAX_TERM_CHARS`] after
/// trimming. Results are returned per wrapper, in document order.
pub fn extract_terms(page: &DomTree, wrappers: &[Wrapper]) -> Vec<Vec<Extraction>> {
    let mut out: Vec<BTreeSet<Extraction>> = vec![BTreeSet::new(); wrappers.len()];
    let chars = page.chars();

    let lefts: BTreeSet<&str> = wrappers.iter().map(|w| w.l.as_str()).collect();
    let rights: BTreeSet<&str> = wrappers.iter().map(|w| w.r.as_str()).collect();
    let mut rights_of: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut lefts_of: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut by_pair: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for (i, w) in wrappers.iter().enumerate() {
        rights_of.entry(&w.l).or_default().insert(&w.r);
        lefts_of.entry(&w.r).or_default().insert(&w.l);
        by_pair.entry((&w.l, &w.r)).or_default().push(i);
    }

    let matcher = MultiMatcher::new(lefts.iter().chain(rights.iter()));
    let mut left_pos: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();

    for m in matcher.find_matches(chars) {
        let pattern = matcher.pattern(m.pattern);
        let pos = m.start;
        if let Some((l, rs)) = rights_of.get_key_value(pattern) {
            for r in rs {
                left_pos.entry((*l, *r)).or_default().push(pos);
            }
        }
        let Some((r, ls)) = lefts_of.get_key_value(pattern) else {
            continue;
        };
        let r_chars: Vec<char> = r.chars().collect();
        for l in ls {
            let Some(starts) = left_pos.get(&(*l, *r)) else {
                continue;
            };
            let l_chars: Vec<char> = l.chars().collect();
            for &lp in starts.iter().rev() {
                let start = lp + l_chars.len();
                if start >= pos {
                    continue;
                }
                let span = &chars[start..pos];
                if rejects(span, &l_chars, &r_chars) {
                    break;
                }
                let path = page.path_id(page.node_at(pos - 1).expect("in range"));
                if path != page.path_id(page.node_at(start).expect("in range")) {
                    continue;
                }
                let text: String = trimmed(span).iter().collect();
                if text.is_empty() {
                    continue;
                }
                for &wi in &by_pair[&(*l, *r)] {
                    if *page.path_of(page.node_at(start).expect("in range")) == wrappers[wi].p {
                        out[wi].insert(Extraction {
                            text: text.clone(),
                            start,
                            end: pos,
                        });
                    }
                }
            }
        }
    }

    out.into_iter()
        .map(|set| {
            let mut v: Vec<Extraction> = set.into_iter().collect();
            v.sort_by_key(|e| (e.start, e.end));
            v
        })
        .collect()
}
