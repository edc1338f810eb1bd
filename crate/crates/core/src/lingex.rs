//! Initial candidate extraction from search snippets.
//!
//! For every clue word `f` the seed is queried as `seed·f` and `f·seed`. A
//! candidate `x` is scored by how many sentences contain `x·f·seed` (n) and
//! how many contain `seed·f·x` (m); the score is `n·m`, so only strings seen
//! on both sides of a clue word survive a positive threshold.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::text::is_term_boundary;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LingexConfig {
    pub clue_words: Vec<String>,
    /// Candidates need `score > tau`.
    pub tau: u64,
    pub top_n: usize,
    /// In characters.
    pub max_candidate_len: usize,
}

impl Default for LingexConfig {
    fn default() -> Self {
        Self {
            clue_words: vec!["和".into(), "比".into()],
            tau: 2,
            top_n: 5,
            max_candidate_len: 10,
        }
    }
}

impl LingexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clue_words.is_empty() || self.clue_words.iter().any(String::is_empty) {
            return Err(Error::Config(
                "clue_words must be a non-empty list of non-empty words".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        if !self.clue_words.iter().all(|w| seen.insert(w)) {
            return Err(Error::Config("clue_words contains duplicates".into()));
        }
        if self.tau < 1 || self.top_n < 1 || self.max_candidate_len < 1 {
            return Err(Error::Config(
                "tau, top_n and max_candidate_len must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub text: String,
    /// Sentences matching `x·f·seed`.
    pub n: u64,
    /// Sentences matching `seed·f·x`.
    pub m: u64,
    pub score: u64,
}

/// `seed·f` and `f·seed` for every clue word, in clue-word order.
pub fn build_queries(seed: &str, cfg: &LingexConfig) -> Result<Vec<String>> {
    if seed.is_empty() {
        return Err(Error::InvalidArgument("empty seed".into()));
    }
    if cfg.clue_words.is_empty() {
        return Err(Error::InvalidArgument("no clue words configured".into()));
    }
    Ok(cfg
        .clue_words
        .iter()
        .flat_map(|f| [format!("{seed}{f}"), format!("{f}{seed}")])
        .collect())
}

/// Byte offsets of every (possibly overlapping) occurrence of `needle`.
fn find_all(haystack: &str, needle: &str) -> Vec<usize> {
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(i) = haystack[from..].find(needle) {
        out.push(from + i);
        from += i + haystack[from + i..]
            .chars()
            .next()
            .map_or(1, char::len_utf8);
    }
    out
}

/// Suffixes (left side) or prefixes (right side) of the boundary-free run
/// adjacent to a junction, up to `max_len` characters.
fn adjacent_strings(run: &[char], max_len: usize, left: bool) -> impl Iterator<Item = String> + '_ {
    let limit = run.len().min(max_len);
    (1..=limit).map(move |k| {
        if left {
            run[run.len() - k..].iter().collect()
        } else {
            run[..k].iter().collect()
        }
    })
}

fn left_run(before: &str) -> Vec<char> {
    let mut run: Vec<char> = before
        .chars()
        .rev()
        .take_while(|c| !is_term_boundary(*c))
        .collect();
    run.reverse();
    run
}

fn right_run(after: &str) -> Vec<char> {
    after
        .chars()
        .take_while(|c| !is_term_boundary(*c))
        .collect()
}

/// Scores candidates over pre-split sentences and returns the top-N.
///
/// Each sentence counts at most once towards `n_x` and once towards `m_x`,
/// however many clue words or positions match in it.
pub fn extract_initial_candidates<S: AsRef<str>>(
    seed: &str,
    sentences: &[S],
    cfg: &LingexConfig,
) -> Vec<ScoredCandidate> {
    if seed.is_empty() {
        return Vec::new();
    }
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for sentence in sentences {
        let s = sentence.as_ref();
        let mut left_side = BTreeSet::new();
        let mut right_side = BTreeSet::new();
        for f in cfg.clue_words.iter().filter(|f| !f.is_empty()) {
            let before_seed = format!("{f}{seed}");
            for at in find_all(s, &before_seed) {
                left_side.extend(adjacent_strings(
                    &left_run(&s[..at]),
                    cfg.max_candidate_len,
                    true,
                ));
            }
            let after_seed = format!("{seed}{f}");
            for at in find_all(s, &after_seed) {
                let rest = &s[at + after_seed.len()..];
                right_side.extend(adjacent_strings(
                    &right_run(rest),
                    cfg.max_candidate_len,
                    false,
                ));
            }
        }
        for x in left_side {
            counts.entry(x).or_default().0 += 1;
        }
        for x in right_side {
            counts.entry(x).or_default().1 += 1;
        }
    }

    let mut kept: Vec<ScoredCandidate> = counts
        .into_iter()
        .filter(|(x, _)| !x.contains(seed))
        .map(|(text, (n, m))| ScoredCandidate {
            text,
            n,
            m,
            score: n * m,
        })
        .filter(|c| c.score > cfg.tau)
        .collect();
    kept.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.text.cmp(&b.text)));
    kept.truncate(cfg.top_n);
    kept
}

/// Longest a competitor name may be when only one of its boundaries is
/// known (patterns C3 and C4).
pub const OPEN_BOUNDARY_MAX_LEN: usize = 4;
const CLOSED_BOUNDARY_MAX_LEN: usize = 10;

fn is_name(s: &str, max_len: usize) -> bool {
    let n = s.chars().count();
    n >= 1 && n <= max_len && !s.chars().any(is_term_boundary)
}

/// The enumeration patterns H1–H3: `trigger EN (、CN)* conj CN`.
fn match_enumeration(
    sentence: &str,
    seed: &str,
    trigger: &str,
    conjunctions: &[char],
    out: &mut Vec<String>,
) {
    let head = format!("{trigger}{seed}");
    for at in find_all(sentence, &head) {
        let mut rest = &sentence[at + head.len()..];
        let mut items = Vec::new();
        let mut closed = false;
        while let Some(after) = rest.strip_prefix('、') {
            let end = after
                .find(|c: char| c == '、' || conjunctions.contains(&c) || is_term_boundary(c))
                .unwrap_or(after.len());
            items.push(&after[..end]);
            rest = &after[end..];
        }
        if let Some(conj) = rest.chars().next().filter(|c| conjunctions.contains(c)) {
            let after = &rest[conj.len_utf8()..];
            let end = after.find(is_term_boundary).unwrap_or(after.len());
            items.push(&after[..end]);
            closed = true;
        }
        if closed {
            for item in items {
                if is_name(item, CLOSED_BOUNDARY_MAX_LEN) && item != seed {
                    out.push(item.to_owned());
                }
            }
        }
    }
}

/// The CoMiner competitor patterns adapted to Chinese.
///
/// Sentences are expected without their terminating punctuation (as
/// produced by [`crate::text::split_sentences`]). For C3 the competitor must
/// run to the end of the sentence and for C4 it must start the sentence;
/// because the other boundary is unknown there, such names are only accepted
/// up to [`OPEN_BOUNDARY_MAX_LEN`] characters.
pub fn extract_cominer_baseline<S: AsRef<str>>(seed: &str, sentences: &[S]) -> Vec<String> {
    let mut found = Vec::new();
    if seed.is_empty() {
        return found;
    }
    for sentence in sentences {
        let s = sentence.as_ref().trim();
        // H1–H3
        match_enumeration(s, seed, "例如", &['或', '和'], &mut found);
        match_enumeration(s, seed, "特别是", &['和'], &mut found);
        match_enumeration(s, seed, "包括", &['和'], &mut found);

        // C1: CN 比 EN 更
        let c1 = format!("比{seed}更");
        for at in find_all(s, &c1) {
            let run: String = left_run(&s[..at]).into_iter().collect();
            if is_name(&run, CLOSED_BOUNDARY_MAX_LEN) {
                found.push(run);
            }
        }
        // C2: EN 比 CN 更
        let c2 = format!("{seed}比");
        for at in find_all(s, &c2) {
            let rest = &s[at + c2.len()..];
            if let Some(end) = rest.find('更') {
                if is_name(&rest[..end], CLOSED_BOUNDARY_MAX_LEN) {
                    found.push(rest[..end].to_owned());
                }
            }
        }
        // C3: EN 或 CN, CN sentence-final
        let c3 = format!("{seed}或");
        if let Some(at) = s.rfind(&c3) {
            let tail = &s[at + c3.len()..];
            if is_name(tail, OPEN_BOUNDARY_MAX_LEN) {
                found.push(tail.to_owned());
            }
        }
        // C4: CN 或 EN, CN sentence-initial
        let c4 = format!("或{seed}");
        if let Some(at) = s.find(&c4) {
            let head = &s[..at];
            if is_name(head, OPEN_BOUNDARY_MAX_LEN) {
                found.push(head.to_owned());
            }
        }
    }
    let mut seen = BTreeSet::new();
    found.retain(|t| t != seed && !t.contains(seed) && seen.insert(t.clone()));
    found
}
