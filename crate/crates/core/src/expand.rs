//! Expansion of the extended seed set into web lists.
//!
//! Each initial candidate is paired with the seed in one query. Every page
//! retrieved for any query is parsed once; wrappers are learned from the
//! whole extended seed set and each wrapper's extraction becomes a
//! [`WebList`] carrying a window of surrounding visible text.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::concept::BackgroundCorpus;
use crate::corpus::SearchProvider;
use crate::dom::{parse_html, DomTree};
use crate::text::normalize_term;
use crate::wrapper::{extract_terms, learn_wrappers, Extraction, Wrapper, WrapperConfig};
use crate::{Error, Result};

/// The seed plus the initial candidates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedSeedSet {
    pub seed: String,
    pub initial: Vec<String>,
}

impl ExtendedSeedSet {
    /// Drops empty entries, duplicates and the seed itself from `initial`.
    pub fn new(seed: &str, initial: impl IntoIterator<Item = String>) -> Self {
        let seed = normalize_term(seed);
        let mut seen = BTreeSet::new();
        let initial = initial
            .into_iter()
            .map(|t| normalize_term(&t))
            .filter(|t| !t.is_empty() && *t != seed && seen.insert(t.clone()))
            .collect();
        Self { seed, initial }
    }

    /// `{seed} ∪ initial`, seed first.
    pub fn terms(&self) -> Vec<String> {
        std::iter::once(self.seed.clone())
            .chain(self.initial.iter().cloned())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WebList {
    pub id: String,
    pub terms: Vec<String>,
    pub source_url: String,
    pub wrapper: Wrapper,
    pub context: String,
}

impl WebList {
    /// Stable id derived from the page url and the wrapper.
    pub fn make_id(source_url: &str, wrapper: &Wrapper) -> String {
        let mut h = Sha256::new();
        for part in [source_url, &wrapper.l, &wrapper.r, wrapper.p.as_str()] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.iter().any(|t| t == term)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpandConfig {
    pub pages_per_query: usize,
    /// Characters of visible text taken on each side of a list.
    pub context_window: usize,
}

impl Default for ExpandConfig {
    fn default() -> Self {
        Self {
            pages_per_query: 10,
            context_window: 200,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandDiagnostics {
    pub queries_issued: Vec<String>,
    pub query_errors: Vec<String>,
    pub pages_processed: usize,
    pub page_errors: Vec<String>,
    pub wrappers_learned: usize,
}

#[derive(Debug, Clone)]
pub struct Expansion {
    /// Sorted by id.
    pub weblists: Vec<WebList>,
    /// Every page fetched in this run.
    pub background: BackgroundCorpus,
    pub diagnostics: ExpandDiagnostics,
}

impl Expansion {
    /// Union of all list terms.
    pub fn terms(&self) -> BTreeSet<String> {
        self.weblists
            .iter()
            .flat_map(|l| l.terms.iter().cloned())
            .collect()
    }
}

/// One `"seed candidate"` query per initial candidate.
pub fn expansion_queries(t: &ExtendedSeedSet) -> Vec<String> {
    t.initial
        .iter()
        .map(|c| format!("{} {}", t.seed, c))
        .collect()
}

/// Visible text within `window` characters before the first extraction and
/// after the last one.
fn list_context(
    rendered: &crate::dom::RenderedText,
    items: &[Extraction],
    window: usize,
) -> String {
    let (Some(first), Some(last)) = (
        items.iter().map(|e| e.start).min(),
        items.iter().map(|e| e.end).max(),
    ) else {
        return String::new();
    };
    let before_end = rendered.index_at_or_after(first);
    let after_start = rendered.index_at_or_after(last);
    let before = rendered.slice(before_end.saturating_sub(window)..before_end);
    let after_end = (after_start + window).min(rendered.chars.len());
    let after = rendered.slice(after_start..after_end);
    format!("{} {}", before.trim(), after.trim())
        .trim()
        .to_owned()
}

/// Learns wrappers on one page and turns their extractions into lists.
pub fn page_weblists(
    url: &str,
    page: &DomTree,
    seeds: &[String],
    wrapper_cfg: &WrapperConfig,
    context_window: usize,
) -> (Vec<WebList>, usize) {
    let wrappers = learn_wrappers(seeds, page, wrapper_cfg);
    let extractions = extract_terms(page, &wrappers);
    let rendered = page.rendered_text();
    let mut lists = Vec::new();
    for (wrapper, items) in wrappers.iter().zip(extractions) {
        let mut seen = BTreeSet::new();
        let terms: Vec<String> = items
            .iter()
            .map(|e| normalize_term(&e.text))
            .filter(|t| !t.is_empty() && seen.insert(t.clone()))
            .collect();
        if terms.len() < 2 {
            continue;
        }
        lists.push(WebList {
            id: WebList::make_id(url, wrapper),
            terms,
            source_url: url.to_owned(),
            wrapper: wrapper.clone(),
            context: list_context(&rendered, &items, context_window),
        });
    }
    (drop_sublists(lists), wrappers.len())
}

/// Removes lists whose terms are all in another list at the same path. Of
/// two lists with equal term sets the one with the smaller id is kept.
fn drop_sublists(lists: Vec<WebList>) -> Vec<WebList> {
    let sets: Vec<BTreeSet<&String>> = lists.iter().map(|l| l.terms.iter().collect()).collect();
    let covered = |i: usize| {
        (0..lists.len()).any(|j| {
            j != i
                && lists[j].wrapper.p == lists[i].wrapper.p
                && sets[i].is_subset(&sets[j])
                && (sets[i].len() < sets[j].len() || lists[j].id < lists[i].id)
        })
    };
    let keep: Vec<bool> = (0..lists.len()).map(|i| !covered(i)).collect();
    lists
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(l, _)| l)
        .collect()
}

/// Runs the pairwise queries and collects the web lists of every page.
///
/// Failed queries and fetches are recorded in the diagnostics and skipped.
pub fn expand<P: SearchProvider + ?Sized>(
    t: &ExtendedSeedSet,
    provider: &P,
    cfg: &ExpandConfig,
    wrapper_cfg: &WrapperConfig,
) -> Result<Expansion> {
    let mut diagnostics = ExpandDiagnostics::default();
    let mut background = BackgroundCorpus::default();
    let mut weblists = Vec::new();
    let seeds = t.terms();
    if seeds.len() < 2 {
        return Err(Error::InvalidArgument(
            "expansion needs the seed and at least one candidate".into(),
        ));
    }

    let mut urls: Vec<String> = Vec::new();
    let mut seen_urls = BTreeSet::new();
    for query in expansion_queries(t) {
        diagnostics.queries_issued.push(query.clone());
        match provider.search(&query, cfg.pages_per_query.max(1)) {
            Ok(hits) => {
                for hit in hits {
                    if seen_urls.insert(hit.url.clone()) {
                        urls.push(hit.url);
                    }
                }
            }
            Err(e) => diagnostics.query_errors.push(e.to_string()),
        }
    }

    for url in urls {
        let page = match provider.fetch_page(&url) {
            Ok(p) => p,
            Err(e) => {
                diagnostics.page_errors.push(e.to_string());
                continue;
            }
        };
        let tree = parse_html(&page.html);
        background.add_document(&tree.rendered_text().chars.iter().collect::<String>());
        let (lists, learned) = page_weblists(&url, &tree, &seeds, wrapper_cfg, cfg.context_window);
        diagnostics.pages_processed += 1;
        diagnostics.wrappers_learned += learned;
        weblists.extend(lists);
    }
    weblists.sort_by(|a, b| a.id.cmp(&b.id));

    Ok(Expansion {
        weblists,
        background,
        diagnostics,
    })
}

/// Writes lists as JSON lines.
pub fn dump_weblists<W: Write>(lists: &[WebList], mut out: W) -> Result<()> {
    for l in lists {
        serde_json::to_writer(&mut out, l)?;
        out.write_all(b"\n")
            .map_err(|e| Error::io("<weblist dump>", e))?;
    }
    Ok(())
}
