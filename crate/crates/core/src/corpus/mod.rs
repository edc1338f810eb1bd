//! Search providers and the offline fixture corpus.
//!
//! Every stage that talks to "the web" goes through [`SearchProvider`]. The
//! [`FixtureCorpus`] implementation replays a stored bundle of query results
//! and pages, which makes every run reproducible. A live adapter is available
//! behind the `live` cargo feature.

mod fixture;
#[cfg(feature = "live")]
mod live;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use fixture::{load_fixture, FixtureCorpus};
#[cfg(feature = "live")]
pub use live::{LiveConfig, LiveProvider};

/// Default number of snippets requested per query.
pub const DEFAULT_MAX_RESULTS: usize = 200;

/// One entry of a search engine result list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    #[serde(default)]
    pub query: String,
    /// 1-based position in the result list.
    pub rank: u32,
    pub title: String,
    pub snippet: String,
    pub url: String,
}

/// A fetched page, always held as UTF-8 text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPage {
    pub url: String,
    pub html: String,
    /// Unix seconds at fetch time; `None` for replayed pages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fetched_at: Option<u64>,
}

/// Anything that can answer exact-phrase queries and return pages.
///
/// Implementations must be callable from several threads at once.
pub trait SearchProvider: Send + Sync {
    /// Returns at most `max_results` hits in rank order.
    fn search(&self, query: &str, max_results: usize) -> Result<Vec<SearchHit>>;

    fn fetch_page(&self, url: &str) -> Result<RawPage>;
}

impl<P: SearchProvider + ?Sized> SearchProvider for &P {
    fn search(&self, query: &str, max_results: usize) -> Result<Vec<SearchHit>> {
        (**self).search(query, max_results)
    }

    fn fetch_page(&self, url: &str) -> Result<RawPage> {
        (**self).fetch_page(url)
    }
}

pub(crate) fn check_search_args(query: &str, max_results: usize) -> Result<()> {
    if query.is_empty() {
        return Err(Error::InvalidArgument("empty query".into()));
    }
    if max_results == 0 {
        return Err(Error::InvalidArgument(
            "max_results must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Rejects strings that contain something that looks like an HTML tag.
pub(crate) fn contains_markup(s: &str) -> bool {
    let chars: Vec<char> = s.chars().collect();
    chars
        .windows(2)
        .any(|w| w[0] == '<' && (w[1].is_ascii_alphabetic() || w[1] == '/' || w[1] == '!'))
}
