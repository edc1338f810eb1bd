use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{check_search_args, contains_markup, RawPage, SearchHit, SearchProvider};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Deserialize)]
struct ManifestQuery {
    query: String,
    #[serde(default)]
    hits: Vec<ManifestHit>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestHit {
    rank: u32,
    title: String,
    snippet: String,
    url: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestPage {
    url: String,
    file: String,
}

/// A replayable snapshot of search results and pages.
///
/// Read-only once built, so it can be shared freely between threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixtureCorpus {
    queries: BTreeMap<String, Vec<SearchHit>>,
    pages: BTreeMap<String, RawPage>,
}

impl FixtureCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a query with its hits. Ranks are reassigned 1..=n in the given
    /// order.
    pub fn add_query(&mut self, query: &str, hits: Vec<SearchHit>) {
        let hits = hits
            .into_iter()
            .enumerate()
            .map(|(i, h)| SearchHit {
                query: query.to_owned(),
                rank: i as u32 + 1,
                ..h
            })
            .collect();
        self.queries.insert(query.to_owned(), hits);
    }

    pub fn add_page(&mut self, url: &str, html: &str) {
        self.pages.insert(
            url.to_owned(),
            RawPage {
                url: url.to_owned(),
                html: html.to_owned(),
                fetched_at: None,
            },
        );
    }

    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    pub fn page_count(&self) -> usize {
        self.pages.len()
    }

    pub fn queries(&self) -> impl Iterator<Item = (&str, &[SearchHit])> {
        self.queries.iter().map(|(q, h)| (q.as_str(), h.as_slice()))
    }

    /// Checks the closure and rank invariants.
    pub fn validate(&self) -> Result<()> {
        let mut dangling: Vec<String> = Vec::new();
        for (query, hits) in &self.queries {
            for (i, hit) in hits.iter().enumerate() {
                if hit.rank as usize != i + 1 {
                    return Err(Error::FixtureParse {
                        entry: format!("query {query:?} hit {i}"),
                        message: format!("rank {} out of sequence, expected {}", hit.rank, i + 1),
                    });
                }
                if contains_markup(&hit.title) || contains_markup(&hit.snippet) {
                    return Err(Error::FixtureParse {
                        entry: format!("query {query:?} hit {i}"),
                        message: "title and snippet must be plain text".into(),
                    });
                }
                if !self.pages.contains_key(&hit.url) && !dangling.contains(&hit.url) {
                    dangling.push(hit.url.clone());
                }
            }
        }
        for (url, page) in &self.pages {
            if page.html.is_empty() {
                return Err(Error::FixtureParse {
                    entry: format!("page {url}"),
                    message: "empty page".into(),
                });
            }
        }
        if dangling.is_empty() {
            Ok(())
        } else {
            dangling.sort();
            Err(Error::DanglingUrls { urls: dangling })
        }
    }

    /// Writes the corpus as a bundle directory. Page files are named by the
    /// SHA-256 of their content.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let pages_dir = dir.join("pages");
        fs::create_dir_all(&pages_dir).map_err(|e| Error::io(&pages_dir, e))?;
        let mut pages = Vec::new();
        for (url, page) in &self.pages {
            let digest = Sha256::digest(page.html.as_bytes());
            let file = format!("pages/{}.html", &hex::encode(digest)[..16]);
            let path = dir.join(&file);
            fs::write(&path, &page.html).map_err(|e| Error::io(&path, e))?;
            pages.push(ManifestPage {
                url: url.clone(),
                file,
            });
        }
        let queries: Vec<Value> = self
            .queries
            .iter()
            .map(|(q, hits)| {
                let hits: Vec<ManifestHit> = hits
                    .iter()
                    .map(|h| ManifestHit {
                        rank: h.rank,
                        title: h.title.clone(),
                        snippet: h.snippet.clone(),
                        url: h.url.clone(),
                    })
                    .collect();
                serde_json::json!({ "query": q, "hits": hits })
            })
            .collect();
        let manifest = serde_json::json!({ "queries": queries, "pages": pages });
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

impl SearchProvider for FixtureCorpus {
    fn search(&self, query: &str, max_results: usize) -> Result<Vec<SearchHit>> {
        check_search_args(query, max_results)?;
        Ok(self
            .queries
            .get(query)
            .map(|hits| hits.iter().take(max_results).cloned().collect())
            .unwrap_or_default())
    }

    fn fetch_page(&self, url: &str) -> Result<RawPage> {
        if url.is_empty() {
            return Err(Error::InvalidArgument("empty url".into()));
        }
        self.pages
            .get(url)
            .cloned()
            .ok_or_else(|| Error::MissingPage {
                url: url.to_owned(),
            })
    }
}

/// Loads a fixture bundle from a directory containing `manifest.json`, or
/// from the manifest file itself.
pub fn load_fixture(path: &Path) -> Result<FixtureCorpus> {
    let (dir, manifest_path) = if path.is_dir() {
        (path.to_path_buf(), path.join(MANIFEST_FILE))
    } else {
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (dir, path.to_path_buf())
    };
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let root: Value = serde_json::from_str(&text).map_err(|e| Error::FixtureParse {
        entry: manifest_path.display().to_string(),
        message: e.to_string(),
    })?;
    let empty = Vec::new();
    let array = |key: &str| -> Result<&Vec<Value>> {
        match root.get(key) {
            None | Some(Value::Null) => Ok(&empty),
            Some(Value::Array(items)) => Ok(items),
            Some(_) => Err(Error::FixtureParse {
                entry: key.to_owned(),
                message: "expected an array".into(),
            }),
        }
    };

    let mut corpus = FixtureCorpus::new();
    for (i, value) in array("pages")?.iter().enumerate() {
        let page: ManifestPage =
            serde_json::from_value(value.clone()).map_err(|e| Error::FixtureParse {
                entry: format!("pages[{i}]"),
                message: e.to_string(),
            })?;
        if corpus.pages.contains_key(&page.url) {
            return Err(Error::FixtureParse {
                entry: format!("pages[{i}]"),
                message: format!("duplicate url {}", page.url),
            });
        }
        let file = dir.join(&page.file);
        let bytes = fs::read(&file).map_err(|e| Error::io(&file, e))?;
        let html = String::from_utf8(bytes).map_err(|_| Error::FixtureParse {
            entry: format!("pages[{i}]"),
            message: format!("{} is not valid UTF-8", page.file),
        })?;
        corpus.add_page(&page.url, &html);
    }
    for (i, value) in array("queries")?.iter().enumerate() {
        let entry: ManifestQuery =
            serde_json::from_value(value.clone()).map_err(|e| Error::FixtureParse {
                entry: format!("queries[{i}]"),
                message: e.to_string(),
            })?;
        if entry.query.is_empty() || corpus.queries.contains_key(&entry.query) {
            return Err(Error::FixtureParse {
                entry: format!("queries[{i}]"),
                message: format!("empty or duplicate query {:?}", entry.query),
            });
        }
        let hits = entry
            .hits
            .into_iter()
            .map(|h| SearchHit {
                query: entry.query.clone(),
                rank: h.rank,
                title: h.title,
                snippet: h.snippet,
                url: h.url,
            })
            .collect();
        corpus.queries.insert(entry.query, hits);
    }
    corpus.validate()?;
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hit(url: &str) -> SearchHit {
        SearchHit {
            query: String::new(),
            rank: 0,
            title: format!("title {url}"),
            snippet: format!("snippet {url}"),
            url: url.to_owned(),
        }
    }

    fn sample() -> FixtureCorpus {
        let mut c = FixtureCorpus::new();
        c.add_query("宝马比", vec![hit("u1"), hit("u2")]);
        c.add_query("q", (1..=5).map(|i| hit(&format!("u{i}"))).collect());
        for i in 1..=5 {
            c.add_page(&format!("u{i}"), &format!("<p>page {i}</p>"));
        }
        c
    }

    #[test]
    fn search_passthrough_and_truncation() {
        let c = sample();
        let hits = c.search("宝马比", 200).unwrap();
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].url, "u1");
        assert_eq!(hits[1].rank, 2);
        assert!(c.search("不存在", 200).unwrap().is_empty());
        let top3: Vec<_> = c
            .search("q", 3)
            .unwrap()
            .into_iter()
            .map(|h| h.url)
            .collect();
        assert_eq!(top3, ["u1", "u2", "u3"]);
    }

    #[test]
    fn search_preconditions() {
        let c = sample();
        assert!(matches!(c.search("", 10), Err(Error::InvalidArgument(_))));
        assert!(matches!(c.search("q", 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fetch_is_cached_and_reports_missing() {
        let c = sample();
        let a = c.fetch_page("u1").unwrap();
        let b = c.fetch_page("u1").unwrap();
        assert_eq!(a, b);
        match c.fetch_page("nope") {
            Err(Error::MissingPage { url }) => assert_eq!(url, "nope"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn save_then_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = sample();
        c.save(dir.path()).unwrap();
        let loaded = load_fixture(dir.path()).unwrap();
        assert_eq!(loaded, c);
        assert_eq!(loaded.query_count(), 2);
    }

    #[test]
    fn dangling_urls_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = sample();
        c.add_query("x", vec![hit("gone-a"), hit("u1"), hit("gone-b")]);
        c.save(dir.path()).unwrap();
        match load_fixture(dir.path()) {
            Err(Error::DanglingUrls { urls }) => assert_eq!(urls, ["gone-a", "gone-b"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_bundle_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(MANIFEST_FILE), "{}").unwrap();
        let c = load_fixture(dir.path()).unwrap();
        assert_eq!((c.query_count(), c.page_count()), (0, 0));
    }

    #[test]
    fn malformed_entry_is_named() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"queries": [{"query": "a", "hits": []}, {"query": "b", "hits": [{"rank": 1}]}]}"#,
        )
        .unwrap();
        match load_fixture(dir.path()) {
            Err(Error::FixtureParse { entry, .. }) => assert_eq!(entry, "queries[1]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn markup_in_snippet_is_rejected() {
        let mut c = sample();
        let mut h = hit("u1");
        h.snippet = "<b>bold</b>".into();
        c.add_query("m", vec![h]);
        assert!(matches!(c.validate(), Err(Error::FixtureParse { .. })));
    }
}
