//! Best-effort adapter for a JSON search endpoint.
//!
//! The endpoint is expected to answer with a SearxNG-style document:
//! `{"results": [{"title": .., "content": .., "url": ..}, ..]}`. Pages are
//! fetched directly and decoded to UTF-8 using the response charset.

use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::Deserialize;

use super::{check_search_args, RawPage, SearchHit, SearchProvider};
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
pub struct LiveConfig {
    /// URL with `{query}` and optionally `{page}` placeholders.
    pub endpoint: String,
    #[serde(default = "default_interval_ms")]
    pub rate_limit_ms: u64,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
}

fn default_interval_ms() -> u64 {
    1000
}

fn default_page_size() -> usize {
    10
}

#[derive(Debug, Deserialize)]
struct ResultPage {
    #[serde(default)]
    results: Vec<ResultItem>,
}

#[derive(Debug, Deserialize)]
struct ResultItem {
    #[serde(default)]
    title: String,
    #[serde(default, alias = "snippet")]
    content: String,
    url: String,
}

pub struct LiveProvider {
    config: LiveConfig,
    client: reqwest::blocking::Client,
    last_request: Mutex<Option<Instant>>,
}

impl LiveProvider {
    pub fn new(config: LiveConfig) -> Result<Self> {
        if !config.endpoint.contains("{query}") {
            return Err(Error::Config("live endpoint must contain {query}".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            config,
            client,
            last_request: Mutex::new(None),
        })
    }

    fn throttle(&self) {
        let interval = Duration::from_millis(self.config.rate_limit_ms);
        let mut last = self.last_request.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < interval {
                std::thread::sleep(interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn get(&self, url: &str, query: &str) -> Result<reqwest::blocking::Response> {
        self.throttle();
        let transport = |e: reqwest::Error| Error::Transport {
            query: query.to_owned(),
            message: e.to_string(),
            retryable: e.is_timeout() || e.is_connect() || e.is_request(),
        };
        let resp = self.client.get(url).send().map_err(transport)?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::Transport {
                query: query.to_owned(),
                message: format!("HTTP {status}"),
                retryable: status.is_server_error() || status.as_u16() == 429,
            });
        }
        Ok(resp)
    }
}

fn strip_tags(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_tag = false;
    for c in s.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    out
}

impl SearchProvider for LiveProvider {
    fn search(&self, query: &str, max_results: usize) -> Result<Vec<SearchHit>> {
        check_search_args(query, max_results)?;
        let quoted = format!("\"{query}\"");
        let encoded: String = url::form_urlencoded::byte_serialize(quoted.as_bytes()).collect();
        let mut hits = Vec::new();
        let mut page = 1;
        while hits.len() < max_results {
            let url = self
                .config
                .endpoint
                .replace("{query}", &encoded)
                .replace("{page}", &page.to_string());
            let body: ResultPage = self
                .get(&url, query)?
                .json()
                .map_err(|e| Error::Transport {
                    query: query.to_owned(),
                    message: e.to_string(),
                    retryable: false,
                })?;
            let fetched = body.results.len();
            for item in body.results.into_iter().take(max_results - hits.len()) {
                hits.push(SearchHit {
                    query: query.to_owned(),
                    rank: hits.len() as u32 + 1,
                    title: strip_tags(&item.title),
                    snippet: strip_tags(&item.content),
                    url: item.url,
                });
            }
            if fetched < self.config.page_size || !self.config.endpoint.contains("{page}") {
                break;
            }
            page += 1;
        }
        Ok(hits)
    }

    fn fetch_page(&self, url: &str) -> Result<RawPage> {
        if url.is_empty() {
            return Err(Error::InvalidArgument("empty url".into()));
        }
        let html = self.get(url, url)?.text().map_err(|e| Error::Transport {
            query: url.to_owned(),
            message: e.to_string(),
            retryable: false,
        })?;
        let fetched_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .ok();
        Ok(RawPage {
            url: url.to_owned(),
            html,
            fetched_at,
        })
    }
}
