//! End-to-end mining: initial candidates, expansion, concept
//! disambiguation and ranking, plus evaluation of the resulting report.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::concept::{cluster_weblists, filter_clusters, ConceptCluster, ConceptConfig};
use crate::corpus::SearchProvider;
use crate::eval::{
    aap, average_precision, cluster_quality, iaap, interleave, precision_at_n, GoldAnswer,
    ResultSet,
};
use crate::expand::{expand, ExpandConfig, ExtendedSeedSet, WebList};
use crate::lingex::{build_queries, extract_initial_candidates, LingexConfig, ScoredCandidate};
use crate::rank::{build_relation_graph, rank_terms, rwr_scores, RwrConfig};
use crate::text::{normalize_term, split_sentences};
use crate::wrapper::WrapperConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    /// Hits requested per snippet query.
    pub snippet_results: usize,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            snippet_results: crate::corpus::DEFAULT_MAX_RESULTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub disambiguation: bool,
    pub lingex: LingexConfig,
    pub wrapper: WrapperConfig,
    pub expand: ExpandConfig,
    pub concept: ConceptConfig,
    pub rank: RwrConfig,
    pub provider: ProviderConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            disambiguation: true,
            lingex: LingexConfig::default(),
            wrapper: WrapperConfig::default(),
            expand: ExpandConfig::default(),
            concept: ConceptConfig::default(),
            rank: RwrConfig::default(),
            provider: ProviderConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.lingex.validate()?;
        self.wrapper.validate()?;
        self.concept.validate()?;
        self.rank.validate()?;
        if self.expand.pages_per_query == 0 || self.provider.snippet_results == 0 {
            return Err(Error::Config(
                "pages_per_query and snippet_results must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTerm {
    pub term: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptReport {
    pub id: String,
    pub list_count: usize,
    pub terms: Vec<RankedTerm>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub stage_failure: Option<String>,
    pub snippet_queries: Vec<String>,
    pub snippet_hits: usize,
    pub sentences: usize,
    pub expansion_queries: Vec<String>,
    pub query_errors: Vec<String>,
    pub pages_processed: usize,
    pub page_errors: Vec<String>,
    pub wrappers_learned: usize,
    pub clusters_total: usize,
    pub clusters_filtered: usize,
    pub terms_filtered: usize,
    pub unconverged_walks: usize,
    /// Lists each ranked term was extracted from.
    pub provenance: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningReport {
    pub seed: String,
    pub disambiguation: bool,
    pub initial_candidates: Vec<ScoredCandidate>,
    pub weblist_count: usize,
    /// Largest concept first.
    pub concepts: Vec<ConceptReport>,
    pub diagnostics: Diagnostics,
}

impl MiningReport {
    pub fn is_empty(&self) -> bool {
        self.concepts.iter().all(|c| c.terms.is_empty())
    }

    pub fn result_set(&self) -> ResultSet {
        ResultSet {
            seed: self.seed.clone(),
            lists: self
                .concepts
                .iter()
                .map(|c| c.terms.iter().map(|t| (t.term.clone(), t.score)).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::FixtureParse {
            entry: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// Runs the snippet queries and returns deduplicated sentences.
fn snippet_sentences<P: SearchProvider + ?Sized>(
    seed: &str,
    cfg: &PipelineConfig,
    provider: &P,
    diag: &mut Diagnostics,
) -> Result<Vec<String>> {
    let mut seen = BTreeSet::new();
    let mut sentences = Vec::new();
    for q in build_queries(seed, &cfg.lingex)? {
        diag.snippet_queries.push(q.clone());
        let hits = match provider.search(&q, cfg.provider.snippet_results) {
            Ok(h) => h,
            Err(e) => {
                diag.query_errors.push(e.to_string());
                continue;
            }
        };
        for h in hits {
            if !seen.insert((h.url.clone(), h.title.clone(), h.snippet.clone())) {
                continue;
            }
            diag.snippet_hits += 1;
            sentences.extend(split_sentences(&h.title));
            sentences.extend(split_sentences(&h.snippet));
        }
    }
    diag.sentences = sentences.len();
    Ok(sentences)
}

/// One pseudo-concept over all lists, keeping terms found in at least
/// `eta · |L|` lists (and the seed).
fn undisambiguated(lists: &[WebList], seed: &str, eta: f64) -> (ConceptCluster, usize) {
    let mut support: BTreeMap<&String, usize> = BTreeMap::new();
    for l in lists {
        for t in l.terms.iter().collect::<BTreeSet<_>>() {
            *support.entry(t).or_default() += 1;
        }
    }
    let min_support = eta * lists.len() as f64;
    let all = support.len();
    let member_terms: BTreeSet<String> = support
        .into_iter()
        .filter(|(t, n)| (*n as f64) >= min_support || **t == seed)
        .map(|(t, _)| t.clone())
        .collect();
    let filtered = all - member_terms.len();
    let mut ids: Vec<String> = lists.iter().map(|l| l.id.clone()).collect();
    ids.sort();
    let cluster = ConceptCluster {
        id: ids.first().cloned().unwrap_or_default(),
        contains_seed: member_terms.contains(seed),
        lists: ids,
        member_terms,
    };
    (cluster, filtered)
}

pub fn mine<P: SearchProvider + ?Sized>(
    seed: &str,
    cfg: &PipelineConfig,
    provider: &P,
) -> Result<MiningReport> {
    mine_with_weblists(seed, cfg, provider).map(|(report, _)| report)
}

/// Like [`mine`], also returning every extracted web list sorted by id.
pub fn mine_with_weblists<P: SearchProvider + ?Sized>(
    seed: &str,
    cfg: &PipelineConfig,
    provider: &P,
) -> Result<(MiningReport, Vec<WebList>)> {
    let seed = normalize_term(seed);
    if seed.is_empty() {
        return Err(Error::InvalidArgument("empty seed".into()));
    }
    cfg.validate()?;
    let mut diag = Diagnostics::default();
    let mut report = MiningReport {
        seed: seed.clone(),
        disambiguation: cfg.disambiguation,
        initial_candidates: Vec::new(),
        weblist_count: 0,
        concepts: Vec::new(),
        diagnostics: Diagnostics::default(),
    };

    let sentences = snippet_sentences(&seed, cfg, provider, &mut diag)?;
    report.initial_candidates = extract_initial_candidates(&seed, &sentences, &cfg.lingex);
    if report.initial_candidates.is_empty() {
        diag.stage_failure = Some("no initial candidates".into());
        report.diagnostics = diag;
        return Ok((report, Vec::new()));
    }

    let t = ExtendedSeedSet::new(
        &seed,
        report.initial_candidates.iter().map(|c| c.text.clone()),
    );
    let expansion = expand(&t, provider, &cfg.expand, &cfg.wrapper)?;
    diag.expansion_queries = expansion.diagnostics.queries_issued.clone();
    diag.query_errors
        .extend(expansion.diagnostics.query_errors.iter().cloned());
    diag.pages_processed = expansion.diagnostics.pages_processed;
    diag.page_errors = expansion.diagnostics.page_errors.clone();
    diag.wrappers_learned = expansion.diagnostics.wrappers_learned;
    let lists = expansion.weblists;
    report.weblist_count = lists.len();
    if lists.is_empty() {
        diag.stage_failure = Some("no web lists extracted".into());
        report.diagnostics = diag;
        return Ok((report, lists));
    }

    let concepts: Vec<ConceptCluster> = if cfg.disambiguation {
        let clusters = cluster_weblists(&lists, &expansion.background, &seed, &cfg.concept);
        diag.clusters_total = clusters.len();
        let kept = filter_clusters(clusters, &seed, lists.len(), cfg.concept.eta);
        diag.clusters_filtered = diag.clusters_total - kept.len();
        kept
    } else {
        let (cluster, filtered) = undisambiguated(&lists, &seed, cfg.concept.eta);
        diag.clusters_total = 1;
        diag.terms_filtered = filtered;
        vec![cluster]
    };
    if concepts.is_empty() {
        diag.stage_failure = Some("no concept found".into());
        report.diagnostics = diag;
        return Ok((report, lists));
    }

    let by_id: BTreeMap<&str, &WebList> = lists.iter().map(|l| (l.id.as_str(), l)).collect();
    for c in &concepts {
        let members: Vec<&WebList> = c
            .lists
            .iter()
            .filter_map(|id| by_id.get(id.as_str()).copied())
            .collect();
        let graph = build_relation_graph(&seed, c, &members, &cfg.rank);
        let walk = rwr_scores(&graph, &cfg.rank);
        if !walk.converged {
            diag.unconverged_walks += 1;
        }
        let ranked = rank_terms(&graph, &walk.scores);
        for (term, _) in &ranked {
            let sources = diag.provenance.entry(term.clone()).or_default();
            for l in members.iter().filter(|l| l.contains(term)) {
                if !sources.contains(&l.id) {
                    sources.push(l.id.clone());
                }
            }
            sources.sort();
        }
        report.concepts.push(ConceptReport {
            id: c.id.clone(),
            list_count: c.lists.len(),
            terms: ranked
                .into_iter()
                .map(|(term, score)| RankedTerm { term, score })
                .collect(),
        });
    }
    report.diagnostics = diag;
    Ok((report, lists))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub seed: String,
    /// `(n, P@n)` in the requested order.
    pub precision_at: Vec<(usize, f64)>,
    pub ap: f64,
    pub aap: f64,
    pub iaap: f64,
    pub purity: f64,
    pub inverse_purity: f64,
    pub f: f64,
    pub diagnostics: Vec<String>,
}

pub fn evaluate(
    report: &MiningReport,
    gold: &GoldAnswer,
    n_values: &[usize],
) -> Result<MetricTable> {
    if normalize_term(&report.seed) != normalize_term(&gold.seed) {
        return Err(Error::InvalidArgument(format!(
            "report seed {:?} does not match gold seed {:?}",
            report.seed, gold.seed
        )));
    }
    if n_values.contains(&0) {
        return Err(Error::InvalidArgument("P@n needs n >= 1".into()));
    }
    let results = report.result_set();
    let term_lists: Vec<Vec<&str>> = results
        .lists
        .iter()
        .map(|l| l.iter().map(|(t, _)| t.as_str()).collect())
        .collect();
    let merged = interleave(&term_lists);
    let union = gold.union();
    let union_list: Vec<&String> = union.iter().collect();
    let mut diagnostics = Vec::new();
    let quality = cluster_quality(&results, gold);
    if quality.is_none() {
        diagnostics.push("no result term is in the gold lists; cluster quality set to 0".into());
    }
    let q = quality.unwrap_or(crate::eval::ClusterQuality {
        purity: 0.0,
        inverse_purity: 0.0,
        f: 0.0,
    });
    Ok(MetricTable {
        seed: report.seed.clone(),
        precision_at: n_values
            .iter()
            .map(|&n| (n, precision_at_n(&merged, &union, n)))
            .collect(),
        ap: average_precision(&merged, &union_list),
        aap: aap(&results, gold),
        iaap: iaap(&results, gold),
        purity: q.purity,
        inverse_purity: q.inverse_purity,
        f: q.f,
        diagnostics,
    })
}

/// Fixed-width text rendering, one header row and one value row.
pub fn render_table(t: &MetricTable) -> String {
    let mut headers: Vec<String> = vec!["Seed".into()];
    let mut values: Vec<String> = vec![t.seed.clone()];
    for (n, p) in &t.precision_at {
        headers.push(format!("P@{n}"));
        values.push(format!("{p:.3}"));
    }
    for (h, v) in [
        ("AP", t.ap),
        ("AAP", t.aap),
        ("IAAP", t.iaap),
        ("Purity", t.purity),
        ("InvPurity", t.inverse_purity),
        ("F", t.f),
    ] {
        headers.push(h.into());
        values.push(format!("{v:.3}"));
    }
    let widths: Vec<usize> = headers
        .iter()
        .zip(&values)
        .map(|(h, v)| h.chars().count().max(v.chars().count()))
        .collect();
    let row = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_owned()
    };
    let mut out = String::new();
    out.push_str(&row(&headers));
    out.push('\n');
    out.push_str(&row(&values));
    out.push('\n');
    for d in &t.diagnostics {
        out.push_str(&format!("note: {d}\n"));
    }
    out
}
