//! Grouping web lists into concepts.
//!
//! Two lists are similar when their term sets overlap and the text around
//! them talks about the same thing. Lists are merged bottom-up with average
//! linkage until no pair of clusters is similar enough, and clusters that do
//! not contain the seed or are supported by too few lists are discarded.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::expand::WebList;
use crate::text::{normalize_term, tokenize};
use crate::{Error, Result};

/// Document frequencies of context tokens over the pages of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackgroundCorpus {
    doc_count: usize,
    doc_freq: BTreeMap<String, usize>,
}

impl BackgroundCorpus {
    pub fn add_document(&mut self, text: &str) {
        self.doc_count += 1;
        let words: BTreeSet<String> = tokenize(text).into_iter().collect();
        for w in words {
            *self.doc_freq.entry(w).or_default() += 1;
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn doc_freq(&self, word: &str) -> usize {
        self.doc_freq.get(word).copied().unwrap_or(0)
    }

    /// `ln(|B| / (df + 1))`, never negative.
    pub fn idf(&self, word: &str) -> f64 {
        idf(self.doc_count, self.doc_freq(word))
    }
}

fn idf(doc_count: usize, df: usize) -> f64 {
    (doc_count as f64 / (df as f64 + 1.0)).ln().max(0.0)
}

/// Sparse tf-idf vector of a list's context.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContextVector {
    weights: BTreeMap<String, f64>,
    norm: f64,
}

impl ContextVector {
    /// Zero weights are not stored.
    pub fn from_weights(weights: impl IntoIterator<Item = (String, f64)>) -> Self {
        let weights: BTreeMap<String, f64> =
            weights.into_iter().filter(|(_, w)| *w > 0.0).collect();
        let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        Self { weights, norm }
    }

    pub fn weight(&self, word: &str) -> f64 {
        self.weights.get(word).copied().unwrap_or(0.0)
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Zero when either vector has zero norm.
    pub fn cosine(&self, other: &ContextVector) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        let (small, large) = if self.weights.len() <= other.weights.len() {
            (self, other)
        } else {
            (other, self)
        };
        let dot: f64 = small.weights.iter().map(|(k, w)| w * large.weight(k)).sum();
        (dot / (self.norm * other.norm)).clamp(0.0, 1.0)
    }
}

pub fn context_vector(wl: &WebList, background: &BackgroundCorpus) -> ContextVector {
    let mut tf: BTreeMap<String, usize> = BTreeMap::new();
    for tok in tokenize(&wl.context) {
        *tf.entry(tok).or_default() += 1;
    }
    ContextVector::from_weights(tf.into_iter().map(|(w, n)| {
        let weight = n as f64 * background.idf(&w);
        (w, weight)
    }))
}

/// `|a ∩ b| / min(|a|, |b|)`.
pub fn content_similarity(a: &[String], b: &[String]) -> f64 {
    let sa: BTreeSet<&String> = a.iter().collect();
    let sb: BTreeSet<&String> = b.iter().collect();
    let min = sa.len().min(sb.len());
    if min == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / min as f64
}

/// `λ · content + (1 − λ) · cosine`.
pub fn list_similarity(
    a: &WebList,
    va: &ContextVector,
    b: &WebList,
    vb: &ContextVector,
    lambda: f64,
) -> f64 {
    let s = lambda * content_similarity(&a.terms, &b.terms) + (1.0 - lambda) * va.cosine(vb);
    s.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConceptConfig {
    pub lambda: f64,
    pub threshold: f64,
    pub eta: f64,
}

impl Default for ConceptConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            threshold: 0.65,
            eta: 0.05,
        }
    }
}

impl ConceptConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.lambda)
            || !unit.contains(&self.threshold)
            || !unit.contains(&self.eta)
        {
            return Err(Error::Config(
                "lambda, threshold and eta must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptCluster {
    /// Smallest member list id.
    pub id: String,
    /// Member list ids, sorted.
    pub lists: Vec<String>,
    pub member_terms: BTreeSet<String>,
    pub contains_seed: bool,
}

/// Agglomerative clustering of a symmetric similarity matrix.
///
/// The two clusters with the highest average pairwise similarity are merged
/// until that similarity drops below `threshold`. Ties go to the pair whose
/// labels are lexicographically smallest. Returns groups of item indices,
/// each sorted, ordered by their smallest label.
pub fn average_linkage(sim: &[Vec<f64>], labels: &[String], threshold: f64) -> Vec<Vec<usize>> {
    let n = labels.len();
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut label: Vec<String> = labels.to_vec();
    let mut link: Vec<Vec<f64>> = sim.to_vec();

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if members[i].is_none() {
                continue;
            }
            for j in (i + 1)..n {
                if members[j].is_none() {
                    continue;
                }
                let s = link[i][j];
                let better = match best {
                    None => true,
                    Some((bs, bi, bj)) => {
                        s > bs || (s == bs && pair_key(&label, i, j) < pair_key(&label, bi, bj))
                    }
                };
                if better {
                    best = Some((s, i, j));
                }
            }
        }
        let Some((s, i, j)) = best else { break };
        if s < threshold {
            break;
        }
        let (ni, nj) = (
            members[i].as_ref().map_or(0, Vec::len) as f64,
            members[j].as_ref().map_or(0, Vec::len) as f64,
        );
        for k in 0..n {
            if k == i || k == j || members[k].is_none() {
                continue;
            }
            let merged = (ni * link[i][k] + nj * link[j][k]) / (ni + nj);
            link[i][k] = merged;
            link[k][i] = merged;
        }
        let mut moved = members[j].take().unwrap_or_default();
        let target = members[i].as_mut().expect("live cluster");
        target.append(&mut moved);
        target.sort_unstable();
        if label[j] < label[i] {
            label[i] = label[j].clone();
        }
    }

    let mut out: Vec<(String, Vec<usize>)> = members
        .into_iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|m| (label[i].clone(), m)))
        .collect();
    out.sort();
    out.into_iter().map(|(_, m)| m).collect()
}

fn pair_key(label: &[String], i: usize, j: usize) -> (&str, &str) {
    let (a, b) = (label[i].as_str(), label[j].as_str());
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Clusters the lists; `seed` only sets the `contains_seed` flag.
pub fn cluster_weblists(
    lists: &[WebList],
    background: &BackgroundCorpus,
    seed: &str,
    cfg: &ConceptConfig,
) -> Vec<ConceptCluster> {
    let vectors: Vec<ContextVector> = lists
        .iter()
        .map(|l| context_vector(l, background))
        .collect();
    let n = lists.len();
    let mut sim = vec![vec![0.0; n]; n];
    for i in 0..n {
        sim[i][i] = 1.0;
        for j in (i + 1)..n {
            let s = list_similarity(&lists[i], &vectors[i], &lists[j], &vectors[j], cfg.lambda);
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    let labels: Vec<String> = lists.iter().map(|l| l.id.clone()).collect();
    let seed = normalize_term(seed);
    average_linkage(&sim, &labels, cfg.threshold)
        .into_iter()
        .map(|group| {
            let mut ids: Vec<String> = group.iter().map(|&i| lists[i].id.clone()).collect();
            ids.sort();
            let member_terms: BTreeSet<String> = group
                .iter()
                .flat_map(|&i| lists[i].terms.iter().cloned())
                .collect();
            ConceptCluster {
                id: ids[0].clone(),
                contains_seed: member_terms.iter().any(|t| normalize_term(t) == seed),
                lists: ids,
                member_terms,
            }
        })
        .collect()
}

/// Keeps clusters that contain the seed and have at least `eta · total_lists`
/// lists, largest first.
pub fn filter_clusters(
    clusters: Vec<ConceptCluster>,
    seed: &str,
    total_lists: usize,
    eta: f64,
) -> Vec<ConceptCluster> {
    let seed = normalize_term(seed);
    let min_support = eta * total_lists as f64;
    let mut kept: Vec<ConceptCluster> = clusters
        .into_iter()
        .filter(|c| c.member_terms.iter().any(|t| normalize_term(t) == seed))
        .filter(|c| (c.lists.len() as f64) >= min_support)
        .collect();
    kept.sort_by(|a, b| {
        b.lists
            .len()
            .cmp(&a.lists.len())
            .then_with(|| a.id.cmp(&b.id))
    });
    kept
}
