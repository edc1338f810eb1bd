//! Ranking the terms of a concept by random walk with restart.
//!
//! Terms, the web lists that contain them and the affixes they share form
//! an undirected graph. A walker starts at the seed, follows a random edge
//! and jumps back to the seed with probability `theta`; the stationary
//! visiting probability of a term is its saliency.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::concept::ConceptCluster;
use crate::expand::WebList;
use crate::text::normalize_term;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RwrConfig {
    pub theta: f64,
    pub sigma: f64,
    pub max_iters: usize,
    /// Longest affix considered, in characters.
    pub max_affix_len: usize,
}

impl Default for RwrConfig {
    fn default() -> Self {
        Self {
            theta: 0.2,
            sigma: 0.001,
            max_iters: 1000,
            max_affix_len: 3,
        }
    }
}

impl RwrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.theta.is_nan()
            || self.theta <= 0.0
            || self.theta >= 1.0
            || self.sigma.is_nan()
            || self.sigma <= 0.0
            || self.max_iters == 0
        {
            return Err(Error::Config(
                "theta must be in (0, 1), sigma > 0 and max_iters > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Leading and trailing character n-grams (`1 ≤ n ≤ max_len`, `n ≤ |t|`)
/// shared by at least two distinct terms, mapped to the terms having them.
pub fn extract_affixes<S: AsRef<str>>(
    terms: &[S],
    max_len: usize,
) -> BTreeMap<String, BTreeSet<String>> {
    let mut by_affix: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for t in terms {
        let t = t.as_ref();
        let chars: Vec<char> = t.chars().collect();
        for n in 1..=max_len.min(chars.len()) {
            let prefix: String = chars[..n].iter().collect();
            let suffix: String = chars[chars.len() - n..].iter().collect();
            by_affix.entry(prefix).or_default().insert(t.to_owned());
            by_affix.entry(suffix).or_default().insert(t.to_owned());
        }
    }
    by_affix.retain(|_, ts| ts.len() >= 2);
    by_affix
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "label", rename_all = "lowercase")]
pub enum Vertex {
    Term(String),
    List(String),
    Affix(String),
}

#[derive(Debug, Clone)]
pub struct RelationGraph {
    pub vertices: Vec<Vertex>,
    /// Sorted neighbour indices per vertex.
    pub adjacency: Vec<Vec<usize>>,
    pub seed: usize,
}

impl RelationGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.vertices.iter().position(|x| x == v)
    }
}

/// Terms are linked to the lists containing them and to their shared
/// affixes. The seed is always a vertex.
pub fn build_relation_graph(
    seed: &str,
    concept: &ConceptCluster,
    weblists: &[&WebList],
    cfg: &RwrConfig,
) -> RelationGraph {
    let seed = normalize_term(seed);
    let mut terms: BTreeSet<String> = concept.member_terms.clone();
    terms.insert(seed.clone());
    let term_list: Vec<&String> = terms.iter().collect();
    let affixes = extract_affixes(&term_list, cfg.max_affix_len);

    let mut vertices: Vec<Vertex> = terms.iter().cloned().map(Vertex::Term).collect();
    let mut lists: Vec<&WebList> = weblists
        .iter()
        .copied()
        .filter(|l| concept.lists.contains(&l.id))
        .collect();
    lists.sort_by(|a, b| a.id.cmp(&b.id));
    lists.dedup_by(|a, b| a.id == b.id);
    let list_base = vertices.len();
    vertices.extend(lists.iter().map(|l| Vertex::List(l.id.clone())));
    let affix_base = vertices.len();
    vertices.extend(affixes.keys().cloned().map(Vertex::Affix));

    let term_index: BTreeMap<&str, usize> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); vertices.len()];
    let mut link = |a: usize, b: usize| {
        adjacency[a].insert(b);
        adjacency[b].insert(a);
    };
    for (k, l) in lists.iter().enumerate() {
        for t in &l.terms {
            if let Some(&ti) = term_index.get(t.as_str()) {
                link(ti, list_base + k);
            }
        }
    }
    for (k, members) in affixes.values().enumerate() {
        for t in members {
            link(term_index[t.as_str()], affix_base + k);
        }
    }
    RelationGraph {
        vertices,
        adjacency: adjacency
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
        seed: term_index[seed.as_str()],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwrResult {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration of `v ← θ·e_seed + (1−θ)·v·A*` where `A*` is the
/// row-normalized adjacency; isolated vertices send their mass to the seed.
pub fn rwr(adjacency: &[Vec<usize>], seed: usize, cfg: &RwrConfig) -> RwrResult {
    let n = adjacency.len();
    let mut v = vec![0.0; n];
    v[seed] = 1.0;
    let mut next = vec![0.0; n];
    for it in 1..=cfg.max_iters {
        next.iter_mut().for_each(|x| *x = 0.0);
        next[seed] += cfg.theta;
        for (i, nbrs) in adjacency.iter().enumerate() {
            let mass = (1.0 - cfg.theta) * v[i];
            if mass == 0.0 {
                continue;
            }
            if nbrs.is_empty() {
                next[seed] += mass;
            } else {
                let share = mass / nbrs.len() as f64;
                for &j in nbrs {
                    next[j] += share;
                }
            }
        }
        let diff = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if diff <= cfg.sigma {
            return RwrResult {
                scores: v,
                iterations: it,
                converged: true,
            };
        }
    }
    RwrResult {
        scores: v,
        iterations: cfg.max_iters,
        converged: false,
    }
}

pub fn rwr_scores(g: &RelationGraph, cfg: &RwrConfig) -> RwrResult {
    rwr(&g.adjacency, g.seed, cfg)
}

/// Term vertices other than the seed, by descending score. Scores are
/// compared after rounding to 1e-12 so that float noise cannot reorder
/// structurally tied terms; ties are broken lexicographically.
pub fn rank_terms(g: &RelationGraph, scores: &[f64]) -> Vec<(String, f64)> {
    let quantize = |s: f64| (s * 1e12).round() as i64;
    let mut out: Vec<(String, f64)> = g
        .vertices
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != g.seed)
        .filter_map(|(i, v)| match v {
            Vertex::Term(t) => Some((t.clone(), scores[i])),
            _ => None,
        })
        .collect();
    out.sort_by(|a, b| {
        quantize(b.1)
            .cmp(&quantize(a.1))
            .then_with(|| a.0.cmp(&b.0))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::DomPath;
    use crate::wrapper::Wrapper;

    fn wl(id: &str, terms: &[&str]) -> WebList {
        WebList {
            id: id.into(),
            terms: terms.iter().map(|s| s.to_string()).collect(),
            source_url: "u".into(),
            wrapper: Wrapper {
                l: "<li>".into(),
                r: "</li>".into(),
                p: DomPath::from_tags(["root", "li", "#text"]),
            },
            context: String::new(),
        }
    }

    fn concept(lists: &[&WebList]) -> ConceptCluster {
        ConceptCluster {
            id: lists[0].id.clone(),
            lists: lists.iter().map(|l| l.id.clone()).collect(),
            member_terms: lists.iter().flat_map(|l| l.terms.iter().cloned()).collect(),
            contains_seed: true,
        }
    }

    /// Solves `v (I − (1−θ) A*) = θ e_seed` by Gaussian elimination.
    #[allow(clippy::needless_range_loop)]
    fn solve(adjacency: &[Vec<usize>], seed: usize, theta: f64) -> Vec<f64> {
        let n = adjacency.len();
        let mut m = vec![vec![0.0; n + 1]; n];
        for j in 0..n {
            m[j][j] = 1.0;
        }
        for (i, nbrs) in adjacency.iter().enumerate() {
            if nbrs.is_empty() {
                m[seed][i] -= 1.0 - theta;
            }
            for &j in nbrs {
                m[j][i] -= (1.0 - theta) / nbrs.len() as f64;
            }
        }
        m[seed][n] = theta;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
                .unwrap();
            m.swap(c, p);
            for r in 0..n {
                if r != c {
                    let f = m[r][c] / m[c][c];
                    for k in c..=n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
        (0..n).map(|i| m[i][n] / m[i][i]).collect()
    }

    #[test]
    fn affixes() {
        let a = extract_affixes(&["北京大学", "斯坦福大学"], 3);
        assert_eq!(a.keys().collect::<Vec<_>>(), ["大学", "学"]);
        assert_eq!(a["大学"].len(), 2);
        assert!(extract_affixes(&["宝马", "奔驰"], 3).is_empty());
        let a = extract_affixes(&["a", "ab"], 3);
        assert_eq!(a.keys().collect::<Vec<_>>(), ["a"]);
    }

    #[test]
    fn star_graph() {
        let l = wl("l1", &["x", "y", "z"]);
        let g = build_relation_graph("x", &concept(&[&l]), &[&l], &RwrConfig::default());
        assert_eq!(g.vertices.len(), 4);
        let li = g.index_of(&Vertex::List("l1".into())).unwrap();
        assert_eq!(g.degree(li), 3);
        assert_eq!(g.vertices[g.seed], Vertex::Term("x".into()));
    }

    #[test]
    fn two_list_graph_shape() {
        let wl1 = wl("wl1", &["c1", "c2", "c3"]);
        let wl2 = wl("wl2", &["c3", "c4"]);
        let g = build_relation_graph(
            "c1",
            &concept(&[&wl1, &wl2]),
            &[&wl1, &wl2],
            &RwrConfig::default(),
        );
        let idx = |v: Vertex| g.index_of(&v).unwrap();
        let c3 = idx(Vertex::Term("c3".into()));
        assert!(g.adjacency[c3].contains(&idx(Vertex::List("wl1".into()))));
        assert!(g.adjacency[c3].contains(&idx(Vertex::List("wl2".into()))));
        // All four terms share the leading "c".
        let pf = idx(Vertex::Affix("c".into()));
        assert_eq!(g.degree(pf), 4);
        for (i, v) in g.vertices.iter().enumerate() {
            for &j in &g.adjacency[i] {
                let kinds = (v, &g.vertices[j]);
                assert!(matches!(
                    kinds,
                    (Vertex::Term(_), Vertex::List(_) | Vertex::Affix(_))
                        | (Vertex::List(_) | Vertex::Affix(_), Vertex::Term(_))
                ));
            }
        }
    }

    #[test]
    fn single_vertex() {
        let r = rwr(&[vec![]], 0, &RwrConfig::default());
        assert!(r.converged);
        assert!((r.scores[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_graph_matches_linear_solve() {
        let cfg = RwrConfig::default();
        let adj = vec![vec![1], vec![0, 2], vec![1]];
        let r = rwr(&adj, 0, &cfg);
        let exact = solve(&adj, 0, cfg.theta);
        assert!(r.converged);
        for (a, b) in r.scores.iter().zip(&exact) {
            assert!((a - b).abs() <= 10.0 * cfg.sigma, "{a} vs {b}");
        }
        // Closed form: v0 = θ + (1−θ) v1 / 2, v1 = (1−θ)(v0 + v2), v2 = (1−θ) v1 / 2.
        let t = cfg.theta;
        let q = 1.0 - t;
        let v1 = q * t / (1.0 - q * q);
        assert!((exact[1] - v1).abs() < 1e-12);
        assert!((exact[2] - q * v1 / 2.0).abs() < 1e-12);

        let l = wl("l", &["seed", "other"]);
        let g = build_relation_graph("seed", &concept(&[&l]), &[&l], &cfg);
        let scores = rwr_scores(&g, &cfg).scores;
        let ranked = rank_terms(&g, &scores);
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].0, "other");
        assert!((ranked[0].1 - q * v1 / 2.0).abs() <= 10.0 * cfg.sigma);
    }

    #[test]
    fn symmetric_terms_tie_lexicographically() {
        let l = wl("l", &["s", "b", "a"]);
        let cfg = RwrConfig::default();
        let g = build_relation_graph("s", &concept(&[&l]), &[&l], &cfg);
        let ranked = rank_terms(&g, &rwr_scores(&g, &cfg).scores);
        let names: Vec<&str> = ranked.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(names, ["a", "b"]);
        assert!((ranked[0].1 - ranked[1].1).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let cfg = RwrConfig {
            max_iters: 1,
            sigma: 1e-12,
            ..Default::default()
        };
        assert!(!rwr(&[vec![1], vec![0]], 0, &cfg).converged);
    }

    #[test]
    fn dangling_mass_returns_to_seed() {
        let cfg = RwrConfig::default();
        let adj = vec![vec![1], vec![0], vec![]];
        let r = rwr(&adj, 2, &cfg);
        assert!((r.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((r.scores[2] - 1.0).abs() < 1e-12);
    }
}
