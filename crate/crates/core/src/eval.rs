//! Evaluation against gold coordinate-term lists.
//!
//! Terms are compared after trimming and NFC normalization. Term-level
//! metrics (P@n, AP) look at the round-robin merge of all result lists;
//! AAP and IAAP match each result list to its best gold list and vice
//! versa; purity, inverse purity and F compare result lists to gold lists
//! as clusterings.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::text::normalize_term;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldConcept {
    pub name: String,
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnswer {
    pub seed: String,
    pub concepts: Vec<GoldConcept>,
}

impl GoldAnswer {
    pub fn validate(&self) -> Result<()> {
        if self.concepts.is_empty() {
            return Err(Error::InvalidArgument("gold answer has no concepts".into()));
        }
        for (i, c) in self.concepts.iter().enumerate() {
            if c.terms.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "gold concept {i} ({}) is empty",
                    c.name
                )));
            }
            let mut seen = BTreeSet::new();
            for t in &c.terms {
                if !seen.insert(normalize_term(t)) {
                    return Err(Error::InvalidArgument(format!(
                        "gold concept {i} ({}) repeats {t:?}",
                        c.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GoldAnswer = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::FixtureParse {
                entry: path.display().to_string(),
                message: j.to_string(),
            },
            other => other,
        })
    }

    /// Normalized gold lists.
    pub fn lists(&self) -> Vec<Vec<String>> {
        self.concepts
            .iter()
            .map(|c| c.terms.iter().map(|t| normalize_term(t)).collect())
            .collect()
    }

    /// Deduplicated union of all gold lists.
    pub fn union(&self) -> BTreeSet<String> {
        self.lists().into_iter().flatten().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub seed: String,
    pub lists: Vec<Vec<(String, f64)>>,
}

impl ResultSet {
    fn term_lists(&self) -> Vec<Vec<String>> {
        self.lists
            .iter()
            .map(|l| l.iter().map(|(t, _)| normalize_term(t)).collect())
            .collect()
    }
}

/// First items of every list in list order, then second items, and so on.
/// Duplicates keep their first position.
pub fn interleave<S: AsRef<str>>(lists: &[Vec<S>]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let depth = lists.iter().map(Vec::len).max().unwrap_or(0);
    for k in 0..depth {
        for l in lists {
            if let Some(t) = l.get(k) {
                let t = normalize_term(t.as_ref());
                if seen.insert(t.clone()) {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// Fraction of the first `n` slots holding a gold term; missing slots
/// count as wrong.
pub fn precision_at_n<S: AsRef<str>>(merged: &[S], gold: &BTreeSet<String>, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let hits = merged
        .iter()
        .take(n)
        .filter(|t| gold.contains(&normalize_term(t.as_ref())))
        .count();
    hits as f64 / n as f64
}

/// `(1/|GL|) Σ_r cor(r) · P@r`.
pub fn average_precision<S: AsRef<str>, G: AsRef<str>>(rl: &[S], gl: &[G]) -> f64 {
    let gold: BTreeSet<String> = gl.iter().map(|g| normalize_term(g.as_ref())).collect();
    if gold.is_empty() {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (r, t) in rl.iter().enumerate() {
        if gold.contains(&normalize_term(t.as_ref())) {
            hits += 1;
            sum += hits as f64 / (r + 1) as f64;
        }
    }
    sum / gold.len() as f64
}

/// Result lists weighted by their length, each scored by its best gold list.
pub fn aap(results: &ResultSet, gold: &GoldAnswer) -> f64 {
    let rls = results.term_lists();
    let gls = gold.lists();
    let total: usize = rls.iter().map(Vec::len).sum();
    if total == 0 {
        return 0.0;
    }
    let weighted: f64 = rls
        .iter()
        .map(|rl| {
            let best = gls
                .iter()
                .map(|gl| average_precision(rl, gl))
                .fold(0.0, f64::max);
            rl.len() as f64 * best
        })
        .sum();
    weighted / total as f64
}

/// Gold lists weighted by their length, each scored by its best result list.
pub fn iaap(results: &ResultSet, gold: &GoldAnswer) -> f64 {
    let rls = results.term_lists();
    let gls = gold.lists();
    let total: usize = gls.iter().map(Vec::len).sum();
    if total == 0 {
        return 0.0;
    }
    let weighted: f64 = gls
        .iter()
        .map(|gl| {
            let best = rls
                .iter()
                .map(|rl| average_precision(rl, gl))
                .fold(0.0, f64::max);
            gl.len() as f64 * best
        })
        .sum();
    weighted / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterQuality {
    pub purity: f64,
    pub inverse_purity: f64,
    pub f: f64,
}

/// Purity, inverse purity and F of the result lists against the gold lists.
///
/// Result terms outside every gold list are dropped first, and gold lists
/// are restricted to the remaining terms. Purity is normalized by the
/// number of retained result entries, inverse purity and F by the size of
/// the restricted gold lists. Returns `None` when nothing is retained.
pub fn cluster_quality(results: &ResultSet, gold: &GoldAnswer) -> Option<ClusterQuality> {
    let union = gold.union();
    let rls: Vec<BTreeSet<String>> = results
        .term_lists()
        .into_iter()
        .map(|l| l.into_iter().filter(|t| union.contains(t)).collect())
        .collect();
    let retained: BTreeSet<&String> = rls.iter().flatten().collect();
    let gls: Vec<BTreeSet<String>> = gold
        .lists()
        .into_iter()
        .map(|l| l.into_iter().filter(|t| retained.contains(t)).collect())
        .collect();
    let n_clu: usize = rls.iter().map(BTreeSet::len).sum();
    let n_cat: usize = gls.iter().map(BTreeSet::len).sum();
    if n_clu == 0 || n_cat == 0 {
        return None;
    }
    let overlap = |a: &BTreeSet<String>, b: &BTreeSet<String>| a.intersection(b).count();

    let purity = rls
        .iter()
        .map(|rl| gls.iter().map(|gl| overlap(rl, gl)).max().unwrap_or(0))
        .sum::<usize>() as f64
        / n_clu as f64;
    let inverse_purity = gls
        .iter()
        .map(|gl| rls.iter().map(|rl| overlap(rl, gl)).max().unwrap_or(0))
        .sum::<usize>() as f64
        / n_cat as f64;
    let f1 = |rl: &BTreeSet<String>, gl: &BTreeSet<String>| {
        let o = overlap(rl, gl) as f64;
        if o == 0.0 {
            return 0.0;
        }
        let (p, r) = (o / rl.len() as f64, o / gl.len() as f64);
        2.0 * p * r / (p + r)
    };
    let f = gls
        .iter()
        .map(|gl| gl.len() as f64 * rls.iter().map(|rl| f1(rl, gl)).fold(0.0, f64::max))
        .sum::<f64>()
        / n_cat as f64;
    Some(ClusterQuality {
        purity,
        inverse_purity,
        f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold(lists: &[&[&str]]) -> GoldAnswer {
        GoldAnswer {
            seed: "s".into(),
            concepts: lists
                .iter()
                .enumerate()
                .map(|(i, l)| GoldConcept {
                    name: format!("c{i}"),
                    terms: l.iter().map(|s| s.to_string()).collect(),
                })
                .collect(),
        }
    }

    fn results(lists: &[&[&str]]) -> ResultSet {
        ResultSet {
            seed: "s".into(),
            lists: lists
                .iter()
                .map(|l| {
                    l.iter()
                        .enumerate()
                        .map(|(i, t)| (t.to_string(), 1.0 / (i + 1) as f64))
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn interleaving() {
        assert_eq!(
            interleave(&[vec!["t11", "t12"], vec!["t21", "t22"]]),
            ["t11", "t21", "t12", "t22"]
        );
        assert_eq!(interleave(&[vec!["a", "b"]]), ["a", "b"]);
        assert_eq!(
            interleave(&[vec!["a"], vec!["b", "c", "d"]]),
            ["a", "b", "c", "d"]
        );
        assert_eq!(
            interleave(&[vec!["a", "b"], vec!["a", "c"]]),
            ["a", "b", "c"]
        );
    }

    #[test]
    fn precision() {
        let g: BTreeSet<String> = (0..7).map(|i| format!("g{i}")).collect();
        let mut merged: Vec<String> = (0..7).map(|i| format!("g{i}")).collect();
        merged.extend(["x", "y", "z"].map(String::from));
        assert!((precision_at_n(&merged, &g, 10) - 0.7).abs() < 1e-12);
        assert_eq!(precision_at_n::<String>(&[], &g, 10), 0.0);
        assert_eq!(precision_at_n(&merged, &g, 5), 1.0);
        assert!((precision_at_n(&merged[..3], &g, 10) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn ap_hand_value() {
        let ap = average_precision(&["g1", "x", "g2"], &["g1", "g2", "g3"]);
        assert!((ap - 5.0 / 9.0).abs() < 1e-12);
        assert_eq!(average_precision::<&str, &str>(&[], &["g1"]), 0.0);
        assert_eq!(average_precision(&["b", "a"], &["a", "b"]), 1.0);
        assert!(average_precision(&["x", "a", "b"], &["a", "b"]) < 1.0);
    }

    #[test]
    fn nfc_and_whitespace_matching() {
        assert_eq!(average_precision(&[" e\u{301} "], &["\u{e9}"]), 1.0);
    }

    #[test]
    fn aap_weighted() {
        let g = gold(&[&["a", "b"], &["c", "d"]]);
        // AP(["a","b"], GL1) = 1, AP(["x","c"], GL2) = (1/2)/2 = 0.25.
        let r = results(&[&["a", "b"], &["x", "c"]]);
        assert!((aap(&r, &g) - (2.0 * 1.0 + 2.0 * 0.25) / 4.0).abs() < 1e-12);
        let r = results(&[&["a", "b"], &["c", "d"]]);
        assert_eq!(aap(&r, &g), 1.0);
        assert_eq!(iaap(&r, &g), 1.0);
        let r = results(&[&["x", "y"]]);
        assert_eq!(aap(&r, &g), 0.0);
    }

    #[test]
    fn aap_two_equal_lists() {
        // Against GL {a,b,c,d,e}: [a,b,c,d,x] has AP 4/5, [a,b,x,y,z] has AP 2/5.
        let g = gold(&[&["a", "b", "c", "d", "e"]]);
        let r = results(&[&["a", "b", "c", "d", "x"], &["a", "b", "x", "y", "z"]]);
        assert!((aap(&r, &g) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn iaap_weighted() {
        // |GL1| = 10 with best AP 0.5, |GL2| = 30 with best AP 0.9.
        let gl1: Vec<String> = (0..10).map(|i| format!("a{i}")).collect();
        let gl2: Vec<String> = (0..30).map(|i| format!("b{i}")).collect();
        let g = GoldAnswer {
            seed: "s".into(),
            concepts: vec![
                GoldConcept {
                    name: "a".into(),
                    terms: gl1.clone(),
                },
                GoldConcept {
                    name: "b".into(),
                    terms: gl2.clone(),
                },
            ],
        };
        let rl1: Vec<(String, f64)> = gl1[..5].iter().map(|t| (t.clone(), 1.0)).collect();
        let rl2: Vec<(String, f64)> = gl2[..27].iter().map(|t| (t.clone(), 1.0)).collect();
        let r = ResultSet {
            seed: "s".into(),
            lists: vec![rl1, rl2],
        };
        assert!((iaap(&r, &g) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn single_lists_reduce_to_ap() {
        let g = gold(&[&["a", "b", "c"]]);
        let r = results(&[&["a", "x", "b"]]);
        let ap = average_precision(&["a", "x", "b"], &["a", "b", "c"]);
        assert!((aap(&r, &g) - ap).abs() < 1e-12);
        assert!((iaap(&r, &g) - ap).abs() < 1e-12);
    }

    #[test]
    fn purity_family() {
        let g = gold(&[&["a", "b"], &["c", "d"]]);
        let q = cluster_quality(&results(&[&["a", "b"], &["c", "d"]]), &g).unwrap();
        assert_eq!((q.purity, q.inverse_purity, q.f), (1.0, 1.0, 1.0));

        let q = cluster_quality(&results(&[&["a", "b", "c", "d", "noise"]]), &g).unwrap();
        assert_eq!(q.purity, 0.5);
        assert_eq!(q.inverse_purity, 1.0);

        let g3 = gold(&[&["a", "b", "c"], &["d"]]);
        let q = cluster_quality(&results(&[&["a"], &["b"], &["c"], &["d"]]), &g3).unwrap();
        assert_eq!(q.purity, 1.0);
        assert_eq!(q.inverse_purity, 2.0 / 4.0);

        assert!(cluster_quality(&results(&[&["x"]]), &g).is_none());
    }

    #[test]
    fn gold_validation() {
        assert!(GoldAnswer::from_json(
            r#"{"seed":"s","concepts":[{"name":"a","terms":["x","y"]}]}"#
        )
        .is_ok());
        assert!(
            GoldAnswer::from_json(r#"{"seed":"s","concepts":[{"name":"a","terms":[]}]}"#).is_err()
        );
        assert!(GoldAnswer::from_json(
            r#"{"seed":"s","concepts":[{"name":"a","terms":["x"," x"]}]}"#
        )
        .is_err());
        let err = GoldAnswer::from_json("{\"seed\": \"s\",\n \"concepts\": [oops]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
