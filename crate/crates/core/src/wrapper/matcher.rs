//! Multi-pattern matching with a failure-link keyword automaton
//! (Aho–Corasick) over characters.

use std::collections::{BTreeMap, HashMap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternMatch {
    /// Index into [`MultiMatcher::patterns`].
    pub pattern: usize,
    /// Start character index.
    pub start: usize,
}

#[derive(Debug, Clone, Default)]
struct State {
    next: HashMap<char, usize>,
    fail: usize,
    /// Pattern ending exactly here.
    output: Option<usize>,
    /// Nearest state on the failure chain with an output.
    dict: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MultiMatcher {
    patterns: Vec<String>,
    lens: Vec<usize>,
    states: Vec<State>,
}

impl MultiMatcher {
    /// Builds the automaton. Empty and duplicate patterns are dropped;
    /// patterns keep their first-seen order.
    pub fn new<I, S>(patterns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = BTreeMap::new();
        let mut list = Vec::new();
        for p in patterns {
            let p = p.as_ref();
            if !p.is_empty() && !seen.contains_key(p) {
                seen.insert(p.to_owned(), list.len());
                list.push(p.to_owned());
            }
        }

        let mut states = vec![State::default()];
        let mut lens = Vec::with_capacity(list.len());
        for (idx, p) in list.iter().enumerate() {
            let mut s = 0;
            let mut n = 0;
            for c in p.chars() {
                n += 1;
                s = match states[s].next.get(&c) {
                    Some(&t) => t,
                    None => {
                        states.push(State::default());
                        let t = states.len() - 1;
                        states[s].next.insert(c, t);
                        t
                    }
                };
            }
            states[s].output = Some(idx);
            lens.push(n);
        }

        // Breadth-first failure links.
        let mut queue: VecDeque<usize> = states[0].next.values().copied().collect();
        while let Some(s) = queue.pop_front() {
            let edges: Vec<(char, usize)> = states[s].next.iter().map(|(&c, &t)| (c, t)).collect();
            for (c, t) in edges {
                let mut f = states[s].fail;
                let fail = loop {
                    if let Some(&u) = states[f].next.get(&c) {
                        if u != t {
                            break u;
                        }
                    }
                    if f == 0 {
                        break 0;
                    }
                    f = states[f].fail;
                };
                states[t].fail = fail;
                states[t].dict = if states[fail].output.is_some() {
                    Some(fail)
                } else {
                    states[fail].dict
                };
                queue.push_back(t);
            }
        }

        Self {
            patterns: list,
            lens,
            states,
        }
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    pub fn pattern(&self, idx: usize) -> &str {
        &self.patterns[idx]
    }

    /// Length in characters.
    pub fn pattern_len(&self, idx: usize) -> usize {
        self.lens[idx]
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// All occurrences, overlapping ones included, sorted by start position;
    /// at equal start the longer pattern comes first.
    pub fn find_matches(&self, text: &[char]) -> Vec<PatternMatch> {
        let mut out = Vec::new();
        if self.patterns.is_empty() {
            return out;
        }
        let mut s = 0;
        for (i, &c) in text.iter().enumerate() {
            loop {
                if let Some(&t) = self.states[s].next.get(&c) {
                    s = t;
                    break;
                }
                if s == 0 {
                    break;
                }
                s = self.states[s].fail;
            }
            let mut hit = if self.states[s].output.is_some() {
                Some(s)
            } else {
                self.states[s].dict
            };
            while let Some(h) = hit {
                let p = self.states[h].output.expect("dict links point at outputs");
                out.push(PatternMatch {
                    pattern: p,
                    start: i + 1 - self.lens[p],
                });
                hit = self.states[h].dict;
            }
        }
        out.sort_by(|a, b| {
            a.start
                .cmp(&b.start)
                .then_with(|| self.lens[b.pattern].cmp(&self.lens[a.pattern]))
        });
        out
    }

    pub fn find_matches_str(&self, text: &str) -> Vec<PatternMatch> {
        let chars: Vec<char> = text.chars().collect();
        self.find_matches(&chars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(patterns: &[String], text: &[char]) -> Vec<(String, usize)> {
        let mut uniq: Vec<&String> = Vec::new();
        for p in patterns {
            if !p.is_empty() && !uniq.contains(&p) {
                uniq.push(p);
            }
        }
        let mut out = Vec::new();
        for start in 0..text.len() {
            let mut here: Vec<(String, usize)> = uniq
                .iter()
                .filter(|p| {
                    let pc: Vec<char> = p.chars().collect();
                    start + pc.len() <= text.len() && text[start..start + pc.len()] == pc[..]
                })
                .map(|p| ((*p).clone(), start))
                .collect();
            here.sort_by_key(|(p, _)| std::cmp::Reverse(p.chars().count()));
            out.extend(here);
        }
        out
    }

    fn run(m: &MultiMatcher, text: &str) -> Vec<(String, usize)> {
        m.find_matches_str(text)
            .into_iter()
            .map(|x| (m.pattern(x.pattern).to_owned(), x.start))
            .collect()
    }

    #[test]
    fn overlapping_matches_in_order() {
        let m = MultiMatcher::new(["ab", "b"]);
        let expect: Vec<(String, usize)> = vec![
            ("ab".into(), 0),
            ("b".into(), 1),
            ("ab".into(), 2),
            ("b".into(), 3),
        ];
        assert_eq!(run(&m, "abab"), expect);
    }

    #[test]
    fn degenerate_inputs() {
        let none: [&str; 0] = [];
        assert!(run(&MultiMatcher::new(none), "abc").is_empty());
        assert!(run(&MultiMatcher::new(["abcd"]), "abc").is_empty());
        assert!(run(&MultiMatcher::new([""]), "abc").is_empty());
    }

    #[test]
    fn equal_start_longer_first() {
        let m = MultiMatcher::new(["<", "</span>", "</"]);
        let got = run(&m, "x</span>");
        assert_eq!(got[0], ("</span>".to_string(), 1));
        assert_eq!(got[1], ("</".to_string(), 1));
        assert_eq!(got[2], ("<".to_string(), 1));
    }

    #[test]
    fn cjk_positions_are_characters() {
        let m = MultiMatcher::new(["索尼", "尼"]);
        assert_eq!(
            run(&m, "宏碁索尼"),
            vec![("索尼".into(), 2), ("尼".into(), 3)]
        );
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(
            patterns in proptest::collection::vec("[ab<>尼]{0,4}", 0..8),
            text in "[ab<>尼]{0,60}",
        ) {
            let m = MultiMatcher::new(&patterns);
            let chars: Vec<char> = text.chars().collect();
            prop_assert_eq!(run(&m, &text), brute_force(&patterns, &chars));
        }
    }
}
