use std::collections::{BTreeMap, BTreeSet};

use super::{is_valid_wrapper, Wrapper, WrapperConfig};
use crate::dom::{DomTree, NodeId, NodeKind};

/// Upper bound on the length of a learned left or right context.
pub const MAX_CONTEXT_CHARS: usize = 60;

/// The raw source around an occurrence that contexts are learned from.
///
/// A window extends at most [`MAX_CONTEXT_CHARS`] characters and stops at
/// the first character owned by a text node other than the occurrence's
/// own node, so contexts consist of template markup plus same-node text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextWindows {
    pub left: String,
    pub right: String,
}

impl ContextWindows {
    pub fn around(tree: &DomTree, start: usize, end: usize) -> Self {
        let own = tree.node_at(start).ok();
        let foreign = |pos: usize| -> bool {
            let id = tree.node_at(pos).expect("in range");
            Some(id) != own && tree.node(id).kind == NodeKind::Text
        };
        let chars = tree.chars();
        let mut left_start = start;
        while left_start > 0 && start - left_start < MAX_CONTEXT_CHARS && !foreign(left_start - 1) {
            left_start -= 1;
        }
        let mut right_end = end;
        while right_end < chars.len() && right_end - end < MAX_CONTEXT_CHARS && !foreign(right_end)
        {
            right_end += 1;
        }
        Self {
            left: chars[left_start..start].iter().collect(),
            right: chars[end..right_end].iter().collect(),
        }
    }
}

struct SeedOccurrence {
    term: usize,
    node: NodeId,
    path: usize,
    left: String,
    right: String,
}

#[derive(Default)]
struct TrieNode {
    children: BTreeMap<char, usize>,
    occs: Vec<usize>,
}

/// Prefix tree over context strings, each tagged with the occurrences that
/// share it.
struct ContextTrie {
    nodes: Vec<TrieNode>,
}

impl ContextTrie {
    fn build<'a>(
        entries: impl Iterator<Item = (usize, Box<dyn Iterator<Item = char> + 'a>)>,
    ) -> Self {
        let mut nodes = vec![TrieNode::default()];
        for (occ, chars) in entries {
            let mut cur = 0;
            nodes[0].occs.push(occ);
            for c in chars {
                cur = match nodes[cur].children.get(&c) {
                    Some(&n) => n,
                    None => {
                        nodes.push(TrieNode::default());
                        let n = nodes.len() - 1;
                        nodes[cur].children.insert(c, n);
                        n
                    }
                };
                nodes[cur].occs.push(occ);
            }
        }
        Self { nodes }
    }

    /// Non-empty strings shared by occurrences of at least `min_distinct`
    /// distinct terms that cannot be extended without losing one of those
    /// occurrences, with the occurrences sharing them.
    fn maximal_common(
        &self,
        occs: &[SeedOccurrence],
        min_distinct: usize,
    ) -> Vec<(Vec<char>, Vec<usize>)> {
        let is_common = |n: usize| {
            let terms: BTreeSet<usize> = self.nodes[n].occs.iter().map(|&o| occs[o].term).collect();
            terms.len() >= min_distinct
        };
        let mut out = Vec::new();
        if !is_common(0) {
            return out;
        }
        let mut stack: Vec<(usize, Vec<char>)> = vec![(0, Vec::new())];
        while let Some((n, prefix)) = stack.pop() {
            let mut extended = false;
            for (&c, &child) in &self.nodes[n].children {
                if is_common(child) {
                    extended |= self.nodes[child].occs.len() == self.nodes[n].occs.len();
                    let mut p = prefix.clone();
                    p.push(c);
                    stack.push((child, p));
                }
            }
            if !extended && !prefix.is_empty() {
                out.push((prefix, self.nodes[n].occs.clone()));
            }
        }
        out
    }
}

fn longest_common_left(
    occs: &[SeedOccurrence],
    subset: &[usize],
    min_distinct: usize,
) -> Vec<(String, Vec<usize>)> {
    let trie = ContextTrie::build(subset.iter().map(|&o| {
        (
            o,
            Box::new(occs[o].left.chars().rev()) as Box<dyn Iterator<Item = char>>,
        )
    }));
    trie.maximal_common(occs, min_distinct)
        .into_iter()
        .map(|(rev, members)| (rev.into_iter().rev().collect(), members))
        .collect()
}

fn longest_common_right(
    occs: &[SeedOccurrence],
    subset: &[usize],
    min_distinct: usize,
) -> Vec<(String, Vec<usize>)> {
    let trie = ContextTrie::build(subset.iter().map(|&o| {
        (
            o,
            Box::new(occs[o].right.chars()) as Box<dyn Iterator<Item = char>>,
        )
    }));
    trie.maximal_common(occs, min_distinct)
        .into_iter()
        .map(|(chars, members)| (chars.into_iter().collect(), members))
        .collect()
}

fn seed_occurrences(seeds: &[String], page: &DomTree) -> Vec<SeedOccurrence> {
    let index: BTreeMap<&str, usize> = seeds
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let textual = |id: NodeId| {
        let n = page.node(id);
        matches!(n.kind, NodeKind::Text | NodeKind::Attr) && !n.hidden
    };
    page.find_occurrences(seeds)
        .into_iter()
        .filter_map(|o| {
            let first = page.node_at(o.pos).ok()?;
            let last = page.node_at(o.pos + o.len - 1).ok()?;
            if first != last || !textual(first) {
                return None;
            }
            let ctx = ContextWindows::around(page, o.pos, o.pos + o.len);
            Some(SeedOccurrence {
                term: index[o.term.as_str()],
                node: first,
                path: page.path_id(first),
                left: ctx.left,
                right: ctx.right,
            })
        })
        .collect()
}

/// Learns wrappers from the occurrences of the extended seeds on one page.
///
/// Occurrences are grouped by DOM path. Within a group every maximal left
/// context shared by at least `min_distinct_seeds` distinct seeds is paired
/// with the maximal right contexts of the occurrences it covers, and the
/// same is done starting from the right. Invalid wrappers are dropped, as is
/// any wrapper for which another wrapper covers exactly the same seed
/// occurrences with contexts that extend its own.
pub fn learn_wrappers<S: AsRef<str>>(
    extended_seeds: &[S],
    page: &DomTree,
    cfg: &WrapperConfig,
) -> Vec<Wrapper> {
    let seeds: Vec<String> = extended_seeds
        .iter()
        .map(|s| s.as_ref().trim().to_owned())
        .filter(|s| !s.is_empty())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let min_distinct = cfg.min_distinct_seeds.max(2);
    if seeds.len() < min_distinct {
        return Vec::new();
    }
    let occs = seed_occurrences(&seeds, page);

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, o) in occs.iter().enumerate() {
        groups.entry(o.path).or_default().push(i);
    }

    let mut learned: Vec<Wrapper> = Vec::new();
    for members in groups.values() {
        let distinct: BTreeSet<usize> = members.iter().map(|&o| occs[o].term).collect();
        if distinct.len() < min_distinct {
            continue;
        }
        let dom_path = page.path_of(occs[members[0]].node).clone();

        let mut candidates: BTreeSet<Wrapper> = BTreeSet::new();
        for (l, covered) in longest_common_left(&occs, members, min_distinct) {
            for (r, _) in longest_common_right(&occs, &covered, min_distinct) {
                candidates.insert(Wrapper {
                    l: l.clone(),
                    r,
                    p: dom_path.clone(),
                });
            }
        }
        for (r, covered) in longest_common_right(&occs, members, min_distinct) {
            for (l, _) in longest_common_left(&occs, &covered, min_distinct) {
                candidates.insert(Wrapper {
                    l,
                    r: r.clone(),
                    p: dom_path.clone(),
                });
            }
        }
        let valid: Vec<Wrapper> = candidates
            .into_iter()
            .filter(|w| is_valid_wrapper(w, cfg))
            .collect();

        let matched: Vec<BTreeSet<usize>> = valid
            .iter()
            .map(|w| {
                members
                    .iter()
                    .copied()
                    .filter(|&o| occs[o].left.ends_with(&w.l) && occs[o].right.starts_with(&w.r))
                    .collect()
            })
            .collect();
        for (i, w) in valid.iter().enumerate() {
            let dominated = valid.iter().enumerate().any(|(j, other)| {
                j != i
                    && matched[j] == matched[i]
                    && other.l.ends_with(&w.l)
                    && other.r.starts_with(&w.r)
            });
            if !dominated {
                learned.push(w.clone());
            }
        }
    }
    learned.sort();
    learned
}
