//! A permissive HTML parser that keeps character positions.
//!
//! The tree answers the two questions wrapper learning and extraction need:
//! which DOM path a node has, and which node owns a given character of the
//! source. Spans are half-open ranges of *character* (not byte) indices.
//!
//! Ownership works as follows: an element owns its own markup (start tag,
//! end tag, comments directly inside it), attribute values are `#attr` leaves
//! and text runs are `#text` leaves. Every character therefore has exactly
//! one deepest owner.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::wrapper::MultiMatcher;
use crate::{Error, Result};

pub const ROOT_TAG: &str = "root";
pub const TEXT_TAG: &str = "#text";
pub const ATTR_TAG: &str = "#attr";

const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];
const RAW_TEXT_ELEMENTS: &[&str] = &["script", "style", "textarea", "title"];
const HIDDEN_TEXT_ELEMENTS: &[&str] = &["script", "style"];

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Document,
    Element,
    Text,
    Attr,
}

/// Root-to-node sequence of tag names, compared as the joined string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomPath(String);

impl DomPath {
    pub fn from_tags<I, S>(tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let joined = tags
            .into_iter()
            .map(|t| t.as_ref().to_owned())
            .collect::<Vec<_>>()
            .join("/");
        DomPath(joined)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.0.split('/')
    }

    pub fn last(&self) -> &str {
        self.tags().last().unwrap_or("")
    }

    /// Whether the path ends in a text or attribute node.
    pub fn is_textual(&self) -> bool {
        matches!(self.last(), TEXT_TAG | ATTR_TAG)
    }
}

impl fmt::Display for DomPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone)]
pub struct DomNode {
    pub tag: String,
    pub kind: NodeKind,
    pub span: Range<usize>,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Text inside `<script>` or `<style>`.
    pub hidden: bool,
    path: usize,
}

/// An exact occurrence of a term in the page source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub term: String,
    /// Start character index.
    pub pos: usize,
    pub len: usize,
    pub path: DomPath,
}

#[derive(Debug, Clone)]
pub struct DomTree {
    source: String,
    chars: Vec<char>,
    nodes: Vec<DomNode>,
    paths: Vec<DomPath>,
    owner: Vec<NodeId>,
}

/// Visible text with whitespace collapsed, mapped back to source positions.
#[derive(Debug, Clone, Default)]
pub struct RenderedText {
    pub chars: Vec<char>,
    /// Source character index of each rendered character.
    pub source_pos: Vec<usize>,
}

impl RenderedText {
    /// Index of the first rendered character at or after `pos`.
    pub fn index_at_or_after(&self, pos: usize) -> usize {
        self.source_pos.partition_point(|&p| p < pos)
    }

    pub fn slice(&self, range: Range<usize>) -> String {
        self.chars[range].iter().collect()
    }
}

impl DomTree {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &DomNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[DomNode] {
        &self.nodes
    }

    pub fn path_of(&self, id: NodeId) -> &DomPath {
        &self.paths[self.nodes[id].path]
    }

    /// Interned path id of a node; equal ids mean equal paths.
    pub fn path_id(&self, id: NodeId) -> usize {
        self.nodes[id].path
    }

    /// Deepest node whose span contains `pos`.
    pub fn node_at(&self, pos: usize) -> Result<NodeId> {
        self.owner.get(pos).copied().ok_or(Error::OutOfRange {
            pos,
            len: self.chars.len(),
        })
    }

    pub fn path_at(&self, pos: usize) -> Result<&DomPath> {
        Ok(self.path_of(self.node_at(pos)?))
    }

    /// Maximal runs of characters owned by one node, in document order.
    /// Concatenating them reproduces the source.
    pub fn segments(&self) -> Vec<(NodeId, Range<usize>)> {
        let mut out: Vec<(NodeId, Range<usize>)> = Vec::new();
        for (pos, &id) in self.owner.iter().enumerate() {
            match out.last_mut() {
                Some((last, range)) if *last == id => range.end = pos + 1,
                _ => out.push((id, pos..pos + 1)),
            }
        }
        out
    }

    /// Every exact occurrence of every term, ordered by position.
    pub fn find_occurrences<S: AsRef<str>>(&self, terms: &[S]) -> Vec<Occurrence> {
        let matcher = MultiMatcher::new(terms.iter().map(|t| t.as_ref()));
        matcher
            .find_matches(&self.chars)
            .into_iter()
            .map(|m| Occurrence {
                term: matcher.pattern(m.pattern).to_owned(),
                pos: m.start,
                len: matcher.pattern_len(m.pattern),
                path: self.path_of(self.owner[m.start]).clone(),
            })
            .collect()
    }

    /// Visible text of the page: non-hidden `#text` nodes with whitespace
    /// runs collapsed to one space.
    pub fn rendered_text(&self) -> RenderedText {
        let mut out = RenderedText::default();
        let mut pending_space: Option<usize> = None;
        for node in &self.nodes {
            if node.kind != NodeKind::Text || node.hidden {
                continue;
            }
            if !out.chars.is_empty() {
                pending_space.get_or_insert(node.span.start);
            }
            for pos in node.span.clone() {
                let c = self.chars[pos];
                if c.is_whitespace() {
                    if !out.chars.is_empty() {
                        pending_space.get_or_insert(pos);
                    }
                } else {
                    if let Some(at) = pending_space.take() {
                        out.chars.push(' ');
                        out.source_pos.push(at);
                    }
                    out.chars.push(c);
                    out.source_pos.push(pos);
                }
            }
        }
        out
    }
}

struct Builder {
    chars: Vec<char>,
    nodes: Vec<DomNode>,
    paths: Vec<DomPath>,
    path_ids: HashMap<String, usize>,
    open: Vec<NodeId>,
}

impl Builder {
    fn intern(&mut self, path: String) -> usize {
        if let Some(&id) = self.path_ids.get(&path) {
            return id;
        }
        let id = self.paths.len();
        self.paths.push(DomPath(path.clone()));
        self.path_ids.insert(path, id);
        id
    }

    fn add_node(
        &mut self,
        parent: NodeId,
        tag: &str,
        kind: NodeKind,
        span: Range<usize>,
        hidden: bool,
    ) -> NodeId {
        let path = format!("{}/{}", self.paths[self.nodes[parent].path].0, tag);
        let path = self.intern(path);
        let id = self.nodes.len();
        self.nodes.push(DomNode {
            tag: tag.to_owned(),
            kind,
            span,
            parent: Some(parent),
            children: Vec::new(),
            hidden,
            path,
        });
        self.nodes[parent].children.push(id);
        id
    }

    fn current(&self) -> NodeId {
        *self.open.last().expect("root is never popped")
    }

    fn add_text(&mut self, range: Range<usize>) {
        if range.is_empty() {
            return;
        }
        let parent = self.current();
        let hidden = HIDDEN_TEXT_ELEMENTS.contains(&self.nodes[parent].tag.as_str());
        self.add_node(parent, TEXT_TAG, NodeKind::Text, range, hidden);
    }

    /// Closes open elements down to (not including) depth `keep`, ending
    /// their spans at `end`.
    fn close_to(&mut self, keep: usize, end: usize) {
        while self.open.len() > keep {
            let id = self.open.pop().expect("non-empty");
            self.nodes[id].span.end = end;
        }
    }

    fn position_of_open(&self, tag: &str) -> Option<usize> {
        // Index 0 is the document node, never matched.
        (1..self.open.len())
            .rev()
            .find(|&i| self.nodes[self.open[i]].tag == tag)
    }

    /// Closes elements that the start of `tag` implicitly ends.
    fn implied_end(&mut self, tag: &str, at: usize) {
        let (closes, scope): (&[&str], &[&str]) = match tag {
            "li" => (&["li"], &["ul", "ol", "menu"]),
            "dt" | "dd" => (&["dt", "dd"], &["dl"]),
            "td" | "th" => (&["td", "th"], &["tr", "table"]),
            "tr" => (&["tr"], &["table", "tbody", "thead", "tfoot"]),
            "option" => (&["option"], &["select", "datalist"]),
            "p" | "div" | "ul" | "ol" | "table" | "h1" | "h2" | "h3" | "h4" | "h5" | "h6" => {
                (&["p"], &[])
            }
            _ => return,
        };
        for i in (1..self.open.len()).rev() {
            let t = self.nodes[self.open[i]].tag.as_str();
            if scope.contains(&t) {
                break;
            }
            if closes.contains(&t) {
                self.close_to(i, at);
                break;
            }
            // Only look through inline wrappers for paragraph closing.
            if scope.is_empty() {
                break;
            }
        }
    }
}

fn find_seq(chars: &[char], from: usize, pat: &str) -> Option<usize> {
    let pat: Vec<char> = pat.chars().collect();
    (from..chars.len().saturating_sub(pat.len() - 1)).find(|&i| chars[i..i + pat.len()] == pat[..])
}

fn find_seq_ci(chars: &[char], from: usize, pat: &str) -> Option<usize> {
    let pat: Vec<char> = pat.chars().collect();
    (from..chars.len().saturating_sub(pat.len() - 1)).find(|&i| {
        chars[i..i + pat.len()]
            .iter()
            .zip(&pat)
            .all(|(a, b)| a.to_ascii_lowercase() == *b)
    })
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == ':' || c == '_'
}

struct StartTag {
    name: String,
    /// Character index just past the closing `>`.
    end: usize,
    self_closing: bool,
    attr_values: Vec<Range<usize>>,
}

/// Parses a start tag beginning at `<`; `None` if it is not well-formed
/// enough to be treated as markup.
fn parse_start_tag(chars: &[char], lt: usize) -> Option<StartTag> {
    let mut i = lt + 1;
    let name_start = i;
    while i < chars.len() && is_name_char(chars[i]) {
        i += 1;
    }
    let name: String = chars[name_start..i]
        .iter()
        .collect::<String>()
        .to_ascii_lowercase();
    let mut attr_values = Vec::new();
    let mut self_closing = false;
    loop {
        while i < chars.len() && chars[i].is_whitespace() {
            i += 1;
        }
        match chars.get(i)? {
            '>' => {
                return Some(StartTag {
                    name,
                    end: i + 1,
                    self_closing,
                    attr_values,
                })
            }
            '/' => {
                self_closing = true;
                i += 1;
                continue;
            }
            _ => {}
        }
        self_closing = false;
        // Attribute name.
        while i < chars.len() && !chars[i].is_whitespace() && !matches!(chars[i], '=' | '>' | '/') {
            i += 1;
        }
        let mut j = i;
        while j < chars.len() && chars[j].is_whitespace() {
            j += 1;
        }
        if chars.get(j) != Some(&'=') {
            continue;
        }
        i = j + 1;
        while i < chars.len() && chars[i].is_whitespace() {
            i += 1;
        }
        match chars.get(i)? {
            q @ ('"' | '\'') => {
                let q = *q;
                let start = i + 1;
                let close = (start..chars.len()).find(|&k| chars[k] == q)?;
                attr_values.push(start..close);
                i = close + 1;
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '>' {
                    i += 1;
                }
                attr_values.push(start..i);
            }
        }
    }
}

/// Parses HTML permissively. Never fails: unclosed elements end where their
/// parent ends, stray end tags become markup of the current element, and a
/// `<` that does not start a tag is text.
pub fn parse_html(raw: &str) -> DomTree {
    let chars: Vec<char> = raw.chars().collect();
    let len = chars.len();
    let mut b = Builder {
        chars,
        nodes: Vec::new(),
        paths: Vec::new(),
        path_ids: HashMap::new(),
        open: vec![0],
    };
    let root_path = b.intern(ROOT_TAG.to_owned());
    b.nodes.push(DomNode {
        tag: ROOT_TAG.to_owned(),
        kind: NodeKind::Document,
        span: 0..len,
        parent: None,
        children: Vec::new(),
        hidden: false,
        path: root_path,
    });

    let mut i = 0;
    let mut text_start = 0;
    while i < len {
        if b.chars[i] != '<' {
            i += 1;
            continue;
        }
        let next = b.chars.get(i + 1).copied();
        match next {
            Some('!') | Some('?') => {
                b.add_text(text_start..i);
                let end = if b.chars[i..].starts_with(&['<', '!', '-', '-']) {
                    find_seq(&b.chars, i + 4, "-->").map_or(len, |k| k + 3)
                } else {
                    find_seq(&b.chars, i + 2, ">").map_or(len, |k| k + 1)
                };
                i = end;
                text_start = i;
            }
            Some('/') if b.chars.get(i + 2).is_some_and(|c| c.is_ascii_alphabetic()) => {
                let Some(gt) = find_seq(&b.chars, i + 2, ">") else {
                    i += 1;
                    continue;
                };
                b.add_text(text_start..i);
                let name: String = b.chars[i + 2..gt]
                    .iter()
                    .take_while(|c| is_name_char(**c))
                    .collect::<String>()
                    .to_ascii_lowercase();
                if let Some(depth) = b.position_of_open(&name) {
                    b.close_to(depth + 1, i);
                    let id = b.open.pop().expect("matched element is open");
                    b.nodes[id].span.end = gt + 1;
                }
                i = gt + 1;
                text_start = i;
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let Some(tag) = parse_start_tag(&b.chars, i) else {
                    i += 1;
                    continue;
                };
                b.add_text(text_start..i);
                b.implied_end(&tag.name, i);
                let parent = b.current();
                let id = b.add_node(parent, &tag.name, NodeKind::Element, i..tag.end, false);
                for value in tag.attr_values.iter().filter(|r| !r.is_empty()) {
                    b.add_node(id, ATTR_TAG, NodeKind::Attr, value.clone(), false);
                }
                i = tag.end;
                text_start = i;
                if tag.self_closing || VOID_ELEMENTS.contains(&tag.name.as_str()) {
                    continue;
                }
                b.open.push(id);
                if RAW_TEXT_ELEMENTS.contains(&tag.name.as_str()) {
                    let close = find_seq_ci(&b.chars, i, &format!("</{}", tag.name));
                    let text_end = close.unwrap_or(len);
                    b.add_text(i..text_end);
                    i = text_end;
                    text_start = i;
                    if let Some(close) = close {
                        let gt = find_seq(&b.chars, close, ">").map_or(len, |k| k + 1);
                        b.open.pop();
                        b.nodes[id].span.end = gt;
                        i = gt;
                        text_start = i;
                    }
                }
            }
            _ => i += 1,
        }
    }
    b.add_text(text_start..len);
    b.close_to(1, len);

    // Nodes are created in pre-order, so later (deeper) nodes overwrite
    // their ancestors.
    let mut owner = vec![0; len];
    for (id, node) in b.nodes.iter().enumerate().skip(1) {
        owner[node.span.clone()].fill(id);
    }

    DomTree {
        source: raw.to_owned(),
        chars: b.chars,
        nodes: b.nodes,
        paths: b.paths,
        owner,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const LAPTOP_BRANDS: &str = include_str!("../tests/fixtures/laptop_brands.html");

    /// Path via a fresh descent from the root.
    fn walk_path(tree: &DomTree, pos: usize) -> String {
        let mut id = tree.root();
        'descend: loop {
            for &child in &tree.node(id).children {
                if tree.node(child).span.contains(&pos) {
                    id = child;
                    continue 'descend;
                }
            }
            break;
        }
        let mut tags = Vec::new();
        let mut cur = Some(id);
        while let Some(n) = cur {
            tags.push(tree.node(n).tag.clone());
            cur = tree.node(n).parent;
        }
        tags.reverse();
        tags.join("/")
    }

    fn char_pos(tree: &DomTree, needle: &str) -> usize {
        let byte = tree.source().find(needle).unwrap();
        tree.source()[..byte].chars().count()
    }

    #[test]
    fn simple_nesting() {
        let t = parse_html("<a><span>X</span></a>");
        assert_eq!(t.path_at(9).unwrap().as_str(), "root/a/span/#text");
        assert_eq!(t.path_at(0).unwrap().as_str(), "root/a");
        assert_eq!(t.path_at(3).unwrap().as_str(), "root/a/span");
        let text = t.node_at(9).unwrap();
        assert_eq!(t.node(text).span, 9..10);
    }

    #[test]
    fn plain_text_is_one_text_node() {
        let t = parse_html("plain text");
        assert_eq!(t.path_at(0).unwrap().as_str(), "root/#text");
        assert_eq!(t.path_at(9).unwrap().as_str(), "root/#text");
    }

    #[test]
    fn out_of_range() {
        let t = parse_html("ab");
        assert!(matches!(
            t.path_at(2),
            Err(Error::OutOfRange { pos: 2, len: 2 })
        ));
    }

    #[test]
    fn laptop_brand_paths() {
        let t = parse_html(LAPTOP_BRANDS);
        for brand in ["宏碁", "索尼", "东芝", "戴尔"] {
            let path = t.path_at(char_pos(&t, brand)).unwrap();
            assert!(
                path.as_str().ends_with("div/div/div/a/span/#text"),
                "{path}"
            );
        }
        let occ = t.find_occurrences(&["宏碁", "索尼"]);
        assert_eq!(occ.len(), 2);
        assert!(occ
            .iter()
            .all(|o| o.path.as_str().ends_with("a/span/#text")));
        assert_eq!(occ[0].term, "宏碁");
    }

    #[test]
    fn attributes_become_leaves() {
        let t = parse_html(r#"<a href="http://x.cn/" class=logo>k</a>"#);
        let p = char_pos(&t, "http");
        assert_eq!(t.path_at(p).unwrap().as_str(), "root/a/#attr");
        let p = char_pos(&t, "logo");
        assert_eq!(t.path_at(p).unwrap().as_str(), "root/a/#attr");
        // The quote belongs to the element markup.
        assert_eq!(t.path_at(p - 1).unwrap().as_str(), "root/a");
    }

    #[test]
    fn unclosed_tags_end_at_parent() {
        let t = parse_html("<ul><li>a<li>b</ul><p>c");
        assert_eq!(
            t.path_at(char_pos(&t, "a")).unwrap().as_str(),
            "root/ul/li/#text"
        );
        assert_eq!(
            t.path_at(char_pos(&t, "b")).unwrap().as_str(),
            "root/ul/li/#text"
        );
        assert_eq!(
            t.path_at(char_pos(&t, "c")).unwrap().as_str(),
            "root/p/#text"
        );
        let ul = t.node(t.root()).children[0];
        assert_eq!(t.node(ul).children.len(), 2);
    }

    #[test]
    fn stray_end_tags_and_bare_angles() {
        let t = parse_html("a < b </i> c <3");
        assert_eq!(t.path_at(0).unwrap().as_str(), "root/#text");
        assert_eq!(t.path_at(char_pos(&t, "</i>")).unwrap().as_str(), "root");
        assert_eq!(t.path_at(t.len() - 1).unwrap().as_str(), "root/#text");
    }

    #[test]
    fn script_text_is_hidden() {
        let t = parse_html("<div><script>var a = '<span>';</script>x</div>");
        let id = t.node_at(char_pos(&t, "var")).unwrap();
        assert!(t.node(id).hidden);
        assert_eq!(t.path_of(id).as_str(), "root/div/script/#text");
        let x = t.node_at(char_pos(&t, "x<")).unwrap();
        assert!(!t.node(x).hidden);
        assert_eq!(t.rendered_text().chars.iter().collect::<String>(), "x");
    }

    #[test]
    fn rendered_text_collapses_whitespace() {
        let t = parse_html("<p>  一 二\n</p><p>三</p>");
        let r = t.rendered_text();
        assert_eq!(r.chars.iter().collect::<String>(), "一 二 三");
        assert_eq!(r.source_pos[0], char_pos(&t, "一"));
    }

    #[test]
    fn segments_reconstruct_source() {
        let t = parse_html(LAPTOP_BRANDS);
        let mut rebuilt = String::new();
        let mut expect = 0;
        for (_, range) in t.segments() {
            assert_eq!(range.start, expect);
            expect = range.end;
            rebuilt.extend(&t.chars()[range]);
        }
        assert_eq!(rebuilt, LAPTOP_BRANDS);
    }

    #[test]
    fn lookup_matches_naive_walk_on_laptop_brands() {
        let t = parse_html(LAPTOP_BRANDS);
        for pos in 0..t.len() {
            assert_eq!(
                t.path_at(pos).unwrap().as_str(),
                walk_path(&t, pos),
                "pos {pos}"
            );
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn html_fragment() -> impl Strategy<Value = String> {
            let piece = prop_oneof![
                Just("<div>".to_string()),
                Just("</div>".to_string()),
                Just("<span class=\"k\">".to_string()),
                Just("</span>".to_string()),
                Just("<li>".to_string()),
                Just("<ul>".to_string()),
                Just("</ul>".to_string()),
                Just("<br/>".to_string()),
                Just("<!-- c -->".to_string()),
                Just("<a href='u'>".to_string()),
                Just("</a>".to_string()),
                Just("< ".to_string()),
                "[a-z宝马 ]{0,6}",
            ];
            proptest::collection::vec(piece, 0..30).prop_map(|v| v.concat())
        }

        proptest! {
            #[test]
            fn lookup_matches_walk(src in html_fragment()) {
                let t = parse_html(&src);
                for pos in 0..t.len() {
                    prop_assert_eq!(t.path_at(pos).unwrap().as_str(), walk_path(&t, pos));
                }
            }

            #[test]
            fn spans_nest_and_cover(src in html_fragment()) {
                let t = parse_html(&src);
                for node in t.nodes() {
                    let mut prev_end = node.span.start;
                    for &c in &node.children {
                        let cs = &t.node(c).span;
                        prop_assert!(cs.start >= prev_end && cs.end <= node.span.end);
                        prop_assert_eq!(t.node(c).parent.map(|p| &t.nodes()[p].span), Some(&node.span));
                        prev_end = cs.end;
                    }
                }
                let rebuilt: String = t.segments().into_iter().flat_map(|(_, r)| t.chars()[r].to_vec()).collect();
                prop_assert_eq!(rebuilt, src);
            }
        }
    }
}
