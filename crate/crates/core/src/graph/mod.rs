//! User-interaction graph: retweet and reply edges, weight aggregation,
//! notable-user selection, communities and exports.

mod export;
mod lpa;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

pub use export::{export_edges_csv, export_gexf, read_edges_csv, write_edges_csv, write_gexf};
pub use lpa::{label_propagation, CommunityAssignment, DEFAULT_MAX_ITERS};

use crate::analytics::compare_names;
use crate::tweet::Tweet;

pub const DEFAULT_TOP_N: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Retweet,
    Reply,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Retweet => "retweet",
            EdgeKind::Reply => "reply",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "retweet" => Ok(EdgeKind::Retweet),
            "reply" => Ok(EdgeKind::Reply),
            other => Err(format!("unknown edge kind `{other}`")),
        }
    }
}

/// One raw interaction: `source` retweeted or replied to `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionEdge {
    pub source: String,
    pub target: String,
    pub kind: EdgeKind,
    pub tweet_id: u64,
}

impl InteractionEdge {
    pub fn is_self_loop(&self) -> bool {
        self.source == self.target
    }
}

/// At most one retweet edge and one reply edge per tweet, in input order.
/// Mentions are not interactions.
pub fn extract_interactions(tweets: &[Tweet]) -> Vec<InteractionEdge> {
    let mut edges = Vec::new();
    for tweet in tweets {
        if let Some(original) = &tweet.retweet_of {
            edges.push(InteractionEdge {
                source: tweet.author.clone(),
                target: original.author.clone(),
                kind: EdgeKind::Retweet,
                tweet_id: tweet.id,
            });
        }
        if let Some(target) = &tweet.reply_to {
            edges.push(InteractionEdge {
                source: tweet.author.clone(),
                target: target.clone(),
                kind: EdgeKind::Reply,
                tweet_id: tweet.id,
            });
        }
    }
    edges
}

/// Aggregation key. `kind` is `None` when kinds were merged.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    pub source: String,
    pub target: String,
    pub kind: Option<EdgeKind>,
}

/// Directed multigraph collapsed to weights.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightedGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<EdgeKey, u64>,
    merged_kinds: bool,
}

impl WeightedGraph {
    pub fn new(merged_kinds: bool) -> Self {
        WeightedGraph {
            merged_kinds,
            ..Default::default()
        }
    }

    pub fn merged_kinds(&self) -> bool {
        self.merged_kinds
    }

    pub fn add_node(&mut self, name: &str) {
        if !self.nodes.contains(name) {
            self.nodes.insert(name.to_string());
        }
    }

    /// Adds `weight` to the edge, creating endpoints as needed. The kind is
    /// dropped on a kind-merged graph. Zero weights are ignored.
    pub fn add_edge(&mut self, source: &str, target: &str, kind: Option<EdgeKind>, weight: u64) {
        if weight == 0 {
            return;
        }
        self.add_node(source);
        self.add_node(target);
        let key = EdgeKey {
            source: source.to_string(),
            target: target.to_string(),
            kind: if self.merged_kinds { None } else { kind },
        };
        *self.edges.entry(key).or_default() += weight;
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn contains_node(&self, name: &str) -> bool {
        self.nodes.contains(name)
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (&EdgeKey, u64)> {
        self.edges.iter().map(|(k, &w)| (k, w))
    }

    pub fn weight(&self, source: &str, target: &str, kind: Option<EdgeKind>) -> u64 {
        let key = EdgeKey {
            source: source.to_string(),
            target: target.to_string(),
            kind,
        };
        self.edges.get(&key).copied().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// In-weight plus out-weight per node; a self-loop counts on both sides.
    pub fn weighted_degrees(&self) -> HashMap<&str, u64> {
        let mut degree: HashMap<&str, u64> = self.nodes().map(|n| (n, 0)).collect();
        for (key, w) in &self.edges {
            *degree.get_mut(key.source.as_str()).expect("endpoint is a node") += w;
            *degree.get_mut(key.target.as_str()).expect("endpoint is a node") += w;
        }
        degree
    }

    /// Weighted in-degree restricted to one edge kind.
    pub fn in_weight(&self, kind: Option<EdgeKind>) -> BTreeMap<&str, u64> {
        let mut inbound = BTreeMap::new();
        for (key, w) in &self.edges {
            if kind.is_none() || key.kind == kind {
                *inbound.entry(key.target.as_str()).or_default() += w;
            }
        }
        inbound
    }

    /// Subgraph induced by `keep`.
    pub fn induced(&self, keep: &BTreeSet<&str>) -> WeightedGraph {
        let mut sub = WeightedGraph::new(self.merged_kinds);
        for node in keep.iter().filter(|n| self.nodes.contains(**n)) {
            sub.add_node(node);
        }
        for (key, &w) in &self.edges {
            if keep.contains(key.source.as_str()) && keep.contains(key.target.as_str()) {
                sub.edges.insert(key.clone(), w);
            }
        }
        sub
    }
}

/// Collapses raw edges into weights: multiplicity of (source, target, kind),
/// or of (source, target) with `merge_kinds`.
pub fn aggregate(edges: &[InteractionEdge], merge_kinds: bool) -> WeightedGraph {
    let mut graph = WeightedGraph::new(merge_kinds);
    for edge in edges {
        graph.add_edge(&edge.source, &edge.target, Some(edge.kind), 1);
    }
    graph
}

/// Keeps the `top_n` nodes by weighted degree (ties by ascending name) and
/// the edges among them.
pub fn notable_subgraph(graph: &WeightedGraph, top_n: usize) -> WeightedGraph {
    if graph.node_count() <= top_n {
        return graph.clone();
    }
    let mut ranked: Vec<(&str, u64)> = graph.weighted_degrees().into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| compare_names(a.0, b.0)));
    let keep: BTreeSet<&str> = ranked.into_iter().take(top_n).map(|(n, _)| n).collect();
    graph.induced(&keep)
}
