//! Weighted asynchronous label propagation.
//!
//! Edges are treated as undirected; the weights of both directions and of
//! all kinds between a pair are summed. Self-loops carry no vote.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::WeightedGraph;

pub const DEFAULT_MAX_ITERS: usize = 100;

/// Node name to community label, labels numbered `0..C` by first appearance
/// in ascending node order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommunityAssignment {
    labels: BTreeMap<String, usize>,
    iterations: usize,
}

impl CommunityAssignment {
    pub fn get(&self, node: &str) -> Option<usize> {
        self.labels.get(node).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.labels.values().max().map_or(0, |m| m + 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.labels.iter().map(|(n, &l)| (n.as_str(), l))
    }

    /// Members of each community, indexed by label.
    pub fn communities(&self) -> Vec<Vec<&str>> {
        let mut groups = vec![Vec::new(); self.community_count()];
        for (node, label) in self.iter() {
            groups[label].push(node);
        }
        groups
    }

    /// Sweeps performed before reaching a fixpoint or the iteration cap.
    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

fn undirected_adjacency(graph: &WeightedGraph, index: &HashMap<&str, usize>) -> Vec<Vec<(usize, u64)>> {
    let mut pairs: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (key, w) in graph.edges() {
        let (s, t) = (index[key.source.as_str()], index[key.target.as_str()]);
        if s != t {
            *pairs.entry((s.min(t), s.max(t))).or_default() += w;
        }
    }
    let mut adjacency = vec![Vec::new(); graph.node_count()];
    for ((a, b), w) in pairs {
        adjacency[a].push((b, w));
        adjacency[b].push((a, w));
    }
    adjacency
}

/// Each sweep visits nodes in an order shuffled by a generator seeded with
/// `seed`; a node takes the neighbor label with the largest summed weight,
/// ties going to the smallest label. Stops at a fixpoint or after
/// `max_iters` sweeps.
pub fn label_propagation(graph: &WeightedGraph, seed: u64, max_iters: usize) -> CommunityAssignment {
    let names: Vec<&str> = graph.nodes().collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let adjacency = undirected_adjacency(graph, &index);

    let mut labels: Vec<usize> = (0..names.len()).collect();
    let mut order: Vec<usize> = (0..names.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut votes: HashMap<usize, u64> = HashMap::new();
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        order.shuffle(&mut rng);
        let mut changed = false;
        for &node in &order {
            if adjacency[node].is_empty() {
                continue;
            }
            votes.clear();
            for &(neighbor, w) in &adjacency[node] {
                *votes.entry(labels[neighbor]).or_default() += w;
            }
            let best = votes
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                .map(|(&label, _)| label)
                .expect("non-empty neighborhood");
            if best != labels[node] {
                labels[node] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut renumber: HashMap<usize, usize> = HashMap::new();
    let labels = names
        .iter()
        .zip(&labels)
        .map(|(name, raw)| {
            let next = renumber.len();
            (name.to_string(), *renumber.entry(*raw).or_insert(next))
        })
        .collect();
    CommunityAssignment { labels, iterations }
}
