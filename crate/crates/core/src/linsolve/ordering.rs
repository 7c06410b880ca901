//! Fill-reducing orderings. All return `perm` with `perm[new] = old`.

use std::collections::BTreeSet;

use crate::graphcheck::{mcs_ordering, UndirectedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderingPolicy {
    Natural,
    /// Greedy minimum degree on the explicit elimination graph; ties go to
    /// the smallest vertex.
    #[default]
    MinimumDegree,
    /// Maximum cardinality search; a perfect elimination ordering whenever
    /// the pattern is chordal.
    MaximumCardinality,
}

impl OrderingPolicy {
    pub fn name(self) -> &'static str {
        match self {
            OrderingPolicy::Natural => "natural",
            OrderingPolicy::MinimumDegree => "min-degree",
            OrderingPolicy::MaximumCardinality => "mcs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "natural" => Some(OrderingPolicy::Natural),
            "min-degree" | "amd" | "md" => Some(OrderingPolicy::MinimumDegree),
            "mcs" => Some(OrderingPolicy::MaximumCardinality),
            _ => None,
        }
    }
}

pub fn compute_ordering(policy: OrderingPolicy, adjacency: &[Vec<usize>]) -> Vec<usize> {
    match policy {
        OrderingPolicy::Natural => (0..adjacency.len()).collect(),
        OrderingPolicy::MinimumDegree => minimum_degree(adjacency),
        OrderingPolicy::MaximumCardinality => mcs_ordering(&UndirectedGraph::from_adjacency(adjacency.to_vec())),
    }
}

fn minimum_degree(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut adj: Vec<BTreeSet<usize>> = adjacency
        .iter()
        .enumerate()
        .map(|(v, l)| l.iter().cloned().filter(|&u| u != v).collect())
        .collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), v)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
            for &w in &nbrs {
                if w != u {
                    adj[u].insert(w);
                }
            }
            queue.insert((adj[u].len(), u));
        }
    }
    order
}
