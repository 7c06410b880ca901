//! Sparsity-pattern graphs: bipartite support graphs, their "secondary" graphs
//! (two nodes adjacent when joined by a path of length two), chordality via
//! maximum cardinality search, and symbolic zero-fill checks.

use std::cmp::Reverse;
use std::collections::{BTreeSet, VecDeque};

use crate::error::{OtError, Result};

/// Largest graph [`has_chordless_cycle_ge8`] will enumerate.
pub const CYCLE_SEARCH_MAX_NODES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    left: usize,
    right: usize,
    edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    /// Edges are `(left, right)` pairs; duplicates are merged.
    pub fn new(left: usize, right: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        if let Some(&(l, r)) = edges.iter().find(|(l, r)| *l >= left || *r >= right) {
            return Err(OtError::Parameter(format!(
                "edge ({}, {}) outside a {}+{} bipartite graph",
                l + 1,
                r + 1,
                left,
                right
            )));
        }
        Ok(BipartiteGraph { left, right, edges })
    }

    /// Nonzero pattern of a dense m×n matrix given row by row.
    pub fn from_dense_pattern(rows: &[Vec<f64>], threshold: f64) -> Self {
        let left = rows.len();
        let right = rows.first().map_or(0, |r| r.len());
        let mut edges = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if v.abs() > threshold {
                    edges.push((i, k));
                }
            }
        }
        BipartiteGraph { left, right, edges }
    }

    pub fn left_count(&self) -> usize {
        self.left
    }

    pub fn right_count(&self) -> usize {
        self.right
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Same graph with the two sides swapped (the transposed pattern).
    pub fn transposed(&self) -> BipartiteGraph {
        let mut edges: Vec<_> = self.edges.iter().map(|&(l, r)| (r, l)).collect();
        edges.sort_unstable();
        BipartiteGraph { left: self.right, right: self.left, edges }
    }

    /// Whole graph as an undirected graph: left nodes first, then right.
    pub fn to_undirected(&self) -> UndirectedGraph {
        let mut adj = vec![Vec::new(); self.left + self.right];
        for &(l, r) in &self.edges {
            adj[l].push(self.left + r);
            adj[self.left + r].push(l);
        }
        UndirectedGraph::from_adjacency(adj)
    }

    pub fn is_acyclic(&self) -> bool {
        let nodes = self.left + self.right;
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(l, r) in &self.edges {
            let (a, b) = (find(&mut parent, l), find(&mut parent, self.left + r));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: Vec<Vec<usize>>,
}

impl UndirectedGraph {
    /// Adjacency lists are symmetrized, sorted and stripped of self-loops.
    pub fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        let n = adj.len();
        let mut extra = Vec::new();
        for (v, list) in adj.iter().enumerate() {
            for &u in list {
                extra.push((u, v));
            }
        }
        for (u, v) in extra {
            if u < n {
                adj[u].push(v);
            }
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.retain(|&u| u != v && u < n);
            list.sort_unstable();
            list.dedup();
        }
        UndirectedGraph { adj }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }
}

/// Graph on the left nodes of `g` where `i ~ k` iff some right node is
/// adjacent to both; its pattern is the off-diagonal pattern of `ℳℳᵀ`.
pub fn secondary_graph(g: &BipartiteGraph) -> UndirectedGraph {
    let mut by_right = vec![Vec::new(); g.right];
    for &(l, r) in &g.edges {
        by_right[r].push(l);
    }
    let mut adj = vec![Vec::new(); g.left];
    for lefts in &by_right {
        for &a in lefts {
            for &b in lefts {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    UndirectedGraph::from_adjacency(adj)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Chordality {
    /// Perfect elimination ordering, first eliminated first.
    Chordal { peo: Vec<usize> },
    /// A chordless cycle of length at least four.
    NotChordal { cycle: Vec<usize> },
}

impl Chordality {
    pub fn is_chordal(&self) -> bool {
        matches!(self, Chordality::Chordal { .. })
    }
}

/// Maximum cardinality search. Returns an elimination order (reverse of the
/// visit order); ties go to the smallest vertex.
pub fn mcs_ordering(g: &UndirectedGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut weight = vec![0usize; n];
    let mut done = vec![false; n];
    let mut queue: BTreeSet<(Reverse<usize>, usize)> = (0..n).map(|v| (Reverse(0), v)).collect();
    let mut visit = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        done[v] = true;
        visit.push(v);
        for &u in g.neighbors(v) {
            if !done[u] {
                queue.remove(&(Reverse(weight[u]), u));
                weight[u] += 1;
                queue.insert((Reverse(weight[u]), u));
            }
        }
    }
    visit.reverse();
    visit
}

/// First vertex in `order` whose later neighbours are not a clique, as
/// `(v, u, w)` with `u`, `w` non-adjacent later neighbours of `v`.
fn peo_violation(g: &UndirectedGraph, order: &[usize]) -> Option<(usize, usize, usize)> {
    let mut pos = vec![0; g.node_count()];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    for &v in order {
        let later: Vec<usize> = g.neighbors(v).iter().cloned().filter(|&u| pos[u] > pos[v]).collect();
        let Some(&follower) = later.iter().min_by_key(|&&u| pos[u]) else { continue };
        for &w in &later {
            if w != follower && !g.has_edge(follower, w) {
                return Some((v, follower, w));
            }
        }
    }
    None
}

/// Chordless cycle `v, u, …, w` through `v` and two non-adjacent neighbours.
fn cycle_through(g: &UndirectedGraph, v: usize, u: usize, w: usize) -> Option<Vec<usize>> {
    let n = g.node_count();
    let mut blocked = vec![false; n];
    blocked[v] = true;
    for &x in g.neighbors(v) {
        if x != u && x != w {
            blocked[x] = true;
        }
    }
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([u]);
    seen[u] = true;
    while let Some(x) = queue.pop_front() {
        if x == w {
            let mut path = vec![w];
            let mut cur = w;
            while cur != u {
                cur = prev[cur];
                path.push(cur);
            }
            path.push(v);
            path.reverse();
            return Some(path);
        }
        for &y in g.neighbors(x) {
            if !seen[y] && !blocked[y] {
                // u and w are only allowed as path ends
                if y == u || (x == u && y == w && g.has_edge(u, w)) {
                    continue;
                }
                seen[y] = true;
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    None
}

/// Chordality test: maximum cardinality search followed by a perfect
/// elimination check. Non-chordal graphs come with a chordless cycle.
pub fn is_chordal(g: &UndirectedGraph) -> Chordality {
    let order = mcs_ordering(g);
    let Some((v, u, w)) = peo_violation(g, &order) else {
        return Chordality::Chordal { peo: order };
    };
    if let Some(cycle) = cycle_through(g, v, u, w) {
        return Chordality::NotChordal { cycle };
    }
    // Not expected for MCS orders; search every vertex and neighbour pair.
    for v in 0..g.node_count() {
        let nb = g.neighbors(v);
        for (a, &u) in nb.iter().enumerate() {
            for &w in &nb[a + 1..] {
                if !g.has_edge(u, w) {
                    if let Some(cycle) = cycle_through(g, v, u, w) {
                        return Chordality::NotChordal { cycle };
                    }
                }
            }
        }
    }
    unreachable!("perfect elimination check failed but no chordless cycle exists")
}

/// Whether `cycle` is a chordless cycle of `g` (used to check witnesses).
pub fn is_chordless_cycle(g: &UndirectedGraph, cycle: &[usize]) -> bool {
    let k = cycle.len();
    if k < 3 {
        return false;
    }
    for a in 0..k {
        for b in a + 1..k {
            let consecutive = b == a + 1 || (a == 0 && b == k - 1);
            if g.has_edge(cycle[a], cycle[b]) != consecutive {
                return false;
            }
        }
    }
    let mut sorted = cycle.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// Exhaustive search for a chordless cycle of length ≥ 8. Witness nodes use
/// the numbering of [`BipartiteGraph::to_undirected`].
pub fn has_chordless_cycle_ge8(g: &BipartiteGraph) -> Result<Option<Vec<usize>>> {
    let nodes = g.left + g.right;
    if nodes > CYCLE_SEARCH_MAX_NODES {
        return Err(OtError::Resource(format!(
            "cycle enumeration is limited to {CYCLE_SEARCH_MAX_NODES} nodes, graph has {nodes}"
        )));
    }
    let ug = g.to_undirected();
    let mask: Vec<u32> = (0..nodes)
        .map(|v| ug.neighbors(v).iter().fold(0u32, |acc, &u| acc | (1 << u)))
        .collect();

    fn extend(start: usize, path: &mut Vec<usize>, on_path: u32, ug: &UndirectedGraph, mask: &[u32]) -> bool {
        let last = *path.last().unwrap();
        // path vertices other than the start and the last one
        let inner = on_path & !(1 << start) & !(1 << last);
        for &nb in ug.neighbors(last) {
            if nb <= start || on_path & (1 << nb) != 0 {
                continue;
            }
            if mask[nb] & inner != 0 {
                continue;
            }
            if path.len() >= 2 && mask[nb] & (1 << start) != 0 {
                if path.len() + 1 >= 8 {
                    path.push(nb);
                    return true;
                }
                continue;
            }
            path.push(nb);
            if extend(start, path, on_path | (1 << nb), ug, mask) {
                return true;
            }
            path.pop();
        }
        false
    }

    for start in 0..nodes {
        let mut path = vec![start];
        if extend(start, &mut path, 1 << start, &ug, &mask) {
            return Ok(Some(path));
        }
    }
    Ok(None)
}

/// Symbolic elimination of `pattern` in `order` creates no fill edge.
pub fn zero_fill_verify(pattern: &UndirectedGraph, order: &[usize]) -> bool {
    let n = pattern.node_count();
    if order.len() != n {
        return false;
    }
    let mut pos = vec![usize::MAX; n];
    for (p, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return false;
        }
        pos[v] = p;
    }
    for &v in order {
        let later: Vec<usize> = pattern.neighbors(v).iter().cloned().filter(|&u| pos[u] > pos[v]).collect();
        for (a, &x) in later.iter().enumerate() {
            for &y in &later[a + 1..] {
                if !pattern.has_edge(x, y) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn cycle_graph(k: usize) -> UndirectedGraph {
        UndirectedGraph::from_adjacency((0..k).map(|v| vec![(v + 1) % k]).collect())
    }

    fn eight_cycle() -> BipartiteGraph {
        // q_i q_i', q_{i+1} q_i' for i = 1..4 (cyclic)
        let edges = (0..4).flat_map(|i| [(i, i), ((i + 1) % 4, i)]).collect();
        BipartiteGraph::new(4, 4, edges).unwrap()
    }

    #[test]
    fn secondary_graph_examples() {
        let star = BipartiteGraph::new(5, 1, (0..5).map(|i| (i, 0)).collect()).unwrap();
        let sg = secondary_graph(&star);
        assert_eq!(sg.edge_count(), 10);
        let matching = BipartiteGraph::new(4, 4, (0..4).map(|i| (i, i)).collect()).unwrap();
        assert_eq!(secondary_graph(&matching).edge_count(), 0);
    }

    #[test]
    fn small_graphs_are_chordal() {
        for k in 0..=3 {
            let g = UndirectedGraph::from_adjacency(
                (0..k).map(|v| (0..k).filter(|&u| u != v).collect()).collect(),
            );
            assert!(is_chordal(&g).is_chordal());
        }
        assert!(is_chordal(&cycle_graph(3)).is_chordal());
    }

    #[test]
    fn four_cycle_is_its_own_witness() {
        let g = cycle_graph(4);
        match is_chordal(&g) {
            Chordality::NotChordal { cycle } => {
                assert_eq!(cycle.len(), 4);
                assert!(is_chordless_cycle(&g, &cycle));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eight_cycle_secondary_graph_is_four_cycle() {
        let bg = eight_cycle();
        let sg = secondary_graph(&bg);
        assert_eq!(sg, cycle_graph(4));
        assert!(!is_chordal(&sg).is_chordal());
        let witness = has_chordless_cycle_ge8(&bg).unwrap().unwrap();
        assert_eq!(witness.len(), 8);
        assert!(is_chordless_cycle(&bg.to_undirected(), &witness));
    }

    #[test]
    fn cycle_hypothesis_examples() {
        let tree = BipartiteGraph::new(3, 3, vec![(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)]).unwrap();
        assert!(tree.is_acyclic());
        assert_eq!(has_chordless_cycle_ge8(&tree).unwrap(), None);
        let mut edges = eight_cycle().edges().to_vec();
        edges.push((0, 2)); // chord between q1 and q3'
        let chorded = BipartiteGraph::new(4, 4, edges).unwrap();
        assert_eq!(has_chordless_cycle_ge8(&chorded).unwrap(), None);
        let big = BipartiteGraph::new(13, 12, vec![]).unwrap();
        assert!(matches!(has_chordless_cycle_ge8(&big), Err(OtError::Resource(_))));
    }

    #[test]
    fn zero_fill_examples() {
        let diag = UndirectedGraph::from_adjacency(vec![Vec::new(); 4]);
        assert!(zero_fill_verify(&diag, &[2, 0, 3, 1]));
        // arrowhead: hub 0 joined to 1..4
        let arrow = UndirectedGraph::from_adjacency(vec![vec![1, 2, 3, 4], vec![], vec![], vec![], vec![]]);
        assert!(zero_fill_verify(&arrow, &[1, 2, 3, 4, 0]));
        assert!(!zero_fill_verify(&arrow, &[0, 1, 2, 3, 4]));
    }

    #[test]
    fn mcs_gives_peo_for_chordal_graphs() {
        // two triangles sharing an edge plus a pendant
        let g = UndirectedGraph::from_adjacency(vec![vec![1, 2], vec![2, 3], vec![3], vec![4], vec![]]);
        match is_chordal(&g) {
            Chordality::Chordal { peo } => assert!(zero_fill_verify(&g, &peo)),
            other => panic!("{other:?}"),
        }
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> UndirectedGraph {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut adj = vec![Vec::new(); n];
        for v in 0..n {
            for u in v + 1..n {
                if rng.gen_bool(p) {
                    adj[v].push(u);
                }
            }
        }
        UndirectedGraph::from_adjacency(adj)
    }

    /// Brute-force chordality: a graph is chordal iff repeatedly removing
    /// simplicial vertices empties it.
    fn chordal_brute(g: &UndirectedGraph) -> bool {
        let n = g.node_count();
        let mut alive = vec![true; n];
        for _ in 0..n {
            let simplicial = (0..n).find(|&v| {
                alive[v] && {
                    let nb: Vec<usize> = g.neighbors(v).iter().cloned().filter(|&u| alive[u]).collect();
                    nb.iter().enumerate().all(|(a, &x)| nb[a + 1..].iter().all(|&y| g.has_edge(x, y)))
                }
            });
            match simplicial {
                Some(v) => alive[v] = false,
                None => return false,
            }
        }
        true
    }

    proptest! {
        #[test]
        fn chordality_matches_brute_force(n in 1usize..10, p in 0.1f64..0.9, seed in any::<u64>()) {
            let g = random_graph(n, p, seed);
            let res = is_chordal(&g);
            prop_assert_eq!(res.is_chordal(), chordal_brute(&g));
            match res {
                Chordality::Chordal { peo } => prop_assert!(zero_fill_verify(&g, &peo)),
                Chordality::NotChordal { cycle } => {
                    prop_assert!(cycle.len() >= 4);
                    prop_assert!(is_chordless_cycle(&g, &cycle));
                }
            }
        }

        #[test]
        fn secondary_graph_is_pattern_of_product(m in 1usize..=6, n in 1usize..=6, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let dense: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| if rng.gen_bool(0.4) { rng.gen_range(0.1..1.0) } else { 0.0 }).collect())
                .collect();
            let bg = BipartiteGraph::from_dense_pattern(&dense, 0.0);
            let sg = secondary_graph(&bg);
            for a in 0..m {
                for b in 0..m {
                    if a == b { continue; }
                    let prod: f64 = (0..n).map(|k| dense[a][k] * dense[b][k]).sum();
                    prop_assert_eq!(sg.has_edge(a, b), prod != 0.0);
                }
            }
        }
    }
}
