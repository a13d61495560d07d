//! Immutable undirected graphs in compressed adjacency form, k-hop
//! neighbourhood queries and label homophily diagnostics.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Simple undirected graph stored as sorted per-node neighbour lists.
///
/// Neighbours of node `v` live in `targets[offsets[v]..offsets[v + 1]]`,
/// sorted ascending, without self-loops or duplicates. Every edge appears
/// in both endpoint lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    /// Builds the canonical simple graph from an arbitrary edge list.
    ///
    /// Direction is ignored, duplicate edges and self-loops are dropped.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut pairs = Vec::new();
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::EdgeOutOfRange(u, v, node_count));
            }
            if u != v {
                pairs.push((u, v));
                pairs.push((v, u));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut offsets = vec![0usize; node_count + 1];
        for &(u, _) in &pairs {
            offsets[u + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.into_iter().map(|(_, v)| v).collect();
        Ok(Self { offsets, targets })
    }

    pub fn empty(node_count: usize) -> Self {
        Self {
            offsets: vec![0; node_count + 1],
            targets: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && v < self.node_count() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Iterates every undirected edge once as `(u, v)` with `u < v`, in
    /// lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Subgraph induced by `nodes`, relabelled to `0..nodes.len()` in the
    /// order given. Returns the subgraph and the new-to-old id map.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<(Graph, Vec<usize>)> {
        let n = self.node_count();
        let mut local = vec![usize::MAX; n];
        for (i, &v) in nodes.iter().enumerate() {
            self.check_node(v)?;
            if local[v] != usize::MAX {
                return Err(Error::invalid(format!("node {v} listed twice in subset")));
            }
            local[v] = i;
        }
        let edges = nodes.iter().enumerate().flat_map(|(i, &v)| {
            let local = &local;
            self.neighbors(v)
                .iter()
                .filter(move |&&w| local[w] != usize::MAX)
                .map(move |&w| (i, local[w]))
        });
        let sub = Graph::from_edges(nodes.len(), edges)?;
        Ok((sub, nodes.to_vec()))
    }

    pub(crate) fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: v,
                node_count: self.node_count(),
            });
        }
        Ok(())
    }
}

/// Convenience wrapper over [`Graph::from_edges`].
pub fn build_graph(edges: &[(usize, usize)], node_count: usize) -> Result<Graph> {
    Graph::from_edges(node_count, edges.iter().copied())
}

/// Ground-truth class labels, one per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLabels {
    labels: Vec<usize>,
    num_classes: usize,
}

impl NodeLabels {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= num_classes) {
            return Err(Error::invalid(format!(
                "label {y} of node {i} is not below the class count {num_classes}"
            )));
        }
        Ok(Self { labels, num_classes })
    }

    /// Infers the class count as `max(label) + 1` (at least 2).
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(2, |&m| (m + 1).max(2));
        Self::new(labels, k)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn get(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }
}

/// Nodes within `depth` hops of `center`, grouped by exact shortest-path
/// distance. `layers[d - 1]` holds the nodes at distance `d`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopNeighborhood {
    pub center: usize,
    pub depth: usize,
    pub layers: Vec<Vec<usize>>,
}

impl HopNeighborhood {
    pub fn len(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.iter().all(Vec::is_empty)
    }

    /// Members with their hop distance, nearest first.
    pub fn members(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(d, layer)| layer.iter().map(move |&v| (v, d + 1)))
    }

    pub fn hop_of(&self, v: usize) -> Option<usize> {
        self.layers
            .iter()
            .position(|layer| layer.binary_search(&v).is_ok())
            .map(|d| d + 1)
    }
}

/// Reusable breadth-first scratch space for repeated k-hop queries on
/// graphs of one size. Visited marks are epoch-stamped so no per-query
/// clearing is needed.
#[derive(Debug, Clone)]
pub struct HopWalker {
    mark: Vec<u32>,
    epoch: u32,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl HopWalker {
    pub fn new(node_count: usize) -> Self {
        Self {
            mark: vec![0; node_count],
            epoch: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    /// Calls `visit(node, hop)` for every node at distance `1..=k` from
    /// `center`, one BFS layer at a time.
    pub fn walk<F>(&mut self, g: &Graph, center: usize, k: usize, mut visit: F)
    where
        F: FnMut(usize, usize),
    {
        if self.mark.len() < g.node_count() {
            self.mark.resize(g.node_count(), 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.mark[center] = epoch;
        self.frontier.clear();
        self.frontier.push(center);
        for hop in 1..=k {
            self.next.clear();
            for &u in &self.frontier {
                for &w in g.neighbors(u) {
                    if self.mark[w] != epoch {
                        self.mark[w] = epoch;
                        self.next.push(w);
                        visit(w, hop);
                    }
                }
            }
            if self.next.is_empty() {
                break;
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
    }
}

pub fn k_hop_neighborhood(g: &Graph, v: usize, k: usize) -> Result<HopNeighborhood> {
    g.check_node(v)?;
    if k == 0 {
        return Err(Error::invalid("neighbourhood depth k must be at least 1"));
    }
    let mut layers = vec![Vec::new(); k];
    HopWalker::new(g.node_count()).walk(g, v, k, |w, hop| layers[hop - 1].push(w));
    for layer in &mut layers {
        layer.sort_unstable();
    }
    Ok(HopNeighborhood {
        center: v,
        depth: k,
        layers,
    })
}

fn scope_mask(node_count: usize, subset: Option<&[usize]>) -> Result<Vec<bool>> {
    match subset {
        None => Ok(vec![true; node_count]),
        Some(nodes) => {
            let mut mask = vec![false; node_count];
            for &v in nodes {
                if v >= node_count {
                    return Err(Error::NodeOutOfRange { node: v, node_count });
                }
                mask[v] = true;
            }
            Ok(mask)
        }
    }
}

/// Node homophily ratio: the mean over nodes of the fraction of
/// neighbours sharing the node's label.
///
/// With a `subset`, the ratio is taken over the subgraph induced by it.
/// Nodes without neighbours (in scope) are left out of the mean.
pub fn node_homophily_ratio(
    g: &Graph,
    labels: &NodeLabels,
    subset: Option<&[usize]>,
) -> Result<f64> {
    if labels.len() != g.node_count() {
        return Err(Error::invalid(format!(
            "{} labels for a graph with {} nodes",
            labels.len(),
            g.node_count()
        )));
    }
    let in_scope = scope_mask(g.node_count(), subset)?;
    let mut total = 0.0;
    let mut counted = 0usize;
    for v in (0..g.node_count()).filter(|&v| in_scope[v]) {
        let (mut deg, mut same) = (0usize, 0usize);
        for &w in g.neighbors(v).iter().filter(|&&w| in_scope[w]) {
            deg += 1;
            if labels.get(w) == labels.get(v) {
                same += 1;
            }
        }
        if deg > 0 {
            total += same as f64 / deg as f64;
            counted += 1;
        }
    }
    if counted == 0 {
        return Err(Error::Undefined(
            "homophily ratio needs at least one node with a neighbour".into(),
        ));
    }
    Ok(total / counted as f64)
}

/// Expected homophily under independent label assignment with the
/// empirical label frequencies: `sum_k p_k^2`.
pub fn expected_random_homophily(labels: &NodeLabels, subset: Option<&[usize]>) -> Result<f64> {
    let mut counts = vec![0usize; labels.num_classes()];
    let mut n = 0usize;
    let mut tally = |v: usize| -> Result<()> {
        if v >= labels.len() {
            return Err(Error::NodeOutOfRange {
                node: v,
                node_count: labels.len(),
            });
        }
        counts[labels.get(v)] += 1;
        n += 1;
        Ok(())
    };
    match subset {
        Some(nodes) => nodes.iter().try_for_each(|&v| tally(v))?,
        None => (0..labels.len()).try_for_each(&mut tally)?,
    }
    if n == 0 {
        return Err(Error::invalid("no labelled nodes in scope"));
    }
    let n = n as f64;
    Ok(counts.iter().map(|&c| (c as f64 / n).powi(2)).sum())
}

/// Candidates whose k-hop neighbourhood contains at least `min_size`
/// other candidates. Returned sorted and deduplicated.
pub fn calibration_eligible_nodes(
    g: &Graph,
    candidates: &[usize],
    k: usize,
    min_size: usize,
) -> Vec<usize> {
    let n = g.node_count();
    let mut cands: Vec<usize> = candidates.iter().copied().filter(|&v| v < n).collect();
    cands.sort_unstable();
    cands.dedup();
    let mut is_cand = vec![false; n];
    for &v in &cands {
        is_cand[v] = true;
    }
    cands
        .par_iter()
        .map_init(
            || HopWalker::new(n),
            |walker, &v| {
                let mut count = 0usize;
                walker.walk(g, v, k, |w, _| count += usize::from(is_cand[w]));
                (v, count >= min_size)
            },
        )
        .filter_map(|(v, ok)| ok.then_some(v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        build_graph(&[(0, 1), (1, 2), (2, 0)], 3).unwrap()
    }

    fn path3() -> Graph {
        build_graph(&[(0, 1), (1, 2)], 3).unwrap()
    }

    #[test]
    fn dedupes_and_drops_self_loops() {
        let g = build_graph(&[(0, 1), (1, 0), (1, 1)], 2).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
    }

    #[test]
    fn empty_edge_list_gives_isolated_nodes() {
        let g = build_graph(&[], 3).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 0);
        assert!((0..3).all(|v| g.degree(v) == 0));
    }

    #[test]
    fn triangle_degrees() {
        let g = triangle();
        assert!((0..3).all(|v| g.degree(v) == 2));
    }

    #[test]
    fn out_of_range_edge_is_named() {
        let err = build_graph(&[(0, 1), (2, 5)], 3).unwrap_err();
        assert!(matches!(err, Error::EdgeOutOfRange(2, 5, 3)));
        assert!(err.to_string().contains("(2, 5)"));
    }

    #[test]
    fn edge_order_is_irrelevant() {
        let a = build_graph(&[(0, 1), (2, 3), (1, 2)], 4).unwrap();
        let b = build_graph(&[(3, 2), (2, 1), (1, 0), (0, 1)], 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hop_layers_on_path_and_triangle() {
        let nb = k_hop_neighborhood(&path3(), 0, 2).unwrap();
        assert_eq!(nb.layers, vec![vec![1], vec![2]]);
        let nb = k_hop_neighborhood(&triangle(), 0, 2).unwrap();
        assert_eq!(nb.layers, vec![vec![1, 2], vec![]]);
        assert_eq!(nb.hop_of(2), Some(1));
        assert_eq!(nb.hop_of(0), None);
    }

    #[test]
    fn hop_query_rejects_bad_node() {
        assert!(matches!(
            k_hop_neighborhood(&triangle(), 3, 1),
            Err(Error::NodeOutOfRange { node: 3, .. })
        ));
    }

    #[test]
    fn triangle_homophily() {
        let labels = NodeLabels::new(vec![0, 0, 1], 2).unwrap();
        let h = node_homophily_ratio(&triangle(), &labels, None).unwrap();
        assert!((h - 1.0 / 3.0).abs() < 1e-15);
        let r = expected_random_homophily(&labels, None).unwrap();
        assert!((r - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn star_with_opposite_center_has_zero_homophily() {
        let g = build_graph(&[(0, 1), (0, 2), (0, 3), (0, 4)], 5).unwrap();
        let labels = NodeLabels::new(vec![0, 1, 1, 1, 1], 2).unwrap();
        assert_eq!(node_homophily_ratio(&g, &labels, None).unwrap(), 0.0);
    }

    #[test]
    fn homophily_ignores_isolated_nodes() {
        let g = build_graph(&[(0, 1)], 4).unwrap();
        let labels = NodeLabels::new(vec![1, 1, 0, 1], 2).unwrap();
        assert_eq!(node_homophily_ratio(&g, &labels, None).unwrap(), 1.0);
    }

    #[test]
    fn homophily_undefined_without_edges() {
        let g = build_graph(&[], 3).unwrap();
        let labels = NodeLabels::new(vec![0, 1, 0], 2).unwrap();
        assert!(matches!(
            node_homophily_ratio(&g, &labels, None),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn random_homophily_edge_cases() {
        let one = NodeLabels::new(vec![1, 1, 1], 3).unwrap();
        assert_eq!(expected_random_homophily(&one, None).unwrap(), 1.0);
        let uniform = NodeLabels::new((0..20).map(|i| i % 4).collect(), 4).unwrap();
        assert!((expected_random_homophily(&uniform, None).unwrap() - 0.25).abs() < 1e-15);
        assert!(expected_random_homophily(&one, Some(&[])).is_err());
    }

    #[test]
    fn eligible_nodes_small_cases() {
        assert_eq!(calibration_eligible_nodes(&triangle(), &[0, 1, 2], 2, 2), vec![0, 1, 2]);
        assert_eq!(calibration_eligible_nodes(&path3(), &[0, 1, 2], 1, 2), vec![1]);
        assert_eq!(calibration_eligible_nodes(&path3(), &[0, 2], 1, 1), Vec::<usize>::new());
    }

    #[test]
    fn labels_validate() {
        assert!(NodeLabels::new(vec![0, 2], 2).is_err());
        assert!(NodeLabels::new(vec![0], 1).is_err());
        assert_eq!(NodeLabels::from_labels(vec![0, 3]).unwrap().num_classes(), 4);
    }
}
