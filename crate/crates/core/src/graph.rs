//! Undirected simple graphs in compressed sparse row form.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph stored as symmetric CSR adjacency.
///
/// Neighbor lists are sorted and duplicate free, and no self-loops are stored.
/// Self-loops only ever enter an operator through its `a` parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    row_offsets: Vec<usize>,
    neighbors: Vec<usize>,
    edge_count: usize,
}

impl Graph {
    /// Build a graph on `n` nodes from an edge iterator. Edges are symmetrized
    /// and deduplicated; self-loops are dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        row_offsets.push(0);
        for mut list in adj {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(&list);
            row_offsets.push(neighbors.len());
        }
        let edge_count = neighbors.len() / 2;
        Ok(Self {
            row_offsets,
            neighbors,
            edge_count,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            row_offsets: vec![0; n + 1],
            neighbors: Vec::new(),
            edge_count: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.row_offsets.len() - 1
    }

    /// Number of unordered edges.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn neighbor_indices(&self) -> &[usize] {
        &self.neighbors
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Sorted unordered edges with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn isolated_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&i| self.degree(i) == 0)
    }

    /// `y = A x` as one sparse pass.
    pub fn adjacency_apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.neighbors(i).iter().map(|&j| x[j]).sum();
        }
    }

    /// Dense adjacency, row-major.
    pub fn dense_adjacency(&self) -> Vec<f64> {
        let n = self.node_count();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for &j in self.neighbors(i) {
                a[i * n + j] = 1.0;
            }
        }
        a
    }

    /// Induced subgraph on `nodes` (in the given order, which defines the new ids).
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Subgraph {
        let mut old_to_new = vec![None; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            old_to_new[old] = Some(new);
        }
        let edges = nodes.iter().enumerate().flat_map(|(new_u, &old_u)| {
            let map = &old_to_new;
            self.neighbors(old_u)
                .iter()
                .filter_map(move |&old_v| map[old_v].map(|new_v| (new_u, new_v)))
        });
        let graph = Graph::from_edges(nodes.len(), edges.collect::<Vec<_>>())
            .expect("induced edges are in range");
        Subgraph {
            graph,
            old_to_new,
            new_to_old: nodes.to_vec(),
        }
    }

    /// Edge-list text with a `# nodes N` header and sorted `u v` lines, `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 * self.edge_count + 16);
        let _ = writeln!(out, "# nodes {}", self.node_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Checks the structural invariants. Used by tests and after deserialization.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        if self.row_offsets[0] != 0
            || self.row_offsets.windows(2).any(|w| w[0] > w[1])
            || self.row_offsets[n] != self.neighbors.len()
            || self.neighbors.len() != 2 * self.edge_count
        {
            return Err(Error::InvalidArgument("malformed row offsets".into()));
        }
        for i in 0..n {
            let list = self.neighbors(i);
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "neighbor list of {i} is not strictly increasing"
                )));
            }
            for &j in list {
                if j >= n || j == i || !self.has_edge(j, i) {
                    return Err(Error::InvalidArgument(format!("bad entry ({i}, {j})")));
                }
            }
        }
        Ok(())
    }
}

/// An induced subgraph with its id maps.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: Graph,
    /// Old id to new id, `None` for nodes outside the subgraph.
    pub old_to_new: Vec<Option<usize>>,
    pub new_to_old: Vec<usize>,
}

/// Result of parsing an edge list.
#[derive(Debug, Clone)]
pub struct ParsedEdgeList {
    pub graph: Graph,
    /// Identifier used in the file for each compacted node id.
    pub original_ids: Vec<u64>,
    pub self_loops_dropped: usize,
}

/// Parse whitespace-separated `u v` lines.
///
/// An optional first non-blank line `# nodes N` fixes the node count and keeps
/// ids as written; otherwise ids are compacted to `0..n` in order of first
/// appearance. Other `#` lines are comments.
pub fn parse_edge_list(text: &str) -> Result<ParsedEdgeList> {
    let mut header: Option<usize> = None;
    let mut raw_edges: Vec<(u64, u64)> = Vec::new();
    let mut self_loops = 0usize;
    let mut seen_content = false;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut parts = comment.split_whitespace();
            if parts.next() == Some("nodes") {
                if seen_content || header.is_some() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "'# nodes N' header must be the first line".into(),
                    });
                }
                let count = parts.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "missing node count in header".into(),
                })?;
                let count: usize = count.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid node count '{count}'"),
                })?;
                header = Some(count);
            }
            seen_content = true;
            continue;
        }
        seen_content = true;
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 'u v', found {} tokens", tokens.len()),
            });
        }
        let parse = |t: &str| -> Result<u64> {
            t.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid node id '{t}'"),
            })
        };
        let (u, v) = (parse(tokens[0])?, parse(tokens[1])?);
        if u == v {
            self_loops += 1;
        }
        raw_edges.push((u, v));
    }

    if raw_edges.is_empty() && header.is_none() {
        return Err(Error::EmptyGraph);
    }

    let (n, edges, original_ids) = match header {
        Some(n) => {
            let mut edges = Vec::with_capacity(raw_edges.len());
            for &(u, v) in &raw_edges {
                if u as usize >= n || v as usize >= n {
                    return Err(Error::InvalidArgument(format!(
                        "edge ({u}, {v}) exceeds header node count {n}"
                    )));
                }
                edges.push((u as usize, v as usize));
            }
            (n, edges, (0..n as u64).collect())
        }
        None => {
            let mut ids: HashMap<u64, usize> = HashMap::new();
            let mut original = Vec::new();
            let mut intern = |x: u64| {
                *ids.entry(x).or_insert_with(|| {
                    original.push(x);
                    original.len() - 1
                })
            };
            let edges: Vec<(usize, usize)> =
                raw_edges.iter().map(|&(u, v)| (intern(u), intern(v))).collect();
            (original.len(), edges, original)
        }
    };

    Ok(ParsedEdgeList {
        graph: Graph::from_edges(n, edges)?,
        original_ids,
        self_loops_dropped: self_loops,
    })
}

/// Connected-component labelling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentLabels {
    pub labels: Vec<usize>,
    pub component_count: usize,
}

impl ComponentLabels {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.component_count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Node lists per component, each ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.component_count];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l].push(i);
        }
        members
    }
}

/// BFS labelling; component ids follow the smallest node id they contain.
pub fn connected_components(g: &Graph) -> ComponentLabels {
    let n = g.node_count();
    let mut labels = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if labels[v] == usize::MAX {
                    labels[v] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    ComponentLabels {
        labels,
        component_count: count,
    }
}

pub fn is_connected(g: &Graph) -> bool {
    connected_components(g).component_count <= 1
}

/// Induced subgraph on the largest connected component. Ties go to the
/// component containing the smallest node id.
pub fn largest_component(g: &Graph) -> Result<Subgraph> {
    if g.node_count() == 0 {
        return Err(Error::InvalidArgument("graph has no nodes".into()));
    }
    let comps = connected_components(g);
    let sizes = comps.sizes();
    // Ids are assigned in order of smallest member, so the first maximum wins ties.
    let best = (0..comps.component_count)
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
        .expect("at least one component");
    let nodes: Vec<usize> = (0..g.node_count())
        .filter(|&i| comps.labels[i] == best)
        .collect();
    Ok(g.induced_subgraph(&nodes))
}

/// Degree of every node as a float vector.
pub fn degrees(g: &Graph) -> Vec<f64> {
    (0..g.node_count()).map(|i| g.degree(i) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn parses_path() {
        let p = parse_edge_list("0 1\n1 2").unwrap();
        assert_eq!(p.graph, path3());
        assert_eq!(p.graph.edge_count(), 2);
        assert_eq!(p.self_loops_dropped, 0);
    }

    #[test]
    fn parse_dedupes_and_symmetrizes() {
        let p = parse_edge_list("0 1\n1 0\n0 1").unwrap();
        assert_eq!(p.graph.node_count(), 2);
        assert_eq!(p.graph.edge_count(), 1);
        assert_eq!(p.graph.neighbors(0), &[1]);
        assert_eq!(p.graph.neighbors(1), &[0]);
    }

    #[test]
    fn parse_drops_self_loops_with_tally() {
        let p = parse_edge_list("0 0\n0 1").unwrap();
        assert_eq!(p.graph.node_count(), 2);
        assert_eq!(p.graph.edge_count(), 1);
        assert_eq!(p.self_loops_dropped, 1);
    }

    #[test]
    fn parse_compacts_in_first_appearance_order() {
        let p = parse_edge_list("10 3\n3 7\n").unwrap();
        assert_eq!(p.original_ids, vec![10, 3, 7]);
        assert!(p.graph.has_edge(0, 1));
        assert!(p.graph.has_edge(1, 2));
    }

    #[test]
    fn parse_header_fixes_ids_and_keeps_isolated_nodes() {
        let p = parse_edge_list("# nodes 5\n3 4\n").unwrap();
        assert_eq!(p.graph.node_count(), 5);
        assert!(p.graph.has_edge(3, 4));
        assert_eq!(p.graph.isolated_nodes().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(parse_edge_list("# nodes 3\n\n").unwrap().graph.edge_count() == 0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_edge_list("0 1\n1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("0 1\n\n1 2 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_edge_list("0 -1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("# nodes 2\n0 5"), Err(Error::InvalidArgument(_))));
        assert!(matches!(parse_edge_list("# just a comment\n"), Err(Error::EmptyGraph)));
        assert!(matches!(parse_edge_list("0 1\n# nodes 4\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn degree_examples() {
        let k3 = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(degrees(&k3), vec![2.0, 2.0, 2.0]);
        assert_eq!(degrees(&path3()), vec![1.0, 2.0, 1.0]);
        let iso = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(degrees(&iso), vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn component_examples() {
        let two_triangles =
            Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let c = connected_components(&two_triangles);
        assert_eq!(c.component_count, 2);
        assert_eq!(c.labels, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(connected_components(&path3()).component_count, 1);
        assert_eq!(connected_components(&Graph::empty(3)).component_count, 3);
    }

    #[test]
    fn largest_component_examples() {
        // triangle on {2,3,4} plus K2 on {0,1}
        let g = Graph::from_edges(5, [(0, 1), (2, 3), (3, 4), (2, 4)]).unwrap();
        let sub = largest_component(&g).unwrap();
        assert_eq!(sub.graph.node_count(), 3);
        assert_eq!(sub.graph.edge_count(), 3);
        assert_eq!(sub.new_to_old, vec![2, 3, 4]);
        assert_eq!(sub.old_to_new, vec![None, None, Some(0), Some(1), Some(2)]);

        let sub = largest_component(&path3()).unwrap();
        assert_eq!(sub.graph, path3());
        assert_eq!(sub.new_to_old, vec![0, 1, 2]);

        let two_k2 = Graph::from_edges(4, [(2, 3), (0, 1)]).unwrap();
        let sub = largest_component(&two_k2).unwrap();
        assert_eq!(sub.new_to_old, vec![0, 1]);

        assert!(largest_component(&Graph::empty(0)).is_err());
    }

    #[test]
    fn serialization_writes_header_and_sorted_edges() {
        let g = Graph::from_edges(4, [(2, 1), (0, 3), (1, 0)]).unwrap();
        assert_eq!(g.to_edge_list(), "# nodes 4\n0 1\n0 3\n1 2\n");
    }
}
