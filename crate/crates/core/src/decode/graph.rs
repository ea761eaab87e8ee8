use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub weight: u32,
    /// The qubit (or other fault) this edge stands for.
    pub fault: usize,
}

#[derive(Clone, Debug)]
enum Metric {
    /// Nodes form an L×L periodic grid, node `i·L + j`.
    Torus { size: usize },
    /// All-pairs shortest-path table, including the boundary node.
    Table { dist: Vec<u32> },
}

/// One node per check plus an optional boundary node; one edge per fault.
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    num_checks: usize,
    num_faults: usize,
    boundary: Option<usize>,
    edges: Vec<GraphEdge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    metric: Metric,
}

/// Weight-2 columns become interior edges and weight-1 columns edges to
/// the boundary node. All edge weights are 1.
pub fn build_matching_graph(h: &BitMatrix) -> Result<MatchingGraph> {
    let supports = h.column_supports();
    let needs_boundary = supports.iter().any(|s| s.len() == 1);
    let boundary = needs_boundary.then_some(h.rows());
    let num_nodes = h.rows() + usize::from(needs_boundary);
    let mut edges = Vec::with_capacity(h.cols());
    let mut adjacency = vec![Vec::new(); num_nodes];
    for (fault, s) in supports.iter().enumerate() {
        let (a, b) = match s.as_slice() {
            [a, b] => (*a, *b),
            [a] => (*a, h.rows()),
            _ => {
                return Err(Error::UnsupportedMatrix {
                    column: fault,
                    weight: s.len(),
                })
            }
        };
        adjacency[a].push((b, edges.len()));
        adjacency[b].push((a, edges.len()));
        edges.push(GraphEdge {
            a,
            b,
            weight: 1,
            fault,
        });
    }
    let mut graph = MatchingGraph {
        num_checks: h.rows(),
        num_faults: h.cols(),
        boundary,
        edges,
        adjacency,
        metric: Metric::Table { dist: Vec::new() },
    };
    let dist = (0..num_nodes)
        .flat_map(|s| graph.bfs_distances(s))
        .collect();
    graph.metric = Metric::Table { dist };
    Ok(graph)
}

impl MatchingGraph {
    /// Graph of the local checks of a periodic L×L lattice, using the
    /// closed-form wrap-around Manhattan distance. Fails if the nodes are
    /// not wired as a periodic grid with node index `i·L + j`.
    pub fn torus(h: &BitMatrix, size: usize) -> Result<MatchingGraph> {
        let mut graph = build_matching_graph(h)?;
        if graph.boundary.is_some() || graph.num_checks != size * size {
            return Err(Error::ContractViolation(
                "matrix is not the check matrix of a periodic lattice".into(),
            ));
        }
        for node in 0..graph.num_checks {
            let (i, j) = (node / size, node % size);
            let mut expected = vec![
                ((i + 1) % size) * size + j,
                ((i + size - 1) % size) * size + j,
                i * size + (j + 1) % size,
                i * size + (j + size - 1) % size,
            ];
            let mut found: Vec<usize> = graph.adjacency[node].iter().map(|&(n, _)| n).collect();
            expected.sort_unstable();
            found.sort_unstable();
            if expected != found {
                return Err(Error::ContractViolation(format!(
                    "node {node} is not wired as a periodic grid"
                )));
            }
        }
        graph.metric = Metric::Torus { size };
        Ok(graph)
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_faults(&self) -> usize {
        self.num_faults
    }

    pub fn boundary(&self) -> Option<usize> {
        self.boundary
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    fn bfs_distances(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.num_nodes()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Geodesic distance between two nodes (`u32::MAX` if disconnected).
    pub fn distance(&self, a: usize, b: usize) -> u32 {
        match &self.metric {
            Metric::Torus { size } => {
                let l = *size;
                let (ai, aj) = (a / l, a % l);
                let (bi, bj) = (b / l, b % l);
                let di = ai.abs_diff(bi);
                let dj = aj.abs_diff(bj);
                (di.min(l - di) + dj.min(l - dj)) as u32
            }
            Metric::Table { dist } => dist[a * self.num_nodes() + b],
        }
    }

    pub fn boundary_distance(&self, a: usize) -> Option<u32> {
        self.boundary.map(|b| self.distance(a, b))
    }

    /// Faults along one shortest path from `a` to `b`.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        if a == b {
            return Vec::new();
        }
        let mut via = vec![usize::MAX; self.num_nodes()];
        via[a] = usize::MAX - 1;
        let mut queue = VecDeque::from([a]);
        'search: while let Some(u) = queue.pop_front() {
            for &(v, e) in &self.adjacency[u] {
                if via[v] == usize::MAX {
                    via[v] = e;
                    if v == b {
                        break 'search;
                    }
                    queue.push_back(v);
                }
            }
        }
        let mut faults = Vec::new();
        let mut node = b;
        while node != a {
            let e = via[node];
            assert!(e < self.edges.len(), "nodes {a} and {b} are disconnected");
            faults.push(self.edges[e].fault);
            let edge = self.edges[e];
            node = if edge.a == node { edge.b } else { edge.a };
        }
        faults
    }

    /// Whether every node can reach every other one.
    pub fn is_connected(&self) -> bool {
        self.num_nodes() == 0 || self.bfs_distances(0).iter().all(|&d| d != u32::MAX)
    }
}
