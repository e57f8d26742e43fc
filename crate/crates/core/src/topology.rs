//! Graph families used for diffusion load balancing and their diffusion
//! matrices.
//!
//! Vertices are numbered `0..n`. Tori are linearized row-major (the last
//! coordinate varies fastest) and hypercube vertices are their bitstring
//! value. That numbering fixes the orientation of every edge: an
//! [`OrientedEdge`] always has `lo < hi`.
//!
//! The diffusion matrix has entries `1/(2Δ)` on edges and `1 - deg(i)/(2Δ)` on
//! the diagonal. All of its entries share the denominator `2Δ`, so
//! [`DiffusionMatrix`] never materializes them: it stores the graph and hands
//! out exact scaled integers.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest hypercube dimension accepted by [`Graph::hypercube`].
pub const MAX_HYPERCUBE_DIM: u32 = 24;

/// Which family a graph was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    Torus { dims: Vec<usize> },
    Hypercube { d: u32 },
    Cycle { q: usize },
    Path { q: usize },
    Custom { edges: Vec<(usize, usize)> },
}

/// An edge `{lo, hi}` with `lo < hi` under the fixed vertex numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub lo: usize,
    pub hi: usize,
}

impl OrientedEdge {
    /// Orients `{a, b}`; fails on a self-loop.
    pub fn new(a: usize, b: usize) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Self { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Ok(Self { lo: b, hi: a }),
            std::cmp::Ordering::Equal => {
                Err(Error::InvalidGraph(format!("self-loop at vertex {a}")))
            }
        }
    }
}

impl fmt::Display for OrientedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}]", self.lo, self.hi)
    }
}

/// A finite, simple, undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphDoc", try_from = "GraphDoc")]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<OrientedEdge>,
    max_degree: usize,
    kind: GraphKind,
}

impl Graph {
    /// Builds the torus `C_{n_1} x ... x C_{n_d}`.
    ///
    /// Every side must be at least 3; smaller sides would make the `±1`
    /// neighbours coincide.
    pub fn torus(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Dimension("a torus needs at least one side".into()));
        }
        if let Some(&bad) = dims.iter().find(|&&s| s < 3) {
            return Err(Error::Dimension(format!(
                "torus side {bad} is below 3 (sides must be >= 3)"
            )));
        }
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .ok_or_else(|| Error::Size("torus vertex count overflows".into()))?;
        // strides[k] = product of dims[k+1..]
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let mut adjacency = Vec::with_capacity(n);
        for v in 0..n {
            let mut nbrs = Vec::with_capacity(2 * dims.len());
            for (&side, &stride) in dims.iter().zip(&strides) {
                let coord = (v / stride) % side;
                let base = v - coord * stride;
                nbrs.push(base + ((coord + 1) % side) * stride);
                nbrs.push(base + ((coord + side - 1) % side) * stride);
            }
            nbrs.sort_unstable();
            adjacency.push(nbrs);
        }
        let kind = if dims.len() == 1 {
            GraphKind::Cycle { q: dims[0] }
        } else {
            GraphKind::Torus {
                dims: dims.to_vec(),
            }
        };
        Ok(Self::from_adjacency(adjacency, kind))
    }

    /// Builds the `d`-dimensional hypercube on `2^d` vertices.
    pub fn hypercube(d: u32) -> Result<Self> {
        if !(1..=MAX_HYPERCUBE_DIM).contains(&d) {
            return Err(Error::Dimension(format!(
                "hypercube dimension {d} outside 1..={MAX_HYPERCUBE_DIM}"
            )));
        }
        let n = 1usize << d;
        let adjacency = (0..n)
            .map(|v| {
                let mut nbrs: Vec<usize> = (0..d).map(|b| v ^ (1 << b)).collect();
                nbrs.sort_unstable();
                nbrs
            })
            .collect();
        Ok(Self::from_adjacency(adjacency, GraphKind::Hypercube { d }))
    }

    pub fn cycle(q: usize) -> Result<Self> {
        if q < 3 {
            return Err(Error::Size(format!("cycle needs q >= 3, got {q}")));
        }
        Self::torus(&[q])
    }

    pub fn path(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::Size(format!("path needs q >= 2, got {q}")));
        }
        let adjacency = (0..q)
            .map(|v| {
                let mut nbrs = Vec::with_capacity(2);
                if v > 0 {
                    nbrs.push(v - 1);
                }
                if v + 1 < q {
                    nbrs.push(v + 1);
                }
                nbrs
            })
            .collect();
        Ok(Self::from_adjacency(adjacency, GraphKind::Path { q }))
    }

    /// Builds a graph from an explicit edge list after validating it: no
    /// self-loops, no duplicate edges, endpoints in range, connected.
    pub fn custom(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Size("a graph needs at least one vertex".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut oriented = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{n}"
                )));
            }
            let e = OrientedEdge::new(a, b)?;
            oriented.push(e);
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        oriented.sort_unstable();
        if oriented.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph("duplicate edge".into()));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let kind = GraphKind::Custom {
            edges: oriented.iter().map(|e| (e.lo, e.hi)).collect(),
        };
        let g = Self::from_adjacency(adjacency, kind);
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    fn from_adjacency(adjacency: Vec<Vec<usize>>, kind: GraphKind) -> Self {
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let edges = adjacency
            .iter()
            .enumerate()
            .flat_map(|(v, nbrs)| {
                nbrs.iter()
                    .filter(move |&&w| w > v)
                    .map(move |&w| OrientedEdge { lo: v, hi: w })
            })
            .collect();
        Self {
            adjacency,
            edges,
            max_degree,
            kind,
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    /// Δ, the maximum degree.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn kind(&self) -> &GraphKind {
        &self.kind
    }

    /// All edges sorted by `(lo, hi)`. Edge ids used by ledgers and step
    /// records are indices into this slice.
    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, e: OrientedEdge) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    /// Hop distances from `source` to every vertex (`usize::MAX` if
    /// unreachable).
    pub fn distances_from(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest-path length between `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> Result<usize> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        Ok(self.distances_from(i)[j])
    }

    /// Largest distance from `v`.
    pub fn eccentricity(&self, v: usize) -> usize {
        self.distances_from(v).into_iter().max().unwrap_or(0)
    }

    pub fn diameter(&self) -> usize {
        match &self.kind {
            GraphKind::Hypercube { d } => *d as usize,
            GraphKind::Cycle { q } => q / 2,
            GraphKind::Path { q } => q - 1,
            GraphKind::Torus { dims } => dims.iter().map(|s| s / 2).sum(),
            GraphKind::Custom { .. } => (0..self.n())
                .map(|v| self.eccentricity(v))
                .max()
                .unwrap_or(0),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.distances_from(0).iter().all(|&d| d != usize::MAX)
    }

    /// Coordinates of `v` in a torus (or cycle), row-major.
    pub fn torus_coords(&self, v: usize) -> Option<Vec<usize>> {
        let dims = self.torus_dims()?;
        let mut coords = vec![0; dims.len()];
        let mut rest = v;
        for k in (0..dims.len()).rev() {
            coords[k] = rest % dims[k];
            rest /= dims[k];
        }
        Some(coords)
    }

    /// Inverse of [`Graph::torus_coords`].
    pub fn torus_index(&self, coords: &[usize]) -> Option<usize> {
        let dims = self.torus_dims()?;
        if coords.len() != dims.len() || coords.iter().zip(&dims).any(|(c, s)| c >= s) {
            return None;
        }
        Some(coords.iter().zip(&dims).fold(0, |acc, (c, s)| acc * s + c))
    }

    /// Side lengths for tori and cycles.
    pub fn torus_dims(&self) -> Option<Vec<usize>> {
        match &self.kind {
            GraphKind::Torus { dims } => Some(dims.clone()),
            GraphKind::Cycle { q } => Some(vec![*q]),
            _ => None,
        }
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::Size(format!("vertex {v} outside 0..{}", self.n())))
        }
    }

    /// The CLI spec string for this graph, when it has one.
    pub fn spec(&self) -> Option<GraphSpec> {
        match &self.kind {
            GraphKind::Torus { dims } => Some(GraphSpec::Torus(dims.clone())),
            GraphKind::Hypercube { d } => Some(GraphSpec::Hypercube(*d)),
            GraphKind::Cycle { q } => Some(GraphSpec::Cycle(*q)),
            GraphKind::Path { q } => Some(GraphSpec::Path(*q)),
            GraphKind::Custom { .. } => None,
        }
    }
}

/// JSON form of a graph: `{kind, params, n}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphDoc {
    kind: String,
    params: serde_json::Value,
    n: usize,
}

impl From<Graph> for GraphDoc {
    fn from(g: Graph) -> Self {
        let n = g.n();
        let (kind, params) = match g.kind {
            GraphKind::Torus { dims } => ("torus", serde_json::json!(dims)),
            GraphKind::Hypercube { d } => ("hypercube", serde_json::json!(d)),
            GraphKind::Cycle { q } => ("cycle", serde_json::json!(q)),
            GraphKind::Path { q } => ("path", serde_json::json!(q)),
            GraphKind::Custom { edges } => ("custom", serde_json::json!(edges)),
        };
        Self {
            kind: kind.into(),
            params,
            n,
        }
    }
}

impl TryFrom<GraphDoc> for Graph {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Self> {
        let g = match doc.kind.as_str() {
            "torus" => Graph::torus(&serde_json::from_value::<Vec<usize>>(doc.params)?)?,
            "hypercube" => Graph::hypercube(serde_json::from_value(doc.params)?)?,
            "cycle" => Graph::cycle(serde_json::from_value(doc.params)?)?,
            "path" => Graph::path(serde_json::from_value(doc.params)?)?,
            "custom" => {
                let edges: Vec<(usize, usize)> = serde_json::from_value(doc.params)?;
                Graph::custom(doc.n, &edges)?
            }
            other => return Err(Error::InvalidGraph(format!("unknown graph kind {other:?}"))),
        };
        if g.n() != doc.n {
            return Err(Error::Mismatch {
                expected: doc.n,
                actual: g.n(),
            });
        }
        Ok(g)
    }
}

/// Compact graph description: `torus:4x4x4`, `hypercube:10`, `cycle:64`,
/// `path:9`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum GraphSpec {
    Torus(Vec<usize>),
    Hypercube(u32),
    Cycle(usize),
    Path(usize),
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Torus(dims) => Graph::torus(dims),
            GraphSpec::Hypercube(d) => Graph::hypercube(*d),
            GraphSpec::Cycle(q) => Graph::cycle(*q),
            GraphSpec::Path(q) => Graph::path(*q),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Torus(dims) => {
                let sides: Vec<String> = dims.iter().map(usize::to_string).collect();
                write!(f, "torus:{}", sides.join("x"))
            }
            GraphSpec::Hypercube(d) => write!(f, "hypercube:{d}"),
            GraphSpec::Cycle(q) => write!(f, "cycle:{q}"),
            GraphSpec::Path(q) => write!(f, "path:{q}"),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::GraphSpec {
            spec: s.to_string(),
            reason: reason.into(),
        };
        let (kind, params) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| bad("expected <kind>:<params>"))?;
        let number = |p: &str| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| bad("expected an integer"))
        };
        match kind.trim() {
            "torus" => {
                let dims = params.split('x').map(number).collect::<Result<Vec<_>>>()?;
                Ok(GraphSpec::Torus(dims))
            }
            "hypercube" => Ok(GraphSpec::Hypercube(
                params
                    .trim()
                    .parse()
                    .map_err(|_| bad("expected an integer"))?,
            )),
            "cycle" => Ok(GraphSpec::Cycle(number(params)?)),
            "path" => Ok(GraphSpec::Path(number(params)?)),
            _ => Err(bad("kind must be torus, hypercube, cycle or path")),
        }
    }
}

impl From<GraphSpec> for String {
    fn from(s: GraphSpec) -> Self {
        s.to_string()
    }
}

impl TryFrom<String> for GraphSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// The diffusion matrix `P` of a graph.
///
/// `P` is symmetric and doubly stochastic with entries
///
/// ```text
/// P[i][j] = 1/(2Δ)             if {i,j} is an edge
/// P[i][i] = 1 - deg(i)/(2Δ)
/// ```
///
/// Every entry is `k / (2Δ)` for an integer `k`; the scaled accessors return
/// that `k`.
#[derive(Debug, Clone)]
pub struct DiffusionMatrix {
    graph: Arc<Graph>,
    scale: i64,
}

impl DiffusionMatrix {
    pub fn new(graph: impl Into<Arc<Graph>>) -> Result<Self> {
        let graph = graph.into();
        if graph.max_degree() == 0 {
            return Err(Error::InvalidGraph(
                "a diffusion matrix needs at least one edge".into(),
            ));
        }
        let scale = 2 * graph.max_degree() as i64;
        Ok(Self { graph, scale })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// The common denominator `2Δ`.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// `2Δ · P[i][i]`.
    pub fn scaled_diagonal(&self, i: usize) -> i64 {
        self.scale - self.graph.degree(i) as i64
    }

    /// `2Δ · P[i][j]`.
    pub fn scaled_entry(&self, i: usize, j: usize) -> i64 {
        if i == j {
            self.scaled_diagonal(i)
        } else if self.graph.neighbors(i).binary_search(&j).is_ok() {
            1
        } else {
            0
        }
    }

    /// Exact entry `P[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> Ratio<i64> {
        Ratio::new(self.scaled_entry(i, j), self.scale)
    }

    pub fn entry_f64(&self, i: usize, j: usize) -> f64 {
        self.scaled_entry(i, j) as f64 / self.scale as f64
    }

    /// Nonzero entries `(i, j, P[i][j])` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Ratio<i64>)> + '_ {
        (0..self.n()).flat_map(move |i| {
            let mut row: Vec<usize> = self.graph.neighbors(i).to_vec();
            if self.scaled_diagonal(i) != 0 {
                row.push(i);
            }
            row.sort_unstable();
            row.into_iter().map(move |j| (i, j, self.entry(i, j)))
        })
    }

    /// `x · P` for a row vector `x` (equal to `P · x` since `P` is symmetric).
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n() {
            return Err(Error::Mismatch {
                expected: self.n(),
                actual: x.len(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let inv = 1.0 / self.scale as f64;
        (0..self.n())
            .map(|v| {
                let nbr: f64 = self.graph.neighbors(v).iter().map(|&w| x[w]).sum();
                (self.scaled_diagonal(v) as f64 * x[v] + nbr) * inv
            })
            .collect()
    }

    /// Dense copy of `P`, for eigensolvers.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (i, j, _) in self.entries() {
            m[(i, j)] = self.entry_f64(i, j);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_4x4_is_4_regular() {
        let g = Graph::torus(&[4, 4]).unwrap();
        assert_eq!(g.n(), 16);
        assert!((0..16).all(|v| g.degree(v) == 4));
    }

    #[test]
    fn one_dimensional_torus_is_a_cycle() {
        let g = Graph::torus(&[3]).unwrap();
        assert_eq!(g.kind(), &GraphKind::Cycle { q: 3 });
        assert!((0..3).all(|v| g.degree(v) == 2));
    }

    #[test]
    fn torus_3x4x5_neighbor_count_by_enumeration() {
        let dims = [3usize, 4, 5];
        let g = Graph::torus(&dims).unwrap();
        assert_eq!(g.n(), 60);
        assert_eq!(g.max_degree(), 6);
        // brute force: u ~ v iff exactly one coordinate differs by ±1 mod side
        for u in 0..60 {
            let cu = g.torus_coords(u).unwrap();
            let count = (0..60)
                .filter(|&v| {
                    let cv = g.torus_coords(v).unwrap();
                    let diffs: Vec<usize> = (0..3).filter(|&k| cu[k] != cv[k]).collect();
                    diffs.len() == 1 && {
                        let k = diffs[0];
                        (cu[k] + 1) % dims[k] == cv[k] || (cv[k] + 1) % dims[k] == cu[k]
                    }
                })
                .count();
            assert_eq!(count, 6);
            assert_eq!(g.degree(u), 6);
        }
    }

    #[test]
    fn small_torus_sides_are_rejected() {
        assert!(matches!(Graph::torus(&[4, 2]), Err(Error::Dimension(_))));
        assert!(matches!(Graph::torus(&[]), Err(Error::Dimension(_))));
        assert!(matches!(Graph::torus(&[1]), Err(Error::Dimension(_))));
    }

    #[test]
    fn hypercube_basics() {
        let g = Graph::hypercube(2).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 4);
        let g = Graph::hypercube(3).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2, 4]);
        let g = Graph::hypercube(10).unwrap();
        assert_eq!(g.n(), 1024);
        let by_enumeration = (0..1024usize)
            .flat_map(|u| (0..1024usize).map(move |v| (u, v)))
            .filter(|&(u, v)| u < v && (u ^ v).count_ones() == 1)
            .count();
        assert_eq!(by_enumeration, 5120);
        assert_eq!(g.edge_count(), 5120);
        assert!(Graph::hypercube(0).is_err());
        assert!(Graph::hypercube(25).is_err());
    }

    #[test]
    fn cycle_and_path() {
        let c = Graph::cycle(5).unwrap();
        assert_eq!(c.neighbors(0), &[1, 4]);
        let p = Graph::path(3).unwrap();
        assert_eq!(p.neighbors(0), &[1]);
        assert_eq!(p.max_degree(), 2);
        assert!(matches!(Graph::cycle(2), Err(Error::Size(_))));
        assert!(matches!(Graph::path(1), Err(Error::Size(_))));
        let c4 = DiffusionMatrix::new(Graph::cycle(4).unwrap()).unwrap();
        assert_eq!(c4.entry(0, 0), Ratio::new(1, 2));
    }

    #[test]
    fn diffusion_entries() {
        let p = DiffusionMatrix::new(Graph::hypercube(3).unwrap()).unwrap();
        assert_eq!(p.entry(0, 1), Ratio::new(1, 6));
        assert_eq!(p.entry(0, 0), Ratio::new(1, 2));
        assert_eq!(p.entry(0, 3), Ratio::new(0, 1));

        let p = DiffusionMatrix::new(Graph::path(3).unwrap()).unwrap();
        assert_eq!(p.entry(0, 0), Ratio::new(3, 4));
        assert_eq!(p.entry(1, 1), Ratio::new(1, 2));

        let p = DiffusionMatrix::new(Graph::torus(&[4, 4]).unwrap()).unwrap();
        assert_eq!(p.entry(5, 5), Ratio::new(1, 2));
        assert_eq!(p.entry(5, 6), Ratio::new(1, 8));
    }

    #[test]
    fn distances() {
        let g = Graph::hypercube(4).unwrap();
        assert_eq!(g.dist(0b0000, 0b0110).unwrap(), 2);
        assert_eq!(Graph::cycle(5).unwrap().diameter(), 2);
        let t = Graph::torus(&[3, 4]).unwrap();
        let a = t.torus_index(&[0, 0]).unwrap();
        let b = t.torus_index(&[2, 2]).unwrap();
        assert_eq!(t.dist(a, b).unwrap(), 3);
    }

    #[test]
    fn closed_form_diameters_match_bfs() {
        let graphs = [
            Graph::torus(&[3, 4, 5]).unwrap(),
            Graph::torus(&[6, 7]).unwrap(),
            Graph::hypercube(5).unwrap(),
            Graph::cycle(9).unwrap(),
            Graph::path(7).unwrap(),
        ];
        for g in &graphs {
            let bfs = (0..g.n()).map(|v| g.eccentricity(v)).max().unwrap();
            assert_eq!(g.diameter(), bfs, "{:?}", g.kind());
        }
    }

    #[test]
    fn custom_graph_validation() {
        assert!(Graph::custom(3, &[(0, 1), (1, 2)]).is_ok());
        assert!(Graph::custom(3, &[(0, 0)]).is_err());
        assert!(Graph::custom(3, &[(0, 1), (1, 0), (1, 2)]).is_err());
        assert!(Graph::custom(3, &[(0, 1)]).is_err());
        assert!(Graph::custom(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["torus:4x4x4", "hypercube:10", "cycle:64", "path:9"] {
            let spec: GraphSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("torus:4xx4".parse::<GraphSpec>().is_err());
        assert!("mesh:4".parse::<GraphSpec>().is_err());
        assert!("cycle".parse::<GraphSpec>().is_err());
        let g = "torus:4x4x4".parse::<GraphSpec>().unwrap().build().unwrap();
        assert_eq!(g.n(), 64);
    }

    #[test]
    fn graph_json_document() {
        let g = Graph::torus(&[3, 5]).unwrap();
        let json = serde_json::to_value(&g).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"kind": "torus", "params": [3, 5], "n": 15})
        );
        let back: Graph = serde_json::from_value(json).unwrap();
        assert_eq!(back, g);
        let custom = Graph::custom(3, &[(2, 1), (0, 1)]).unwrap();
        let back: Graph = serde_json::from_str(&serde_json::to_string(&custom).unwrap()).unwrap();
        assert_eq!(back, custom);
    }
}
