//! Sparse binary graphs: the bipartite graph fed to the null model and the
//! undirected monopartite graph produced by projections and retweet logs.
//!
//! Nodes are addressed by dense indices; each graph keeps the identifier of
//! every index and a reverse map. Neighbourhoods are stored sorted so that
//! common-neighbour counts reduce to a merge of two sorted slices.

use std::collections::hash_map::{DefaultHasher, Entry};
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which layer of a bipartite graph an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Rows,
    Columns,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Rows => "rows",
            Layer::Columns => "columns",
        }
    }
}

impl std::str::FromStr for Layer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" | "row" => Ok(Layer::Rows),
            "columns" | "cols" | "column" => Ok(Layer::Columns),
            other => Err(Error::InvalidConfig(format!("unknown layer `{other}`"))),
        }
    }
}

/// Observed degrees of both layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequences {
    pub row_degrees: Vec<usize>,
    pub col_degrees: Vec<usize>,
}

/// Interns string identifiers to dense indices in order of first appearance.
#[derive(Debug, Default, Clone)]
struct Interner {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), i);
        i
    }
}

fn sort_dedup(lists: &mut [Vec<usize>]) {
    for l in lists.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
}

/// Size of the intersection of two sorted, deduplicated slices.
pub fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Binary bipartite graph with row-major and column-major sorted adjacency.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    row_ids: Vec<String>,
    col_ids: Vec<String>,
    row_index: HashMap<String, usize>,
    col_index: HashMap<String, usize>,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
    n_links: usize,
    dropped_nodes: usize,
}

impl BipartiteGraph {
    /// Builds a graph from `(row_id, col_id)` pairs. Repeated pairs collapse to
    /// one link; index order follows first appearance.
    pub fn from_edges<I, A, B>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut rows = Interner::default();
        let mut cols = Interner::default();
        let mut links = Vec::new();
        for (r, c) in edges {
            let (r, c) = (r.as_ref(), c.as_ref());
            if r.is_empty() || c.is_empty() {
                return Err(Error::InvalidConfig("empty node identifier".into()));
            }
            links.push((rows.intern(r), cols.intern(c)));
        }
        if links.is_empty() {
            return Err(Error::EmptyGraph);
        }
        if let Some(id) = rows.ids.iter().find(|id| cols.index.contains_key(*id)) {
            return Err(Error::LayerCollision(id.clone()));
        }
        Ok(Self::assemble(rows.ids, cols.ids, &links, 0))
    }

    /// Builds a graph over explicit layers from index pairs. Nodes left without
    /// any link are dropped and counted in [`BipartiteGraph::dropped_nodes`].
    pub fn from_links(
        row_ids: &[String],
        col_ids: &[String],
        links: &[(usize, usize)],
    ) -> Result<Self> {
        let mut row_deg = vec![0usize; row_ids.len()];
        let mut col_deg = vec![0usize; col_ids.len()];
        for &(r, c) in links {
            if r >= row_ids.len() {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    len: row_ids.len(),
                });
            }
            if c >= col_ids.len() {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    len: col_ids.len(),
                });
            }
            row_deg[r] += 1;
            col_deg[c] += 1;
        }
        if links.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let remap = |deg: &[usize], ids: &[String]| {
            let mut new_ids = Vec::new();
            let mut map = vec![usize::MAX; deg.len()];
            for (i, &d) in deg.iter().enumerate() {
                if d > 0 {
                    map[i] = new_ids.len();
                    new_ids.push(ids[i].clone());
                }
            }
            (new_ids, map)
        };
        let (new_rows, row_map) = remap(&row_deg, row_ids);
        let (new_cols, col_map) = remap(&col_deg, col_ids);
        let dropped = (row_ids.len() - new_rows.len()) + (col_ids.len() - new_cols.len());
        let links: Vec<_> = links
            .iter()
            .map(|&(r, c)| (row_map[r], col_map[c]))
            .collect();
        let g = Self::assemble(new_rows, new_cols, &links, dropped);
        if let Some(id) = g.row_ids.iter().find(|id| g.col_index.contains_key(*id)) {
            return Err(Error::LayerCollision(id.clone()));
        }
        Ok(g)
    }

    fn assemble(
        row_ids: Vec<String>,
        col_ids: Vec<String>,
        links: &[(usize, usize)],
        dropped: usize,
    ) -> Self {
        let mut rows = vec![Vec::new(); row_ids.len()];
        let mut cols = vec![Vec::new(); col_ids.len()];
        for &(r, c) in links {
            rows[r].push(c);
            cols[c].push(r);
        }
        sort_dedup(&mut rows);
        sort_dedup(&mut cols);
        let n_links = rows.iter().map(Vec::len).sum();
        let index = |ids: &[String]| {
            ids.iter()
                .enumerate()
                .map(|(i, s)| (s.clone(), i))
                .collect()
        };
        Self {
            row_index: index(&row_ids),
            col_index: index(&col_ids),
            row_ids,
            col_ids,
            rows,
            cols,
            n_links,
            dropped_nodes: dropped,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    /// Zero-degree nodes removed at construction.
    pub fn dropped_nodes(&self) -> usize {
        self.dropped_nodes
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    pub fn ids(&self, layer: Layer) -> &[String] {
        match layer {
            Layer::Rows => &self.row_ids,
            Layer::Columns => &self.col_ids,
        }
    }

    pub fn row_index(&self, id: &str) -> Option<usize> {
        self.row_index.get(id).copied()
    }

    pub fn col_index(&self, id: &str) -> Option<usize> {
        self.col_index.get(id).copied()
    }

    /// Sorted column neighbours of row `r`.
    pub fn row_neighbors(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    /// Sorted row neighbours of column `c`.
    pub fn col_neighbors(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }

    /// Adjacency lists of `layer` (each entry lists indices in the other layer).
    pub fn adjacency(&self, layer: Layer) -> &[Vec<usize>] {
        match layer {
            Layer::Rows => &self.rows,
            Layer::Columns => &self.cols,
        }
    }

    pub fn has_link(&self, r: usize, c: usize) -> bool {
        self.rows
            .get(r)
            .is_some_and(|n| n.binary_search(&c).is_ok())
    }

    /// Iterates links as `(row, col)` in row-major order.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, n)| n.iter().map(move |&c| (r, c)))
    }

    pub fn degree_sequences(&self) -> DegreeSequences {
        DegreeSequences {
            row_degrees: self.rows.iter().map(Vec::len).collect(),
            col_degrees: self.cols.iter().map(Vec::len).collect(),
        }
    }

    /// Number of columns shared by rows `r` and `r2`.
    pub fn v_motifs(&self, r: usize, r2: usize) -> Result<usize> {
        self.layer_v_motifs(Layer::Rows, r, r2)
    }

    /// Common-neighbour count between two nodes of the same layer.
    pub fn layer_v_motifs(&self, layer: Layer, a: usize, b: usize) -> Result<usize> {
        let adj = self.adjacency(layer);
        for i in [a, b] {
            if i >= adj.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: adj.len(),
                });
            }
        }
        if a == b {
            return Err(Error::SelfSimilarity(a));
        }
        Ok(sorted_intersection_len(&adj[a], &adj[b]))
    }

    /// Stable content hash used to check that projections derive from this graph.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.row_ids.hash(&mut h);
        self.col_ids.hash(&mut h);
        self.rows.hash(&mut h);
        h.finish()
    }
}

/// Undirected binary graph without self-loops.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    node_ids: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<usize>>,
    n_edges: usize,
    dropped_self_loops: usize,
}

impl Graph {
    /// Builds a graph over `node_ids` from index pairs. Direction and
    /// multiplicity are discarded; self-loops are dropped and counted.
    pub fn from_index_edges<I>(node_ids: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = node_ids.len();
        let mut adj = vec![Vec::new(); n];
        let mut dropped = 0;
        for (u, v) in edges {
            for i in [u, v] {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, len: n });
                }
            }
            if u == v {
                dropped += 1;
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        sort_dedup(&mut adj);
        let n_edges = adj.iter().map(Vec::len).sum::<usize>() / 2;
        let mut index = HashMap::with_capacity(n);
        for (i, id) in node_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "duplicate node identifier `{id}`"
                )));
            }
        }
        Ok(Self {
            node_ids,
            index,
            adj,
            n_edges,
            dropped_self_loops: dropped,
        })
    }

    /// Builds an undirected graph from identifier pairs (for example retweets).
    pub fn from_edges<I, A, B>(edges: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut nodes = Interner::default();
        let mut pairs = Vec::new();
        let mut dropped = 0;
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a == b {
                dropped += 1;
                continue;
            }
            pairs.push((nodes.intern(a), nodes.intern(b)));
        }
        let mut g =
            Self::from_index_edges(nodes.ids, pairs).expect("interned indices are in range");
        g.dropped_self_loops = dropped;
        g
    }

    pub fn n_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn dropped_self_loops(&self) -> usize {
        self.dropped_self_loops
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.node_ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u).is_some_and(|n| n.binary_search(&v).is_ok())
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, n)| n.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Edges as identifier pairs.
    pub fn id_edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges()
            .map(|(u, v)| (self.node_id(u), self.node_id(v)))
    }
}

/// Builds the undirected binary interaction graph of a list of directed ties.
pub fn build_monopartite<I, A, B>(edges: I) -> Graph
where
    I: IntoIterator<Item = (A, B)>,
    A: AsRef<str>,
    B: AsRef<str>,
{
    Graph::from_edges(edges)
}

/// Maps labels given per identifier onto graph indices, in order of the
/// graph's nodes. Unknown identifiers are ignored.
pub fn labels_by_index<L: Clone>(g: &Graph, labels: &HashMap<String, L>) -> Vec<Option<L>> {
    g.node_ids()
        .iter()
        .map(|id| labels.get(id).cloned())
        .collect()
}

/// Relabels arbitrary labels to `0..k` in order of first appearance.
pub fn canonical_labels<L: Eq + Hash + Clone>(labels: &[L]) -> Vec<usize> {
    let mut map: HashMap<L, usize> = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            match map.entry(l.clone()) {
                Entry::Occupied(e) => *e.get(),
                Entry::Vacant(e) => *e.insert(next),
            }
        })
        .collect()
}
