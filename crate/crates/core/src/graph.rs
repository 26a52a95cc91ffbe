//! Immutable graph topology in CSR form plus its transpose index.
//!
//! Self-loops in the input are counted but stripped from the stored adjacency;
//! normalization recipes that want them re-add them explicitly. Duplicate
//! edges are collapsed: the adjacency is binary throughout.

use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    directed: bool,
    out_indptr: Vec<usize>,
    out_indices: Vec<usize>,
    in_indptr: Vec<usize>,
    in_indices: Vec<usize>,
    self_loop_count: usize,
}

impl Graph {
    /// Build from an edge list. Self-loops are recorded in `self_loop_count`
    /// (one per distinct looped node) and excluded from the adjacency;
    /// duplicates are collapsed. For `directed = false` every edge is stored
    /// in both directions.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], directed: bool) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(edges.len() * 2);
        let mut loops: Vec<usize> = Vec::new();
        for &(s, d) in edges {
            if s >= n || d >= n {
                return Err(Error::invalid(format!(
                    "edge ({s},{d}) references a node >= n={n}"
                )));
            }
            if s == d {
                loops.push(s);
                continue;
            }
            pairs.push((s, d));
            if !directed {
                pairs.push((d, s));
            }
        }
        loops.sort_unstable();
        loops.dedup();
        pairs.sort_unstable();
        pairs.dedup();

        let (out_indptr, out_indices) = csr_from_sorted_pairs(n, &pairs);
        let mut rev: Vec<(usize, usize)> = pairs.iter().map(|&(s, d)| (d, s)).collect();
        rev.sort_unstable();
        let (in_indptr, in_indices) = csr_from_sorted_pairs(n, &rev);

        Ok(Self {
            n,
            directed,
            out_indptr,
            out_indices,
            in_indptr,
            in_indices,
            self_loop_count: loops.len(),
        })
    }

    /// Parse a `src<TAB>dst` edge-list file. Lines starting with `#` are
    /// comments; blank lines are ignored. Node count is `1 + max id` unless
    /// `nodes` overrides it.
    pub fn load_edge_list(path: &Path, directed: bool, nodes: Option<usize>) -> Result<Self> {
        let origin = path.display().to_string();
        let f = std::fs::File::open(path).map_err(|e| Error::io(&*origin, e))?;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut max_id: Option<usize> = None;
        for (lineno, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&*origin, e))?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut it = t.split('\t');
            let (src, dst) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a.trim(), b.trim()),
                _ => {
                    return Err(Error::parse(
                        &*origin,
                        lineno + 1,
                        "expected exactly \"src<TAB>dst\"",
                    ))
                }
            };
            let s: usize = src.parse().map_err(|_| {
                Error::parse(&*origin, lineno + 1, format!("bad node id {src:?}"))
            })?;
            let d: usize = dst.parse().map_err(|_| {
                Error::parse(&*origin, lineno + 1, format!("bad node id {dst:?}"))
            })?;
            if let Some(n) = nodes {
                if s >= n || d >= n {
                    return Err(Error::parse(
                        &*origin,
                        lineno + 1,
                        format!("node id {} >= declared node count {n}", s.max(d)),
                    ));
                }
            }
            max_id = Some(max_id.map_or(s.max(d), |m| m.max(s).max(d)));
            edges.push((s, d));
        }
        let n = match (nodes, max_id) {
            (Some(n), _) => n,
            (None, Some(m)) => m + 1,
            (None, None) => {
                return Err(Error::parse(
                    &*origin,
                    0,
                    "empty edge list and no explicit node count",
                ))
            }
        };
        Self::from_edges(n, &edges, directed)
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        use std::io::Write;
        let f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut w = std::io::BufWriter::new(f);
        for i in 0..self.n {
            for &j in self.out_neighbors(i) {
                // For undirected graphs, emit each edge once.
                if self.directed || i <= j {
                    writeln!(w, "{i}\t{j}")
                        .map_err(|e| Error::io(path.display().to_string(), e))?;
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn self_loop_count(&self) -> usize {
        self.self_loop_count
    }

    /// Number of stored directed arcs (an undirected edge counts twice).
    pub fn arc_count(&self) -> usize {
        self.out_indices.len()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_indptr[i + 1] - self.out_indptr[i]
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_indptr[i + 1] - self.in_indptr[i]
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_indices[self.out_indptr[i]..self.out_indptr[i + 1]]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_indices[self.in_indptr[i]..self.in_indptr[i + 1]]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.out_neighbors(i).binary_search(&j).is_ok()
    }

    /// Undirected view: union of out- and in-edges, stored symmetrically.
    pub fn symmetrize(&self) -> Graph {
        if !self.directed {
            return self.clone();
        }
        let mut edges = Vec::with_capacity(self.arc_count());
        for i in 0..self.n {
            for &j in self.out_neighbors(i) {
                edges.push((i, j));
            }
        }
        Graph::from_edges(self.n, &edges, false).expect("indices already validated")
    }

    /// Binary adjacency as a sparse operator (1.0 per stored arc, no loops).
    pub fn adjacency(&self) -> SparseOperator {
        let values = vec![1.0; self.out_indices.len()];
        SparseOperator::from_csr_unchecked(
            self.n,
            self.n,
            self.out_indptr.clone(),
            self.out_indices.clone(),
            values,
            "A",
        )
    }

    /// Connected components of the undirected view. Returns (component id per
    /// node, component count).
    pub fn connected_components(&self) -> (Vec<usize>, usize) {
        let mut comp = vec![usize::MAX; self.n];
        let mut count = 0usize;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = count;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in self.out_neighbors(v).iter().chain(self.in_neighbors(v)) {
                    if comp[w] == usize::MAX {
                        comp[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (comp, count)
    }
}

fn csr_from_sorted_pairs(n: usize, pairs: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    let mut indptr = vec![0usize; n + 1];
    let mut indices = Vec::with_capacity(pairs.len());
    let mut cur = 0usize;
    for &(s, d) in pairs {
        while cur <= s {
            indptr[cur] = indices.len();
            cur += 1;
        }
        indices.push(d);
    }
    while cur <= n {
        indptr[cur] = indices.len();
        cur += 1;
    }
    (indptr, indices)
}
