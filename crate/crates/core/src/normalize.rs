//! Normalized adjacency recipes and the normalized Laplacian.
//!
//! Zero degrees follow the convention d^{-1/2} = 0 and d^{-1} = 0: isolated
//! nodes produce all-zero rows and columns rather than NaNs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sparse::SparseOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormScheme {
    /// D_hat^{-1/2} (A+I) D_hat^{-1/2} with self-loops added before normalizing.
    SymSelfloop,
    /// D^{-1/2} A D^{-1/2}, no self-loops.
    Sym,
    /// D^{-1} A, row-stochastic on nodes with outgoing edges.
    Row,
    /// S_fwd = D_out^{-1/2} A D_in^{-1/2} (directed graphs only).
    DirFwd,
    /// S_fwd^T, the exact transpose of `DirFwd`.
    DirBwd,
    /// D_out^{-1} A.
    RowFwd,
    /// D_in^{-1} A^T.
    RowBwd,
}

impl NormScheme {
    pub fn requires_directed(self) -> bool {
        matches!(self, NormScheme::DirFwd | NormScheme::DirBwd)
    }

    pub fn name(self) -> &'static str {
        match self {
            NormScheme::SymSelfloop => "sym_selfloop",
            NormScheme::Sym => "sym",
            NormScheme::Row => "row",
            NormScheme::DirFwd => "dir_fwd",
            NormScheme::DirBwd => "dir_bwd",
            NormScheme::RowFwd => "row_fwd",
            NormScheme::RowBwd => "row_bwd",
        }
    }
}

impl fmt::Display for NormScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym_selfloop" => Ok(NormScheme::SymSelfloop),
            "sym" => Ok(NormScheme::Sym),
            "row" => Ok(NormScheme::Row),
            "dir_fwd" => Ok(NormScheme::DirFwd),
            "dir_bwd" => Ok(NormScheme::DirBwd),
            "row_fwd" => Ok(NormScheme::RowFwd),
            "row_bwd" => Ok(NormScheme::RowBwd),
            other => Err(Error::invalid(format!("unknown normalization {other:?}"))),
        }
    }
}

fn inv_sqrt_or_zero(d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        1.0 / (d as f64).sqrt()
    }
}

fn inv_or_zero(d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        1.0 / d as f64
    }
}

/// Materialize a normalization of the adjacency as a sparse operator.
pub fn build_normalized(g: &Graph, scheme: NormScheme) -> Result<SparseOperator> {
    if g.n() == 0 {
        return Err(Error::invalid("empty graph"));
    }
    if scheme.requires_directed() && !g.directed() {
        return Err(Error::invalid(format!(
            "{scheme} normalization requires a directed graph"
        )));
    }
    let n = g.n();
    let mut trips: Vec<(usize, usize, f64)> = Vec::with_capacity(g.arc_count() + n);
    match scheme {
        NormScheme::SymSelfloop => {
            // Degrees of A + I. For directed input the row sums of A are used.
            let deg: Vec<usize> = (0..n).map(|i| g.out_degree(i) + 1).collect();
            let scale: Vec<f64> = deg.iter().map(|&d| inv_sqrt_or_zero(d)).collect();
            for i in 0..n {
                trips.push((i, i, scale[i] * scale[i]));
                for &j in g.out_neighbors(i) {
                    trips.push((i, j, scale[i] * scale[j]));
                }
            }
        }
        NormScheme::Sym => {
            let scale: Vec<f64> = (0..n).map(|i| inv_sqrt_or_zero(g.out_degree(i))).collect();
            for i in 0..n {
                for &j in g.out_neighbors(i) {
                    trips.push((i, j, scale[i] * scale[j]));
                }
            }
        }
        NormScheme::Row | NormScheme::RowFwd => {
            for i in 0..n {
                let w = inv_or_zero(g.out_degree(i));
                for &j in g.out_neighbors(i) {
                    trips.push((i, j, w));
                }
            }
        }
        NormScheme::RowBwd => {
            for i in 0..n {
                let w = inv_or_zero(g.in_degree(i));
                for &j in g.in_neighbors(i) {
                    trips.push((i, j, w));
                }
            }
        }
        NormScheme::DirFwd => {
            let out_scale: Vec<f64> = (0..n).map(|i| inv_sqrt_or_zero(g.out_degree(i))).collect();
            let in_scale: Vec<f64> = (0..n).map(|i| inv_sqrt_or_zero(g.in_degree(i))).collect();
            for i in 0..n {
                for &j in g.out_neighbors(i) {
                    trips.push((i, j, out_scale[i] * in_scale[j]));
                }
            }
        }
        NormScheme::DirBwd => {
            let mut t = build_normalized(g, NormScheme::DirFwd)?.transpose();
            t.set_provenance(scheme.name());
            return Ok(t);
        }
    }
    let mut s = SparseOperator::from_triplets(n, n, trips, scheme.name())?;
    s.set_provenance(scheme.name());
    Ok(s)
}

/// Normalized Laplacian I - A_norm, where A_norm is the symmetric
/// normalization with or without self-loops.
pub fn normalized_laplacian(g: &Graph, with_self_loops: bool) -> Result<SparseOperator> {
    let scheme = if with_self_loops {
        NormScheme::SymSelfloop
    } else {
        NormScheme::Sym
    };
    let a = build_normalized(g, scheme)?;
    let mut lap = SparseOperator::identity(g.n()).add(&a.scale(-1.0))?;
    lap.set_provenance(format!("laplacian({})", scheme.name()));
    Ok(lap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)], false).unwrap()
    }

    #[test]
    fn sym_selfloop_path_entry() {
        // Path 0-1-2 undirected: deg_hat = [2,3,2]; entry (0,1) = 1/sqrt(2*3).
        let s = build_normalized(&path3(), NormScheme::SymSelfloop).unwrap();
        let want = 1.0 / (6.0f64).sqrt();
        assert!((s.get(0, 1) - want).abs() < 1e-12);
        assert!((s.get(0, 1) - 0.408248).abs() < 1e-6);
        assert!((s.get(0, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dir_fwd_single_edge() {
        let g = Graph::from_edges(2, &[(0, 1)], true).unwrap();
        let s = build_normalized(&g, NormScheme::DirFwd).unwrap();
        assert_eq!(s.nnz(), 1);
        assert_eq!(s.get(0, 1), 1.0);
    }

    #[test]
    fn isolated_node_gives_zero_row_and_col() {
        for scheme in [
            NormScheme::SymSelfloop,
            NormScheme::Sym,
            NormScheme::Row,
            NormScheme::RowFwd,
            NormScheme::RowBwd,
        ] {
            let g = Graph::from_edges(3, &[(0, 1)], false).unwrap();
            let s = build_normalized(&g, scheme).unwrap();
            for j in 0..3 {
                if scheme == NormScheme::SymSelfloop && j == 2 {
                    // self-loop entry on the diagonal is allowed
                    continue;
                }
                assert_eq!(s.get(2, j), 0.0, "{scheme} row");
            }
            assert_eq!(s.get(0, 2), 0.0, "{scheme} col");
            assert_eq!(s.get(1, 2), 0.0, "{scheme} col");
        }
    }

    #[test]
    fn dir_scheme_rejects_undirected() {
        let g = Graph::from_edges(2, &[(0, 1)], false).unwrap();
        assert!(build_normalized(&g, NormScheme::DirFwd).is_err());
        assert!(build_normalized(&g, NormScheme::DirBwd).is_err());
    }

    #[test]
    fn dir_bwd_is_exact_transpose() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (2, 3), (3, 1), (4, 0)], true).unwrap();
        let fwd = build_normalized(&g, NormScheme::DirFwd).unwrap();
        let bwd = build_normalized(&g, NormScheme::DirBwd).unwrap();
        let t = fwd.transpose();
        for i in 0..5 {
            let a: Vec<_> = bwd.row(i).collect();
            let b: Vec<_> = t.row(i).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn dir_fwd_matches_brute_force_dense() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..5 {
            let n = rng.gen_range(5..50);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.gen::<f64>() < 0.15 {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::from_edges(n, &edges, true).unwrap();
            let s = build_normalized(&g, NormScheme::DirFwd).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let expect = if g.has_edge(i, j) {
                        let di = g.out_degree(i) as f64;
                        let dj = g.in_degree(j) as f64;
                        1.0 / (di * dj).sqrt()
                    } else {
                        0.0
                    };
                    assert!((s.get(i, j) - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn row_schemes_are_row_stochastic_or_zero() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (2, 3)], true).unwrap();
        for scheme in [NormScheme::Row, NormScheme::RowFwd, NormScheme::RowBwd] {
            let s = build_normalized(&g, scheme).unwrap();
            for i in 0..4 {
                let sum = s.row_sum(i);
                assert!(
                    (sum - 1.0).abs() < 1e-12 || sum == 0.0,
                    "{scheme} row {i} sums to {sum}"
                );
            }
        }
    }

    #[test]
    fn sym_selfloop_is_symmetric_on_undirected() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4), (0, 4)], false).unwrap();
        let s = build_normalized(&g, NormScheme::SymSelfloop).unwrap();
        for i in 0..5 {
            for (j, v) in s.row(i) {
                assert_eq!(v, s.get(j, i));
            }
        }
    }

    #[test]
    fn laplacian_single_edge() {
        let g = Graph::from_edges(2, &[(0, 1)], false).unwrap();
        let lap = normalized_laplacian(&g, false).unwrap();
        let d = lap.to_dense();
        assert_eq!(d.data(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn laplacian_of_edgeless_graph_is_identity() {
        let g = Graph::from_edges(2, &[], true).unwrap();
        let lap = normalized_laplacian(&g, false).unwrap();
        let d = lap.to_dense();
        assert_eq!(d.data(), &[1.0, 0.0, 0.0, 1.0]);
    }
}
