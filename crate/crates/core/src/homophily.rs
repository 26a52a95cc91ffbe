//! Homophily analytics: node homophily, class compatibility matrices, their
//! weighted generalizations for arbitrary message-passing matrices, and
//! effective homophily over the 1- and 2-hop operator family.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sparse::SparseOperator;

pub const UNKNOWN_LABEL: u32 = u32::MAX;

/// Per-node class ids in [0, C) or unknown.
#[derive(Debug, Clone)]
pub struct LabelVector {
    ids: Vec<u32>,
    num_classes: usize,
}

impl LabelVector {
    /// `ids` uses [`UNKNOWN_LABEL`] for unlabeled nodes.
    pub fn new(ids: Vec<u32>, num_classes: usize) -> Result<Self> {
        if num_classes < 1 {
            return Err(Error::invalid("need at least one class"));
        }
        for (i, &c) in ids.iter().enumerate() {
            if c != UNKNOWN_LABEL && c as usize >= num_classes {
                return Err(Error::invalid(format!(
                    "node {i} has label {c} >= class count {num_classes}"
                )));
            }
        }
        Ok(Self { ids, num_classes })
    }

    pub fn from_known(ids: Vec<u32>) -> Result<Self> {
        let c = ids.iter().copied().max().map_or(1, |m| m as usize + 1);
        Self::new(ids, c)
    }

    /// Parse "node_id,label_id" lines; nodes absent from the file are unknown.
    /// `n` fixes the vector length (node count of the subject graph).
    pub fn load_csv(path: &std::path::Path, n: usize) -> Result<Self> {
        use std::io::BufRead;
        let origin = path.display().to_string();
        let f = std::fs::File::open(path).map_err(|e| Error::io(&*origin, e))?;
        let mut ids = vec![UNKNOWN_LABEL; n];
        let mut max_label = 0u32;
        let mut any = false;
        for (lineno, line) in std::io::BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&*origin, e))?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut it = t.split(',');
            let (a, b) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a.trim(), b.trim()),
                _ => {
                    return Err(Error::parse(
                        &*origin,
                        lineno + 1,
                        "expected \"node_id,label_id\"",
                    ))
                }
            };
            let node: usize = a
                .parse()
                .map_err(|_| Error::parse(&*origin, lineno + 1, format!("bad node id {a:?}")))?;
            let label: u32 = b
                .parse()
                .map_err(|_| Error::parse(&*origin, lineno + 1, format!("bad label {b:?}")))?;
            if node >= n {
                return Err(Error::parse(
                    &*origin,
                    lineno + 1,
                    format!("node id {node} >= node count {n}"),
                ));
            }
            ids[node] = label;
            max_label = max_label.max(label);
            any = true;
        }
        let c = if any { max_label as usize + 1 } else { 1 };
        Self::new(ids, c)
    }

    pub fn save_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut w = std::io::BufWriter::new(f);
        for (i, &c) in self.ids.iter().enumerate() {
            if c != UNKNOWN_LABEL {
                writeln!(w, "{i},{c}").map_err(|e| Error::io(path.display().to_string(), e))?;
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn get(&self, i: usize) -> Option<u32> {
        let c = self.ids[i];
        (c != UNKNOWN_LABEL).then_some(c)
    }

    pub fn is_known(&self, i: usize) -> bool {
        self.ids[i] != UNKNOWN_LABEL
    }

    pub fn known_count(&self) -> usize {
        self.ids.iter().filter(|&&c| c != UNKNOWN_LABEL).count()
    }

    pub fn all_known(&self) -> bool {
        self.known_count() == self.len()
    }

    fn require_known(&self) -> Result<()> {
        if let Some(i) = self.ids.iter().position(|&c| c == UNKNOWN_LABEL) {
            return Err(Error::invalid(format!(
                "node {i} has an unknown label; homophily needs full labels"
            )));
        }
        Ok(())
    }
}

/// Fraction of same-label neighbors averaged over nodes with outgoing edges.
pub fn node_homophily(g: &Graph, y: &LabelVector) -> Result<f64> {
    if y.len() != g.n() {
        return Err(Error::shape(format!(
            "labels cover {} nodes, graph has {}",
            y.len(),
            g.n()
        )));
    }
    y.require_known()?;
    let mut total = 0.0;
    let mut counted = 0usize;
    for i in 0..g.n() {
        let deg = g.out_degree(i);
        if deg == 0 {
            continue;
        }
        let yi = y.ids[i];
        let same = g.out_neighbors(i).iter().filter(|&&j| y.ids[j] == yi).count();
        total += same as f64 / deg as f64;
        counted += 1;
    }
    if counted == 0 {
        return Ok(0.0);
    }
    Ok(total / counted as f64)
}

/// C x C matrix of edge fractions: entry (k,l) is the fraction of edges from
/// class-k nodes that point at class-l nodes. Rows for classes with no
/// outgoing edges are all-zero.
pub fn compatibility_matrix(g: &Graph, y: &LabelVector) -> Result<Vec<Vec<f64>>> {
    if y.len() != g.n() {
        return Err(Error::shape("labels/graph size mismatch".to_string()));
    }
    y.require_known()?;
    let c = y.num_classes();
    let mut counts = vec![vec![0.0f64; c]; c];
    for i in 0..g.n() {
        let yi = y.ids[i] as usize;
        for &j in g.out_neighbors(i) {
            counts[yi][y.ids[j] as usize] += 1.0;
        }
    }
    normalize_rows(&mut counts);
    Ok(counts)
}

fn normalize_rows(m: &mut [Vec<f64>]) {
    for row in m {
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            for v in row {
                *v /= sum;
            }
        }
    }
}

/// Weighted node homophily of a message-passing matrix: row mass on same-label
/// columns divided by total row mass, averaged over rows with positive mass.
/// `zero_diag` removes diagonal entries before the computation.
pub fn weighted_node_homophily(s: &SparseOperator, y: &LabelVector, zero_diag: bool) -> Result<f64> {
    if s.rows() != s.cols() || s.rows() != y.len() {
        return Err(Error::shape(format!(
            "operator is {}x{}, labels cover {}",
            s.rows(),
            s.cols(),
            y.len()
        )));
    }
    y.require_known()?;
    let mut total = 0.0;
    let mut counted = 0usize;
    for i in 0..s.rows() {
        let yi = y.ids[i];
        let mut mass = 0.0;
        let mut same = 0.0;
        for (j, v) in s.row(i) {
            if zero_diag && j == i {
                continue;
            }
            if v < 0.0 {
                return Err(Error::invalid(format!(
                    "negative entry at ({i},{j}); homophily needs nonnegative weights"
                )));
            }
            mass += v;
            if y.ids[j] == yi {
                same += v;
            }
        }
        if mass > 0.0 {
            total += same / mass;
            counted += 1;
        }
    }
    if counted == 0 {
        return Ok(0.0);
    }
    Ok(total / counted as f64)
}

/// Weighted compatibility matrix: entry (k,l) is the total mass from class-k
/// rows into class-l columns over the total mass leaving class k.
pub fn weighted_compatibility(
    s: &SparseOperator,
    y: &LabelVector,
    zero_diag: bool,
) -> Result<Vec<Vec<f64>>> {
    if s.rows() != s.cols() || s.rows() != y.len() {
        return Err(Error::shape("operator/labels size mismatch".to_string()));
    }
    y.require_known()?;
    let c = y.num_classes();
    let mut mass = vec![vec![0.0f64; c]; c];
    for i in 0..s.rows() {
        let yi = y.ids[i] as usize;
        for (j, v) in s.row(i) {
            if zero_diag && j == i {
                continue;
            }
            if v < 0.0 {
                return Err(Error::invalid("negative entry in operator".to_string()));
            }
            mass[yi][y.ids[j] as usize] += v;
        }
    }
    normalize_rows(&mut mass);
    Ok(mass)
}

/// Homophily of one diffusion matrix, under both diagonal conventions.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorHomophily {
    pub operator: String,
    pub homophily_zero_diag: f64,
    pub homophily_with_diag: f64,
    pub compatibility_zero_diag: Vec<Vec<f64>>,
}

/// The Table-1-style report: weighted homophily per operator plus effective
/// homophily over the undirected and directed families and their relative gap.
#[derive(Debug, Clone, Serialize)]
pub struct HomophilyReport {
    pub node_homophily: f64,
    pub operators: Vec<OperatorHomophily>,
    pub h_eff_undirected: f64,
    pub h_eff_directed: f64,
    /// (h_d - h_u) / h_u; absent if the undirected effective homophily is zero.
    pub gain: Option<f64>,
    pub h_eff_undirected_with_diag: f64,
    pub h_eff_directed_with_diag: f64,
    pub gain_with_diag: Option<f64>,
}

const UNDIRECTED_OPS: [&str; 2] = ["A_u", "A_u^2"];
const DIRECTED_OPS: [&str; 6] = ["A", "A^T", "A^2", "(A^T)^2", "A^T*A", "A*A^T"];

/// Evaluate weighted node homophily over the binary 1- and 2-hop family:
/// `{A, A^T, A^2, (A^T)^2, A^T A, A A^T}` for the directed graph and
/// `{A_u, A_u^2}` for its symmetrization. Products use the binary adjacency.
pub fn effective_homophily(g: &Graph, y: &LabelVector) -> Result<HomophilyReport> {
    y.require_known()?;
    let a = g.adjacency();
    let at = a.transpose();
    let u = g.symmetrize();
    let au = u.adjacency();

    let mut named: Vec<(String, SparseOperator)> = Vec::new();
    named.push((UNDIRECTED_OPS[0].into(), au.clone()));
    named.push((UNDIRECTED_OPS[1].into(), au.spspmm(&au)?));
    named.push((DIRECTED_OPS[0].into(), a.clone()));
    named.push((DIRECTED_OPS[1].into(), at.clone()));
    named.push((DIRECTED_OPS[2].into(), a.spspmm(&a)?));
    named.push((DIRECTED_OPS[3].into(), at.spspmm(&at)?));
    named.push((DIRECTED_OPS[4].into(), at.spspmm(&a)?));
    named.push((DIRECTED_OPS[5].into(), a.spspmm(&at)?));

    let mut operators = Vec::with_capacity(named.len());
    for (name, op) in &named {
        operators.push(OperatorHomophily {
            operator: name.clone(),
            homophily_zero_diag: weighted_node_homophily(op, y, true)?,
            homophily_with_diag: weighted_node_homophily(op, y, false)?,
            compatibility_zero_diag: weighted_compatibility(op, y, true)?,
        });
    }

    let pick = |names: &[&str], with_diag: bool| -> f64 {
        operators
            .iter()
            .filter(|o| names.contains(&o.operator.as_str()))
            .map(|o| {
                if with_diag {
                    o.homophily_with_diag
                } else {
                    o.homophily_zero_diag
                }
            })
            .fold(0.0, f64::max)
    };
    let h_u = pick(&UNDIRECTED_OPS, false);
    let h_d = pick(&DIRECTED_OPS, false);
    let h_u_wd = pick(&UNDIRECTED_OPS, true);
    let h_d_wd = pick(&DIRECTED_OPS, true);
    let gain = (h_u > 0.0).then(|| (h_d - h_u) / h_u);
    let gain_with_diag = (h_u_wd > 0.0).then(|| (h_d_wd - h_u_wd) / h_u_wd);

    Ok(HomophilyReport {
        node_homophily: node_homophily(&u, y)?,
        operators,
        h_eff_undirected: h_u,
        h_eff_directed: h_d,
        gain,
        h_eff_undirected_with_diag: h_u_wd,
        h_eff_directed_with_diag: h_d_wd,
        gain_with_diag,
    })
}
