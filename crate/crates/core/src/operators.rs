//! Diffusion-operator families and one-shot precomputation of feature banks.
//!
//! An [`OperatorSpec`] is a product of factors, each a base operator raised to
//! a power. The bank `[X, A_1 X, ..., A_r X]` is computed once and reused by
//! any number of training runs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::normalize::{build_normalized, NormScheme};
use crate::sparse::{SparseOperator, PRUNE_EPS};

/// Base operator a factor can raise to a power.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseOp {
    Norm(NormScheme),
    Triangle,
    Ppr {
        alpha: f64,
        terms: usize,
        prune: f64,
        base: NormScheme,
    },
}

impl BaseOp {
    fn requires_directed(&self) -> bool {
        match self {
            BaseOp::Norm(s) => s.requires_directed(),
            BaseOp::Triangle => false,
            BaseOp::Ppr { base, .. } => base.requires_directed(),
        }
    }
}

impl fmt::Display for BaseOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseOp::Norm(s) => write!(f, "{s}"),
            BaseOp::Triangle => write!(f, "triangle"),
            BaseOp::Ppr {
                alpha,
                terms,
                prune,
                base,
            } => {
                if *base == NormScheme::SymSelfloop {
                    write!(f, "ppr({alpha},{terms},{prune})")
                } else {
                    write!(f, "ppr({alpha},{terms},{prune},{base})")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub base: BaseOp,
    pub power: usize,
}

/// Left-to-right product of `factor.base ^ factor.power` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    factors: Vec<Factor>,
}

impl OperatorSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("operator spec must have at least one factor"));
        }
        for f in &factors {
            if f.power < 1 {
                return Err(Error::invalid("factor power must be >= 1"));
            }
            if let BaseOp::Ppr { alpha, terms, .. } = &f.base {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::invalid(format!(
                        "ppr restart probability must lie in (0,1), got {alpha}"
                    )));
                }
                if *terms < 1 {
                    return Err(Error::invalid("ppr needs at least one series term"));
                }
            }
        }
        Ok(Self { factors })
    }

    pub fn single(base: BaseOp, power: usize) -> Result<Self> {
        Self::new(vec![Factor { base, power }])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn requires_directed(&self) -> bool {
        self.factors.iter().any(|f| f.base.requires_directed())
    }

    /// Parse a comma-separated list of specs, e.g.
    /// `"sym_selfloop^1,sym_selfloop^2,ppr(0.05,64,1e-4)^1,triangle^1"`.
    pub fn parse_list(s: &str) -> Result<Vec<OperatorSpec>> {
        split_top_level(s, ',')
            .into_iter()
            .map(|spec| spec.parse())
            .collect()
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|fac| format!("{}^{}", fac.base, fac.power))
            .collect();
        f.write_str(&parts.join("*"))
    }
}

impl FromStr for OperatorSpec {
    type Err = Error;

    /// Grammar: factors joined by `*`; each factor is `base` or `base^power`;
    /// base is a normalization name, `triangle`, or
    /// `ppr(alpha,terms,prune[,base_norm])`.
    fn from_str(s: &str) -> Result<Self> {
        let mut factors = Vec::new();
        for part in split_top_level(s, '*') {
            let part = part.trim();
            let (base_str, power) = match split_power(part)? {
                (b, Some(p)) => (b, p),
                (b, None) => (b, 1),
            };
            let base = parse_base(base_str.trim())?;
            factors.push(Factor { base, power });
        }
        OperatorSpec::new(factors)
    }
}

/// Split on `sep` ignoring separators inside parentheses.
fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            c if c == sep && depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out
}

fn split_power(s: &str) -> Result<(&str, Option<usize>)> {
    // `^` never appears inside ppr(...) arguments, so rsplit is safe.
    match s.rsplit_once('^') {
        Some((base, pow)) => {
            let p: usize = pow
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad power {pow:?} in spec {s:?}")))?;
            Ok((base, Some(p)))
        }
        None => Ok((s, None)),
    }
}

fn parse_base(s: &str) -> Result<BaseOp> {
    if s == "triangle" {
        return Ok(BaseOp::Triangle);
    }
    if let Some(rest) = s.strip_prefix("ppr(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::invalid(format!("unterminated ppr spec {s:?}")))?;
        let args: Vec<&str> = inner.split(',').map(str::trim).collect();
        if args.len() != 3 && args.len() != 4 {
            return Err(Error::invalid(format!(
                "ppr expects (alpha,terms,prune[,base]), got {s:?}"
            )));
        }
        let alpha: f64 = args[0]
            .parse()
            .map_err(|_| Error::invalid(format!("bad ppr alpha {:?}", args[0])))?;
        let terms: usize = args[1]
            .parse()
            .map_err(|_| Error::invalid(format!("bad ppr terms {:?}", args[1])))?;
        let prune: f64 = args[2]
            .parse()
            .map_err(|_| Error::invalid(format!("bad ppr prune {:?}", args[2])))?;
        let base = if args.len() == 4 {
            args[3].parse()?
        } else {
            NormScheme::SymSelfloop
        };
        return Ok(BaseOp::Ppr {
            alpha,
            terms,
            prune,
            base,
        });
    }
    Ok(BaseOp::Norm(s.parse()?))
}

/// Row-normalized triangle-induced adjacency. The raw weight of edge {i,j} is
/// the number of triangles the edge belongs to, found by sorted-neighbor-list
/// intersection; edges in no triangle drop out and rows with no surviving
/// entries stay all-zero.
pub fn triangle_adjacency(g: &Graph) -> Result<SparseOperator> {
    let u = if g.directed() { g.symmetrize() } else { g.clone() };
    let n = u.n();
    let mut trips: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for &j in u.out_neighbors(i) {
            if j <= i {
                continue;
            }
            let count = sorted_intersection_count(u.out_neighbors(i), u.out_neighbors(j));
            if count > 0 {
                trips.push((i, j, count as f64));
                trips.push((j, i, count as f64));
            }
        }
    }
    let raw = SparseOperator::from_triplets(n, n, trips, "triangle_raw")?;
    let mut norm_trips = Vec::with_capacity(raw.nnz());
    for i in 0..n {
        let sum = raw.row_sum(i);
        if sum <= 0.0 {
            continue;
        }
        for (j, v) in raw.row(i) {
            norm_trips.push((i, j, v / sum));
        }
    }
    let mut s = SparseOperator::from_triplets(n, n, norm_trips, "triangle")?;
    s.set_provenance("triangle");
    Ok(s)
}

fn sorted_intersection_count(a: &[usize], b: &[usize]) -> usize {
    let mut count = 0usize;
    let (mut x, mut y) = (0usize, 0usize);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

/// Truncated Neumann-series personalized PageRank:
/// `alpha * sum_{t<terms} (1-alpha)^t base^t`, entries below `prune` dropped
/// after the summation. Approximates `alpha (I - (1-alpha) base)^{-1}` with
/// tail error at most `(1-alpha)^terms / alpha` in max norm.
pub fn ppr_matrix(
    base: &SparseOperator,
    alpha: f64,
    terms: usize,
    prune: f64,
) -> Result<SparseOperator> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "ppr restart probability must lie in (0,1), got {alpha}"
        )));
    }
    if base.rows() != base.cols() {
        return Err(Error::shape("ppr base must be square".to_string()));
    }
    if terms < 1 {
        return Err(Error::invalid("ppr needs at least one series term"));
    }
    let n = base.rows();
    let mut acc = SparseOperator::identity(n).scale(alpha);
    let mut power = SparseOperator::identity(n);
    let mut coeff = alpha;
    for _ in 1..terms {
        power = power.spspmm(base)?;
        coeff *= 1.0 - alpha;
        acc = acc.add(&power.scale(coeff))?;
    }
    let mut out = acc.prune(prune.max(PRUNE_EPS));
    out.set_provenance(format!("ppr({alpha},{terms},{prune})"));
    Ok(out)
}

fn base_operator(base: &BaseOp, g: &Graph) -> Result<SparseOperator> {
    match base {
        BaseOp::Norm(scheme) => build_normalized(g, *scheme),
        BaseOp::Triangle => triangle_adjacency(g),
        BaseOp::Ppr {
            alpha,
            terms,
            prune,
            base,
        } => {
            let b = build_normalized(g, *base)?;
            ppr_matrix(&b, *alpha, *terms, *prune)
        }
    }
}

/// Materialize a spec as one sparse matrix (product of factor powers).
pub fn materialize(spec: &OperatorSpec, g: &Graph) -> Result<SparseOperator> {
    let mut acc: Option<SparseOperator> = None;
    for factor in spec.factors() {
        let b = base_operator(&factor.base, g)?;
        for _ in 0..factor.power {
            acc = Some(match acc {
                None => b.clone(),
                Some(a) => a.spspmm(&b)?,
            });
        }
    }
    let mut out = acc.expect("spec has at least one factor");
    out.set_provenance(spec.to_string());
    Ok(out)
}

/// Precomputed feature bank: block 0 is the raw features, block k the k-th
/// operator applied to them.
#[derive(Debug, Clone)]
pub struct FeatureBank {
    blocks: Vec<DenseMatrix>,
    specs: Vec<OperatorSpec>,
}

impl FeatureBank {
    pub fn new(blocks: Vec<DenseMatrix>, specs: Vec<OperatorSpec>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::invalid("bank needs at least the raw block"));
        }
        if blocks.len() != specs.len() + 1 {
            return Err(Error::shape(format!(
                "bank has {} blocks but {} specs",
                blocks.len(),
                specs.len()
            )));
        }
        let (n, d) = (blocks[0].rows(), blocks[0].cols());
        for b in &blocks {
            if b.rows() != n || b.cols() != d {
                return Err(Error::shape("bank blocks must share n x d".to_string()));
            }
        }
        Ok(Self { blocks, specs })
    }

    pub fn blocks(&self) -> &[DenseMatrix] {
        &self.blocks
    }

    pub fn specs(&self) -> &[OperatorSpec] {
        &self.specs
    }

    pub fn n(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn block_dim(&self) -> usize {
        self.blocks[0].cols()
    }

    /// r: number of operator blocks (bank holds r+1 blocks).
    pub fn num_operators(&self) -> usize {
        self.blocks.len() - 1
    }
}

/// Compute `[X, A_1 X, ..., A_r X]`. Plain normalization factors are applied
/// as chained sparse-dense products; triangle and PPR factors are
/// materialized once and then applied. Runs once, reusable by any number of
/// training runs.
pub fn precompute_sign_features(
    g: &Graph,
    x: &DenseMatrix,
    specs: &[OperatorSpec],
) -> Result<FeatureBank> {
    if x.rows() != g.n() {
        return Err(Error::shape(format!(
            "features have {} rows but graph has {} nodes",
            x.rows(),
            g.n()
        )));
    }
    let mut blocks = Vec::with_capacity(specs.len() + 1);
    blocks.push(x.clone());
    for spec in specs {
        // Factors multiply left-to-right, so the rightmost factor touches X first.
        let mut cur = x.clone();
        for factor in spec.factors().iter().rev() {
            let b = base_operator(&factor.base, g)?;
            for _ in 0..factor.power {
                cur = b.spmm(&cur)?;
            }
        }
        blocks.push(cur);
    }
    FeatureBank::new(blocks, specs.to_vec())
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestBlock {
    spec: String,
    file: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    n: usize,
    d: usize,
    blocks: Vec<ManifestBlock>,
}

impl FeatureBank {
    /// Persist as one GDM1 file per block plus a JSON manifest in `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let mut entries = Vec::with_capacity(self.blocks.len());
        for (k, block) in self.blocks.iter().enumerate() {
            let file = format!("block_{k}.gdm");
            block.save_gdm(&dir.join(&file))?;
            let spec = if k == 0 {
                "raw".to_string()
            } else {
                self.specs[k - 1].to_string()
            };
            entries.push(ManifestBlock { spec, file });
        }
        let manifest = Manifest {
            n: self.n(),
            d: self.block_dim(),
            blocks: entries,
        };
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::invalid(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, json).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let raw = std::fs::read_to_string(&path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let manifest: Manifest = serde_json::from_str(&raw)
            .map_err(|e| Error::parse(path.display().to_string(), 0, e.to_string()))?;
        if manifest.blocks.is_empty() || manifest.blocks[0].spec != "raw" {
            return Err(Error::parse(
                path.display().to_string(),
                0,
                "manifest must start with the raw block",
            ));
        }
        let mut blocks = Vec::with_capacity(manifest.blocks.len());
        let mut specs = Vec::new();
        for (k, entry) in manifest.blocks.iter().enumerate() {
            let block = DenseMatrix::load_gdm(&dir.join(&entry.file))?;
            if block.rows() != manifest.n || block.cols() != manifest.d {
                return Err(Error::shape(format!(
                    "block {k} is {}x{}, manifest says {}x{}",
                    block.rows(),
                    block.cols(),
                    manifest.n,
                    manifest.d
                )));
            }
            if k > 0 {
                specs.push(entry.spec.parse()?);
            }
            blocks.push(block);
        }
        FeatureBank::new(blocks, specs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: usize) -> Graph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        Graph::from_edges(n, &edges, false).unwrap()
    }

    #[test]
    fn spec_roundtrip() {
        for s in [
            "sym_selfloop^2",
            "dir_bwd^1*dir_fwd^1",
            "triangle^1",
            "ppr(0.05,64,0.0001)^1",
            "ppr(0.5,8,0.000001,row)^2",
        ] {
            let spec: OperatorSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s, "roundtrip of {s}");
        }
    }

    proptest::proptest! {
        #[test]
        fn spec_display_parse_roundtrip(
            bases in proptest::collection::vec(0usize..7, 1..4),
            powers in proptest::collection::vec(1usize..5, 1..4),
        ) {
            let names = ["sym_selfloop", "sym", "row", "dir_fwd", "dir_bwd", "row_fwd", "row_bwd"];
            let text = bases
                .iter()
                .zip(&powers)
                .map(|(&b, &p)| format!("{}^{}", names[b], p))
                .collect::<Vec<_>>()
                .join("*");
            let spec: OperatorSpec = text.parse().unwrap();
            proptest::prop_assert_eq!(spec.to_string(), text);
        }
    }

    #[test]
    fn spec_defaults_power_one() {
        let spec: OperatorSpec = "sym".parse().unwrap();
        assert_eq!(spec.factors()[0].power, 1);
    }

    #[test]
    fn spec_rejects_garbage() {
        assert!("".parse::<OperatorSpec>().is_err());
        assert!("sym^0".parse::<OperatorSpec>().is_err());
        assert!("wat^1".parse::<OperatorSpec>().is_err());
        assert!("ppr(2.0,4,0)".parse::<OperatorSpec>().is_err());
    }

    #[test]
    fn triangle_on_k3() {
        // Every edge of K3 lies in exactly one triangle: rows get two 0.5 entries.
        let t = triangle_adjacency(&k(3)).unwrap();
        for i in 0..3 {
            let row: Vec<_> = t.row(i).collect();
            assert_eq!(row.len(), 2);
            for (_, v) in row {
                assert!((v - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn triangle_on_k2_is_zero() {
        let t = triangle_adjacency(&k(2)).unwrap();
        assert_eq!(t.nnz(), 0);
    }

    #[test]
    fn triangle_on_k4() {
        // Each K4 edge lies in two triangles; normalized rows have three 1/3 entries.
        let t = triangle_adjacency(&k(4)).unwrap();
        for i in 0..4 {
            let row: Vec<_> = t.row(i).collect();
            assert_eq!(row.len(), 3);
            for (_, v) in row {
                assert!((v - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn triangle_matches_brute_force_enumeration() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..5 {
            let n = rng.gen_range(4..50);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen::<f64>() < 0.2 {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::from_edges(n, &edges, false).unwrap();
            let t = triangle_adjacency(&g).unwrap();
            // O(n^3) oracle: raw triangle counts per edge, then row normalize.
            let mut raw = vec![vec![0usize; n]; n];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if a < b && b < c && g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c)
                        {
                            raw[a][b] += 1;
                            raw[b][a] += 1;
                            raw[b][c] += 1;
                            raw[c][b] += 1;
                            raw[a][c] += 1;
                            raw[c][a] += 1;
                        }
                    }
                }
            }
            for i in 0..n {
                let sum: usize = raw[i].iter().sum();
                for j in 0..n {
                    let want = if sum > 0 { raw[i][j] as f64 / sum as f64 } else { 0.0 };
                    assert!((t.get(i, j) - want).abs() < 1e-12, "entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn ppr_k2_matches_dense_inverse() {
        // Exact PPR on K2 with sym base and alpha = 0.5 is [[2/3,1/3],[1/3,2/3]].
        let g = k(2);
        let base = build_normalized(&g, NormScheme::Sym).unwrap();
        let p = ppr_matrix(&base, 0.5, 30, 0.0).unwrap();
        assert!((p.get(0, 0) - 2.0 / 3.0).abs() < 1e-8);
        assert!((p.get(0, 1) - 1.0 / 3.0).abs() < 1e-8);
        assert!((p.get(1, 0) - 1.0 / 3.0).abs() < 1e-8);
        assert!((p.get(1, 1) - 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn ppr_single_term_is_scaled_identity() {
        let g = k(3);
        let base = build_normalized(&g, NormScheme::Sym).unwrap();
        let p = ppr_matrix(&base, 0.3, 1, 0.0).unwrap();
        let want = SparseOperator::identity(3).scale(0.3);
        assert!(p.max_abs_diff(&want) == 0.0);
    }

    #[test]
    fn ppr_on_edgeless_graph_is_alpha_identity() {
        let g = Graph::from_edges(3, &[], false).unwrap();
        let base = build_normalized(&g, NormScheme::Sym).unwrap();
        let p = ppr_matrix(&base, 0.2, 16, 0.0).unwrap();
        let want = SparseOperator::identity(3).scale(0.2);
        assert!(p.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn ppr_rejects_bad_alpha() {
        let g = k(2);
        let base = build_normalized(&g, NormScheme::Sym).unwrap();
        assert!(ppr_matrix(&base, 0.0, 4, 0.0).is_err());
        assert!(ppr_matrix(&base, 1.0, 4, 0.0).is_err());
    }

    #[test]
    fn materialize_power_equals_spspmm() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)], false).unwrap();
        let spec: OperatorSpec = "sym_selfloop^2".parse().unwrap();
        let m = materialize(&spec, &g).unwrap();
        let a = build_normalized(&g, NormScheme::SymSelfloop).unwrap();
        let want = a.spspmm(&a).unwrap();
        assert!(m.max_abs_diff(&want) == 0.0);
    }

    #[test]
    fn materialize_composition_order() {
        // dir_bwd^1*dir_fwd^1 = S_fwd^T S_fwd.
        let g = Graph::from_edges(4, &[(0, 1), (2, 1), (1, 3)], true).unwrap();
        let spec: OperatorSpec = "dir_bwd^1*dir_fwd^1".parse().unwrap();
        let m = materialize(&spec, &g).unwrap();
        let fwd = build_normalized(&g, NormScheme::DirFwd).unwrap();
        let want = fwd.transpose().spspmm(&fwd).unwrap();
        assert!(m.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn materialize_triangle_delegates() {
        let g = k(3);
        let spec: OperatorSpec = "triangle^1".parse().unwrap();
        let m = materialize(&spec, &g).unwrap();
        let want = triangle_adjacency(&g).unwrap();
        assert!(m.max_abs_diff(&want) == 0.0);
    }

    #[test]
    fn materialize_rejects_dir_factor_on_undirected() {
        let g = k(3);
        let spec: OperatorSpec = "dir_fwd^1".parse().unwrap();
        assert!(materialize(&spec, &g).is_err());
    }

    #[test]
    fn powers_telescope() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)], false)
            .unwrap();
        let a: OperatorSpec = "sym_selfloop^2".parse().unwrap();
        let b: OperatorSpec = "sym_selfloop^3".parse().unwrap();
        let ab: OperatorSpec = "sym_selfloop^5".parse().unwrap();
        let left = materialize(&a, &g)
            .unwrap()
            .spspmm(&materialize(&b, &g).unwrap())
            .unwrap();
        let right = materialize(&ab, &g).unwrap();
        assert!(left.max_abs_diff(&right) < 1e-10);
    }

    #[test]
    fn bank_r0_is_raw_only() {
        let g = k(3);
        let x = DenseMatrix::from_vec(3, 2, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let bank = precompute_sign_features(&g, &x, &[]).unwrap();
        assert_eq!(bank.num_operators(), 0);
        assert_eq!(bank.blocks()[0], x);
    }

    #[test]
    fn bank_power_block_matches_chained_spmm() {
        // With specs [A, A^2] on P3 and one-hot features, block 2 == spmm(A, block 1).
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)], false).unwrap();
        let x = DenseMatrix::eye(3);
        let specs = OperatorSpec::parse_list("sym_selfloop^1,sym_selfloop^2").unwrap();
        let bank = precompute_sign_features(&g, &x, &specs).unwrap();
        let a = build_normalized(&g, NormScheme::SymSelfloop).unwrap();
        let want = a.spmm(&bank.blocks()[1]).unwrap();
        assert!(bank.blocks()[2].max_abs_diff(&want) == 0.0);
    }

    #[test]
    fn row_stochastic_spec_fixes_constant_features() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], false).unwrap();
        let x = DenseMatrix::from_vec(4, 1, vec![2.5; 4]).unwrap();
        let specs = OperatorSpec::parse_list("row^1,row^2").unwrap();
        let bank = precompute_sign_features(&g, &x, &specs).unwrap();
        for block in bank.blocks() {
            assert!(block.max_abs_diff(&x) < 1e-12);
        }
    }

    #[test]
    fn bank_is_bit_identical_across_runs() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], false).unwrap();
        let x = DenseMatrix::from_vec(5, 2, (0..10).map(|v| v as f64 * 0.37).collect()).unwrap();
        let specs = OperatorSpec::parse_list("sym_selfloop^2,triangle^1,ppr(0.1,16,1e-8)^1")
            .unwrap();
        let b1 = precompute_sign_features(&g, &x, &specs).unwrap();
        let b2 = precompute_sign_features(&g, &x, &specs).unwrap();
        for (x1, x2) in b1.blocks().iter().zip(b2.blocks()) {
            assert_eq!(x1.data(), x2.data());
        }
    }

    #[test]
    fn bank_save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = k(4);
        let x = DenseMatrix::from_vec(4, 2, (0..8).map(|v| v as f64).collect()).unwrap();
        let specs = OperatorSpec::parse_list("sym_selfloop^1,triangle^1").unwrap();
        let bank = precompute_sign_features(&g, &x, &specs).unwrap();
        bank.save(dir.path()).unwrap();
        let back = FeatureBank::load(dir.path()).unwrap();
        assert_eq!(back.num_operators(), 2);
        for (a, b) in bank.blocks().iter().zip(back.blocks()) {
            assert_eq!(a.data(), b.data());
        }
        assert_eq!(back.specs()[0].to_string(), "sym_selfloop^1");
    }
}
