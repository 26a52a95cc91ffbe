//! Seeded synthetic data: Erdos-Renyi graphs, the labeled directed
//! preferential-attachment generator, class-conditioned Gaussian features, the
//! directed in-vs-out-mean task, and random feature masks.
//!
//! Every generator owns a ChaCha stream seeded from the caller's u64, so the
//! same seed and call sequence reproduce bit-identical outputs on any
//! platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::fp::FeatureMask;
use crate::graph::Graph;
use crate::homophily::LabelVector;

/// Row-stochastic C x C class compatibility matrix.
#[derive(Debug, Clone)]
pub struct CompatMatrix {
    values: Vec<Vec<f64>>,
}

impl CompatMatrix {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let c = values.len();
        if c == 0 {
            return Err(Error::invalid("compatibility matrix cannot be empty"));
        }
        for row in &values {
            if row.len() != c {
                return Err(Error::shape("compatibility matrix must be square".to_string()));
            }
            if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::invalid("compatibility entries must be nonnegative"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "compatibility rows must sum to 1, got {sum}"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn classes(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k][l]
    }
}

/// `H = h*I + (1-h)/(C-1) * (J - I)`: diagonal h, uniform off-diagonal mass.
pub fn target_homophily_compat(c: usize, h: f64) -> Result<CompatMatrix> {
    if c < 2 {
        return Err(Error::invalid("need at least two classes"));
    }
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::invalid(format!("target homophily must lie in [0,1], got {h}")));
    }
    let off = (1.0 - h) / (c as f64 - 1.0);
    let values: Vec<Vec<f64>> = (0..c)
        .map(|k| (0..c).map(|l| if k == l { h } else { off }).collect())
        .collect();
    CompatMatrix::new(values)
}

/// Erdos-Renyi graph: every ordered (directed) or unordered (undirected) pair
/// is an edge independently with probability p; no self-loops. Pairs are
/// visited by geometric index skipping, so generation is O(edges) and the
/// draw sequence is fixed by the seed.
pub fn gen_erdos_renyi(n: usize, p: f64, directed: bool, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability must lie in [0,1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total_pairs: u64 = if directed {
        (n as u64) * (n as u64 - 1)
    } else {
        (n as u64) * (n as u64 - 1) / 2
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    if p > 0.0 && n > 1 {
        let log_q = (1.0 - p).ln(); // -inf when p == 1, making every skip 0
        let mut idx: i128 = -1;
        loop {
            let skip = if p >= 1.0 {
                0u64
            } else {
                let u: f64 = rng.gen();
                let s = ((1.0 - u).ln() / log_q).floor();
                if s >= total_pairs as f64 {
                    break;
                }
                s as u64
            };
            idx += skip as i128 + 1;
            if idx >= total_pairs as i128 {
                break;
            }
            edges.push(pair_from_index(idx as u64, n, directed));
        }
    }
    Graph::from_edges(n, &edges, directed)
}

fn pair_from_index(idx: u64, n: usize, directed: bool) -> (usize, usize) {
    let n64 = n as u64;
    if directed {
        let i = idx / (n64 - 1);
        let r = idx % (n64 - 1);
        let j = if r < i { r } else { r + 1 };
        (i as usize, j as usize)
    } else {
        // Row i covers indices [offset(i), offset(i+1)) with
        // offset(i) = i*n - i*(i+1)/2; invert approximately then correct.
        let offset = |i: u64| i * n64 - i * (i + 1) / 2;
        let mut i = {
            let nf = n64 as f64;
            let guess = nf - 0.5 - ((nf - 0.5) * (nf - 0.5) - 2.0 * idx as f64).max(0.0).sqrt();
            (guess.max(0.0) as u64).min(n64 - 2)
        };
        while offset(i + 1) <= idx {
            i += 1;
        }
        while offset(i) > idx {
            i -= 1;
        }
        let j = i + 1 + (idx - offset(i));
        (i as usize, j as usize)
    }
}

/// Labeled directed preferential attachment. Seeds `m+1` isolated nodes with
/// uniform labels; every later node v draws a uniform label and attaches by
/// edges v->u to `m` distinct earlier nodes sampled without replacement with
/// probability proportional to `(in_deg(u) + 1) * H[y_v][y_u]`. The +1 keeps
/// zero-in-degree nodes reachable; if every candidate has zero compatibility
/// weight the draw falls back to uniform so generation always completes.
pub fn gen_pa_labeled(
    n: usize,
    c: usize,
    m: usize,
    h: &CompatMatrix,
    seed: u64,
) -> Result<(Graph, LabelVector)> {
    if m < 1 {
        return Err(Error::invalid("attachment degree m must be >= 1"));
    }
    if n <= m {
        return Err(Error::invalid(format!("need n > m, got n={n}, m={m}")));
    }
    if h.classes() != c {
        return Err(Error::shape(format!(
            "compatibility matrix has {} classes, asked for {c}",
            h.classes()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u32> = Vec::with_capacity(n);
    let mut in_deg: Vec<u64> = vec![0; n];
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity((n - m - 1) * m);

    for _ in 0..=m {
        labels.push(rng.gen_range(0..c) as u32);
    }
    let mut weights: Vec<f64> = Vec::with_capacity(n);
    for v in (m + 1)..n {
        let yv = rng.gen_range(0..c) as u32;
        labels.push(yv);
        weights.clear();
        weights.extend((0..v).map(|u| {
            (in_deg[u] + 1) as f64 * h.get(yv as usize, labels[u] as usize)
        }));
        let mut picked: Vec<usize> = Vec::with_capacity(m);
        for _ in 0..m {
            let total: f64 = weights.iter().sum();
            let u = if total > 0.0 {
                let mut ticket = rng.gen::<f64>() * total;
                let mut chosen = usize::MAX;
                for (cand, &w) in weights.iter().enumerate() {
                    if w <= 0.0 {
                        continue;
                    }
                    ticket -= w;
                    if ticket <= 0.0 {
                        chosen = cand;
                        break;
                    }
                }
                if chosen == usize::MAX {
                    // float underrun: take the last positive-weight candidate
                    weights.iter().rposition(|&w| w > 0.0).unwrap()
                } else {
                    chosen
                }
            } else {
                // all compatibility weights zero: uniform over unpicked nodes
                let remaining = v - picked.len();
                let k = rng.gen_range(0..remaining);
                (0..v).filter(|cand| !picked.contains(cand)).nth(k).unwrap()
            };
            picked.push(u);
            weights[u] = 0.0;
        }
        for &u in &picked {
            edges.push((v, u));
            in_deg[u] += 1;
        }
    }
    let graph = Graph::from_edges(n, &edges, true)?;
    Ok((graph, LabelVector::new(labels, c)?))
}

/// Class-conditioned Gaussian features: class c gets a fixed mean direction of
/// length `sep` drawn once from the stream; each row adds `noise`-scaled
/// standard-normal jitter.
pub fn gen_class_features(
    y: &LabelVector,
    d: usize,
    sep: f64,
    noise: f64,
    seed: u64,
) -> Result<DenseMatrix> {
    if d < 1 {
        return Err(Error::invalid("feature dimension must be >= 1"));
    }
    if !y.all_known() {
        return Err(Error::invalid("class features need fully known labels"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = y.num_classes();
    let mut means = vec![vec![0.0f64; d]; c];
    for mean in means.iter_mut() {
        let mut norm = 0.0;
        for v in mean.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
            norm += *v * *v;
        }
        let norm = norm.sqrt();
        if norm > 0.0 {
            for v in mean.iter_mut() {
                *v = sep * *v / norm;
            }
        }
    }
    let mut x = DenseMatrix::zeros(y.len(), d);
    for i in 0..y.len() {
        let mean = &means[y.get(i).unwrap() as usize];
        for j in 0..d {
            let jitter: f64 = StandardNormal.sample(&mut rng);
            x.set(i, j, mean[j] + noise * jitter);
        }
    }
    Ok(x)
}

/// Directed ER graph with scalar uniform features on [-1,1]; a node's label is
/// 1 iff the mean feature of its in-neighbors exceeds the mean feature of its
/// out-neighbors (an empty neighborhood has mean 0, ties go to 0).
pub fn gen_directed_task(n: usize, p: f64, seed: u64) -> Result<(Graph, DenseMatrix, LabelVector)> {
    let g = gen_erdos_renyi(n, p, true, seed)?;
    // Feature stream is derived from the same seed but a separate generator
    // position, keeping graph and features individually reproducible.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut x = DenseMatrix::zeros(n, 1);
    for i in 0..n {
        x.set(i, 0, rng.gen_range(-1.0..=1.0));
    }
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mean_over = |nbrs: &[usize]| -> f64 {
            if nbrs.is_empty() {
                0.0
            } else {
                nbrs.iter().map(|&j| x.get(j, 0)).sum::<f64>() / nbrs.len() as f64
            }
        };
        let in_mean = mean_over(g.in_neighbors(i));
        let out_mean = mean_over(g.out_neighbors(i));
        labels.push(u32::from(in_mean > out_mean));
    }
    let y = LabelVector::new(labels, 2)?;
    Ok((g, x, y))
}

/// Each entry is unobserved independently with probability `missing_rate`.
pub fn random_mask(n: usize, d: usize, missing_rate: f64, seed: u64) -> Result<FeatureMask> {
    if !(0.0..=1.0).contains(&missing_rate) {
        return Err(Error::invalid(format!(
            "missing rate must lie in [0,1], got {missing_rate}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let observed: Vec<bool> = (0..n * d).map(|_| rng.gen::<f64>() >= missing_rate).collect();
    FeatureMask::new(n, d, observed)
}
