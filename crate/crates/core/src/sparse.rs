//! Real-valued CSR sparse matrix and the two kernels everything else builds on:
//! sparse-dense (spmm) and sparse-sparse (spspmm) products.

use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Values with absolute value below this are treated as explicit zeros and
/// never stored.
pub const PRUNE_EPS: f64 = 1e-15;

/// Sparse matrix in compressed sparse row form. Immutable after construction
/// and safe to share across threads. `provenance` records the recipe that
/// produced it (a normalization name, an operator spec, a product, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    provenance: String,
}

impl SparseOperator {
    /// Build from unsorted triplets. Duplicate coordinates are summed, values
    /// below [`PRUNE_EPS`] dropped, column indices sorted within each row.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        for &(r, c, v) in &triplets {
            if r >= rows || c >= cols {
                return Err(Error::shape(format!(
                    "triplet ({r},{c}) outside {rows}x{cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::numerical(format!("non-finite value at ({r},{c})")));
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut cur_row = 0usize;
        let mut i = 0usize;
        while i < triplets.len() {
            let (r, c, _) = triplets[i];
            let mut acc = 0.0;
            while i < triplets.len() && triplets[i].0 == r && triplets[i].1 == c {
                acc += triplets[i].2;
                i += 1;
            }
            if acc.abs() >= PRUNE_EPS {
                while cur_row <= r {
                    indptr[cur_row] = indices.len();
                    cur_row += 1;
                }
                indices.push(c);
                values.push(acc);
            }
        }
        while cur_row <= rows {
            indptr[cur_row] = indices.len();
            cur_row += 1;
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
            provenance: provenance.into(),
        })
    }

    /// Build directly from CSR arrays. Caller guarantees sorted, deduplicated,
    /// in-range columns; checked with debug assertions only.
    pub(crate) fn from_csr_unchecked(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
        provenance: impl Into<String>,
    ) -> Self {
        debug_assert_eq!(indptr.len(), rows + 1);
        debug_assert_eq!(indices.len(), values.len());
        debug_assert!(indices.iter().all(|&c| c < cols));
        Self {
            rows,
            cols,
            indptr,
            indices,
            values,
            provenance: provenance.into(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
            provenance: "identity".into(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn set_provenance(&mut self, p: impl Into<String>) {
        self.provenance = p.into();
    }

    /// (column, value) pairs of row i, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        self.indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        self.values[lo..hi].iter().sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        match self.indices[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> SparseOperator {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.cols {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0f64; self.nnz()];
        let mut next = counts;
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                let slot = next[c];
                indices[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        SparseOperator {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
            provenance: format!("transpose({})", self.provenance),
        }
    }

    /// Sparse-dense product S * X. Parallel over output rows; within a row the
    /// accumulation order is fixed by the CSR layout, so the result is
    /// bit-identical for any thread count.
    pub fn spmm(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != x.rows() {
            return Err(Error::shape(format!(
                "spmm: operator is {}x{}, features are {}x{}",
                self.rows,
                self.cols,
                x.rows(),
                x.cols()
            )));
        }
        let d = x.cols();
        let mut out = DenseMatrix::zeros(self.rows, d);
        out.data_mut()
            .par_chunks_mut(d)
            .enumerate()
            .for_each(|(i, dst)| {
                let lo = self.indptr[i];
                let hi = self.indptr[i + 1];
                for k in lo..hi {
                    let c = self.indices[k];
                    let v = self.values[k];
                    let src = x.row(c);
                    for (dj, sj) in dst.iter_mut().zip(src.iter()) {
                        *dj += v * sj;
                    }
                }
            });
        Ok(out)
    }

    /// Sparse-sparse product self * other, pruning entries below [`PRUNE_EPS`].
    pub fn spspmm(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.cols != other.rows {
            return Err(Error::shape(format!(
                "spspmm: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let n_out_cols = other.cols;
        let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..self.rows)
            .into_par_iter()
            .map_init(
                // Per-thread dense accumulator and touch markers, reused across rows.
                || (vec![0.0f64; n_out_cols], vec![false; n_out_cols]),
                |(acc, seen), i| {
                    let mut touched: Vec<usize> = Vec::new();
                    for (k, v) in self.row(i) {
                        for (c, w) in other.row(k) {
                            if !seen[c] {
                                seen[c] = true;
                                touched.push(c);
                            }
                            acc[c] += v * w;
                        }
                    }
                    touched.sort_unstable();
                    let mut cols_i = Vec::with_capacity(touched.len());
                    let mut vals_i = Vec::with_capacity(touched.len());
                    for &c in &touched {
                        if acc[c].abs() >= PRUNE_EPS {
                            cols_i.push(c);
                            vals_i.push(acc[c]);
                        }
                        acc[c] = 0.0;
                        seen[c] = false;
                    }
                    (cols_i, vals_i)
                },
            )
            .collect();
        let mut indptr = Vec::with_capacity(self.rows + 1);
        indptr.push(0);
        let nnz: usize = rows.iter().map(|(c, _)| c.len()).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for (c, v) in rows {
            indices.extend_from_slice(&c);
            values.extend_from_slice(&v);
            indptr.push(indices.len());
        }
        Ok(SparseOperator {
            rows: self.rows,
            cols: n_out_cols,
            indptr,
            indices,
            values,
            provenance: format!("({})*({})", self.provenance, other.provenance),
        })
    }

    /// Elementwise sum, pruning results below [`PRUNE_EPS`].
    pub fn add(&self, other: &SparseOperator) -> Result<SparseOperator> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(format!(
                "add: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut indptr = Vec::with_capacity(self.rows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.rows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                let take = match (a.peek(), b.peek()) {
                    (Some(&(ca, va)), Some(&(cb, vb))) => {
                        if ca < cb {
                            a.next();
                            (ca, va)
                        } else if cb < ca {
                            b.next();
                            (cb, vb)
                        } else {
                            a.next();
                            b.next();
                            (ca, va + vb)
                        }
                    }
                    (Some(&(ca, va)), None) => {
                        a.next();
                        (ca, va)
                    }
                    (None, Some(&(cb, vb))) => {
                        b.next();
                        (cb, vb)
                    }
                    (None, None) => break,
                };
                if take.1.abs() >= PRUNE_EPS {
                    indices.push(take.0);
                    values.push(take.1);
                }
            }
            indptr.push(indices.len());
        }
        Ok(SparseOperator {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices,
            values,
            provenance: format!("({})+({})", self.provenance, other.provenance),
        })
    }

    pub fn scale(&self, factor: f64) -> SparseOperator {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= factor;
        }
        out.prune(PRUNE_EPS)
    }

    /// Drop stored entries with |value| < threshold.
    pub fn prune(&self, threshold: f64) -> SparseOperator {
        let mut indptr = Vec::with_capacity(self.rows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.rows {
            for (c, v) in self.row(i) {
                if v.abs() >= threshold {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseOperator {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices,
            values,
            provenance: self.provenance.clone(),
        }
    }

    /// Copy with diagonal entries removed.
    pub fn zero_diagonal(&self) -> SparseOperator {
        let mut indptr = Vec::with_capacity(self.rows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.rows {
            for (c, v) in self.row(i) {
                if c != i {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseOperator {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices,
            values,
            provenance: format!("zero_diag({})", self.provenance),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (c, v) in self.row(i) {
                out.set(i, c, v);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Max |self - other| over the union of stored entries.
    pub fn max_abs_diff(&self, other: &SparseOperator) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for (c, v) in self.row(i) {
                worst = worst.max((v - other.get(i, c)).abs());
            }
            for (c, v) in other.row(i) {
                worst = worst.max((v - self.get(i, c)).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_sparse(rng: &mut StdRng, rows: usize, cols: usize, density: f64) -> SparseOperator {
        let mut trips = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if rng.gen::<f64>() < density {
                    trips.push((r, c, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        SparseOperator::from_triplets(rows, cols, trips, "rand").unwrap()
    }

    #[test]
    fn triplets_dedup_and_sort() {
        let s = SparseOperator::from_triplets(
            2,
            3,
            vec![(0, 2, 1.0), (0, 0, 2.0), (0, 2, 0.5), (1, 1, -1.0)],
            "t",
        )
        .unwrap();
        assert_eq!(s.row(0).collect::<Vec<_>>(), vec![(0, 2.0), (2, 1.5)]);
        assert_eq!(s.row(1).collect::<Vec<_>>(), vec![(1, -1.0)]);
    }

    #[test]
    fn spmm_identity_is_noop() {
        let x = DenseMatrix::from_vec(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let id = SparseOperator::identity(3);
        let y = id.spmm(&x).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn spmm_matches_dense_triple_loop() {
        // Dense triple-loop oracle on a random instance.
        let mut rng = StdRng::seed_from_u64(7);
        let s = random_sparse(&mut rng, 30, 30, 0.2);
        let mut x = DenseMatrix::zeros(30, 4);
        for i in 0..30 {
            for j in 0..4 {
                x.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let got = s.spmm(&x).unwrap();
        let sd = s.to_dense();
        let mut want = DenseMatrix::zeros(30, 4);
        for i in 0..30 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..30 {
                    acc += sd.get(i, k) * x.get(k, j);
                }
                want.set(i, j, acc);
            }
        }
        assert!(got.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn spmm_shape_mismatch_errors() {
        let s = SparseOperator::identity(3);
        let x = DenseMatrix::zeros(4, 2);
        assert!(s.spmm(&x).is_err());
    }

    #[test]
    fn spspmm_single_edge_gram() {
        // A = single edge 0->1; A^T A has only entry (1,1)=1.
        let a = SparseOperator::from_triplets(2, 2, vec![(0, 1, 1.0)], "a").unwrap();
        let g = a.transpose().spspmm(&a).unwrap();
        assert_eq!(g.nnz(), 1);
        assert_eq!(g.get(1, 1), 1.0);
    }

    #[test]
    fn spspmm_identity_is_noop() {
        let mut rng = StdRng::seed_from_u64(3);
        let s = random_sparse(&mut rng, 10, 10, 0.3);
        let id = SparseOperator::identity(10);
        let p = s.spspmm(&id).unwrap();
        assert!(p.max_abs_diff(&s) == 0.0);
    }

    #[test]
    fn spspmm_matches_dense_oracle() {
        // Random binary A (n=25): A^T A against the dense product.
        let mut rng = StdRng::seed_from_u64(11);
        let mut trips = Vec::new();
        for r in 0..25 {
            for c in 0..25 {
                if rng.gen::<f64>() < 0.15 {
                    trips.push((r, c, 1.0));
                }
            }
        }
        let a = SparseOperator::from_triplets(25, 25, trips, "a").unwrap();
        let at = a.transpose();
        let got = at.spspmm(&a).unwrap().to_dense();
        let want = at.to_dense().matmul(&a.to_dense()).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn transpose_involution() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let s = random_sparse(&mut rng, 12, 9, 0.25);
            let tt = s.transpose().transpose();
            assert_eq!(s.indptr, tt.indptr);
            assert_eq!(s.indices, tt.indices);
            assert_eq!(s.values, tt.values);
        }
    }

    proptest::proptest! {
        #[test]
        fn transpose_involution_holds(entries in proptest::collection::vec(
            (0usize..15, 0usize..11, -10.0f64..10.0), 0..60,
        )) {
            let s = SparseOperator::from_triplets(15, 11, entries, "p").unwrap();
            let tt = s.transpose().transpose();
            proptest::prop_assert_eq!(s.max_abs_diff(&tt), 0.0);
        }

        #[test]
        fn add_is_commutative(
            a in proptest::collection::vec((0usize..10, 0usize..10, -5.0f64..5.0), 0..40),
            b in proptest::collection::vec((0usize..10, 0usize..10, -5.0f64..5.0), 0..40),
        ) {
            let sa = SparseOperator::from_triplets(10, 10, a, "a").unwrap();
            let sb = SparseOperator::from_triplets(10, 10, b, "b").unwrap();
            let ab = sa.add(&sb).unwrap();
            let ba = sb.add(&sa).unwrap();
            proptest::prop_assert!(ab.max_abs_diff(&ba) == 0.0);
        }
    }

    #[test]
    fn product_associativity_with_features() {
        // spmm(spspmm(S1,S2), X) == spmm(S1, spmm(S2, X)) to 1e-10 relative.
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..5 {
            let s1 = random_sparse(&mut rng, 20, 20, 0.2);
            let s2 = random_sparse(&mut rng, 20, 20, 0.2);
            let mut x = DenseMatrix::zeros(20, 3);
            for i in 0..20 {
                for j in 0..3 {
                    x.set(i, j, rng.gen_range(-1.0..1.0));
                }
            }
            let a = s1.spspmm(&s2).unwrap().spmm(&x).unwrap();
            let b = s1.spmm(&s2.spmm(&x).unwrap()).unwrap();
            let scale = a
                .data()
                .iter()
                .map(|v| v.abs())
                .fold(1.0f64, f64::max);
            assert!(a.max_abs_diff(&b) / scale < 1e-10);
        }
    }
}
