//! Compressed sparse row storage and a skyline LDL^T factorization.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Accumulates `(row, col, value)` contributions; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    /// Scatters a dense element block onto the global indices `dofs`.
    pub fn add_block(&mut self, dofs: &[usize], block: &DMatrix<f64>) {
        debug_assert_eq!(dofs.len(), block.nrows());
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                self.add(i, j, block[(a, b)]);
            }
        }
    }

    pub fn extend(&mut self, other: TripletBuilder) {
        debug_assert_eq!(self.n, other.n);
        self.entries.extend(other.entries);
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for (i, j, v) in self.entries {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (i, j) => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        let mut indptr = vec![0usize; self.n + 1];
        let mut indices = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for (i, j, v) in merged {
            indices.push(j);
            values.push(v);
            indptr[i + 1] += 1;
        }
        for i in 0..self.n {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix {
            n: self.n,
            indptr,
            indices,
            values,
        }
    }
}

/// Square sparse matrix in CSR form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        let mut t = TripletBuilder::new(a.nrows());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                t.add(i, j, a[(i, j)]);
            }
        }
        t.build()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[(i, j)] = v;
            }
        }
        a
    }

    /// Largest `|a_ij - a_ji|` relative to the largest `|a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                scale = scale.max(v.abs());
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// `alpha * A + beta * B`.
    pub fn combine(alpha: f64, a: &CsrMatrix, beta: f64, b: &CsrMatrix) -> CsrMatrix {
        assert_eq!(a.n, b.n);
        let mut t = TripletBuilder::new(a.n);
        for i in 0..a.n {
            for (j, v) in a.row(i) {
                t.add(i, j, alpha * v);
            }
            for (j, v) in b.row(i) {
                t.add(i, j, beta * v);
            }
        }
        t.build()
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        CsrMatrix {
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut t = TripletBuilder::new(keep.len());
        for (new_i, &old_i) in keep.iter().enumerate() {
            for (old_j, v) in self.row(old_i) {
                let new_j = map[old_j];
                if new_j != usize::MAX {
                    t.add(new_i, new_j, v);
                }
            }
        }
        t.build()
    }
}

/// `A = L D L^T` over a variable-band (skyline) profile of the lower triangle.
#[derive(Debug, Clone)]
pub struct SkylineLdl {
    n: usize,
    first: Vec<usize>,
    offset: Vec<usize>,
    // Row i stores L[i][first[i]..i] followed by D[i].
    data: Vec<f64>,
}

impl SkylineLdl {
    /// Factorizes a symmetric positive definite matrix; only the lower
    /// triangle of `a` is read.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            if let Some((j, _)) = a.row(i).find(|&(j, _)| j <= i) {
                first[i] = j;
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; offset[n]];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    data[offset[i] + j - first[i]] = v;
                }
            }
        }

        let mut g = Vec::new();
        for i in 0..n {
            let fi = first[i];
            let row_len = i - fi;
            g.clear();
            g.extend_from_slice(&data[offset[i]..offset[i] + row_len]);
            // g_ij = a_ij - sum_k g_ik L_jk
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = 0.0;
                let lj = &data[offset[j]..];
                for k in k0..j {
                    s += g[k - fi] * lj[k - fj];
                }
                g[j - fi] -= s;
            }
            let mut d = data[offset[i] + row_len];
            for j in fi..i {
                let dj = data[offset[j + 1] - 1];
                let l = g[j - fi] / dj;
                d -= l * g[j - fi];
                data[offset[i] + j - fi] = l;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Indefinite { row: i, pivot: d });
            }
            data[offset[i] + row_len] = d;
        }
        Ok(Self { n, first, offset, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pivots(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.data[self.offset[i + 1] - 1])
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        // L y = b
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1] - 1];
            let s: f64 = row.iter().zip(&b[fi..i]).map(|(l, y)| l * y).sum();
            b[i] -= s;
        }
        for (i, d) in self.pivots().enumerate() {
            b[i] /= d;
        }
        // L^T x = z
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = b[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1] - 1];
            for (k, l) in row.iter().enumerate() {
                b[fi + k] -= l * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
