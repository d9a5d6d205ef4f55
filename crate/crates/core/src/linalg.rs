//! Symmetric sparse storage, a skyline Cholesky factorization with reverse
//! Cuthill-McKee reordering, and the dense generalized symmetric eigensolver
//! used by the Rayleigh-Ritz projections.

use nalgebra::DMatrix;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Symmetric sparse matrix; only the lower triangle (including the diagonal)
/// is stored, so symmetry is exact by construction.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Accumulates element contributions before freezing to CSR.
pub struct SymBuilder {
    dim: usize,
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SymBuilder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![BTreeMap::new(); dim],
        }
    }

    /// Accumulate `v` at (i, j); the pair is folded into the lower triangle.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        *self.rows[r].entry(c).or_insert(0.0) += v;
    }

    pub fn build(self) -> SparseSymMatrix {
        let mut row_ptr = Vec::with_capacity(self.dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in &self.rows {
            for (&c, &v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseSymMatrix {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }
}

impl SparseSymMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Iterate stored (lower-triangle) entries as (row, col, value).
    pub fn iter_lower(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let v = self.vals[k];
                y[i] += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    /// x^T A y.
    pub fn pair(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    /// x^T A x.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.pair(x, x)
    }

    /// Full row sums (both triangles), e.g. for mass lumping.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for (i, j, v) in self.iter_lower() {
            s[i] += v;
            if j != i {
                s[j] += v;
            }
        }
        s
    }

    pub fn max_diag(&self) -> f64 {
        let mut m = 0.0f64;
        for (i, j, v) in self.iter_lower() {
            if i == j {
                m = m.max(v.abs());
            }
        }
        m
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter_lower() {
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        a
    }

    /// Submatrix on the given (strictly increasing) index set.
    pub fn restrict(&self, keep: &[usize]) -> SparseSymMatrix {
        let mut newidx = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            newidx[old] = new;
        }
        let mut b = SymBuilder::new(keep.len());
        for (i, j, v) in self.iter_lower() {
            let (ni, nj) = (newidx[i], newidx[j]);
            if ni != usize::MAX && nj != usize::MAX {
                b.add(ni, nj, v);
            }
        }
        b.build()
    }

    /// Adjacency lists of the sparsity graph (excluding the diagonal).
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.dim];
        for (i, j, _) in self.iter_lower() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

/// Reverse Cuthill-McKee ordering of the sparsity graph. Returns `perm` with
/// `perm[new] = old`; deterministic (ties broken by vertex index).
pub fn rcm_order(mat: &SparseSymMatrix) -> Vec<usize> {
    let n = mat.dim();
    let adj = mat.adjacency();
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    // Lowest-degree unvisited vertex starts each component.
    while let Some(start) = (0..n)
        .filter(|&i| !visited[i])
        .min_by_key(|&i| (degree[i], i))
    {
        let mut queue = std::collections::VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Skyline (profile) Cholesky factorization with RCM preordering.
pub struct SkylineCholesky {
    n: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    /// inv[old] = new
    inv: Vec<usize>,
    start: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(mat: &SparseSymMatrix) -> Result<Self> {
        let n = mat.dim();
        let perm = rcm_order(mat);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut start: Vec<usize> = (0..n).collect();
        for (i, j, _) in mat.iter_lower() {
            let (a, b) = (inv[i], inv[j]);
            let (hi, lo) = (a.max(b), a.min(b));
            if lo < start[hi] {
                start[hi] = lo;
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - start[i] + 1);
        }
        let mut data = vec![0.0; offset[n]];
        for (i, j, v) in mat.iter_lower() {
            let (a, b) = (inv[i], inv[j]);
            let (hi, lo) = (a.max(b), a.min(b));
            data[offset[hi] + (lo - start[hi])] = v;
        }
        // In-place LL^T within the profile.
        for i in 0..n {
            let si = start[i];
            for j in si..i {
                let sj = start[j];
                let lo = si.max(sj);
                let mut sum = data[offset[i] + (j - si)];
                for k in lo..j {
                    sum -= data[offset[i] + (k - si)] * data[offset[j] + (k - sj)];
                }
                let djj = data[offset[j] + (j - sj)];
                data[offset[i] + (j - si)] = sum / djj;
            }
            let mut sum = data[offset[i] + (i - si)];
            for k in si..i {
                let l = data[offset[i] + (k - si)];
                sum -= l * l;
            }
            if !(sum > 0.0) {
                return Err(Error::Solver(format!(
                    "skyline Cholesky breakdown at pivot {i} (value {sum}); matrix not positive definite"
                )));
            }
            data[offset[i] + (i - si)] = sum.sqrt();
        }
        Ok(Self {
            n,
            perm,
            inv,
            start,
            offset,
            data,
        })
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = b[self.perm[i]];
        }
        // Forward: L y' = y.
        for i in 0..n {
            let si = self.start[i];
            let mut t = y[i];
            let row = &self.data[self.offset[i]..self.offset[i] + (i - si)];
            for (d, yk) in row.iter().zip(&y[si..i]) {
                t -= d * yk;
            }
            y[i] = t / self.data[self.offset[i] + (i - si)];
        }
        // Backward: L^T x = y' (column sweep).
        for i in (0..n).rev() {
            let si = self.start[i];
            y[i] /= self.data[self.offset[i] + (i - si)];
            let yi = y[i];
            let row = &self.data[self.offset[i]..self.offset[i] + (i - si)];
            for (d, yk) in row.iter().zip(y[si..i].iter_mut()) {
                *yk -= d * yi;
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }

    /// Profile size in stored entries (diagnostic).
    pub fn profile_len(&self) -> usize {
        self.data.len()
    }

    pub fn inv_perm(&self) -> &[usize] {
        &self.inv
    }
}

/// Dense generalized symmetric eigensolve `K u = lambda M u` via Cholesky
/// reduction of M. Returns ascending eigenvalues and M-orthonormal columns.
pub fn dense_generalized_eig(
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Solver("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let b = l
        .solve_lower_triangular(k)
        .ok_or_else(|| Error::Solver("singular Cholesky factor".into()))?;
    let a = l
        .solve_lower_triangular(&b.transpose())
        .ok_or_else(|| Error::Solver("singular Cholesky factor".into()))?;
    let a = 0.5 * (&a + a.transpose());
    let (mut lambdas, mut y) = sorted_symmetric_eigen(&a);
    // The QL sweep occasionally leaves an eigenvector with a large residual
    // even though the basis stays orthonormal; a Rayleigh-Ritz pass on the
    // returned basis (re-diagonalizing Y^T A Y, which is nearly diagonal)
    // repairs it. Iterate only while a residual is out of tolerance.
    for _ in 0..3 {
        let ay = &a * &y;
        let mut worst = 0.0f64;
        for c in 0..lambdas.len() {
            let mut rn = 0.0;
            let mut an = 0.0;
            for r in 0..y.nrows() {
                let res = ay[(r, c)] - lambdas[c] * y[(r, c)];
                rn += res * res;
                an += ay[(r, c)] * ay[(r, c)];
            }
            if an > 0.0 {
                worst = worst.max((rn / an).sqrt());
            }
        }
        if worst <= 1e-9 {
            break;
        }
        let e = y.transpose() * &ay;
        let e = 0.5 * (&e + e.transpose());
        let (vals2, s2) = sorted_symmetric_eigen(&e);
        y *= s2;
        lambdas = vals2;
    }
    // u = L^{-T} y.
    let lt = l.transpose();
    let u = lt
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::Solver("singular Cholesky factor".into()))?;
    Ok((lambdas, u))
}

/// Symmetric eigendecomposition with ascending eigenvalues.
fn sorted_symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let se = a.clone().symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[i]
            .partial_cmp(&se.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let lambdas: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut y = DMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        y.set_column(new, &se.eigenvectors.column(old));
    }
    (lambdas, y)
}

/// Deterministic xorshift generator for reproducible starting blocks.
pub struct XorShift64 {
    state: u64,
}

impl XorShift64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed.max(1) }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.state = x;
        x
    }

    /// Uniform in (-1, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
    }
}
