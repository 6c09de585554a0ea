//! Truncated SVD of a sparse term-document matrix by randomized subspace
//! iteration.
//!
//! The range of `A` is sampled with a seeded Gaussian test matrix, refined by
//! a few power iterations, and the small projected problem is solved with a
//! cyclic Jacobi eigendecomposition. Everything runs single-threaded in a
//! fixed order, so the same input and seed give bit-identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Column-compressed sparse matrix: `cols[j]` lists `(row, value)` pairs.
#[derive(Debug, Clone, Default)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut cols = vec![Vec::new(); ncols];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    cols[j].push((i, v));
                }
            }
        }
        SparseMatrix { rows: nrows, cols }
    }

    /// `A * X` for dense row-major `X` with `ncols` rows and `k` columns.
    fn mul(&self, x: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
        let mut y = vec![vec![0.0; k]; self.rows];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                for (yi, xj) in y[i].iter_mut().zip(&x[j]) {
                    *yi += v * xj;
                }
            }
        }
        y
    }

    /// `Aᵀ * Q` for dense row-major `Q` with `rows` rows and `k` columns.
    fn tmul(&self, q: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
        self.cols
            .iter()
            .map(|col| {
                let mut z = vec![0.0; k];
                for &(i, v) in col {
                    for (zi, qi) in z.iter_mut().zip(&q[i]) {
                        *zi += v * qi;
                    }
                }
                z
            })
            .collect()
    }
}

/// Orthonormalizes the columns of a row-major `n x k` matrix in place with
/// two passes of modified Gram-Schmidt. Columns that collapse are zeroed.
fn orthonormalize(m: &mut [Vec<f64>], k: usize) {
    for _pass in 0..2 {
        for c in 0..k {
            for p in 0..c {
                let dot: f64 = m.iter().map(|r| r[c] * r[p]).sum();
                for r in m.iter_mut() {
                    r[c] -= dot * r[p];
                }
            }
            let norm = m.iter().map(|r| r[c] * r[c]).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for r in m.iter_mut() {
                    r[c] /= norm;
                }
            } else {
                for r in m.iter_mut() {
                    r[c] = 0.0;
                }
            }
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and eigenvectors as columns of a row-major matrix.
#[allow(clippy::needless_range_loop)]
pub fn symmetric_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// Row-major `rows x dims` left singular vectors.
    pub u: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SvdOptions {
    pub oversample: usize,
    pub power_iterations: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            oversample: 10,
            power_iterations: 4,
            seed: 0,
        }
    }
}

/// Top-`dims` left singular vectors and values of `a`. Each vector's sign is
/// fixed so that its largest-magnitude component is positive.
///
/// `dims` must not exceed `min(rows, cols)`.
#[allow(clippy::needless_range_loop)]
pub fn truncated_svd(a: &SparseMatrix, dims: usize, opts: SvdOptions) -> TruncatedSvd {
    let m = a.rows;
    let n = a.ncols();
    assert!(dims <= m.min(n), "dims {dims} exceeds matrix rank bound");
    let l = (dims + opts.oversample).min(m.min(n));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let omega: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..l).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let mut q = a.mul(&omega, l);
    orthonormalize(&mut q, l);
    for _ in 0..opts.power_iterations {
        let mut z = a.tmul(&q, l);
        orthonormalize(&mut z, l);
        q = a.mul(&z, l);
        orthonormalize(&mut q, l);
    }

    // B = Qᵀ A is l x n; stored as its transpose (n x l).
    let bt = a.tmul(&q, l);
    let mut bbt = vec![vec![0.0; l]; l];
    for row in &bt {
        for i in 0..l {
            for j in i..l {
                bbt[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..l {
        for j in 0..i {
            bbt[i][j] = bbt[j][i];
        }
    }
    let (eigvals, eigvecs) = symmetric_eigen(&bbt);
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&x, &y| eigvals[y].total_cmp(&eigvals[x]).then(x.cmp(&y)));
    order.truncate(dims);

    let mut u = vec![vec![0.0; dims]; m];
    for (c, &e) in order.iter().enumerate() {
        for (urow, qrow) in u.iter_mut().zip(&q) {
            urow[c] = qrow.iter().zip(&eigvecs).map(|(qv, evrow)| qv * evrow[e]).sum();
        }
        let pivot = u
            .iter()
            .map(|r| r[c])
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            for r in u.iter_mut() {
                r[c] = -r[c];
            }
        }
    }
    let singular_values = order.iter().map(|&e| eigvals[e].max(0.0).sqrt()).collect();
    TruncatedSvd { u, singular_values }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_small_matrix() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (mut vals, _) = symmetric_eigen(&a);
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_output() {
        let dense: Vec<Vec<f64>> = (0..12)
            .map(|i| (0..9).map(|j| ((i * 7 + j * 3) % 5) as f64).collect())
            .collect();
        let svd = truncated_svd(&SparseMatrix::from_dense(&dense), 4, SvdOptions::default());
        for a in 0..4 {
            for b in 0..4 {
                let dot: f64 = svd.u.iter().map(|r| r[a] * r[b]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-9, "{a},{b}: {dot}");
            }
        }
        assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn same_seed_same_bits() {
        let dense: Vec<Vec<f64>> = (0..30)
            .map(|i| (0..20).map(|j| (((i * 13) ^ (j * 5)) % 4) as f64).collect())
            .collect();
        let m = SparseMatrix::from_dense(&dense);
        let opts = SvdOptions {
            seed: 42,
            ..SvdOptions::default()
        };
        let a = truncated_svd(&m, 3, opts);
        let b = truncated_svd(&m, 3, opts);
        assert_eq!(a.u, b.u);
        assert_eq!(a.singular_values, b.singular_values);
    }
}
