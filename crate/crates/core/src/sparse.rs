//! Minimal CSR sparse complex matrices: just enough for Hamiltonian
//! assembly (Kronecker products, scaled sums) and Lanczos matrix-vector
//! products.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Square sparse complex matrix in compressed-sparse-row form.
#[derive(Debug, Clone)]
pub struct SpMat {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SpMat {
    /// Build from (row, col, value) triplets; duplicate entries are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.retain(|&(_, _, v)| v.norm_sqr() != 0.0);
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SpMat { dim, row_ptr, col_idx, vals }
    }

    pub fn zeros(dim: usize) -> Self {
        SpMat { dim, row_ptr: vec![0; dim + 1], col_idx: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let t = (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect();
        Self::from_triplets(dim, t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterate stored entries as (row, col, value).
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.vals[k]))
        })
    }

    /// y = A x
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    pub fn scale(&self, c: Complex64) -> SpMat {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= c;
        }
        out
    }

    /// self + c * other
    pub fn add_scaled(&self, other: &SpMat, c: Complex64) -> SpMat {
        assert_eq!(self.dim, other.dim);
        let mut t: Vec<(usize, usize, Complex64)> = self.triplets().collect();
        t.extend(other.triplets().map(|(r, col, v)| (r, col, c * v)));
        SpMat::from_triplets(self.dim, t)
    }

    /// Kronecker product, row-major ordering: index = i_a * dim_b + i_b.
    pub fn kron(&self, other: &SpMat) -> SpMat {
        let dim = self.dim * other.dim;
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (ra, ca, va) in self.triplets() {
            for (rb, cb, vb) in other.triplets() {
                t.push((ra * other.dim + rb, ca * other.dim + cb, va * vb));
            }
        }
        SpMat::from_triplets(dim, t)
    }

    /// Max |A - A^dagger| entry, as a Hermiticity defect measure.
    pub fn hermiticity_defect(&self) -> f64 {
        let at: std::collections::HashMap<(usize, usize), Complex64> =
            self.triplets().map(|(r, c, v)| ((r, c), v)).collect();
        let mut defect: f64 = 0.0;
        for (r, c, v) in self.triplets() {
            let vt = at.get(&(c, r)).copied().unwrap_or_else(|| Complex64::new(0.0, 0.0));
            defect = defect.max((v - vt.conj()).norm());
        }
        defect
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<Complex64>, drop_tol: f64) -> SpMat {
        assert_eq!(m.nrows(), m.ncols());
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)].norm() > drop_tol {
                    t.push((r, c, m[(r, c)]));
                }
            }
        }
        SpMat::from_triplets(m.nrows(), t)
    }

    /// Expectation-style sandwich `x^dagger A y`.
    pub fn sandwich(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let mut ay = vec![Complex64::new(0.0, 0.0); self.dim];
        self.matvec(y, &mut ay);
        x.iter().zip(ay.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Lift a per-mode operator into the full product space:
/// `I x ... x op x ... x I` with `op` acting on mode `m`.
pub fn lift(op: &SpMat, mode: usize, dims: &[usize]) -> SpMat {
    assert_eq!(op.dim(), dims[mode]);
    let left: usize = dims[..mode].iter().product();
    let right: usize = dims[mode + 1..].iter().product();
    SpMat::identity(left).kron(op).kron(&SpMat::identity(right))
}
