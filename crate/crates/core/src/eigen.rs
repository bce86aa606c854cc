//! Lowest-k eigenpairs of sparse Hermitian matrices.
//!
//! Small problems go through a dense Hermitian eigendecomposition; larger
//! ones use Lanczos with full reorthogonalization and a deterministic
//! seeded start vector. Eigenvector phases are fixed so the largest-modulus
//! component is real and positive.

use crate::error::{Error, Result};
use crate::sparse::SpMat;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dimension below which the dense path is used unconditionally.
const DENSE_THRESHOLD: usize = 600;
/// Hard cap on the Krylov subspace dimension.
const MAX_KRYLOV: usize = 500;
/// Ritz convergence is checked every this many Lanczos steps.
const CHECK_EVERY: usize = 40;

#[derive(Debug, Clone)]
pub struct EigenSolution {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Matching normalized eigenvectors.
    pub vectors: Vec<Vec<Complex64>>,
    /// Explicit residual norms `|H x - theta x|`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Compute the `k` lowest eigenpairs of a Hermitian matrix.
pub fn lowest_eigenpairs(h: &SpMat, k: usize, tol: f64, seed: u64) -> Result<EigenSolution> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(Error::Configuration(format!(
            "requested {k} eigenpairs of a {dim}-dimensional matrix"
        )));
    }
    if dim <= DENSE_THRESHOLD || k * 3 >= dim {
        return dense_lowest(h, k);
    }
    lanczos_lowest(h, k, tol, seed)
}

/// Dense-path solver, also used as an oracle in tests.
pub fn dense_lowest(h: &SpMat, k: usize) -> Result<EigenSolution> {
    let dim = h.dim();
    let dense = h.to_dense();
    let eig = dense.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let theta = eig.eigenvalues[idx];
        let mut x: Vec<Complex64> = eig.eigenvectors.column(idx).iter().copied().collect();
        fix_phase(&mut x);
        residuals.push(residual_norm(h, theta, &x));
        values.push(theta);
        vectors.push(x);
    }
    Ok(EigenSolution { values, vectors, residuals, iterations: 0 })
}

fn lanczos_lowest(h: &SpMat, k: usize, tol: f64, seed: u64) -> Result<EigenSolution> {
    let dim = h.dim();
    let m_max = MAX_KRYLOV.min(dim);
    let scale = h.max_abs().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_max);
    let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
    let mut betas: Vec<f64> = Vec::with_capacity(m_max); // beta[j] links v_j and v_{j+1}

    let mut v = random_unit(dim, &mut rng);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];

    let mut converged_at: Option<usize> = None;
    while basis.len() < m_max {
        basis.push(v.clone());
        let j = basis.len() - 1;
        h.matvec(&basis[j], &mut w);
        let alpha = basis[j].iter().zip(w.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
        alphas.push(alpha);
        // full reorthogonalization, two Gram-Schmidt passes
        for _ in 0..2 {
            for q in &basis {
                let proj: Complex64 = q.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
                for (wi, qi) in w.iter_mut().zip(q.iter()) {
                    *wi -= proj * qi;
                }
            }
        }
        let beta = norm(&w);
        if beta < 1e-12 * scale {
            // invariant subspace hit: restart with a fresh orthogonal vector
            betas.push(0.0);
            if basis.len() == dim {
                break;
            }
            v = random_unit(dim, &mut rng);
            orthogonalize(&mut v, &basis);
            continue;
        }
        betas.push(beta);
        for (vi, wi) in w.iter().enumerate() {
            v[vi] = wi / beta;
        }

        let m = basis.len();
        if m >= k && (m % CHECK_EVERY == 0 || m == m_max) {
            let (theta, s) = ritz(&alphas, &betas[..m - 1]);
            let ok = (0..k).all(|i| {
                let bound = betas[m - 1] * s[(m - 1, i)].abs();
                bound < tol * theta[i].abs().max(scale * 1e-3)
            });
            if ok {
                converged_at = Some(m);
                break;
            }
        }
    }

    let m = converged_at.unwrap_or(basis.len());
    if m < k {
        return Err(Error::SolverNonConvergence(format!(
            "Krylov space of dimension {m} smaller than requested {k} eigenpairs"
        )));
    }
    let (theta, s) = ritz(&alphas[..m], &betas[..m - 1]);
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for i in 0..k {
        let mut x = vec![Complex64::new(0.0, 0.0); dim];
        for (j, q) in basis.iter().take(m).enumerate() {
            let cij = Complex64::new(s[(j, i)], 0.0);
            for (xi, qi) in x.iter_mut().zip(q.iter()) {
                *xi += cij * qi;
            }
        }
        let nrm = norm(&x);
        for xi in &mut x {
            *xi /= nrm;
        }
        fix_phase(&mut x);
        let res = residual_norm(h, theta[i], &x);
        if res > tol * scale {
            return Err(Error::SolverNonConvergence(format!(
                "residual {res:.3e} above tolerance for eigenvalue {i}"
            )));
        }
        values.push(theta[i]);
        vectors.push(x);
        residuals.push(res);
    }
    Ok(EigenSolution { values, vectors, residuals, iterations: m })
}

/// Eigen-decompose the real symmetric tridiagonal Lanczos matrix; returns
/// ascending eigenvalues and the eigenvector matrix (columns sorted to
/// match).
fn ritz(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for (i, &a) in alphas.iter().enumerate() {
        t[(i, i)] = a;
    }
    for (i, &b) in betas.iter().enumerate().take(m.saturating_sub(1)) {
        t[(i, i + 1)] = b;
        t[(i + 1, i)] = b;
    }
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<f64>::zeros(m, m);
    for (newcol, &oldcol) in order.iter().enumerate() {
        vecs.set_column(newcol, &eig.eigenvectors.column(oldcol));
    }
    (values, vecs)
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let n = norm(&v);
    for x in &mut v {
        *x /= n;
    }
    v
}

fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for q in basis {
            let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q.iter()) {
                *vi -= proj * qi;
            }
        }
    }
    let n = norm(v);
    for x in v.iter_mut() {
        *x /= n;
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn residual_norm(h: &SpMat, theta: f64, x: &[Complex64]) -> f64 {
    let mut hx = vec![Complex64::new(0.0, 0.0); x.len()];
    h.matvec(x, &mut hx);
    hx.iter().zip(x.iter()).map(|(a, b)| (a - theta * b).norm_sqr()).sum::<f64>().sqrt()
}

/// Rotate the global phase so the largest-modulus component is real > 0.
pub fn fix_phase(x: &mut [Complex64]) {
    let mut best = 0usize;
    let mut best_norm = -1.0;
    for (i, v) in x.iter().enumerate() {
        let n = v.norm_sqr();
        if n > best_norm {
            best_norm = n;
            best = i;
        }
    }
    let pivot = x[best];
    if pivot.norm() == 0.0 {
        return;
    }
    let phase = pivot / pivot.norm();
    for v in x.iter_mut() {
        *v /= phase;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_hermitian(dim: usize, seed: u64) -> SpMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..dim {
            t.push((i, i, Complex64::new(rng.gen::<f64>() * 4.0 - 2.0, 0.0)));
            for j in (i + 1)..dim {
                if rng.gen::<f64>() < 0.08 {
                    let v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                    t.push((i, j, v));
                    t.push((j, i, v.conj()));
                }
            }
        }
        SpMat::from_triplets(dim, t)
    }

    #[test]
    fn dense_path_diagonal_matrix() {
        let h = SpMat::from_triplets(
            4,
            vec![
                (0, 0, Complex64::new(3.0, 0.0)),
                (1, 1, Complex64::new(-1.0, 0.0)),
                (2, 2, Complex64::new(0.5, 0.0)),
                (3, 3, Complex64::new(7.0, 0.0)),
            ],
        );
        let sol = lowest_eigenpairs(&h, 3, 1e-10, 1).unwrap();
        assert!((sol.values[0] + 1.0).abs() < 1e-12);
        assert!((sol.values[1] - 0.5).abs() < 1e-12);
        assert!((sol.values[2] - 3.0).abs() < 1e-12);
        // phase convention: pivot component real positive
        assert!((sol.vectors[0][1].re - 1.0).abs() < 1e-12);
        assert!(sol.vectors[0][1].im.abs() < 1e-14);
    }

    #[test]
    fn lanczos_matches_dense_oracle() {
        let h = random_hermitian(900, 7);
        let sparse = lanczos_lowest(&h, 6, 1e-10, 42).unwrap();
        let dense = dense_lowest(&h, 6).unwrap();
        for i in 0..6 {
            assert!(
                (sparse.values[i] - dense.values[i]).abs() < 1e-8,
                "eigenvalue {i}: {} vs {}",
                sparse.values[i],
                dense.values[i]
            );
            let overlap: Complex64 = sparse.vectors[i]
                .iter()
                .zip(dense.vectors[i].iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-7, "eigenvector {i} overlap {overlap}");
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let h = random_hermitian(700, 11);
        let a = lanczos_lowest(&h, 4, 1e-9, 5).unwrap();
        let b = lanczos_lowest(&h, 4, 1e-9, 5).unwrap();
        assert_eq!(a.values, b.values);
        for (x, y) in a.vectors.iter().zip(b.vectors.iter()) {
            for (xi, yi) in x.iter().zip(y.iter()) {
                assert_eq!(xi, yi);
            }
        }
    }

    #[test]
    fn residuals_are_small() {
        let h = random_hermitian(800, 3);
        let sol = lanczos_lowest(&h, 5, 1e-10, 9).unwrap();
        let scale = h.max_abs();
        for r in &sol.residuals {
            assert!(*r < 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn degenerate_eigenvalues_found() {
        // 2x identical diagonal blocks -> every eigenvalue doubly degenerate
        let mut t = Vec::new();
        for i in 0..40 {
            t.push((i, i, Complex64::new((i % 20) as f64, 0.0)));
        }
        let h = SpMat::from_triplets(40, t);
        let sol = dense_lowest(&h, 4).unwrap();
        assert_eq!(sol.values, vec![0.0, 0.0, 1.0, 1.0]);
    }
}
