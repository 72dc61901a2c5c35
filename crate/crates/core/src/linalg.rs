//! Small dense/iterative linear-algebra helpers used across the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// LAPACK-backed eigendecomposition of a real symmetric matrix, eigenvalues
/// ascending. nalgebra's native `SymmetricEigen` silently returns inaccurate
/// pairs for some well-conditioned matrices, so all hermitian eigenproblems
/// route through here.
fn real_symmetric_eigen(a: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let se = nalgebra_lapack::SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Max |A - A†| over all entries.
pub fn hermiticity_residual(a: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition of a hermitian matrix, eigenvalues ascending.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

pub fn hermitian_eigen(a: &DMatrix<C64>) -> HermitianEigen {
    debug_assert!(hermiticity_residual(a) < 1e-10 * (1.0 + fro_norm(a)));
    let n = a.nrows();
    // real 2n×2n embedding [[X, -Y], [Y, X]] of A = X + iY; each complex
    // eigenpair appears twice, as (p; q) and (-q; p) over the same eigenvalue
    let mut b = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            b[(i, j)] = z.re;
            b[(i + n, j + n)] = z.re;
            b[(i, j + n)] = -z.im;
            b[(i + n, j)] = z.im;
        }
    }
    let (evals, evecs) = real_symmetric_eigen(b);
    let scale = evals
        .iter()
        .fold(1.0f64, |acc, &l| acc.max(l.abs()));
    let cluster_gap = 1e-7 * scale;
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    let mut accepted = 0usize;
    let mut lo = 0usize;
    while lo < 2 * n {
        // one numerically degenerate cluster; its doubled multiplicity is even
        let mut hi = lo + 1;
        while hi < 2 * n && evals[hi] - evals[hi - 1] <= cluster_gap {
            hi += 1;
        }
        assert!(
            (hi - lo) % 2 == 0,
            "embedded eigenvalue cluster of odd size {}",
            hi - lo
        );
        let mut candidates: Vec<(f64, DVector<C64>)> = (lo..hi)
            .map(|idx| {
                let col = evecs.column(idx);
                let z = DVector::<C64>::from_fn(n, |k, _| C64::new(col[k], col[k + n]));
                (evals[idx], z)
            })
            .collect();
        // pivoted Gram-Schmidt: the candidates double-cover the eigenspace
        for _ in 0..(hi - lo) / 2 {
            let (best, _) = candidates
                .iter()
                .enumerate()
                .max_by(|(_, (_, x)), (_, (_, y))| {
                    x.norm().partial_cmp(&y.norm()).unwrap()
                })
                .expect("nonempty cluster");
            let (val, mut z) = candidates.swap_remove(best);
            let nm = z.norm();
            assert!(nm > 1e-3, "degenerate cluster lost rank ({nm:.3e})");
            z /= C64::new(nm, 0.0);
            for (_, c) in candidates.iter_mut() {
                let proj = z.dotc(c);
                *c -= &z * proj;
            }
            values.push(val);
            vectors.set_column(accepted, &z);
            accepted += 1;
        }
        lo = hi;
    }
    assert_eq!(accepted, n);
    HermitianEigen { values, vectors }
}

impl HermitianEigen {
    /// exp(i·t·A) applied through the eigenbasis.
    pub fn unitary_exp(&self, t: f64) -> DMatrix<C64> {
        let n = self.values.len();
        let phases: Vec<C64> = self
            .values
            .iter()
            .map(|&l| C64::new(0.0, t * l).exp())
            .collect();
        // V · diag(phases) · V†
        let mut scaled = self.vectors.clone();
        for (c, phase) in phases.iter().enumerate() {
            let mut col = scaled.column_mut(c);
            for x in col.iter_mut() {
                *x *= phase;
            }
        }
        let mut out = DMatrix::<C64>::zeros(n, n);
        scaled.mul_to(&self.vectors.adjoint(), &mut out);
        out
    }

    /// exp(i·t·A)·v without forming the full unitary.
    pub fn apply_exp(&self, t: f64, v: &DVector<C64>) -> DVector<C64> {
        let mut coeffs = self.vectors.adjoint() * v;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= C64::new(0.0, t * self.values[k]).exp();
        }
        &self.vectors * coeffs
    }
}

/// Dense inverse of a hermitian positive matrix via its eigendecomposition.
pub fn hermitian_inverse(a: &DMatrix<C64>) -> DMatrix<C64> {
    // one Newton refinement step squares the conditioning error of the
    // eigendecomposition inverse, which matters for ill-conditioned blocks
    let r = hermitian_power(a, -1.0);
    let n = a.nrows();
    let residual = DMatrix::<C64>::identity(n, n) * C64::new(2.0, 0.0) - a * &r;
    &r * residual
}

/// A^p for hermitian A with strictly positive spectrum.
pub fn hermitian_power(a: &DMatrix<C64>, p: f64) -> DMatrix<C64> {
    let eig = hermitian_eigen(a);
    let mut scaled = eig.vectors.clone();
    for (c, &l) in eig.values.iter().enumerate() {
        assert!(
            l > 0.0 || p >= 0.0,
            "hermitian_power: non-positive eigenvalue {l} with exponent {p}"
        );
        let f = C64::new(l.powf(p), 0.0);
        for x in scaled.column_mut(c).iter_mut() {
            *x *= f;
        }
    }
    &scaled * eig.vectors.adjoint()
}

/// exp(i·t·H)·v for a hermitian operator given only by its matvec, using a
/// Lanczos (Krylov) approximation with full reorthogonalization and adaptive
/// time-splitting. Intended for sector blocks too large for a dense
/// eigendecomposition.
pub fn lanczos_exp_multiply<F>(matvec: F, v: &DVector<C64>, t: f64, tol: f64) -> DVector<C64>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    let norm0 = v.norm();
    if norm0 == 0.0 || t == 0.0 {
        return v.clone();
    }
    let mut remaining = t;
    let mut state = v.clone();
    let mut dt = t;
    let max_krylov = 60usize.min(v.len());
    let mut guard = 0;
    while remaining.abs() > 1e-300 {
        guard += 1;
        assert!(guard < 10_000, "lanczos_exp_multiply failed to converge");
        if dt.abs() > remaining.abs() {
            dt = remaining;
        }
        match lanczos_step(&matvec, &state, dt, tol, max_krylov) {
            Some(next) => {
                state = next;
                remaining -= dt;
            }
            None => {
                dt *= 0.5;
            }
        }
    }
    state
}

fn lanczos_step<F>(
    matvec: &F,
    v: &DVector<C64>,
    dt: f64,
    tol: f64,
    max_krylov: usize,
) -> Option<DVector<C64>>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    let beta0 = v.norm();
    let mut basis: Vec<DVector<C64>> = vec![v / C64::new(beta0, 0.0)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    // the residual estimate oscillates before convergence; require two
    // consecutive small values to avoid a spurious early exit
    let mut prev_err = f64::INFINITY;
    for j in 0..max_krylov {
        let mut w = matvec(&basis[j]);
        let alpha = basis[j].dotc(&w).re;
        alphas.push(alpha);
        w -= &basis[j] * C64::new(alpha, 0.0);
        if j > 0 {
            w -= &basis[j - 1] * C64::new(betas[j - 1], 0.0);
        }
        // full reorthogonalization; sector dims are modest
        for b in &basis {
            let c = b.dotc(&w);
            w -= b * c;
        }
        let beta = w.norm();
        // exp(i dt T) e1 in the Krylov basis
        let m = alphas.len();
        let mut tmat = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            tmat[(k, k)] = alphas[k];
            if k + 1 < m {
                tmat[(k, k + 1)] = betas[k];
                tmat[(k + 1, k)] = betas[k];
            }
        }
        let (tvals, tvecs) = real_symmetric_eigen(tmat);
        let mut small = DVector::<C64>::zeros(m);
        for col in 0..m {
            let phase = C64::new(0.0, dt * tvals[col]).exp();
            let head = tvecs[(0, col)];
            for row in 0..m {
                small[row] += C64::new(tvecs[(row, col)] * head, 0.0) * phase;
            }
        }
        let err = (beta * small[m - 1].norm() * dt.abs()).max(prev_err);
        prev_err = beta * small[m - 1].norm() * dt.abs();
        if err < tol || beta < 1e-14 || m == max_krylov {
            if err >= tol && beta >= 1e-14 {
                return None; // ask the caller for a smaller step
            }
            let mut out = DVector::<C64>::zeros(v.len());
            for (k, b) in basis.iter().enumerate() {
                out += b * (small[k] * C64::new(beta0, 0.0));
            }
            return Some(out);
        }
        betas.push(beta);
        basis.push(w / C64::new(beta, 0.0));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
        }
        let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        h
    }

    #[test]
    fn eigen_reconstructs() {
        let h = random_hermitian(12, 7);
        let eig = hermitian_eigen(&h);
        let mut rebuilt = DMatrix::<C64>::zeros(12, 12);
        for k in 0..12 {
            let v = eig.vectors.column(k);
            rebuilt += (v * v.adjoint()) * C64::new(eig.values[k], 0.0);
        }
        assert!(fro_norm(&(rebuilt - h)) < 1e-10);
    }

    #[test]
    fn exp_is_unitary_and_groups() {
        let h = random_hermitian(10, 3);
        let eig = hermitian_eigen(&h);
        let u1 = eig.unitary_exp(0.7);
        let id = &u1 * u1.adjoint();
        assert!(fro_norm(&(id - DMatrix::<C64>::identity(10, 10))) < 1e-12);
        let u2 = eig.unitary_exp(0.3);
        let u3 = eig.unitary_exp(1.0);
        assert!(fro_norm(&(&u1 * u2 - u3)) < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense_exp() {
        let n = 40;
        let h = random_hermitian(n, 11);
        let eig = hermitian_eigen(&h);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = DVector::<C64>::from_fn(n, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let dense = eig.apply_exp(1.3, &v);
        let kry = lanczos_exp_multiply(|x| &h * x, &v, 1.3, 1e-12);
        assert!((dense - kry).norm() < 1e-10);
    }

    #[test]
    fn inverse_of_positive_matrix() {
        let h = random_hermitian(8, 9) + DMatrix::<C64>::identity(8, 8) * C64::new(10.0, 0.0);
        let inv = hermitian_inverse(&h);
        assert!(fro_norm(&(&h * inv - DMatrix::<C64>::identity(8, 8))) < 1e-10);
    }
}
