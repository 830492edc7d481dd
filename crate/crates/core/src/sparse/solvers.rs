//! Preconditioned conjugate gradients and restarted GMRES.
//!
//! Both solvers stop once `‖b - A x‖₂ <= tol · max(1, ‖b‖₂)`. The returned
//! [`SolveReport`] always carries the recomputed true residual, and the
//! iterate handed back is finite even when the iteration breaks down.

use super::csr::{dot, norm2, CsrMatrix};
use super::precond::{Applied, Preconditioner};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Krylov dimension between GMRES restarts; ignored by CG.
    pub restart: usize,
    pub preconditioner: Preconditioner,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 5000,
            restart: 60,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_preconditioner(mut self, p: Preconditioner) -> Self {
        self.preconditioner = p;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// True residual `‖b - A x‖₂` of the returned iterate.
    pub residual_norm: f64,
    pub converged: bool,
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x);
    b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
}

fn finish(a: &CsrMatrix, b: &[f64], x: Vec<f64>, iterations: usize, target: f64) -> (Vec<f64>, SolveReport) {
    let residual_norm = norm2(&residual(a, b, &x));
    let converged = residual_norm.is_finite() && residual_norm <= target;
    (
        x,
        SolveReport {
            iterations,
            residual_norm,
            converged,
        },
    )
}

fn target_for(b: &[f64], tol: f64) -> f64 {
    tol * norm2(b).max(1.0)
}

/// Conjugate gradients for symmetric positive definite `a`.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> (Vec<f64>, SolveReport) {
    solve_spd_from(a, b, vec![0.0; b.len()], opts)
}

pub fn solve_spd_from(a: &CsrMatrix, b: &[f64], x0: Vec<f64>, opts: &SolverOptions) -> (Vec<f64>, SolveReport) {
    assert_eq!(a.rows(), b.len());
    assert_eq!(a.cols(), b.len());
    let n = b.len();
    let target = target_for(b, opts.tol);
    let precond = Applied::build(opts.preconditioner, a);

    let mut x = x0;
    let mut r = residual(a, b, &x);
    if norm2(&r) <= target {
        return finish(a, b, x, 0, target);
    }
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;

    while iterations < opts.max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) || !pap.is_finite() {
            break;
        }
        let alpha = rz / pap;
        let mut next_x = x.clone();
        for i in 0..n {
            next_x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if next_x.iter().any(|v| !v.is_finite()) {
            break;
        }
        x = next_x;
        iterations += 1;
        if norm2(&r) <= target {
            break;
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    finish(a, b, x, iterations, target)
}

/// Right-preconditioned restarted GMRES for general nonsingular `a`.
pub fn solve_general(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> (Vec<f64>, SolveReport) {
    solve_general_from(a, b, vec![0.0; b.len()], opts)
}

pub fn solve_general_from(
    a: &CsrMatrix,
    b: &[f64],
    x0: Vec<f64>,
    opts: &SolverOptions,
) -> (Vec<f64>, SolveReport) {
    assert_eq!(a.rows(), b.len());
    assert_eq!(a.cols(), b.len());
    let n = b.len();
    let m = opts.restart.max(1).min(n.max(1));
    let target = target_for(b, opts.tol);
    let precond = Applied::build(opts.preconditioner, a);

    let mut x = x0;
    let mut iterations = 0;

    'outer: loop {
        let r = residual(a, b, &x);
        let beta = norm2(&r);
        if beta <= target || iterations >= opts.max_iter || !beta.is_finite() {
            break;
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut precond_basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        basis.push(r.iter().map(|v| v / beta).collect());
        // column-major Hessenberg after Givens rotations (upper triangular)
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        let mut stalled = false;

        for j in 0..m {
            let mut z = vec![0.0; n];
            precond.apply(&basis[j], &mut z);
            let mut w = a.matvec(&z);
            precond_basis.push(z);

            let mut col = vec![0.0; j + 2];
            for i in 0..=j {
                let hij = dot(&w, &basis[i]);
                col[i] = hij;
                for (wk, vk) in w.iter_mut().zip(&basis[i]) {
                    *wk -= hij * vk;
                }
            }
            let wnorm = norm2(&w);
            col[j + 1] = wnorm;

            for i in 0..j {
                let tmp = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = tmp;
            }
            let denom = col[j].hypot(col[j + 1]);
            if !denom.is_finite() || col.iter().any(|v| !v.is_finite()) {
                precond_basis.pop();
                stalled = true;
                break;
            }
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (col[j] / denom, col[j + 1] / denom) };
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            cs.push(c);
            sn.push(s);
            h.push(col);
            k_used = j + 1;
            iterations += 1;

            let resid = g[j + 1].abs();
            if resid <= target || iterations >= opts.max_iter {
                break;
            }
            if wnorm <= f64::EPSILON * beta {
                // invariant subspace: the restart recomputes the true residual
                stalled = true;
                break;
            }
            basis.push(w.into_iter().map(|v| v / wnorm).collect());
        }

        if k_used > 0 {
            let mut y = vec![0.0; k_used];
            for i in (0..k_used).rev() {
                let mut acc = g[i];
                for k in (i + 1)..k_used {
                    acc -= h[k][i] * y[k];
                }
                let diag = h[i][i];
                y[i] = if diag.abs() > f64::MIN_POSITIVE && diag.is_finite() { acc / diag } else { 0.0 };
            }
            let mut candidate = x.clone();
            for (yi, zi) in y.iter().zip(&precond_basis) {
                for (xk, zk) in candidate.iter_mut().zip(zi) {
                    *xk += yi * zk;
                }
            }
            if candidate.iter().all(|v| v.is_finite()) {
                x = candidate;
            } else {
                break 'outer;
            }
        }

        if stalled {
            let r = residual(a, b, &x);
            if norm2(&r) > target {
                // no progress possible from this Krylov space
                if k_used == 0 || norm2(&r) >= beta * (1.0 - 1e-12) {
                    break;
                }
            }
        }
        if iterations >= opts.max_iter {
            break;
        }
    }
    finish(a, b, x, iterations, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense Gaussian elimination with partial pivoting; the test oracle.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in (k + 1)..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    fn poisson_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn cg_identity_takes_one_iteration() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        let (x, rep) = solve_spd(&a, &b, &SolverOptions::default());
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert_eq!(x, b);
    }

    #[test]
    fn cg_poisson_matches_dense_elimination() {
        let a = poisson_1d(10);
        let b = vec![1.0; 10];
        let (x, rep) = solve_spd(&a, &b, &SolverOptions::default());
        assert!(rep.converged);
        let oracle = dense_solve(a.to_dense(), b);
        for (xi, oi) in x.iter().zip(oracle) {
            assert!((xi - oi).abs() < 1e-10, "{xi} vs {oi}");
        }
    }

    #[test]
    fn cg_random_spd_meets_tolerance() {
        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut v: f64 = (0..n).map(|k| m[k][i] * m[k][j]).sum();
                if i == j {
                    v += 1.0;
                }
                t.push((i, j, v));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (x, rep) = solve_spd(&a, &b, &SolverOptions::default().with_tol(1e-12));
        assert!(rep.converged);
        let recomputed = norm2(&residual(&a, &b, &x));
        assert!(recomputed <= 1e-12 * norm2(&b).max(1.0));
        assert_eq!(recomputed, rep.residual_norm);
    }

    #[test]
    fn gmres_upper_triangular() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)]).unwrap();
        let (x, rep) = solve_general(&a, &[2.0, 1.0], &SolverOptions::default());
        assert!(rep.converged);
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gmres_upwind_advection_matches_dense() {
        // first-order upwind for u' - eps u'' = 1 with strong advection
        let n = 20;
        let h = 1.0 / (n as f64 + 1.0);
        let (adv, eps) = (1.0, 1e-3);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, adv / h + 2.0 * eps / (h * h)));
            if i > 0 {
                t.push((i, i - 1, -adv / h - eps / (h * h)));
            }
            if i + 1 < n {
                t.push((i, i + 1, -eps / (h * h)));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let b = vec![1.0; n];
        for p in [Preconditioner::None, Preconditioner::Jacobi, Preconditioner::Ilu0] {
            let (x, rep) = solve_general(&a, &b, &SolverOptions::default().with_preconditioner(p));
            assert!(rep.converged, "{p:?}");
            let oracle = dense_solve(a.to_dense(), b.clone());
            for (xi, oi) in x.iter().zip(&oracle) {
                assert!((xi - oi).abs() < 1e-8, "{p:?}: {xi} vs {oi}");
            }
        }
    }

    #[test]
    fn gmres_singular_fails_gracefully() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let (x, rep) = solve_general(&a, &[1.0, 1.0, 1.0], &SolverOptions::default());
        assert!(!rep.converged);
        assert!(x.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn solvers_are_deterministic() {
        let a = poisson_1d(30);
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let opts = SolverOptions::default();
        assert_eq!(solve_general(&a, &b, &opts).0, solve_general(&a, &b, &opts).0);
        assert_eq!(solve_spd(&a, &b, &opts).0, solve_spd(&a, &b, &opts).0);
    }
}
