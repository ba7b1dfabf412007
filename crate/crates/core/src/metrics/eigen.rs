//! Symmetric eigenvalue routines backing the spectral metrics.
//!
//! Dense spectra go through faer. The algebraic connectivity of large
//! graphs is extracted iteratively: Lanczos on the pseudo-inverse of the
//! Laplacian (applied by conjugate-gradient solves) with the all-ones
//! null vector deflated, certified by the residual of the Ritz pair.

use nalgebra::DMatrix;

/// Dense graphs up to this order use a full symmetric eigensolve for the
/// algebraic connectivity; larger ones use the iterative path.
pub const DENSE_EIGEN_LIMIT: usize = 1000;

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>, String> {
    let n = m.nrows();
    let fm = faer::Mat::from_fn(n, n, |i, j| m[(i, j)]);
    let mut ev = fm
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| format!("symmetric eigensolver did not converge: {e:?}"))?;
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev)
}

fn degrees(adj: &[Vec<usize>]) -> Vec<f64> {
    adj.iter().map(|a| a.len() as f64).collect()
}

/// `out = L x` with L the graph Laplacian of `adj`.
fn laplacian_matvec(adj: &[Vec<usize>], deg: &[f64], x: &[f64], out: &mut [f64]) {
    for i in 0..adj.len() {
        let mut acc = deg[i] * x[i];
        for &j in &adj[i] {
            acc -= x[j];
        }
        out[i] = acc;
    }
}

fn project_out_ones(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= mean;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `L x = b` restricted to the subspace orthogonal to the all-ones
/// vector, by Jacobi-preconditioned conjugate gradients. `b` must already
/// be orthogonal to ones; the graph must be connected.
fn cg_solve(adj: &[Vec<usize>], deg: &[f64], b: &[f64], rel_tol: f64) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(deg).map(|(ri, di)| ri / di.max(1.0)).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return x;
    }
    let mut ap = vec![0.0; n];
    let max_iter = 20 * n + 100;
    for it in 0..max_iter {
        laplacian_matvec(adj, deg, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= rel_tol * b_norm {
            break;
        }
        if it % 50 == 49 {
            // keep iterates in the deflated subspace against drift
            project_out_ones(&mut x);
            project_out_ones(&mut r);
        }
        for i in 0..n {
            z[i] = r[i] / deg[i].max(1.0);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    project_out_ones(&mut x);
    x
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Smallest nonzero Laplacian eigenvalue of a connected graph by Lanczos
/// on L⁺, certified to absolute tolerance `tol` via the Ritz residual.
/// Returns `None` when the certificate is not reached within the
/// iteration budget (callers fall back to the dense path).
pub fn lanczos_lambda2(adj: &[Vec<usize>], tol: f64) -> Option<f64> {
    let n = adj.len();
    let deg = degrees(adj);
    let max_basis = 200.min(n - 1);

    // deterministic start vector
    let mut seed = 0x5eed_1234_abcd_9876u64;
    let mut v: Vec<f64> = (0..n)
        .map(|_| (splitmix64(&mut seed) >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        .collect();
    project_out_ones(&mut v);
    let nv = norm(&v);
    if nv == 0.0 {
        return None;
    }
    for x in v.iter_mut() {
        *x /= nv;
    }

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut scratch = vec![0.0; n];

    for k in 0..max_basis {
        let vk = basis[k].clone();
        let mut w = cg_solve(adj, &deg, &vk, 1e-13);
        let alpha = dot(&w, &vk);
        alphas.push(alpha);
        for i in 0..n {
            w[i] -= alpha * vk[i];
        }
        if k > 0 {
            let beta_prev = betas[k - 1];
            for i in 0..n {
                w[i] -= beta_prev * basis[k - 1][i];
            }
        }
        // full reorthogonalization, twice
        for _ in 0..2 {
            project_out_ones(&mut w);
            for u in &basis {
                let c = dot(&w, u);
                for i in 0..n {
                    w[i] -= c * u[i];
                }
            }
        }

        // Ritz extraction on the tridiagonal
        let kk = alphas.len();
        if kk >= 2 || k + 1 == max_basis {
            let mut t = DMatrix::zeros(kk, kk);
            for i in 0..kk {
                t[(i, i)] = alphas[i];
                if i + 1 < kk {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let se = nalgebra::SymmetricEigen::new(t);
            let (mut best, mut best_theta) = (0, f64::NEG_INFINITY);
            for (i, &th) in se.eigenvalues.iter().enumerate() {
                if th > best_theta {
                    best_theta = th;
                    best = i;
                }
            }
            if best_theta > 0.0 {
                let s = se.eigenvectors.column(best);
                let mut y = vec![0.0; n];
                for (j, u) in basis.iter().enumerate() {
                    let c = s[j];
                    for i in 0..n {
                        y[i] += c * u[i];
                    }
                }
                project_out_ones(&mut y);
                let ny = norm(&y);
                if ny > 0.0 {
                    for x in y.iter_mut() {
                        *x /= ny;
                    }
                    let lambda = 1.0 / best_theta;
                    laplacian_matvec(adj, &deg, &y, &mut scratch);
                    let mut res = 0.0;
                    for i in 0..n {
                        let d = scratch[i] - lambda * y[i];
                        res += d * d;
                    }
                    if res.sqrt() <= tol {
                        return Some(lambda);
                    }
                }
            }
        }

        let beta = norm(&w);
        if beta < 1e-14 {
            break;
        }
        betas.push(beta);
        for x in w.iter_mut() {
            *x /= beta;
        }
        basis.push(w);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_adj(n: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for i in 0..n - 1 {
            adj[i].push(i + 1);
            adj[i + 1].push(i);
        }
        adj
    }

    #[test]
    fn lanczos_matches_closed_form_on_paths() {
        for n in [50usize, 200] {
            let adj = path_adj(n);
            let expected = 2.0 * (1.0 - (std::f64::consts::PI / n as f64).cos());
            let got = lanczos_lambda2(&adj, 1e-10).expect("converged");
            assert!(
                (got - expected).abs() < 1e-8,
                "n={n}: got {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn lanczos_matches_dense_on_a_lollipop() {
        // clique of 12 with a tail of 40: clustered spectrum exercise
        let n = 52;
        let mut adj = vec![Vec::new(); n];
        for i in 0..12 {
            for j in 0..i {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for i in 11..n - 1 {
            adj[i].push(i + 1);
            adj[i + 1].push(i);
        }
        let mut l = DMatrix::zeros(n, n);
        for (i, nb) in adj.iter().enumerate() {
            l[(i, i)] = nb.len() as f64;
            for &j in nb {
                l[(i, j)] = -1.0;
            }
        }
        let dense = symmetric_eigenvalues(&l).unwrap()[1];
        let it = lanczos_lambda2(&adj, 1e-10).expect("converged");
        assert!((dense - it).abs() < 1e-8, "dense {dense} vs lanczos {it}");
    }
}
