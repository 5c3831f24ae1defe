//! Iterative and dense solvers shared by the Vekua and Dirichlet problems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // ⟨a, b⟩ conjugate-linear in a.
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) struct Gmres {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// Extreme singular values of the last Hessenberg matrix.
    pub sigma: Option<(f64, f64)>,
}

fn hessenberg_sigma(h: &[Vec<Complex64>], k: usize) -> Option<(f64, f64)> {
    if k == 0 {
        return None;
    }
    let m = DMatrix::from_fn(k + 1, k, |i, j| h[j].get(i).copied().unwrap_or_default());
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    Some((min, max))
}

/// Restarted GMRES with modified Gram–Schmidt Arnoldi and Givens rotations.
pub(crate) fn gmres(
    op: impl Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    x0: Vec<Complex64>,
    tol: f64,
    restart: usize,
    max_iterations: usize,
) -> Result<Gmres> {
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(Gmres {
            x: vec![zero; b.len()],
            iterations: 0,
            sigma: None,
        });
    }
    let mut x = x0;
    let mut total = 0;
    let mut sigma = None;
    loop {
        let ax = op(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= tol {
            return Ok(Gmres {
                x,
                iterations: total,
                sigma,
            });
        }
        if total >= max_iterations {
            return Err(Error::SolverDivergence {
                solver: "GMRES",
                iterations: total,
                residual: rel,
            });
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Raw Hessenberg columns (for the singular value estimate) and their rotated form.
        let mut hess: Vec<Vec<Complex64>> = Vec::new();
        let mut tri: Vec<Vec<Complex64>> = Vec::new();
        let mut cs: Vec<Complex64> = Vec::new();
        let mut sn: Vec<Complex64> = Vec::new();
        let mut g = vec![Complex64::new(beta, 0.0)];
        let mut k = 0;
        while k < restart && total < max_iterations {
            let mut w = op(&basis[k]);
            let mut col = vec![zero; k + 2];
            for (i, v) in basis.iter().enumerate() {
                col[i] = dot(v, &w);
                axpy(&mut w, -col[i], v);
            }
            let hn = norm(&w);
            col[k + 1] = Complex64::new(hn, 0.0);
            hess.push(col.clone());
            for i in 0..k {
                let t = cs[i].conj() * col[i] + sn[i].conj() * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = (col[k].norm_sqr() + col[k + 1].norm_sqr()).sqrt();
            let (c, s) = if denom == 0.0 {
                (Complex64::new(1.0, 0.0), zero)
            } else {
                (col[k] / denom, col[k + 1] / denom)
            };
            cs.push(c);
            sn.push(s);
            let gk = g[k];
            g[k] = c.conj() * gk;
            g.push(-s * gk);
            col[k] = Complex64::new(denom, 0.0);
            col.truncate(k + 1);
            tri.push(col);
            basis.push(if hn > 0.0 {
                w.iter().map(|v| v / hn).collect()
            } else {
                vec![zero; w.len()]
            });
            total += 1;
            k += 1;
            if g[k].norm() / bnorm <= tol || hn == 0.0 {
                break;
            }
        }
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= tri[j][i] * y[j];
            }
            y[i] = s / tri[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            axpy(&mut x, *yj, &basis[j]);
        }
        sigma = hessenberg_sigma(&hess, k);
        if let Some((min, max)) = sigma {
            if max > 0.0 && min < 1e-10 * max {
                return Err(Error::SingularSystem {
                    smallest: min,
                    largest: max,
                });
            }
        }
    }
}

pub(crate) struct Dense {
    pub x: Vec<Complex64>,
    pub smallest: f64,
}

/// Dense LU solve with an SVD rank check.
pub(crate) fn dense_solve(a: DMatrix<Complex64>, b: &[Complex64], rank_rtol: f64) -> Result<Dense> {
    let sv = a.clone().singular_values();
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smallest > rank_rtol * largest) {
        return Err(Error::SingularSystem { smallest, largest });
    }
    let rhs = DVector::from_column_slice(b);
    let x = a.lu().solve(&rhs).ok_or(Error::SingularSystem { smallest, largest })?;
    Ok(Dense {
        x: x.iter().cloned().collect(),
        smallest,
    })
}

pub(crate) struct Cg {
    pub x: Vec<f64>,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite operator.
pub(crate) fn conjugate_gradient(
    op: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<Cg> {
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(Cg { x });
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iterations {
        op(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        if rel <= tol {
            return Ok(Cg { x });
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
    Err(Error::SolverDivergence {
        solver: "conjugate gradient",
        iterations: max_iterations,
        residual: rel,
    })
}
