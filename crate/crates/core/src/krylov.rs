//! Restarted GMRES for matrix-free linear operators, and a dense LU fallback
//! on the even subspace.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub restart: usize,
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { restart: 50, rtol: 1e-11, max_iter: 500 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` with GMRES(restart), starting from `x0` (or zero).
pub fn gmres(
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    b: &[f64],
    x0: Option<&[f64]>,
    config: GmresConfig,
) -> Result<GmresOutcome> {
    let n = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(GmresOutcome { x: vec![0.0; n], iterations: 0, relative_residual: 0.0 });
    }
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut iterations = 0;
    let restart = config.restart.max(1);

    loop {
        let ax = apply(&x)?;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / b_norm;
        if rel <= config.rtol {
            return Ok(GmresOutcome { x, iterations, relative_residual: rel });
        }
        if iterations >= config.max_iter {
            return Err(Error::SolverFailure { iterations, residual: rel });
        }

        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Hessenberg columns, already rotated.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut cs: Vec<f64> = Vec::with_capacity(restart);
        let mut sn: Vec<f64> = Vec::with_capacity(restart);
        let mut g = vec![beta];

        for j in 0..restart {
            iterations += 1;
            let mut w = apply(&basis[j])?;
            let mut col = Vec::with_capacity(j + 2);
            // Modified Gram–Schmidt, twice for stability.
            for v in &basis {
                let hij = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
                col.push(hij);
            }
            for (i, v) in basis.iter().enumerate() {
                let corr = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= corr * vi);
                col[i] += corr;
            }
            let w_norm = norm(&w);
            col.push(w_norm);

            for i in 0..j {
                let (a, c) = (col[i], col[i + 1]);
                col[i] = cs[i] * a + sn[i] * c;
                col[i + 1] = -sn[i] * a + cs[i] * c;
            }
            let (a, c) = (col[j], col[j + 1]);
            let denom = a.hypot(c);
            let (cj, sj) = if denom == 0.0 { (1.0, 0.0) } else { (a / denom, c / denom) };
            col[j] = denom;
            col[j + 1] = 0.0;
            cs.push(cj);
            sn.push(sj);
            let gj = g[j];
            g[j] = cj * gj;
            g.push(-sj * gj);
            h.push(col);

            let estimate = g[j + 1].abs() / b_norm;
            let breakdown = w_norm <= 1e-300;
            if estimate <= config.rtol || breakdown || iterations >= config.max_iter || j + 1 == restart {
                // Back substitution for y in H y = g.
                let m = j + 1;
                let mut y = vec![0.0; m];
                for i in (0..m).rev() {
                    let mut s = g[i];
                    for k in i + 1..m {
                        s -= h[k][i] * y[k];
                    }
                    y[i] = s / h[i][i];
                }
                for (yi, v) in y.iter().zip(&basis) {
                    x.iter_mut().zip(v).for_each(|(xk, vk)| *xk += yi * vk);
                }
                break;
            }
            basis.push(w.iter().map(|v| v / w_norm).collect());
        }
    }
}

/// Dense solve of `A x = b` for an operator that maps even grid fields to
/// even grid fields. Unknowns are the values at `j = 0..=N/2`; `x_j` and
/// `x_{N−j}` share a value.
pub fn dense_even_solve(
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    b: &[f64],
) -> Result<Vec<f64>> {
    let n = b.len();
    let half = n / 2 + 1;
    let mut matrix = DMatrix::<f64>::zeros(half, half);
    let mut basis = vec![0.0; n];
    for j in 0..half {
        basis.iter_mut().for_each(|v| *v = 0.0);
        basis[j] = 1.0;
        basis[(n - j) % n] = 1.0;
        let column = apply(&basis)?;
        for i in 0..half {
            matrix[(i, j)] = column[i];
        }
    }
    let rhs = DVector::from_iterator(half, b[..half].iter().copied());
    let solution = matrix
        .lu()
        .solve(&rhs)
        .ok_or(Error::SolverFailure { iterations: half, residual: f64::INFINITY })?;
    Ok((0..n).map(|i| solution[i.min(n - i)]).collect())
}
