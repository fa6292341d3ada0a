//! Travelling-wave profiles: the KdV soliton, the contraction iteration for
//! the correction `V_ε`, an independent Petviashvili iteration on the full
//! equation, and ε-sweeps of `‖W_ε − W₀‖_{H¹}`.

use serde::{Deserialize, Serialize};

use crate::catalog::LatticeModel;
use crate::dispersion::{least_squares_slope, DispersionProfile};
use crate::error::{Error, Result};
use crate::operators::{OperatorContext, OperatorOptions};
use crate::spectral::Grid;

/// Stabilizing exponent of the Petviashvili iteration.
const PETVIASHVILI_GAMMA: f64 = 2.0;
/// The contraction is declared divergent past this multiple of `‖V₁‖`.
const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Contraction,
    Petviashvili,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSolution {
    pub eps: f64,
    pub sigma: f64,
    pub c_eps_sq: f64,
    /// Full profile `W_ε = W₀ + ε^σ V`.
    pub w: Vec<f64>,
    /// Correction `V`.
    pub v: Vec<f64>,
    pub residual_h1: f64,
    pub iterations: usize,
    pub method: Method,
    /// `‖V_{n+1} − V_n‖_{H¹}` (or `‖W_{n+1} − W_n‖_{H¹}`) per iteration.
    pub increments: Vec<f64>,
}

/// `W₀ = −(3λ″(0)/(4b)) sech²(x/2)`.
pub fn kdv_profile(ctx: &OperatorContext) -> Vec<f64> {
    ctx.w0().to_vec()
}

/// `c_ε² = c₀² − ½λ″(0)ε²`.
pub fn wave_speed_sq(ctx: &OperatorContext) -> f64 {
    ctx.wave_speed_sq()
}

/// `‖ℬ_εW − 𝒬_ε(W,W) − ε²𝒫_ε(W)‖_{H¹}`.
pub fn residual(ctx: &OperatorContext, w: &[f64]) -> Result<f64> {
    Ok(ctx.grid().sobolev_norm(&ctx.equation_defect(w)?, 1.0))
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn assemble(ctx: &OperatorContext, v: &[f64]) -> Vec<f64> {
    let es = ctx.eps().powf(ctx.sigma());
    ctx.w0().iter().zip(v).map(|(w, v)| w + es * v).collect()
}

/// Iterates `V ↦ ℒ_ε⁻¹ℬ_ε⁻¹[R_ε + ε^σ𝒬_ε(V,V) + ε²𝒩_ε(V)]` from `V = 0`
/// until the `H¹` increment drops below `tol`.
pub fn solve_contraction(ctx: &OperatorContext, tol: f64, max_iter: usize) -> Result<WaveSolution> {
    let grid = ctx.grid();
    let eps = ctx.eps();
    let es = eps.powf(ctx.sigma());
    let e2 = eps * eps;

    // ℒ⁻¹ℬ⁻¹R does not change between iterations.
    let base = ctx.l_solve(&ctx.b_eps_inv(&ctx.residual_source()?), None)?;
    let mut v = vec![0.0; grid.n()];
    let mut correction: Option<Vec<f64>> = None;
    let mut first_norm = None;
    let mut increments = Vec::new();

    for iteration in 1..=max_iter {
        let next = if iteration == 1 {
            base.clone()
        } else {
            let q = ctx.q_eps(&v, &v);
            let n = ctx.n_eps(&v)?;
            let source: Vec<f64> = q.iter().zip(&n).map(|(q, n)| es * q + e2 * n).collect();
            let z = ctx.l_solve(&ctx.b_eps_inv(&source), correction.as_deref())?;
            let next = base.iter().zip(&z).map(|(a, b)| a + b).collect();
            correction = Some(z);
            next
        };
        let next = grid.project_even(&next);
        let increment = grid.sobolev_norm(&sub(&next, &v), 1.0);
        let norm = grid.sobolev_norm(&next, 1.0);
        let bound = DIVERGENCE_FACTOR * *first_norm.get_or_insert(norm);
        if !(norm <= bound) {
            return Err(Error::ContractionFailure { iteration, norm, bound });
        }
        increments.push(increment);
        v = next;
        if increment < tol {
            let w = assemble(ctx, &v);
            return Ok(WaveSolution {
                eps,
                sigma: ctx.sigma(),
                c_eps_sq: ctx.wave_speed_sq(),
                residual_h1: residual(ctx, &w)?,
                w,
                v,
                iterations: iteration,
                method: Method::Contraction,
                increments,
            });
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, increment: increments.last().copied().unwrap_or(f64::NAN) })
}

/// Petviashvili iteration seeded with `W₀`.
pub fn solve_petviashvili(ctx: &OperatorContext, tol: f64, max_iter: usize) -> Result<WaveSolution> {
    solve_petviashvili_from(ctx, ctx.w0(), tol, max_iter)
}

/// `W ↦ S^γ ℬ_ε⁻¹[𝒬_ε(W,W) + ε²𝒫_ε(W)]` with
/// `S = ⟨W, ℬ_εW⟩ / ⟨W, 𝒬_ε(W,W) + ε²𝒫_ε(W)⟩`.
pub fn solve_petviashvili_from(ctx: &OperatorContext, seed: &[f64], tol: f64, max_iter: usize) -> Result<WaveSolution> {
    let grid = ctx.grid();
    let mut w = grid.project_even(seed);
    let scale = grid.sobolev_norm(ctx.w0(), 1.0);
    let mut increments = Vec::new();
    for iteration in 1..=max_iter {
        let nonlinear = ctx.nonlinearity(&w).map_err(|e| Error::OracleFailure { iteration, reason: e.to_string() })?;
        let num = grid.inner(&w, &ctx.b_eps_apply(&w));
        let den = grid.inner(&w, &nonlinear);
        let s = num / den;
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::OracleFailure { iteration, reason: format!("stabilizing factor S = {s:e}") });
        }
        let factor = s.powf(PETVIASHVILI_GAMMA);
        let next: Vec<f64> = grid.project_even(&ctx.b_eps_inv(&nonlinear)).iter().map(|v| factor * v).collect();
        let increment = grid.sobolev_norm(&sub(&next, &w), 1.0);
        if !increment.is_finite() || increment > 1e3 * scale {
            return Err(Error::OracleFailure { iteration, reason: format!("diverged, increment {increment:e}") });
        }
        increments.push(increment);
        w = next;
        if (s - 1.0).abs() < tol && increment < tol {
            let es = ctx.eps().powf(ctx.sigma());
            let v = if es > 0.0 { sub(&w, ctx.w0()).iter().map(|d| d / es).collect() } else { vec![0.0; w.len()] };
            return Ok(WaveSolution {
                eps: ctx.eps(),
                sigma: ctx.sigma(),
                c_eps_sq: ctx.wave_speed_sq(),
                residual_h1: residual(ctx, &w)?,
                w,
                v,
                iterations: iteration,
                method: Method::Petviashvili,
                increments,
            });
        }
    }
    Err(Error::OracleFailure {
        iteration: max_iter,
        reason: format!("no convergence, last increment {:e}", increments.last().copied().unwrap_or(f64::NAN)),
    })
}

/// One ε of a sweep; `error` is set when the solve failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub diff_h1: f64,
    pub residual: f64,
    pub iterations: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub sigma: f64,
    pub rows: Vec<SweepRow>,
    /// Log-log slope of `‖W_ε − W₀‖_{H¹}` over the successful rows.
    pub slope: Option<f64>,
}

/// Shared inputs for repeated solves at different ε.
#[derive(Debug, Clone)]
pub struct SweepSetup<'a> {
    pub model: &'a LatticeModel,
    pub profile: &'a DispersionProfile,
    pub grid: &'a Grid,
    pub sigma: f64,
    pub options: OperatorOptions,
    pub tol: f64,
    pub max_iter: usize,
}

/// Solves at each ε and fits the decay of `‖W_ε − W₀‖_{H¹}`.
pub fn correction_scaling_sweep(setup: &SweepSetup<'_>, eps_list: &[f64]) -> SweepReport {
    let rows: Vec<SweepRow> = eps_list
        .iter()
        .map(|&eps| {
            let outcome = OperatorContext::with_options(
                setup.model,
                setup.profile,
                setup.grid,
                eps,
                setup.sigma,
                setup.options,
            )
            .and_then(|ctx| {
                let sol = solve_contraction(&ctx, setup.tol, setup.max_iter)?;
                Ok((setup.grid.sobolev_norm(&sub(&sol.w, ctx.w0()), 1.0), sol))
            });
            match outcome {
                Ok((diff, sol)) => SweepRow {
                    eps,
                    diff_h1: diff,
                    residual: sol.residual_h1,
                    iterations: sol.iterations,
                    error: None,
                },
                Err(e) => SweepRow {
                    eps,
                    diff_h1: f64::NAN,
                    residual: f64::NAN,
                    iterations: 0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_none() && r.diff_h1 > 0.0).collect();
    let slope = (ok.len() >= 2).then(|| {
        let xs: Vec<f64> = ok.iter().map(|r| r.eps.ln()).collect();
        let ys: Vec<f64> = ok.iter().map(|r| r.diff_h1.ln()).collect();
        least_squares_slope(&xs, &ys)
    });
    SweepReport { sigma: setup.sigma, rows, slope }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_model, PotentialSpec, DEFAULT_TRUNC_TOL};
    use crate::dispersion::{certify_type1, CertifyGrid};

    fn context(spec: PotentialSpec, eps: f64, n: usize) -> OperatorContext {
        let model = build_model(&spec, DEFAULT_TRUNC_TOL).unwrap();
        let profile = certify_type1(&model, CertifyGrid::default()).unwrap();
        let grid = Grid::new(40.0, n).unwrap();
        OperatorContext::new(&model, &profile, &grid, eps, profile.working_sigma()).unwrap()
    }

    fn nnn(eps: f64) -> OperatorContext {
        context(PotentialSpec::Nnn { g: 1.0, beta1: 1.0, beta2: 0.0, cubic1: 0.0, cubic2: 0.0 }, eps, 1024)
    }

    #[test]
    fn speeds() {
        let ctx = nnn(0.1);
        assert!((wave_speed_sq(&ctx) - (5.0 + 17.0 / 12.0 * 0.01)).abs() < 1e-13);
        assert_eq!(wave_speed_sq(&nnn(0.0)), 5.0);
    }

    #[test]
    fn residual_of_zero_and_w0() {
        let ctx = nnn(0.1);
        assert_eq!(residual(&ctx, &vec![0.0; 1024]).unwrap(), 0.0);
        assert!(residual(&ctx, ctx.w0()).unwrap() > 1e-6);
    }

    #[test]
    fn contraction_and_petviashvili_agree() {
        let ctx = nnn(0.1);
        let c = solve_contraction(&ctx, 1e-12, 200).unwrap();
        assert!(c.residual_h1 < 1e-8, "contraction residual {:e}", c.residual_h1);
        let p = solve_petviashvili(&ctx, 1e-12, 2000).unwrap();
        assert!(p.residual_h1 < 1e-8, "petviashvili residual {:e}", p.residual_h1);
        let diff = ctx.grid().sobolev_norm(&sub(&c.w, &p.w), 1.0);
        assert!(diff < 1e-6, "{diff:e}");
        assert!(ctx.grid().parity_defect(&c.w) < 1e-10);
        // W = W₀ + ε^σ V at grid points.
        let rebuilt = assemble(&ctx, &c.v);
        assert!(rebuilt.iter().zip(&c.w).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn petviashvili_recovers_kdv_soliton() {
        let ctx = nnn(0.0);
        let seed: Vec<f64> = ctx
            .w0()
            .iter()
            .zip(ctx.grid().points())
            .map(|(w, x)| 0.8 * w + 0.05 * (-x * x).exp())
            .collect();
        let sol = solve_petviashvili_from(&ctx, &seed, 1e-13, 2000).unwrap();
        let err = sol.w.iter().zip(ctx.w0()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err:e}");
    }

    #[test]
    fn contraction_needs_positive_eps() {
        assert!(solve_contraction(&nnn(0.0), 1e-12, 10).is_err());
    }
}
