//! Operators of the rescaled travelling-wave equation
//! `ℬ_ε W = 𝒬_ε(W, W) + ε² 𝒫_ε(W)` and of its perturbation form
//! `ℒ_ε V = ℬ_ε⁻¹[R_ε + ε^σ 𝒬_ε(V, V) + ε² 𝒩_ε(V)]` about the KdV soliton
//! `W₀`.
//!
//! All operators act on even grid fields. Bilinear and nonlinear terms are
//! truncated at a nonlinear range `M_q` whose relative tail in `Σ|β_m|m³` and
//! `Σγ_m m⁴` is below [`OperatorOptions::nonlinear_tol`]. `ε = 0` gives the
//! KdV limit (`ℬ₀`, `𝒬₀ = b·VW`, no `𝒫`).

use realfft::num_complex::Complex64;

use crate::catalog::{b_coefficient, LatticeModel, Moment};
use crate::dispersion::{self, DispersionProfile};
use crate::error::{Error, Result};
use crate::krylov::{self, GmresConfig};
use crate::spectral::{sinc, Grid, Spectrum};

/// Multiplier of `𝒜_h`: `sinc(hk/2)`.
pub fn averaging_multiplier(h: f64, k: f64) -> f64 {
    sinc(0.5 * h * k)
}

/// `(sinc(K/2) − 1)/K²` with its series near `K = 0` (limit `−1/24`).
pub fn theta_multiplier(hk: f64) -> f64 {
    if hk.abs() < 1.0 {
        // Σ_{n≥1} (−1)^n K^{2n−2} / (4^n (2n+1)!)
        let k2 = hk * hk;
        let mut term = -1.0 / 24.0;
        let mut sum = 0.0;
        for n in 1..14 {
            sum += term;
            let n = n as f64;
            term *= -k2 / (4.0 * (2.0 * n + 2.0) * (2.0 * n + 3.0));
        }
        sum
    } else {
        (sinc(0.5 * hk) - 1.0) / (hk * hk)
    }
}

/// `𝒜_h F`.
pub fn averaging(grid: &Grid, h: f64, f: &[f64]) -> Vec<f64> {
    grid.apply_multiplier(f, &grid.multiplier_table(|k| averaging_multiplier(h, k)))
        .expect("sinc is finite")
}

/// `Θ_h F`.
pub fn theta_op(grid: &Grid, h: f64, f: &[f64]) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("Θ_h needs h > 0, got {h}")));
    }
    grid.apply_multiplier(f, &grid.multiplier_table(|k| theta_multiplier(h * k)))
}

/// Amplitude of the KdV soliton, `−3λ″(0)/(4b)`.
pub fn kdv_amplitude(lambda_dd0: f64, b: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::DegenerateQuadratic { b, tail: 0.0 });
    }
    Ok(-3.0 * lambda_dd0 / (4.0 * b))
}

/// `A·sech²(x/2)` on the grid.
pub fn sech2_profile(grid: &Grid, amplitude: f64) -> Vec<f64> {
    grid.sample(|x| {
        let c = (0.5 * x).cosh();
        amplitude / (c * c)
    })
}

/// Least range whose relative tails in `Σ|β_m|m³` and `Σγ_m m⁴` are below `tol`.
pub fn nonlinear_range(model: &LatticeModel, tol: f64) -> Result<usize> {
    if model.is_finite_range() {
        return Ok(model.range());
    }
    let beta_total = model.beta_abs_moment(3)?;
    let gamma_total = model.gamma_moment(4)?;
    let mut m = 1;
    while m < model.range() {
        let beta_rel = model.exact_tail(Moment::Beta, 3, m)? / beta_total;
        let gamma_rel = model.exact_tail(Moment::Gamma, 4, m)? / gamma_total;
        if beta_rel < tol && gamma_rel < tol {
            break;
        }
        m += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorOptions {
    /// Zero-pad pointwise products to 3N/2.
    pub dealias: bool,
    /// Relative tail tolerance that fixes `M_q`.
    pub nonlinear_tol: f64,
    pub eps_max: f64,
    pub gmres: GmresConfig,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        Self { dealias: true, nonlinear_tol: 1e-6, eps_max: 0.5, gmres: GmresConfig::default() }
    }
}

/// Everything needed to apply the operators at one `ε`.
#[derive(Debug, Clone)]
pub struct OperatorContext {
    model: LatticeModel,
    profile: DispersionProfile,
    grid: Grid,
    eps: f64,
    sigma: f64,
    options: OperatorOptions,
    lambda_dd0: f64,
    b: f64,
    nonlinear_range: usize,
    b0: Vec<f64>,
    b_eps: Vec<f64>,
    /// `ℬ_ε − ℬ₀ = −ε⁻² T₂(εk)`.
    b_diff: Vec<f64>,
    /// `sinc(εmk/2)` for `m = 1..=M_q`.
    averaging: Vec<Vec<f64>>,
    /// `β_m m³` for `m = 1..=M_q`.
    q_weights: Vec<f64>,
    w0: Vec<f64>,
    /// `𝒜_{εm} W₀` sampled on the product grid.
    w0_averaged: Vec<Vec<f64>>,
}

impl OperatorContext {
    pub fn new(model: &LatticeModel, profile: &DispersionProfile, grid: &Grid, eps: f64, sigma: f64) -> Result<Self> {
        Self::with_options(model, profile, grid, eps, sigma, OperatorOptions::default())
    }

    pub fn with_options(
        model: &LatticeModel,
        profile: &DispersionProfile,
        grid: &Grid,
        eps: f64,
        sigma: f64,
        options: OperatorOptions,
    ) -> Result<Self> {
        if !profile.type1_certified {
            return Err(Error::NotTypeOne("dispersion profile is not certified".into()));
        }
        if !(eps >= 0.0) || eps > options.eps_max {
            return Err(Error::InvalidParameter(format!("ε = {eps} outside [0, {}]", options.eps_max)));
        }
        if !(sigma > 0.0 && sigma <= 2.0) {
            return Err(Error::InvalidParameter(format!("σ = {sigma} outside (0, 2]")));
        }
        let lambda_dd0 = dispersion::lambda_dd0(model);
        if lambda_dd0 >= 0.0 {
            return Err(Error::NotTypeOne(format!("λ″(0) = {lambda_dd0:e} is not negative")));
        }
        let b = b_coefficient(model)?;
        let half_curv = -0.5 * lambda_dd0;
        let modes = grid.modes();
        let b0: Vec<f64> = (0..modes).map(|j| half_curv * (1.0 + grid.k(j).powi(2))).collect();

        let (b_diff, nonlinear_range) = if eps > 0.0 {
            let t2 = dispersion::t2_table(model, eps * grid.k(1), modes);
            let inv = 1.0 / (eps * eps);
            (t2.iter().map(|t| -t * inv).collect(), nonlinear_range(model, options.nonlinear_tol)?)
        } else {
            (vec![0.0; modes], 0)
        };
        let b_eps: Vec<f64> = b0.iter().zip(&b_diff).map(|(a, d)| a + d).collect();

        let min = b_eps.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min >= half_curv * (1.0 - 1e-6)) {
            return Err(Error::Certification { eps, min, bound: half_curv });
        }
        if eps > 0.0 {
            let upper = (profile.c0_sq - profile.lambda_lower) / (eps * eps) + half_curv;
            let max = b_eps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max > upper * (1.0 + 1e-9) {
                return Err(Error::Certification { eps, min: max, bound: upper });
            }
        }

        let averaging: Vec<Vec<f64>> = (1..=nonlinear_range)
            .map(|m| grid.multiplier_table(|k| averaging_multiplier(eps * m as f64, k)))
            .collect();
        let q_weights = (1..=nonlinear_range).map(|m| model.beta(m) * (m as f64).powi(3)).collect();

        let w0 = sech2_profile(grid, kdv_amplitude(lambda_dd0, b)?);
        let mut ctx = Self {
            model: model.clone(),
            profile: profile.clone(),
            grid: grid.clone(),
            eps,
            sigma,
            options,
            lambda_dd0,
            b,
            nonlinear_range,
            b0,
            b_eps,
            b_diff,
            averaging,
            q_weights,
            w0,
            w0_averaged: Vec::new(),
        };
        let w0_hat = ctx.grid.forward(&ctx.w0);
        ctx.w0_averaged = (0..nonlinear_range).map(|i| ctx.to_physical(&ctx.scaled(&w0_hat, i))).collect();
        Ok(ctx)
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn profile(&self) -> &DispersionProfile {
        &self.profile
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn options(&self) -> &OperatorOptions {
        &self.options
    }

    pub fn lambda_dd0(&self) -> f64 {
        self.lambda_dd0
    }

    /// Exact `b = Σ β_m m³`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `M_q`, the number of distances kept in `𝒬_ε` and `𝒫_ε`.
    pub fn nonlinear_range(&self) -> usize {
        self.nonlinear_range
    }

    /// `c_ε² = c₀² − ½λ″(0)ε²`.
    pub fn wave_speed_sq(&self) -> f64 {
        self.profile.c0_sq - 0.5 * self.lambda_dd0 * self.eps * self.eps
    }

    /// The KdV soliton `W₀`.
    pub fn w0(&self) -> &[f64] {
        &self.w0
    }

    /// Multiplier of `ℬ_ε` at the grid wavenumbers.
    pub fn b_eps_multiplier(&self) -> &[f64] {
        &self.b_eps
    }

    fn scaled(&self, c: &[Complex64], i: usize) -> Spectrum {
        c.iter().zip(&self.averaging[i]).map(|(v, w)| v * w).collect()
    }

    fn to_physical(&self, c: &[Complex64]) -> Vec<f64> {
        if self.options.dealias {
            self.grid.padded_inverse(c)
        } else {
            self.grid.inverse(c)
        }
    }

    fn to_spectrum(&self, f: &[f64]) -> Spectrum {
        if self.options.dealias {
            self.grid.padded_forward(f)
        } else {
            self.grid.forward(f)
        }
    }

    fn multiply(&self, f: &[f64], m: &[f64]) -> Vec<f64> {
        self.grid.apply_multiplier(f, m).expect("operator tables are finite")
    }

    pub fn b_eps_apply(&self, f: &[f64]) -> Vec<f64> {
        self.multiply(f, &self.b_eps)
    }

    pub fn b_eps_inv(&self, f: &[f64]) -> Vec<f64> {
        let inv: Vec<f64> = self.b_eps.iter().map(|v| 1.0 / v).collect();
        self.multiply(f, &inv)
    }

    pub fn b0_apply(&self, f: &[f64]) -> Vec<f64> {
        self.multiply(f, &self.b0)
    }

    pub fn b0_inv(&self, f: &[f64]) -> Vec<f64> {
        let inv: Vec<f64> = self.b0.iter().map(|v| 1.0 / v).collect();
        self.multiply(f, &inv)
    }

    /// `(ℬ_ε − ℬ₀)F` from `T₂` directly.
    pub fn b_diff_apply(&self, f: &[f64]) -> Vec<f64> {
        self.multiply(f, &self.b_diff)
    }

    /// `(ℬ_ε⁻¹ − ℬ₀⁻¹)F` with multiplier `−(ℬ_ε − ℬ₀)/(ℬ_ε ℬ₀)`.
    pub fn b_inv_diff_apply(&self, f: &[f64]) -> Vec<f64> {
        let m: Vec<f64> = self
            .b_diff
            .iter()
            .zip(self.b_eps.iter().zip(&self.b0))
            .map(|(d, (be, b0))| -d / (be * b0))
            .collect();
        self.multiply(f, &m)
    }

    fn q_spectrum(&self, v_hat: &[Complex64], w_hat: &[Complex64], same: bool) -> Spectrum {
        if self.eps == 0.0 {
            return self.q0_spectrum(v_hat, w_hat);
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.modes()];
        for i in 0..self.nonlinear_range {
            let va = self.to_physical(&self.scaled(v_hat, i));
            let prod: Vec<f64> = if same {
                va.iter().map(|x| x * x).collect()
            } else {
                let wa = self.to_physical(&self.scaled(w_hat, i));
                va.iter().zip(&wa).map(|(x, y)| x * y).collect()
            };
            self.accumulate(&mut acc, &prod, i, self.q_weights[i]);
        }
        acc
    }

    /// `acc += weight · 𝒜_{εm}[prod]` for the `i`-th distance.
    fn accumulate(&self, acc: &mut [Complex64], prod: &[f64], i: usize, weight: f64) {
        let spec = self.to_spectrum(prod);
        for ((a, s), w) in acc.iter_mut().zip(&spec).zip(&self.averaging[i]) {
            *a += s * (w * weight);
        }
    }

    fn q0_spectrum(&self, v_hat: &[Complex64], w_hat: &[Complex64]) -> Spectrum {
        let mut c = self.grid.product_spectrum(v_hat, w_hat, self.options.dealias);
        c.iter_mut().for_each(|v| *v *= self.b);
        c
    }

    /// `𝒬_ε(V, W) = Σ β_m m³ 𝒜_{εm}[(𝒜_{εm}V)(𝒜_{εm}W)]`.
    pub fn q_eps(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        let same = v == w;
        let v_hat = self.grid.forward(v);
        let w_hat = if same { v_hat.clone() } else { self.grid.forward(w) };
        self.grid.inverse(&self.q_spectrum(&v_hat, &w_hat, same))
    }

    /// `𝒬₀(V, W) = b·VW`.
    pub fn q0(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        self.grid.inverse(&self.q0_spectrum(&self.grid.forward(v), &self.grid.forward(w)))
    }

    /// `(𝒬_ε − 𝒬₀)(V, W)`.
    pub fn q_diff(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        let same = v == w;
        let v_hat = self.grid.forward(v);
        let w_hat = if same { v_hat.clone() } else { self.grid.forward(w) };
        let q = self.q_spectrum(&v_hat, &w_hat, same);
        let q0 = self.q0_spectrum(&v_hat, &w_hat);
        let diff: Spectrum = q.iter().zip(&q0).map(|(a, b)| a - b).collect();
        self.grid.inverse(&diff)
    }

    /// `𝒬_ε(W₀, V)` using the cached averages of `W₀`.
    pub fn q_with_profile(&self, v: &[f64]) -> Vec<f64> {
        let v_hat = self.grid.forward(v);
        if self.eps == 0.0 {
            return self.grid.inverse(&self.q0_spectrum(&self.grid.forward(&self.w0), &v_hat));
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.modes()];
        for i in 0..self.nonlinear_range {
            let va = self.to_physical(&self.scaled(&v_hat, i));
            let prod: Vec<f64> = va.iter().zip(&self.w0_averaged[i]).map(|(x, y)| x * y).collect();
            self.accumulate(&mut acc, &prod, i, self.q_weights[i]);
        }
        self.grid.inverse(&acc)
    }

    /// `𝒫_ε(W) = ε⁻⁶ Σ m 𝒜_{εm}[Ψ′_m(mε² 𝒜_{εm}W)]`.
    pub fn p_eps(&self, w: &[f64]) -> Result<Vec<f64>> {
        if self.eps == 0.0 {
            return Err(Error::InvalidParameter("𝒫_ε is only defined for ε > 0".into()));
        }
        let e2 = self.eps * self.eps;
        let inv6 = 1.0 / (e2 * e2 * e2);
        let w_hat = self.grid.forward(w);
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.modes()];
        for i in 0..self.nonlinear_range {
            let m = i + 1;
            let mf = m as f64;
            let wa = self.to_physical(&self.scaled(&w_hat, i));
            let mut values = Vec::with_capacity(wa.len());
            for v in &wa {
                values.push(self.model.psi_prime(m, mf * e2 * v)?);
            }
            self.accumulate(&mut acc, &values, i, mf * inv6);
        }
        Ok(self.grid.inverse(&acc))
    }

    /// `R_ε = ε^{−σ}[−(ℬ_ε − ℬ₀)W₀ + (𝒬_ε − 𝒬₀)(W₀, W₀) + ε²𝒫_ε(W₀)]`.
    pub fn residual_source(&self) -> Result<Vec<f64>> {
        self.require_positive_eps("R_ε")?;
        let bd = self.b_diff_apply(&self.w0);
        let qd = self.q_diff(&self.w0, &self.w0);
        let p = self.p_eps(&self.w0)?;
        let e2 = self.eps * self.eps;
        let scale = self.eps.powf(-self.sigma);
        let source: Vec<f64> = bd.iter().zip(&qd).zip(&p).map(|((b, q), p)| scale * (-b + q + e2 * p)).collect();
        // The k² growth of ℬ_ε − ℬ₀ and ε^{−σ} amplify odd FFT roundoff.
        Ok(self.grid.project_even(&source))
    }

    /// `R_ε` from the unrearranged form `−ℬ_εW₀ + 𝒬_ε(W₀,W₀) + ε²𝒫_ε(W₀)`.
    pub fn residual_source_direct(&self) -> Result<Vec<f64>> {
        self.require_positive_eps("R_ε")?;
        let bw = self.b_eps_apply(&self.w0);
        let q = self.q_eps(&self.w0, &self.w0);
        let p = self.p_eps(&self.w0)?;
        let e2 = self.eps * self.eps;
        let scale = self.eps.powf(-self.sigma);
        Ok(bw.iter().zip(&q).zip(&p).map(|((b, q), p)| scale * (-b + q + e2 * p)).collect())
    }

    /// `𝒩_ε(V) = ε^{−σ}[𝒫_ε(W₀ + ε^σ V) − 𝒫_ε(W₀)]`.
    pub fn n_eps(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.require_positive_eps("𝒩_ε")?;
        let es = self.eps.powf(self.sigma);
        let shifted: Vec<f64> = self.w0.iter().zip(v).map(|(w, v)| w + es * v).collect();
        let p1 = self.p_eps(&shifted)?;
        let p0 = self.p_eps(&self.w0)?;
        Ok(p1.iter().zip(&p0).map(|(a, b)| (a - b) / es).collect())
    }

    fn require_positive_eps(&self, what: &str) -> Result<()> {
        if self.eps > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{what} is only defined for ε > 0")))
        }
    }

    /// `ℒ_ε V = V − 2ℬ_ε⁻¹ 𝒬_ε(W₀, V)`.
    pub fn l_apply(&self, v: &[f64]) -> Vec<f64> {
        let q = self.q_with_profile(v);
        let bq = self.b_eps_inv(&q);
        v.iter().zip(&bq).map(|(a, b)| a - 2.0 * b).collect()
    }

    /// Solves `ℒ_ε V = F` on the even subspace by GMRES, falling back to a
    /// dense solve if the Krylov iteration stagnates.
    pub fn l_solve(&self, f: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        let rhs = self.grid.project_even(f);
        let apply = |x: &[f64]| Ok(self.grid.project_even(&self.l_apply(x)));
        match krylov::gmres(apply, &rhs, guess, self.options.gmres) {
            Ok(out) => Ok(self.grid.project_even(&out.x)),
            Err(Error::SolverFailure { iterations, residual }) if self.grid.n() <= 4096 => {
                let x = krylov::dense_even_solve(apply, &rhs)?;
                let r = apply(&x)?;
                let rel = r.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
                    / rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
                if rel <= self.options.gmres.rtol * 10.0 {
                    Ok(x)
                } else {
                    Err(Error::SolverFailure { iterations, residual: residual.min(rel) })
                }
            }
            Err(e) => Err(e),
        }
    }

    /// `ℬ_εW − 𝒬_ε(W, W) − ε²𝒫_ε(W)`.
    pub fn equation_defect(&self, w: &[f64]) -> Result<Vec<f64>> {
        let bw = self.b_eps_apply(w);
        let q = self.q_eps(w, w);
        if self.eps == 0.0 {
            return Ok(bw.iter().zip(&q).map(|(a, b)| a - b).collect());
        }
        let p = self.p_eps(w)?;
        let e2 = self.eps * self.eps;
        Ok(bw.iter().zip(&q).zip(&p).map(|((b, q), p)| b - q - e2 * p).collect())
    }

    /// The nonlinearity `𝒬_ε(W, W) + ε²𝒫_ε(W)`.
    pub fn nonlinearity(&self, w: &[f64]) -> Result<Vec<f64>> {
        let q = self.q_eps(w, w);
        if self.eps == 0.0 {
            return Ok(q);
        }
        let p = self.p_eps(w)?;
        let e2 = self.eps * self.eps;
        Ok(q.iter().zip(&p).map(|(q, p)| q + e2 * p).collect())
    }
}
