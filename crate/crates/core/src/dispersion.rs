//! Dispersion relation `θ(k)`, phase speed `λ(k) = θ(k)/k²`, and a sampled
//! certificate of the Type I conditions.
//!
//! `λ` is evaluated as `c₀² − D(k)` with `D(k) = Σ α_m m² (1 − sinc²(mk/2))`,
//! where `c₀²` is the exact (untruncated) moment. Small arguments use the
//! series of `1 − sinc²` so that `λ(k) − λ(0)` keeps full relative accuracy.

use realfft::RealFftPlanner;
use serde::{Deserialize, Serialize};

use crate::catalog::{LatticeModel, Moment};
use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 0.5;
const RESEED: usize = 64;

/// `1 − sinc²(x)` for `x ≥ 0`.
pub fn one_minus_sinc_sq(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        sinc_sq_series(x, 2)
    } else {
        let s = x.sin() / x;
        1.0 - s * s
    }
}

/// `1 − sinc²(x) − x²/3`, the quartic-and-higher part.
pub fn sinc_sq_quartic(x: f64) -> f64 {
    if x < SERIES_CUTOFF {
        sinc_sq_series(x, 3)
    } else {
        let s = x.sin() / x;
        1.0 - s * s - x * x / 3.0
    }
}

/// `Σ_{n ≥ first} (−1)^n 2^{2n−1} x^{2n−2} / (2n)!`.
fn sinc_sq_series(x: f64, first: usize) -> f64 {
    let x2 = x * x;
    // term for n: (−1)^n 2^{2n−1} x^{2n−2}/(2n)!
    let mut term = {
        let mut t = 0.5;
        for n in 1..=first {
            t *= 4.0 / ((2 * n - 1) as f64 * (2 * n) as f64);
            if n > 1 {
                t *= x2;
            }
        }
        if first % 2 == 1 { -t } else { t }
    };
    let mut sum = 0.0;
    for n in first..first + 14 {
        sum += term;
        term *= -4.0 * x2 / ((2 * n + 1) as f64 * (2 * n + 2) as f64);
    }
    sum
}

/// Accumulates `Σ_m α_m m² f(x_m, sin x_m)` with `x_m = m k_j / 2` on the
/// uniform grid `k_j = j·dk`. Sines come from a rotation recurrence that is
/// reseeded every [`RESEED`] steps.
fn weighted_table(model: &LatticeModel, dk: f64, n: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for m in 1..=model.range() {
        let weight = model.alpha(m) * (m * m) as f64;
        if weight == 0.0 {
            continue;
        }
        let step = 0.5 * m as f64 * dk;
        let (ds, dc) = step.sin_cos();
        let (mut s, mut c) = (0.0, 1.0);
        for (j, slot) in out.iter_mut().enumerate() {
            if j % RESEED == 0 {
                (s, c) = (j as f64 * step).sin_cos();
            }
            *slot += weight * f(j as f64 * step, s);
            (s, c) = (s * dc + c * ds, c * dc - s * ds);
        }
    }
    out
}

/// `θ(k) = Σ_{m≤M} 4α_m sin²(mk/2)`.
pub fn theta(model: &LatticeModel, k: f64) -> f64 {
    (1..=model.range())
        .map(|m| {
            let s = (0.5 * m as f64 * k).sin();
            4.0 * model.alpha(m) * s * s
        })
        .sum()
}

/// `c₀² = λ(0) = Σ α_m m²` (exact for infinite families).
pub fn c0_sq(model: &LatticeModel) -> f64 {
    model.alpha_moment(2).expect("a > 3 guarantees convergence")
}

/// `λ″(0) = −(1/6) Σ α_m m⁴`.
pub fn lambda_dd0(model: &LatticeModel) -> f64 {
    -model.alpha_moment(4).expect("a > 3 guarantees convergence") / 6.0
}

/// `D(k) = λ(0) − λ(k)`, truncated at the interaction range.
pub fn deficit(model: &LatticeModel, k: f64) -> f64 {
    let k = k.abs();
    (1..=model.range())
        .map(|m| model.alpha(m) * (m * m) as f64 * one_minus_sinc_sq(0.5 * m as f64 * k))
        .sum()
}

/// `λ(k) = Σ α_m m² sinc²(mk/2)`.
pub fn lambda(model: &LatticeModel, k: f64) -> f64 {
    c0_sq(model) - deficit(model, k)
}

/// `T₁(k) = λ(k) − λ(0)`.
pub fn t1(model: &LatticeModel, k: f64) -> f64 {
    -deficit(model, k)
}

/// `T₂(k) = λ(k) − λ(0) − ½λ″(0)k²`, without cancellation.
pub fn t2(model: &LatticeModel, k: f64) -> f64 {
    let k = k.abs();
    let head: f64 = (1..=model.range())
        .map(|m| model.alpha(m) * (m * m) as f64 * sinc_sq_quartic(0.5 * m as f64 * k))
        .sum();
    -head + k * k / 12.0 * quartic_tail(model)
}

/// `Σ_{m>M} α_m m⁴`, the part of `λ″(0)` missed by the truncated sums.
fn quartic_tail(model: &LatticeModel) -> f64 {
    if model.is_finite_range() {
        0.0
    } else {
        model.exact_tail(Moment::Alpha, 4, model.range()).expect("a > 3 guarantees convergence")
    }
}

/// `D(j·dk)` for `j < n`.
pub fn deficit_table(model: &LatticeModel, dk: f64, n: usize) -> Vec<f64> {
    weighted_table(model, dk, n, |x, s| {
        if x < SERIES_CUTOFF {
            sinc_sq_series(x, 2)
        } else {
            1.0 - (s / x) * (s / x)
        }
    })
}

/// `T₂(j·dk)` for `j < n`.
pub fn t2_table(model: &LatticeModel, dk: f64, n: usize) -> Vec<f64> {
    let tail = quartic_tail(model);
    let mut out = weighted_table(model, dk, n, |x, s| {
        if x < SERIES_CUTOFF {
            sinc_sq_series(x, 3)
        } else {
            1.0 - (s / x) * (s / x) - x * x / 3.0
        }
    });
    for (j, v) in out.iter_mut().enumerate() {
        let k = j as f64 * dk;
        *v = -*v + k * k / 12.0 * tail;
    }
    out
}

/// `(k, λ(k))` on `n` uniform points of `[0, k_max]`.
pub fn lambda_curve(model: &LatticeModel, k_max: f64, n: usize) -> Vec<(f64, f64)> {
    let n = n.max(2);
    let dk = k_max / (n - 1) as f64;
    let c0 = c0_sq(model);
    deficit_table(model, dk, n)
        .into_iter()
        .enumerate()
        .map(|(j, d)| (j as f64 * dk, c0 - d))
        .collect()
}

/// Central second difference of `λ` at zero with step `h`.
pub fn lambda_dd0_finite_difference(model: &LatticeModel, h: f64) -> f64 {
    -2.0 * deficit(model, h) / (h * h)
}

/// Recovers `α_1..α_{m_out}` from samples of `θ` at `k_j = 2πj/n`.
pub fn coefficients_from_theta(samples: &[f64], m_out: usize) -> Result<Vec<f64>> {
    let n = samples.len();
    if n < 2 * m_out + 2 {
        return Err(Error::InvalidTarget(format!(
            "{n} samples cannot resolve {m_out} coefficients (need at least {})",
            2 * m_out + 2
        )));
    }
    let scale = samples.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if samples[0].abs() > 1e-10 * scale {
        return Err(Error::InvalidTarget(format!("θ(0) = {:e} is not zero", samples[0])));
    }
    let mut planner = RealFftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut input = samples.to_vec();
    let mut spectrum = fft.make_output_vec();
    fft.process(&mut input, &mut spectrum).map_err(|e| Error::InvalidTarget(e.to_string()))?;
    // Cosine coefficient b_m = (2/n) Σ θ_j cos(m k_j) and α_m = −b_m/2.
    Ok((1..=m_out).map(|m| -spectrum[m].re / n as f64).collect())
}

/// Sampling used by [`certify_type1`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyGrid {
    pub k_max: f64,
    pub n_samples: usize,
}

impl Default for CertifyGrid {
    fn default() -> Self {
        Self { k_max: 4.0 * std::f64::consts::PI, n_samples: 4096 }
    }
}

/// Fitted Hölder-type exponent of `T₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub sigma: f64,
    pub points_used: usize,
    pub analytic: bool,
    pub notes: Vec<String>,
}

const SIGMA_FIT_POINTS: usize = 40;
const K_STAR_CANDIDATES: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
const MU_SAFETY: f64 = 1.2;

/// Least-squares slope of `log|T₂|` against `log k`, minus two, over
/// log-spaced points of `[k_lo, k_hi]`. Clamped to `(0, 2]`.
pub fn estimate_sigma(model: &LatticeModel, k_lo: f64, k_hi: f64) -> Result<SigmaEstimate> {
    if !(k_lo > 0.0 && k_hi > k_lo) {
        return Err(Error::InvalidParameter(format!("sigma fit range [{k_lo}, {k_hi}] is empty")));
    }
    // Per-point floor: truncation error of λ plus rounding in the sums.
    let floor_at = |k: f64| {
        let truncation = model.tails().alpha_m2;
        let rounding = 1e-15 * c0_sq(model).abs().max(1.0) * (k * k).max(1e-12);
        1e4 * (truncation + rounding)
    };
    let mut notes = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut all_tiny = true;
    let ratio = (k_hi / k_lo).ln() / (SIGMA_FIT_POINTS - 1) as f64;
    for i in 0..SIGMA_FIT_POINTS {
        let k = k_lo * (ratio * i as f64).exp();
        let value = t2(model, k).abs();
        if value >= 1e-14 {
            all_tiny = false;
        }
        if value > floor_at(k) {
            xs.push(k.ln());
            ys.push(value.ln());
        }
    }
    if all_tiny {
        notes.push("T₂ vanishes to 1e-14 on the fit range: analytic, σ = 2".into());
        return Ok(SigmaEstimate { sigma: 2.0, points_used: 0, analytic: true, notes });
    }
    if xs.len() < SIGMA_FIT_POINTS {
        notes.push(format!(
            "{} of {SIGMA_FIT_POINTS} fit points dropped below the truncation floor",
            SIGMA_FIT_POINTS - xs.len()
        ));
    }
    if xs.len() < 2 {
        return Err(Error::NotTypeOne("T₂ is below the truncation floor on the whole fit range".into()));
    }
    let slope = least_squares_slope(&xs, &ys);
    let raw = slope - 2.0;
    if raw > 2.0 {
        notes.push(format!("fitted exponent {raw:.3} clamped to 2"));
    }
    let sigma = raw.min(2.0);
    if !(sigma > 0.0) {
        return Err(Error::NotTypeOne(format!("fitted σ = {raw:.4} is not positive")));
    }
    Ok(SigmaEstimate { sigma, points_used: xs.len(), analytic: false, notes })
}

/// Ordinary least-squares slope.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Outcome of each Type I condition on the sampled grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Type1Checks {
    pub bounded_below: bool,
    pub negative_curvature: bool,
    pub local_bounds: bool,
    pub subsonic_outside: bool,
}

/// Sampled dispersion certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionProfile {
    pub c0_sq: f64,
    pub lambda_dd0: f64,
    pub k_star: f64,
    pub mu_star: f64,
    /// Fitted exponent.
    pub sigma: f64,
    pub sup_outside: f64,
    pub lambda_lower: f64,
    pub type1_certified: bool,
    pub checks: Type1Checks,
    pub notes: Vec<String>,
}

impl DispersionProfile {
    /// The fitted σ rounded down to two decimals.
    pub fn working_sigma(&self) -> f64 {
        ((self.sigma * 100.0 + 1e-9).floor() / 100.0).max(0.01)
    }
}

/// Checks the Type I conditions on a sampled grid and fits `σ`, `μ*`, `k*`.
///
/// The bounds hold only at sample points; oscillation between samples is not
/// excluded.
pub fn certify_type1(model: &LatticeModel, grid: CertifyGrid) -> Result<DispersionProfile> {
    if grid.n_samples < 2048 || grid.k_max < 4.0 * std::f64::consts::PI - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "certification grid needs n_samples ≥ 2048 and k_max ≥ 4π, got {} and {}",
            grid.n_samples, grid.k_max
        )));
    }
    let c0 = c0_sq(model);
    let ldd = lambda_dd0(model);
    let mut notes = vec!["bounds verified at sample points only".to_string()];

    let dk = grid.k_max / (grid.n_samples - 1) as f64;
    let curve: Vec<f64> = deficit_table(model, dk, grid.n_samples).into_iter().map(|d| c0 - d).collect();

    // (i) Beyond k_max, |λ(k)| ≤ 4 Σ|α_m| / k² with the sign of the α's.
    let positive: f64 = (1..=model.range()).map(|m| model.alpha(m).max(0.0)).sum();
    let negative: f64 = (1..=model.range()).map(|m| (-model.alpha(m)).max(0.0)).sum();
    let envelope_upper = 4.0 * positive / (grid.k_max * grid.k_max);
    let envelope_lower = -4.0 * negative / (grid.k_max * grid.k_max);
    let grid_min = curve.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_lower = grid_min.min(envelope_lower);
    if negative == 0.0 {
        notes.push("all α_m ≥ 0: λ ≥ 0 everywhere".into());
    }
    let bounded_below = lambda_lower.is_finite();

    // (ii)
    let negative_curvature = ldd < 0.0;
    if !negative_curvature {
        notes.push(format!("λ″(0) = {ldd:e} is not negative"));
    }

    // (iii) and (iv) per candidate k*.
    let mut chosen = None;
    for &k_star in &K_STAR_CANDIDATES {
        let estimate = match estimate_sigma(model, k_star / 200.0, k_star / 2.0) {
            Ok(e) => e,
            Err(e) => {
                notes.push(format!("k* = {k_star}: {e}"));
                continue;
            }
        };
        let (upper, lower) = local_constants(model, k_star, estimate.sigma);
        let mu_star = MU_SAFETY * upper;
        let local_ok = negative_curvature && mu_star <= lower;
        let sup_outside = curve
            .iter()
            .enumerate()
            .filter(|(j, _)| *j as f64 * dk >= k_star)
            .map(|(_, v)| *v)
            .fold(envelope_upper, f64::max);
        let outside_ok = sup_outside < c0;
        if chosen.is_none() || (local_ok && outside_ok) {
            chosen = Some((k_star, mu_star, lower, estimate.clone(), sup_outside, local_ok, outside_ok));
        }
        if local_ok && outside_ok {
            break;
        }
        notes.push(format!(
            "k* = {k_star} rejected: μ* = {mu_star:.4e} vs lower constant {lower:.4e}, sup λ outside = {sup_outside:.6e}"
        ));
    }
    let Some((k_star, mu_star, lower, estimate, sup_outside, local_ok, outside_ok)) = chosen else {
        return Err(Error::NotTypeOne(notes.join("; ")));
    };
    notes.extend(estimate.notes.iter().cloned());
    notes.push(format!("lower constant min (λ(0)−λ(k))/k² on (0, k*] = {lower:.6e}"));

    let checks = Type1Checks {
        bounded_below,
        negative_curvature,
        local_bounds: local_ok,
        subsonic_outside: outside_ok,
    };
    Ok(DispersionProfile {
        c0_sq: c0,
        lambda_dd0: ldd,
        k_star,
        mu_star,
        sigma: estimate.sigma,
        sup_outside,
        lambda_lower,
        type1_certified: bounded_below && negative_curvature && local_ok && outside_ok,
        checks,
        notes,
    })
}

/// `(max |T₂|/k^{2+σ}, min (λ(0)−λ(k))/k²)` over samples of `(0, k*]`.
fn local_constants(model: &LatticeModel, k_star: f64, sigma: f64) -> (f64, f64) {
    let mut upper: f64 = 0.0;
    let mut lower = f64::INFINITY;
    let log_points = 200;
    let lin_points = 200;
    let ks = (0..log_points)
        .map(|i| k_star * 1e-3f64.powf(1.0 - i as f64 / (log_points - 1) as f64))
        .chain((1..=lin_points).map(|i| k_star * i as f64 / lin_points as f64));
    for k in ks {
        upper = upper.max(t2(model, k).abs() / k.powf(2.0 + sigma));
        lower = lower.min(deficit(model, k) / (k * k));
    }
    (upper, lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_model, PotentialSpec, DEFAULT_TRUNC_TOL};
    use std::f64::consts::PI;

    fn cm(a: f64) -> LatticeModel {
        build_model(&PotentialSpec::CalogeroMoser { a }, DEFAULT_TRUNC_TOL).unwrap()
    }

    fn nnn(g: f64) -> LatticeModel {
        build_model(
            &PotentialSpec::Nnn { g, beta1: 1.0, beta2: 0.0, cubic1: 0.0, cubic2: 0.0 },
            DEFAULT_TRUNC_TOL,
        )
        .unwrap()
    }

    #[test]
    fn series_matches_direct() {
        for x in [0.05f64, 0.2, 0.4, 0.49] {
            let s = x.sin() / x;
            assert!((sinc_sq_series(x, 2) - (1.0 - s * s)).abs() < 1e-15);
            assert!((sinc_sq_series(x, 3) - (1.0 - s * s - x * x / 3.0)).abs() < 1e-15);
        }
        // Leading term x⁴·2/45.
        let x = 1e-3f64;
        assert!((sinc_sq_quartic(x) + 2.0 * x.powi(4) / 45.0).abs() < 1e-20);
    }

    #[test]
    fn nnn_values() {
        let model = nnn(1.0);
        assert!((theta(&model, PI) - 4.0).abs() < 1e-14);
        assert_eq!(lambda(&model, 0.0), 5.0);
        assert!((lambda_dd0(&model) + 1.0 / 6.0 + 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn calogero_theta_at_pi() {
        let model = cm(4.0);
        assert!((theta(&model, PI) - PI.powi(6) / 12.0).abs() < 1e-8);
        assert!((c0_sq(&model) - 2.0 * PI.powi(4) / 9.0).abs() < 1e-12);
    }

    #[test]
    fn tables_match_pointwise() {
        let model = cm(3.5);
        let dk = 0.013;
        let d = deficit_table(&model, dk, 300);
        let t = t2_table(&model, dk, 300);
        for j in [0usize, 1, 7, 64, 65, 199, 299] {
            let k = j as f64 * dk;
            assert!((d[j] - deficit(&model, k)).abs() < 1e-12, "deficit j={j}");
            assert!((t[j] - t2(&model, k)).abs() < 1e-12, "t2 j={j}");
        }
    }

    #[test]
    fn t2_consistent_with_lambda() {
        let model = cm(4.0);
        let ldd = lambda_dd0(&model);
        for k in [0.3, 1.0, 2.5] {
            let direct = lambda(&model, k) - lambda(&model, 0.0) - 0.5 * ldd * k * k;
            assert!((direct - t2(&model, k)).abs() < 1e-11);
        }
    }

    #[test]
    fn finite_difference_second_derivative() {
        let model = nnn(0.25);
        let fd = lambda_dd0_finite_difference(&model, 1e-4);
        assert!(((fd - lambda_dd0(&model)) / lambda_dd0(&model)).abs() < 1e-6);
    }

    #[test]
    fn coefficient_recovery_simple() {
        let n = 64;
        let ks: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        let one: Vec<f64> = ks.iter().map(|k| 4.0 * (k / 2.0).sin().powi(2)).collect();
        let alpha = coefficients_from_theta(&one, 8).unwrap();
        assert!((alpha[0] - 1.0).abs() < 1e-14);
        assert!(alpha[1..].iter().all(|a| a.abs() < 1e-14));
        let two: Vec<f64> = ks.iter().map(|k| 1.0 - (2.0 * k).cos()).collect();
        let alpha = coefficients_from_theta(&two, 8).unwrap();
        assert!((alpha[1] - 0.5).abs() < 1e-14 && alpha[0].abs() < 1e-14);
    }

    #[test]
    fn coefficient_recovery_rejects_offset() {
        let samples = vec![1.0; 32];
        assert!(matches!(coefficients_from_theta(&samples, 4), Err(Error::InvalidTarget(_))));
        assert!(coefficients_from_theta(&[0.0; 8], 4).is_err());
    }

    #[test]
    fn sigma_estimates() {
        let s = estimate_sigma(&cm(3.5), 0.0025, 0.25).unwrap().sigma;
        assert!((s - 0.5).abs() < 0.05, "σ = {s}");
        let s = estimate_sigma(&cm(6.0), 0.0025, 0.25).unwrap().sigma;
        assert!((s - 2.0).abs() < 0.1, "σ = {s}");
        let s = estimate_sigma(&nnn(1.0), 0.0025, 0.25).unwrap().sigma;
        assert!((s - 2.0).abs() < 0.05, "σ = {s}");
    }

    #[test]
    fn certify_known_lattices() {
        let p = certify_type1(&nnn(1.0), CertifyGrid::default()).unwrap();
        assert!(p.type1_certified, "{:?}", p.notes);
        assert!((p.sigma - 2.0).abs() < 0.05);
        let p = certify_type1(&cm(3.5), CertifyGrid::default()).unwrap();
        assert!(p.type1_certified, "{:?}", p.notes);
        assert!((p.sigma - 0.5).abs() < 0.05);
        assert!(p.lambda_lower >= 0.0);
    }

    #[test]
    fn nnn_below_threshold_is_not_type_one() {
        // g < −1/16 flips the sign of λ″(0).
        let model = nnn(-0.1);
        let p = certify_type1(&model, CertifyGrid::default());
        match p {
            Ok(p) => assert!(!p.type1_certified),
            Err(e) => assert!(matches!(e, Error::NotTypeOne(_))),
        }
    }

    #[test]
    fn working_sigma_rounds_down() {
        let p = DispersionProfile {
            c0_sq: 1.0,
            lambda_dd0: -1.0,
            k_star: 0.5,
            mu_star: 1.0,
            sigma: 0.987,
            sup_outside: 0.0,
            lambda_lower: 0.0,
            type1_certified: true,
            checks: Type1Checks {
                bounded_below: true,
                negative_curvature: true,
                local_bounds: true,
                subsonic_outside: true,
            },
            notes: vec![],
        };
        assert_eq!(p.working_sigma(), 0.98);
    }
}
