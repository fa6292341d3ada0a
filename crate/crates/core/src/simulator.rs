//! Direct integration of the periodic lattice `ü_j = Σ_m Φ′_m(u_{j+m} − u_j) − Φ′_m(u_j − u_{j−m})`
//! started from a computed travelling wave, and measurement of its speed,
//! shape and energy.

use realfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog::{binomial_series, LatticeModel, SERIES_SWITCH};
use crate::error::{Error, Result};
use crate::solver::WaveSolution;
use crate::spectral::Grid;

/// Default cap on the force range.
pub const DEFAULT_FORCE_RANGE: usize = 128;
const SERIES_TERMS: usize = 10;

/// Force and pair energy for one interaction distance.
#[derive(Debug, Clone)]
struct PairLaw {
    m: usize,
    /// `|η| ≤ limit` is the admissible strain.
    limit: f64,
    /// Below this `|η|` the Horner tables are used.
    series_limit: f64,
    /// Bound on the ratio of consecutive series coefficients.
    growth: f64,
    /// Coefficients of `η^1..η^10` in `Φ′_m − ς_m`.
    force: [f64; SERIES_TERMS],
    /// Coefficients of `η^2..η^11` in the pair energy.
    energy: [f64; SERIES_TERMS],
}

impl PairLaw {
    fn new(model: &LatticeModel, m: usize) -> Self {
        let mf = m as f64;
        let mut force = [0.0; SERIES_TERMS];
        let mut energy = [0.0; SERIES_TERMS];
        let growth;
        let series_limit = match model.calogero_exponent() {
            Some(a) => {
                // Coefficient of η^k: prefactor · C(e, k) · m^{−k}.
                let fill = |out: &mut [f64; SERIES_TERMS], exponent: f64, start: usize, prefactor: f64| {
                    for (i, slot) in out.iter_mut().enumerate() {
                        let k = start + i;
                        let c = binomial_series(exponent, 1.0, k, 1);
                        *slot = prefactor * c * mf.powi(-(k as i32));
                    }
                };
                fill(&mut force, -a - 1.0, 1, -a * mf.powf(-a - 1.0));
                fill(&mut energy, -a, 2, mf.powf(-a));
                // |C(e, k+1)/C(e, k)| ≤ (|e| + k)/(k + 1) ≤ |e| + 1 for k ≥ 1.
                growth = (a + 2.0) / mf;
                SERIES_SWITCH * mf
            }
            None => {
                // Polynomial laws are exact in the tables.
                force[0] = model.alpha(m);
                force[1] = model.beta(m);
                force[2] = model.force_term(m, 1.0) - model.alpha(m) - model.beta(m);
                energy[0] = 0.5 * force[0];
                energy[1] = force[1] / 3.0;
                energy[2] = 0.25 * force[2];
                growth = f64::INFINITY;
                f64::INFINITY
            }
        };
        Self { m, limit: model.delta_star() * mf, series_limit, growth, force, energy }
    }

    /// Horner length that keeps the dropped terms below rounding for `|η| ≤ widest`.
    fn terms_for(&self, widest: f64) -> usize {
        if self.growth.is_infinite() {
            return 3;
        }
        let ratio = widest * self.growth;
        if ratio <= 0.0 {
            return 1;
        }
        if ratio >= 1.0 {
            return SERIES_TERMS;
        }
        let needed = (f64::EPSILON.ln() - 2.0) / ratio.ln();
        (needed.ceil() as usize).clamp(1, SERIES_TERMS)
    }

    #[inline]
    fn horner(coeffs: &[f64; SERIES_TERMS], eta: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * eta + c)
    }

    #[inline]
    fn force(&self, model: &LatticeModel, eta: f64) -> f64 {
        if eta.abs() < self.series_limit {
            eta * Self::horner(&self.force, eta)
        } else {
            model.force_term(self.m, eta)
        }
    }

    #[inline]
    fn energy(&self, model: &LatticeModel, eta: f64) -> f64 {
        if eta.abs() < self.series_limit {
            eta * eta * Self::horner(&self.energy, eta)
        } else {
            model.pair_energy(self.m, eta)
        }
    }
}

/// `p ← p · Σ_{k<K} c_k p^k` in place; the extra coefficients are zero or negligible.
fn scale_by_series<const K: usize>(values: &mut [f64], coeffs: &[f64; SERIES_TERMS]) {
    let c: [f64; K] = std::array::from_fn(|i| coeffs[i]);
    for p in values.iter_mut() {
        let x = *p;
        let mut acc = c[K - 1];
        for k in (0..K - 1).rev() {
            acc = acc * x + c[k];
        }
        *p = x * acc;
    }
}

/// Periodic lattice of `J` sites with interactions up to `M_f`.
#[derive(Debug, Clone)]
pub struct Lattice {
    model: LatticeModel,
    sites: usize,
    laws: Vec<PairLaw>,
}

impl Lattice {
    /// `force_range` defaults to `min(M, 128)` and is capped at `J/2 − 1`.
    pub fn new(model: &LatticeModel, sites: usize, force_range: Option<usize>) -> Result<Self> {
        if sites < 4 {
            return Err(Error::InvalidParameter(format!("lattice needs at least 4 sites, got {sites}")));
        }
        let range = force_range
            .unwrap_or(DEFAULT_FORCE_RANGE)
            .min(model.range())
            .min(sites / 2 - 1)
            .max(1);
        let laws = (1..=range).map(|m| PairLaw::new(model, m)).collect();
        Ok(Self { model: model.clone(), sites, laws })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn force_range(&self) -> usize {
        self.laws.len()
    }

    fn check(&self, law: &PairLaw, site: usize, eta: f64) -> Result<()> {
        if eta.abs() > law.limit || !eta.is_finite() {
            return Err(Error::StrainDomain { site, m: law.m, eta });
        }
        Ok(())
    }

    /// `F_j = Σ_m [g_m(d_{j+m} − d_j) − g_m(d_j − d_{j−m})]`, `g_m = Φ′_m − ς_m`.
    pub fn force(&self, d: &[f64]) -> Result<Vec<f64>> {
        let n = self.sites;
        let mut out = vec![0.0; n];
        let mut pair = vec![0.0; n];
        for law in &self.laws {
            let m = law.m;
            let (head, tail) = d.split_at(m);
            let shifted = tail.iter().chain(head);
            let mut widest: f64 = 0.0;
            for ((p, dj), dm) in pair.iter_mut().zip(d).zip(shifted) {
                *p = dm - dj;
                widest = widest.max(p.abs());
            }
            if !(widest <= law.limit) {
                self.check_law(law, d)?;
            }
            if widest < law.series_limit {
                match law.terms_for(widest) {
                    1..=4 => scale_by_series::<4>(&mut pair, &law.force),
                    5..=6 => scale_by_series::<6>(&mut pair, &law.force),
                    7..=8 => scale_by_series::<8>(&mut pair, &law.force),
                    _ => scale_by_series::<SERIES_TERMS>(&mut pair, &law.force),
                }
            } else {
                for p in pair.iter_mut() {
                    *p = law.force(&self.model, *p);
                }
            }
            let (wrapped, direct) = out.split_at_mut(m);
            for ((o, p), q) in wrapped.iter_mut().zip(&pair[..m]).zip(&pair[n - m..]) {
                *o += p - q;
            }
            for ((o, p), q) in direct.iter_mut().zip(&pair[m..]).zip(&pair[..n - m]) {
                *o += p - q;
            }
        }
        Ok(out)
    }

    /// Pair energy `Σ_j Σ_m [Φ_m(r*m + η) − Φ_m(r*m) − ς_m η]`. The `ς_m η`
    /// terms sum to zero on a periodic lattice.
    pub fn potential_energy(&self, d: &[f64]) -> f64 {
        let n = self.sites;
        let mut total = 0.0;
        for law in &self.laws {
            let (head, tail) = d.split_at(law.m);
            total += tail
                .iter()
                .chain(head)
                .zip(d)
                .map(|(dm, dj)| law.energy(&self.model, dm - dj))
                .sum::<f64>();
        }
        let _ = n;
        total
    }

    pub fn total_energy(&self, state: &LatticeState) -> f64 {
        0.5 * state.v.iter().map(|v| v * v).sum::<f64>() + self.potential_energy(&state.d)
    }

    fn check_law(&self, law: &PairLaw, d: &[f64]) -> Result<()> {
        let n = self.sites;
        (0..n).try_for_each(|j| self.check(law, j, d[(j + law.m) % n] - d[j]))
    }

    /// Checks `|d_{j+m} − d_j| ≤ mδ*` for every used `m`.
    pub fn check_domain(&self, d: &[f64]) -> Result<()> {
        self.laws.iter().try_for_each(|law| self.check_law(law, d))
    }

    pub fn state(&self, d: Vec<f64>, v: Vec<f64>) -> Result<LatticeState> {
        let force = self.force(&d)?;
        Ok(LatticeState { d, v, t: 0.0, force })
    }

    /// One velocity-Verlet step.
    pub fn step(&self, state: &mut LatticeState, dt: f64) -> Result<()> {
        let half = 0.5 * dt;
        for (v, f) in state.v.iter_mut().zip(&state.force) {
            *v += half * f;
        }
        for (d, v) in state.d.iter_mut().zip(&state.v) {
            *d += dt * v;
        }
        state.force = self.force(&state.d)?;
        for (v, f) in state.v.iter_mut().zip(&state.force) {
            *v += half * f;
        }
        state.t += dt;
        Ok(())
    }
}

/// Displacements `d_j = u_j − r*j`, velocities and the cached force.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub d: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    pub force: Vec<f64>,
}

impl LatticeState {
    /// `r_j = d_{j+1} − d_j`.
    pub fn strain(&self) -> Vec<f64> {
        let n = self.d.len();
        (0..n).map(|j| self.d[(j + 1) % n] - self.d[j]).collect()
    }
}

/// Band-limited interpolants of `W` and of `U = ∫₀ˣ W` on `[−L, L]`.
#[derive(Debug, Clone)]
pub struct WaveInterpolant {
    half_length: f64,
    /// Coefficients of `W` in `Σ c_j e^{i k_j (x + L)}`.
    w: Vec<Complex64>,
    /// Same for the periodic part of `U`.
    u: Vec<Complex64>,
    mean: f64,
    u_offset: f64,
}

impl WaveInterpolant {
    pub fn new(grid: &Grid, w: &[f64]) -> Self {
        let mut coeffs = grid.forward(w);
        let nyq = grid.n() / 2;
        coeffs[nyq] = Complex64::new(0.0, 0.0);
        let mean = coeffs[0].re;
        let mut u: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| if j == 0 { Complex64::new(0.0, 0.0) } else { c / Complex64::new(0.0, grid.k(j)) })
            .collect();
        u[nyq] = Complex64::new(0.0, 0.0);
        let mut interp = Self { half_length: grid.half_length(), w: coeffs, u, mean, u_offset: 0.0 };
        interp.u_offset = -interp.periodic_u(0.0);
        interp
    }

    fn series(coeffs: &[Complex64], phase: f64) -> f64 {
        // Σ_j w_j Re(c_j e^{i j θ}) with weight 2 off the mean mode.
        let (s, c) = phase.sin_cos();
        let step = Complex64::new(c, s);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut total = 0.0;
        for (j, coeff) in coeffs.iter().enumerate() {
            let weight = if j == 0 { 1.0 } else { 2.0 };
            total += weight * (coeff * rot).re;
            rot *= step;
            if j % 64 == 63 {
                let (s, c) = (phase * (j + 1) as f64).sin_cos();
                rot = Complex64::new(c, s);
            }
        }
        total
    }

    fn phase(&self, x: f64) -> f64 {
        std::f64::consts::PI * (x + self.half_length) / self.half_length
    }

    fn periodic_u(&self, x: f64) -> f64 {
        Self::series(&self.u, self.phase(x))
    }

    /// `W(x)`, zero outside `[−L, L]`.
    pub fn w(&self, x: f64) -> f64 {
        if x.abs() > self.half_length {
            0.0
        } else {
            Self::series(&self.w, self.phase(x))
        }
    }

    /// `U(x) = ∫₀ˣ W`, constant outside `[−L, L]`.
    pub fn u(&self, x: f64) -> f64 {
        let x = x.clamp(-self.half_length, self.half_length);
        self.mean * x + self.periodic_u(x) + self.u_offset
    }

    /// `∫ W` over the period.
    pub fn integral(&self) -> f64 {
        2.0 * self.half_length * self.mean
    }
}

/// `y ∈ [−J/2, J/2)` congruent to `j − center` modulo `J`.
fn wrapped_offset(j: f64, center: f64, sites: usize) -> f64 {
    let n = sites as f64;
    (j - center + 0.5 * n).rem_euclid(n) - 0.5 * n
}

/// Displacements of the wave profile centred at `center`, with the kink
/// closed by a linear ramp whose seam sits opposite the wave.
fn wave_displacements(interp: &WaveInterpolant, eps: f64, sites: usize, center: f64) -> Vec<f64> {
    let jump = eps * interp.integral();
    (0..sites)
        .map(|j| {
            let y = wrapped_offset(j as f64, center, sites);
            eps * interp.u(eps * y) - jump * y / sites as f64
        })
        .collect()
}

/// Lattice data `d_j = εU_ε(εy_j) − Δ y_j/J`, `v_j = −ε²c_ε W_ε(εy_j)` with
/// `y_j` the offset from `center`.
pub fn init_from_wave(
    lattice: &Lattice,
    sol: &WaveSolution,
    grid: &Grid,
    center: f64,
) -> Result<LatticeState> {
    let sites = lattice.sites();
    if sol.eps == 0.0 {
        return lattice.state(vec![0.0; sites], vec![0.0; sites]);
    }
    if sol.eps * (sites as f64) < 4.0 * grid.half_length() {
        return Err(Error::InvalidParameter(format!(
            "εJ = {} must be at least 4L = {}",
            sol.eps * sites as f64,
            4.0 * grid.half_length()
        )));
    }
    let interp = WaveInterpolant::new(grid, &sol.w);
    let eps = sol.eps;
    let speed = sol.c_eps_sq.sqrt();
    let d = wave_displacements(&interp, eps, sites, center);
    let v = (0..sites)
        .map(|j| -eps * eps * speed * interp.w(eps * wrapped_offset(j as f64, center, sites)))
        .collect();
    lattice.check_domain(&d)?;
    lattice.state(d, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub sites: usize,
    pub t_final: f64,
    /// Defaults to `0.05/c₀`.
    pub dt: Option<f64>,
    pub force_range: Option<usize>,
    pub checkpoint_every: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { sites: 4096, t_final: 200.0, dt: None, force_range: None, checkpoint_every: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    pub position: f64,
    pub peak: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub eps: f64,
    pub sites: usize,
    pub force_range: usize,
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
    pub expected_speed: f64,
    pub measured_speed: f64,
    pub speed_error: f64,
    pub shape_error: f64,
    pub energy_drift: f64,
    pub early_stop: bool,
    pub passed: bool,
    pub trajectory: Vec<Checkpoint>,
}

pub const SPEED_TOLERANCE: f64 = 0.01;
pub const SHAPE_TOLERANCE: f64 = 0.05;
pub const ENERGY_TOLERANCE: f64 = 1e-6;

/// Extremum of `r` with the sign of `sign`, refined by a three-point
/// parabola. Positions refer to bond centres `j + ½`.
fn locate_peak(strain: &[f64], sign: f64) -> (f64, f64) {
    let n = strain.len();
    let (mut best, mut best_val) = (0, f64::NEG_INFINITY);
    for (j, r) in strain.iter().enumerate() {
        if sign * r > best_val {
            best = j;
            best_val = sign * r;
        }
    }
    let left = strain[(best + n - 1) % n];
    let mid = strain[best];
    let right = strain[(best + 1) % n];
    let curvature = left - 2.0 * mid + right;
    let offset = if curvature != 0.0 { 0.5 * (left - right) / curvature } else { 0.0 };
    let peak = mid - 0.25 * (left - right) * offset;
    (best as f64 + 0.5 + offset, peak)
}

fn relative_distance(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Integrates from the travelling-wave data and compares with translation
/// at speed `c_ε`.
pub fn run_and_verify(
    model: &LatticeModel,
    sol: &WaveSolution,
    grid: &Grid,
    config: SimulationConfig,
) -> Result<VerificationReport> {
    run_and_verify_at(model, sol, grid, config, config.sites as f64 / 4.0)
}

/// [`run_and_verify`] with an explicit initial centre.
pub fn run_and_verify_at(
    model: &LatticeModel,
    sol: &WaveSolution,
    grid: &Grid,
    config: SimulationConfig,
    center: f64,
) -> Result<VerificationReport> {
    if !(config.t_final > 0.0) || !(config.checkpoint_every > 0.0) {
        return Err(Error::InvalidParameter("t_final and checkpoint_every must be positive".into()));
    }
    if sol.eps <= 0.0 {
        return Err(Error::InvalidParameter("dynamic verification needs ε > 0".into()));
    }
    let lattice = Lattice::new(model, config.sites, config.force_range)?;
    let c0 = crate::dispersion::c0_sq(model).sqrt();
    let dt = config.dt.unwrap_or(0.05 / c0);
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
    }
    let sites = config.sites;
    let mut state = init_from_wave(&lattice, sol, grid, center)?;
    let interp = WaveInterpolant::new(grid, &sol.w);
    let eps = sol.eps;
    let sign = if sol.w.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };

    let e0 = lattice.total_energy(&state);
    let (p0, peak0) = locate_peak(&state.strain(), sign);
    let mut trajectory = vec![Checkpoint { t: 0.0, position: p0, peak: peak0, energy: e0 }];
    let mut unwrapped = p0;
    let mut last_raw = p0;
    let mut shape_error: f64 = 0.0;
    let mut energy_drift: f64 = 0.0;
    // Stop once the profile support (half-width L/ε) nears the seam.
    let travel_limit = 0.5 * sites as f64 - grid.half_length() / eps - 2.0 * lattice.force_range() as f64;
    let steps_per_checkpoint = (config.checkpoint_every / dt).round().max(1.0) as usize;
    let total_steps = (config.t_final / dt).round() as usize;
    let mut steps = 0;
    let mut early_stop = false;

    while steps < total_steps {
        let batch = steps_per_checkpoint.min(total_steps - steps);
        for _ in 0..batch {
            lattice.step(&mut state, dt)?;
        }
        steps += batch;
        let strain = state.strain();
        let (raw, peak) = locate_peak(&strain, sign);
        let mut delta = raw - last_raw;
        delta -= (delta / sites as f64).round() * sites as f64;
        unwrapped += delta;
        last_raw = raw;
        let energy = lattice.total_energy(&state);
        energy_drift = energy_drift.max(((energy - e0) / e0).abs());

        let shifted = center + (unwrapped - p0);
        let expected_d = wave_displacements(&interp, eps, sites, shifted);
        let expected: Vec<f64> = (0..sites).map(|j| expected_d[(j + 1) % sites] - expected_d[j]).collect();
        shape_error = shape_error.max(relative_distance(&strain, &expected));

        trajectory.push(Checkpoint { t: state.t, position: unwrapped, peak, energy });
        if unwrapped - p0 > travel_limit {
            early_stop = true;
            break;
        }
    }

    let ts: Vec<f64> = trajectory.iter().map(|c| c.t).collect();
    let ps: Vec<f64> = trajectory.iter().map(|c| c.position).collect();
    let measured_speed = crate::dispersion::least_squares_slope(&ts, &ps);
    let expected_speed = sol.c_eps_sq.sqrt();
    let speed_error = ((measured_speed - expected_speed) / expected_speed).abs();
    Ok(VerificationReport {
        eps,
        sites,
        force_range: lattice.force_range(),
        dt,
        steps,
        t_final: state.t,
        expected_speed,
        measured_speed,
        speed_error,
        shape_error,
        energy_drift,
        early_stop,
        passed: !early_stop
            && speed_error < SPEED_TOLERANCE
            && shape_error <= SHAPE_TOLERANCE
            && energy_drift <= ENERGY_TOLERANCE,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_model, PotentialSpec, DEFAULT_TRUNC_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cm4() -> LatticeModel {
        build_model(&PotentialSpec::CalogeroMoser { a: 4.0 }, DEFAULT_TRUNC_TOL).unwrap()
    }

    fn bumpy(sites: usize, seed: u64, size: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..sites).map(|_| rng.gen_range(-size..size)).collect()
    }

    #[test]
    fn equilibrium_and_translation_have_no_force() {
        let lattice = Lattice::new(&cm4(), 256, Some(30)).unwrap();
        assert!(lattice.force(&vec![0.0; 256]).unwrap().iter().all(|f| *f == 0.0));
        assert!(lattice.force(&vec![0.37; 256]).unwrap().iter().all(|f| *f == 0.0));
        let state = lattice.state(vec![0.0; 256], vec![0.0; 256]).unwrap();
        assert_eq!(lattice.total_energy(&state), 0.0);
    }

    #[test]
    fn single_site_force_matches_raw_potential() {
        let model = cm4();
        let lattice = Lattice::new(&model, 256, Some(30)).unwrap();
        let mut d = vec![0.0; 256];
        d[100] = 0.01;
        let f = lattice.force(&d).unwrap();
        // Raw sum Φ′_m(m + Δ) − Φ′_m(m − Δ') with Φ′(r) = −a r^{−a−1}, summed largest-last.
        let raw = |j: usize| -> f64 {
            let mut terms: Vec<f64> = (1..=30)
                .map(|m| {
                    let right = m as f64 + d[(j + m) % 256] - d[j];
                    let left = m as f64 + d[j] - d[(j + 256 - m) % 256];
                    -4.0 * right.powi(-5) + 4.0 * left.powi(-5)
                })
                .collect();
            terms.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
            terms.iter().sum()
        };
        for j in [70usize, 99, 100, 101, 115, 129, 131] {
            assert!((f[j] - raw(j)).abs() < 1e-12, "site {j}: {} vs {}", f[j], raw(j));
        }
    }

    #[test]
    fn force_is_negative_energy_gradient() {
        let model = cm4();
        let lattice = Lattice::new(&model, 128, Some(20)).unwrap();
        let d = bumpy(128, 3, 0.02);
        let f = lattice.force(&d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for _ in 0..20 {
            let j = rng.gen_range(0..128);
            let mut plus = d.clone();
            let mut minus = d.clone();
            plus[j] += h;
            minus[j] -= h;
            let grad = (lattice.potential_energy(&plus) - lattice.potential_energy(&minus)) / (2.0 * h);
            assert!((-grad - f[j]).abs() <= 1e-6 * f[j].abs().max(1e-3), "site {j}");
        }
    }

    #[test]
    fn verlet_is_reversible() {
        let lattice = Lattice::new(&cm4(), 128, Some(20)).unwrap();
        let d = bumpy(128, 5, 0.01);
        let v = bumpy(128, 6, 0.01);
        let mut state = lattice.state(d.clone(), v.clone()).unwrap();
        lattice.step(&mut state, 0.01).unwrap();
        lattice.step(&mut state, -0.01).unwrap();
        for (a, b) in state.d.iter().zip(&d) {
            assert!((a - b).abs() < 1e-11);
        }
        for (a, b) in state.v.iter().zip(&v) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn flat_lattice_is_fixed_point() {
        let lattice = Lattice::new(&cm4(), 64, None).unwrap();
        let mut state = lattice.state(vec![0.0; 64], vec![0.0; 64]).unwrap();
        lattice.step(&mut state, 0.01).unwrap();
        assert!(state.d.iter().chain(&state.v).all(|x| *x == 0.0));
    }

    #[test]
    fn free_flight_without_interaction() {
        let model = build_model(
            &PotentialSpec::FiniteRange {
                terms: vec![crate::catalog::PolynomialForce { varsigma: 0.0, alpha: 0.0, beta: 1.0, cubic: 0.0 }],
            },
            DEFAULT_TRUNC_TOL,
        )
        .unwrap();
        let lattice = Lattice::new(&model, 16, None).unwrap();
        // Uniform velocity: all strains stay zero, so forces vanish.
        let mut state = lattice.state(vec![0.0; 16], vec![0.5; 16]).unwrap();
        for _ in 0..10 {
            lattice.step(&mut state, 0.1).unwrap();
        }
        assert!(state.d.iter().all(|d| (d - 0.5).abs() < 1e-14));
    }

    #[test]
    fn verlet_second_order() {
        let lattice = Lattice::new(&cm4(), 128, Some(10)).unwrap();
        let d0 = (0..128).map(|j| 0.01 * (2.0 * std::f64::consts::PI * j as f64 / 128.0).sin()).collect::<Vec<_>>();
        let run = |dt: f64, steps: usize| {
            let mut s = lattice.state(d0.clone(), vec![0.0; 128]).unwrap();
            for _ in 0..steps {
                lattice.step(&mut s, dt).unwrap();
            }
            s.d
        };
        let reference = run(0.0025, 400);
        let err = |d: Vec<f64>| d.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let e1 = err(run(0.02, 50));
        let e2 = err(run(0.01, 100));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn strain_domain_is_enforced() {
        let lattice = Lattice::new(&cm4(), 64, Some(4)).unwrap();
        let mut d = vec![0.0; 64];
        d[10] = 0.9;
        assert!(matches!(lattice.force(&d), Err(Error::StrainDomain { .. })));
    }

    #[test]
    fn interpolant_reproduces_samples() {
        let grid = Grid::new(40.0, 512).unwrap();
        let w = grid.sample(|x| -0.2 / (0.5 * x).cosh().powi(2));
        let interp = WaveInterpolant::new(&grid, &w);
        for j in [0usize, 100, 256, 300, 511] {
            assert!((interp.w(grid.x(j)) - w[j]).abs() < 1e-13);
        }
        // U(x) = −0.4 tanh(x/2).
        for x in [-39.0, -3.3, 0.0, 0.7, 12.0] {
            assert!((interp.u(x) + 0.4 * (0.5 * x).tanh()).abs() < 1e-12, "x = {x}");
        }
        assert!((interp.u(100.0) - interp.u(40.0)).abs() < 1e-15);
    }

    #[test]
    fn peak_interpolation_is_exact_for_parabola() {
        let strain: Vec<f64> = (0..20).map(|j| -1.0 + 0.1 * (j as f64 + 0.5 - 7.3).powi(2)).collect();
        let (pos, peak) = locate_peak(&strain, -1.0);
        assert!((pos - 7.3).abs() < 1e-12);
        assert!((peak + 1.0).abs() < 1e-12);
    }
}
