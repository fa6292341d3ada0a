//! Lattice potential families and their expansion about equilibrium.
//!
//! Every family is reduced to the coefficient sequences of
//! `Φ′_m(r*·m + η) = ς_m + α_m η + β_m η² + Ψ′_m(η)` together with a bound
//! `|Ψ′_m(η)| ≤ γ_m |η|³` on `|η| ≤ m·δ*`. Infinite-range families carry an
//! interaction range `M` chosen from a truncation tolerance; their exact
//! infinite moments (`Σ α_m m²`, `Σ β_m m³`, ...) come from zeta closed forms.

pub mod zeta;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Series branch threshold on `|η|/m` for the Calogero–Moser remainders.
pub const SERIES_SWITCH: f64 = 1e-3;
const SERIES_TERMS: usize = 12;
/// Hard cap on the interaction range of infinite families.
pub const MAX_RANGE: usize = 5_000_000;
pub const DEFAULT_TRUNC_TOL: f64 = 1e-10;
const DEFAULT_POLYNOMIAL_RADIUS: f64 = 0.5;

/// Force law `Φ′_m(r*m + η) = ς + αη + βη² + cη³` for one interaction distance.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PolynomialForce {
    #[serde(default)]
    pub varsigma: f64,
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub cubic: f64,
}

/// A potential family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// Nearest-neighbour FPUT: `Φ′₁(r) = α₁r + β₁r² + c₁r³`.
    #[serde(rename = "fput")]
    ClassicalFput {
        alpha1: f64,
        beta1: f64,
        #[serde(default)]
        cubic1: f64,
    },
    /// Finitely many interaction distances, `terms[m-1]` for distance `m`.
    FiniteRange { terms: Vec<PolynomialForce> },
    /// Next-nearest-neighbour lattice with `α₁ = 1`, `α₂ = g`.
    Nnn {
        g: f64,
        beta1: f64,
        beta2: f64,
        #[serde(default)]
        cubic1: f64,
        #[serde(default)]
        cubic2: f64,
    },
    /// `Φ_m(r) = r^{-a}` with `r* = 1`.
    CalogeroMoser { a: f64 },
    /// Explicit coefficient sequences (index `m-1`).
    #[serde(rename = "custom")]
    CustomCoefficients {
        alpha: Vec<f64>,
        #[serde(default)]
        beta: Vec<f64>,
        #[serde(default)]
        cubic: Vec<f64>,
        #[serde(default)]
        varsigma: Vec<f64>,
    },
}

/// The `[model]` section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub potential: PotentialSpec,
    #[serde(default = "default_trunc_tol")]
    pub trunc_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_star: Option<f64>,
}

fn default_trunc_tol() -> f64 {
    DEFAULT_TRUNC_TOL
}

impl ModelConfig {
    pub fn new(potential: PotentialSpec) -> Self {
        Self { potential, trunc_tol: DEFAULT_TRUNC_TOL, delta_star: None }
    }

    pub fn build(&self) -> Result<LatticeModel> {
        let model = build_model(&self.potential, self.trunc_tol)?;
        match self.delta_star {
            Some(radius) => model.with_delta_star(radius),
            None => Ok(model),
        }
    }
}

/// Integral-comparison bounds on the truncated tails beyond `M`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TailBounds {
    /// Bound on `Σ_{m>M} α_m m²`.
    pub alpha_m2: f64,
    /// Bound on `Σ_{m>M} |β_m| m³`.
    pub beta_m3: f64,
    /// Bound on `Σ_{m>M} γ_m m⁴`.
    pub gamma_m4: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    Polynomial(Vec<PolynomialForce>),
    CalogeroMoser { a: f64 },
}

/// An expanded lattice model. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    spec: PotentialSpec,
    family: Family,
    r_star: f64,
    delta_star: f64,
    range: usize,
    trunc_tol: f64,
    tails: TailBounds,
}

/// Builds the expanded model for `spec`, truncating infinite families at the
/// least range whose tails are all below `trunc_tol`.
pub fn build_model(spec: &PotentialSpec, trunc_tol: f64) -> Result<LatticeModel> {
    if !(trunc_tol > 0.0) || !trunc_tol.is_finite() {
        return Err(Error::InvalidParameter(format!("trunc_tol must be positive, got {trunc_tol}")));
    }
    let (family, r_star) = match spec {
        PotentialSpec::ClassicalFput { alpha1, beta1, cubic1 } => (
            Family::Polynomial(vec![PolynomialForce {
                varsigma: 0.0,
                alpha: *alpha1,
                beta: *beta1,
                cubic: *cubic1,
            }]),
            0.0,
        ),
        PotentialSpec::FiniteRange { terms } => {
            if terms.is_empty() {
                return Err(Error::InvalidModel("finite-range model with no terms".into()));
            }
            (Family::Polynomial(terms.clone()), 0.0)
        }
        PotentialSpec::Nnn { g, beta1, beta2, cubic1, cubic2 } => (
            Family::Polynomial(vec![
                PolynomialForce { varsigma: 0.0, alpha: 1.0, beta: *beta1, cubic: *cubic1 },
                PolynomialForce { varsigma: 0.0, alpha: *g, beta: *beta2, cubic: *cubic2 },
            ]),
            0.0,
        ),
        PotentialSpec::CalogeroMoser { a } => {
            if !a.is_finite() || *a <= 3.0 {
                return Err(Error::InvalidModel(format!(
                    "Calogero–Moser exponent a = {a} must exceed 3 (Σ α_m m⁴ and Σ |β_m| m⁵ diverge)"
                )));
            }
            (Family::CalogeroMoser { a: *a }, 1.0)
        }
        PotentialSpec::CustomCoefficients { alpha, beta, cubic, varsigma } => {
            let len = alpha.len().max(beta.len()).max(cubic.len()).max(varsigma.len());
            if len == 0 {
                return Err(Error::InvalidModel("custom model with empty coefficient lists".into()));
            }
            let at = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
            let terms = (0..len)
                .map(|i| PolynomialForce {
                    varsigma: at(varsigma, i),
                    alpha: at(alpha, i),
                    beta: at(beta, i),
                    cubic: at(cubic, i),
                })
                .collect();
            (Family::Polynomial(terms), 0.0)
        }
    };

    let (range, delta_star, tails) = match &family {
        Family::Polynomial(terms) => {
            let finite = terms.iter().all(|t| {
                t.varsigma.is_finite() && t.alpha.is_finite() && t.beta.is_finite() && t.cubic.is_finite()
            });
            if !finite {
                return Err(Error::InvalidModel("non-finite coefficient".into()));
            }
            (terms.len(), DEFAULT_POLYNOMIAL_RADIUS, TailBounds::default())
        }
        Family::CalogeroMoser { a } => {
            let range = calogero_range(*a, trunc_tol)?;
            let tails = calogero_tail_bounds(*a, range);
            (range, calogero_radius(*a), tails)
        }
    };

    let model = LatticeModel {
        spec: spec.clone(),
        family,
        r_star,
        delta_star,
        range,
        trunc_tol,
        tails,
    };
    // Rejects b = 0 (e.g. NNN with β₁ = −8β₂).
    b_coefficient(&model)?;
    Ok(model)
}

/// `a(a+1)(a+2)(a+3)`, the γ_m prefactor of the Calogero–Moser family.
fn calogero_gamma_prefactor(a: f64) -> f64 {
    a * (a + 1.0) * (a + 2.0) * (a + 3.0)
}

fn calogero_tail_bounds(a: f64, range: usize) -> TailBounds {
    let common = zeta::integral_tail_bound(a, range as u64);
    TailBounds {
        alpha_m2: a * (a + 1.0) * common,
        beta_m3: 0.5 * a * (a + 1.0) * (a + 2.0) * common,
        gamma_m4: calogero_gamma_prefactor(a) * common,
    }
}

/// Least `M` with all three tail bounds below `tol`. The three tails share
/// `Σ_{m>M} m^{-a}`; the γ prefactor is the largest.
fn calogero_range(a: f64, tol: f64) -> Result<usize> {
    let bound = |m: usize| calogero_tail_bounds(a, m).gamma_m4;
    let guess = (calogero_gamma_prefactor(a) / ((a - 1.0) * tol)).powf(1.0 / (a - 1.0)).ceil();
    if !guess.is_finite() || guess > MAX_RANGE as f64 {
        return Err(Error::InvalidModel(format!(
            "truncation tolerance {tol:e} needs more than {MAX_RANGE} interaction distances for a = {a}"
        )));
    }
    let mut m = (guess as usize).max(1);
    while m > 1 && bound(m - 1) < tol {
        m -= 1;
    }
    while bound(m) >= tol {
        m += 1;
    }
    Ok(m)
}

/// Largest radius (≤ 1/2, with a 1% margin) on which both remainder bounds
/// `|Ψ′_m| ≤ γ_m|η|³` and `|Ψ″_m| ≤ 3γ_m η²` hold. Both ratios depend only
/// on `t = η/m`, so one scan covers every `m`.
fn calogero_radius(a: f64) -> f64 {
    let holds = |t: f64| {
        let (r1, r2) = calogero_bound_ratios(a, t);
        r1 <= 1.0 && r2 <= 1.0
    };
    let steps = 5000;
    let h = 0.5 / steps as f64;
    let mut good = 0.0;
    for i in 1..=steps {
        let t = i as f64 * h;
        if holds(t) && holds(-t) {
            good = t;
        } else {
            let (mut lo, mut hi) = (good, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if holds(mid) && holds(-mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.99 * lo;
        }
    }
    0.5
}

/// `(|Ψ′_m| / (γ_m|η|³), |Ψ″_m| / (3γ_m η²))` at `η = t·m` (independent of `m`).
fn calogero_bound_ratios(a: f64, t: f64) -> (f64, f64) {
    let k = calogero_gamma_prefactor(a);
    let psi = a * binomial_remainder(-a - 1.0, t, 3);
    let dpsi = a * (a + 1.0) * binomial_remainder(-a - 2.0, t, 2);
    (psi.abs() / (k * t.abs().powi(3)), dpsi.abs() / (3.0 * k * t * t))
}

/// `Σ_{k ≥ start} C(e, k) t^k`: `(1+t)^e` minus its Taylor polynomial of
/// degree `start − 1`. Uses the series below [`SERIES_SWITCH`].
pub fn binomial_remainder(exponent: f64, t: f64, start: usize) -> f64 {
    if t.abs() < SERIES_SWITCH {
        binomial_series(exponent, t, start, SERIES_TERMS)
    } else {
        binomial_direct(exponent, t, start)
    }
}

/// Truncated binomial series with `terms` terms starting at degree `start`.
pub fn binomial_series(exponent: f64, t: f64, start: usize, terms: usize) -> f64 {
    let mut c = 1.0;
    for k in 0..start {
        c *= (exponent - k as f64) / (k as f64 + 1.0);
    }
    let mut tk = t.powi(start as i32);
    let mut sum = 0.0;
    for k in start..start + terms {
        sum += c * tk;
        c *= (exponent - k as f64) / (k as f64 + 1.0);
        tk *= t;
    }
    sum
}

/// Direct evaluation `(1+t)^e − Σ_{k<start} C(e,k) t^k`, with the constant
/// term removed through `expm1`.
pub fn binomial_direct(exponent: f64, t: f64, start: usize) -> f64 {
    let mut value = (exponent * t.ln_1p()).exp_m1();
    if start == 0 {
        return value + 1.0;
    }
    let mut c = exponent;
    let mut tk = t;
    for k in 1..start {
        value -= c * tk;
        c *= (exponent - k as f64) / (k as f64 + 1.0);
        tk *= t;
    }
    value
}

impl LatticeModel {
    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    pub fn delta_star(&self) -> f64 {
        self.delta_star
    }

    /// Interaction-range truncation `M`.
    pub fn range(&self) -> usize {
        self.range
    }

    pub fn trunc_tol(&self) -> f64 {
        self.trunc_tol
    }

    pub fn tails(&self) -> TailBounds {
        self.tails
    }

    /// `Some(a)` for the Calogero–Moser family.
    pub fn calogero_exponent(&self) -> Option<f64> {
        match self.family {
            Family::CalogeroMoser { a } => Some(a),
            Family::Polynomial(_) => None,
        }
    }

    pub fn is_finite_range(&self) -> bool {
        matches!(self.family, Family::Polynomial(_))
    }

    /// Replaces δ*. For Calogero–Moser the radius may not exceed the one on
    /// which the remainder bounds were verified.
    pub fn with_delta_star(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("delta_star must be positive, got {radius}")));
        }
        if let Family::CalogeroMoser { a } = self.family {
            let certified = calogero_radius(a);
            if radius > certified {
                return Err(Error::InvalidParameter(format!(
                    "delta_star = {radius} exceeds the radius {certified:.6} on which the γ_m bounds hold for a = {a}"
                )));
            }
        }
        self.delta_star = radius;
        Ok(self)
    }

    fn term(&self, m: usize) -> PolynomialForce {
        match &self.family {
            Family::Polynomial(terms) => terms.get(m.wrapping_sub(1)).copied().unwrap_or_default(),
            Family::CalogeroMoser { .. } => unreachable!("closed-form family"),
        }
    }

    pub fn varsigma(&self, m: usize) -> f64 {
        match self.family {
            Family::CalogeroMoser { a } => -a * (m as f64).powf(-a - 1.0),
            Family::Polynomial(_) => self.term(m).varsigma,
        }
    }

    pub fn alpha(&self, m: usize) -> f64 {
        match self.family {
            Family::CalogeroMoser { a } => a * (a + 1.0) * (m as f64).powf(-a - 2.0),
            Family::Polynomial(_) => self.term(m).alpha,
        }
    }

    pub fn beta(&self, m: usize) -> f64 {
        match self.family {
            Family::CalogeroMoser { a } => -0.5 * a * (a + 1.0) * (a + 2.0) * (m as f64).powf(-a - 3.0),
            Family::Polynomial(_) => self.term(m).beta,
        }
    }

    pub fn gamma(&self, m: usize) -> f64 {
        match self.family {
            Family::CalogeroMoser { a } => calogero_gamma_prefactor(a) * (m as f64).powf(-a - 4.0),
            Family::Polynomial(_) => self.term(m).cubic.abs(),
        }
    }

    /// `α_m m²` for `m = 1..=M`.
    pub fn alpha_weights(&self) -> Vec<f64> {
        (1..=self.range).map(|m| self.alpha(m) * (m * m) as f64).collect()
    }

    /// Exact `Σ_{m≥1} α_m m^p`.
    pub fn alpha_moment(&self, p: i32) -> Result<f64> {
        match &self.family {
            Family::CalogeroMoser { a } => Ok(a * (a + 1.0) * zeta::zeta(a + 2.0 - p as f64)?),
            Family::Polynomial(terms) => Ok(polynomial_moment(terms, p, |t| t.alpha)),
        }
    }

    /// Exact `Σ_{m≥1} |α_m| m^p`.
    pub fn alpha_abs_moment(&self, p: i32) -> Result<f64> {
        match &self.family {
            Family::CalogeroMoser { .. } => self.alpha_moment(p),
            Family::Polynomial(terms) => Ok(polynomial_moment(terms, p, |t| t.alpha.abs())),
        }
    }

    /// Exact `Σ_{m≥1} β_m m^p`.
    pub fn beta_moment(&self, p: i32) -> Result<f64> {
        match &self.family {
            Family::CalogeroMoser { a } => {
                Ok(-0.5 * a * (a + 1.0) * (a + 2.0) * zeta::zeta(a + 3.0 - p as f64)?)
            }
            Family::Polynomial(terms) => Ok(polynomial_moment(terms, p, |t| t.beta)),
        }
    }

    /// Exact `Σ_{m≥1} |β_m| m^p`.
    pub fn beta_abs_moment(&self, p: i32) -> Result<f64> {
        match &self.family {
            Family::CalogeroMoser { .. } => Ok(-self.beta_moment(p)?),
            Family::Polynomial(terms) => Ok(polynomial_moment(terms, p, |t| t.beta.abs())),
        }
    }

    /// Exact `Σ_{m≥1} γ_m m^p`.
    pub fn gamma_moment(&self, p: i32) -> Result<f64> {
        match &self.family {
            Family::CalogeroMoser { a } => {
                Ok(calogero_gamma_prefactor(*a) * zeta::zeta(a + 4.0 - p as f64)?)
            }
            Family::Polynomial(terms) => Ok(polynomial_moment(terms, p, |t| t.cubic.abs())),
        }
    }

    /// `Σ_{m>after} m^{q} |coefficient_m|` for Calogero–Moser, computed from
    /// the Hurwitz tail. Zero for finite families beyond their range.
    pub fn exact_tail(&self, kind: Moment, p: i32, after: usize) -> Result<f64> {
        match &self.family {
            Family::CalogeroMoser { a } => {
                let (prefactor, offset) = match kind {
                    Moment::Alpha => (a * (a + 1.0), 2.0),
                    Moment::Beta => (0.5 * a * (a + 1.0) * (a + 2.0), 3.0),
                    Moment::Gamma => (calogero_gamma_prefactor(*a), 4.0),
                };
                Ok(prefactor * zeta::tail_sum(a + offset - p as f64, after as u64 + 1)?)
            }
            Family::Polynomial(terms) => Ok(terms
                .iter()
                .enumerate()
                .skip(after)
                .map(|(i, t)| {
                    let c = match kind {
                        Moment::Alpha => t.alpha,
                        Moment::Beta => t.beta,
                        Moment::Gamma => t.cubic,
                    };
                    c.abs() * ((i + 1) as f64).powi(p)
                })
                .sum()),
        }
    }

    /// Ψ′_m(η), the cubic remainder of the force expansion.
    pub fn psi_prime(&self, m: usize, eta: f64) -> Result<f64> {
        self.check_domain(m, eta)?;
        Ok(match self.family {
            Family::CalogeroMoser { a } => {
                let mf = m as f64;
                -a * mf.powf(-a - 1.0) * binomial_remainder(-a - 1.0, eta / mf, 3)
            }
            Family::Polynomial(_) => self.term(m).cubic * eta * eta * eta,
        })
    }

    /// Ψ″_m(η).
    pub fn psi_second(&self, m: usize, eta: f64) -> Result<f64> {
        self.check_domain(m, eta)?;
        Ok(match self.family {
            Family::CalogeroMoser { a } => {
                let mf = m as f64;
                a * (a + 1.0) * mf.powf(-a - 2.0) * binomial_remainder(-a - 2.0, eta / mf, 2)
            }
            Family::Polynomial(_) => 3.0 * self.term(m).cubic * eta * eta,
        })
    }

    fn check_domain(&self, m: usize, eta: f64) -> Result<()> {
        let limit = m as f64 * self.delta_star;
        if m == 0 || !(eta.abs() <= limit) {
            return Err(Error::OutOfDomain { m, eta, limit });
        }
        Ok(())
    }

    /// `Φ′_m(r*m + η) − ς_m = α_m η + β_m η² + Ψ′_m(η)`, without domain check.
    pub fn force_term(&self, m: usize, eta: f64) -> f64 {
        match self.family {
            Family::CalogeroMoser { a } => {
                let mf = m as f64;
                -a * mf.powf(-a - 1.0) * binomial_remainder(-a - 1.0, eta / mf, 1)
            }
            Family::Polynomial(_) => {
                let t = self.term(m);
                eta * (t.alpha + eta * (t.beta + eta * t.cubic))
            }
        }
    }

    /// `Φ_m(r*m + η) − Φ_m(r*m) − ς_m η`, the gauge-fixed pair energy.
    pub fn pair_energy(&self, m: usize, eta: f64) -> f64 {
        match self.family {
            Family::CalogeroMoser { a } => {
                let mf = m as f64;
                mf.powf(-a) * binomial_remainder(-a, eta / mf, 2)
            }
            Family::Polynomial(_) => {
                let t = self.term(m);
                eta * eta * (0.5 * t.alpha + eta * (t.beta / 3.0 + eta * 0.25 * t.cubic))
            }
        }
    }

    /// Raw `Φ′_m(r)`.
    pub fn phi_prime(&self, m: usize, r: f64) -> f64 {
        match self.family {
            Family::CalogeroMoser { a } => -a * r.powf(-a - 1.0),
            Family::Polynomial(_) => self.term(m).varsigma + self.force_term(m, r - self.r_star * m as f64),
        }
    }
}

/// Which coefficient sequence a moment refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    Alpha,
    Beta,
    Gamma,
}

fn polynomial_moment(terms: &[PolynomialForce], p: i32, f: impl Fn(&PolynomialForce) -> f64) -> f64 {
    terms.iter().enumerate().map(|(i, t)| f(t) * ((i + 1) as f64).powi(p)).sum()
}

/// Computes `b = Σ β_m m³`, refusing when its sign cannot be certified
/// against the truncation tail.
pub fn b_coefficient(model: &LatticeModel) -> Result<f64> {
    let truncated: f64 = (1..=model.range).map(|m| model.beta(m) * (m as f64).powi(3)).sum();
    let tail = model.tails.beta_m3;
    let scale = (1..=model.range).map(|m| model.beta(m).abs() * (m as f64).powi(3)).sum::<f64>();
    if !(truncated.abs() > tail + 64.0 * f64::EPSILON * scale) {
        return Err(Error::DegenerateQuadratic { b: truncated, tail });
    }
    match model.family {
        Family::CalogeroMoser { .. } => model.beta_moment(3),
        Family::Polynomial(_) => Ok(truncated),
    }
}

/// One moment of Assumption-style summability: truncated part, tail, total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub truncated: f64,
    pub tail: f64,
    pub total: f64,
    pub finite: bool,
}

/// Summability and non-degeneracy checks on the β and γ sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `Σ |β_m| m⁵`.
    pub beta_m5: MomentReport,
    /// `Σ γ_m m⁴`.
    pub gamma_m4: MomentReport,
    pub b: Option<f64>,
    pub b_certified: bool,
    pub passed: bool,
    pub notes: Vec<String>,
}

pub fn check_assumptions(model: &LatticeModel) -> AssumptionReport {
    let mut notes = Vec::new();
    let report = |kind: Moment, p: i32, notes: &mut Vec<String>| -> MomentReport {
        let truncated: f64 = (1..=model.range)
            .map(|m| {
                let c = match kind {
                    Moment::Alpha => model.alpha(m),
                    Moment::Beta => model.beta(m),
                    Moment::Gamma => model.gamma(m),
                };
                c.abs() * (m as f64).powi(p)
            })
            .sum();
        match model.exact_tail(kind, p, model.range) {
            Ok(tail) => MomentReport { truncated, tail, total: truncated + tail, finite: tail.is_finite() },
            Err(e) => {
                notes.push(format!("{kind:?} moment m^{p} diverges: {e}"));
                MomentReport { truncated, tail: f64::INFINITY, total: f64::INFINITY, finite: false }
            }
        }
    };
    let beta_m5 = report(Moment::Beta, 5, &mut notes);
    let gamma_m4 = report(Moment::Gamma, 4, &mut notes);
    for (name, r) in [("Σ|β_m|m⁵", &beta_m5), ("Σγ_m m⁴", &gamma_m4)] {
        if r.finite && r.tail > 1e-3 * r.total {
            notes.push(format!(
                "{name}: slowly convergent, tail beyond M = {} is {:.3e} of total {:.6e}",
                model.range, r.tail, r.total
            ));
        }
    }
    let (b, b_certified) = match b_coefficient(model) {
        Ok(b) => (Some(b), true),
        Err(e) => {
            notes.push(e.to_string());
            (None, false)
        }
    };
    AssumptionReport {
        passed: beta_m5.finite && gamma_m4.finite && b_certified,
        beta_m5,
        gamma_m4,
        b,
        b_certified,
        notes,
    }
}
