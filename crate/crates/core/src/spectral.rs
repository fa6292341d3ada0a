//! Periodic grid on `[−L, L)` with real FFTs, Fourier multipliers, Sobolev
//! norms and the even projection.
//!
//! Spectra hold Fourier-series coefficients `c_j = (1/N) Σ_n f_n e^{−2πi jn/N}`
//! for `j = 0..=N/2`, so the inverse transform is the plain sum and
//! `‖f‖²_{H^s} = 2L Σ_j w_j (1+k_j²)^s |c_j|²` with `w = 1` at `j = 0, N/2` and
//! `2` otherwise. At `s = 0` this is exactly `dx Σ f_n²`.

use std::fmt;
use std::sync::Arc;

use realfft::num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};

pub type Spectrum = Vec<Complex64>;

/// Smallest admissible sample count.
pub const MIN_POINTS: usize = 256;
/// Smallest admissible half-period.
pub const MIN_HALF_LENGTH: f64 = 20.0;

/// Uniform periodic grid `x_j = −L + j·dx`, `dx = 2L/N`.
#[derive(Clone)]
pub struct Grid {
    half_length: f64,
    n: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    padded_forward: Arc<dyn RealToComplex<f64>>,
    padded_inverse: Arc<dyn ComplexToReal<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("half_length", &self.half_length).field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.half_length == other.half_length && self.n == other.n
    }
}

impl Grid {
    pub fn new(half_length: f64, n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("N = {n} must be a power of two ≥ {MIN_POINTS}")));
        }
        if !(half_length >= MIN_HALF_LENGTH) || !half_length.is_finite() {
            return Err(Error::InvalidGrid(format!("L = {half_length} must be at least {MIN_HALF_LENGTH}")));
        }
        let mut planner = RealFftPlanner::<f64>::new();
        let padded = 3 * n / 2;
        Ok(Self {
            half_length,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            padded_forward: planner.plan_fft_forward(padded),
            padded_inverse: planner.plan_fft_inverse(padded),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    /// Number of stored modes, `N/2 + 1`.
    pub fn modes(&self) -> usize {
        self.n / 2 + 1
    }

    /// `x_j = −L + j·dx`, computed so that `x_{N−j} = −x_j` exactly.
    pub fn x(&self, j: usize) -> f64 {
        if j > self.n / 2 {
            -self.x(self.n - j)
        } else {
            -self.half_length + j as f64 * self.dx()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// `k_j = jπ/L`.
    pub fn k(&self, j: usize) -> f64 {
        j as f64 * std::f64::consts::PI / self.half_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.modes()).map(|j| self.k(j)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|j| f(self.x(j))).collect()
    }

    pub fn multiplier_table(&self, m: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.modes()).map(|j| m(self.k(j))).collect()
    }

    pub fn forward(&self, f: &[f64]) -> Spectrum {
        assert_eq!(f.len(), self.n, "field length does not match grid");
        let mut input = f.to_vec();
        let mut out = self.forward.make_output_vec();
        self.forward.process(&mut input, &mut out).expect("buffer sizes match plan");
        let scale = 1.0 / self.n as f64;
        out.iter_mut().for_each(|c| *c *= scale);
        out
    }

    pub fn inverse(&self, c: &[Complex64]) -> Vec<f64> {
        assert_eq!(c.len(), self.modes(), "spectrum length does not match grid");
        let mut input = c.to_vec();
        input[0].im = 0.0;
        input[self.n / 2].im = 0.0;
        let mut out = self.inverse.make_output_vec();
        self.inverse.process(&mut input, &mut out).expect("buffer sizes match plan");
        out
    }

    /// Evaluates the band-limited interpolant on the 3N/2 padded grid.
    pub fn padded_inverse(&self, c: &[Complex64]) -> Vec<f64> {
        let padded = 3 * self.n / 2;
        let mut input = vec![Complex64::new(0.0, 0.0); padded / 2 + 1];
        input[..self.modes()].copy_from_slice(c);
        input[0].im = 0.0;
        // The Nyquist mode splits evenly between ±N/2 on the finer grid.
        input[self.n / 2] = Complex64::new(0.5 * c[self.n / 2].re, 0.0);
        let mut out = self.padded_inverse.make_output_vec();
        self.padded_inverse.process(&mut input, &mut out).expect("buffer sizes match plan");
        out
    }

    /// Transforms padded-grid values and truncates to the first `N/2 + 1` modes.
    pub fn padded_forward(&self, f: &[f64]) -> Spectrum {
        let padded = 3 * self.n / 2;
        assert_eq!(f.len(), padded, "padded field length does not match grid");
        let mut input = f.to_vec();
        let mut out = self.padded_forward.make_output_vec();
        self.padded_forward.process(&mut input, &mut out).expect("buffer sizes match plan");
        let scale = 1.0 / padded as f64;
        let mut c: Spectrum = out[..self.modes()].iter().map(|v| v * scale).collect();
        let nyq = self.n / 2;
        c[nyq] = Complex64::new(0.0, 0.0);
        c
    }

    /// Spectrum of the pointwise product, dealiased by 3/2 padding if asked.
    pub fn product_spectrum(&self, a: &[Complex64], b: &[Complex64], dealias: bool) -> Spectrum {
        if dealias {
            let pa = self.padded_inverse(a);
            let pb = self.padded_inverse(b);
            let prod: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
            self.padded_forward(&prod)
        } else {
            let pa = self.inverse(a);
            let pb = self.inverse(b);
            let prod: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
            self.forward(&prod)
        }
    }

    pub fn apply_multiplier(&self, f: &[f64], m: &[f64]) -> Result<Vec<f64>> {
        let mut c = self.forward(f);
        self.scale_spectrum(&mut c, m)?;
        Ok(self.inverse(&c))
    }

    /// Multiplies a spectrum in place, rejecting non-finite multiplier values.
    pub fn scale_spectrum(&self, c: &mut [Complex64], m: &[f64]) -> Result<()> {
        assert_eq!(m.len(), c.len(), "multiplier length does not match spectrum");
        for (j, (v, w)) in c.iter_mut().zip(m).enumerate() {
            if !w.is_finite() {
                return Err(Error::SingularMultiplier { k: self.k(j) });
            }
            *v *= *w;
        }
        Ok(())
    }

    pub fn sobolev_norm(&self, f: &[f64], s: f64) -> f64 {
        self.spectrum_norm(&self.forward(f), s)
    }

    pub fn spectrum_norm(&self, c: &[Complex64], s: f64) -> f64 {
        let last = self.n / 2;
        let total: f64 = c
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let weight = if j == 0 || j == last { 1.0 } else { 2.0 };
                let k = self.k(j);
                weight * (1.0 + k * k).powf(s) * v.norm_sqr()
            })
            .sum();
        (2.0 * self.half_length * total).sqrt()
    }

    /// `(dx Σ f_j²)^{1/2}`.
    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// `dx Σ f_j g_j`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.dx() * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `(F(x) + F(−x))/2`; `x_j` reflects to `x_{(N−j) mod N}`.
    pub fn project_even(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| 0.5 * (f[j] + f[(self.n - j) % self.n])).collect()
    }

    /// `max_j |F(x_j) − F(−x_j)|`.
    pub fn parity_defect(&self, f: &[f64]) -> f64 {
        (0..self.n).map(|j| (f[j] - f[(self.n - j) % self.n]).abs()).fold(0.0, f64::max)
    }
}

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}
