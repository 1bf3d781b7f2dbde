//! Stretched-exponential scaling function `f(x) = c·exp(-(a·x)^γ)`.
//!
//! With the distribution normalized and its mean fixed at 1, both `a` and
//! `c` follow from `γ`:
//!
//! ```text
//!     a = Γ(2/γ) / Γ(1/γ)
//!     c = γ·Γ(2/γ) / Γ(1/γ)²
//! ```
//!
//! Everything here is evaluated through `ln Γ` so that small exponents
//! (`2/γ = 40` at `γ = 0.05`) never overflow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};
use thiserror::Error;

/// Largest exponent accepted by [`params_from_gamma`].
pub const GAMMA_MAX: f64 = 2.0;

/// Search interval used by [`fit_gamma`].
pub const FIT_GAMMA_LOW: f64 = 0.05;
pub const FIT_GAMMA_HIGH: f64 = 1.5;

/// Minimum sample size accepted by [`fit_gamma`].
pub const FIT_MIN_SAMPLES: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StretchedExpError {
    #[error("invalid exponent gamma = {0} (must be finite and in (0, {GAMMA_MAX}])")]
    InvalidGamma(f64),
    #[error("moment order m = {0} is invalid (need m > -1 and m != 0)")]
    InvalidOrder(f64),
    #[error("need at least {FIT_MIN_SAMPLES} samples to fit, got {0}")]
    TooFewSamples(usize),
    #[error("samples must be finite and positive")]
    InvalidSample,
    #[error("degenerate sample: all values are equal")]
    Degenerate,
}

/// Exponent `γ` together with the constants it determines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchedExpParams {
    pub gamma: f64,
    pub a: f64,
    pub c: f64,
}

/// Builds the parameter set for `gamma`.
///
/// Exponents in `(1, 2]` are accepted but logged as a warning: the scaling
/// function is only expected to describe correlated records with `γ ≤ 1`.
pub fn params_from_gamma(gamma: f64) -> Result<StretchedExpParams, StretchedExpError> {
    if !gamma.is_finite() || gamma <= 0.0 || gamma > GAMMA_MAX {
        return Err(StretchedExpError::InvalidGamma(gamma));
    }
    if gamma > 1.0 {
        log::warn!("stretched exponential with gamma = {gamma} > 1");
    }
    Ok(StretchedExpParams::derive(gamma))
}

impl StretchedExpParams {
    fn derive(gamma: f64) -> Self {
        let ln_g1 = ln_gamma(1.0 / gamma);
        let ln_g2 = ln_gamma(2.0 / gamma);
        let a = (ln_g2 - ln_g1).exp();
        let c = gamma * (ln_g2 - 2.0 * ln_g1).exp();
        Self { gamma, a, c }
    }

    /// Probability density `c·exp(-(a·x)^γ)` of the scaled interval.
    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.c * (-(self.a * x).powf(self.gamma)).exp()
    }

    /// `D(x) = ∫_x^∞ f`, i.e. `Q(1/γ, (a·x)^γ)` with `Q` the regularized
    /// upper incomplete gamma function.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let z = (self.a * x).powf(self.gamma);
        if !z.is_finite() {
            return 0.0;
        }
        gamma_ur(1.0 / self.gamma, z).clamp(0.0, 1.0)
    }

    /// `μ_m = (1/a)·{Γ((m+1)/γ)/Γ(1/γ)}^{1/m}`.
    pub fn analytic_moment(&self, m: f64) -> Result<f64, StretchedExpError> {
        if !m.is_finite() || m <= -1.0 || m == 0.0 {
            return Err(StretchedExpError::InvalidOrder(m));
        }
        let log_ratio = ln_gamma((m + 1.0) / self.gamma) - ln_gamma(1.0 / self.gamma);
        Ok((log_ratio / m).exp() / self.a)
    }

    /// Sampler for this law. Draws `Y ~ Gamma(1/γ, 1)` and returns
    /// `Y^{1/γ} / a`.
    pub fn distribution(&self) -> StretchedExp {
        StretchedExp {
            gamma_variate: Gamma::new(1.0 / self.gamma, 1.0)
                .expect("shape 1/gamma is positive and finite"),
            inv_gamma: 1.0 / self.gamma,
            inv_a: 1.0 / self.a,
        }
    }

    /// `n` i.i.d. draws, deterministic for a given `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let dist = self.distribution();
        (0..n).map(|_| dist.sample(rng)).collect()
    }
}

/// Stretched-exponential random variable with unit mean.
#[derive(Debug, Clone, Copy)]
pub struct StretchedExp {
    gamma_variate: Gamma<f64>,
    inv_gamma: f64,
    inv_a: f64,
}

impl Distribution<f64> for StretchedExp {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let y: f64 = self.gamma_variate.sample(rng);
        y.powf(self.inv_gamma) * self.inv_a
    }
}

/// Result of a one-parameter survival-curve fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub gamma: f64,
    /// Root-mean-square survival residual at the optimum.
    pub residual: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n_grid: usize,
    pub n_samples: usize,
    pub iterations: usize,
}

const FIT_GRID_POINTS: usize = 60;
const FIT_LOW_QUANTILE: f64 = 0.005;
const FIT_HIGH_QUANTILE: f64 = 0.995;
const FIT_TOLERANCE: f64 = 1e-6;

/// Fits `γ` to scaled intervals by least squares between the empirical
/// survival function and [`StretchedExpParams::survival`] on log-spaced
/// abscissae, using golden-section search over `[0.05, 1.5]`.
pub fn fit_gamma(scaled: &[f64]) -> Result<GammaFit, StretchedExpError> {
    if scaled.len() < FIT_MIN_SAMPLES {
        return Err(StretchedExpError::TooFewSamples(scaled.len()));
    }
    if scaled.iter().any(|x| !x.is_finite() || *x <= 0.0) {
        return Err(StretchedExpError::InvalidSample);
    }
    let mut sorted = scaled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if sorted[0] == sorted[n - 1] {
        return Err(StretchedExpError::Degenerate);
    }

    let quantile = |p: f64| sorted[((n - 1) as f64 * p).round() as usize];
    let mut x_min = quantile(FIT_LOW_QUANTILE);
    let mut x_max = quantile(FIT_HIGH_QUANTILE);
    if x_min >= x_max {
        x_min = sorted[0];
        x_max = sorted[n - 1];
    }
    let grid = log_space(x_min, x_max, FIT_GRID_POINTS);
    let empirical: Vec<f64> = grid
        .iter()
        .map(|&x| (n - sorted.partition_point(|&v| v < x)) as f64 / n as f64)
        .collect();

    let objective = |gamma: f64| {
        let params = StretchedExpParams::derive(gamma);
        grid.iter()
            .zip(&empirical)
            .map(|(&x, &d)| (params.survival(x) - d).powi(2))
            .sum::<f64>()
    };

    let (gamma, sse, iterations) = golden_section(objective, FIT_GAMMA_LOW, FIT_GAMMA_HIGH);
    Ok(GammaFit {
        gamma,
        residual: (sse / grid.len() as f64).sqrt(),
        x_min,
        x_max,
        n_grid: grid.len(),
        n_samples: n,
        iterations,
    })
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while hi - lo > FIT_TOLERANCE && iterations < 200 {
        iterations += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1, iterations)
    } else {
        (x2, f2, iterations)
    }
}

/// `n` points evenly spaced in `ln x` from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (l, h) = (lo.ln(), hi.ln());
            let step = (h - l) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        (l + step * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}
