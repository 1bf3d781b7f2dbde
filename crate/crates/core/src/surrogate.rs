//! Iterative amplitude-adjusted Fourier transform (IAAFT) surrogates.
//!
//! Each iteration imposes the original Fourier magnitudes on the current
//! series (keeping its phases) and then restores the original value
//! distribution by rank remapping. The output always carries exactly the
//! original values; its power spectrum approaches the original's.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_ITERATIONS: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurrogateError {
    #[error("series must have at least 2 values, got {0}")]
    TooShort(usize),
    #[error("series contains non-finite values")]
    NonFinite,
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateConfig {
    pub iterations: usize,
    pub rng_seed: u64,
    /// Stop early once the spectrum distance falls to this value.
    pub spectrum_tolerance: Option<f64>,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self { iterations: DEFAULT_ITERATIONS, rng_seed: 0, spectrum_tolerance: None }
    }
}

/// Surrogate values plus the spectrum distance to the original after every
/// completed iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateRun {
    pub values: Vec<f64>,
    pub distances: Vec<f64>,
}

impl SurrogateRun {
    pub fn final_distance(&self) -> f64 {
        self.distances.last().copied().unwrap_or(0.0)
    }
}

pub fn make_surrogate(v: &[f64], cfg: &SurrogateConfig) -> Result<Vec<f64>, SurrogateError> {
    run_surrogate(v, cfg).map(|run| run.values)
}

pub fn run_surrogate(v: &[f64], cfg: &SurrogateConfig) -> Result<SurrogateRun, SurrogateError> {
    if v.len() < 2 {
        return Err(SurrogateError::TooShort(v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(SurrogateError::NonFinite);
    }
    if cfg.iterations == 0 {
        return Err(SurrogateError::NoIterations);
    }
    let n = v.len();
    let spectrum = Spectrum::new(n);

    let original = spectrum.forward(v);
    let target_magnitudes: Vec<f64> = original.iter().map(|c| c.norm()).collect();
    let mut sorted_values = v.to_vec();
    sorted_values.sort_by(f64::total_cmp);

    let mut current = v.to_vec();
    current.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.rng_seed));

    let mut order: Vec<usize> = (0..n).collect();
    let mut distances = Vec::with_capacity(cfg.iterations);
    let mut coeffs = spectrum.forward(&current);
    for _ in 0..cfg.iterations {
        // Impose the original magnitudes on the current phases.
        coeffs[0] = original[0];
        for (c, &mag) in coeffs.iter_mut().zip(&target_magnitudes).skip(1) {
            let norm = c.norm();
            *c = if norm > 0.0 { *c * (mag / norm) } else { Complex::new(mag, 0.0) };
        }
        let filtered = spectrum.inverse(&mut coeffs);

        // Rank remap; ties keep index order.
        order.sort_by(|&a, &b| filtered[a].total_cmp(&filtered[b]).then(a.cmp(&b)));
        for (rank, &pos) in order.iter().enumerate() {
            current[pos] = sorted_values[rank];
        }

        coeffs = spectrum.forward(&current);
        let d = magnitude_distance(&target_magnitudes, &coeffs);
        distances.push(d);
        if cfg.spectrum_tolerance.is_some_and(|tol| d <= tol) {
            break;
        }
    }
    Ok(SurrogateRun { values: current, distances })
}

/// Relative L2 distance between the DFT magnitudes of `a` and `b`, the
/// zero-frequency term excluded, normalized by the magnitudes of `a`.
pub fn spectrum_distance(a: &[f64], b: &[f64]) -> Result<f64, SurrogateError> {
    if a.len() != b.len() {
        return Err(SurrogateError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let spectrum = Spectrum::new(a.len());
    let ma: Vec<f64> = spectrum.forward(a).iter().map(|c| c.norm()).collect();
    Ok(magnitude_distance(&ma, &spectrum.forward(b)))
}

fn magnitude_distance(reference: &[f64], coeffs: &[Complex<f64>]) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (r, c) in reference.iter().zip(coeffs).skip(1) {
        diff += (r - c.norm()).powi(2);
        norm += r * r;
    }
    if norm > 0.0 {
        (diff / norm).sqrt()
    } else {
        diff.sqrt()
    }
}

/// Forward/inverse transforms of one fixed length (any length; mixed radix).
struct Spectrum {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl Spectrum {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n), n }
    }

    fn forward(&self, x: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&r| Complex::new(r, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Real part of the normalized inverse transform.
    fn inverse(&self, coeffs: &mut [Complex<f64>]) -> Vec<f64> {
        self.inverse.process(coeffs);
        let scale = 1.0 / self.n as f64;
        coeffs.iter().map(|c| c.re * scale).collect()
    }
}
