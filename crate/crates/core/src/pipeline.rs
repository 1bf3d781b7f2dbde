//! Per-instrument analysis: threshold sweep, moment curves, `α` fits,
//! survival curves at fixed thresholds and their collapse report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{collapse_deviation, empirical_survival, CollapseReport, EmpiricalCdf};
use crate::intervals::{extract_intervals, moment, scaled_intervals, sweep_thresholds, IntervalError, IntervalSeries, SweepConfig, ThresholdSweep};
use crate::multiscaling::{fit_alpha, AlphaEstimate, CurveSource, MomentCurve, DEFAULT_FIT_RANGE};
use crate::simulate::default_targets;
use crate::stretchedexp::{fit_gamma, GammaFit, FIT_MIN_SAMPLES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisSettings {
    pub targets: Vec<f64>,
    pub fit_range: (f64, f64),
    pub m_values: Vec<f64>,
    /// Thresholds for survival curves, in standard deviations.
    pub q_values: Vec<f64>,
    pub sweep: SweepConfig,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            targets: default_targets(),
            fit_range: DEFAULT_FIT_RANGE,
            m_values: vec![0.1, 0.25, 0.5, 0.75, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0],
            q_values: vec![2.0, 4.0, 6.0],
            sweep: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Intervals(#[from] IntervalError),
    #[error("only {found} swept thresholds fall in the fit range (need 3)")]
    TooFewPoints { found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub q: f64,
    pub series: IntervalSeries,
    pub survival: Option<EmpiricalCdf>,
    pub gamma_fit: Option<GammaFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentAnalysis {
    pub source: CurveSource,
    pub sweep: ThresholdSweep,
    pub curves: Vec<MomentCurve>,
    pub alphas: Vec<AlphaEstimate>,
    /// Diagnostics for orders whose moments or fits failed.
    pub notes: Vec<String>,
    pub thresholds: Vec<ThresholdCurve>,
    pub collapse: Option<CollapseReport>,
}

impl InstrumentAnalysis {
    pub fn alpha_for(&self, m: f64) -> Option<&AlphaEstimate> {
        self.alphas.iter().find(|a| a.m == m)
    }
}

pub fn analyze_series(values: &[f64], source: CurveSource, settings: &AnalysisSettings) -> Result<InstrumentAnalysis, AnalysisError> {
    let sweep = sweep_thresholds(values, &settings.targets, &settings.sweep)?;
    let (low, high) = settings.fit_range;
    let in_range = sweep.mean_taus().iter().filter(|&&t| t > low && t <= high).count();
    if in_range < 3 {
        return Err(AnalysisError::TooFewPoints { found: in_range });
    }

    let mut notes = Vec::new();
    let mut curves = Vec::with_capacity(settings.m_values.len());
    let mut alphas = Vec::new();
    for &m in &settings.m_values {
        let mut points = Vec::with_capacity(sweep.entries.len());
        for entry in &sweep.entries {
            let Some(mean_tau) = entry.series.mean_tau else { continue };
            match moment(&entry.series, m) {
                Ok(mu) => points.push((mean_tau, mu)),
                Err(e) => notes.push(format!("m = {m}, q = {}: {e}", entry.series.q)),
            }
        }
        let curve = MomentCurve::new(m, points, source);
        match fit_alpha(&curve, low, high) {
            Ok(est) => alphas.push(est),
            Err(e) => notes.push(format!("m = {m}: {e}")),
        }
        curves.push(curve);
    }

    let mut thresholds = Vec::new();
    for &q in &settings.q_values {
        let series = extract_intervals(values, q)?;
        let scaled = scaled_intervals(&series).ok();
        let survival = scaled.as_deref().and_then(|s| empirical_survival(s, q).ok());
        let gamma_fit = scaled.as_deref().filter(|s| s.len() >= FIT_MIN_SAMPLES).and_then(|s| fit_gamma(s).ok());
        thresholds.push(ThresholdCurve { q, series, survival, gamma_fit });
    }
    let cdfs: Vec<EmpiricalCdf> = thresholds.iter().filter_map(|t| t.survival.clone()).collect();
    let collapse = collapse_deviation(&cdfs).ok();

    Ok(InstrumentAnalysis { source, sweep, curves, alphas, notes, thresholds, collapse })
}
