//! Return-interval analysis of intraday volatility records.
//!
//! The pipeline runs from minute-bar prices to normalized volatility
//! ([`volatility`]), extracts the waiting times between threshold
//! exceedances ([`intervals`]), compares their scaled distributions
//! ([`dist`]) against the stretched-exponential scaling function
//! ([`stretchedexp`]), and quantifies departures from a single scaling law
//! through moment exponents ([`multiscaling`]). IAAFT surrogates
//! ([`surrogate`]) provide the linear-correlation null model, and
//! [`simulate`] runs the i.i.d. discreteness and finite-size experiments.
//! [`cli`] wires everything into batch commands that emit CSV/JSON.

pub mod cli;
pub mod dist;
pub mod intervals;
pub mod io;
pub mod multiscaling;
pub mod pipeline;
pub mod seed;
pub mod simulate;
pub mod stretchedexp;
pub mod surrogate;
pub mod synthetic;
pub mod volatility;

pub use dist::{collapse_deviation, empirical_survival, CollapseReport, EmpiricalCdf};
pub use intervals::{
    extract_intervals, moment, scaled_intervals, sweep_thresholds, IntervalSeries, SweepConfig,
    ThresholdSweep,
};
pub use multiscaling::{
    alpha_histogram, alpha_vs_m, fit_alpha, AlphaEnsemble, AlphaEstimate, AlphaHistogram,
    CurveSource, MomentCurve,
};
pub use pipeline::{analyze_series, AnalysisSettings, InstrumentAnalysis};
pub use simulate::{
    discretize, run_discreteness_experiment, run_finite_size_experiment, simulate_intervals,
    SimulationPlan,
};
pub use stretchedexp::{fit_gamma, params_from_gamma, GammaFit, StretchedExpParams};
pub use surrogate::{make_surrogate, spectrum_distance, SurrogateConfig};
pub use volatility::{compute_volatility, load_prices, PriceSeries, VolatilitySeries};
