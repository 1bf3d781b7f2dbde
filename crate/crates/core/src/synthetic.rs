//! Seeded synthetic records for tests, demos and null-model checks.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::volatility::{PriceSeries, TradingDay, LAST_MINUTE};

fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Gaussian series with power spectrum `S(f) ∝ f^{-beta}` by Fourier
/// filtering of white noise, standardized to zero mean and unit variance.
/// `beta` in `(0, 1)` gives long-range correlations.
pub fn long_memory_gaussian(n: usize, beta: f64, seed: u64) -> Vec<f64> {
    if n < 2 {
        return normals(n, seed);
    }
    let mut buf: Vec<Complex<f64>> = normals(n, seed).into_iter().map(|x| Complex::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    buf[0] = Complex::new(0.0, 0.0);
    for (k, c) in buf.iter_mut().enumerate().skip(1) {
        let f = k.min(n - k) as f64 / n as f64;
        *c *= f.powf(-beta / 2.0);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let x: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    x.iter().map(|v| (v - mean) / sd).collect()
}

/// Volatility-like series `exp(σ·h_i)·|ε_i|` with long-memory log
/// amplitude `h` and i.i.d. Gaussian `ε`: nonnegative, clustered and
/// nonlinearly correlated.
pub fn clustered_volatility(n: usize, sigma: f64, beta: f64, seed: u64) -> Vec<f64> {
    let h = long_memory_gaussian(n, beta, seed);
    let eps = normals(n, seed ^ 0x5EED);
    h.iter().zip(&eps).map(|(h, e)| (sigma * h).exp() * e.abs()).collect()
}

/// Parameters for [`synthetic_prices`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceModel {
    pub n_days: usize,
    /// Per-minute log-return scale at midday.
    pub base_volatility: f64,
    /// Open/close volatility is `1 + u_shape` times the midday level.
    pub u_shape: f64,
    /// Standard deviation of the long-memory log-volatility (0 = none).
    pub clustering: f64,
    pub seed: u64,
}

impl Default for PriceModel {
    fn default() -> Self {
        Self { n_days: 20, base_volatility: 5e-4, u_shape: 2.0, clustering: 0.0, seed: 0 }
    }
}

/// Intraday multiplier `1 + u·((t - c)/c)²` centered on the session middle.
pub fn u_shape_factor(slot: usize, u_shape: f64) -> f64 {
    let c = (LAST_MINUTE as f64 - 1.0) / 2.0;
    1.0 + u_shape * ((slot as f64 - c) / c).powi(2)
}

/// Full 391-price trading days on consecutive weekdays from 2001-01-02,
/// with an imposed intraday U shape.
pub fn synthetic_prices(instrument_id: &str, model: &PriceModel) -> PriceSeries {
    let slots = LAST_MINUTE as usize;
    let n = model.n_days * slots;
    let eps = normals(n, model.seed);
    let log_vol = if model.clustering > 0.0 {
        long_memory_gaussian(n, 0.6, model.seed ^ 0xC1A5)
    } else {
        vec![0.0; n]
    };
    let mut date = NaiveDate::from_ymd_opt(2001, 1, 2).expect("valid date");
    let mut log_price = 100f64.ln();
    let mut days = Vec::with_capacity(model.n_days);
    for d in 0..model.n_days {
        let mut prices = Vec::with_capacity(slots + 1);
        prices.push((0u16, log_price.exp()));
        for t in 0..slots {
            let i = d * slots + t;
            let scale = model.base_volatility
                * u_shape_factor(t, model.u_shape)
                * (model.clustering * log_vol[i]).exp();
            log_price += scale * eps[i];
            prices.push(((t + 1) as u16, log_price.exp()));
        }
        days.push(TradingDay { date, prices });
        date = next_weekday(date);
    }
    PriceSeries::new(instrument_id, days).expect("generated series satisfies invariants")
}

fn next_weekday(date: NaiveDate) -> NaiveDate {
    let mut next = date + Duration::days(1);
    while matches!(next.weekday(), Weekday::Sat | Weekday::Sun) {
        next += Duration::days(1);
    }
    next
}

/// Renders a price series in the `date,minute,price` input format.
pub fn prices_to_csv(series: &PriceSeries) -> String {
    let mut out = String::from("date,minute,price\n");
    for day in series.days() {
        for &(minute, price) in &day.prices {
            out.push_str(&format!("{},{minute},{price}\n", day.date));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_memory_is_standardized_and_correlated() {
        let x = long_memory_gaussian(4096, 0.6, 1);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
        let lag10: f64 = x.windows(11).map(|w| w[0] * w[10]).sum::<f64>() / (x.len() - 10) as f64;
        assert!(lag10 > 0.05, "lag-10 autocorrelation {lag10}");
    }

    #[test]
    fn prices_round_trip_through_csv() {
        let series = synthetic_prices("SYN", &PriceModel { n_days: 3, ..Default::default() });
        assert_eq!(series.days().len(), 3);
        assert!(series.days().iter().all(|d| d.prices.len() == 391));
        let parsed = crate::volatility::load_prices(prices_to_csv(&series).as_bytes(), "SYN").unwrap();
        assert_eq!(parsed.days().len(), 3);
        for (a, b) in parsed.days().iter().zip(series.days()) {
            assert_eq!(a.date, b.date);
            for (pa, pb) in a.prices.iter().zip(&b.prices) {
                assert_eq!(pa, pb);
            }
        }
    }

    #[test]
    fn weekends_are_skipped() {
        // 2001-01-05 is a Friday.
        let fri = NaiveDate::from_ymd_opt(2001, 1, 5).unwrap();
        assert_eq!(next_weekday(fri), NaiveDate::from_ymd_opt(2001, 1, 8).unwrap());
    }
}
