//! Minute-bar prices to normalized intraday volatility.
//!
//! Volatility is the absolute one-minute log return, divided by the
//! cross-day mean at the same minute of day (removing the intraday U shape)
//! and then by the sample standard deviation of the whole deseasonalized
//! record, so thresholds are expressed in standard deviations.

use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Last minute index of a trading day; a full day has 391 prices.
pub const LAST_MINUTE: u16 = 390;
/// Number of one-minute return slots per day.
pub const SLOTS_PER_DAY: usize = LAST_MINUTE as usize;

#[derive(Debug, Error)]
pub enum VolatilityError {
    #[error("expected CSV header `date,minute,price`, found `{0}`")]
    BadHeader(String),
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("line {line}: non-positive price {price}")]
    NonPositivePrice { line: u64, price: f64 },
    #[error("line {line}: minute {minute} outside 0..={LAST_MINUTE}")]
    MinuteOutOfRange { line: u64, minute: i64 },
    #[error("line {line}: duplicate row for {date} minute {minute}")]
    Duplicate { line: u64, date: NaiveDate, minute: u16 },
    #[error("day {0} has fewer than 2 prices")]
    TooFewPrices(NaiveDate),
    #[error("seasonal profile is zero at minute {0} (price constant at that minute on every day)")]
    ZeroProfile(usize),
    #[error("price series has no trading days")]
    Empty,
    #[error("invalid price series: {0}")]
    Invalid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradingDay {
    pub date: NaiveDate,
    /// `(minute_index, price)`, minute strictly increasing.
    pub prices: Vec<(u16, f64)>,
}

/// Minute-resolution prices of one instrument, grouped by day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    instrument_id: String,
    days: Vec<TradingDay>,
}

impl PriceSeries {
    pub fn new(instrument_id: impl Into<String>, days: Vec<TradingDay>) -> Result<Self, VolatilityError> {
        for w in days.windows(2) {
            if w[0].date >= w[1].date {
                return Err(VolatilityError::Invalid(format!(
                    "days not strictly increasing: {} then {}",
                    w[0].date, w[1].date
                )));
            }
        }
        for day in &days {
            if day.prices.len() > LAST_MINUTE as usize + 1 {
                return Err(VolatilityError::Invalid(format!(
                    "{} has {} prices (at most 391)",
                    day.date,
                    day.prices.len()
                )));
            }
            for w in day.prices.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(VolatilityError::Invalid(format!(
                        "{}: minutes not strictly increasing",
                        day.date
                    )));
                }
            }
            for &(minute, price) in &day.prices {
                if minute > LAST_MINUTE {
                    return Err(VolatilityError::Invalid(format!("{}: minute {minute}", day.date)));
                }
                if !(price > 0.0 && price.is_finite()) {
                    return Err(VolatilityError::Invalid(format!(
                        "{}: non-positive price {price}",
                        day.date
                    )));
                }
            }
        }
        Ok(Self { instrument_id: instrument_id.into(), days })
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn days(&self) -> &[TradingDay] {
        &self.days
    }

    pub fn n_prices(&self) -> usize {
        self.days.iter().map(|d| d.prices.len()).sum()
    }
}

/// Parses a `date,minute,price` CSV stream.
pub fn load_prices<R: Read>(source: R, instrument_id: &str) -> Result<PriceSeries, VolatilityError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["date", "minute", "price"] {
        return Err(VolatilityError::BadHeader(header.iter().collect::<Vec<_>>().join(",")));
    }

    let mut rows: Vec<(NaiveDate, u16, f64, u64)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |reason: String| VolatilityError::Malformed { line, reason };
        if record.len() != 3 {
            return Err(malformed(format!("expected 3 fields, found {}", record.len())));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| malformed(format!("bad date `{}`: {e}", &record[0])))?;
        let minute: i64 = record[1]
            .parse()
            .map_err(|_| malformed(format!("bad minute `{}`", &record[1])))?;
        if !(0..=LAST_MINUTE as i64).contains(&minute) {
            return Err(VolatilityError::MinuteOutOfRange { line, minute });
        }
        let price: f64 = record[2]
            .parse()
            .map_err(|_| malformed(format!("bad price `{}`", &record[2])))?;
        if !price.is_finite() {
            return Err(malformed(format!("non-finite price `{}`", &record[2])));
        }
        if price <= 0.0 {
            return Err(VolatilityError::NonPositivePrice { line, price });
        }
        rows.push((date, minute as u16, price, line));
    }

    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.3.cmp(&b.3)));
    let mut days: Vec<TradingDay> = Vec::new();
    for (i, &(date, minute, price, line)) in rows.iter().enumerate() {
        if i > 0 && rows[i - 1].0 == date && rows[i - 1].1 == minute {
            return Err(VolatilityError::Duplicate { line, date, minute });
        }
        match days.last_mut() {
            Some(day) if day.date == date => day.prices.push((minute, price)),
            _ => days.push(TradingDay { date, prices: vec![(minute, price)] }),
        }
    }
    PriceSeries::new(instrument_id, days)
}

/// One volatility observation: the return from `minute` to the next
/// recorded minute on trading day `day`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityPoint {
    pub day: u32,
    pub minute: u16,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolatilitySeries {
    instrument_id: String,
    points: Vec<VolatilityPoint>,
    seasonal_profile: Vec<f64>,
    normalization_sd: f64,
}

impl VolatilitySeries {
    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn points(&self) -> &[VolatilityPoint] {
        &self.points
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.v).collect()
    }

    /// Mean raw volatility per minute-of-day slot (390 entries).
    pub fn seasonal_profile(&self) -> &[f64] {
        &self.seasonal_profile
    }

    pub fn normalization_sd(&self) -> f64 {
        self.normalization_sd
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Absolute log returns within each day, deseasonalized and scaled to unit
/// sample standard deviation.
///
/// Returns are taken only between consecutive recorded minutes of the same
/// day and are assigned to the slot of their starting minute. Minute slots
/// never observed on any day take the mean of the observed profile so the
/// profile stays positive.
pub fn compute_volatility(p: &PriceSeries) -> Result<VolatilitySeries, VolatilityError> {
    if p.days.is_empty() {
        return Err(VolatilityError::Empty);
    }
    let mut raw: Vec<(u32, u16, f64)> = Vec::with_capacity(p.n_prices());
    for (ordinal, day) in p.days.iter().enumerate() {
        if day.prices.len() < 2 {
            return Err(VolatilityError::TooFewPrices(day.date));
        }
        for w in day.prices.windows(2) {
            let r = (w[1].1.ln() - w[0].1.ln()).abs();
            raw.push((ordinal as u32, w[0].0, r));
        }
    }

    let slots: Vec<(u16, f64)> = raw.iter().map(|&(_, m, r)| (m, r)).collect();
    let profile = seasonal_profile(&slots)?;
    let deseasonalized: Vec<f64> = slots.iter().map(|&(m, r)| r / profile[m as usize]).collect();
    let (values, sd) = normalize(&deseasonalized);

    let points = raw
        .iter()
        .zip(values)
        .map(|(&(day, minute, _), v)| VolatilityPoint { day, minute, v })
        .collect();
    Ok(VolatilitySeries {
        instrument_id: p.instrument_id.clone(),
        points,
        seasonal_profile: profile,
        normalization_sd: sd,
    })
}

/// Cross-day mean per minute slot.
pub(crate) fn seasonal_profile(slots: &[(u16, f64)]) -> Result<Vec<f64>, VolatilityError> {
    let mut sum = vec![0.0; SLOTS_PER_DAY];
    let mut count = vec![0usize; SLOTS_PER_DAY];
    for &(m, r) in slots {
        sum[m as usize] += r;
        count[m as usize] += 1;
    }
    let mut profile = vec![f64::NAN; SLOTS_PER_DAY];
    let (mut observed_sum, mut observed) = (0.0, 0usize);
    for slot in 0..SLOTS_PER_DAY {
        if count[slot] > 0 {
            let mean = sum[slot] / count[slot] as f64;
            if mean == 0.0 {
                return Err(VolatilityError::ZeroProfile(slot));
            }
            profile[slot] = mean;
            observed_sum += mean;
            observed += 1;
        }
    }
    let fill = observed_sum / observed.max(1) as f64;
    for x in profile.iter_mut().filter(|x| x.is_nan()) {
        *x = fill;
    }
    Ok(profile)
}

/// Divides by the sample (N-1) standard deviation. A series with no
/// dispersion is returned unchanged with a reported scale of 1.
pub(crate) fn normalize(values: &[f64]) -> (Vec<f64>, f64) {
    let sd = sample_sd(values);
    if !(sd > 0.0) {
        log::warn!("deseasonalized volatility has zero dispersion; skipping normalization");
        return (values.to_vec(), 1.0);
    }
    (values.iter().map(|u| u / sd).collect(), sd)
}

pub(crate) fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}
