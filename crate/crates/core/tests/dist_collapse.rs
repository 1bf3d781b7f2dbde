use retscale::dist::{collapse_deviation, empirical_survival, kendall_tau_b, EmpiricalCdf};
use retscale::intervals::{extract_intervals, scaled_intervals};
use retscale::stretchedexp::params_from_gamma;
use retscale::synthetic::clustered_volatility;

fn iid_cdfs(n: usize, thresholds: &[f64], seed: u64) -> Vec<EmpiricalCdf> {
    let p = params_from_gamma(0.3).unwrap();
    thresholds
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let xs = p.sample(n, seed + i as u64);
            let mean = xs.iter().sum::<f64>() / n as f64;
            let scaled: Vec<f64> = xs.iter().map(|x| x / mean).collect();
            empirical_survival(&scaled, q).unwrap()
        })
        .collect()
}

#[test]
fn small_examples() {
    let d = empirical_survival(&[1.0, 1.0, 1.0], 2.0).unwrap();
    assert_eq!(d.at(1.0), 1.0);
    assert_eq!(d.at(1.0 + 1e-12), 0.0);
    let d = empirical_survival(&[0.5, 1.5], 2.0).unwrap();
    assert_eq!((d.at(0.5), d.at(1.5)), (1.0, 0.5));
    assert!(empirical_survival(&[], 1.0).is_err());
}

#[test]
fn identical_curves_have_no_trend() {
    let base = iid_cdfs(2000, &[1.0], 3).remove(0);
    let cdfs: Vec<EmpiricalCdf> = [1.0, 2.0, 3.0].iter().map(|&q| EmpiricalCdf { q, ..base.clone() }).collect();
    let r = collapse_deviation(&cdfs).unwrap();
    assert!(r.points.iter().all(|p| p.trend == 0.0 && p.spread == 0.0));
    assert_eq!((r.sign_below_one, r.sign_above_one), (0, 0));
}

#[test]
fn iid_null_shows_no_significant_trend() {
    let r = collapse_deviation(&iid_cdfs(20_000, &[2.0, 3.0, 4.0], 10)).unwrap();
    assert!(r.points.iter().all(|p| p.p_value >= 0.05));
}

#[test]
fn null_deviation_shrinks_with_sample_size() {
    let q = [1.0, 2.0, 3.0, 4.0, 5.0];
    let small = collapse_deviation(&iid_cdfs(1_000, &q, 50)).unwrap();
    let large = collapse_deviation(&iid_cdfs(100_000, &q, 50)).unwrap();
    assert!(large.max_spread < 0.5 * small.max_spread, "{} vs {}", large.max_spread, small.max_spread);
    assert!(large.mean_abs_slope < 0.5 * small.mean_abs_slope);
}

/// Clustered volatility: higher thresholds give more very short and more
/// very long scaled intervals than a single scaling curve would.
#[test]
fn clustered_record_shows_the_threshold_trend() {
    let v = clustered_volatility(1_000_000, 1.0, 0.4, 8);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
    let v: Vec<f64> = v.iter().map(|x| x / sd).collect();
    let cdfs: Vec<EmpiricalCdf> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&q| empirical_survival(&scaled_intervals(&extract_intervals(&v, q).unwrap()).unwrap(), q).unwrap())
        .collect();
    let r = collapse_deviation(&cdfs).unwrap();
    assert_eq!((r.sign_below_one, r.sign_above_one), (-1, 1), "{} {}", r.trend_below_one, r.trend_above_one);
}

#[test]
fn kendall_reference_values() {
    assert_eq!(kendall_tau_b(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 1.0);
    assert_eq!(kendall_tau_b(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
    // Two concordant, one discordant pair out of three.
    assert!((kendall_tau_b(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(kendall_tau_b(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), 0.0);
}

#[test]
fn collapse_input_errors() {
    let one = iid_cdfs(100, &[1.0], 1);
    assert!(collapse_deviation(&one).is_err());
    let dup = iid_cdfs(100, &[1.0, 1.0], 1);
    assert!(collapse_deviation(&dup).is_err());
}
