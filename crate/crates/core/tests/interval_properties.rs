use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use retscale::intervals::{
    extract_intervals, moment, scaled_intervals, sweep_thresholds, SweepConfig,
};
use retscale::simulate::default_targets;
use retscale::synthetic::clustered_volatility;

fn series() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..5.0, 2..400)
}

proptest! {
    #[test]
    fn first_moment_is_one(v in series(), q in 0.1f64..4.0) {
        let s = extract_intervals(&v, q).unwrap();
        prop_assume!(!s.is_empty());
        prop_assert!((moment(&s, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let scaled = scaled_intervals(&s).unwrap();
        let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
        prop_assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_nondecreasing_in_order(v in series(), q in 0.1f64..4.0) {
        let s = extract_intervals(&v, q).unwrap();
        prop_assume!(!s.is_empty());
        let mus: Vec<f64> = [0.1, 0.5, 1.0, 2.0, 3.0, 6.0].iter().map(|&m| moment(&s, m).unwrap()).collect();
        for w in mus.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12), "{mus:?}");
        }
    }

    #[test]
    fn monotone_transform_invariance(v in series(), q in 0.1f64..4.0) {
        let base = extract_intervals(&v, q).unwrap();
        let t = |x: f64| (1.0 + x).ln() * 3.0 + 0.5;
        let moved: Vec<f64> = v.iter().map(|&x| t(x)).collect();
        let other = extract_intervals(&moved, t(q)).unwrap();
        prop_assert_eq!(base.taus, other.taus);
    }

    #[test]
    fn intervals_fit_inside_the_record(v in series(), q in 0.1f64..4.0) {
        let s = extract_intervals(&v, q).unwrap();
        let exceed = v.iter().filter(|&&x| x > q).count();
        prop_assert_eq!(s.n_exceedances, exceed);
        prop_assert_eq!(s.taus.len(), exceed.saturating_sub(1));
        prop_assert!(s.taus.iter().all(|&t| t >= 1));
        let first = s.first_exceedance.unwrap_or(0) as u64;
        prop_assert!(s.taus.iter().sum::<u64>() + first <= v.len() as u64);
        if let Some(m) = s.mean_tau {
            let direct = s.taus.iter().sum::<u64>() as f64 / s.taus.len() as f64;
            prop_assert!((m - direct).abs() <= 1e-12 * direct);
        }
    }
}

#[test]
fn hand_examples() {
    let s = extract_intervals(&[0.0, 3.0, 0.0, 0.0, 3.0, 0.0, 3.0], 2.0).unwrap();
    assert_eq!(s.taus, vec![3, 2]);
    assert_eq!(s.mean_tau, Some(2.5));
    assert!(extract_intervals(&[1.0, 2.0], 3.0).unwrap().is_empty());
    let s = retscale::IntervalSeries::from_taus(1.0, vec![2, 2, 2]);
    assert_eq!(scaled_intervals(&s).unwrap(), vec![1.0, 1.0, 1.0]);
}

/// Exceedances of i.i.d. values are Bernoulli trials, so intervals are
/// geometric with mean `1/p`.
#[test]
fn bernoulli_mean_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let v: Vec<f64> = (0..400_000).map(|_| rng.sample::<f64, _>(StandardNormal).abs()).collect();
    // P(|Z| > 2) = erfc(2/√2).
    let p: f64 = 0.045_500_263_896_358_4;
    let s = extract_intervals(&v, 2.0).unwrap();
    let expected = 1.0 / p;
    let sd_tau = ((1.0 - p) / (p * p)).sqrt();
    let se = sd_tau / (s.taus.len() as f64).sqrt();
    let got = s.mean_tau.unwrap();
    assert!((got - expected).abs() < 3.0 * se, "{got} vs {expected} ± {se}");
}

#[test]
fn sweep_hits_targets_on_a_full_length_record() {
    let v = clustered_volatility(195_000, 0.8, 0.4, 21);
    let sweep = sweep_thresholds(&v, &default_targets(), &SweepConfig::default()).unwrap();
    assert!(sweep.warnings.is_empty(), "{:?}", sweep.warnings);
    assert_eq!(sweep.entries.len(), default_targets().len());
    for e in &sweep.entries {
        let got = e.series.mean_tau.unwrap();
        assert!((got - e.target).abs() <= 0.1 * e.target, "target {} got {got}", e.target);
    }
    assert!(sweep.entries.windows(2).all(|w| w[0].series.q <= w[1].series.q));
}

#[test]
fn sweep_all_exceed_limit() {
    let v = vec![1.0; 500];
    let sweep = sweep_thresholds(&v, &[1.0], &SweepConfig::default()).unwrap();
    assert_eq!(sweep.entries.len(), 1);
    assert_eq!(sweep.entries[0].series.mean_tau, Some(1.0));
}

#[test]
fn sweep_reports_unreachable_targets() {
    let v = clustered_volatility(5_000, 0.5, 0.4, 2);
    let sweep = sweep_thresholds(&v, &[0.5, 10.0, 5_000.0], &SweepConfig::default()).unwrap();
    assert_eq!(sweep.entries.len(), 1);
    assert_eq!(sweep.warnings.len(), 2);
}
