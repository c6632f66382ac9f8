use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Exp, Normal};
use wbrelay::channel::{draw_gains, make_correlations, path_sum_gain};
use wbrelay::scheme::decision_stats;
use wbrelay::{GainModel, Link, SystemParams};

/// One-sample Kolmogorov-Smirnov statistic.
fn ks_one(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_two(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

// Asymptotic 5% critical value of the KS statistic is 1.358 / sqrt(n_eff).
const KS_5PCT: f64 = 1.358;

#[test]
fn path_sum_real_part_is_gaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let a_sq = 2.0;
    let re: Vec<f64> = (0..10_000).map(|_| path_sum_gain(64, a_sq, &mut rng).unwrap().re).collect();
    let normal = Normal::new(0.0, (a_sq / 2.0).sqrt()).unwrap();
    let d = ks_one(re, |x| normal.cdf(x));
    assert!(d < KS_5PCT / 100.0, "D = {d}");
}

#[test]
fn path_sum_power_matches_rayleigh_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let n = 10_000;
    let ps: Vec<f64> = (0..n).map(|_| path_sum_gain(32, 1.5, &mut rng).unwrap().norm_sqr()).collect();
    let exp = Exp::new(1.0 / 1.5).unwrap();
    let d = ks_one(ps.clone(), |x| exp.cdf(x));
    assert!(d < KS_5PCT / (n as f64).sqrt(), "one-sample D = {d}");

    let p = SystemParams { a_sq: 1.5, n: 1, ..Default::default() };
    let direct: Vec<f64> = (0..n)
        .map(|_| draw_gains(Link::SR, &p, GainModel::Rayleigh, &mut rng).unwrap().values[0].norm_sqr())
        .collect();
    let d = ks_two(ps, direct);
    assert!(d < KS_5PCT * (2.0 / n as f64).sqrt(), "two-sample D = {d}");
}

#[test]
fn path_sum_mean_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for paths in [1u32, 4, 64] {
        let n = 40_000;
        let mean = (0..n).map(|_| path_sum_gain(paths, 0.7, &mut rng).unwrap().norm_sqr()).sum::<f64>() / n as f64;
        // |G|^2 is exponential with mean 0.7, so the standard error is 0.7 / sqrt(n).
        assert!((mean - 0.7).abs() < 4.0 * 0.7 / (n as f64).sqrt(), "L={paths} mean={mean}");
    }
}

fn column_power(block: &wbrelay::channel::CorrelationBlock, k: usize) -> f64 {
    let c = block.column(k);
    c.iter().map(Complex64::norm_sqr).sum::<f64>() / c.len() as f64
}

#[test]
fn block_moments_per_link() {
    let p = SystemParams { a_sq: 2.0, b_sq: 0.5, gamma: 3.0, snr_base: 1.0, theta: 0.5, n: 200_000, ..Default::default() };
    let rho = p.peak_snr().value();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for (link, expect) in [(Link::SR, 1.0 + 2.0 * rho), (Link::SD, 1.0 + rho), (Link::RD, 1.0 + 1.5 * rho)] {
        let b = make_correlations(link, Some(1), 3, &p, GainModel::Rayleigh, &mut rng).unwrap();
        let sig = column_power(&b, 1);
        // Entries are exponential in power, relative standard error 1/sqrt(N).
        assert!((sig / expect - 1.0).abs() < 4.0 / (p.n as f64).sqrt(), "{link:?}: {sig} vs {expect}");
        for k in [0, 2] {
            assert!((column_power(&b, k) - 1.0).abs() < 4.0 / (p.n as f64).sqrt());
        }
    }
}

#[test]
fn zero_gain_relay_link_is_pure_noise() {
    let p = SystemParams { b_sq: 0.0, snr_base: 50.0, n: 100_000, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let b = make_correlations(Link::RD, Some(0), 2, &p, GainModel::Rayleigh, &mut rng).unwrap();
    assert!((column_power(&b, 0) - 1.0).abs() < 0.02);
}

#[test]
fn source_blocks_are_independent_across_receivers() {
    // Sent-column statistics at the relay and destination share only the
    // message, so across trials they must be uncorrelated.
    let p = SystemParams { a_sq: 1.5, snr_base: 2.0, n: 4, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let trials = 20_000;
    let mut xs = Vec::with_capacity(trials);
    let mut ys = Vec::with_capacity(trials);
    for _ in 0..trials {
        let sr = make_correlations(Link::SR, Some(0), 2, &p, GainModel::Rayleigh, &mut rng).unwrap();
        let sd = make_correlations(Link::SD, Some(0), 2, &p, GainModel::Rayleigh, &mut rng).unwrap();
        xs.push(decision_stats(&sr)[0]);
        ys.push(decision_stats(&sd)[0]);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let cov = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>();
    let vx = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let vy = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>();
    let r = cov / (vx * vy).sqrt();
    assert!(r.abs() < 4.0 / (trials as f64).sqrt(), "r = {r}");
}

#[test]
fn seeded_draws_repeat() {
    let p = SystemParams { n: 32, ..Default::default() };
    let draw = || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = draw_gains(Link::SD, &p, GainModel::PathSum { paths: 8 }, &mut rng).unwrap();
        let b = make_correlations(Link::SR, Some(3), 5, &p, GainModel::Rayleigh, &mut rng).unwrap();
        (g.values, b.column(3).to_vec())
    };
    assert_eq!(draw(), draw());
}
