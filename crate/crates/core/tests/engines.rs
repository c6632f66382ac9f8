//! Monte Carlo engines against the exact error probabilities.

use wbrelay::analysis::{exact_end_to_end, exact_tails, ExactErrorReport};
use wbrelay::harness::{simulate, wilson_interval, BatchCounts};
use wbrelay::{CodebookParams, Engine, GainModel, SystemParams, Thresholds, TrialSetup};

// Two-sided 99.9% normal quantile: several comparisons per test.
const Z: f64 = 3.290_526_731_491_926;

fn check(label: &str, k: u64, n: u64, p: f64) {
    let (lo, hi) = wilson_interval(k, n, Z);
    assert!(p >= lo && p <= hi, "{label}: exact {p} outside [{lo}, {hi}] ({k}/{n})");
}

/// Block error rate and each conditional stage error rate.
fn check_all(label: &str, c: &BatchCounts, e: &ExactErrorReport) {
    check(&format!("{label} total"), c.errors(), c.trials, e.p_e_total);
    check(&format!("{label} e11"), c.trials - c.relay_ok, c.trials, e.p_e11);
    check(&format!("{label} e12"), c.relay_ok - c.bin_ok_given_relay_ok, c.relay_ok, e.p_e12);
    check(&format!("{label} e2"), c.bin_ok - c.none, c.bin_ok, e.p_e2);
    check(&format!("{label} bin"), c.trials - c.bin_ok, c.trials, e.p_bin_error);
    check(&format!("{label} tag e11"), c.e11, c.trials, e.p_tag_e11);
    check(&format!("{label} tag e12"), c.e12, c.trials, e.p_tag_e12);
    check(&format!("{label} tag e2"), c.e2, c.trials, e.p_tag_e2);
}

fn configs() -> Vec<(SystemParams, CodebookParams)> {
    let base = SystemParams { a_sq: 2.0, b_sq: 1.0, eps: 0.5, eps1: 0.5, eps2: 0.5, ..Default::default() };
    vec![
        (SystemParams { snr_base: 2.0, n: 6, ..base }, CodebookParams { m_r: 2, m_d: 2 }),
        (SystemParams { snr_base: 1.0, n: 4, ..base }, CodebookParams { m_r: 4, m_d: 2 }),
        (SystemParams { snr_base: 3.0, n: 16, a_sq: 1.3, ..base }, CodebookParams { m_r: 2, m_d: 4 }),
        (SystemParams { snr_base: 1.5, n: 5, b_sq: 0.2, gamma: 2.0, ..base }, CodebookParams { m_r: 3, m_d: 3 }),
        (SystemParams { snr_base: 2.0, n: 6, a_sq: 0.5, ..base }, CodebookParams { m_r: 1, m_d: 8 }),
    ]
}

#[test]
fn both_engines_match_exact() {
    for (i, (p, cb)) in configs().into_iter().enumerate() {
        let exact = exact_end_to_end(&p, &cb, &Thresholds::from_params(&p)).unwrap();
        for engine in [Engine::Correlation, Engine::Sparse] {
            let setup = TrialSetup::new(p, cb).unwrap().engine(engine);
            let c = simulate(&setup, 40_000, 1000 + i as u64).unwrap();
            check_all(&format!("config {i} {engine:?}"), &c, &exact);
        }
    }
}

#[test]
fn path_sum_gains_match_exact() {
    let (p, cb) = configs()[0];
    let exact = exact_end_to_end(&p, &cb, &Thresholds::from_params(&p)).unwrap();
    let setup = TrialSetup::new(p, cb).unwrap().engine(Engine::Correlation).gain_model(GainModel::PathSum { paths: 32 });
    let c = simulate(&setup, 20_000, 77).unwrap();
    check_all("path sum", &c, &exact);
}

#[test]
fn engines_agree_on_custom_thresholds() {
    // Thresholds below the noise mean make decision sets crowded.
    let p = SystemParams { a_sq: 2.0, snr_base: 1.0, n: 3, ..Default::default() };
    let cb = CodebookParams { m_r: 2, m_d: 3 };
    let t = Thresholds { a_r: 0.9, b_r: 2.5, b_s: 1.7 };
    let exact = exact_end_to_end(&p, &cb, &t).unwrap();
    for engine in [Engine::Correlation, Engine::Sparse] {
        let setup = TrialSetup::with_thresholds(p, cb, t).unwrap().engine(engine);
        let c = simulate(&setup, 40_000, 5).unwrap();
        check_all(&format!("{engine:?}"), &c, &exact);
    }
}

#[test]
fn near_zero_snr_matches_pure_noise_decoding() {
    // With no signal every statistic is noise, so the destination succeeds
    // only if exactly the right bin and then exactly the right tone exceed
    // their thresholds, whatever the relay did.
    let p = SystemParams { snr_base: 1e-12, n: 4, ..Default::default() };
    let cb = CodebookParams { m_r: 2, m_d: 2 };
    let t = Thresholds::from_params(&p);
    let q = |a: f64| exact_tails(p.n, a, 1.0).unwrap().above;
    let (fr, fs) = (q(t.b_r), q(t.b_s));
    let success = fr * (1.0 - fr).powi(cb.m_r as i32 - 1) * fs * (1.0 - fs).powi(cb.m_d as i32 - 1);
    let exact = exact_end_to_end(&p, &cb, &t).unwrap();
    assert!((exact.p_e_total - (1.0 - success)).abs() < 1e-9);
    for engine in [Engine::Correlation, Engine::Sparse] {
        let setup = TrialSetup::new(p, cb).unwrap().engine(engine);
        let c = simulate(&setup, 40_000, 8).unwrap();
        check(&format!("{engine:?}"), c.errors(), c.trials, 1.0 - success);
    }
}

#[test]
fn union_structure_holds_on_every_batch() {
    for (i, (p, cb)) in configs().into_iter().enumerate() {
        let setup = TrialSetup::new(p, cb).unwrap();
        let c = simulate(&setup, 5_000, i as u64).unwrap();
        let n = c.trials as f64;
        let p_err = c.errors() as f64 / n;
        let p_e1 = (c.trials - c.bin_ok) as f64 / n;
        let p_e2 = (c.bin_ok - c.none) as f64 / c.bin_ok.max(1) as f64;
        assert!(p_err <= p_e1 + p_e2 + 1e-12, "config {i}");
        assert_eq!(c.none + c.e11 + c.e12 + c.e2, c.trials);
    }
}

#[test]
fn sparse_engine_handles_huge_codebooks() {
    let p = SystemParams { a_sq: 1.5, b_sq: 1.5, snr_base: 0.12, theta: 0.1, n: 128, eps: 0.5, eps1: 0.5, eps2: 0.5, ..Default::default() };
    let cb = CodebookParams { m_r: 1 << 20, m_d: 1 << 28 };
    let exact = exact_end_to_end(&p, &cb, &Thresholds::from_params(&p)).unwrap();
    let setup = TrialSetup::new(p, cb).unwrap();
    assert_eq!(setup.resolved_engine(), Engine::Sparse);
    let c = simulate(&setup, 4_000, 3).unwrap();
    check("huge", c.errors(), c.trials, exact.p_e_total);
}

#[test]
fn exact_stage_errors_fall_with_n() {
    // Thresholds strictly between the noise mean and the signal power.
    let cb = CodebookParams { m_r: 4, m_d: 4 };
    let mut prev: Option<ExactErrorReport> = None;
    for n in [4u32, 8, 16, 32, 64, 128] {
        let p = SystemParams { a_sq: 2.0, b_sq: 1.0, snr_base: 1.0, n, ..Default::default() };
        let e = exact_end_to_end(&p, &cb, &Thresholds::from_params(&p)).unwrap();
        if let Some(q) = prev {
            assert!(e.p_e11 <= q.p_e11 && e.p_e12 <= q.p_e12 && e.p_e2 <= q.p_e2 && e.p_e_total <= q.p_e_total, "n={n}");
        }
        prev = Some(e);
    }
}
