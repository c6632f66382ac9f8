use proptest::prelude::*;
use wbrelay::analysis::{
    block_markov_lower, chernoff_exponent, cutset_upper, exact_end_to_end, exact_tails, g_function, min_cut_rate,
    special,
};
use wbrelay::binning::{bin_members, join, split};
use wbrelay::{CodebookParams, SystemParams, Thresholds};

fn params(a_sq: f64, b_sq: f64, gamma: f64, t_d: f64) -> SystemParams {
    SystemParams { a_sq, b_sq, gamma, t_d, t_s: 1.0, t_c: 2.0, ..Default::default() }
}

proptest! {
    #[test]
    fn split_join_is_a_bijection(m_r in 1u64..50, m_d in 1u64..50, seed in any::<u64>()) {
        let cb = CodebookParams { m_r, m_d };
        let m = seed % cb.m_s();
        let (m1, m2) = split(m, &cb).unwrap();
        prop_assert!(m1 < m_r && m2 < m_d);
        prop_assert_eq!(join(m1, m2, &cb).unwrap(), m);
        prop_assert!(bin_members(m1, &cb).unwrap().contains(&m));
    }

    #[test]
    fn lower_bound_never_exceeds_cutset(a in 0.0f64..10.0, b in 0.0f64..10.0, g in 0.0f64..10.0) {
        let p = params(a, b, g, 0.0);
        prop_assert!(block_markov_lower(&p) <= cutset_upper(&p));
        prop_assert_eq!(min_cut_rate(&p), block_markov_lower(&p));
    }

    #[test]
    fn guard_time_only_scales_the_min_cut(a in 0.0f64..5.0, b in 0.0f64..5.0, td in 0.0f64..0.49) {
        let p0 = params(a, b, 1.0, 0.0);
        let p = params(a, b, 1.0, td);
        let expect = min_cut_rate(&p0) * (1.0 - 2.0 * td / 2.0);
        prop_assert!((min_cut_rate(&p) - expect).abs() <= 1e-12 * expect.max(1.0));
    }

    #[test]
    fn min_cut_is_monotone_in_a_sq(a in 0.0f64..5.0, da in 0.0f64..1.0, bg in 0.0f64..3.0) {
        prop_assert!(min_cut_rate(&params(a, bg, 1.0, 0.0)) <= min_cut_rate(&params(a + da, bg, 1.0, 0.0)));
    }

    #[test]
    fn tails_are_complementary_and_monotone(n in 1u32..300, a in 0.01f64..10.0, da in 0.001f64..1.0, s in 0.1f64..20.0) {
        let t = exact_tails(n, a, s).unwrap();
        prop_assert!((t.below + t.above - 1.0).abs() < 1e-12);
        let t2 = exact_tails(n, a + da, s).unwrap();
        prop_assert!(t2.below >= t.below);
        let t3 = exact_tails(n, a, s * 1.5).unwrap();
        prop_assert!(t3.below <= t.below);
    }

    #[test]
    fn chernoff_dominates_exact_tail(n in 1u32..400, a in 1.001f64..20.0) {
        let t = exact_tails(n, a, 1.0).unwrap();
        prop_assert!(t.ln_above < -(n as f64) * chernoff_exponent(a).unwrap());
    }

    #[test]
    fn g_is_maximized_at_one_minus_inverse(a in 1.01f64..20.0, u in 0.0f64..0.999) {
        prop_assert!(g_function(a, u).unwrap() <= chernoff_exponent(a).unwrap() + 1e-12);
    }

    #[test]
    fn incomplete_gamma_is_a_distribution(a in 0.1f64..200.0, x in 0.0f64..400.0) {
        let p = special::gamma_p(a, x).unwrap();
        let q = special::gamma_q(a, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
        prop_assert!((p + q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_report_is_consistent(
        a in 0.0f64..4.0, b in 0.0f64..4.0, snr in 0.05f64..5.0, n in 1u32..64,
        m_r in 1u64..8, m_d in 1u64..8,
    ) {
        let p = SystemParams { a_sq: a, b_sq: b, snr_base: snr, n, ..Default::default() };
        let cb = CodebookParams { m_r, m_d };
        let e = exact_end_to_end(&p, &cb, &Thresholds::from_params(&p)).unwrap();
        for v in [e.p_e11, e.p_e12, e.p_e2, e.p_bin_error, e.p_e_total, e.p_tag_e11, e.p_tag_e12, e.p_tag_e2] {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }
        prop_assert!((e.p_tag_e11 + e.p_tag_e12 + e.p_tag_e2 - e.p_e_total).abs() < 1e-10);
        prop_assert!(e.p_e_total <= e.p_bin_error + e.p_e2 + 1e-12);
    }
}
