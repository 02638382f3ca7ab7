use proptest::prelude::*;

use scfdma_stbc::channel::{receive, ChannelRealization};
use scfdma_stbc::harness::{ExperimentConfig, ImpairmentPoint, WaveformConfig};
use scfdma_stbc::identifier::{compute_threshold, conj_time_reverse_index, estimate_feature, max_statistic_cdf};
use scfdma_stbc::modem::{alamouti_symmetry_cases, synthesize_frame, BlockParity};
use scfdma_stbc::rng::from_seed;
use scfdma_stbc::theory::{marcum_q1, p_al_given_al_h, peak_template, TheoryInputs};
use scfdma_stbc::{Complex64, Constellation, ImpairmentParams, ScFdmaParams, StbcScheme};

fn constellation() -> impl Strategy<Value = Constellation> {
    prop_oneof![
        Just(Constellation::Qpsk),
        Just(Constellation::Psk8),
        Just(Constellation::Qam16),
        Just(Constellation::Qam64),
    ]
}

fn psk() -> impl Strategy<Value = Constellation> {
    prop_oneof![Just(Constellation::Qpsk), Just(Constellation::Psk8)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn threshold_meets_its_false_alarm_target(p_f in 1e-6f64..0.5, quarter in 4usize..64, cp_frac in 0.01f64..0.5) {
        let n = 4 * quarter;
        let cp = ((n as f64 * cp_frac) as usize).max(1);
        let g = compute_threshold(p_f, n, cp).unwrap();
        prop_assert!(g > 0.0);
        prop_assert!((max_statistic_cdf(g, n, cp) - (1.0 - p_f)).abs() < 1e-12);
    }

    #[test]
    fn marcum_is_a_probability_and_monotone(a in 0.0f64..30.0, b in 0.0f64..30.0, da in 0.0f64..2.0, db in 0.0f64..2.0) {
        let q = marcum_q1(a, b).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert!(marcum_q1(a + da, b).unwrap() >= q - 1e-12);
        prop_assert!(marcum_q1(a, b + db).unwrap() <= q + 1e-12);
    }

    #[test]
    fn alamouti_frames_satisfy_the_shifted_identity(
        quarter in 4usize..40,
        cp in 1usize..12,
        k in constellation(),
        seed in any::<u64>(),
    ) {
        let n = 4 * quarter;
        prop_assume!(cp < n / 4);
        let p = ScFdmaParams::interleaved(n, 2, cp, k).unwrap();
        let f = synthesize_frame(&mut from_seed(seed), StbcScheme::Alamouti, &p, 6).unwrap();
        let b = p.block_len();
        for case in alamouti_symmetry_cases(n, cp) {
            let first = if case.parity == BlockParity::Even { 0 } else { 1 };
            let x0 = &f.antennas[0][case.tau..];
            let x1 = &f.antennas[1][case.tau..];
            for i in (first..x0.len() / b - 1).step_by(2) {
                for r in &case.ranges {
                    for m in r.clone() {
                        let d = x0[i * b + m] - x1[(i + 1) * b + conj_time_reverse_index(m, n, cp)].conj();
                        prop_assert!(d.norm() < 1e-12, "tau {} i {} n {}", case.tau, i, m);
                    }
                }
            }
        }
    }

    #[test]
    fn statistic_ignores_gain_and_phase(seed in any::<u64>(), gain in 0.01f64..100.0, phase in 0.0f64..6.3) {
        let p = ScFdmaParams::interleaved(32, 2, 5, Constellation::Qpsk).unwrap();
        let mut r = from_seed(seed);
        let f = synthesize_frame(&mut r, StbcScheme::Alamouti, &p, 12).unwrap();
        let rx = receive(&mut r, &f, &ChannelRealization::flat_unit(), &ImpairmentParams::at_snr(5.0), None).unwrap();
        let rot = Complex64::from_polar(gain, phase);
        let scaled: Vec<Complex64> = rx.samples.iter().map(|v| v * rot).collect();
        let a = estimate_feature(&rx.samples, &p).unwrap();
        let b = estimate_feature(&scaled, &p).unwrap();
        for (x, y) in a.g.iter().zip(&b.g) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x));
        }
        let rot4 = rot.powi(4);
        for (x, y) in a.a_r.iter().zip(&b.a_r) {
            prop_assert!((x * rot4 - y).norm() <= 1e-9 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn template_scales_quartically(k in psk(), re in -2.0f64..2.0, im in -2.0f64..2.0, seed in any::<u64>()) {
        prop_assume!(re.abs() + im.abs() > 0.05);
        let p = ScFdmaParams::interleaved(32, 2, 5, k).unwrap();
        let ch = scfdma_stbc::channel::draw_channel(&mut from_seed(seed), 2).unwrap();
        let scale = Complex64::new(re, im);
        let base = peak_template(StbcScheme::Alamouti, &TheoryInputs::new(p, ch.clone(), 0.0, 100, 1e-3)).unwrap();
        let big = peak_template(StbcScheme::Alamouti, &TheoryInputs::new(p, ch.scaled(scale), 0.0, 100, 1e-3)).unwrap();
        let c4 = scale.powi(4);
        for tau in base.support() {
            let want = base.get(tau) * c4;
            prop_assert!((big.get(tau) - want).norm() <= 1e-9 * want.norm().max(1e-12));
        }
    }

    #[test]
    fn detection_grows_with_observation_length(k in psk(), seed in any::<u64>(), snr in -10.0f64..5.0, nb in 20usize..400) {
        let p = ScFdmaParams::interleaved(32, 2, 5, k).unwrap();
        let ch = scfdma_stbc::channel::draw_channel(&mut from_seed(seed), 1).unwrap();
        let noise = ch.energy() / 2.0 / 10f64.powf(snr / 10.0);
        let short = p_al_given_al_h(&TheoryInputs::new(p, ch.clone(), noise, nb, 1e-2)).unwrap();
        let long = p_al_given_al_h(&TheoryInputs::new(p, ch, noise, nb * 2, 1e-2)).unwrap();
        prop_assert!((0.0..=1.0).contains(&short));
        prop_assert!(long >= short - 1e-12);
    }

    #[test]
    fn configs_round_trip(
        seed in any::<u64>(),
        trials in 1usize..5000,
        n_blocks in 6usize..5000,
        snr in prop::collection::vec(-30.0f64..40.0, 1..5),
        quarter in 4usize..64,
        k in constellation(),
        mu in 0.0f64..0.99,
        df in -1e-2f64..1e-2,
        fd in 0.0f64..1e-2,
    ) {
        let mut cfg = ExperimentConfig::desk();
        cfg.seed = seed;
        cfg.trials = trials;
        cfg.n_blocks = n_blocks;
        cfg.snr_db = snr;
        cfg.waveforms = vec![WaveformConfig::interleaved(4 * quarter, 2, quarter, k)];
        cfg.impairments = vec![ImpairmentPoint { timing_offset: mu, freq_offset: df, doppler: fd }];
        let text = cfg.to_toml_string();
        prop_assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
