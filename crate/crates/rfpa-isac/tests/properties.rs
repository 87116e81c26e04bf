//! Property tests over the codec and waveform invariants.

use proptest::prelude::*;

use rfpa_isac::codes::{compose_code, decompose_code};
use rfpa_isac::config::{validate_config, RawConfig, WaveformConfig};
use rfpa_isac::message::{self, bits_per_pulse};
use rfpa_isac::secrets::SecretSequences;
use rfpa_isac::waveform::generate_pulse;

fn cfg_for(scheme: &str, k: usize, m: usize) -> WaveformConfig {
    let mut raw = RawConfig::defaults();
    raw.set("scheme", scheme).unwrap();
    raw.set("K", &k.to_string()).unwrap();
    raw.set("M", &m.to_string()).unwrap();
    raw.set("N", &m.to_string()).unwrap();
    validate_config(&raw).unwrap()
}

fn arb_code(k: usize, m: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((k, m)).prop_perturb(|(k, m), mut rng| {
        let mut pool: Vec<usize> = (0..k).collect();
        (0..m)
            .map(|_| pool.remove(rng.random_range(0..pool.len())))
            .collect()
    })
}

proptest! {
    #[test]
    fn code_factorization_round_trips(code in arb_code(10, 8)) {
        let cfg = cfg_for("SIM", 10, 8);
        let (s, p) = decompose_code(&code, &cfg).unwrap();
        prop_assert_eq!(compose_code(s, p, &cfg).unwrap(), code);
    }

    #[test]
    fn message_encoding_round_trips(scheme in prop::sample::select(vec!["PH", "AMP", "SIM", "HYB"]),
                                    seed in any::<u64>()) {
        let cfg = cfg_for(scheme, 10, 8);
        let mut rng = rfpa_isac::rng::stream_rng(seed, [0, 0, 0]);
        let bits = message::random_bits(bits_per_pulse(&cfg).unwrap(), &mut rng);
        let msg = message::encode_message(&bits, &cfg).unwrap();
        prop_assert_eq!(message::decode_message(&msg, &cfg).unwrap(), bits);
    }

    #[test]
    fn pulse_energy_counts_weighted_samples(seed in any::<u64>()) {
        // Energy equals (samples per chip) * sum of squared amplitudes.
        let cfg = cfg_for("HYB", 10, 8);
        let mut rng = rfpa_isac::rng::stream_rng(seed, [1, 0, 0]);
        let secrets = SecretSequences::random(&cfg, &mut rng);
        let msg = message::random_message(&cfg, &mut rng).unwrap();
        let pulse = generate_pulse(&cfg, &msg, &secrets, 0);
        let mut expected = 0.0;
        for chip in &msg.chips {
            for m in 0..cfg.m {
                expected += chip.amplitude(m, &cfg).powi(2);
            }
        }
        expected *= cfg.samples_per_chip() as f64;
        prop_assert!((pulse.energy() - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn distinct_hop_tones_stay_orthogonal(a in 0usize..10, b in 0usize..10) {
        prop_assume!(a != b);
        let cfg = cfg_for("PH", 10, 8);
        let spc = cfg.samples_per_chip();
        let inner: num_complex::Complex64 = (0..spc)
            .map(|n| {
                let t = n as f64 / cfg.f_s;
                let pa = std::f64::consts::TAU * (a as f64 * cfg.delta_f) * t;
                let pb = std::f64::consts::TAU * (b as f64 * cfg.delta_f) * t;
                num_complex::Complex64::from_polar(1.0, pa)
                    * num_complex::Complex64::from_polar(1.0, -pb)
            })
            .sum();
        prop_assert!(inner.norm() / spc as f64 <= 1e-9);
    }
}
