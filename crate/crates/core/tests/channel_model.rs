use num_complex::Complex64;
use wiretap_core::channel::{draw_channel, effective_channel, OfdmConfig, SubcarrierChannel};
use wiretap_core::linalg::CMatrix;

fn fig2() -> OfdmConfig {
    OfdmConfig {
        n_subcarriers: 64,
        cp_len: 16,
        n_tx: 4,
        n_rx_bob: 2,
        n_rx_eve: 2,
        n_streams: 2,
        n_taps: 8,
        noise_var: 1.0,
        total_power: 100.0,
    }
}

/// Direct evaluation of `Σ_l h(l) exp(-2πi·n·l/N)` without the crate's twiddle table.
fn dft_of_taps(taps: &[Complex64], n: usize, n_sub: usize) -> Complex64 {
    taps.iter()
        .enumerate()
        .map(|(l, h)| {
            let angle = -2.0 * std::f64::consts::PI * (n * l) as f64 / n_sub as f64;
            h * Complex64::new(angle.cos(), angle.sin())
        })
        .sum()
}

fn off_block_ratio(m: &CMatrix, rows: usize, cols: usize) -> f64 {
    let (mut off, mut total) = (0.0, 0.0);
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let v = m[(r, c)].norm_sqr();
            total += v;
            if r / rows != c / cols {
                off += v;
            }
        }
    }
    off / total
}

#[test]
fn fig2_dimensions() {
    let cfg = fig2();
    let ch = draw_channel(&cfg, 1).unwrap();
    assert_eq!(ch.h_block().shape(), (160, 320));
    assert_eq!(ch.g_block().shape(), (160, 320));
    let h = ch.h_eff().unwrap();
    assert_eq!(h.shape(), (128, 256));
    assert!(off_block_ratio(&h, 2, 4) < 1e-9);
    assert_eq!(ch.freq_bob.n_subcarriers(), 64);
    assert_eq!(ch.freq_bob.blocks[0].shape(), (2, 4));
}

#[test]
fn effective_channel_equals_per_subcarrier_dft_of_taps() {
    let cfg = OfdmConfig {
        n_subcarriers: 16,
        cp_len: 5,
        n_tx: 3,
        n_rx_bob: 2,
        n_rx_eve: 1,
        n_streams: 2,
        n_taps: 4,
        noise_var: 1.0,
        total_power: 1.0,
    };
    for seed in 0..5 {
        let ch = draw_channel(&cfg, seed).unwrap();
        for (eff, taps, rx) in [
            (ch.h_eff().unwrap(), &ch.taps_bob, cfg.n_rx_bob),
            (ch.g_eff().unwrap(), &ch.taps_eve, cfg.n_rx_eve),
        ] {
            let oracle = SubcarrierChannel {
                blocks: (0..cfg.n_subcarriers)
                    .map(|n| CMatrix::from_fn(rx, cfg.n_tx, |k, i| dft_of_taps(taps.pair(k, i), n, cfg.n_subcarriers)))
                    .collect(),
            }
            .to_dense();
            assert!((&eff - &oracle).frobenius_norm() < 1e-9 * oracle.frobenius_norm().max(1.0));
            let stored = if rx == cfg.n_rx_bob { &ch.freq_bob } else { &ch.freq_eve };
            for (n, b) in stored.blocks.iter().enumerate() {
                for k in 0..rx {
                    for i in 0..cfg.n_tx {
                        let want = dft_of_taps(taps.pair(k, i), n, cfg.n_subcarriers);
                        assert!((b[(k, i)] - want).norm() < 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn block_channel_drives_effective_channel_function() {
    let cfg = fig2();
    let ch = draw_channel(&cfg, 3).unwrap();
    let via_fn = effective_channel(&ch.g_block(), &cfg, cfg.n_rx_eve).unwrap();
    assert!((&via_fn - &ch.freq_eve.to_dense()).frobenius_norm() < 1e-9);
}

#[test]
fn average_subcarrier_energy_matches_antenna_count() {
    let cfg = OfdmConfig {
        n_subcarriers: 8,
        cp_len: 4,
        ..fig2()
    };
    let cfg = OfdmConfig { n_taps: 3, ..cfg };
    let draws = 10_000;
    let mut acc = 0.0;
    for seed in 0..draws {
        let ch = draw_channel(&cfg, seed).unwrap();
        acc += ch.freq_bob.blocks[(seed % 8) as usize].norm_sqr();
    }
    let mean = acc / draws as f64;
    let expected = (cfg.n_rx_bob * cfg.n_tx) as f64;
    assert!((mean / expected - 1.0).abs() < 0.05, "{mean}");
}

#[test]
fn same_seed_same_bits() {
    let cfg = fig2();
    let a = draw_channel(&cfg, 42).unwrap();
    let b = draw_channel(&cfg, 42).unwrap();
    assert_eq!(a.taps_bob, b.taps_bob);
    assert_eq!(a.taps_eve, b.taps_eve);
    assert_eq!(a.freq_bob, b.freq_bob);
    let c = draw_channel(&cfg, 43).unwrap();
    assert_ne!(a.taps_bob, c.taps_bob);
}

#[test]
fn realization_json_has_config_seed_and_pairs() {
    let cfg = OfdmConfig {
        n_subcarriers: 8,
        cp_len: 2,
        n_taps: 1,
        ..fig2()
    };
    let ch = draw_channel(&cfg, 5).unwrap();
    let v: serde_json::Value = serde_json::to_value(ch.to_record()).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(v["config"]["n_subcarriers"], 8);
    let first = &v["taps_bob"][0][0][0];
    assert_eq!(first.as_array().unwrap().len(), 2);
    assert!(serde_json::from_str::<wiretap_core::channel::RealizationRecord>(r#"{"bogus":1}"#).is_err());
}
