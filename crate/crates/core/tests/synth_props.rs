use std::collections::BTreeMap;
use std::f64::consts::PI;

use gazego_core::synth::{generate_window, measure_impedance, NoiseMix};
use gazego_core::{Command, GazeState, StimulusTable, SynthConfig};

/// |X_k|^2 / n for k = 0..=n/2 by direct summation.
fn naive_periodogram(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, v) in x.iter().enumerate() {
                let a = -2.0 * PI * (k * i) as f64 / n as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            (re * re + im * im) / n as f64
        })
        .collect()
}

fn power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

#[test]
fn realised_snr_matches_config() {
    let stim = StimulusTable::default();
    for snr_db in [-10.0, 0.0, 10.0] {
        let cfg = SynthConfig { snr_db, seed: 3, ..SynthConfig::default() };
        let (mut sig, mut noise) = (0.0, 0.0);
        for id in 0..100 {
            let gazed = generate_window(GazeState::at(Command::Right), &stim, &cfg, id).unwrap();
            let rest = generate_window(GazeState::resting(), &stim, &cfg, id).unwrap();
            for (g, r) in gazed.channels.iter().zip(&rest.channels) {
                let s: Vec<f64> = g.samples.iter().zip(&r.samples).map(|(a, b)| a - b).collect();
                sig += power(&s);
                noise += power(&r.samples);
            }
        }
        let measured = 10.0 * (sig / noise).log10();
        assert!((measured - snr_db).abs() <= 1.0, "configured {snr_db} dB, measured {measured:.2} dB");
    }
}

#[test]
fn pink_noise_has_unit_log_log_slope() {
    let stim = StimulusTable::default();
    let cfg = SynthConfig {
        noise: NoiseMix { pink_weight: 1.0, white_weight: 0.0, alpha_weight: 0.0, ..NoiseMix::default() },
        window_s: 4.0,
        sample_rate_hz: 128.0,
        seed: 8,
        ..SynthConfig::default()
    };
    let n = cfg.n_samples();
    let mut avg = vec![0.0; n / 2 + 1];
    for id in 0..40 {
        let w = generate_window(GazeState::resting(), &stim, &cfg, id).unwrap();
        for (a, p) in avg.iter_mut().zip(naive_periodogram(&w.channels[0].samples)) {
            *a += p;
        }
    }
    let df = cfg.sample_rate_hz / n as f64;
    let pts: Vec<(f64, f64)> = (1..avg.len())
        .map(|k| (k as f64 * df, avg[k]))
        .filter(|(f, _)| (1.0..=50.0).contains(f))
        .map(|(f, p)| (f.ln(), p.ln()))
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let slope = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / pts.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 1.0).abs() <= 0.3, "slope {slope}");
}

#[test]
fn high_snr_up_window_peaks_at_8hz_on_both_channels() {
    let cfg = SynthConfig { snr_db: 60.0, seed: 4, ..SynthConfig::default() };
    let w = generate_window(GazeState::at(Command::Up), &StimulusTable::default(), &cfg, 0).unwrap();
    assert_eq!(w.channels.len(), 2);
    for ch in &w.channels {
        let p = naive_periodogram(&ch.samples);
        let k = (1..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        let f = k as f64 * cfg.sample_rate_hz / ch.samples.len() as f64;
        assert!((f - 8.0).abs() <= 0.25, "{} peak at {f} Hz", ch.label);
    }
}

#[test]
fn resting_window_has_no_8hz_excess() {
    let stim = StimulusTable::default();
    let band = |p: &[f64], lo: f64, hi: f64, df: f64| {
        let ks: Vec<usize> = (0..p.len()).filter(|&k| (lo..hi).contains(&(k as f64 * df))).collect();
        ks.iter().map(|&k| p[k]).sum::<f64>() / ks.len() as f64
    };
    let (mut at8, mut side) = (0.0, 0.0);
    for seed in 0..100 {
        let cfg = SynthConfig { seed, ..SynthConfig::default() };
        let w = generate_window(GazeState::resting(), &stim, &cfg, 0).unwrap();
        let df = cfg.sample_rate_hz / w.len() as f64;
        let p = naive_periodogram(&w.channels[0].samples);
        at8 += band(&p, 7.75, 8.25, df);
        side += 0.5 * (band(&p, 7.25, 7.75, df) + band(&p, 8.25, 8.75, df));
    }
    let ratio_db = 10.0 * (at8 / side).log10();
    assert!(ratio_db.abs() <= 3.0, "8 Hz band is {ratio_db:.2} dB from its neighbours");
}

#[test]
fn impedance_zero_scales_to_zero() {
    let zero: BTreeMap<String, f64> = [("O1".to_string(), 0.0)].into();
    for seed in 0..20 {
        assert_eq!(measure_impedance(&zero, 30.0, seed).per_channel_kohm["O1"], 0.0);
    }
}

#[test]
fn windows_differ_across_ids_but_not_across_calls() {
    let stim = StimulusTable::default();
    let cfg = SynthConfig::default();
    let a = generate_window(GazeState::at(Command::Left), &stim, &cfg, 5).unwrap();
    let b = generate_window(GazeState::at(Command::Left), &stim, &cfg, 6).unwrap();
    assert_ne!(a.channels[0].samples, b.channels[0].samples);
    assert_eq!(b.start_time_s, 12.0);
}
