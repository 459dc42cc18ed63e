//! Synthetic two-channel occipital EEG with an SSVEP response at the gazed
//! stimulus frequency, plus the pre-session electrode impedance check.
//!
//! A window is a pure function of `(gaze, stimulus table, config, window_id)`.
//! The SSVEP component is a fundamental plus harmonics with per-session
//! random phases, evaluated on the absolute session clock so consecutive
//! windows are phase-continuous. Noise is a per-window mixture of unit-power
//! pink (1/f), white and alpha-band (centre ±1 Hz) components, scaled so the
//! SSVEP-to-noise power ratio equals `snr_db`. Noise power does not depend on
//! the gaze, so a resting window carries the same noise floor.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::{Command, StimulusTable};
use crate::rng;
use crate::spectral;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub label: String,
    pub samples: Vec<f64>,
}

/// Fixed-duration multi-channel sample block, amplitudes in microvolts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalWindow {
    pub channels: Vec<Channel>,
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub window_id: u64,
}

impl SignalWindow {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.samples.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }

    /// CSV dump with header `time_s,<label>_uv,...`, six decimals, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s");
        for c in &self.channels {
            let _ = write!(out, ",{}_uv", c.label);
        }
        out.push('\n');
        for i in 0..self.len() {
            let t = self.start_time_s + i as f64 / self.sample_rate_hz;
            let _ = write!(out, "{t:.6}");
            for c in &self.channels {
                let _ = write!(out, ",{:.6}", c.samples[i]);
            }
            out.push('\n');
        }
        out
    }
}

/// Where the subject is looking. `None` means resting: no SSVEP component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GazeState {
    pub target: Option<Command>,
}

impl GazeState {
    pub fn at(command: Command) -> Self {
        Self { target: Some(command) }
    }

    pub fn resting() -> Self {
        Self { target: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseMix {
    pub pink_weight: f64,
    pub white_weight: f64,
    pub alpha_weight: f64,
    pub alpha_center_hz: f64,
}

impl Default for NoiseMix {
    fn default() -> Self {
        Self {
            pink_weight: 0.7,
            white_weight: 0.2,
            alpha_weight: 0.1,
            alpha_center_hz: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub target_amp_uv: f64,
    /// Relative amplitudes of harmonics 2..H; the fundamental is 1.0.
    pub harmonic_rel_amps: Vec<f64>,
    pub snr_db: f64,
    pub noise: NoiseMix,
    pub sample_rate_hz: f64,
    pub window_s: f64,
    pub channel_labels: Vec<String>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            target_amp_uv: 10.0,
            harmonic_rel_amps: vec![0.5, 0.25],
            snr_db: 0.0,
            noise: NoiseMix::default(),
            sample_rate_hz: 256.0,
            window_s: 2.0,
            channel_labels: vec!["O1".to_string(), "O2".to_string()],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
}

impl SynthConfig {
    pub fn n_samples(&self) -> usize {
        (self.window_s * self.sample_rate_hz).round() as usize
    }

    /// `[1.0, rel_2, rel_3, ...]`.
    pub fn harmonic_amps(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.harmonic_rel_amps.iter().copied())
            .map(|r| r * self.target_amp_uv)
            .collect()
    }

    /// Mean power of the SSVEP component (sum of `a^2 / 2` over harmonics).
    pub fn signal_power(&self) -> f64 {
        self.harmonic_amps().iter().map(|a| a * a / 2.0).sum()
    }

    pub fn noise_power(&self) -> f64 {
        self.signal_power() / 10f64.powf(self.snr_db / 10.0)
    }

    pub fn validate(&self, stim: &StimulusTable) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if !(self.target_amp_uv.is_finite() && self.target_amp_uv > 0.0) {
            return bad("target_amp_uv must be positive".into());
        }
        if self.harmonic_rel_amps.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("harmonic_rel_amps must lie in [0, 1]".into());
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        let n = &self.noise;
        let weights = [n.pink_weight, n.white_weight, n.alpha_weight];
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("noise weights must be non-negative".into());
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("noise weights must sum to 1".into());
        }
        if !(n.alpha_center_hz.is_finite() && n.alpha_center_hz > 1.0) {
            return bad("alpha_center_hz must exceed 1 Hz".into());
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return bad("sample_rate_hz must be positive".into());
        }
        if !(self.window_s.is_finite() && self.window_s > 0.0) || self.n_samples() < 2 {
            return bad("window must hold at least two samples".into());
        }
        if self.channel_labels.is_empty() {
            return bad("at least one channel is required".into());
        }
        let highest = stim.max_frequency() * (1 + self.harmonic_rel_amps.len()) as f64;
        if self.sample_rate_hz < 2.0 * highest {
            return bad(format!(
                "sample rate {} Hz violates Nyquist for harmonic at {} Hz",
                self.sample_rate_hz, highest
            ));
        }
        Ok(())
    }
}

fn unit_power(mut x: Vec<f64>) -> Vec<f64> {
    let m = spectral::mean(&x);
    let v = spectral::variance(&x);
    let scale = if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 };
    for s in &mut x {
        *s = (*s - m) * scale;
    }
    x
}

/// Noise-only samples for one channel: unit total power before scaling.
fn noise_channel(cfg: &SynthConfig, window_id: u64, channel: usize) -> Vec<f64> {
    let n = cfg.n_samples();
    let fs = cfg.sample_rate_hz;
    let idx = (window_id << 8) | channel as u64;
    let mut out = vec![0.0; n];
    let mix = &cfg.noise;
    let mut add = |weight: f64, component: Vec<f64>| {
        let w = weight.sqrt();
        for (o, c) in out.iter_mut().zip(component) {
            *o += w * c;
        }
    };
    if mix.pink_weight > 0.0 {
        let mut r = rng::stream(cfg.seed, "synth/pink", idx);
        add(mix.pink_weight, unit_power(spectral::shaped_noise(n, fs, &mut r, |f| f.sqrt().recip())));
    }
    if mix.white_weight > 0.0 {
        let mut r = rng::stream(cfg.seed, "synth/white", idx);
        add(mix.white_weight, unit_power((0..n).map(|_| r.sample(StandardNormal)).collect()));
    }
    if mix.alpha_weight > 0.0 {
        let mut r = rng::stream(cfg.seed, "synth/alpha", idx);
        let c = mix.alpha_center_hz;
        let band = spectral::shaped_noise(n, fs, &mut r, |f| if (f - c).abs() <= 1.0 { 1.0 } else { 0.0 });
        add(mix.alpha_weight, unit_power(band));
    }
    out
}

/// Per-session random phases, one per harmonic, shared by all channels.
pub fn session_phases(cfg: &SynthConfig) -> Vec<f64> {
    let mut r = rng::stream(cfg.seed, "synth/phase", 0);
    (0..=cfg.harmonic_rel_amps.len()).map(|_| r.random::<f64>() * 2.0 * PI).collect()
}

/// SSVEP component only (no noise) for the given window.
pub fn ssvep_component(freq_hz: f64, cfg: &SynthConfig, window_id: u64) -> Vec<f64> {
    let n = cfg.n_samples();
    let fs = cfg.sample_rate_hz;
    let t0 = window_id as f64 * cfg.window_s;
    let amps = cfg.harmonic_amps();
    let phases = session_phases(cfg);
    (0..n)
        .map(|i| {
            let t = t0 + i as f64 / fs;
            amps.iter()
                .zip(&phases)
                .enumerate()
                .map(|(h, (a, p))| a * (2.0 * PI * (h + 1) as f64 * freq_hz * t + p).sin())
                .sum()
        })
        .collect()
}

pub fn generate_window(
    gaze: GazeState,
    stim: &StimulusTable,
    cfg: &SynthConfig,
    window_id: u64,
) -> Result<SignalWindow, SynthError> {
    cfg.validate(stim)?;
    let signal = gaze.target.map(|c| ssvep_component(stim.frequency(c), cfg, window_id));
    let noise_scale = cfg.noise_power().sqrt();
    let channels = cfg
        .channel_labels
        .iter()
        .enumerate()
        .map(|(ch, label)| {
            let mut samples = noise_channel(cfg, window_id, ch);
            for s in &mut samples {
                *s *= noise_scale;
            }
            if let Some(sig) = &signal {
                for (s, v) in samples.iter_mut().zip(sig) {
                    *s += v;
                }
            }
            Channel { label: label.clone(), samples }
        })
        .collect();
    Ok(SignalWindow {
        channels,
        sample_rate_hz: cfg.sample_rate_hz,
        start_time_s: window_id as f64 * cfg.window_s,
        window_id,
    })
}

/// Per-channel scalp contact impedance in kilo-ohms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceReport {
    pub per_channel_kohm: BTreeMap<String, f64>,
}

pub const DEFAULT_IMPEDANCE_THRESHOLD_KOHM: f64 = 200.0;

/// Simulated meter reading: each true value times `1 + u`, `u` uniform in
/// `±jitter_pct / 100`.
pub fn measure_impedance(true_kohm: &BTreeMap<String, f64>, jitter_pct: f64, seed: u64) -> ImpedanceReport {
    let jitter = jitter_pct.clamp(0.0, 50.0) / 100.0;
    let mut r = rng::stream(seed, "impedance", 0);
    let per_channel_kohm = true_kohm
        .iter()
        .map(|(label, &v)| {
            let u = if jitter > 0.0 { r.random_range(-jitter..=jitter) } else { 0.0 };
            (label.clone(), v * (1.0 + u))
        })
        .collect();
    ImpedanceReport { per_channel_kohm }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceCheck {
    pub per_channel_pass: BTreeMap<String, bool>,
    pub gate_open: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImpedanceError {
    #[error("impedance report has no channels")]
    EmptyReport,
}

pub fn check_impedance(report: &ImpedanceReport, threshold_kohm: f64) -> Result<ImpedanceCheck, ImpedanceError> {
    if report.per_channel_kohm.is_empty() {
        return Err(ImpedanceError::EmptyReport);
    }
    let per_channel_pass: BTreeMap<String, bool> = report
        .per_channel_kohm
        .iter()
        .map(|(label, &v)| (label.clone(), v <= threshold_kohm))
        .collect();
    let gate_open = per_channel_pass.values().all(|&p| p);
    Ok(ImpedanceCheck { per_channel_pass, gate_open })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kohm(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn window_shape_follows_config() {
        let cfg = SynthConfig::default();
        let w = generate_window(GazeState::at(Command::Up), &StimulusTable::default(), &cfg, 3).unwrap();
        assert_eq!(w.channels.len(), 2);
        assert_eq!(w.channels[0].label, "O1");
        assert_eq!(w.channels[1].label, "O2");
        assert!(w.channels.iter().all(|c| c.samples.len() == 512));
        assert_eq!(w.start_time_s, 6.0);
        assert_eq!(w.window_id, 3);
    }

    #[test]
    fn repeated_calls_are_bit_identical() {
        let cfg = SynthConfig { seed: 99, ..SynthConfig::default() };
        let stim = StimulusTable::default();
        let a = generate_window(GazeState::at(Command::Right), &stim, &cfg, 7).unwrap();
        let b = generate_window(GazeState::at(Command::Right), &stim, &cfg, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn nyquist_and_weights_are_validated() {
        let stim = StimulusTable::default();
        let low_rate = SynthConfig { sample_rate_hz: 64.0, ..SynthConfig::default() };
        assert!(matches!(
            generate_window(GazeState::resting(), &stim, &low_rate, 0),
            Err(SynthError::InvalidConfig(_))
        ));
        let mut bad_mix = SynthConfig::default();
        bad_mix.noise.white_weight = 0.5;
        assert!(generate_window(GazeState::resting(), &stim, &bad_mix, 0).is_err());
        let nan_snr = SynthConfig { snr_db: f64::NAN, ..SynthConfig::default() };
        assert!(nan_snr.validate(&stim).is_err());
    }

    #[test]
    fn csv_dump_format() {
        let cfg = SynthConfig { window_s: 2.0 / 256.0, ..SynthConfig::default() };
        let w = generate_window(GazeState::resting(), &StimulusTable::default(), &cfg, 0).unwrap();
        let csv = w.to_csv();
        let lines: Vec<&str> = csv.split('\n').collect();
        assert_eq!(lines[0], "time_s,O1_uv,O2_uv");
        assert!(lines[1].starts_with("0.000000,"));
        assert!(lines[2].starts_with("0.003906,"));
        assert_eq!(lines[1].split(',').nth(1).unwrap().split('.').nth(1).unwrap().len(), 6);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn impedance_without_jitter_is_exact() {
        let r = measure_impedance(&kohm(&[("O1", 100.0), ("O2", 100.0)]), 0.0, 5);
        assert_eq!(r.per_channel_kohm, kohm(&[("O1", 100.0), ("O2", 100.0)]));
        let z = measure_impedance(&kohm(&[("O1", 0.0)]), 30.0, 5);
        assert_eq!(z.per_channel_kohm["O1"], 0.0);
    }

    #[test]
    fn impedance_jitter_stays_in_band() {
        for seed in 0..1000 {
            let r = measure_impedance(&kohm(&[("O1", 100.0)]), 10.0, seed);
            let v = r.per_channel_kohm["O1"];
            assert!((90.0..=110.0).contains(&v), "seed {seed}: {v}");
        }
    }

    #[test]
    fn impedance_gate() {
        let ok = ImpedanceReport { per_channel_kohm: kohm(&[("O1", 100.0), ("O2", 100.0)]) };
        let c = check_impedance(&ok, 200.0).unwrap();
        assert!(c.gate_open && c.per_channel_pass.values().all(|p| *p));

        let zero = ImpedanceReport { per_channel_kohm: kohm(&[("O1", 0.0)]) };
        assert!(check_impedance(&zero, 200.0).unwrap().gate_open);

        let bad = ImpedanceReport { per_channel_kohm: kohm(&[("O1", 500.0), ("O2", 90.0)]) };
        let c = check_impedance(&bad, 200.0).unwrap();
        assert!(!c.per_channel_pass["O1"]);
        assert!(c.per_channel_pass["O2"]);
        assert!(!c.gate_open);

        let empty = ImpedanceReport { per_channel_kohm: BTreeMap::new() };
        assert_eq!(check_impedance(&empty, 200.0), Err(ImpedanceError::EmptyReport));
    }
}
