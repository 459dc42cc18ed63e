//! Monte-Carlo accuracy sweep over synthetic SNR and window length.

use std::fmt::Write as _;

use rand::Rng;

use crate::command::{Command, StimulusTable};
use crate::rng;
use crate::synth::{generate_window, GazeState, SynthConfig};

use super::{classify, DecodeError, DecoderConfig, Method};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchGrid {
    pub snr_db: Vec<f64>,
    pub window_s: Vec<f64>,
    pub methods: Vec<Method>,
    /// Everything except `snr_db`, `window_s` and `seed` is taken from here.
    pub base: SynthConfig,
}

impl Default for BenchGrid {
    fn default() -> Self {
        Self {
            snr_db: vec![60.0, 10.0, 5.0, 0.0, -5.0, -10.0, -15.0, -20.0],
            window_s: vec![2.0],
            methods: vec![Method::Cca],
            base: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub snr_db: f64,
    pub window_s: f64,
    pub trials: usize,
    pub accuracy: f64,
    pub mean_confidence: f64,
    pub itr_bits_per_min: f64,
}

pub const BENCH_CSV_HEADER: &str = "method,snr_db,window_s,trials,accuracy,mean_confidence,itr_bits_per_min";

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{:.4},{:.4},{},{:.4},{:.4},{:.4}",
            self.method.as_str(),
            self.snr_db,
            self.window_s,
            self.trials,
            self.accuracy,
            self.mean_confidence,
            self.itr_bits_per_min
        )
    }
}

pub fn write_bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_line());
    }
    out
}

/// Wolpaw information transfer rate in bits per minute. Accuracy at or
/// below chance yields zero.
pub fn wolpaw_itr(n_classes: usize, accuracy: f64, trial_s: f64) -> f64 {
    let n = n_classes as f64;
    let p = accuracy.clamp(0.0, 1.0);
    if n_classes < 2 || p <= 1.0 / n || trial_s <= 0.0 {
        return 0.0;
    }
    let mut bits = n.log2() + p * p.log2();
    if p < 1.0 {
        bits += (1.0 - p) * ((1.0 - p) / (n - 1.0)).log2();
    }
    bits * 60.0 / trial_s
}

/// Runs `trials_per_cell` windows per (method, window, SNR) cell. Trial `t`
/// uses the same target and noise seed in every cell, so cells differ only
/// in the swept parameters.
pub fn benchmark(
    stim: &StimulusTable,
    decoder_cfg: &DecoderConfig,
    grid: &BenchGrid,
    trials_per_cell: usize,
    seed: u64,
) -> Result<Vec<BenchRow>, DecodeError> {
    if trials_per_cell < 1 {
        return Err(DecodeError::InvalidGrid("trials_per_cell must be >= 1".into()));
    }
    if grid.snr_db.is_empty() || grid.window_s.is_empty() || grid.methods.is_empty() {
        return Err(DecodeError::InvalidGrid("every grid axis needs at least one value".into()));
    }
    decoder_cfg.validate()?;

    let trials: Vec<(Command, u64)> = (0..trials_per_cell as u64)
        .map(|t| {
            let target = Command::ALL[rng::stream(seed, "bench/target", t).random_range(0..5)];
            (target, rng::derive_seed(seed, "bench/synth", t))
        })
        .collect();

    let mut rows = Vec::new();
    for &method in &grid.methods {
        let dcfg = DecoderConfig { method, ..decoder_cfg.clone() };
        for &window_s in &grid.window_s {
            for &snr_db in &grid.snr_db {
                let mut correct = 0usize;
                let mut conf_sum = 0.0;
                for &(target, synth_seed) in &trials {
                    let scfg = SynthConfig { snr_db, window_s, seed: synth_seed, ..grid.base.clone() };
                    let window = generate_window(GazeState::at(target), stim, &scfg, 0)
                        .map_err(|e| DecodeError::InvalidGrid(e.to_string()))?;
                    let c = classify(&window, stim, &dcfg)?;
                    correct += usize::from(c.predicted == target);
                    conf_sum += c.confidence;
                }
                let accuracy = correct as f64 / trials.len() as f64;
                rows.push(BenchRow {
                    method,
                    snr_db,
                    window_s,
                    trials: trials.len(),
                    accuracy,
                    mean_confidence: conf_sum / trials.len() as f64,
                    itr_bits_per_min: wolpaw_itr(5, accuracy, window_s),
                });
            }
        }
    }
    Ok(rows)
}

/// Lowest-SNR row of the given method and window whose accuracy reaches
/// `min_accuracy`.
pub fn operating_point(rows: &[BenchRow], method: Method, window_s: f64, min_accuracy: f64) -> Option<&BenchRow> {
    rows.iter()
        .filter(|r| r.method == method && r.window_s == window_s && r.accuracy >= min_accuracy)
        .min_by(|a, b| a.snr_db.total_cmp(&b.snr_db))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_accuracy_itr_closed_form() {
        let itr = wolpaw_itr(5, 1.0, 2.0);
        assert!((itr - 5f64.log2() * 30.0).abs() < 1e-12);
        assert!((itr - 69.66).abs() < 0.01);
    }

    #[test]
    fn chance_accuracy_has_zero_itr() {
        assert_eq!(wolpaw_itr(5, 0.2, 2.0), 0.0);
        assert_eq!(wolpaw_itr(5, 0.0, 2.0), 0.0);
        let mid = wolpaw_itr(5, 0.9, 2.0);
        assert!(mid > 0.0 && mid < wolpaw_itr(5, 1.0, 2.0));
    }

    #[test]
    fn high_snr_cell_is_perfect_for_both_methods() {
        let grid = BenchGrid { snr_db: vec![60.0], methods: vec![Method::Psd, Method::Cca], ..BenchGrid::default() };
        let rows = benchmark(&StimulusTable::default(), &DecoderConfig::default(), &grid, 200, 11).unwrap();
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert_eq!(r.accuracy, 1.0, "{:?}", r.method);
            assert_eq!(r.trials, 200);
        }
    }

    #[test]
    fn invalid_grids() {
        let stim = StimulusTable::default();
        let cfg = DecoderConfig::default();
        assert!(matches!(benchmark(&stim, &cfg, &BenchGrid::default(), 0, 1), Err(DecodeError::InvalidGrid(_))));
        let empty = BenchGrid { snr_db: vec![], ..BenchGrid::default() };
        assert!(matches!(benchmark(&stim, &cfg, &empty, 5, 1), Err(DecodeError::InvalidGrid(_))));
    }

    #[test]
    fn csv_has_four_decimals() {
        let row = BenchRow {
            method: Method::Cca,
            snr_db: -10.0,
            window_s: 2.0,
            trials: 1000,
            accuracy: 0.9123,
            mean_confidence: 0.25,
            itr_bits_per_min: 50.123456,
        };
        assert_eq!(row.csv_line(), "cca,-10.0000,2.0000,1000,0.9123,0.2500,50.1235");
        assert!(write_bench_csv(&[row]).starts_with(BENCH_CSV_HEADER));
    }
}
