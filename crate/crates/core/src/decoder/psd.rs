use crate::command::{Command, StimulusTable};
use crate::spectral::{nearest_bin, periodogram};
use crate::synth::SignalWindow;

use super::{check_window, ClassScores, DecodeError};

/// Harmonic periodogram power per class, normalised to sum to one. A
/// window with no power at any class bin scores uniformly 0.2.
pub fn psd_scores(window: &SignalWindow, stim: &StimulusTable, n_harmonics: usize) -> Result<ClassScores, DecodeError> {
    check_window(window, stim, n_harmonics)?;
    let n = window.len();
    let fs = window.sample_rate_hz;
    let spectra: Vec<Vec<f64>> = window.channels.iter().map(|c| periodogram(&c.samples)).collect();

    let mut raw = [0.0; 5];
    for c in Command::ALL {
        let f = stim.frequency(c);
        raw[c.index()] = (1..=n_harmonics)
            .map(|k| {
                let bin = nearest_bin(k as f64 * f, n, fs);
                spectra.iter().map(|p| p[bin]).sum::<f64>()
            })
            .sum();
    }
    let total: f64 = raw.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Ok(ClassScores::uniform(0.2));
    }
    Ok(ClassScores(raw.map(|r| r / total)))
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;

    #[test]
    fn noiseless_up_tone_dominates() {
        let s = psd_scores(&tone_window(8.0, &[1.0], 2, 256.0, 512), &StimulusTable::default(), 2).unwrap();
        assert!(s.get(Command::Up) > 0.9);
        assert!((s.0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ten_hz_is_left() {
        let stim = StimulusTable::default();
        let s = psd_scores(&tone_window(10.0, &[1.0], 2, 256.0, 512), &stim, 2).unwrap();
        assert_eq!(s.ranked(&stim).0, Command::Left);
    }

    #[test]
    fn zero_window_is_uniform() {
        let s = psd_scores(&zero_window(2, 512), &StimulusTable::default(), 2).unwrap();
        assert_eq!(s, ClassScores::uniform(0.2));
    }
}
