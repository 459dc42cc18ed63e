use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::command::{Command, StimulusTable};
use crate::synth::SignalWindow;

use super::{check_window, ClassScores, DecodeError};

/// Ridge added to the diagonal of both scatter matrices.
pub const CCA_REGULARIZATION: f64 = 1e-9;

/// `N x 2H` matrix of `sin, cos` pairs at `k * freq_hz`, `k = 1..=H`.
pub fn reference_signals(freq_hz: f64, n_harmonics: usize, n: usize, sample_rate_hz: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, 2 * n_harmonics, |i, j| {
        let k = (j / 2 + 1) as f64;
        let phase = 2.0 * PI * k * freq_hz * i as f64 / sample_rate_hz;
        if j % 2 == 0 {
            phase.sin()
        } else {
            phase.cos()
        }
    })
}

fn center_columns(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
}

/// Largest canonical correlation between the columns of `x` and `y`
/// (both `N x p`, already centred as required).
///
/// Whitens both scatter matrices by Cholesky factors and returns the top
/// singular value of `Lx^-1 Sxy Ly^-T`, clamped to `[0, 1]`.
pub fn canonical_correlation(x: &DMatrix<f64>, y: &DMatrix<f64>, regularization: Option<f64>) -> Result<f64, DecodeError> {
    let eps = regularization.unwrap_or(0.0);
    let mut sxx = x.transpose() * x;
    let mut syy = y.transpose() * y;
    let sxy = x.transpose() * y;
    if sxx.trace() <= 0.0 && eps > 0.0 {
        return Ok(0.0);
    }
    for i in 0..sxx.nrows() {
        sxx[(i, i)] += eps;
    }
    for i in 0..syy.nrows() {
        syy[(i, i)] += eps;
    }
    let lx = sxx.cholesky().ok_or(DecodeError::SingularCovariance)?.l();
    let ly = syy.cholesky().ok_or(DecodeError::SingularCovariance)?.l();
    // Lx^-1 Sxy, then (Ly^-1 (Lx^-1 Sxy)^T)^T = Lx^-1 Sxy Ly^-T.
    let left = lx.solve_lower_triangular(&sxy).ok_or(DecodeError::SingularCovariance)?;
    let m = ly
        .solve_lower_triangular(&left.transpose())
        .ok_or(DecodeError::SingularCovariance)?;
    let rho = m.singular_values().iter().copied().fold(0.0, f64::max);
    Ok(rho.clamp(0.0, 1.0))
}

/// First canonical correlation of the window against each class's
/// sinusoidal reference set. Scores are independent, not normalised.
pub fn cca_scores(
    window: &SignalWindow,
    stim: &StimulusTable,
    n_harmonics: usize,
    detrend: bool,
) -> Result<ClassScores, DecodeError> {
    check_window(window, stim, n_harmonics)?;
    let n = window.len();
    let mut x = DMatrix::from_fn(n, window.channels.len(), |i, j| window.channels[j].samples[i]);
    if detrend {
        center_columns(&mut x);
    }
    let mut scores = [0.0; 5];
    for c in Command::ALL {
        let mut y = reference_signals(stim.frequency(c), n_harmonics, n, window.sample_rate_hz);
        center_columns(&mut y);
        scores[c.index()] = canonical_correlation(&x, &y, Some(CCA_REGULARIZATION))?;
    }
    Ok(ClassScores(scores))
}
