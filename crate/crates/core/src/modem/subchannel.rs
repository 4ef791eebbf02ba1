//! Orthogonal sub-channel pulses: a real base pulse modulated onto
//! `M̃ = 2K̃+1` equally spaced digital sub-carriers.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::spectral::Taps;

/// Default bound on off-diagonal inner products between sub-channel pulses.
pub const DEFAULT_ORTHO_GUARD: f64 = 1e-2;

/// Sub-carrier frequencies `k̃·2π·spacing` for `k̃ = −K̃ … K̃` (rad/sample).
pub fn subcarrier_omegas(k_tilde: usize, spacing: f64) -> Vec<f64> {
    let k = k_tilde as isize;
    (-k..=k).map(|j| 2.0 * PI * spacing * j as f64).collect()
}

/// Inner products `Σ h_a*[m]·h_b[m]` between all pairs of pulses.
pub fn gram_matrix(bank: &[Taps]) -> Vec<Vec<Complex64>> {
    bank.iter()
        .map(|a| {
            bank.iter()
                .map(|b| {
                    let lo = a.first_index().max(b.first_index());
                    let hi = a.last_index().min(b.last_index());
                    (lo..=hi).map(|m| a.at(m).conj() * b.at(m)).sum()
                })
                .collect()
        })
        .collect()
}

/// Largest off-diagonal magnitude and largest diagonal deviation from 1.
pub fn gram_errors(gram: &[Vec<Complex64>]) -> (f64, f64) {
    let mut off: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for (i, row) in gram.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i == j {
                diag = diag.max((v - 1.0).norm());
            } else {
                off = off.max(v.norm());
            }
        }
    }
    (off, diag)
}

/// Sub-channel pulses with the default orthogonality guard.
pub fn subchannel_bank(base: &Taps, k_tilde: usize, spacing: f64) -> Result<Vec<Taps>> {
    subchannel_bank_with_guard(base, k_tilde, spacing, DEFAULT_ORTHO_GUARD)
}

/// Normalizes `base` to unit energy and modulates it onto each sub-carrier,
/// `h_k̃[m] = h[m]·e^{iω_k̃ m}`. Fails when two pulses overlap by more than
/// `guard`.
pub fn subchannel_bank_with_guard(
    base: &Taps,
    k_tilde: usize,
    spacing: f64,
    guard: f64,
) -> Result<Vec<Taps>> {
    if !base.is_real() {
        return Err(invalid("sub-channel base pulse must be real"));
    }
    if !(spacing > 0.0 && spacing < 0.5) {
        return Err(invalid(format!(
            "sub-carrier spacing {spacing} outside (0, 0.5)"
        )));
    }
    let unit = base.energy_normalized()?;
    let bank: Vec<Taps> = subcarrier_omegas(k_tilde, spacing)
        .into_iter()
        .map(|w| {
            if w == 0.0 {
                unit.clone()
            } else {
                unit.modulated(w)
            }
        })
        .collect();
    let gram = gram_matrix(&bank);
    let k = k_tilde as isize;
    for (i, row) in gram.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j && v.norm() > guard {
                return Err(Error::OrthogonalityFailure {
                    a: i as isize - k,
                    b: j as isize - k,
                    value: v.norm(),
                    limit: guard,
                });
            }
        }
    }
    Ok(bank)
}
