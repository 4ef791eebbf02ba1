//! Analytic link-quality metrics: white-noise gain, cross-pulse product,
//! symbol resolvability, bit rate and channel capacity.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::modem::Constellation;
use crate::spectral::Taps;

/// White-noise gain `Σ|h[m]|²`.
pub fn wng(h: &[Complex64]) -> f64 {
    h.iter().map(|v| v.norm_sqr()).sum()
}

/// Cross-pulse product `½·Σ h_rx*[m]·h_tx[m]` over the shared support, with
/// `m` measured from each sequence's origin.
pub fn cpp(h_rx: &Taps, h_tx: &Taps) -> f64 {
    let lo = h_rx.first_index().max(h_tx.first_index());
    let hi = h_rx.last_index().min(h_tx.last_index());
    let s: Complex64 = (lo..=hi).map(|m| h_rx.at(m).conj() * h_tx.at(m)).sum();
    0.5 * s.re
}

/// Separation of adjacent constellation points relative to the noise spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolvability {
    /// Received distance between adjacent points, `CPP·|ρ(e^{iφΔ}−1)|`.
    pub delta_rho: f64,
    /// Expected noise dispersion `√(WNG·σ²)`.
    pub delta_sigma: f64,
    /// `Δρ / (2Δσ)`.
    pub delta_sharp: f64,
}

pub fn resolvability(cpp: f64, wng: f64, sigma2: f64, c: &Constellation) -> Result<Resolvability> {
    if sigma2.is_nan() || sigma2 <= 0.0 {
        return Err(invalid(format!(
            "noise variance must be positive, got {sigma2}"
        )));
    }
    if wng.is_nan() || wng <= 0.0 {
        return Err(invalid(format!(
            "white-noise gain must be positive, got {wng}"
        )));
    }
    let delta_rho = cpp * c.chord();
    let delta_sigma = (wng * sigma2).sqrt();
    Ok(Resolvability {
        delta_rho,
        delta_sigma,
        delta_sharp: delta_rho / (2.0 * delta_sigma),
    })
}

/// Bits per sample: `log₂(K#)·M̃ / M↑`.
pub fn bit_rate(symbols: usize, m_up: usize, m_tilde: usize) -> f64 {
    (symbols as f64).log2() * m_tilde as f64 / m_up as f64
}

/// Channel capacity `f_chn·log₂(1 + SNR)` in bits per sample.
pub fn capacity(f_chn: f64, snr: f64) -> Result<f64> {
    if !(f_chn > 0.0 && f_chn <= 0.5) {
        return Err(invalid(format!(
            "channel bandwidth {f_chn} outside (0, 0.5]"
        )));
    }
    if snr.is_nan() || snr < 0.0 {
        return Err(invalid(format!("SNR must be non-negative, got {snr}")));
    }
    Ok(f_chn * (1.0 + snr).log2())
}
