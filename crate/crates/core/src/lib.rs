//! Filter design and pulse-shaped PSK modem toolkit.
//!
//! The crate covers FIR low-pass design (Slepian concentration, windowed sinc,
//! weighted least squares), Butterworth IIR design with causal/anti-causal
//! factorization, a baseband PSK modem with orthogonal sub-channels and
//! analytic link metrics, and FFT overlap-add convolution.

pub mod error;
pub mod fastconv;
pub mod fir;
pub mod iir;
pub mod linalg;
pub mod modem;
pub mod presets;
pub mod spectral;

pub use error::{Error, Result};
