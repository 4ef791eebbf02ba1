//! Phase alphabet of the PSK modem and the nearest-angle symbol decision.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Equally spaced phases `φ[k] = φ₀ + φΔ·k` on a circle of radius `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    /// Symbol count `K#`.
    pub symbols: usize,
    /// Phase offset `φ₀`.
    pub phi0: f64,
    /// Phase increment `φΔ = 2π/K#`.
    pub phi_delta: f64,
    /// Pulse-train magnitude `ρ`.
    pub rho: f64,
}

/// Builds the constellation for `symbols` phases. The offset is `φΔ/2`, or
/// `φΔ/4` for the binary alphabet.
pub fn make_constellation(symbols: usize, rho: f64) -> Result<Constellation> {
    if symbols < 2 {
        return Err(Error::BadSymbolCount(symbols));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!(
            "pulse magnitude must be positive, got {rho}"
        )));
    }
    let phi_delta = 2.0 * PI / symbols as f64;
    let phi0 = if symbols > 2 {
        phi_delta / 2.0
    } else {
        phi_delta / 4.0
    };
    Ok(Constellation {
        symbols,
        phi0,
        phi_delta,
        rho,
    })
}

impl Constellation {
    pub fn phase(&self, k: usize) -> f64 {
        self.phi0 + self.phi_delta * k as f64
    }

    /// Complex pulse amplitude `ρ·e^{iφ[k]}`.
    pub fn point(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.rho, self.phase(k))
    }

    /// Distance between adjacent points, `|ρ(e^{iφΔ} − 1)|`.
    pub fn chord(&self) -> f64 {
        (Complex64::from_polar(self.rho, self.phi_delta) - self.rho).norm()
    }

    /// `E[e^{2iφ}]` over equiprobable symbols.
    pub fn second_moment(&self) -> Complex64 {
        (0..self.symbols)
            .map(|k| Complex64::from_polar(1.0, 2.0 * self.phase(k)))
            .sum::<Complex64>()
            / self.symbols as f64
    }

    /// Bits carried per symbol.
    pub fn bits(&self) -> f64 {
        (self.symbols as f64).log2()
    }

    /// Symbol whose phase is closest in angle to `z`; `None` for `z = 0`.
    pub fn decide(&self, z: Complex64) -> Option<usize> {
        if z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
        let k = ((z.arg() - self.phi0) / self.phi_delta).round();
        Some(k.rem_euclid(self.symbols as f64) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn qpsk_layout() {
        let c = make_constellation(4, 2.0).unwrap();
        assert!((c.phi_delta - PI / 2.0).abs() < 1e-15);
        assert!((c.phi0 - PI / 4.0).abs() < 1e-15);
        for (k, want) in [PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0]
            .iter()
            .enumerate()
        {
            assert!((c.phase(k) - want).abs() < 1e-15);
        }
        assert!((c.chord() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(c.second_moment().norm() < 1e-15);
    }

    #[test]
    fn bpsk_layout() {
        let c = make_constellation(2, 2.0).unwrap();
        assert!((c.phi0 - PI / 4.0).abs() < 1e-15);
        assert!((c.phase(1) - 5.0 * PI / 4.0).abs() < 1e-15);
        assert!((c.second_moment() - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((c.chord() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn bad_inputs() {
        assert_eq!(make_constellation(1, 2.0), Err(Error::BadSymbolCount(1)));
        assert!(make_constellation(4, 0.0).is_err());
    }

    #[test]
    fn decisions() {
        let c = make_constellation(8, 2.0).unwrap();
        for k in 0..8 {
            assert_eq!(c.decide(c.point(k)), Some(k));
            assert_eq!(
                c.decide(c.point(k) * Complex64::from_polar(1.0, 0.3)),
                Some(k)
            );
        }
        assert_eq!(c.decide(Complex64::new(0.0, 0.0)), None);
    }

    proptest! {
        #[test]
        fn decision_is_scale_invariant(re in -5.0f64..5.0, im in -5.0f64..5.0, s in 1e-6f64..1e6, k in 2usize..17) {
            let c = make_constellation(k, 2.0).unwrap();
            let z = Complex64::new(re, im);
            prop_assert_eq!(c.decide(z), c.decide(z * s));
        }

        #[test]
        fn decision_is_nearest_angle(a in -10.0f64..10.0, k in 2usize..17) {
            let c = make_constellation(k, 1.0).unwrap();
            let got = c.decide(Complex64::from_polar(1.0, a)).unwrap();
            let dist = |j: usize| {
                let d = (a - c.phase(j)).rem_euclid(2.0 * PI);
                d.min(2.0 * PI - d)
            };
            for j in 0..k {
                prop_assert!(dist(got) <= dist(j) + 1e-12);
            }
        }
    }
}
