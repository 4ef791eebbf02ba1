//! FIR low-pass design: Slepian power concentration, Slepian-windowed sinc and
//! weighted least-squared-error (WISE) fitting with arbitrary group delay.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{band_kernel, dot, eig_sym, passband_gram, solve, SymMatrix};
use crate::spectral::{sinc_time, Taps};

/// Smallest accepted gap between the two leading concentration eigenvalues.
pub const EIGEN_GAP_TOL: f64 = 1e-10;
/// Smallest accepted magnitude of the eigenvector element sum.
pub const DC_SUM_TOL: f64 = 1e-12;
/// Distance from an integer delay below which the closed-form limit is used.
pub const DELAY_GUARD: f64 = 1e-9;

/// Slepian low-pass specification: half-length `K` and cut-off `f_c`
/// (cycles/sample).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlepianSpec {
    pub k: usize,
    pub fc: f64,
}

impl SlepianSpec {
    pub fn new(k: usize, fc: f64) -> Result<Self> {
        let s = Self { k, fc };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("half-length K must be at least 1"));
        }
        if !(self.fc > 0.0 && self.fc < 0.5) {
            return Err(Error::BadCutoff(2.0 * PI * self.fc));
        }
        Ok(())
    }

    /// Filter length `2K+1`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        2 * self.k + 1
    }

    pub fn omega_c(&self) -> f64 {
        2.0 * PI * self.fc
    }
}

/// Result of a Slepian design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlepianDesign {
    /// Centered taps normalized to unit dc gain.
    pub taps: Taps,
    /// Fraction of power inside `±ω_c` (the leading eigenvalue).
    pub concentration: f64,
    /// Gap between the two leading eigenvalues.
    pub eigen_gap: f64,
}

impl SlepianDesign {
    /// Fraction of power outside `±ω_c`.
    pub fn stopband_power(&self) -> f64 {
        1.0 - self.concentration
    }
}

/// Designs the maximally concentrated low-pass filter from the band-power
/// eigenproblem.
pub fn slepian_design(spec: &SlepianSpec) -> Result<SlepianDesign> {
    spec.validate()?;
    let s = passband_gram(spec.len(), spec.omega_c())?.scaled(1.0 / (2.0 * PI));
    let pairs = eig_sym(&s)?;
    let lead = &pairs[0];
    let eigen_gap = pairs.get(1).map_or(f64::INFINITY, |p| lead.value - p.value);
    if eigen_gap < EIGEN_GAP_TOL {
        return Err(Error::IllConditioned(format!(
            "leading concentration eigenvalues differ by {eigen_gap:e}"
        )));
    }
    let v = even_part(&lead.vector);
    let c_dc: f64 = v.iter().sum();
    if c_dc.abs() < DC_SUM_TOL {
        return Err(Error::IllConditioned(format!(
            "eigenvector element sum {c_dc:e} is too small to normalize"
        )));
    }
    let values: Vec<f64> = v.iter().map(|x| x / c_dc).collect();
    Ok(SlepianDesign {
        taps: Taps::centered(&values)?,
        concentration: lead.value,
        eigen_gap,
    })
}

/// Centered Slepian low-pass taps with unit dc gain.
pub fn slepian_lowpass(spec: &SlepianSpec) -> Result<Taps> {
    Ok(slepian_design(spec)?.taps)
}

/// Slepian taper computed from the commuting tridiagonal matrix.
///
/// Produces the same sequence as [`slepian_lowpass`] but stays well
/// conditioned for wide-band designs whose leading band-power eigenvalues
/// coincide to machine precision.
pub fn slepian_taper(spec: &SlepianSpec) -> Result<Taps> {
    spec.validate()?;
    let m = spec.len();
    let cw = spec.omega_c().cos();
    let t = SymMatrix::from_fn(m, |i, j| {
        if i == j {
            let a = (m as f64 - 1.0 - 2.0 * i as f64) / 2.0;
            a * a * cw
        } else if j == i + 1 {
            let n = j as f64;
            n * (m as f64 - n) / 2.0
        } else {
            0.0
        }
    });
    let pairs = eig_sym(&t)?;
    let v = even_part(&pairs[0].vector);
    let c_dc: f64 = v.iter().sum();
    if c_dc.abs() < DC_SUM_TOL {
        return Err(Error::IllConditioned(format!(
            "taper element sum {c_dc:e} is too small to normalize"
        )));
    }
    let values: Vec<f64> = v.iter().map(|x| x / c_dc).collect();
    Taps::centered(&values)
}

/// Projection onto even-symmetric sequences. The leading eigenvector of a
/// centrosymmetric matrix is even, so this only strips rounding leakage from
/// the nearest odd eigenvector.
fn even_part(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| 0.5 * (v[i] + v[n - 1 - i])).collect()
}

/// Fraction of the power of real taps `h` that falls inside `±ω_c`.
pub fn band_concentration(h: &[f64], omega_c: f64) -> Result<f64> {
    let s = passband_gram(h.len(), omega_c)?;
    Ok(s.quad_form(h) / (2.0 * PI * dot(h, h)))
}

/// Sinc with cut-off `f_snc` sampled on the window's support, tapered by the
/// window and normalized to unit dc gain.
pub fn windowed_sinc(f_snc: f64, window: &Taps, m: usize) -> Result<Taps> {
    if !(f_snc > 0.0 && f_snc < 0.5) {
        return Err(Error::BadCutoff(2.0 * PI * f_snc));
    }
    if window.len() != m || m.is_multiple_of(2) || window.origin() != m / 2 {
        return Err(invalid(format!(
            "window must be centered with odd length {m}"
        )));
    }
    if !window.is_real() {
        return Err(invalid("window must be real"));
    }
    let omega = 2.0 * PI * f_snc;
    let values: Vec<f64> = window
        .indexed()
        .map(|(k, w)| sinc_time(k as f64, omega) * w.re)
        .collect();
    Taps::centered(&values)?.dc_normalized()
}

/// Weighted least-squared-error design specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WiseSpec {
    /// Filter length.
    pub m: usize,
    /// Desired group delay in samples.
    pub q: f64,
    /// Pass-band edge (rad/sample).
    pub omega_lo: f64,
    /// Stop-band edge (rad/sample).
    pub omega_hi: f64,
    /// Pass-band weight.
    pub w_pass: f64,
    /// Stop-band weight.
    pub w_stop: f64,
}

impl WiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(invalid("filter length must be at least 1"));
        }
        if !self.q.is_finite() {
            return Err(invalid("group delay must be finite"));
        }
        if !(self.omega_lo > 0.0 && self.omega_lo < PI) {
            return Err(Error::BadCutoff(self.omega_lo));
        }
        if !(self.omega_hi >= self.omega_lo && self.omega_hi < PI) {
            return Err(Error::BadCutoff(self.omega_hi));
        }
        if !(self.w_pass > 0.0 && self.w_stop > 0.0) {
            return Err(invalid("weights must be positive"));
        }
        Ok(())
    }
}

/// Quadratic system `(S_xx, s_xy, s_yy)` whose minimizer is the WISE design.
#[derive(Debug, Clone)]
pub struct WiseSystem {
    pub sxx: SymMatrix,
    pub sxy: Vec<f64>,
    pub syy: f64,
}

impl WiseSystem {
    pub fn build(spec: &WiseSpec) -> Result<Self> {
        spec.validate()?;
        let pass = passband_gram(spec.m, spec.omega_lo)?;
        let hi = passband_gram(spec.m, spec.omega_hi)?;
        let stop = SymMatrix::identity(spec.m).combine(2.0 * PI, &hi, -1.0)?;
        let sxx = pass.combine(spec.w_pass, &stop, spec.w_stop)?;
        let sxy = (0..spec.m)
            .map(|m| {
                let d = m as f64 - spec.q;
                let d = if d.abs() < DELAY_GUARD { 0.0 } else { d };
                spec.w_pass * band_kernel(d, spec.omega_lo)
            })
            .collect();
        Ok(Self {
            sxx,
            sxy,
            syy: spec.w_pass * 2.0 * spec.omega_lo,
        })
    }

    /// Weighted integral of the squared error for taps `h`.
    pub fn wise(&self, h: &[f64]) -> f64 {
        self.sxx.quad_form(h) - 2.0 * dot(h, &self.sxy) + self.syy
    }
}

/// Result of a WISE design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WiseDesign {
    /// Causal taps normalized to unit dc gain.
    pub taps: Taps,
    /// Error of the unnormalized least-squares solution.
    pub wise: f64,
    /// The unnormalized least-squares solution.
    pub raw: Vec<f64>,
}

/// Solves the weighted least-squares fit to a delayed ideal low-pass response.
pub fn wise_lowpass(spec: &WiseSpec) -> Result<WiseDesign> {
    let sys = WiseSystem::build(spec)?;
    let raw = solve(&sys.sxx, &sys.sxy)?;
    let wise = sys.wise(&raw);
    let taps = Taps::causal(&raw)?.dc_normalized()?;
    Ok(WiseDesign { taps, wise, raw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{dtft, FrequencyGrid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn wise_spec(q: f64) -> WiseSpec {
        WiseSpec {
            m: 33,
            q,
            omega_lo: 2.0 * PI * 0.15,
            omega_hi: 2.0 * PI * 0.3,
            w_pass: 1.0,
            w_stop: 1000.0,
        }
    }

    #[test]
    fn slepian_reference_design() {
        let d = slepian_design(&SlepianSpec::new(16, 0.1).unwrap()).unwrap();
        // Frozen from an independent symmetric eigensolver.
        assert!((d.stopband_power() - 1.5819973e-8).abs() < 1e-13 + 1e-4 * 1.5819973e-8);
        let sum: f64 = d.taps.real_values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-14);
        assert!(d.taps.symmetry_error() < 1e-9);
    }

    #[test]
    fn slepian_three_taps() {
        let h = slepian_lowpass(&SlepianSpec::new(1, 0.25).unwrap()).unwrap();
        let v = h.real_values();
        assert!(v.iter().all(|&x| x > 0.0));
        assert!(v[1] > v[0] && v[1] > v[2]);
        assert!((v[0] - v[2]).abs() < 1e-12);
        // For ω_c = π/2 the 3×3 problem gives h ∝ (1, √2, 1).
        assert!((v[1] / v[0] - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn slepian_ill_conditioned_wide_band() {
        let e = slepian_lowpass(&SlepianSpec::new(8, 0.3).unwrap()).unwrap_err();
        assert!(matches!(e, Error::IllConditioned(_)));
        let t = slepian_taper(&SlepianSpec::new(8, 0.3).unwrap()).unwrap();
        assert!(t.real_values().iter().all(|&x| x > 0.0));
        assert!(t.symmetry_error() < 1e-9);
    }

    #[test]
    fn taper_matches_eigen_route() {
        for (k, fc) in [(16, 0.1), (12, 0.16), (36, 4.0 / 73.0)] {
            let spec = SlepianSpec::new(k, fc).unwrap();
            let a = slepian_lowpass(&spec).unwrap();
            let b = slepian_taper(&spec).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).norm() < 1e-7, "K={k}");
            }
        }
    }

    #[test]
    fn slepian_beats_rectangular() {
        for (k, fc) in [(4, 0.1), (16, 0.1), (10, 0.2)] {
            let d = slepian_design(&SlepianSpec::new(k, fc).unwrap()).unwrap();
            let rect = vec![1.0; 2 * k + 1];
            let rc = band_concentration(&rect, 2.0 * PI * fc).unwrap();
            assert!(d.concentration >= rc);
            let v = d.taps.real_values();
            if fc * (2 * k + 1) as f64 <= 4.0 {
                assert!(v.iter().all(|&x| x > 0.0));
            }
        }
    }

    #[test]
    fn concentration_matches_grid_integral() {
        let spec = SlepianSpec::new(8, 0.12).unwrap();
        let d = slepian_design(&spec).unwrap();
        let wc = spec.omega_c();
        let p = |w: f64| dtft(&d.taps, w).norm_sqr();
        // Simpson over the pass band, rectangle rule over the full period.
        let n = 8192;
        let h = 2.0 * wc / n as f64;
        let mut inside = p(-wc) + p(wc);
        for j in 1..n {
            let wt = if j % 2 == 1 { 4.0 } else { 2.0 };
            inside += wt * p(-wc + h * j as f64);
        }
        inside *= h / 3.0;
        let grid = FrequencyGrid::uniform(8192).unwrap();
        let total: f64 = grid.points().iter().map(|&w| p(w)).sum::<f64>() * 2.0 * PI / 8192.0;
        let ratio = inside / total;
        assert!(
            (ratio - d.concentration).abs() < 1e-6,
            "{ratio} vs {}",
            d.concentration
        );
        let direct = band_concentration(&d.taps.real_values(), wc).unwrap();
        assert!((direct - d.concentration).abs() < 1e-12);
    }

    #[test]
    fn windowed_sinc_composite() {
        let window = slepian_lowpass(&SlepianSpec::new(16, 0.1).unwrap()).unwrap();
        let h = windowed_sinc(0.2, &window, 33).unwrap();
        assert!((h.dtft(0.0).norm() - 1.0).abs() < 1e-12);
        assert!(h.symmetry_error() < 1e-12);
        // Composite cut-off sits near f_snc + f_eig = 0.3.
        let mag = |f: f64| h.dtft(2.0 * PI * f).norm();
        assert!(mag(0.15) > 0.9);
        assert!(mag(0.4) < 1e-3);
        let peak_stop = (0..200)
            .map(|k| {
                window
                    .dtft(2.0 * PI * (0.1 + 0.4 * k as f64 / 199.0))
                    .norm()
            })
            .fold(0.0, f64::max);
        assert!(mag(0.5) < peak_stop + 1e-3);
    }

    #[test]
    fn windowed_sinc_rectangular() {
        let rect = Taps::centered(&[2.5; 9]).unwrap();
        let h = windowed_sinc(0.2, &rect, 9).unwrap();
        let bare: Vec<f64> = (-4..=4).map(|m| sinc_time(m as f64, 0.4 * PI)).collect();
        let s: f64 = bare.iter().sum();
        for (x, y) in h.real_values().iter().zip(&bare) {
            assert!((x - y / s).abs() < 1e-14);
        }
        assert!(windowed_sinc(0.2, &rect, 7).is_err());
    }

    #[test]
    fn wise_reference_values() {
        let d16 = wise_lowpass(&wise_spec(16.0)).unwrap();
        let d8 = wise_lowpass(&wise_spec(8.0)).unwrap();
        // Frozen from an independent dense solve of the same normal equations.
        assert!(
            (d16.wise - 9.6194114e-8).abs() / 9.6194114e-8 < 1e-5,
            "{:e}",
            d16.wise
        );
        assert!(
            (d8.wise - 1.9192635e-6).abs() / 1.9192635e-6 < 1e-5,
            "{:e}",
            d8.wise
        );
        let sum: f64 = d16.taps.real_values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wise_linear_phase_symmetry() {
        let d = wise_lowpass(&wise_spec(16.0)).unwrap();
        let v = d.taps.real_values();
        for i in 0..v.len() {
            assert!((v[i] - v[v.len() - 1 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn wise_full_band_is_delayed_impulse() {
        let eps = 1e-6;
        let spec = WiseSpec {
            m: 9,
            q: 3.0,
            omega_lo: PI - eps,
            omega_hi: PI - eps,
            w_pass: 1.0,
            w_stop: 5.0,
        };
        let d = wise_lowpass(&spec).unwrap();
        for (i, v) in d.raw.iter().enumerate() {
            let target = if i == 3 { 1.0 } else { 0.0 };
            assert!((v - target).abs() < 1e-4, "tap {i}: {v}");
        }
        assert!(d.wise.abs() < 1e-4);
    }

    #[test]
    fn wise_stationarity() {
        let spec = wise_spec(8.0);
        let sys = WiseSystem::build(&spec).unwrap();
        let d = wise_lowpass(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let dir: Vec<f64> = (0..33).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = crate::linalg::norm2(&dir);
            let h: Vec<f64> = d
                .raw
                .iter()
                .zip(&dir)
                .map(|(a, b)| a + 1e-4 * b / n)
                .collect();
            assert!(sys.wise(&h) >= d.wise);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(SlepianSpec::new(0, 0.1).is_err());
        assert!(matches!(SlepianSpec::new(3, 0.5), Err(Error::BadCutoff(_))));
        let mut s = wise_spec(16.0);
        s.omega_hi = 0.1;
        assert!(wise_lowpass(&s).is_err());
        let mut s = wise_spec(16.0);
        s.w_stop = 0.0;
        assert!(wise_lowpass(&s).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn slepian_invariants(k in 1usize..20, fc in 0.02f64..0.2) {
            let spec = SlepianSpec::new(k, fc).unwrap();
            if let Ok(d) = slepian_design(&spec) {
                let sum: f64 = d.taps.real_values().iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-12);
                prop_assert!(d.taps.symmetry_error() < 1e-9);
                prop_assert!(d.concentration <= 1.0 + 1e-9);
            }
        }

        #[test]
        fn wise_symmetric_when_centered(k in 2usize..16, flo in 0.05f64..0.2, gap in 0.01f64..0.15) {
            let m = 2 * k + 1;
            let spec = WiseSpec {
                m,
                q: k as f64,
                omega_lo: 2.0 * PI * flo,
                omega_hi: 2.0 * PI * (flo + gap),
                w_pass: 1.0,
                w_stop: 10.0,
            };
            let d = wise_lowpass(&spec).unwrap();
            let v = d.taps.real_values();
            for i in 0..m {
                prop_assert!((v[i] - v[m - 1 - i]).abs() < 1e-9);
            }
        }
    }
}
