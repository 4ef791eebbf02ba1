//! Butterworth IIR design through the bilinear transform.
//!
//! Systems are held in pole/zero/gain form,
//! `H(z) = k·z^{−d}·Π(1 − β z⁻¹) / Π(1 − α z⁻¹)`, and realized as a cascade of
//! second-order sections. A zero-phase design is factored into a causal part
//! (run forward in time) and an anti-causal part (run backward).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::spectral::{FrequencyResponse, Taps};

/// Largest supported half-order.
pub const MAX_HALF_ORDER: usize = 12;
/// Poles closer than this to the unit circle cannot be split by causality.
pub const UNIT_CIRCLE_GUARD: f64 = 1e-9;
/// Denominator factor magnitude treated as a pole on the evaluation point.
pub const POLE_HIT_TOL: f64 = 1e-14;
/// Residual amplitude targeted by the decay horizon.
pub const DECAY_FLOOR: f64 = 1e-12;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Continuous-time Butterworth prototype of total order `2M`, holding both
/// the stable and the unstable half of its poles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalogButterworthPrototype {
    pub half_order: usize,
    pub omega_c: f64,
}

impl AnalogButterworthPrototype {
    /// The `2M` roots of `(−1/ω_c²)^M s^{2M} + 1 = 0`.
    pub fn poles(&self) -> Vec<Complex64> {
        let m = self.half_order as f64;
        (0..2 * self.half_order)
            .map(|k| {
                let theta = (PI * (m + 1.0) + 2.0 * PI * k as f64) / (2.0 * m);
                Complex64::from_polar(self.omega_c, theta)
            })
            .collect()
    }

    /// Magnitude response `1/(1 + (Ω/ω_c)^{2M})` on the imaginary axis.
    pub fn magnitude(&self, omega: f64) -> f64 {
        1.0 / (1.0 + (omega / self.omega_c).powi(2 * self.half_order as i32))
    }
}

/// One cascade stage `(b0 + b1 z⁻¹ + b2 z⁻²)/(1 + a1 z⁻¹ + a2 z⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondOrderSection {
    pub b: [Complex64; 3],
    pub a: [Complex64; 3],
}

impl SecondOrderSection {
    fn from_roots(zeros: &[Complex64], poles: &[Complex64], gain: Complex64) -> Self {
        let poly = |r: &[Complex64]| match r {
            [] => [ONE, ZERO, ZERO],
            [x] => [ONE, -x, ZERO],
            [x, y] => [ONE, -(x + y), x * y],
            _ => unreachable!("at most two roots per section"),
        };
        let b = poly(zeros).map(|c| c * gain);
        Self { b, a: poly(poles) }
    }

    /// Response at `z⁻¹ = e^{−iω}`.
    pub fn response(&self, omega: f64) -> Complex64 {
        let zi = Complex64::from_polar(1.0, -omega);
        let num = self.b[0] + zi * (self.b[1] + zi * self.b[2]);
        let den = self.a[0] + zi * (self.a[1] + zi * self.a[2]);
        num / den
    }
}

/// Rational transfer function in pole/zero/gain form with an integer delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalDiscreteSystem {
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    gain: Complex64,
    delay: i64,
    sections: Vec<SecondOrderSection>,
}

fn root_order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.norm()
        .total_cmp(&b.norm())
        .then(a.im.abs().total_cmp(&b.im.abs()))
        .then(a.re.total_cmp(&b.re))
        .then(a.im.total_cmp(&b.im))
}

/// Groups roots in pairs, keeping conjugates together and ordering pairs by
/// ascending radius.
fn pair_roots(roots: &[Complex64]) -> Vec<Vec<Complex64>> {
    let mut sorted = roots.to_vec();
    sorted.sort_by(root_order);
    sorted.chunks(2).map(|c| c.to_vec()).collect()
}

impl RationalDiscreteSystem {
    pub fn new(
        zeros: Vec<Complex64>,
        poles: Vec<Complex64>,
        gain: Complex64,
        delay: i64,
    ) -> Result<Self> {
        if zeros
            .iter()
            .chain(&poles)
            .any(|r| !r.re.is_finite() || !r.im.is_finite())
            || !gain.re.is_finite()
            || !gain.im.is_finite()
        {
            return Err(invalid("poles, zeros and gain must be finite"));
        }
        let pp = pair_roots(&poles);
        let zp = pair_roots(&zeros);
        let count = pp.len().max(zp.len()).max(1);
        let sections = (0..count)
            .map(|i| {
                let z = zp.get(i).map_or(&[][..], |v| v.as_slice());
                let p = pp.get(i).map_or(&[][..], |v| v.as_slice());
                SecondOrderSection::from_roots(z, p, if i == 0 { gain } else { ONE })
            })
            .collect();
        Ok(Self {
            zeros,
            poles,
            gain,
            delay,
            sections,
        })
    }

    /// `H(z) = 1`.
    pub fn identity() -> Self {
        Self::new(vec![], vec![], ONE, 0).expect("identity is valid")
    }

    /// `H(z) = z^{−k}`.
    pub fn pure_delay(k: i64) -> Self {
        Self::new(vec![], vec![], ONE, k).expect("delay is valid")
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    pub fn delay(&self) -> i64 {
        self.delay
    }

    pub fn sections(&self) -> &[SecondOrderSection] {
        &self.sections
    }

    /// Largest pole magnitude, zero for an FIR system.
    pub fn max_pole_radius(&self) -> f64 {
        self.poles.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// True when every pole is strictly inside the unit circle and the
    /// delay is non-negative.
    pub fn is_causal(&self) -> bool {
        self.delay >= 0 && self.poles.iter().all(|p| p.norm() < 1.0)
    }

    /// True when poles and zeros form conjugate pairs and the gain is real.
    pub fn is_real(&self) -> bool {
        let conj_closed = |roots: &[Complex64]| {
            roots.iter().all(|r| {
                roots
                    .iter()
                    .any(|s| (s - r.conj()).norm() <= 1e-9 * (1.0 + r.norm()))
            })
        };
        self.gain.im.abs() <= 1e-12 * self.gain.norm().max(1e-300)
            && conj_closed(&self.zeros)
            && conj_closed(&self.poles)
    }

    /// Response from the pole/zero/gain form at `z = e^{iω}`.
    pub fn evaluate(&self, omega: f64) -> Result<Complex64> {
        let zi = Complex64::from_polar(1.0, -omega);
        if self
            .poles
            .iter()
            .any(|a| (ONE - a * zi).norm() < POLE_HIT_TOL)
        {
            return Err(Error::PoleOnGridPoint { omega });
        }
        let den: Complex64 = self.poles.iter().map(|a| ONE - a * zi).product();
        let num: Complex64 = self.zeros.iter().map(|b| ONE - b * zi).product();
        Ok(self.gain * zi.powi(self.delay as i32) * num / den)
    }

    /// Response from the cascaded second-order sections.
    pub fn evaluate_sections(&self, omega: f64) -> Complex64 {
        let d = Complex64::from_polar(1.0, -omega * self.delay as f64);
        self.sections
            .iter()
            .map(|s| s.response(omega))
            .product::<Complex64>()
            * d
    }

    /// Time-reversed system `G(z) = H(1/z)`, with reciprocal poles and zeros.
    pub fn mirror(&self) -> Result<Self> {
        if self
            .zeros
            .iter()
            .chain(&self.poles)
            .any(|r| r.norm() == 0.0)
        {
            return Err(invalid("cannot mirror a system with roots at the origin"));
        }
        let pz: Complex64 = self.zeros.iter().product();
        let pp: Complex64 = self.poles.iter().product();
        let gain = self.gain * pz / pp;
        let delay = self.poles.len() as i64 - self.zeros.len() as i64 - self.delay;
        Self::new(
            self.zeros.iter().map(|z| z.inv()).collect(),
            self.poles.iter().map(|p| p.inv()).collect(),
            gain,
            delay,
        )
    }

    /// Number of samples after which the impulse response has decayed below
    /// `1e−12` of its scale.
    pub fn decay_horizon(&self) -> usize {
        let r = self.max_pole_radius();
        let tail = if r == 0.0 {
            0
        } else {
            (DECAY_FLOOR.ln() / r.ln()).ceil() as usize
        };
        tail + self.zeros.len().max(self.poles.len()) + self.delay.max(0) as usize
    }
}

impl FrequencyResponse for RationalDiscreteSystem {
    fn response_at(&self, omega: f64) -> Result<Complex64> {
        self.evaluate(omega)
    }
}

/// Factorization of a system into causal and anti-causal parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalitySplit {
    pub causal: RationalDiscreteSystem,
    pub anticausal: RationalDiscreteSystem,
}

/// Discretizes the order-`2M` Butterworth prototype with the bilinear map
/// `z = (2+s)/(2−s)`, places all `2M` zeros at `z = −1` and scales for unit
/// dc gain. The result is zero-phase and non-causal.
pub fn butterworth_discrete(m: usize, fc: f64) -> Result<RationalDiscreteSystem> {
    if m == 0 {
        return Err(invalid("half-order must be at least 1"));
    }
    if m > MAX_HALF_ORDER {
        return Err(Error::OrderTooHigh {
            requested: m,
            max: MAX_HALF_ORDER,
        });
    }
    if !(fc > 0.0 && fc < 0.5) {
        return Err(Error::BadCutoff(2.0 * PI * fc));
    }
    let proto = AnalogButterworthPrototype {
        half_order: m,
        omega_c: 2.0 * PI * fc,
    };
    let two = Complex64::new(2.0, 0.0);
    let poles: Vec<Complex64> = proto
        .poles()
        .iter()
        .map(|s| (two + s) / (two - s))
        .collect();
    let zeros = vec![Complex64::new(-1.0, 0.0); 2 * m];
    let unit_dc: Complex64 =
        poles.iter().map(|a| ONE / (ONE - a)).product::<Complex64>() * 2f64.powi(2 * m as i32);
    RationalDiscreteSystem::new(zeros, poles, unit_dc.inv(), 0)
}

/// Splits poles by radius into causal (inside) and anti-causal (outside)
/// factors. Each factor receives as many zeros as it has poles, smallest
/// zeros first, with any surplus kept causal. When possible both factors are
/// scaled to unit dc gain.
pub fn split_causal(sys: &RationalDiscreteSystem) -> Result<CausalitySplit> {
    if let Some(p) = sys
        .poles
        .iter()
        .find(|p| (p.norm() - 1.0).abs() <= UNIT_CIRCLE_GUARD)
    {
        return Err(Error::PoleOnUnitCircle {
            magnitude: p.norm(),
        });
    }
    let (inside, outside): (Vec<Complex64>, Vec<Complex64>) =
        sys.poles.iter().partition(|p| p.norm() < 1.0);
    let mut zeros = sys.zeros.clone();
    zeros.sort_by(root_order);
    let n_anti = outside.len().min(zeros.len().saturating_sub(inside.len()));
    let split_at = zeros.len() - n_anti;
    let anti_zeros = zeros.split_off(split_at);

    let causal_raw = RationalDiscreteSystem::new(zeros, inside, ONE, sys.delay)?;
    let c = causal_raw.evaluate(0.0)?;
    let (gc, ga) = if c.norm() > 1e-300 {
        (c.inv(), sys.gain * c)
    } else {
        (ONE, sys.gain)
    };
    Ok(CausalitySplit {
        causal: RationalDiscreteSystem::new(causal_raw.zeros, causal_raw.poles, gc, sys.delay)?,
        anticausal: RationalDiscreteSystem::new(anti_zeros, outside, ga, 0)?,
    })
}

/// Processing direction for [`filter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Oldest sample first.
    Forward,
    /// Newest sample first; the system passed in is the mirror of the
    /// anti-causal factor.
    Backward,
}

/// Runs a causal system over `x` with zero initial state. The output has the
/// same length as the input.
pub fn filter(
    sys: &RationalDiscreteSystem,
    x: &[Complex64],
    direction: Direction,
) -> Result<Vec<Complex64>> {
    if !sys.is_causal() {
        return Err(invalid("filter needs a causal system"));
    }
    match direction {
        Direction::Forward => Ok(run_forward(sys, x)),
        Direction::Backward => {
            let mut rev: Vec<Complex64> = x.iter().rev().copied().collect();
            rev = run_forward(sys, &rev);
            rev.reverse();
            Ok(rev)
        }
    }
}

fn run_forward(sys: &RationalDiscreteSystem, x: &[Complex64]) -> Vec<Complex64> {
    let d = sys.delay as usize;
    let mut y = vec![ZERO; x.len()];
    if d < x.len() {
        y[d..].copy_from_slice(&x[..x.len() - d]);
    }
    for s in &sys.sections {
        let (mut s1, mut s2) = (ZERO, ZERO);
        for v in y.iter_mut() {
            let xin = *v;
            let out = s.b[0] * xin + s1;
            s1 = s.b[1] * xin - s.a[1] * out + s2;
            s2 = s.b[2] * xin - s.a[2] * out;
            *v = out;
        }
    }
    y
}

/// First `n` samples of the impulse response of a causal system.
pub fn impulse_response(sys: &RationalDiscreteSystem, n: usize) -> Result<Vec<Complex64>> {
    let mut x = vec![ZERO; n];
    if n > 0 {
        x[0] = ONE;
    }
    filter(sys, &x, Direction::Forward)
}

/// Zero-phase impulse response of a split system truncated to `[−K, K]`.
///
/// A unit impulse is filtered backward through the anti-causal factor and
/// then forward through the causal factor, with enough padding on both sides
/// for the transients to die out.
pub fn noncausal_impulse(split: &CausalitySplit, k: usize) -> Result<Taps> {
    if k == 0 {
        return Err(invalid("K must be at least 1"));
    }
    let mirror = split.anticausal.mirror()?;
    let pad = mirror.decay_horizon() + split.causal.decay_horizon() + k + 8;
    let mut x = vec![ZERO; 2 * pad + 1];
    x[pad] = ONE;
    let y = filter(&mirror, &x, Direction::Backward)?;
    let y = filter(&split.causal, &y, Direction::Forward)?;
    to_taps(&y[pad - k..=pad + k], k)
}

fn to_taps(v: &[Complex64], origin: usize) -> Result<Taps> {
    let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if v.iter().all(|c| c.im.abs() <= 1e-12 * scale) {
        Taps::from_real(&v.iter().map(|c| c.re).collect::<Vec<_>>(), origin)
    } else {
        Taps::new(v.to_vec(), origin)
    }
}

/// Anti-causal impulse response `h[m]` for `m ∈ [−(n−1), 0]`, stored with
/// its origin at the last tap.
pub fn anticausal_taps(anticausal: &RationalDiscreteSystem, n: usize) -> Result<Taps> {
    if n == 0 {
        return Err(invalid("tap count must be at least 1"));
    }
    let g = impulse_response(&anticausal.mirror()?, n)?;
    let rev: Vec<Complex64> = g.into_iter().rev().collect();
    to_taps(&rev, n - 1)
}

/// Causal impulse response truncated to `n` taps.
pub fn causal_taps(sys: &RationalDiscreteSystem, n: usize) -> Result<Taps> {
    if n == 0 {
        return Err(invalid("tap count must be at least 1"));
    }
    to_taps(&impulse_response(sys, n)?, 0)
}

/// Pass-band group delay at dc, `−dφ/dω` at `ω = 0`, from the pole/zero form.
pub fn group_delay_dc(sys: &RationalDiscreteSystem) -> Result<f64> {
    if sys.zeros.iter().any(|b| (ONE - b).norm() < 1e-12) {
        return Err(Error::ZeroAtDc);
    }
    if let Some(a) = sys.poles.iter().find(|a| (ONE - *a).norm() < 1e-12) {
        return Err(Error::PoleOnUnitCircle {
            magnitude: a.norm(),
        });
    }
    let zsum: f64 = sys.zeros.iter().map(|b| (b / (ONE - b)).re).sum();
    let psum: f64 = sys.poles.iter().map(|a| (a / (ONE - a)).re).sum();
    Ok(sys.delay as f64 - zsum + psum)
}

/// Group delay at dc of a tap sequence, `Re{Σ m h[m] / Σ h[m]}`.
pub fn group_delay_dc_taps(taps: &Taps) -> Result<f64> {
    let s = taps.sum();
    if s.norm() < 1e-300 {
        return Err(Error::ZeroAtDc);
    }
    let m: Complex64 = taps.indexed().map(|(m, v)| v * m as f64).sum();
    Ok((m / s).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{sample_response, FrequencyGrid};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bilinear_magnitude(m: usize, fc: f64, w: f64) -> f64 {
        let omega = 2.0 * (w / 2.0).tan();
        AnalogButterworthPrototype {
            half_order: m,
            omega_c: 2.0 * PI * fc,
        }
        .magnitude(omega)
    }

    #[test]
    fn prototype_poles_are_roots() {
        let p = AnalogButterworthPrototype {
            half_order: 3,
            omega_c: 0.7,
        };
        for s in p.poles() {
            let v = Complex64::new(-1.0 / 0.49, 0.0).powi(3) * s.powi(6) + 1.0;
            assert!(v.norm() < 1e-12);
            assert!(s.re.abs() > 1e-3);
        }
    }

    #[test]
    fn butterworth_matches_warped_prototype() {
        for (m, fc) in [(1, 0.1), (2, 0.24), (4, 0.3), (7, 0.05)] {
            let h = butterworth_discrete(m, fc).unwrap();
            for k in 0..200 {
                let w = PI * k as f64 / 200.0;
                let got = h.evaluate(w).unwrap();
                assert!((got.re - bilinear_magnitude(m, fc, w)).abs() < 1e-10);
                assert!(got.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn butterworth_dc_null_and_cutoff() {
        let h = butterworth_discrete(4, 0.3).unwrap();
        assert!((h.evaluate(0.0).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!(h.evaluate(PI).unwrap().norm() < 1e-12);
        assert!(h.evaluate(2.0 * PI * 0.3).unwrap().norm() < 0.5);
        assert!(h.is_real());
    }

    #[test]
    fn butterworth_order_cap() {
        assert!(matches!(
            butterworth_discrete(13, 0.1),
            Err(Error::OrderTooHigh {
                requested: 13,
                max: 12
            })
        ));
        assert!(butterworth_discrete(12, 0.1).is_ok());
        assert!(matches!(
            butterworth_discrete(2, 0.5),
            Err(Error::BadCutoff(_))
        ));
    }

    #[test]
    fn sections_match_pole_zero_form() {
        for (m, fc) in [(1, 0.2), (4, 0.3), (12, 0.1)] {
            let h = butterworth_discrete(m, fc).unwrap();
            let s = split_causal(&h).unwrap();
            for sys in [
                &h,
                &s.causal,
                &s.anticausal,
                &s.anticausal.mirror().unwrap(),
            ] {
                for k in 0..256 {
                    let w = -PI + 2.0 * PI * k as f64 / 256.0;
                    let a = sys.evaluate(w).unwrap();
                    let b = sys.evaluate_sections(w);
                    assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn sections_ordered_by_radius() {
        let h = butterworth_discrete(4, 0.3).unwrap();
        let s = split_causal(&h).unwrap();
        let radii: Vec<f64> = s
            .causal
            .sections()
            .iter()
            .map(|sec| sec.a[2].norm().sqrt())
            .collect();
        assert!(radii.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        for sec in s.causal.sections() {
            assert!(sec.a.iter().chain(&sec.b).all(|v| v.im.abs() < 1e-12));
        }
    }

    #[test]
    fn split_partitions_poles() {
        let h = butterworth_discrete(4, 0.3).unwrap();
        let s = split_causal(&h).unwrap();
        assert_eq!(s.causal.poles().len(), 4);
        assert_eq!(s.anticausal.poles().len(), 4);
        assert_eq!(s.causal.zeros().len(), 4);
        assert_eq!(s.anticausal.zeros().len(), 4);
        assert!(s.causal.poles().iter().all(|p| p.norm() < 1.0));
        assert!(s.anticausal.poles().iter().all(|p| p.norm() > 1.0));
        assert!((s.causal.evaluate(0.0).unwrap() - c(1.0)).norm() < 1e-12);
        assert!((s.anticausal.evaluate(0.0).unwrap() - c(1.0)).norm() < 1e-12);
        let grid = FrequencyGrid::default_analysis();
        let parent = sample_response(&h, &grid).unwrap();
        let a = sample_response(&s.causal, &grid).unwrap();
        let b = sample_response(&s.anticausal, &grid).unwrap();
        for i in 0..grid.len() {
            let prod = a.values[i].norm() * b.values[i].norm();
            assert!((prod - parent.values[i].norm()).abs() < 1e-8);
        }
    }

    #[test]
    fn split_of_causal_system_has_identity_anticausal() {
        let sys = RationalDiscreteSystem::new(vec![c(-1.0)], vec![c(0.5)], c(0.25), 0).unwrap();
        let s = split_causal(&sys).unwrap();
        assert!(s.anticausal.poles().is_empty() && s.anticausal.zeros().is_empty());
        assert!((s.anticausal.gain() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn split_rejects_unit_circle_pole() {
        let sys =
            RationalDiscreteSystem::new(vec![], vec![Complex64::from_polar(1.0, 0.3)], c(1.0), 0)
                .unwrap();
        assert!(matches!(
            split_causal(&sys),
            Err(Error::PoleOnUnitCircle { .. })
        ));
        assert!(matches!(
            sys.evaluate(0.3),
            Err(Error::PoleOnGridPoint { .. })
        ));
    }

    #[test]
    fn identity_and_one_pole_filters() {
        let x: Vec<Complex64> = (0..6).map(|k| Complex64::new(k as f64, -1.0)).collect();
        let id = RationalDiscreteSystem::identity();
        assert_eq!(filter(&id, &x, Direction::Forward).unwrap(), x);
        let one_pole = RationalDiscreteSystem::new(vec![], vec![c(0.5)], c(1.0), 0).unwrap();
        let h = impulse_response(&one_pole, 10).unwrap();
        for (n, v) in h.iter().enumerate() {
            assert!((v - c(0.5f64.powi(n as i32))).norm() < 1e-15);
        }
        let d = impulse_response(&RationalDiscreteSystem::pure_delay(3), 6).unwrap();
        assert_eq!(d[3], c(1.0));
        assert!(filter(
            &butterworth_discrete(2, 0.1).unwrap(),
            &x,
            Direction::Forward
        )
        .is_err());
    }

    #[test]
    fn causal_butterworth_impulse_shape() {
        let s = split_causal(&butterworth_discrete(4, 0.3).unwrap()).unwrap();
        let h = impulse_response(&s.causal, 33).unwrap();
        let mags: Vec<f64> = h.iter().map(|v| v.norm()).collect();
        let peak = mags.iter().cloned().fold(0.0, f64::max);
        let ipeak = mags.iter().position(|&v| v == peak).unwrap();
        assert!(ipeak <= 3);
        assert!(mags[32] < 1e-3 * peak);
        assert!(h.iter().all(|v| v.im.abs() < 1e-12));
    }

    #[test]
    fn decay_horizon_bound() {
        let s = split_causal(&butterworth_discrete(4, 0.3).unwrap()).unwrap();
        let n = s.causal.decay_horizon();
        let h = impulse_response(&s.causal, 10 * n + 1).unwrap();
        assert!(h[10 * n].norm() < 1e-10);
    }

    #[test]
    fn group_delay_reference() {
        let s = split_causal(&butterworth_discrete(4, 0.3).unwrap()).unwrap();
        let q = group_delay_dc(&s.causal).unwrap();
        // Frozen from the analytic pole sum and cross-checked by finite
        // differences of the unwrapped phase.
        assert!((q - 1.386306).abs() < 1e-5, "q = {q}");
        let dw = 1e-5;
        let ph = |w: f64| s.causal.evaluate(w).unwrap().arg();
        let fd = -(ph(dw) - ph(-dw)) / (2.0 * dw);
        assert!((fd - q).abs() < 1e-6);
    }

    #[test]
    fn group_delay_simple_cases() {
        assert_eq!(
            group_delay_dc(&RationalDiscreteSystem::pure_delay(5)).unwrap(),
            5.0
        );
        let h = Taps::centered(&[0.1, 0.2, 0.4, 0.2, 0.1]).unwrap();
        let delayed = h.with_origin(0).unwrap();
        assert!((group_delay_dc_taps(&delayed).unwrap() - 2.0).abs() < 1e-12);
        let dw = 1e-5;
        let ph = |w: f64| delayed.dtft(w).arg();
        assert!((-(ph(dw) - ph(-dw)) / (2.0 * dw) - 2.0).abs() < 1e-6);
        let z = RationalDiscreteSystem::new(vec![c(1.0)], vec![], c(1.0), 0).unwrap();
        assert_eq!(group_delay_dc(&z), Err(Error::ZeroAtDc));
    }

    #[test]
    fn noncausal_impulse_properties() {
        let s = split_causal(&butterworth_discrete(4, 0.3).unwrap()).unwrap();
        let h16 = noncausal_impulse(&s, 16).unwrap();
        assert!(h16.is_real());
        assert!(h16.symmetry_error() < 1e-6);
        let h60 = noncausal_impulse(&s, 60).unwrap();
        assert!((h60.sum() - c(1.0)).norm() < 1e-6);
        let grid = FrequencyGrid::default_analysis();
        let r = sample_response(&h16, &grid).unwrap();
        assert!(r.values.iter().all(|v| v.im.abs() < 1e-6));
        // Truncation error of the response shrinks as K grows.
        let parent = butterworth_discrete(4, 0.3).unwrap();
        let err = |t: &Taps| {
            grid.points()
                .iter()
                .map(|&w| (t.dtft(w).norm() - parent.evaluate(w).unwrap().norm()).abs())
                .fold(0.0, f64::max)
        };
        let (e8, e16) = (err(&noncausal_impulse(&s, 4).unwrap()), err(&h16));
        assert!(e16 < e8);
    }

    #[test]
    fn application_order_commutes() {
        let s = split_causal(&butterworth_discrete(3, 0.2).unwrap()).unwrap();
        let k = 20;
        let h = noncausal_impulse(&s, k).unwrap();
        let mirror = s.anticausal.mirror().unwrap();
        let pad = 400;
        let mut x = vec![ZERO; 2 * pad + 1];
        x[pad] = ONE;
        let y = filter(&s.causal, &x, Direction::Forward).unwrap();
        let y = filter(&mirror, &y, Direction::Backward).unwrap();
        for m in -(k as isize)..=(k as isize) {
            assert!((y[(pad as isize + m) as usize] - h.at(m)).norm() < 1e-9);
        }
    }

    #[test]
    fn anticausal_taps_are_reversed_mirror() {
        let s = split_causal(&butterworth_discrete(3, 0.2).unwrap()).unwrap();
        let a = anticausal_taps(&s.anticausal, 30).unwrap();
        let c = causal_taps(&s.causal, 30).unwrap();
        assert_eq!(a.origin(), 29);
        // Symmetric parent: anti-causal factor is the time reverse of the causal one.
        for m in 0..30isize {
            assert!((a.at(-m) - c.at(m)).norm() < 1e-12);
        }
    }

    #[test]
    fn monotone_and_flat() {
        let h = butterworth_discrete(4, 0.3).unwrap();
        let grid = FrequencyGrid::half_band(4096).unwrap();
        let mag = sample_response(&h, &grid).unwrap().magnitude();
        // Rounding ripple on the flat top is a few ulps.
        assert!(mag.windows(2).all(|w| w[1] <= w[0] + 1e-14));
        let step = 1e-3;
        let f = |w: f64| h.evaluate(w).unwrap().norm();
        let d1 = (f(step) - f(-step)) / (2.0 * step);
        let d2 = (f(step) - 2.0 * f(0.0) + f(-step)) / (step * step);
        assert!(d1.abs() < 1e-4 && d2.abs() < 1e-4);
        let dpi = (f(PI) - f(PI - step)) / step;
        assert!(f(PI) < 1e-6 && dpi.abs() < 1e-6);
    }

    #[test]
    fn slepian_pulse_through_causal_factor() {
        use crate::fir::{slepian_taper, SlepianSpec};
        let s = split_causal(&butterworth_discrete(4, 0.3).unwrap()).unwrap();
        let p = slepian_taper(&SlepianSpec::new(8, 0.3).unwrap()).unwrap();
        let p = p.energy_normalized().unwrap();
        let mut x = vec![ZERO; 60];
        for (j, v) in p.values().iter().enumerate() {
            x[10 + j] = *v;
        }
        let y = filter(&s.causal, &x, Direction::Forward).unwrap();
        let argmax = |v: &[Complex64]| {
            v.iter().enumerate().fold(
                (0, 0.0),
                |a, (i, c)| if c.norm() > a.1 { (i, c.norm()) } else { a },
            )
        };
        let (ix, px) = argmax(&x);
        let (iy, py) = argmax(&y);
        assert!((py - px).abs() / px < 0.05);
        assert!((1..=2).contains(&(iy - ix)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn butterworth_invariants(m in 1usize..=12, fc in 0.01f64..0.49) {
            let h = butterworth_discrete(m, fc).unwrap();
            prop_assert!((h.evaluate(0.0).unwrap().norm() - 1.0).abs() < 1e-9);
            prop_assert!(h.evaluate(PI).unwrap().norm() < 1e-12);
            let s = split_causal(&h).unwrap();
            prop_assert_eq!(s.causal.poles().len(), m);
            prop_assert!(s.causal.poles().iter().all(|p| p.norm() < 1.0));
        }

        #[test]
        fn mirror_reverses_time(a in -0.9f64..0.9, b in -0.9f64..0.9) {
            let sys = RationalDiscreteSystem::new(vec![c(b)], vec![c(1.0 / a.abs().max(0.1) * a.signum().max(0.5))], c(0.7), 0).unwrap();
            let m = sys.mirror().unwrap();
            for k in 0..16 {
                let w = -PI + 0.39 * k as f64;
                let lhs = m.evaluate(w).unwrap();
                let rhs = sys.evaluate(-w).unwrap();
                prop_assert!((lhs - rhs).norm() < 1e-9 * rhs.norm().max(1.0));
            }
        }
    }
}
