//! Serializable link description, resolved into a [`LinkConfig`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fir::{slepian_lowpass, slepian_taper, wise_lowpass, SlepianSpec, WiseSpec};
use crate::iir::{anticausal_taps, butterworth_discrete, split_causal};
use crate::modem::link::{LinkConfig, MatchedFilter};
use crate::modem::make_constellation;
use crate::modem::noise::NoiseLaw;
use crate::modem::subchannel::DEFAULT_ORTHO_GUARD;
use crate::spectral::Taps;

/// Transmit pulse recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapingSpec {
    /// Slepian low-pass of length `2K↑+1` and cut-off `fc` cycles/sample.
    Slepian { fc: f64 },
    /// Constant taps over the pulse interval.
    Rectangular,
    /// Weighted least-squares low-pass of length `2K↑+1`.
    Wise {
        fc: f64,
        f_lo: f64,
        f_hi: f64,
        w_pass: f64,
        w_stop: f64,
        q: usize,
    },
    /// Time-reversed causal factor of a Butterworth design, truncated to the
    /// pulse interval.
    ButterworthAnticausal { half_order: usize, fc: f64 },
    /// Explicit taps.
    Taps { taps: Taps },
}

/// Receive filter recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatchedSpec {
    /// Identical to the unit-energy transmit pulse.
    Same,
    Slepian {
        fc: f64,
    },
    Rectangular,
    /// Causal factor of a Butterworth design, run as a recursion.
    ButterworthCausal {
        half_order: usize,
        fc: f64,
    },
    Taps {
        taps: Taps,
    },
}

/// Down-conversion filter recipe: causal factor of a Butterworth design with
/// cut-off `fc_factor·f_chn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DownconvSpec {
    pub half_order: usize,
    pub fc_factor: f64,
}

impl Default for DownconvSpec {
    fn default() -> Self {
        Self {
            half_order: 2,
            fc_factor: 1.5,
        }
    }
}

fn default_f_tx() -> f64 {
    0.25
}

fn default_rho() -> f64 {
    2.0
}

fn default_guard() -> f64 {
    DEFAULT_ORTHO_GUARD
}

/// JSON form of a link configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub k_up: usize,
    pub symbols: usize,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_f_tx")]
    pub f_tx: f64,
    pub pulses: usize,
    pub snr_db: f64,
    pub noise: NoiseLaw,
    pub seed: u64,
    #[serde(default)]
    pub sub_channels: usize,
    /// Sub-carrier spacing in cycles/sample; twice the shaping cut-off when
    /// absent.
    #[serde(default)]
    pub spacing: Option<f64>,
    #[serde(default = "default_guard")]
    pub ortho_guard: f64,
    pub shaping: ShapingSpec,
    pub matched: MatchedSpec,
    #[serde(default)]
    pub downconv: DownconvSpec,
}

impl LinkSpec {
    pub fn m_up(&self) -> usize {
        2 * self.k_up + 1
    }

    fn shaping_fc(&self) -> Option<f64> {
        match &self.shaping {
            ShapingSpec::Slepian { fc }
            | ShapingSpec::Wise { fc, .. }
            | ShapingSpec::ButterworthAnticausal { fc, .. } => Some(*fc),
            _ => None,
        }
    }

    /// Sub-carrier spacing in effect.
    pub fn effective_spacing(&self) -> Result<f64> {
        match (self.spacing, self.shaping_fc()) {
            (Some(s), _) => Ok(s),
            (None, Some(fc)) => Ok(2.0 * fc),
            (None, None) => Ok(1.0 / self.m_up() as f64),
        }
    }

    fn slepian(&self, fc: f64) -> Result<Taps> {
        let spec = SlepianSpec::new(self.k_up, fc)?;
        slepian_lowpass(&spec).or_else(|_| slepian_taper(&spec))
    }

    fn rectangular(&self) -> Result<Taps> {
        let m = self.m_up();
        Taps::centered(&vec![1.0 / m as f64; m])
    }

    fn shaping_taps(&self) -> Result<Taps> {
        let t = match &self.shaping {
            ShapingSpec::Slepian { fc } => self.slepian(*fc)?,
            ShapingSpec::Rectangular => self.rectangular()?,
            ShapingSpec::Wise {
                fc: _,
                f_lo,
                f_hi,
                w_pass,
                w_stop,
                q,
            } => {
                let spec = WiseSpec {
                    m: self.m_up(),
                    q: *q as f64,
                    omega_lo: 2.0 * PI * f_lo,
                    omega_hi: 2.0 * PI * f_hi,
                    w_pass: *w_pass,
                    w_stop: *w_stop,
                };
                wise_lowpass(&spec)?.taps.with_origin(self.k_up)?
            }
            ShapingSpec::ButterworthAnticausal { half_order, fc } => {
                let split = split_causal(&butterworth_discrete(*half_order, *fc)?)?;
                anticausal_taps(&split.anticausal, self.m_up())?
            }
            ShapingSpec::Taps { taps } => taps.clone(),
        };
        t.energy_normalized()
    }

    /// Resolves filters and validates the result.
    pub fn build(&self) -> Result<LinkConfig> {
        let constellation = make_constellation(self.symbols, self.rho)?;
        let shaping = self.shaping_taps()?;
        let matched = match &self.matched {
            MatchedSpec::Same => MatchedFilter::Fir(shaping.clone()),
            MatchedSpec::Slepian { fc } => {
                MatchedFilter::Fir(self.slepian(*fc)?.energy_normalized()?)
            }
            MatchedSpec::Rectangular => {
                MatchedFilter::Fir(self.rectangular()?.energy_normalized()?)
            }
            MatchedSpec::ButterworthCausal { half_order, fc } => {
                MatchedFilter::Iir(split_causal(&butterworth_discrete(*half_order, *fc)?)?.causal)
            }
            MatchedSpec::Taps { taps } => MatchedFilter::Fir(taps.clone()),
        };
        let spacing = self.effective_spacing()?;
        let m_tilde = 2 * self.sub_channels + 1;
        let f_chn = m_tilde as f64 * spacing / 2.0;
        let fc_down = self.downconv.fc_factor * f_chn;
        if !(fc_down > 0.0 && fc_down < 0.5) {
            return Err(invalid(format!(
                "down-conversion cut-off {fc_down} outside (0, 0.5)"
            )));
        }
        let downconv =
            split_causal(&butterworth_discrete(self.downconv.half_order, fc_down)?)?.causal;
        let cfg = LinkConfig {
            k_up: self.k_up,
            f_tx: self.f_tx,
            constellation,
            shaping,
            matched,
            downconv,
            pulses: self.pulses,
            snr_db: self.snr_db,
            noise: self.noise,
            seed: self.seed,
            k_tilde: self.sub_channels,
            spacing,
            ortho_guard: self.ortho_guard,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
