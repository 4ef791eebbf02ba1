//! The end-to-end link: pulse shaping, carrier modulation, the real channel,
//! mixing, down-conversion, matched filtering, down-sampling and decision.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fastconv::BlockPlan;
use crate::iir::{filter, group_delay_dc, impulse_response, Direction, RationalDiscreteSystem};
use crate::modem::metrics::{bit_rate, capacity, resolvability, wng};
use crate::modem::noise::{add_noise, interval_rng, NoiseLaw};
use crate::modem::subchannel::{subcarrier_omegas, subchannel_bank_with_guard};
use crate::modem::Constellation;
use crate::spectral::Taps;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Receive pulse filter.
#[derive(Debug, Clone, PartialEq)]
pub enum MatchedFilter {
    /// Applied non-causally around the tap origin.
    Fir(Taps),
    /// Applied causally as a recursion.
    Iir(RationalDiscreteSystem),
}

/// Fully resolved link parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    /// Pulse half-length `K↑`; pulses repeat every `M↑ = 2K↑+1` samples.
    pub k_up: usize,
    /// Carrier frequency in cycles/sample.
    pub f_tx: f64,
    pub constellation: Constellation,
    /// Transmit pulse; normalized to unit energy before use.
    pub shaping: Taps,
    pub matched: MatchedFilter,
    /// Causal down-conversion filter applied after mixing.
    pub downconv: RationalDiscreteSystem,
    /// Pulses per burst `N↓`.
    pub pulses: usize,
    /// Signal-to-noise ratio in dB defining the noise variance.
    pub snr_db: f64,
    pub noise: NoiseLaw,
    pub seed: u64,
    /// Sub-channel pairs `K̃` (0 for a single channel).
    pub k_tilde: usize,
    /// Sub-carrier spacing in cycles/sample.
    pub spacing: f64,
    /// Largest tolerated overlap between sub-channel pulses.
    pub ortho_guard: f64,
}

impl LinkConfig {
    /// Pulse interval `M↑`.
    pub fn m_up(&self) -> usize {
        2 * self.k_up + 1
    }

    /// Sub-channel count `M̃`.
    pub fn m_tilde(&self) -> usize {
        2 * self.k_tilde + 1
    }

    /// One-sided channel bandwidth in cycles/sample.
    pub fn f_chn(&self) -> f64 {
        self.m_tilde() as f64 * self.spacing / 2.0
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_up == 0 {
            return Err(invalid("pulse half-length must be at least 1"));
        }
        if !(self.f_tx > 0.0 && self.f_tx < 0.5) {
            return Err(invalid(format!(
                "carrier frequency {} outside (0, 0.5)",
                self.f_tx
            )));
        }
        if self.pulses == 0 {
            return Err(invalid("burst needs at least one pulse"));
        }
        if !self.shaping.is_real() {
            return Err(invalid("shaping pulse must be real"));
        }
        if !self.downconv.is_causal() {
            return Err(invalid("down-conversion filter must be causal"));
        }
        if let MatchedFilter::Iir(sys) = &self.matched {
            if !sys.is_causal() {
                return Err(invalid("recursive matched filter must be causal"));
            }
        }
        if !self.snr_db.is_finite() {
            return Err(invalid("SNR must be finite"));
        }
        if !(self.spacing > 0.0 && self.spacing < 0.5) {
            return Err(invalid(format!(
                "sub-carrier spacing {} outside (0, 0.5)",
                self.spacing
            )));
        }
        Ok(())
    }
}

/// Empirical statistics of the received points for one symbol value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolStats {
    pub symbol: usize,
    pub count: usize,
    pub mean_re: f64,
    pub mean_im: f64,
    /// `√(mean |φ − mean|²)`.
    pub dispersion: f64,
}

/// Analytic metrics and simulation outcome of one burst.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkReport {
    pub wng: f64,
    pub cpp: f64,
    pub sigma2: f64,
    pub delta_rho: f64,
    pub delta_sigma: f64,
    pub delta_sharp: f64,
    pub bit_rate: f64,
    pub capacity: f64,
    pub f_chn: f64,
    pub group_delay_down: f64,
    pub sample_offset: usize,
    pub pulses: usize,
    pub sub_channels: usize,
    pub errors: usize,
    /// Largest `|φ_rx − CPP·φ_tx|` relative to `CPP·ρ`.
    pub max_point_error: f64,
    pub per_symbol: Vec<SymbolStats>,
    #[serde(skip)]
    pub tx_symbols: Vec<usize>,
    #[serde(skip)]
    pub rx_points: Vec<Complex64>,
    #[serde(skip)]
    pub rx_symbols: Vec<Option<usize>>,
}

/// Full-rate signals of one burst, for dumps.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTrace {
    pub psi_tx: Vec<f64>,
    pub psi_rx: Vec<f64>,
    /// Mixed and down-converted waveform.
    pub baseband: Vec<Complex64>,
    /// Matched-filter output of the centre sub-channel, shifted so that index
    /// `n·M↑ + origin` holds the sample of pulse `n`.
    pub matched: Vec<Complex64>,
}

/// Down-sampled receiver output.
#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated {
    /// `φ_rx[n↓]`, pulse-major with sub-channels `−K̃ … K̃`.
    pub points: Vec<Complex64>,
    pub symbols: Vec<Option<usize>>,
}

/// Link parameters with all derived filters precomputed.
#[derive(Debug, Clone)]
pub struct Link {
    cfg: LinkConfig,
    omegas: Vec<f64>,
    tx_bank: Vec<Taps>,
    rx_bank: Vec<Taps>,
    q_down: f64,
    offset: usize,
    equalizer: Vec<Complex64>,
    rx_impulse: Vec<Complex64>,
}

fn carrier(f: f64, n: usize) -> Complex64 {
    let turns = (f * n as f64).fract();
    Complex64::from_polar(1.0, 2.0 * PI * turns)
}

impl Link {
    pub fn new(cfg: &LinkConfig) -> Result<Self> {
        cfg.validate()?;
        let omegas = subcarrier_omegas(cfg.k_tilde, cfg.spacing);
        let tx_bank =
            subchannel_bank_with_guard(&cfg.shaping, cfg.k_tilde, cfg.spacing, cfg.ortho_guard)?;
        let (rx_bank, rx_impulse) = match &cfg.matched {
            MatchedFilter::Fir(t) => (
                omegas
                    .iter()
                    .map(|&w| if w == 0.0 { t.clone() } else { t.modulated(w) })
                    .collect(),
                t.values().to_vec(),
            ),
            MatchedFilter::Iir(sys) => (Vec::new(), impulse_response(sys, sys.decay_horizon())?),
        };
        let q_down = group_delay_dc(&cfg.downconv)?;
        if q_down < -0.5 {
            return Err(invalid("down-conversion filter has negative group delay"));
        }
        let offset = q_down.round().max(0.0) as usize;
        let equalizer = omegas
            .iter()
            .map(|&w| {
                let h = cfg.downconv.evaluate(w)?;
                if h.norm() < 1e-12 {
                    return Err(Error::IllConditioned(format!(
                        "down-conversion filter vanishes at sub-carrier {w}"
                    )));
                }
                Ok(Complex64::from_polar(1.0, -w * offset as f64) / h)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg: cfg.clone(),
            omegas,
            tx_bank,
            rx_bank,
            q_down,
            offset,
            equalizer,
            rx_impulse,
        })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.cfg
    }

    /// Sub-channel transmit pulses.
    pub fn tx_bank(&self) -> &[Taps] {
        &self.tx_bank
    }

    /// Group delay of the down-conversion filter at dc.
    pub fn down_group_delay(&self) -> f64 {
        self.q_down
    }

    /// Integer sample offset applied at down-sampling.
    pub fn sample_offset(&self) -> usize {
        self.offset
    }

    /// Samples in a burst: `(N↓−1)·M↑ + M_tx`.
    pub fn burst_len(&self) -> usize {
        (self.cfg.pulses - 1) * self.cfg.m_up() + self.tx_bank[0].len()
    }

    /// Extra receive samples needed after the burst.
    pub fn tail_len(&self) -> usize {
        let rx_fwd = match &self.cfg.matched {
            MatchedFilter::Fir(t) => t.origin(),
            MatchedFilter::Iir(_) => 0,
        };
        self.offset + rx_fwd + 1
    }

    /// Sample index of pulse `n`'s reference tap.
    pub fn pulse_reference(&self, n: usize) -> usize {
        n * self.cfg.m_up() + self.tx_bank[0].origin()
    }

    fn check_symbols(&self, symbols: &[usize]) -> Result<()> {
        let want = self.cfg.pulses * self.cfg.m_tilde();
        if symbols.len() != want {
            return Err(invalid(format!(
                "expected {want} symbols, got {}",
                symbols.len()
            )));
        }
        let count = self.cfg.constellation.symbols;
        if let Some((position, &symbol)) = symbols.iter().enumerate().find(|(_, &s)| s >= count) {
            return Err(Error::SymbolOutOfRange {
                position,
                symbol,
                count,
            });
        }
        Ok(())
    }

    /// Complex pulse train `φ_tx[n↑]` at the sampling rate.
    pub fn pulse_train(&self, symbols: &[usize]) -> Result<Vec<Complex64>> {
        self.check_symbols(symbols)?;
        let m_up = self.cfg.m_up();
        let mt = self.cfg.m_tilde();
        let mut out = vec![ZERO; self.burst_len()];
        for (n, tokens) in symbols.chunks(mt).enumerate() {
            let start = n * m_up;
            for (pulse, &k) in self.tx_bank.iter().zip(tokens) {
                let a = self.cfg.constellation.point(k);
                for (j, h) in pulse.values().iter().enumerate() {
                    out[start + j] += a * h;
                }
            }
        }
        Ok(out)
    }

    /// Modulated complex carrier `φ_tx[n↑]·ψ_tx[n↑]`.
    pub fn modulate_complex(&self, symbols: &[usize]) -> Result<Vec<Complex64>> {
        let mut v = self.pulse_train(symbols)?;
        v.iter_mut()
            .enumerate()
            .for_each(|(n, x)| *x *= carrier(self.cfg.f_tx, n));
        Ok(v)
    }

    /// Transmitted real waveform `ψ̃_tx[n↑] = Re{φ_tx·ψ_tx}`.
    pub fn modulate(&self, symbols: &[usize]) -> Result<Vec<f64>> {
        Ok(self
            .modulate_complex(symbols)?
            .iter()
            .map(|v| v.re)
            .collect())
    }

    /// Multiplies a received waveform by the conjugate carrier.
    pub fn mix(&self, rx: &[Complex64]) -> Vec<Complex64> {
        rx.iter()
            .enumerate()
            .map(|(n, v)| carrier(self.cfg.f_tx, n).conj() * v)
            .collect()
    }

    /// Mixes and applies the down-conversion filter.
    pub fn mix_down(&self, rx: &[Complex64]) -> Result<Vec<Complex64>> {
        filter(&self.cfg.downconv, &self.mix(rx), Direction::Forward)
    }

    /// Demodulates a real received waveform.
    pub fn demodulate(&self, rx: &[f64]) -> Result<Demodulated> {
        let c: Vec<Complex64> = rx.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.demodulate_complex(&c)
    }

    /// Demodulates a (possibly complex) received waveform.
    pub fn demodulate_complex(&self, rx: &[Complex64]) -> Result<Demodulated> {
        let base = self.mix_down(rx)?;
        let mt = self.cfg.m_tilde();
        let pulses = self.cfg.pulses;
        let instants: Vec<usize> = (0..pulses)
            .map(|n| self.pulse_reference(n) + self.offset)
            .collect();
        let mut points = vec![ZERO; pulses * mt];
        match &self.cfg.matched {
            MatchedFilter::Fir(_) => {
                points.par_chunks_mut(mt).enumerate().for_each(|(n, row)| {
                    let r = instants[n] as isize;
                    for (k, slot) in row.iter_mut().enumerate() {
                        let h = &self.rx_bank[k];
                        let mut acc = ZERO;
                        for (m, v) in h.indexed() {
                            let idx = r - m;
                            if idx >= 0 && (idx as usize) < base.len() {
                                acc += v * base[idx as usize];
                            }
                        }
                        *slot = acc * self.equalizer[k];
                    }
                });
            }
            MatchedFilter::Iir(sys) => {
                let cols: Vec<Vec<Complex64>> = self
                    .omegas
                    .par_iter()
                    .enumerate()
                    .map(|(k, &w)| {
                        let shifted: Vec<Complex64> = base
                            .iter()
                            .enumerate()
                            .map(|(n, v)| v * Complex64::from_polar(1.0, -w * n as f64))
                            .collect();
                        let y = filter(sys, &shifted, Direction::Forward)?;
                        Ok(instants
                            .iter()
                            .map(|&r| {
                                let v = y.get(r).copied().unwrap_or(ZERO);
                                v * Complex64::from_polar(1.0, w * r as f64) * self.equalizer[k]
                            })
                            .collect())
                    })
                    .collect::<Result<Vec<_>>>()?;
                for (k, col) in cols.iter().enumerate() {
                    for (n, v) in col.iter().enumerate() {
                        points[n * mt + k] = *v;
                    }
                }
            }
        }
        let symbols = points
            .iter()
            .map(|&z| self.cfg.constellation.decide(z))
            .collect();
        Ok(Demodulated { points, symbols })
    }

    /// Full-rate matched-filter output of the centre sub-channel.
    pub fn matched_full_rate(&self, baseband: &[Complex64]) -> Result<Vec<Complex64>> {
        let raw = match &self.cfg.matched {
            MatchedFilter::Fir(t) => {
                let o = t.origin();
                let plan = BlockPlan::new(t.values(), 1024)?;
                let mut padded = baseband.to_vec();
                padded.extend(std::iter::repeat_n(ZERO, o));
                plan.convolve_stream(&padded)?.split_off(o)
            }
            MatchedFilter::Iir(sys) => filter(sys, baseband, Direction::Forward)?,
        };
        let eq = self.equalizer[self.cfg.k_tilde];
        Ok(raw.iter().skip(self.offset).map(|v| v * eq).collect())
    }

    /// White-noise gain of the receive filter.
    pub fn wng(&self) -> f64 {
        wng(&self.rx_impulse)
    }

    /// Half the transmit-to-receive cascade at the sampling lag.
    pub fn cpp(&self) -> f64 {
        let tx = &self.tx_bank[self.cfg.k_tilde];
        let s: Complex64 = match &self.cfg.matched {
            MatchedFilter::Fir(rx) => tx.indexed().map(|(m, v)| v * rx.at(-m)).sum(),
            MatchedFilter::Iir(_) => self
                .rx_impulse
                .iter()
                .enumerate()
                .map(|(j, g)| g * tx.at(-(j as isize)))
                .sum(),
        };
        0.5 * s.re
    }

    /// Expected power of the transmitted real waveform over the burst, for
    /// equiprobable independent symbols.
    pub fn ensemble_power(&self) -> f64 {
        let rho2 = self.cfg.constellation.rho.powi(2);
        let mu2 = self.cfg.constellation.second_moment();
        let w2 = 4.0 * PI * self.cfg.f_tx;
        let mut a = 0.0;
        let mut b = ZERO;
        for pulse in &self.tx_bank {
            for (m, v) in pulse.indexed() {
                a += v.norm_sqr();
                b += v * v * Complex64::from_polar(1.0, w2 * m as f64);
            }
        }
        let phase_sum: Complex64 = (0..self.cfg.pulses)
            .map(|n| Complex64::from_polar(1.0, w2 * self.pulse_reference(n) as f64))
            .sum();
        let total = self.cfg.pulses as f64 * a + (mu2 * b * phase_sum).re;
        0.5 * rho2 * total / self.burst_len() as f64
    }

    /// Channel noise variance for the configured SNR.
    pub fn noise_variance(&self) -> f64 {
        self.ensemble_power() / self.cfg.snr_linear()
    }

    /// Draws the burst's symbols from the configured seed.
    pub fn draw_symbols(&self) -> Vec<usize> {
        let mut rng = interval_rng(self.cfg.seed, u64::MAX);
        let k = self.cfg.constellation.symbols;
        (0..self.cfg.pulses * self.cfg.m_tilde())
            .map(|_| rng.random_range(0..k))
            .collect()
    }

    /// Modulates, adds channel noise and demodulates one burst.
    pub fn simulate(&self, symbols: &[usize]) -> Result<(LinkReport, LinkTrace)> {
        let psi_tx = self.modulate(symbols)?;
        let sigma2 = self.noise_variance();
        let mut psi_rx = psi_tx.clone();
        psi_rx.extend(std::iter::repeat_n(0.0, self.tail_len()));
        add_noise(
            &mut psi_rx,
            self.cfg.noise,
            sigma2,
            self.cfg.seed,
            self.cfg.m_up(),
        );
        let rx_c: Vec<Complex64> = psi_rx.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let baseband = self.mix_down(&rx_c)?;
        let demod = self.demodulate_complex(&rx_c)?;
        let report = self.report(symbols, demod, sigma2)?;
        Ok((
            report,
            LinkTrace {
                psi_tx,
                psi_rx,
                baseband,
                matched: Vec::new(),
            },
        ))
    }

    fn report(&self, tx: &[usize], demod: Demodulated, sigma2: f64) -> Result<LinkReport> {
        let c = &self.cfg.constellation;
        let wng = self.wng();
        let cpp = self.cpp();
        let r = resolvability(cpp, wng, sigma2, c)?;
        let errors = tx
            .iter()
            .zip(&demod.symbols)
            .filter(|(t, r)| Some(**t) != **r)
            .count();
        let scale = cpp * c.rho;
        let max_point_error = tx
            .iter()
            .zip(&demod.points)
            .map(|(&t, p)| (p - c.point(t) * cpp).norm() / scale)
            .fold(0.0, f64::max);
        let per_symbol = (0..c.symbols)
            .map(|k| {
                let pts: Vec<Complex64> = tx
                    .iter()
                    .zip(&demod.points)
                    .filter(|(&t, _)| t == k)
                    .map(|(_, p)| *p)
                    .collect();
                let count = pts.len();
                if count == 0 {
                    return SymbolStats {
                        symbol: k,
                        count,
                        mean_re: 0.0,
                        mean_im: 0.0,
                        dispersion: 0.0,
                    };
                }
                let mean: Complex64 = pts.iter().sum::<Complex64>() / count as f64;
                let var = pts.iter().map(|p| (p - mean).norm_sqr()).sum::<f64>() / count as f64;
                SymbolStats {
                    symbol: k,
                    count,
                    mean_re: mean.re,
                    mean_im: mean.im,
                    dispersion: var.sqrt(),
                }
            })
            .collect();
        Ok(LinkReport {
            wng,
            cpp,
            sigma2,
            delta_rho: r.delta_rho,
            delta_sigma: r.delta_sigma,
            delta_sharp: r.delta_sharp,
            bit_rate: bit_rate(c.symbols, self.cfg.m_up(), self.cfg.m_tilde()),
            capacity: capacity(self.cfg.f_chn().min(0.5), self.cfg.snr_linear())?,
            f_chn: self.cfg.f_chn(),
            group_delay_down: self.q_down,
            sample_offset: self.offset,
            pulses: self.cfg.pulses,
            sub_channels: self.cfg.m_tilde(),
            errors,
            max_point_error,
            per_symbol,
            tx_symbols: tx.to_vec(),
            rx_points: demod.points,
            rx_symbols: demod.symbols,
        })
    }
}

/// Transmitted real waveform for `symbols`.
pub fn modulate(cfg: &LinkConfig, symbols: &[usize]) -> Result<Vec<f64>> {
    Link::new(cfg)?.modulate(symbols)
}

/// Receiver output for a real received waveform.
pub fn demodulate(cfg: &LinkConfig, rx: &[f64]) -> Result<Demodulated> {
    Link::new(cfg)?.demodulate(rx)
}

/// Runs one seeded burst end to end.
pub fn simulate_link(cfg: &LinkConfig) -> Result<LinkReport> {
    let link = Link::new(cfg)?;
    let symbols = link.draw_symbols();
    Ok(link.simulate(&symbols)?.0)
}

/// Runs one seeded burst and also returns the full-rate signals.
pub fn simulate_link_traced(cfg: &LinkConfig) -> Result<(LinkReport, LinkTrace)> {
    let link = Link::new(cfg)?;
    let symbols = link.draw_symbols();
    let (report, mut trace) = link.simulate(&symbols)?;
    trace.matched = link.matched_full_rate(&trace.baseband)?;
    Ok((report, trace))
}
