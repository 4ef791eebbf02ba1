//! Shipped example configurations with their expected metrics, and a runner
//! that checks a configuration against its expectations.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fastconv::{direct_convolve, BlockPlan};
use crate::fir::{slepian_lowpass, SlepianSpec};
use crate::modem::noise::interval_rng;
use crate::modem::{
    simulate_link, simulate_link_traced, LinkReport, LinkSpec, LinkTrace, MatchedSpec, NoiseLaw,
    ShapingSpec,
};

/// Overlap-add run over a synthetic pulse stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastConvSpec {
    /// Kernel is a Slepian low-pass of half-length `k`.
    pub k: usize,
    pub fc: f64,
    /// FFT block size `B`.
    pub block: usize,
    /// Pulses in the input stream.
    pub pulses: usize,
    /// Spacing between pulse centres in samples.
    pub period: usize,
    /// Randomized equivalence cases run in addition to the pulse stream.
    pub random_cases: usize,
    pub seed: u64,
}

/// Outcome of a [`FastConvSpec`] run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FastConvReport {
    pub kernel_len: usize,
    pub block: usize,
    pub data_len: usize,
    pub stream_len: usize,
    pub max_abs_error: f64,
    pub random_cases: usize,
    pub random_max_abs_error: f64,
}

/// What a preset runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PresetTask {
    Link(LinkSpec),
    Fastconv(FastConvSpec),
}

/// Acceptance band for one named metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Expectation {
    /// `|measured − value| ≤ tol`.
    Absolute {
        metric: String,
        value: f64,
        tol: f64,
    },
    /// `|measured − value| ≤ tol·|value|`.
    Relative {
        metric: String,
        value: f64,
        tol: f64,
    },
    /// `lo ≤ measured ≤ hi`.
    Range { metric: String, lo: f64, hi: f64 },
}

impl Expectation {
    pub fn metric(&self) -> &str {
        match self {
            Self::Absolute { metric, .. }
            | Self::Relative { metric, .. }
            | Self::Range { metric, .. } => metric,
        }
    }

    pub fn holds(&self, measured: f64) -> bool {
        match *self {
            Self::Absolute { value, tol, .. } => (measured - value).abs() <= tol,
            Self::Relative { value, tol, .. } => (measured - value).abs() <= tol * value.abs(),
            Self::Range { lo, hi, .. } => (lo..=hi).contains(&measured),
        }
    }

    fn abs(metric: &str, value: f64, tol: f64) -> Self {
        Self::Absolute {
            metric: metric.into(),
            value,
            tol,
        }
    }

    fn range(metric: &str, lo: f64, hi: f64) -> Self {
        Self::Range {
            metric: metric.into(),
            lo,
            hi,
        }
    }
}

/// Named configuration with expected metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub task: PresetTask,
    pub expected: Vec<Expectation>,
}

/// One checked metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub metric: String,
    pub measured: f64,
    pub expected: Expectation,
    pub pass: bool,
}

/// Result of running a preset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub preset: String,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    pub metrics: BTreeMap<String, f64>,
}

/// Output of a preset run.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    Link(LinkReport),
    Fastconv(FastConvReport),
}

const SEED: u64 = 20240611;

fn link(k_up: usize, symbols: usize, pulses: usize) -> LinkSpec {
    let m = (2 * k_up + 1) as f64;
    LinkSpec {
        k_up,
        symbols,
        rho: 2.0,
        f_tx: 0.25,
        pulses,
        snr_db: 0.0,
        noise: NoiseLaw::Gaussian,
        seed: SEED,
        sub_channels: 0,
        spacing: None,
        ortho_guard: crate::modem::DEFAULT_ORTHO_GUARD,
        shaping: ShapingSpec::Slepian { fc: 4.0 / m },
        matched: MatchedSpec::Same,
        downconv: Default::default(),
    }
}

fn link_preset(
    name: &str,
    description: &str,
    spec: LinkSpec,
    expected: Vec<Expectation>,
) -> Preset {
    Preset {
        name: name.into(),
        description: description.into(),
        task: PresetTask::Link(spec),
        expected,
    }
}

fn dispersion_band() -> [Expectation; 2] {
    [
        Expectation::range("dispersion_ratio_min", 0.95, 1.05),
        Expectation::range("dispersion_ratio_max", 0.95, 1.05),
    ]
}

/// Noise-free single-channel QPSK link.
pub fn example1() -> Preset {
    let mut s = link(12, 4, 10);
    s.noise = NoiseLaw::None;
    link_preset(
        "example1",
        "Noise-free QPSK, K=12, Slepian shaping fc=4/25, matched receive filter",
        s,
        vec![
            Expectation::range("errors", 0.0, 0.0),
            Expectation::range("max_point_error", 0.0, 1e-3),
        ],
    )
}

/// QPSK at 0 dB with a short pulse.
pub fn example2() -> Preset {
    let mut e = vec![
        Expectation::abs("delta_sharp", 2.5, 1e-2),
        Expectation::abs("bit_rate", 0.08, 1e-4),
        Expectation::range("errors", 1.0, 30.0),
    ];
    e.extend(dispersion_band());
    link_preset(
        "example2",
        "QPSK at 0 dB, K=12, Slepian shaping fc=4/25, 10000 pulses",
        link(12, 4, 10_000),
        e,
    )
}

/// QPSK at 0 dB with a longer pulse.
pub fn example3() -> Preset {
    let mut e = vec![
        Expectation::abs("delta_sharp", 4.2720, 1e-2),
        Expectation::abs("bit_rate", 0.0274, 1e-4),
        Expectation::range("errors", 0.0, 0.0),
    ];
    e.extend(dispersion_band());
    link_preset(
        "example3",
        "QPSK at 0 dB, K=36, Slepian shaping fc=4/73, 10000 pulses",
        link(36, 4, 10_000),
        e,
    )
}

/// 8-PSK at 0 dB with a long pulse.
pub fn example4() -> Preset {
    let mut e = vec![
        Expectation::abs("delta_sharp", 4.2700, 1e-2),
        Expectation::abs("bit_rate", 0.0120, 1e-4),
        Expectation::range("errors", 0.0, 0.0),
    ];
    e.extend(dispersion_band());
    link_preset(
        "example4",
        "8-PSK at 0 dB, K=124, Slepian shaping fc=4/249, 10000 pulses",
        link(124, 8, 10_000),
        e,
    )
}

/// BPSK on seven Slepian sub-channels.
pub fn example5() -> Preset {
    let mut s = link(124, 2, 10_000);
    s.sub_channels = 3;
    link_preset(
        "example5",
        "BPSK on 7 sub-channels, K=124, Slepian shaping fc=4/249, spacing 8/249",
        s,
        vec![
            Expectation::abs("delta_sharp", 4.2173, 1e-2),
            Expectation::abs("bit_rate", 0.0281, 1e-4),
            Expectation::abs("f_chn", 0.1124, 1e-4),
            Expectation::range("errors", 0.0, 0.0),
        ],
    )
}

/// BPSK on seven sub-channels with Butterworth pulses and a recursive receiver.
pub fn example6() -> Preset {
    let mut s = link(124, 2, 10_000);
    s.sub_channels = 3;
    s.spacing = Some(8.0 / 249.0);
    s.ortho_guard = 2e-2;
    s.shaping = ShapingSpec::ButterworthAnticausal {
        half_order: 3,
        fc: 2.0 / 249.0,
    };
    s.matched = MatchedSpec::ButterworthCausal {
        half_order: 3,
        fc: 2.0 / 249.0,
    };
    link_preset(
        "example6",
        "BPSK on 7 sub-channels, time-reversed Butterworth shaping, recursive matched filter",
        s,
        vec![
            Expectation::abs("delta_sharp", 4.2176, 1e-2),
            Expectation::abs("bit_rate", 0.0281, 1e-4),
            Expectation::range("errors", 0.0, 0.0),
        ],
    )
}

/// Overlap-add filtering of a pulse stream.
pub fn example7() -> Preset {
    Preset {
        name: "example7".into(),
        description: "Overlap-add with M=73, B=256, L=183 on a pulse stream".into(),
        task: PresetTask::Fastconv(FastConvSpec {
            k: 36,
            fc: 4.0 / 73.0,
            block: 256,
            pulses: 40,
            period: 73,
            random_cases: 200,
            seed: SEED,
        }),
        expected: vec![
            Expectation::range("kernel_len", 73.0, 73.0),
            Expectation::range("data_len", 183.0, 183.0),
            Expectation::range("max_abs_error", 0.0, 1e-9),
            Expectation::range("random_max_abs_error", 0.0, 1e-9),
        ],
    }
}

/// All shipped presets in order.
pub fn all() -> Vec<Preset> {
    vec![
        example1(),
        example2(),
        example3(),
        example4(),
        example5(),
        example6(),
        example7(),
    ]
}

/// Looks up a preset by name.
pub fn by_name(name: &str) -> Result<Preset> {
    all()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| invalid(format!("unknown preset '{name}'")))
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Runs the overlap-add check.
pub fn run_fastconv(spec: &FastConvSpec) -> Result<FastConvReport> {
    let kernel = slepian_lowpass(&SlepianSpec::new(spec.k, spec.fc)?)?;
    let plan = BlockPlan::with_block_size(kernel.values(), spec.block)?;
    let n = spec.pulses * spec.period + spec.block;
    let mut rng = interval_rng(spec.seed, 0);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for p in 0..spec.pulses {
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let centre = p * spec.period + spec.period / 2;
        x[centre] = Complex64::from_polar(1.0, phase);
    }
    let y = plan.convolve_stream(&x)?;
    let max_abs_error = max_abs_diff(&y, &direct_convolve(kernel.values(), &x));

    let mut random_max_abs_error: f64 = 0.0;
    for case in 0..spec.random_cases {
        let mut rng = interval_rng(spec.seed, case as u64 + 1);
        let m = rng.random_range(1..=73);
        let len = rng.random_range(1..=1000);
        let mut draw = |k: usize| -> Vec<Complex64> {
            (0..k)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        };
        let h = draw(m);
        let x = draw(len);
        let l_req = rng.random_range(1..=256);
        let plan = BlockPlan::new(&h, l_req)?;
        let err = max_abs_diff(&plan.convolve_stream(&x)?, &direct_convolve(&h, &x));
        random_max_abs_error = random_max_abs_error.max(err);
    }
    Ok(FastConvReport {
        kernel_len: plan.kernel_len(),
        block: plan.block_len(),
        data_len: plan.data_len(),
        stream_len: n,
        max_abs_error,
        random_cases: spec.random_cases,
        random_max_abs_error,
    })
}

/// Named scalar metrics of a link report.
pub fn link_metrics(r: &LinkReport) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        m.insert(k.to_string(), v);
    };
    put("wng", r.wng);
    put("cpp", r.cpp);
    put("sigma2", r.sigma2);
    put("delta_rho", r.delta_rho);
    put("delta_sigma", r.delta_sigma);
    put("delta_sharp", r.delta_sharp);
    put("bit_rate", r.bit_rate);
    put("capacity", r.capacity);
    put("f_chn", r.f_chn);
    put("errors", r.errors as f64);
    put("max_point_error", r.max_point_error);
    let ratios: Vec<f64> = r
        .per_symbol
        .iter()
        .filter(|s| s.count > 0)
        .map(|s| s.dispersion / r.delta_sigma)
        .collect();
    put(
        "dispersion_ratio_min",
        ratios.iter().copied().fold(f64::INFINITY, f64::min),
    );
    put(
        "dispersion_ratio_max",
        ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    m
}

/// Named scalar metrics of an overlap-add report.
pub fn fastconv_metrics(r: &FastConvReport) -> BTreeMap<String, f64> {
    [
        ("kernel_len", r.kernel_len as f64),
        ("block", r.block as f64),
        ("data_len", r.data_len as f64),
        ("max_abs_error", r.max_abs_error),
        ("random_max_abs_error", r.random_max_abs_error),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

impl Preset {
    /// Runs the task, optionally overriding the seed.
    pub fn run(&self, seed: Option<u64>) -> Result<RunOutput> {
        Ok(self.run_traced(seed, false)?.0)
    }

    /// Runs the task and, for links when requested, keeps the full-rate trace.
    pub fn run_traced(
        &self,
        seed: Option<u64>,
        trace: bool,
    ) -> Result<(RunOutput, Option<LinkTrace>)> {
        match &self.task {
            PresetTask::Link(spec) => {
                let mut spec = spec.clone();
                if let Some(s) = seed {
                    spec.seed = s;
                }
                let cfg = spec.build()?;
                if trace {
                    let (r, t) = simulate_link_traced(&cfg)?;
                    Ok((RunOutput::Link(r), Some(t)))
                } else {
                    Ok((RunOutput::Link(simulate_link(&cfg)?), None))
                }
            }
            PresetTask::Fastconv(spec) => {
                let mut spec = spec.clone();
                if let Some(s) = seed {
                    spec.seed = s;
                }
                Ok((RunOutput::Fastconv(run_fastconv(&spec)?), None))
            }
        }
    }

    /// Compares the measured metrics against the expectations.
    pub fn check(&self, metrics: BTreeMap<String, f64>) -> VerifyReport {
        let checks: Vec<CheckResult> = self
            .expected
            .iter()
            .map(|e| {
                let measured = metrics.get(e.metric()).copied().unwrap_or(f64::NAN);
                CheckResult {
                    metric: e.metric().to_string(),
                    measured,
                    expected: e.clone(),
                    pass: e.holds(measured),
                }
            })
            .collect();
        VerifyReport {
            preset: self.name.clone(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            metrics,
        }
    }

    /// Runs the preset and checks it.
    pub fn verify(&self, seed: Option<u64>) -> Result<VerifyReport> {
        let metrics = match self.run(seed)? {
            RunOutput::Link(r) => link_metrics(&r),
            RunOutput::Fastconv(r) => fastconv_metrics(&r),
        };
        Ok(self.check(metrics))
    }
}
