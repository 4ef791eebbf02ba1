//! Subcommand implementations.

use std::path::Path;

use num_complex::Complex64;
use pulseforge::fastconv::{direct_convolve, BlockPlan};
use pulseforge::fir::{
    band_concentration, slepian_design, slepian_taper, windowed_sinc, wise_lowpass, SlepianSpec,
    WiseSpec,
};
use pulseforge::iir::{
    butterworth_discrete, group_delay_dc, group_delay_dc_taps, split_causal, RationalDiscreteSystem,
};
use pulseforge::modem::{simulate_link_traced, LinkReport, LinkSpec, LinkTrace};
use pulseforge::presets::{self, Preset, PresetTask};
use pulseforge::spectral::{grid_power, sample_response, FrequencyGrid, FrequencyResponse, Taps};
use serde::Serialize;

use crate::output::{
    complex_rows, csv_string, emit, read_complex_csv, real_rows, round12, to_json, to_json_exact,
};
use crate::{Cli, CliError, Command, FirMethod, Outcome};

const SEED_ENV: &str = "PULSEFORGE_SEED";
const TAU: f64 = std::f64::consts::TAU;

pub fn run(cli: &Cli) -> Outcome {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::DesignFir {
            method,
            m,
            fc,
            flo,
            fhi,
            wpass,
            wstop,
            q,
            window_fc,
            response_csv,
            points,
        } => design_fir(
            FirArgs {
                method: *method,
                m: *m,
                fc: *fc,
                flo: *flo,
                fhi: *fhi,
                wpass: *wpass,
                wstop: *wstop,
                q: *q,
                window_fc: *window_fc,
            },
            response_csv.as_deref(),
            *points,
            out,
        ),
        Command::DesignIir {
            half_order,
            fc,
            response_csv,
            points,
        } => design_iir(*half_order, *fc, response_csv.as_deref(), *points, out),
        Command::Analyze {
            taps,
            origin,
            fc,
            response_csv,
            points,
        } => analyze(taps, *origin, *fc, response_csv.as_deref(), *points, out),
        Command::SimulateLink {
            config,
            preset,
            dump_dir,
            print_config,
        } => simulate(
            config.as_deref(),
            preset.as_deref(),
            dump_dir.as_deref(),
            *print_config,
            out,
        ),
        Command::Fastconv {
            kernel,
            input,
            block,
        } => fastconv(kernel, input, *block, out),
        Command::Verify { preset, file } => verify(preset.as_deref(), file.as_deref(), out),
    }
}

fn seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            CliError::usage(format!("{SEED_ENV} must be an unsigned integer, got '{s}'"))
        }),
        Err(_) => Ok(None),
    }
}

fn write_response<F: FrequencyResponse + ?Sized>(
    sys: &F,
    path: Option<&Path>,
    points: usize,
) -> Result<(), CliError> {
    let Some(path) = path else { return Ok(()) };
    let grid = FrequencyGrid::half_band(points)?;
    let curve = sample_response(sys, &grid)?;
    let mut buf = Vec::new();
    curve
        .write_csv(&mut buf)
        .map_err(|e| CliError::internal(e.to_string()))?;
    std::fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

fn required(v: Option<f64>, name: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::usage(format!("--{name} is required for this method")))
}

fn half_length(m: usize) -> Result<usize, CliError> {
    if m.is_multiple_of(2) || m < 3 {
        return Err(CliError::usage(format!(
            "--m must be odd and at least 3, got {m}"
        )));
    }
    Ok(m / 2)
}

struct FirArgs {
    method: FirMethod,
    m: usize,
    fc: Option<f64>,
    flo: Option<f64>,
    fhi: Option<f64>,
    wpass: f64,
    wstop: f64,
    q: Option<f64>,
    window_fc: Option<f64>,
}

#[derive(Serialize)]
struct FirReport {
    method: &'static str,
    m: usize,
    fc: Option<f64>,
    taps: Taps,
    concentration: Option<f64>,
    stopband_power: Option<f64>,
    eigen_gap: Option<f64>,
    wise: Option<f64>,
    q: Option<f64>,
    f_lo: Option<f64>,
    f_hi: Option<f64>,
    w_pass: Option<f64>,
    w_stop: Option<f64>,
    raw: Option<Vec<f64>>,
}

impl FirReport {
    fn new(method: &'static str, m: usize, fc: Option<f64>, taps: Taps) -> Self {
        Self {
            method,
            m,
            fc,
            taps,
            concentration: None,
            stopband_power: None,
            eigen_gap: None,
            wise: None,
            q: None,
            f_lo: None,
            f_hi: None,
            w_pass: None,
            w_stop: None,
            raw: None,
        }
    }
}

fn design_fir(a: FirArgs, response: Option<&Path>, points: usize, out: Option<&Path>) -> Outcome {
    let report = match a.method {
        FirMethod::Slepian => {
            let fc = required(a.fc, "fc")?;
            let d = slepian_design(&SlepianSpec::new(half_length(a.m)?, fc)?)?;
            let mut r = FirReport::new("slepian", a.m, Some(fc), d.taps.clone());
            r.concentration = Some(d.concentration);
            r.stopband_power = Some(d.stopband_power());
            r.eigen_gap = Some(d.eigen_gap);
            r
        }
        FirMethod::Taper => {
            let fc = required(a.fc, "fc")?;
            let taps = slepian_taper(&SlepianSpec::new(half_length(a.m)?, fc)?)?;
            let c = band_concentration(&taps.real_values(), TAU * fc)?;
            let mut r = FirReport::new("taper", a.m, Some(fc), taps);
            r.concentration = Some(c);
            r.stopband_power = Some(1.0 - c);
            r
        }
        FirMethod::Wise => {
            let f_lo = required(a.flo, "flo")?;
            let f_hi = required(a.fhi, "fhi")?;
            let q = a.q.unwrap_or((a.m as f64 - 1.0) / 2.0);
            let d = wise_lowpass(&WiseSpec {
                m: a.m,
                q,
                omega_lo: TAU * f_lo,
                omega_hi: TAU * f_hi,
                w_pass: a.wpass,
                w_stop: a.wstop,
            })?;
            let mut r = FirReport::new("wise", a.m, a.fc, d.taps.clone());
            r.wise = Some(d.wise);
            r.q = Some(q);
            r.f_lo = Some(f_lo);
            r.f_hi = Some(f_hi);
            r.w_pass = Some(a.wpass);
            r.w_stop = Some(a.wstop);
            r.raw = Some(d.raw);
            r
        }
        FirMethod::WindowedSinc => {
            let fc = required(a.fc, "fc")?;
            let k = half_length(a.m)?;
            let window = slepian_taper(&SlepianSpec::new(k, a.window_fc.unwrap_or(fc))?)?;
            let taps = windowed_sinc(fc, &window, a.m)?;
            let c = band_concentration(&taps.real_values(), TAU * fc)?;
            let mut r = FirReport::new("windowed_sinc", a.m, Some(fc), taps);
            r.concentration = Some(c);
            r.stopband_power = Some(1.0 - c);
            r
        }
    };
    write_response(&report.taps, response, points)?;
    emit(out, &to_json(&report)?)?;
    Ok(true)
}

#[derive(Serialize)]
struct IirReport {
    half_order: usize,
    order: usize,
    fc: f64,
    system: RationalDiscreteSystem,
    causal: RationalDiscreteSystem,
    anticausal: RationalDiscreteSystem,
    group_delay_causal: f64,
    nyquist_magnitude: f64,
    dc_magnitude: f64,
    monotone: bool,
}

fn design_iir(
    half_order: usize,
    fc: f64,
    response: Option<&Path>,
    points: usize,
    out: Option<&Path>,
) -> Outcome {
    let sys = butterworth_discrete(half_order, fc)?;
    let split = split_causal(&sys)?;
    let grid = FrequencyGrid::half_band(points)?;
    let mags = sample_response(&sys, &grid)?.magnitude();
    let monotone = mags.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    let report = IirReport {
        half_order,
        order: 2 * half_order,
        fc,
        group_delay_causal: group_delay_dc(&split.causal)?,
        nyquist_magnitude: sys.evaluate_sections(std::f64::consts::PI).norm(),
        dc_magnitude: sys.evaluate(0.0)?.norm(),
        monotone,
        system: sys.clone(),
        causal: split.causal,
        anticausal: split.anticausal,
    };
    write_response(&sys, response, points)?;
    emit(out, &to_json(&report)?)?;
    Ok(true)
}

#[derive(Serialize)]
struct AnalyzeReport {
    len: usize,
    origin: usize,
    wng: f64,
    grid_power: f64,
    dc_gain: Complex64,
    group_delay_dc: Option<f64>,
    symmetry_error: f64,
    concentration: Option<f64>,
}

fn analyze(
    path: &Path,
    origin: Option<usize>,
    fc: Option<f64>,
    response: Option<&Path>,
    points: usize,
    out: Option<&Path>,
) -> Outcome {
    let values = read_complex_csv(path)?;
    let origin = origin.unwrap_or(values.len() / 2);
    let taps = Taps::new(values, origin)?;
    let concentration = match fc {
        Some(f) if taps.is_real() => Some(band_concentration(&taps.real_values(), TAU * f)?),
        Some(_) => return Err(CliError::usage("--fc needs real taps")),
        None => None,
    };
    let report = AnalyzeReport {
        len: taps.len(),
        origin,
        wng: taps.energy(),
        grid_power: grid_power(&taps, points.max(2 * taps.len())),
        dc_gain: taps.sum(),
        group_delay_dc: group_delay_dc_taps(&taps).ok(),
        symmetry_error: taps.symmetry_error(),
        concentration,
    };
    write_response(&taps, response, points)?;
    emit(out, &to_json(&report)?)?;
    Ok(true)
}

fn load_spec(config: Option<&Path>, preset: Option<&str>) -> Result<LinkSpec, CliError> {
    match (config, preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => match presets::by_name(name)?.task {
            PresetTask::Link(s) => Ok(s),
            PresetTask::Fastconv(_) => {
                Err(CliError::usage(format!("preset '{name}' is not a link")))
            }
        },
        _ => Err(CliError::usage(
            "exactly one of --config and --preset is required",
        )),
    }
}

#[derive(Serialize)]
struct PointRow {
    pulse: usize,
    sub_channel: isize,
    tx_symbol: usize,
    re: f64,
    im: f64,
    rx_symbol: Option<usize>,
}

fn dump(dir: &Path, report: &LinkReport, trace: &LinkTrace) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mt = report.sub_channels;
    let k_tilde = (mt / 2) as isize;
    let points = report
        .rx_points
        .iter()
        .zip(&report.tx_symbols)
        .zip(&report.rx_symbols)
        .enumerate()
        .map(|(i, ((p, &t), &r))| PointRow {
            pulse: i / mt,
            sub_channel: (i % mt) as isize - k_tilde,
            tx_symbol: t,
            re: round12(p.re),
            im: round12(p.im),
            rx_symbol: r,
        });
    let files = [
        ("psi_tx.csv", csv_string(real_rows(&trace.psi_tx))?),
        ("psi_rx.csv", csv_string(real_rows(&trace.psi_rx))?),
        ("phi_rx_full.csv", csv_string(complex_rows(&trace.matched))?),
        ("phi_rx_points.csv", csv_string(points)?),
    ];
    for (name, text) in files {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
    }
    Ok(())
}

fn simulate(
    config: Option<&Path>,
    preset: Option<&str>,
    dump_dir: Option<&Path>,
    print_config: bool,
    out: Option<&Path>,
) -> Outcome {
    let mut spec = load_spec(config, preset)?;
    if let Some(s) = seed_override()? {
        spec.seed = s;
    }
    if print_config {
        emit(out, &to_json_exact(&spec)?)?;
        return Ok(true);
    }
    let cfg = spec.build()?;
    let (report, trace) = simulate_link_traced(&cfg)?;
    if let Some(dir) = dump_dir {
        dump(dir, &report, &trace)?;
    }
    emit(out, &to_json(&report)?)?;
    Ok(true)
}

#[derive(Serialize)]
struct FastconvSummary {
    kernel_len: usize,
    block: usize,
    data_len: usize,
    samples: usize,
    max_abs_error: f64,
    verified: bool,
}

fn fastconv(kernel: &Path, input: &Path, block: usize, out: Option<&Path>) -> Outcome {
    let h = read_complex_csv(kernel)?;
    let x = read_complex_csv(input)?;
    if block == 0 {
        return Err(CliError::usage("--block must be at least 1"));
    }
    let plan = BlockPlan::new(&h, block)?;
    let y = plan.convolve_stream(&x)?;
    let reference = direct_convolve(&h, &x);
    let max_abs_error = y
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let scale =
        h.iter().map(|v| v.norm()).sum::<f64>() * x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let summary = FastconvSummary {
        kernel_len: plan.kernel_len(),
        block: plan.block_len(),
        data_len: plan.data_len(),
        samples: y.len(),
        max_abs_error,
        verified: max_abs_error <= 1e-9 * scale.max(1.0),
    };
    let csv = csv_string(complex_rows(&y))?;
    let summary_json = to_json(&summary)?;
    match out {
        Some(p) => {
            emit(Some(p), &csv)?;
            emit(None, &summary_json)?;
        }
        None => {
            emit(None, &csv)?;
            eprint!("{summary_json}");
        }
    }
    Ok(summary.verified)
}

fn verify(name: Option<&str>, file: Option<&Path>, out: Option<&Path>) -> Outcome {
    let seed = seed_override()?;
    let chosen: Vec<Preset> = match (name, file) {
        (Some("all"), None) => presets::all(),
        (Some(n), None) => vec![presets::by_name(n)?],
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            vec![serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?]
        }
        _ => {
            return Err(CliError::usage(
                "exactly one of --preset and --file is required",
            ))
        }
    };
    let mut reports = Vec::new();
    for p in &chosen {
        reports.push(p.verify(seed)?);
    }
    let pass = reports.iter().all(|r| r.pass);
    let text = if reports.len() == 1 {
        to_json(&reports[0])?
    } else {
        to_json(&reports)?
    };
    emit(out, &text)?;
    Ok(pass)
}
