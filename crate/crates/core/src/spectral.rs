//! Frequency-domain evaluation primitives.
//!
//! Tap sequences carry an explicit origin so that a centered (non-causal)
//! filter and its causal, delayed twin share one representation. The DTFT is
//! always evaluated with the tap index measured relative to that origin.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Argument magnitude below which sinc and Dirichlet kernels switch to their
/// limit values.
pub const KERNEL_GUARD: f64 = 1e-8;

/// Default number of points for analysis grids.
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// A finite tap sequence `h[m]` with the `m = 0` tap stored at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Taps {
    values: Vec<Complex64>,
    origin: usize,
    real: bool,
}

impl Taps {
    /// Builds a complex tap sequence.
    pub fn new(values: Vec<Complex64>, origin: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("tap sequence must not be empty"));
        }
        if origin >= values.len() {
            return Err(invalid(format!(
                "origin {origin} outside tap range 0..{}",
                values.len()
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(invalid("tap values must be finite"));
        }
        let real = values.iter().all(|v| v.im == 0.0);
        Ok(Self {
            values,
            origin,
            real,
        })
    }

    /// Builds a real tap sequence.
    pub fn from_real(values: &[f64], origin: usize) -> Result<Self> {
        Self::new(
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            origin,
        )
    }

    /// Real taps with the origin at index 0.
    pub fn causal(values: &[f64]) -> Result<Self> {
        Self::from_real(values, 0)
    }

    /// Real taps of odd length `2K+1` with the origin at the middle tap.
    pub fn centered(values: &[f64]) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(invalid(format!(
                "centered taps need odd length, got {}",
                values.len()
            )));
        }
        Self::from_real(values, values.len() / 2)
    }

    /// The identity filter `h[m] = δ[m]`.
    pub fn identity() -> Self {
        Self {
            values: vec![Complex64::new(1.0, 0.0)],
            origin: 0,
            real: true,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    /// True when every tap has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Real parts of the taps.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Smallest tap index relative to the origin.
    pub fn first_index(&self) -> isize {
        -(self.origin as isize)
    }

    /// Largest tap index relative to the origin.
    pub fn last_index(&self) -> isize {
        (self.values.len() - 1 - self.origin) as isize
    }

    /// Tap value at index `m` relative to the origin, zero outside the support.
    pub fn at(&self, m: isize) -> Complex64 {
        let j = m + self.origin as isize;
        if j < 0 || j >= self.values.len() as isize {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[j as usize]
        }
    }

    /// Iterates `(m, h[m])` pairs with `m` relative to the origin.
    pub fn indexed(&self) -> impl Iterator<Item = (isize, Complex64)> + '_ {
        let o = self.origin as isize;
        self.values
            .iter()
            .enumerate()
            .map(move |(j, &v)| (j as isize - o, v))
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// Total energy `Σ|h[m]|²`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Same values with a different origin.
    pub fn with_origin(&self, origin: usize) -> Result<Self> {
        Self::new(self.values.clone(), origin)
    }

    /// Multiplies every tap by `k`.
    pub fn scaled(&self, k: Complex64) -> Self {
        let values: Vec<Complex64> = self.values.iter().map(|v| v * k).collect();
        let real = values.iter().all(|v| v.im == 0.0);
        Self {
            values,
            origin: self.origin,
            real,
        }
    }

    /// Taps scaled so that `Σ h[m] = 1`.
    pub fn dc_normalized(&self) -> Result<Self> {
        let s = self.sum();
        if s.norm() < 1e-300 {
            return Err(Error::IllConditioned("tap sum is zero".into()));
        }
        Ok(self.scaled(s.inv()))
    }

    /// Taps scaled to unit energy.
    pub fn energy_normalized(&self) -> Result<Self> {
        let e = self.energy();
        if e <= 0.0 {
            return Err(invalid("tap sequence has zero energy"));
        }
        Ok(self.scaled(Complex64::new(1.0 / e.sqrt(), 0.0)))
    }

    /// Time reversal `g[m] = h[−m]`.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            values,
            origin: self.len() - 1 - self.origin,
            real: self.real,
        }
    }

    /// Modulation `g[m] = h[m]·e^{iω₀m}`.
    pub fn modulated(&self, omega0: f64) -> Self {
        let values: Vec<Complex64> = self
            .indexed()
            .map(|(m, v)| v * Complex64::from_polar(1.0, omega0 * m as f64))
            .collect();
        let real = values.iter().all(|v| v.im == 0.0);
        Self {
            values,
            origin: self.origin,
            real,
        }
    }

    /// Evaluates the DTFT at `omega`.
    pub fn dtft(&self, omega: f64) -> Complex64 {
        dtft(self, omega)
    }

    /// Largest `|h[m] − h[−m]|` over the support; zero for even-symmetric taps.
    pub fn symmetry_error(&self) -> f64 {
        self.indexed()
            .map(|(m, v)| (v - self.at(-m)).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct TapsRepr {
    origin: usize,
    re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<f64>>,
}

impl Serialize for Taps {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TapsRepr {
            origin: self.origin,
            re: self.values.iter().map(|v| v.re).collect(),
            im: (!self.real).then(|| self.values.iter().map(|v| v.im).collect()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Taps {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TapsRepr::deserialize(d)?;
        let values = match r.im {
            Some(im) => {
                if im.len() != r.re.len() {
                    return Err(serde::de::Error::custom("re/im length mismatch"));
                }
                r.re.iter()
                    .zip(&im)
                    .map(|(&a, &b)| Complex64::new(a, b))
                    .collect()
            }
            None => r.re.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        };
        Taps::new(values, r.origin).map_err(serde::de::Error::custom)
    }
}

/// Sampling rate a signal lives at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rate {
    /// One sample per pulse interval.
    Symbol,
    /// The converter sampling rate.
    Sample,
}

/// Complex samples tagged with their rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    pub samples: Vec<Complex64>,
    pub rate: Rate,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, rate: Rate) -> Self {
        Self { samples, rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Strictly increasing angular frequencies in `[−π, π]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("frequency grid must not be empty"));
        }
        if points.iter().any(|w| !w.is_finite() || w.abs() > PI) {
            return Err(invalid("grid points must lie within [-pi, pi]"));
        }
        if points.windows(2).any(|p| p[1] <= p[0]) {
            return Err(invalid("grid points must be strictly increasing"));
        }
        Ok(Self { points })
    }

    /// `n` uniformly spaced points on `[−π, π)`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("grid needs at least one point"));
        }
        let step = 2.0 * PI / n as f64;
        Self::new((0..n).map(|k| -PI + step * k as f64).collect())
    }

    /// `n` uniformly spaced points on `[0, π]`, both ends included.
    pub fn half_band(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("half-band grid needs at least two points"));
        }
        let step = PI / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|k| step * k as f64).collect();
        pts[n - 1] = PI;
        Self::new(pts)
    }

    /// The default 4096-point analysis grid.
    pub fn default_analysis() -> Self {
        Self::uniform(DEFAULT_GRID_POINTS).expect("default grid is valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sampled frequency response.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
}

/// One row of a response dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseRow {
    pub omega: f64,
    pub f: f64,
    pub re: f64,
    pub im: f64,
    pub mag: f64,
    pub phase: f64,
}

impl ResponseCurve {
    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn phase(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg()).collect()
    }

    pub fn rows(&self) -> Vec<ResponseRow> {
        self.grid
            .points()
            .iter()
            .zip(&self.values)
            .map(|(&omega, v)| ResponseRow {
                omega,
                f: omega / (2.0 * PI),
                re: v.re,
                im: v.im,
                mag: v.norm(),
                phase: v.arg(),
            })
            .collect()
    }

    /// Writes the curve as CSV with columns `omega,f,re,im,mag,phase`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for row in self.rows() {
            wr.serialize(row)?;
        }
        wr.flush()
    }
}

impl Serialize for ResponseCurve {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// Anything with a frequency response on the unit circle.
pub trait FrequencyResponse {
    /// Response at angular frequency `omega` (rad/sample).
    fn response_at(&self, omega: f64) -> Result<Complex64>;
}

impl FrequencyResponse for Taps {
    fn response_at(&self, omega: f64) -> Result<Complex64> {
        Ok(dtft(self, omega))
    }
}

/// DTFT `Σ h[m]·e^{−imω}` with `m` measured from the tap origin.
pub fn dtft(taps: &Taps, omega: f64) -> Complex64 {
    taps.indexed()
        .map(|(m, v)| v * Complex64::from_polar(1.0, -omega * m as f64))
        .sum()
}

/// Reference O(N²) DFT; the inverse divides by `N`.
pub fn dft(x: &[Complex64], invert: bool) -> Vec<Complex64> {
    let n = x.len();
    let sign = if invert { 1.0 } else { -1.0 };
    let mut out: Vec<Complex64> = (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let idx = (k * j) % n;
                    v * Complex64::from_polar(1.0, sign * 2.0 * PI * idx as f64 / n as f64)
                })
                .sum()
        })
        .collect();
    if invert {
        let s = 1.0 / n as f64;
        out.iter_mut().for_each(|v| *v *= s);
    }
    out
}

/// `sin(Ωt)/(Ωt)` with the removable singularity at `t = 0`.
pub fn sinc_time(t: f64, omega_pls: f64) -> f64 {
    let x = omega_pls * t;
    if x.abs() < KERNEL_GUARD {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Normalized Dirichlet kernel `(1/M)·Σ_{m=−K}^{K} e^{−imω}` for odd `M`.
///
/// Equals 1 at `ω = 0` and is 2π-periodic.
pub fn dirichlet(omega: f64, m: usize) -> Result<f64> {
    dirichlet_shifted(omega, 0.0, m)
}

/// Dirichlet kernel centred on `omega_osc`, i.e. evaluated at `ω − ω_osc`.
pub fn dirichlet_shifted(omega: f64, omega_osc: f64, m: usize) -> Result<f64> {
    if m == 0 || m.is_multiple_of(2) {
        return Err(invalid(format!("Dirichlet length must be odd, got {m}")));
    }
    let phi = omega - omega_osc;
    let half = 0.5 * phi;
    let mf = m as f64;
    let den = half.sin();
    if den.abs() < KERNEL_GUARD {
        Ok((mf * half).cos() / half.cos())
    } else {
        Ok((mf * half).sin() / (mf * den))
    }
}

/// Samples any frequency response on `grid`.
pub fn sample_response<F: FrequencyResponse + ?Sized>(
    sys: &F,
    grid: &FrequencyGrid,
) -> Result<ResponseCurve> {
    let values = grid
        .points()
        .iter()
        .map(|&w| sys.response_at(w))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResponseCurve {
        grid: grid.clone(),
        values,
    })
}

/// Trapezoidal estimate of `(1/2π)∫|H(ω)|²dω` over one period, on `n` points.
pub fn grid_power(taps: &Taps, n: usize) -> f64 {
    let step = 2.0 * PI / n as f64;
    let total: f64 = (0..n)
        .map(|k| dtft(taps, -PI + step * k as f64).norm_sqr())
        .sum();
    total * step / (2.0 * PI)
}
