//! Radix-2 FFT and overlap-add block convolution.
//!
//! A [`BlockPlan`] fixes the kernel, the block size `B` (a power of two) and
//! the data-block length `L = B − M`; the kernel spectrum is computed once.
//! [`SpliceState`] carries each block's termination transient into the next.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Precomputed bit-reversal permutation and twiddle table for one size.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    rev: Vec<usize>,
    twiddles: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let bits = n.trailing_zeros();
        let rev = (0..n)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        Ok(Self { n, rev, twiddles })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place transform; the inverse is scaled by `1/N`.
    pub fn transform(&self, buf: &mut [Complex64], invert: bool) -> Result<()> {
        if buf.len() != self.n {
            return Err(invalid(format!(
                "buffer length {} does not match plan size {}",
                buf.len(),
                self.n
            )));
        }
        let n = self.n;
        for i in 0..n {
            let j = self.rev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if invert { w.conj() } else { w };
                    let u = buf[start + k];
                    let v = buf[start + k + half] * w;
                    buf[start + k] = u + v;
                    buf[start + k + half] = u - v;
                }
            }
            len <<= 1;
        }
        if invert {
            let s = 1.0 / n as f64;
            buf.iter_mut().for_each(|v| *v *= s);
        }
        Ok(())
    }
}

/// Forward or inverse FFT of a power-of-two length sequence.
pub fn fft(x: &[Complex64], invert: bool) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(x.len())?;
    let mut buf = x.to_vec();
    plan.transform(&mut buf, invert)?;
    Ok(buf)
}

/// Kernel, block geometry and precomputed kernel spectrum.
#[derive(Debug)]
pub struct BlockPlan {
    m: usize,
    l: usize,
    fft: FftPlan,
    spectrum: Vec<Complex64>,
    forward_calls: AtomicUsize,
    inverse_calls: AtomicUsize,
}

impl BlockPlan {
    /// Smallest power-of-two block `B ≥ L_requested + M`, with `L = B − M`.
    pub fn new(kernel: &[Complex64], l_requested: usize) -> Result<Self> {
        if l_requested == 0 {
            return Err(Error::BadBlockShape(
                "data-block length must be positive".into(),
            ));
        }
        let b = (l_requested + kernel.len()).next_power_of_two();
        Self::with_block_size(kernel, b)
    }

    /// Plan with an explicit block size `B`.
    pub fn with_block_size(kernel: &[Complex64], b: usize) -> Result<Self> {
        if kernel.is_empty() {
            return Err(Error::BadBlockShape("kernel must not be empty".into()));
        }
        if !b.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(b));
        }
        let m = kernel.len();
        if b <= m {
            return Err(Error::BadBlockShape(format!(
                "block size {b} leaves no room for data with a {m}-tap kernel"
            )));
        }
        let fft = FftPlan::new(b)?;
        let mut spectrum = vec![ZERO; b];
        spectrum[..m].copy_from_slice(kernel);
        fft.transform(&mut spectrum, false)?;
        Ok(Self {
            m,
            l: b - m,
            fft,
            spectrum,
            forward_calls: AtomicUsize::new(1),
            inverse_calls: AtomicUsize::new(0),
        })
    }

    /// Kernel length `M`.
    pub fn kernel_len(&self) -> usize {
        self.m
    }

    /// Data-block length `L`.
    pub fn data_len(&self) -> usize {
        self.l
    }

    /// Block size `B = L + M`.
    pub fn block_len(&self) -> usize {
        self.l + self.m
    }

    /// Transform of the zero-padded kernel.
    pub fn kernel_spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Forward transforms performed so far, kernel included.
    pub fn forward_transforms(&self) -> usize {
        self.forward_calls.load(Ordering::Relaxed)
    }

    /// Inverse transforms performed so far.
    pub fn inverse_transforms(&self) -> usize {
        self.inverse_calls.load(Ordering::Relaxed)
    }

    /// Convolves one zero-padded block (`B` samples, last `M` zero) with the
    /// kernel, returning all `B` output samples.
    pub fn convolve_block(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let b = self.block_len();
        if x.len() != b {
            return Err(Error::BadBlockShape(format!(
                "block has {} samples, expected {b}",
                x.len()
            )));
        }
        if x[self.l..].iter().any(|v| *v != ZERO) {
            return Err(Error::BadBlockShape(format!(
                "the last {} samples of a block must be zero",
                self.m
            )));
        }
        let mut buf = x.to_vec();
        self.fft.transform(&mut buf, false)?;
        self.forward_calls.fetch_add(1, Ordering::Relaxed);
        buf.iter_mut()
            .zip(&self.spectrum)
            .for_each(|(v, h)| *v *= h);
        self.fft.transform(&mut buf, true)?;
        self.inverse_calls.fetch_add(1, Ordering::Relaxed);
        Ok(buf)
    }

    /// Streams `x` through the plan block by block, returning the first
    /// `x.len()` output samples.
    pub fn convolve_stream(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut state = SpliceState::new(self);
        let mut out = Vec::with_capacity(x.len() + self.l);
        let mut block = vec![ZERO; self.block_len()];
        for chunk in x.chunks(self.l) {
            block.iter_mut().for_each(|v| *v = ZERO);
            block[..chunk.len()].copy_from_slice(chunk);
            let y = self.convolve_block(&block)?;
            out.extend(state.splice(&y)?);
        }
        out.truncate(x.len());
        Ok(out)
    }
}

/// Overlap carried between consecutive blocks of one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SpliceState {
    carry: Vec<Complex64>,
    l: usize,
    block: usize,
}

impl SpliceState {
    /// Zeroed state for a fresh stream.
    pub fn new(plan: &BlockPlan) -> Self {
        Self {
            carry: vec![ZERO; plan.kernel_len()],
            l: plan.data_len(),
            block: 0,
        }
    }

    /// Index of the next block to be spliced.
    pub fn block_index(&self) -> usize {
        self.block
    }

    pub fn carry(&self) -> &[Complex64] {
        &self.carry
    }

    /// Adds the carried termination transient to the block's initiation
    /// transient and returns the `L` finished samples.
    pub fn splice(&mut self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let m = self.carry.len();
        if y.len() != self.l + m {
            return Err(Error::BadBlockShape(format!(
                "block output has {} samples, expected {}",
                y.len(),
                self.l + m
            )));
        }
        let mut acc = y.to_vec();
        acc.iter_mut().zip(&self.carry).for_each(|(a, c)| *a += c);
        self.carry = acc.split_off(self.l);
        self.block += 1;
        Ok(acc)
    }
}

/// Direct streaming convolution `y[n] = Σ h[m]·x[n−m]` for `n < x.len()`.
pub fn direct_convolve(h: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    (0..x.len())
        .map(|n| {
            h.iter()
                .take(n + 1)
                .enumerate()
                .map(|(m, hv)| hv * x[n - m])
                .sum()
        })
        .collect()
}
