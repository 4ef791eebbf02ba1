//! Dense real linear algebra used by the FIR design procedures.
//!
//! Only what the designs need lives here: a symmetric matrix type, the
//! Toeplitz band-power matrix, a cyclic Jacobi eigensolver and a pivoted
//! Gaussian-elimination solver.

use crate::error::{invalid, Error, Result};

/// Relative tolerance used when checking symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Jacobi stops once the off-diagonal Frobenius norm drops below this times `‖S‖`.
pub const JACOBI_TOL: f64 = 1e-12;
/// Maximum number of Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Pivots smaller than this times `‖S‖` are treated as zero.
pub const PIVOT_TOL: f64 = 1e-13;

/// Square symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major data, checking symmetry.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(invalid(format!(
                "expected {n}x{n} entries, got {}",
                data.len()
            )));
        }
        let scale = data
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = (data[i * n + j] - data[j * n + i]).abs();
                if diff > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        diff,
                    });
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix from a function of `(row, col)`; only the upper
    /// triangle is evaluated and mirrored.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Quadratic form `xᵀSx`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    /// Entry-wise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SymMatrix, b: f64) -> Result<SymMatrix> {
        if self.n != other.n {
            return Err(invalid("matrix orders differ"));
        }
        Ok(SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    /// Every entry multiplied by `k`.
    pub fn scaled(&self, k: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }
}

/// Eigenvalue with its unit-norm eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `2 sin(dω)/d` with the `d → 0` limit `2ω`.
pub(crate) fn band_kernel(d: f64, omega: f64) -> f64 {
    if d == 0.0 {
        2.0 * omega
    } else {
        2.0 * (d * omega).sin() / d
    }
}

/// Toeplitz band-power matrix with entries `2 sin((m−n)ω_c)/(m−n)` and
/// diagonal `2ω_c`.
pub fn passband_gram(m: usize, omega_c: f64) -> Result<SymMatrix> {
    if m == 0 {
        return Err(invalid("matrix order must be at least 1"));
    }
    if !(omega_c > 0.0 && omega_c <= std::f64::consts::PI) {
        return Err(Error::BadCutoff(omega_c));
    }
    let col: Vec<f64> = (0..m).map(|d| band_kernel(d as f64, omega_c)).collect();
    Ok(SymMatrix::from_fn(m, |i, j| col[i.abs_diff(j)]))
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Pairs are sorted by descending eigenvalue and every eigenvector is signed
/// so that its element sum is non-negative.
pub fn eig_sym(s: &SymMatrix) -> Result<Vec<EigenPair>> {
    let n = s.n;
    let mut a = s.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = s.norm();
    let threshold = JACOBI_TOL * scale;
    let off_norm = |a: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += a[i * n + j] * a[i * n + j];
                }
            }
        }
        acc.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= threshold || scale == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|j| {
            let mut vector: Vec<f64> = (0..n).map(|k| v[k * n + j]).collect();
            let nrm = norm2(&vector);
            vector.iter_mut().for_each(|x| *x /= nrm);
            fix_sign(&mut vector);
            EigenPair {
                value: a[j * n + j],
                vector,
            }
        })
        .collect();
    pairs.sort_by(|x, y| y.value.total_cmp(&x.value));
    Ok(pairs)
}

/// Flips `v` so its element sum is non-negative. Vectors whose sum is
/// negligible are signed by their first significant entry instead, keeping
/// the choice deterministic.
fn fix_sign(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    let flip = if sum.abs() > 1e-12 {
        sum < 0.0
    } else {
        v.iter().find(|x| x.abs() > 1e-12).is_some_and(|x| *x < 0.0)
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Solves `S·h = b` by Gaussian elimination with partial pivoting.
pub fn solve(s: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = s.n;
    if b.len() != n {
        return Err(invalid(format!(
            "right-hand side has length {}, expected {n}",
            b.len()
        )));
    }
    let tol = PIVOT_TOL * s.norm();
    let mut a = s.data.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let (piv_row, piv) =
            (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if piv <= tol {
            return Err(Error::Singular {
                column: col,
                pivot: piv,
            });
        }
        if piv_row != col {
            for k in 0..n {
                a.swap(col * n + k, piv_row * n + k);
            }
            x.swap(col, piv_row);
        }
        let d = a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let tail: f64 = ((col + 1)..n).map(|k| a[col * n + k] * x[k]).sum();
        x[col] = (x[col] - tail) / a[col * n + col];
    }
    Ok(x)
}
