//! Truncated q-series with exact integer coefficients.
//!
//! A [`QSeries`] is `q^{offset24/24} · Σ_{n=0}^{T} c_n q^n`. Products pick one
//! of three exact kernels: a schoolbook loop over nonzero pairs when either
//! side is sparse (the pentagonal η base, θ), and a multimodular NTT for
//! dense operands. The plain O(T²) convolution is kept as [`QSeries::mul_naive`]
//! and serves as the test oracle for both.

mod cache;
mod ntt;

pub use cache::{CacheError, CacheStatus, SeriesCache, SeriesKey};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exec::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QSeriesError {
    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(usize, usize),
    #[error("q-exponent offset {0}/24 is not an integer")]
    NonIntegralExponent(i64),
}

/// Which product kernel [`QSeries::mul_with`] may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MulKernel {
    /// Pick by sparsity and size.
    #[default]
    Auto,
    Naive,
    Sparse,
    Ntt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    offset24: i64,
    coeffs: Vec<BigInt>,
}

impl QSeries {
    /// Series with the given coefficients `c_0..c_T`.
    pub fn new(offset24: i64, coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        QSeries { offset24, coeffs }
    }

    pub fn from_i64(offset24: i64, coeffs: &[i64], truncation: usize) -> Self {
        let mut c: Vec<BigInt> = coeffs.iter().take(truncation + 1).map(|&x| BigInt::from(x)).collect();
        c.resize(truncation + 1, BigInt::zero());
        QSeries::new(offset24, c)
    }

    /// The series `1 + O(q^{T+1})`.
    pub fn one(truncation: usize) -> Self {
        Self::from_i64(0, &[1], truncation)
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn offset24(&self) -> i64 {
        self.offset24
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    /// Coefficient of `q^{n + offset24/24}`; zero above the truncation.
    pub fn coeff(&self, n: usize) -> BigInt {
        self.coeffs.get(n).cloned().unwrap_or_default()
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// Folds an integral `q^{offset24/24}` prefactor into the coefficients,
    /// keeping the truncation: the result has offset 0 and `c'_{n+s} = c_n`.
    pub fn to_integral(&self) -> Result<QSeries, QSeriesError> {
        if self.offset24 % 24 != 0 {
            return Err(QSeriesError::NonIntegralExponent(self.offset24));
        }
        let shift = self.offset24 / 24;
        let t = self.truncation();
        let coeffs = (0..=t as i64)
            .map(|n| {
                let src = n - shift;
                if src >= 0 && (src as usize) <= t {
                    self.coeffs[src as usize].clone()
                } else {
                    BigInt::zero()
                }
            })
            .collect();
        Ok(QSeries { offset24: 0, coeffs })
    }

    /// Substitutes `q ↦ q^m`, keeping the truncation.
    pub fn dilate(&self, m: usize) -> QSeries {
        let t = self.truncation();
        let mut coeffs = vec![BigInt::zero(); t + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if i * m > t {
                break;
            }
            coeffs[i * m] = c.clone();
        }
        QSeries { offset24: self.offset24 * m as i64, coeffs }
    }

    fn check_truncation(&self, other: &Self) -> Result<(), QSeriesError> {
        if self.truncation() != other.truncation() {
            return Err(QSeriesError::TruncationMismatch(self.truncation(), other.truncation()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<QSeries, QSeriesError> {
        self.mul_with(other, MulKernel::Auto, Execution::default())
    }

    /// Plain O(T²) convolution over all index pairs.
    pub fn mul_naive(&self, other: &Self) -> Result<QSeries, QSeriesError> {
        self.check_truncation(other)?;
        let t = self.truncation();
        let mut out = vec![BigInt::zero(); t + 1];
        for i in 0..=t {
            for j in 0..=t - i {
                out[i + j] += &self.coeffs[i] * &other.coeffs[j];
            }
        }
        Ok(QSeries { offset24: self.offset24 + other.offset24, coeffs: out })
    }

    pub fn mul_with(&self, other: &Self, kernel: MulKernel, exec: Execution) -> Result<QSeries, QSeriesError> {
        self.check_truncation(other)?;
        let len = self.truncation() + 1;
        let kernel = match kernel {
            MulKernel::Auto => {
                let nnz = self.nonzero_count().min(other.nonzero_count());
                let log = (usize::BITS - len.leading_zeros()) as usize;
                if len <= 64 || nnz <= 8 * log {
                    MulKernel::Sparse
                } else {
                    MulKernel::Ntt
                }
            }
            k => k,
        };
        let coeffs = match kernel {
            MulKernel::Naive => return self.mul_naive(other),
            MulKernel::Sparse => sparse_product(&self.coeffs, &other.coeffs, exec),
            MulKernel::Ntt | MulKernel::Auto => dense_product(&self.coeffs, &other.coeffs, exec),
        };
        Ok(QSeries { offset24: self.offset24 + other.offset24, coeffs })
    }

    /// `self^r` by binary exponentiation; `r = 0` gives `1`.
    pub fn pow(&self, r: u32) -> QSeries {
        self.pow_with(r, Execution::default())
    }

    pub fn pow_with(&self, r: u32, exec: Execution) -> QSeries {
        let mut result: Option<QSeries> = None;
        let mut base = self.clone();
        let mut e = r;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(acc) => acc.mul_with(&base, MulKernel::Auto, exec).expect("same truncation"),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_with(&base, MulKernel::Auto, exec).expect("same truncation");
            }
        }
        result.unwrap_or_else(|| QSeries::one(self.truncation()))
    }

    /// Multiplicative inverse of a series with constant term ±1.
    pub fn inverse(&self) -> Option<QSeries> {
        let c0 = &self.coeffs[0];
        if !(c0.is_one() || (-c0).is_one()) {
            return None;
        }
        let t = self.truncation();
        let nonzero: Vec<(usize, &BigInt)> =
            self.coeffs.iter().enumerate().skip(1).filter(|(_, c)| !c.is_zero()).collect();
        let mut inv = vec![BigInt::zero(); t + 1];
        inv[0] = c0.clone();
        for n in 1..=t {
            let mut s = BigInt::zero();
            for &(i, c) in &nonzero {
                if i > n {
                    break;
                }
                s += c * &inv[n - i];
            }
            inv[n] = -(s * c0);
        }
        Some(QSeries { offset24: -self.offset24, coeffs: inv })
    }
}

/// Product of two truncated coefficient vectors, iterating the nonzeros of
/// the sparser operand. Parallel over output chunks.
fn sparse_product(a: &[BigInt], b: &[BigInt], exec: Execution) -> Vec<BigInt> {
    let len = a.len();
    let nnz_a = a.iter().filter(|c| !c.is_zero()).count();
    let nnz_b = b.iter().filter(|c| !c.is_zero()).count();
    let (sparse, dense) = if nnz_a <= nnz_b { (a, b) } else { (b, a) };
    let terms: Vec<(usize, &BigInt)> = sparse.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
    exec::map_chunks(exec, 0..len, 2048, |range| {
        let mut out = vec![BigInt::zero(); range.len()];
        for &(i, s) in &terms {
            if i >= range.end {
                break;
            }
            let lo = range.start.max(i);
            for r in lo..range.end {
                let d = &dense[r - i];
                if !d.is_zero() {
                    out[r - range.start] += s * d;
                }
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Dense product through the multimodular NTT. Operands whose coefficient
/// bound exceeds the prime budget are split into base-2^k digits.
fn dense_product(a: &[BigInt], b: &[BigInt], exec: Execution) -> Vec<BigInt> {
    let len = a.len();
    if ntt::bound_bits(a, b) + 1 < ntt::capacity_bits() {
        return ntt::convolve(a, b, len, exec);
    }
    // Split the operand with more bits: a = lo + 2^k·hi.
    let bits = |v: &[BigInt]| v.iter().map(|x| x.bits()).max().unwrap_or(0);
    if bits(a) < bits(b) {
        return dense_product(b, a, exec);
    }
    let k = (bits(a) / 2).max(1);
    let mask: BigInt = (BigInt::one() << k) - 1;
    let split = |x: &BigInt| {
        let (sign, mag) = (x.sign(), x.magnitude().clone());
        let lo = BigInt::from_biguint(sign, &mag & mask.magnitude());
        let hi = BigInt::from_biguint(sign, mag >> k);
        (lo, hi)
    };
    let (lo, hi): (Vec<BigInt>, Vec<BigInt>) = a.iter().map(split).unzip();
    let plo = dense_product(&lo, b, exec);
    let phi = dense_product(&hi, b, exec);
    plo.into_iter().zip(phi).map(|(l, h)| l + (h << k)).collect()
}

/// `η(mz) = q^{m/24} Π_{n≥1} (1 − q^{mn})`, truncated at `T`.
///
/// The product is expanded with Euler's pentagonal number theorem.
pub fn dedekind_eta(m: u32, truncation: usize) -> QSeries {
    assert!(m >= 1, "eta scale must be positive");
    let mut coeffs = vec![BigInt::zero(); truncation + 1];
    let m = m as usize;
    for k in 0usize.. {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let p1 = (k * (3 * k + 1) / 2 - k) * m;
        if p1 > truncation {
            break;
        }
        coeffs[p1] = BigInt::from(sign);
        if k > 0 {
            let p2 = k * (3 * k + 1) / 2 * m;
            if p2 <= truncation {
                coeffs[p2] = BigInt::from(sign);
            }
        }
    }
    QSeries { offset24: m as i64, coeffs }
}

/// `θ(z) = 1 + 2 Σ_{n≥1} q^{n²}`.
pub fn theta(truncation: usize) -> QSeries {
    let mut coeffs = vec![BigInt::zero(); truncation + 1];
    coeffs[0] = BigInt::one();
    for n in 1usize.. {
        if n * n > truncation {
            break;
        }
        coeffs[n * n] = BigInt::from(2);
    }
    QSeries { offset24: 0, coeffs }
}

/// `Π η(m_i z)^{r_i}` with possibly negative exponents.
pub fn eta_quotient(factors: &[(u32, i32)], truncation: usize) -> QSeries {
    eta_quotient_with(factors, truncation, Execution::default())
}

pub fn eta_quotient_with(factors: &[(u32, i32)], truncation: usize, exec: Execution) -> QSeries {
    let mut acc = QSeries::one(truncation);
    for &(m, r) in factors {
        if r == 0 {
            continue;
        }
        let base = dedekind_eta(1, truncation);
        let base = if r < 0 { base.inverse().expect("unit constant term") } else { base };
        let power = base.pow_with(r.unsigned_abs(), exec).dilate(m as usize);
        acc = acc.mul_with(&power, MulKernel::Auto, exec).expect("same truncation");
    }
    acc
}

/// `Δ = η(z)^{24} = Σ τ(n) qⁿ`, with integral exponents (offset 0).
pub fn delta(truncation: usize) -> QSeries {
    delta_with(truncation, Execution::default())
}

pub fn delta_with(truncation: usize, exec: Execution) -> QSeries {
    eta_quotient_with(&[(1, 24)], truncation, exec)
        .to_integral()
        .expect("η^24 has integral exponent")
}
