//! Multimodular number-theoretic transform for exact big-integer convolution.
//!
//! Products are computed modulo several primes `p = c·2^23 + 1 < 2^31` and
//! reassembled by Garner's algorithm into the symmetric residue range, which
//! is exact as long as the product of the primes exceeds twice the a-priori
//! coefficient bound `max|a|·max|b|·min(len a, len b)`.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::arith::is_prime;
use crate::exec::{self, Execution};

/// Largest supported transform is `2^MAX_LOG`.
pub(crate) const MAX_LOG: u32 = 23;

#[derive(Clone, Debug)]
pub(crate) struct NttPrime {
    pub p: u32,
    /// `-p⁻¹ mod 2^32`.
    pinv_neg: u32,
    /// `2^64 mod p`, i.e. `R²` for converting into Montgomery form.
    r2: u32,
    /// Primitive root modulo p.
    g: u32,
}

impl NttPrime {
    fn new(p: u32) -> Self {
        let mut inv = 1u32;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r2 = ((1u128 << 64) % p as u128) as u32;
        let order = (p - 1) as u64;
        let odd_part = order >> order.trailing_zeros();
        let mut prime_divisors = vec![2u64];
        let mut m = odd_part;
        let mut d = 3;
        while d * d <= m {
            if m % d == 0 {
                prime_divisors.push(d);
                while m % d == 0 {
                    m /= d;
                }
            }
            d += 2;
        }
        if m > 1 {
            prime_divisors.push(m);
        }
        let g = (2u64..)
            .find(|&g| prime_divisors.iter().all(|&r| pow_mod_plain(g, order / r, p as u64) != 1))
            .expect("primitive root exists") as u32;
        NttPrime { p, pinv_neg: inv.wrapping_neg(), r2, g }
    }

    #[inline]
    fn redc(&self, t: u64) -> u32 {
        let m = (t as u32).wrapping_mul(self.pinv_neg);
        let u = ((t + m as u64 * self.p as u64) >> 32) as u32;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        self.redc(a as u64 * b as u64)
    }

    #[inline]
    fn to_mont(&self, a: u32) -> u32 {
        self.mul(a, self.r2)
    }

    #[inline]
    fn from_mont(&self, a: u32) -> u32 {
        self.redc(a as u64)
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn pow_mont(&self, base: u32, mut e: u64) -> u32 {
        let mut r = self.to_mont(1);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    /// In-place cyclic NTT on Montgomery-form data; `inverse` includes the
    /// `1/n` scaling.
    fn transform(&self, a: &mut [u32], inverse: bool) {
        let n = a.len();
        debug_assert!(n.is_power_of_two());
        if n == 1 {
            return;
        }
        let log = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - log);
            if i < j {
                a.swap(i, j);
            }
        }
        let g = self.to_mont(self.g);
        let mut twiddles = Vec::with_capacity(n / 2);
        let mut len = 2;
        while len <= n {
            let mut w = self.pow_mont(g, (self.p as u64 - 1) / len as u64);
            if inverse {
                w = self.pow_mont(w, self.p as u64 - 2);
            }
            let half = len / 2;
            twiddles.clear();
            let mut cur = self.to_mont(1);
            for _ in 0..half {
                twiddles.push(cur);
                cur = self.mul(cur, w);
            }
            for chunk in a.chunks_exact_mut(len) {
                let (lo, hi) = chunk.split_at_mut(half);
                for ((x, y), &t) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                    let u = *x;
                    let v = self.mul(*y, t);
                    *x = self.add(u, v);
                    *y = self.sub(u, v);
                }
            }
            len <<= 1;
        }
        if inverse {
            let n_inv = self.pow_mont(self.to_mont(n as u32 % self.p), self.p as u64 - 2);
            for x in a.iter_mut() {
                *x = self.mul(*x, n_inv);
            }
        }
    }
}

fn pow_mod_plain(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % m;
        }
        a = a * a % m;
        e >>= 1;
    }
    r
}

/// NTT-friendly primes, largest first.
pub(crate) fn primes() -> &'static [NttPrime] {
    static PRIMES: OnceLock<Vec<NttPrime>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let step = 1u64 << MAX_LOG;
        (1..(1u64 << (31 - MAX_LOG)))
            .rev()
            .map(|c| c * step + 1)
            .filter(|&p| is_prime(p))
            .map(|p| NttPrime::new(p as u32))
            .collect()
    })
}

/// Total modulus bits available from all primes (floor of `Σ log2 p`).
pub(crate) fn capacity_bits() -> u64 {
    primes().iter().map(|q| (q.p as f64).log2()).sum::<f64>().floor() as u64
}

fn residue(x: &BigInt, p: u32) -> u32 {
    if let Some(v) = x.to_i64() {
        return v.rem_euclid(p as i64) as u32;
    }
    let (sign, digits) = x.to_u32_digits();
    let mut r = 0u64;
    for &d in digits.iter().rev() {
        r = ((r << 32) | d as u64) % p as u64;
    }
    let r = r as u32;
    if sign == Sign::Minus && r != 0 {
        p - r
    } else {
        r
    }
}

/// Bits needed so that the symmetric residue range covers every coefficient
/// of `a * b`.
pub(crate) fn bound_bits(a: &[BigInt], b: &[BigInt]) -> u64 {
    let bits = |v: &[BigInt]| v.iter().map(|x| x.bits()).max().unwrap_or(0);
    let nnz = |v: &[BigInt]| v.iter().filter(|x| !x.is_zero()).count().max(1) as u64;
    let terms = nnz(a).min(nnz(b));
    bits(a) + bits(b) + (64 - terms.leading_zeros()) as u64 + 1
}

/// `(a * b)[0..out_len]`, exact. Caller guarantees `bound_bits(a, b)` fits
/// within [`capacity_bits`] and the transform size fits `2^MAX_LOG`.
pub(crate) fn convolve(a: &[BigInt], b: &[BigInt], out_len: usize, exec: Execution) -> Vec<BigInt> {
    let needed = bound_bits(a, b);
    let mut chosen = Vec::new();
    let mut acc = 0.0f64;
    for q in primes() {
        if acc >= needed as f64 + 1.0 {
            break;
        }
        chosen.push(q);
        acc += (q.p as f64).log2();
    }
    assert!(acc >= needed as f64 + 1.0, "coefficient bound exceeds NTT capacity");
    let full = a.len() + b.len() - 1;
    let size = full.next_power_of_two();
    assert!(size <= 1 << MAX_LOG, "transform of size {size} too large");
    let squaring = std::ptr::eq(a, b);

    let residues: Vec<Vec<u32>> = exec::map_items(exec, &chosen, |q| {
        let load = |src: &[BigInt]| {
            let mut v = vec![0u32; size];
            for (slot, x) in v.iter_mut().zip(src) {
                *slot = q.to_mont(residue(x, q.p));
            }
            q.transform(&mut v, false);
            v
        };
        let mut fa = load(a);
        if squaring {
            for x in fa.iter_mut() {
                *x = q.mul(*x, *x);
            }
        } else {
            let fb = load(b);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x = q.mul(*x, *y);
            }
        }
        q.transform(&mut fa, true);
        fa.truncate(out_len.min(full));
        for x in fa.iter_mut() {
            *x = q.from_mont(*x);
        }
        fa
    });

    let garner = Garner::new(&chosen);
    let n = out_len.min(full);
    let mut out = exec::tabulate(exec, n, 4096, |i| {
        let r: Vec<u32> = residues.iter().map(|v| v[i]).collect();
        garner.reconstruct(&r)
    });
    out.resize(out_len, BigInt::zero());
    out
}

/// Garner mixed-radix reconstruction into the symmetric range.
struct Garner {
    moduli: Vec<u32>,
    /// `inv[i][j] = p_j⁻¹ mod p_i` for `j < i`.
    inv: Vec<Vec<u64>>,
    /// `Π p_j` for `j < i`, as BigInt (and u128 where it fits).
    prefix: Vec<BigInt>,
    prefix128: Option<Vec<u128>>,
    modulus: BigInt,
    half: BigInt,
}

impl Garner {
    fn new(primes: &[&NttPrime]) -> Self {
        let moduli: Vec<u32> = primes.iter().map(|q| q.p).collect();
        let inv = moduli
            .iter()
            .enumerate()
            .map(|(i, &pi)| {
                moduli[..i]
                    .iter()
                    .map(|&pj| pow_mod_plain(pj as u64 % pi as u64, pi as u64 - 2, pi as u64))
                    .collect()
            })
            .collect();
        let mut prefix = Vec::with_capacity(moduli.len());
        let mut m = BigInt::from(1);
        for &p in &moduli {
            prefix.push(m.clone());
            m *= p;
        }
        let prefix128 = if m.bits() <= 126 {
            Some(prefix.iter().map(|x| x.to_u128().expect("fits")).collect())
        } else {
            None
        };
        let half = &m >> 1;
        Garner { moduli, inv, prefix, prefix128, modulus: m, half }
    }

    fn reconstruct(&self, r: &[u32]) -> BigInt {
        let k = self.moduli.len();
        let mut digits = vec![0u64; k];
        for i in 0..k {
            let pi = self.moduli[i] as u64;
            let mut t = r[i] as u64;
            for j in 0..i {
                t = (t + pi - digits[j] % pi) % pi * self.inv[i][j] % pi;
            }
            digits[i] = t;
        }
        if let Some(prefix) = &self.prefix128 {
            let v: u128 = digits.iter().zip(prefix).map(|(&d, &p)| d as u128 * p).sum();
            let m = self.modulus.to_u128().expect("fits");
            return if v > m / 2 { BigInt::from(v) - BigInt::from(m) } else { BigInt::from(v) };
        }
        let mut v = BigInt::zero();
        for (d, p) in digits.iter().zip(&self.prefix) {
            if *d != 0 {
                v += p * *d;
            }
        }
        if v > self.half {
            v - &self.modulus
        } else {
            v
        }
    }
}
