//! Exact arithmetic in cyclotomic fields `ℚ(ζ_m)`.
//!
//! Elements are stored on the power basis `1, ζ, …, ζ^{φ(m)−1}` with rational
//! coordinates, always reduced modulo the cyclotomic polynomial `Φ_m`, so two
//! elements of the same field are equal iff their coordinates are.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::characters::RootOfUnity;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CyclotomicError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse {0:?} as a cyclotomic number")]
    Parse(String),
    #[error("coordinate vector has length {got}, field of order {order} needs {expected}")]
    Dimension { order: u32, expected: usize, got: usize },
}

/// `Φ_m` as integer coefficients, lowest degree first. Cached per order.
pub fn cyclotomic_polynomial(m: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("poisoned").get(&m) {
        return p.clone();
    }
    // x^m − 1 divided by Φ_d for every proper divisor d.
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            let den = cyclotomic_polynomial(d);
            num = poly_div_exact(&num, &den);
        }
    }
    let p = Arc::new(num);
    cache.lock().expect("poisoned").insert(m, p.clone());
    p
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let mut quot = vec![0i64; num.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

/// Reduces `poly` (any length) modulo the monic `Φ_m`.
fn reduce_mod_phi(mut poly: Vec<BigRational>, m: u32) -> Vec<BigRational> {
    let phi = cyclotomic_polynomial(m);
    let deg = phi.len() - 1;
    for i in (deg..poly.len()).rev() {
        if poly[i].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut poly[i], BigRational::zero());
        for (j, &pj) in phi[..deg].iter().enumerate() {
            if pj != 0 {
                poly[i - deg + j] -= &c * BigRational::from_integer(BigInt::from(pj));
            }
        }
    }
    poly.truncate(deg);
    poly.resize(deg, BigRational::zero());
    poly
}

fn phi(m: u32) -> usize {
    cyclotomic_polynomial(m).len() - 1
}

/// An element of `ℚ(ζ_order)`.
#[derive(Clone)]
pub struct Cyclotomic {
    order: u32,
    coords: Vec<BigRational>,
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclotomic<{}>({})", self.order, self.to_text())
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coords == other.coords;
        }
        let m = self.order.lcm(&other.order);
        self.lift(m).coords == other.lift(m).coords
    }
}

impl Eq for Cyclotomic {}

impl Cyclotomic {
    pub fn zero(order: u32) -> Self {
        Cyclotomic { order, coords: vec![BigRational::zero(); phi(order)] }
    }

    pub fn one(order: u32) -> Self {
        Self::rational(order, BigRational::one())
    }

    pub fn rational(order: u32, r: BigRational) -> Self {
        let mut z = Self::zero(order);
        z.coords[0] = r;
        z
    }

    pub fn integer(order: u32, n: impl Into<BigInt>) -> Self {
        Self::rational(order, BigRational::from_integer(n.into()))
    }

    /// `ζ` itself, as an element of `ℚ(ζ_order)`.
    pub fn root(order: u32, root: RootOfUnity) -> Self {
        let m = order.lcm(&root.order());
        let mut poly = vec![BigRational::zero(); m as usize];
        poly[root.exponent_in(m) as usize] = BigRational::one();
        Cyclotomic { order: m, coords: reduce_mod_phi(poly, m) }
    }

    pub fn from_coords(order: u32, coords: Vec<BigRational>) -> Result<Self, CyclotomicError> {
        let expected = phi(order);
        if coords.len() != expected {
            return Err(CyclotomicError::Dimension { order, expected, got: coords.len() });
        }
        Ok(Cyclotomic { order, coords })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Re-expresses `self` in `ℚ(ζ_m)`, `order | m`.
    pub fn lift(&self, m: u32) -> Self {
        if m == self.order {
            return self.clone();
        }
        assert!(m % self.order == 0, "cannot lift order {} into {m}", self.order);
        let step = (m / self.order) as usize;
        let mut poly = vec![BigRational::zero(); m as usize];
        for (i, c) in self.coords.iter().enumerate() {
            poly[i * step] = c.clone();
        }
        Cyclotomic { order: m, coords: reduce_mod_phi(poly, m) }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let m = self.order.lcm(&other.order);
        (self.lift(m), other.lift(m))
    }

    /// The Galois automorphism `ζ ↦ ζ^j`, `gcd(j, order) = 1`.
    pub fn galois(&self, j: u32) -> Self {
        let m = self.order as usize;
        let mut poly = vec![BigRational::zero(); m];
        for (i, c) in self.coords.iter().enumerate() {
            poly[(i * j as usize) % m] += c;
        }
        Cyclotomic { order: self.order, coords: reduce_mod_phi(poly, self.order) }
    }

    /// Complex conjugation.
    pub fn conj(&self) -> Self {
        self.galois(self.order - 1)
    }

    pub fn is_real(&self) -> bool {
        self.order <= 2 || *self == self.conj()
    }

    /// The rational value, if `self ∈ ℚ`.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.coords[1..].iter().all(Zero::is_zero) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect();
        Cyclotomic { order: a.order, coords }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x - y).collect();
        Cyclotomic { order: a.order, coords }
    }

    pub fn neg(&self) -> Self {
        Cyclotomic { order: self.order, coords: self.coords.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        if a.coords.len() == 1 {
            return Cyclotomic { order: a.order, coords: vec![&a.coords[0] * &b.coords[0]] };
        }
        let mut poly = vec![BigRational::zero(); 2 * a.coords.len() - 1];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                if !y.is_zero() {
                    poly[i + j] += x * y;
                }
            }
        }
        Cyclotomic { order: a.order, coords: reduce_mod_phi(poly, a.order) }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Cyclotomic { order: self.order, coords: self.coords.iter().map(|c| c * r).collect() }
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        Cyclotomic { order: self.order, coords: self.coords.iter().map(|c| c * n).collect() }
    }

    pub fn mul_root(&self, root: RootOfUnity) -> Self {
        if root.is_one() {
            return self.clone();
        }
        let m = self.order.lcm(&root.order());
        let a = self.lift(m);
        let shift = root.exponent_in(m) as usize;
        let mut poly = vec![BigRational::zero(); m as usize];
        for (i, c) in a.coords.iter().enumerate() {
            poly[(i + shift) % m as usize] += c;
        }
        Cyclotomic { order: m, coords: reduce_mod_phi(poly, m) }
    }

    /// Field norm down to ℚ.
    pub fn norm(&self) -> BigRational {
        let mut acc = self.clone();
        for j in 2..self.order {
            if j.gcd(&self.order) == 1 {
                acc = acc.mul(&self.galois(j));
            }
        }
        acc.to_rational().expect("norms are rational")
    }

    /// Multiplicative inverse via `a⁻¹ = Π_{σ≠1} σ(a) / N(a)`.
    pub fn inv(&self) -> Result<Self, CyclotomicError> {
        if self.is_zero() {
            return Err(CyclotomicError::DivisionByZero);
        }
        if let Some(r) = self.to_rational() {
            return Ok(Self::rational(self.order, r.recip()));
        }
        let mut others = Self::one(self.order);
        for j in 2..self.order {
            if j.gcd(&self.order) == 1 {
                others = others.mul(&self.galois(j));
            }
        }
        let n = self.mul(&others).to_rational().expect("norms are rational");
        Ok(others.scale(&n.recip()))
    }

    pub fn div(&self, other: &Self) -> Result<Self, CyclotomicError> {
        Ok(self.mul(&other.inv()?))
    }

    /// The embedding `ζ ↦ e^{2πi/order}`.
    pub fn to_complex(&self) -> Complex64 {
        let step = std::f64::consts::TAU / self.order as f64;
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| Complex64::from_polar(ratio_to_f64(c), step * i as f64))
            .sum()
    }

    /// Sign of a real element: exact for rationals, through the complex
    /// embedding otherwise. `None` if `self` is not real.
    pub fn real_sign(&self) -> Option<i8> {
        if let Some(r) = self.to_rational() {
            return Some(if r.is_zero() { 0 } else if r.is_positive() { 1 } else { -1 });
        }
        if !self.is_real() {
            return None;
        }
        let re = self.to_complex().re;
        Some(if re > 0.0 { 1 } else if re < 0.0 { -1 } else { 0 })
    }

    /// `p/q` for rationals, `[c0,c1,...]` over the power basis otherwise.
    pub fn to_text(&self) -> String {
        match self.to_rational() {
            Some(r) => rational_text(&r),
            None => {
                let parts: Vec<String> = self.coords.iter().map(rational_text).collect();
                format!("[{}]", parts.join(","))
            }
        }
    }

    /// Inverse of [`Cyclotomic::to_text`] in the field of the given order.
    pub fn parse(text: &str, order: u32) -> Result<Self, CyclotomicError> {
        let t = text.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let coords = inner
                .split(',')
                .map(|c| parse_rational(c.trim()).ok_or_else(|| CyclotomicError::Parse(text.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            Self::from_coords(order, coords)
        } else {
            let r = parse_rational(t).ok_or_else(|| CyclotomicError::Parse(text.to_string()))?;
            Ok(Self::rational(order, r))
        }
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Scale down huge numerators and denominators together.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn rational_text(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Integer combination `Σ c_j ζ_m^j`, accumulated in `ℤ[x]/(x^m − 1)`
/// and reduced modulo `Φ_m` only when read out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSum {
    order: u32,
    counts: Vec<i64>,
}

impl RootSum {
    pub fn new(order: u32) -> Self {
        RootSum { order, counts: vec![0; order as usize] }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn add_root(&mut self, root: RootOfUnity, weight: i64) {
        self.counts[root.exponent_in(self.order) as usize] += weight;
    }

    pub fn merge(&mut self, other: &RootSum) {
        assert_eq!(self.order, other.order);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    pub fn reduce(&self) -> Cyclotomic {
        let poly = self
            .counts
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect();
        Cyclotomic { order: self.order, coords: reduce_mod_phi(poly, self.order) }
    }

    pub fn to_complex(&self) -> Complex64 {
        let step = std::f64::consts::TAU / self.order as f64;
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| Complex64::from_polar(c as f64, step * j as f64))
            .sum()
    }
}
