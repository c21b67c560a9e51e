//! Exact coefficient rings used by the lift and the sign analysis.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::characters::RootOfUnity;
use crate::cyclotomic::{ratio_to_f64, Cyclotomic};

/// A commutative ring of exact Fourier coefficients.
///
/// `BigInt` covers forms with real (quadratic or trivial) characters;
/// [`Cyclotomic`] covers everything else.
pub trait Coefficient: Clone + PartialEq + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn mul_int(&self, n: &BigInt) -> Self;
    /// Multiplication by a root of unity; `None` if the ring cannot hold it.
    fn mul_root(&self, root: RootOfUnity) -> Option<Self>;
    /// Exact division; `None` when the quotient leaves the ring or the
    /// divisor vanishes.
    fn div_exact(&self, other: &Self) -> Option<Self>;
    fn is_real(&self) -> bool;
    /// Sign of a real value, `None` when not real.
    fn real_sign(&self) -> Option<i8>;
    fn to_rational(&self) -> Option<BigRational>;
    fn to_complex(&self) -> Complex64;
}

impl Coefficient for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn mul_int(&self, n: &BigInt) -> Self {
        self * n
    }

    fn mul_root(&self, root: RootOfUnity) -> Option<Self> {
        match root.as_sign()? {
            1 => Some(self.clone()),
            _ => Some(-self),
        }
    }

    fn div_exact(&self, other: &Self) -> Option<Self> {
        if Zero::is_zero(other) {
            return None;
        }
        let (q, r) = num_integer::Integer::div_rem(self, other);
        Zero::is_zero(&r).then_some(q)
    }

    fn is_real(&self) -> bool {
        true
    }

    fn real_sign(&self) -> Option<i8> {
        Some(if Zero::is_zero(self) { 0 } else if self.is_positive() { 1 } else { -1 })
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(BigRational::from_integer(self.clone()))
    }

    fn to_complex(&self) -> Complex64 {
        let re = self.to_f64().unwrap_or_else(|| ratio_to_f64(&BigRational::from_integer(self.clone())));
        Complex64::new(re, 0.0)
    }
}

impl Coefficient for Cyclotomic {
    fn zero_like(&self) -> Self {
        Cyclotomic::zero(self.order())
    }

    fn is_zero(&self) -> bool {
        Cyclotomic::is_zero(self)
    }

    fn add(&self, other: &Self) -> Self {
        Cyclotomic::add(self, other)
    }

    fn sub(&self, other: &Self) -> Self {
        Cyclotomic::sub(self, other)
    }

    fn mul(&self, other: &Self) -> Self {
        Cyclotomic::mul(self, other)
    }

    fn mul_int(&self, n: &BigInt) -> Self {
        Cyclotomic::mul_int(self, n)
    }

    fn mul_root(&self, root: RootOfUnity) -> Option<Self> {
        Some(Cyclotomic::mul_root(self, root))
    }

    fn div_exact(&self, other: &Self) -> Option<Self> {
        self.div(other).ok()
    }

    fn is_real(&self) -> bool {
        Cyclotomic::is_real(self)
    }

    fn real_sign(&self) -> Option<i8> {
        Cyclotomic::real_sign(self)
    }

    fn to_rational(&self) -> Option<BigRational> {
        Cyclotomic::to_rational(self)
    }

    fn to_complex(&self) -> Complex64 {
        Cyclotomic::to_complex(self)
    }
}
