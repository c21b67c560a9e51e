//! The Shimura lift, its Möbius inversion, and normalized eigenvalues.
//!
//! For a half-integral weight form `f` of weight `k + 1/2`, level `N` and
//! character `χ`, and a squarefree `t` with `a(t) ≠ 0`, the lift has
//! coefficients
//!
//! ```text
//! A_t(n) = Σ_{d | n} χ_{t,N}(d) d^{k−1} a(t n²/d²),   χ_{t,N}(d) = χ(d) ((−1)^k N² t / d).
//! ```
//!
//! Both directions are Dirichlet convolutions and are evaluated over
//! divisor lists from a smallest-prime-factor sieve, in parallel over `n`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arith::{self, kronecker, FactorSieve};
use crate::characters::{principal, DirichletCharacter, RootOfUnity};
use crate::coeff::Coefficient;
use crate::cyclotomic::{ratio_to_f64, Cyclotomic};
use crate::exec::{self, Execution};
use crate::halfint::HalfIntegralForm;
use crate::qseries;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShimuraError {
    #[error("coefficient table too short: a({missing_index}) is not available")]
    Range { missing_index: u64 },
    #[error("level {0} is not divisible by 4")]
    Level(u64),
    #[error("character modulus {got} does not match level {level}")]
    CharacterModulus { level: u64, got: u64 },
    #[error("t = {0} is not squarefree")]
    TNotSquarefree(u64),
    #[error("k = {0} is below 2")]
    WeightTooSmall(u32),
    #[error("a(t) = 0")]
    ATZero,
    #[error("{p} is not a prime coprime to the level {level}")]
    BadPrime { p: u64, level: u64 },
    #[error("character values do not fit the coefficient ring")]
    CoefficientRing,
    #[error("Ramanujan-Petersson bound violated at p = {p}")]
    RamanujanPetersson { p: u64 },
    #[error("A_t({p})/chi({p}) is not real")]
    Reality { p: u64 },
}

/// The data `(N, k, t, χ)` fixing one lift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShimuraParams {
    level: u64,
    k: u32,
    t: u64,
    chi: DirichletCharacter,
}

impl ShimuraParams {
    pub fn new(level: u64, k: u32, t: u64, chi: DirichletCharacter) -> Result<Self, ShimuraError> {
        if level == 0 || level % 4 != 0 {
            return Err(ShimuraError::Level(level));
        }
        if chi.modulus() != level {
            return Err(ShimuraError::CharacterModulus { level, got: chi.modulus() });
        }
        if k < 2 {
            return Err(ShimuraError::WeightTooSmall(k));
        }
        if t == 0 || !arith::factorize(t).map(|f| f.is_squarefree()).unwrap_or(false) {
            return Err(ShimuraError::TNotSquarefree(t));
        }
        Ok(ShimuraParams { level, k, t, chi })
    }

    /// `N = 4`, `k = 6`, `t = 1`, trivial character: the weight 13/2 form
    /// whose lift is `Δ`.
    pub fn delta_preimage() -> Self {
        Self::new(4, 6, 1, principal(4).expect("modulus 4")).expect("valid preset")
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn chi(&self) -> &DirichletCharacter {
        &self.chi
    }

    /// `(−1)^k N² t`.
    pub fn twist_discriminant(&self) -> i64 {
        let d = (self.level * self.level * self.t) as i64;
        if self.k % 2 == 0 { d } else { -d }
    }

    /// `χ₁(p) = ((−1)^k N² t / p)`.
    pub fn chi1(&self, p: u64) -> i8 {
        kronecker(self.twist_discriminant(), p as i64)
    }

    /// `χ_{t,N}(d)`; `None` stands for the value 0.
    pub fn chi_tn(&self, d: u64) -> Option<RootOfUnity> {
        let c = self.chi.evaluate(d as i64)?;
        match kronecker(self.twist_discriminant(), d as i64) {
            0 => None,
            1 => Some(c),
            _ => Some(c.mul(RootOfUnity::MINUS_ONE)),
        }
    }

    fn check_prime(&self, p: u64) -> Result<(), ShimuraError> {
        if !arith::is_prime(p) || self.level % p == 0 {
            return Err(ShimuraError::BadPrime { p, level: self.level });
        }
        Ok(())
    }

    /// `w[d] = μ(d)^{[mobius]} χ_{t,N}(d) d^{k−1}` for `d ≤ len`, `None` when zero.
    fn weights(&self, len: usize, sieve: &FactorSieve, mobius: bool) -> Vec<Option<(RootOfUnity, BigInt)>> {
        (0..=len)
            .map(|d| {
                if d == 0 {
                    return None;
                }
                let root = self.chi_tn(d as u64)?;
                let mut w = BigInt::from(d).pow(self.k - 1);
                if mobius {
                    match sieve.factorize(d as u64).expect("d ≥ 1").mobius() {
                        0 => return None,
                        -1 => w = -w,
                        _ => {}
                    }
                }
                Some((root, w))
            })
            .collect()
    }
}

/// `out[n] = Σ_{d|n} w[d]·table[n/d]` for `1 ≤ n ≤ len`; `out[0]` is zero.
fn weighted_convolution<C: Coefficient>(
    weights: &[Option<(RootOfUnity, BigInt)>],
    table: &[C],
    len: usize,
    sieve: &FactorSieve,
    exec: Execution,
) -> Result<Vec<C>, ShimuraError> {
    let zero = table[1].zero_like();
    let out = exec::tabulate(exec, len + 1, 1024, |n| -> Option<C> {
        if n == 0 {
            return Some(zero.clone());
        }
        let mut acc = zero.clone();
        for d in sieve.factorize(n as u64).expect("n ≥ 1").divisors() {
            let d = d as usize;
            if let Some((root, w)) = &weights[d] {
                let x = &table[n / d];
                if !x.is_zero() {
                    acc = acc.add(&x.mul_root(*root)?.mul_int(w));
                }
            }
        }
        Some(acc)
    });
    out.into_iter().collect::<Option<Vec<C>>>().ok_or(ShimuraError::CoefficientRing)
}

/// An integral weight form `F_t = Σ A_t(n) qⁿ` with its metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedForm<C> {
    weight: u32,
    level: u64,
    character: DirichletCharacter,
    a_t: C,
    coeffs: Vec<C>,
}

impl<C: Coefficient> LiftedForm<C> {
    /// `coeffs[n] = A(n)` for `1 ≤ n ≤ T`; `coeffs[0]` is ignored.
    pub fn new(weight: u32, level: u64, character: DirichletCharacter, coeffs: Vec<C>) -> Result<Self, ShimuraError> {
        if coeffs.len() < 2 {
            return Err(ShimuraError::Range { missing_index: 1 });
        }
        if coeffs[1].is_zero() {
            return Err(ShimuraError::ATZero);
        }
        Ok(LiftedForm { weight, level, character, a_t: coeffs[1].clone(), coeffs })
    }

    /// Weight `2k`, level `N/2`, character `χ²`, as attached to the lift.
    pub fn from_params(params: &ShimuraParams, coeffs: Vec<C>) -> Result<Self, ShimuraError> {
        Self::new(2 * params.k, params.level / 2, params.chi.pow(2), coeffs)
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn character(&self) -> &DirichletCharacter {
        &self.character
    }

    /// `a(t) = A_t(1)`.
    pub fn a_t(&self) -> &C {
        &self.a_t
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> Option<&C> {
        if n == 0 {
            return None;
        }
        self.coeffs.get(n)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn with_coefficient(&self, n: usize, value: C) -> Self {
        let mut out = self.clone();
        out.coeffs[n] = value;
        out.a_t = out.coeffs[1].clone();
        out
    }

    fn get(&self, n: usize) -> Result<&C, ShimuraError> {
        self.coeff(n).ok_or(ShimuraError::Range { missing_index: n as u64 })
    }
}

/// `A_t(n)` for `n ≤ T` from `a_sq[n] = a(tn²)`.
pub fn lift_table<C: Coefficient>(
    params: &ShimuraParams,
    a_sq: &[C],
    truncation: usize,
    exec: Execution,
) -> Result<Vec<C>, ShimuraError> {
    if a_sq.len() <= truncation.max(1) {
        let m = a_sq.len().max(1) as u64;
        return Err(ShimuraError::Range { missing_index: params.t * m * m });
    }
    let sieve = FactorSieve::new(truncation as u64);
    let weights = params.weights(truncation, &sieve, false);
    weighted_convolution(&weights, a_sq, truncation, &sieve, exec)
}

/// `a(tn²) = Σ_{d|n} μ(d) χ_{t,N}(d) d^{k−1} A_t(n/d)` for `n ≤ T`.
pub fn invert_lift_table<C: Coefficient>(
    params: &ShimuraParams,
    lifted: &[C],
    truncation: usize,
    exec: Execution,
) -> Result<Vec<C>, ShimuraError> {
    if lifted.len() <= truncation.max(1) {
        return Err(ShimuraError::Range { missing_index: lifted.len().max(1) as u64 });
    }
    let sieve = FactorSieve::new(truncation as u64);
    let weights = params.weights(truncation, &sieve, true);
    weighted_convolution(&weights, lifted, truncation, &sieve, exec)
}

/// Lift of a tabulated half-integral form. Needs `a(tn²)` for all `n ≤ T`.
pub fn lift(f: &HalfIntegralForm, truncation: usize) -> Result<LiftedForm<Cyclotomic>, ShimuraError> {
    let params = ShimuraParams::new(f.level(), f.k(), f.t(), f.nebentypus().clone())?;
    let t = f.t();
    let mut a_sq = vec![Cyclotomic::zero(f.field_order()); truncation + 1];
    for (n, slot) in a_sq.iter_mut().enumerate().skip(1) {
        let idx = t * (n as u64) * (n as u64);
        if idx > f.truncation() {
            return Err(ShimuraError::Range { missing_index: idx });
        }
        *slot = f.coefficient(idx).expect("index checked");
    }
    let coeffs = lift_table(&params, &a_sq, truncation, Execution::default())?;
    LiftedForm::from_params(&params, coeffs)
}

/// `n ↦ a(tn²)` for `n ≤ T`, entry 0 zero.
pub fn invert_lift<C: Coefficient>(
    lifted: &LiftedForm<C>,
    params: &ShimuraParams,
    truncation: usize,
) -> Result<Vec<C>, ShimuraError> {
    invert_lift_table(params, lifted.coeffs(), truncation, Execution::default())
}

/// `value / (2·scale·p^{k−1/2})` for real `value`, `scale`, with the bound
/// `|value/scale| ≤ 2p^{k−1/2}` checked exactly whenever `(value/scale)²`
/// is rational.
pub fn normalized_value<C: Coefficient>(value: &C, scale: &C, p: u64, k: u32) -> Result<f64, ShimuraError> {
    let (Some(sv), Some(ss)) = (value.real_sign(), scale.real_sign()) else {
        return Err(ShimuraError::Reality { p });
    };
    if ss == 0 {
        return Err(ShimuraError::ATZero);
    }
    if sv == 0 {
        return Ok(0.0);
    }
    let bound_sq = BigInt::from(4) * BigInt::from(p).pow(2 * k - 1);
    let num_sq = value.mul(value);
    let den_sq = scale.mul(scale);
    let ratio = match (num_sq.to_rational(), den_sq.to_rational()) {
        (Some(n), Some(d)) => {
            let r = n / (d * BigRational::from_integer(bound_sq));
            if r > BigRational::one() {
                return Err(ShimuraError::RamanujanPetersson { p });
            }
            ratio_to_f64(&r)
        }
        _ => {
            let excess = num_sq.sub(&den_sq.mul_int(&bound_sq));
            if excess.real_sign() == Some(1) {
                return Err(ShimuraError::RamanujanPetersson { p });
            }
            let r = num_sq.to_complex().re / (den_sq.to_complex().re * ratio_to_f64(&BigRational::from_integer(bound_sq)));
            r.min(1.0)
        }
    };
    let b = ratio.sqrt();
    Ok(if sv * ss > 0 { b } else { -b })
}

/// `B_t(p) = A_t(p) / (2 a(t) p^{k−1/2} χ(p))`.
pub fn bt<C: Coefficient>(lifted: &LiftedForm<C>, params: &ShimuraParams, p: u64) -> Result<f64, ShimuraError> {
    params.check_prime(p)?;
    let ap = lifted.get(p as usize)?;
    let chi_p = params.chi.evaluate(p as i64).expect("p coprime to the level");
    let v = ap.mul_root(chi_p.conj()).ok_or(ShimuraError::CoefficientRing)?;
    normalized_value(&v, lifted.a_t(), p, params.k)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedEntry<C> {
    pub p: u64,
    /// `A_t(p)/χ(p)`, exact.
    pub value: C,
    pub b: f64,
}

/// `B_t(p)` over the primes `p ≤ x_max` not dividing `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedEigenvalues<C> {
    pub a_t: C,
    pub entries: Vec<NormalizedEntry<C>>,
}

impl<C> NormalizedEigenvalues<C> {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.p)
    }

    pub fn values(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.entries.iter().map(|e| (e.p, e.b))
    }
}

pub fn normalized_eigenvalues<C: Coefficient>(
    lifted: &LiftedForm<C>,
    params: &ShimuraParams,
    x_max: u64,
    exec: Execution,
) -> Result<NormalizedEigenvalues<C>, ShimuraError> {
    if x_max as usize > lifted.truncation() {
        return Err(ShimuraError::Range { missing_index: lifted.truncation() as u64 + 1 });
    }
    let primes: Vec<u64> = arith::sieve_primes(x_max.max(2))
        .expect("limit ≥ 2")
        .up_to(x_max)
        .iter()
        .copied()
        .filter(|p| params.level % p != 0)
        .collect();
    let entries = exec::map_items(exec, &primes, |&p| -> Result<NormalizedEntry<C>, ShimuraError> {
        let chi_p = params.chi.evaluate(p as i64).expect("p coprime to the level");
        let value = lifted.get(p as usize)?.mul_root(chi_p.conj()).ok_or(ShimuraError::CoefficientRing)?;
        let b = normalized_value(&value, lifted.a_t(), p, params.k)?;
        Ok(NormalizedEntry { p, value, b })
    });
    Ok(NormalizedEigenvalues { a_t: lifted.a_t().clone(), entries: entries.into_iter().collect::<Result<_, _>>()? })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeReport {
    /// Number of relations tested.
    pub checked: usize,
    /// First failing `(p, n)` for each prime that failed, in input order.
    pub violations: Vec<(u64, u64)>,
}

impl HeckeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tests `A(p)A(n) = a(t)(A(pn) + χ²(p) p^{2k−1} A(n/p))` for `n ≤ n_max`.
/// `χ²` and `2k` are the lifted form's character and weight.
pub fn integral_eigencheck<C: Coefficient>(
    lifted: &LiftedForm<C>,
    primes: &[u64],
    n_max: u64,
    exec: Execution,
) -> Result<HeckeReport, ShimuraError> {
    for &p in primes {
        if !arith::is_prime(p) || lifted.level % p == 0 {
            return Err(ShimuraError::BadPrime { p, level: lifted.level });
        }
        if p * n_max > lifted.truncation() as u64 {
            return Err(ShimuraError::Range { missing_index: p * n_max });
        }
    }
    let per_prime = exec::map_items(exec, primes, |&p| -> Result<Option<u64>, ShimuraError> {
        let chi2 = lifted.character.evaluate(p as i64);
        let pw = BigInt::from(p).pow(lifted.weight - 1);
        let ap = lifted.get(p as usize)?;
        for n in 1..=n_max {
            let lhs = ap.mul(lifted.get(n as usize)?);
            let mut inner = lifted.get((p * n) as usize)?.clone();
            if let (Some(c), true) = (chi2, n % p == 0) {
                let term = lifted.get((n / p) as usize)?.mul_root(c).ok_or(ShimuraError::CoefficientRing)?;
                inner = inner.add(&term.mul_int(&pw));
            }
            if lhs != lifted.a_t.mul(&inner) {
                return Ok(Some(n));
            }
        }
        Ok(None)
    });
    let mut violations = Vec::new();
    for (&p, r) in primes.iter().zip(per_prime) {
        if let Some(n) = r? {
            violations.push((p, n));
        }
    }
    Ok(HeckeReport { checked: primes.len() * n_max as usize, violations })
}

/// Tests `A(mn)·a(t) = A(m)A(n)` on `pairs` random coprime pairs with
/// `mn ≤ T`. Reports the failing pairs.
pub fn coprime_multiplicativity<C: Coefficient>(lifted: &LiftedForm<C>, pairs: usize, seed: u64) -> (usize, Vec<(u64, u64)>) {
    let t = lifted.truncation() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut checked = 0;
    while checked < pairs && t >= 2 {
        let m = rng.random_range(1..=t);
        let n = rng.random_range(1..=t / m);
        if m.gcd(&n) != 1 {
            continue;
        }
        checked += 1;
        let lhs = lifted.coeffs[(m * n) as usize].mul(&lifted.a_t);
        if lhs != lifted.coeffs[m as usize].mul(&lifted.coeffs[n as usize]) {
            violations.push((m, n));
        }
    }
    (checked, violations)
}

/// How [`synth_hecke_form`] draws `A(p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthMode {
    /// Uniform integer in `[−B_p, B_p]`, `B_p = ⌊2p^{k−1/2}⌋`.
    IntegerUniform,
    /// `2p^{k−1/2}·x` rounded, with `x` drawn from the Sato–Tate measure.
    SatoTateRounded,
}

/// `⌊2p^{k−1/2}⌋ = ⌊√(4p^{2k−1})⌋`.
pub fn rp_integer_bound(p: u64, k: u32) -> BigInt {
    (BigInt::from(4) * BigInt::from(p).pow(2 * k - 1)).sqrt()
}

fn uniform_bigint(rng: &mut ChaCha8Rng, bound: &BigInt) -> BigInt {
    let range: BigUint = (bound * 2u32 + 1u32).to_biguint().expect("nonnegative");
    let bits = range.bits();
    let bytes = bits.div_ceil(8) as usize;
    let top_mask = if bits % 8 == 0 { 0xff } else { (1u8 << (bits % 8)) - 1 };
    loop {
        let mut buf = vec![0u8; bytes];
        rng.fill(&mut buf[..]);
        if let Some(last) = buf.last_mut() {
            *last &= top_mask;
        }
        let x = BigUint::from_bytes_le(&buf);
        if x < range {
            return BigInt::from_biguint(Sign::Plus, x) - bound;
        }
    }
}

/// A normalized level-1 Hecke eigenform of weight `2k` with integer
/// eigenvalues inside the Ramanujan–Petersson range.
pub fn synth_hecke_form(k: u32, seed: u64, truncation: usize, mode: SynthMode) -> LiftedForm<BigInt> {
    assert!(k >= 1 && truncation >= 1);
    let t = truncation;
    let sieve = FactorSieve::new(t as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![BigInt::zero(); t + 1];
    a[1] = BigInt::one();
    for n in 2..=t {
        let p = sieve.smallest_factor(n as u64) as usize;
        let mut m = n;
        let mut pe = 1;
        while m % p == 0 {
            m /= p;
            pe *= p;
        }
        if m > 1 {
            a[n] = &a[pe] * &a[m];
            continue;
        }
        if pe == p {
            let bound = rp_integer_bound(p as u64, k);
            a[n] = match mode {
                SynthMode::IntegerUniform => uniform_bigint(&mut rng, &bound),
                SynthMode::SatoTateRounded => {
                    let x = crate::satotate::draw_semicircle(&mut rng);
                    let scale = 2.0 * (p as f64).powf(k as f64 - 0.5);
                    let v: BigInt = FromPrimitive::from_f64((x * scale).round()).unwrap_or_default();
                    v.clamp(-bound.clone(), bound)
                }
            };
        } else {
            let pw = BigInt::from(p).pow(2 * k - 1);
            a[n] = &a[p] * &a[pe / p] - pw * &a[pe / (p * p)];
        }
    }
    LiftedForm::new(2 * k, 1, principal(1).expect("modulus 1"), a).expect("A(1) = 1")
}

/// `Δ = Σ τ(n) qⁿ` as a level-1 lifted form of weight 12.
pub fn delta_lifted(truncation: usize, exec: Execution) -> LiftedForm<BigInt> {
    let tau = qseries::delta_with(truncation, exec).into_coeffs();
    LiftedForm::new(12, 1, principal(1).expect("modulus 1"), tau).expect("τ(1) = 1")
}

/// `a(n²)/a(1)` for `n ≤ T`, for the weight 13/2 preimage of `Δ`.
pub fn delta_preimage_squares(tau: &[BigInt], truncation: usize, exec: Execution) -> Result<Vec<BigInt>, ShimuraError> {
    invert_lift_table(&ShimuraParams::delta_preimage(), tau, truncation, exec)
}

/// `sign(a(tp²)/χ(p))` from the inverted table.
pub fn square_class_sign<C: Coefficient>(params: &ShimuraParams, a_sq: &[C], n: u64) -> Option<i8> {
    let chi_n = params.chi.evaluate(n as i64)?;
    a_sq.get(n as usize)?.mul_root(chi_n.conj())?.real_sign()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::character_group;
    use num_traits::{Signed, ToPrimitive};

    fn ints(v: &[BigInt]) -> Vec<i64> {
        v.iter().map(|x| x.to_i64().unwrap()).collect()
    }

    #[test]
    fn chi_tn_examples() {
        let p = ShimuraParams::delta_preimage();
        assert_eq!(p.chi_tn(1), Some(RootOfUnity::ONE));
        for d in (1..200).step_by(2) {
            assert_eq!(p.chi_tn(d), Some(RootOfUnity::ONE), "d = {d}");
            assert_eq!(p.chi_tn(d + 1), None);
        }
        assert_eq!(p.twist_discriminant(), 16);
        let odd = ShimuraParams::new(4, 3, 1, principal(4).unwrap()).unwrap();
        // (−16/3) = (−1/3) = −1.
        assert_eq!(odd.chi_tn(3), Some(RootOfUnity::MINUS_ONE));
        assert_eq!(odd.chi_tn(5), Some(RootOfUnity::ONE));
    }

    #[test]
    fn params_validation() {
        assert_eq!(ShimuraParams::new(6, 6, 1, principal(6).unwrap()), Err(ShimuraError::Level(6)));
        assert_eq!(ShimuraParams::new(4, 6, 4, principal(4).unwrap()), Err(ShimuraError::TNotSquarefree(4)));
        assert!(matches!(ShimuraParams::new(4, 6, 1, principal(8).unwrap()), Err(ShimuraError::CharacterModulus { .. })));
    }

    #[test]
    fn delta_preimage_small_values() {
        let tau = qseries::delta(30).into_coeffs();
        let a = delta_preimage_squares(&tau, 30, Execution::Sequential).unwrap();
        assert_eq!(a[1], BigInt::one());
        assert_eq!(a[3], BigInt::from(9));
        // Even n: χ_{1,4}(2) = 0, so a(4) = τ(2).
        assert_eq!(a[2], BigInt::from(-24));
        // n = 5: τ(5) − 5⁵.
        assert_eq!(a[5], BigInt::from(4830 - 3125));
        let back = lift_table(&ShimuraParams::delta_preimage(), &a, 30, Execution::Parallel).unwrap();
        assert_eq!(ints(&back[1..]), ints(&tau[1..]));
    }

    #[test]
    fn lift_at_primes() {
        let params = ShimuraParams::new(4, 3, 1, principal(4).unwrap()).unwrap();
        let a_sq: Vec<BigInt> = (0..20).map(|n| BigInt::from(n * n + 1)).collect();
        let lifted = lift_table(&params, &a_sq, 19, Execution::Sequential).unwrap();
        assert_eq!(lifted[1], a_sq[1]);
        for p in [3u64, 5, 7, 11, 13, 17, 19] {
            let chi = params.chi_tn(p).unwrap().as_sign().unwrap() as i64;
            let expected = &a_sq[p as usize] + BigInt::from(chi * (p as i64).pow(2)) * &a_sq[1];
            assert_eq!(lifted[p as usize], expected);
        }
        assert_eq!(
            lift_table(&params, &a_sq, 25, Execution::Sequential),
            Err(ShimuraError::Range { missing_index: 400 })
        );
    }

    #[test]
    fn lift_of_tabulated_form_reports_missing_index() {
        let text = "level 4\nk 6\ncharacter 4:0\nt 1\ntruncation 30\ncoefficients\n1 1\n4 -24\n9 9\n";
        let f = HalfIntegralForm::parse(text).unwrap();
        let l = lift(&f, 6).unwrap_err();
        assert_eq!(l, ShimuraError::Range { missing_index: 36 });
        let l = lift(&f, 3).unwrap();
        assert_eq!(l.coeff(1), Some(&Cyclotomic::one(1)));
        assert_eq!(l.coeff(3), Some(&Cyclotomic::integer(1, 9 + 243)));
        assert_eq!((l.weight(), l.level()), (12, 2));
    }

    #[test]
    fn roundtrip_with_complex_character() {
        let g = character_group(20).unwrap();
        let chi = g.characters().into_iter().find(|c| c.order() == 4).unwrap();
        let params = ShimuraParams::new(20, 3, 1, chi).unwrap();
        let a_sq: Vec<Cyclotomic> = (0..40)
            .map(|n: i64| Cyclotomic::root(4, RootOfUnity::new(4, n)).mul_int(&BigInt::from(n * 3 - 7)))
            .collect();
        let lifted = lift_table(&params, &a_sq, 39, Execution::Parallel).unwrap();
        let back = invert_lift_table(&params, &lifted, 39, Execution::Sequential).unwrap();
        assert_eq!(&back[1..], &a_sq[1..]);
        let ints: Vec<BigInt> = (0..40).map(BigInt::from).collect();
        assert_eq!(lift_table(&params, &ints, 39, Execution::Sequential), Err(ShimuraError::CoefficientRing));
    }

    #[test]
    fn bt_examples() {
        let delta = delta_lifted(10, Execution::Sequential);
        let b2 = normalized_value(&BigInt::from(-24), &BigInt::one(), 2, 6).unwrap();
        assert!((b2 - (-24.0 / (2.0 * 2f64.powf(5.5)))).abs() < 1e-15);
        assert!((b2 + 0.26517).abs() < 1e-5);
        let params = ShimuraParams::delta_preimage();
        let b3 = bt(&delta, &params, 3).unwrap();
        assert!((b3 - 252.0 / (2.0 * 3f64.powf(5.5))).abs() < 1e-15);
        assert!(matches!(bt(&delta, &params, 2), Err(ShimuraError::BadPrime { .. })));
        assert_eq!(normalized_value(&BigInt::zero(), &BigInt::one(), 7, 6), Ok(0.0));
        assert_eq!(normalized_value(&BigInt::from(1000), &BigInt::one(), 2, 6), Err(ShimuraError::RamanujanPetersson { p: 2 }));
        // Bound attained: A(5) = 2·5^{k−1}·√5 with √5 = 1 + 2(ζ + ζ⁴).
        let z = |e| Cyclotomic::root(5, RootOfUnity::new(5, e));
        let sqrt5 = Cyclotomic::one(5).add(&z(1).add(&z(4)).mul_int(&BigInt::from(2)));
        assert_eq!(sqrt5.mul(&sqrt5), Cyclotomic::integer(5, 5));
        let top = sqrt5.mul_int(&BigInt::from(2 * 5i64.pow(5)));
        assert_eq!(normalized_value(&top, &Cyclotomic::one(5), 5, 6), Ok(1.0));
        assert_eq!(normalized_value(&top.neg(), &Cyclotomic::one(5), 5, 6), Ok(-1.0));
        let i = Cyclotomic::root(4, RootOfUnity::new(4, 1));
        assert_eq!(normalized_value(&i, &Cyclotomic::one(4), 5, 6), Err(ShimuraError::Reality { p: 5 }));
    }

    #[test]
    fn synthetic_forms_are_hecke_eigenforms() {
        for (seed, mode) in [(1, SynthMode::IntegerUniform), (2, SynthMode::SatoTateRounded)] {
            let f = synth_hecke_form(6, seed, 2000, mode);
            assert_eq!(f.coeff(1), Some(&BigInt::one()));
            assert_eq!(f, synth_hecke_form(6, seed, 2000, mode));
            let report = integral_eigencheck(&f, &[2, 3, 5, 7, 11, 13], 150, Execution::Parallel).unwrap();
            assert!(report.passed(), "{report:?}");
            let (checked, bad) = coprime_multiplicativity(&f, 500, seed);
            assert_eq!((checked, bad.len()), (500, 0));
            for p in [2u64, 3, 5, 7, 1999] {
                assert!(f.coeff(p as usize).unwrap().abs() <= rp_integer_bound(p, 6));
            }
        }
        assert_ne!(synth_hecke_form(6, 1, 50, SynthMode::IntegerUniform), synth_hecke_form(6, 2, 50, SynthMode::IntegerUniform));
    }

    #[test]
    fn perturbation_breaks_hecke_relation() {
        let f = synth_hecke_form(4, 9, 800, SynthMode::IntegerUniform);
        let bumped = f.with_coefficient(77, f.coeff(77).unwrap() + 1);
        let report = integral_eigencheck(&bumped, &[3, 5, 7, 11], 60, Execution::Sequential).unwrap();
        assert_eq!(report.violations, vec![(7, 11), (11, 7)]);
        let (_, bad) = coprime_multiplicativity(&bumped, 2000, 1);
        assert!(!bad.is_empty());
        assert!(bad.iter().all(|&(m, n)| m == 77 || n == 77 || m * n == 77));
    }

    #[test]
    fn rp_bound_is_floor() {
        for p in [2u64, 3, 5, 7, 11, 97] {
            let b = rp_integer_bound(p, 6);
            let exact = 2.0 * (p as f64).powf(5.5);
            assert_eq!(b.to_f64().unwrap(), exact.floor());
        }
    }
}
