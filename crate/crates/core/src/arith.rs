//! Elementary number theory on machine integers: prime tables, factorization,
//! Möbius and Euler functions, divisors and the Kronecker symbol.

use num_integer::Integer;
use thiserror::Error;

/// Above this bound trial division hands over to Pollard's rho.
const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("prime sieve needs a limit of at least 2, got {0}")]
    EmptyDomain(u64),
    #[error("0 has no prime factorization")]
    Zero,
}

/// Prime factorization `n = Π p^e` with strictly increasing primes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// All divisors in ascending order, generated from the prime powers.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn mobius(&self) -> i8 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    fn from_factors(n: u64, mut factors: Vec<(u64, u32)>) -> Self {
        factors.sort_unstable();
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        Factorization { n, factors: merged }
    }
}

/// All primes up to `limit`, sorted.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn contains(&self, n: u64) -> bool {
        self.primes.binary_search(&n).is_ok()
    }

    /// π(x) for `x ≤ limit`; saturates at the table size above it.
    pub fn pi(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    /// Primes `≤ x`.
    pub fn up_to(&self, x: u64) -> &[u64] {
        &self.primes[..self.pi(x)]
    }
}

/// Sieve of Eratosthenes over `[2, limit]`.
pub fn sieve_primes(limit: u64) -> Result<PrimeTable, ArithError> {
    if limit < 2 {
        return Err(ArithError::EmptyDomain(limit));
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut i = 2usize;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    let primes = (2..=n).filter(|&k| !composite[k]).map(|k| k as u64).collect();
    Ok(PrimeTable { limit, primes })
}

/// Smallest-prime-factor table for fast bulk factorization of `n ≤ limit`.
#[derive(Clone, Debug)]
pub struct FactorSieve {
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(limit: u64) -> Self {
        let n = limit.max(1) as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        FactorSieve { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && (n as usize) < self.spf.len() && self.spf[n as usize] as u64 == n
    }

    /// Smallest prime factor of `2 ≤ n ≤ limit`.
    pub fn smallest_factor(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    /// Falls back to [`factorize`] above the table limit.
    pub fn factorize(&self, n: u64) -> Result<Factorization, ArithError> {
        if n == 0 {
            return Err(ArithError::Zero);
        }
        if n as usize >= self.spf.len() {
            return factorize(n);
        }
        let mut m = n as usize;
        let mut factors = Vec::new();
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p as u64, e));
        }
        Ok(Factorization { n, factors })
    }
}

/// Exact prime factorization: trial division below 10⁶, Pollard–Brent rho
/// for any cofactor whose prime factors all exceed that bound.
pub fn factorize(n: u64) -> Result<Factorization, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    let mut m = n;
    let mut factors = Vec::new();
    let push_all = |m: &mut u64, p: u64, factors: &mut Vec<(u64, u32)>| {
        let mut e = 0;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push_all(&mut m, 2, &mut factors);
    push_all(&mut m, 3, &mut factors);
    let mut p = 5u64;
    let mut step = 2u64;
    while p <= TRIAL_DIVISION_BOUND && p * p <= m {
        push_all(&mut m, p, &mut factors);
        p += step;
        step = 6 - step;
    }
    if m > 1 {
        if m < TRIAL_DIVISION_BOUND * TRIAL_DIVISION_BOUND || is_prime(m) {
            factors.push((m, 1));
        } else {
            let mut stack = vec![m];
            while let Some(x) = stack.pop() {
                if x == 1 {
                    continue;
                }
                if is_prime(x) {
                    factors.push((x, 1));
                    continue;
                }
                let d = pollard_brent(x);
                stack.push(d);
                stack.push(x / d);
            }
        }
    }
    Ok(Factorization::from_factors(n, factors))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A nontrivial factor of the odd composite `n`. Deterministic: the
/// polynomial constant runs through 1, 2, 3, … until a split is found.
fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g, mut r, mut q) = (2u64, 2u64, 1u64, 1u64, 1u64);
        let mut ys = 2u64;
        const BLOCK: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BLOCK.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += BLOCK;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

pub fn mobius(n: u64) -> Result<i8, ArithError> {
    Ok(factorize(n)?.mobius())
}

/// φ(n); φ(0) is reported as 0.
pub fn euler_phi(n: u64) -> u64 {
    match factorize(n) {
        Ok(f) => f.euler_phi(),
        Err(_) => 0,
    }
}

/// Divisors of `n ≥ 1` in ascending order (empty for 0).
pub fn divisors(n: u64) -> Vec<u64> {
    factorize(n).map(|f| f.divisors()).unwrap_or_default()
}

/// Kronecker symbol `(a/n)` for arbitrary integers, including even, negative
/// and zero `n`.
pub fn kronecker(a: i64, n: i64) -> i8 {
    // (a/2) for odd a, indexed by a mod 8.
    const TAB2: [i8; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    let mut a = a as i128;
    let mut n = n as i128;
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let v = n.trailing_zeros();
    n >>= v;
    let mut k: i8 = if v % 2 == 0 { 1 } else { TAB2[(a & 7) as usize] };
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    // n is now odd and positive: plain Jacobi symbol.
    a = a.rem_euclid(n);
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            k *= TAB2[(n & 7) as usize];
        }
        if a & n & 2 != 0 {
            k = -k;
        }
        let r = a;
        a = n % r;
        n = r;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// `gcd` on unsigned integers, re-exported for convenience.
pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_is_prime(n: u64) -> bool {
        n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut d = 2;
        while d * d <= n {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            if e > 0 {
                out.push((d, e));
            }
            d += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn sieve_examples() {
        assert_eq!(sieve_primes(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap().primes(), &[2]);
        let t = sieve_primes(30).unwrap();
        assert_eq!(t.primes().len(), 10);
        assert_eq!(*t.primes().last().unwrap(), 29);
        assert_eq!(sieve_primes(1).unwrap_err(), ArithError::EmptyDomain(1));
    }

    #[test]
    fn sieve_agrees_with_trial_division() {
        let t = sieve_primes(5000).unwrap();
        for n in 0..=5000 {
            assert_eq!(t.contains(n), trial_is_prime(n), "{n}");
        }
        assert_eq!(t.pi(100), 25);
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().factors().is_empty());
        assert_eq!(factorize(12).unwrap().factors(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize(97).unwrap().factors(), &[(97, 1)]);
        assert_eq!(factorize(0), Err(ArithError::Zero));
    }

    #[test]
    fn factorize_large_uses_rho() {
        // Both factors exceed the trial division bound.
        let p = 1_000_003u64;
        let q = 998_244_353u64;
        let f = factorize(p * q).unwrap();
        assert_eq!(f.factors(), &[(p, 1), (q, 1)]);
        let f = factorize(p * p * 7).unwrap();
        assert_eq!(f.factors(), &[(7, 1), (p, 2)]);
        assert!(is_prime(18_446_744_073_709_551_557));
        assert_eq!(factorize(18_446_744_073_709_551_557).unwrap().factors().len(), 1);
    }

    #[test]
    fn factorize_reconstructs_up_to_1e5() {
        let sieve = FactorSieve::new(100_000);
        for n in 1..=100_000u64 {
            let f = factorize(n).unwrap();
            let prod: u64 = f.factors().iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, n);
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
            assert!(f.factors().iter().all(|&(p, e)| e >= 1 && sieve.is_prime(p)));
            assert_eq!(sieve.factorize(n).unwrap(), f);
        }
        for n in (1..3000).step_by(7) {
            assert_eq!(factorize(n).unwrap().factors(), trial_factor(n).as_slice());
        }
    }

    #[test]
    fn mobius_and_phi_examples() {
        assert_eq!(mobius(1).unwrap(), 1);
        assert_eq!(mobius(6).unwrap(), 1);
        assert_eq!(mobius(12).unwrap(), 0);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(5), 4);
        assert_eq!(euler_phi(12), 4);
    }

    #[test]
    fn phi_is_a_coprime_count() {
        for n in 1..=300u64 {
            let count = (1..=n).filter(|m| m.gcd(&n) == 1).count() as u64;
            assert_eq!(euler_phi(n), count);
        }
    }

    #[test]
    fn phi_multiplicative_on_coprime_pairs() {
        for m in 1..=200u64 {
            for n in 1..=200u64 {
                if m.gcd(&n) == 1 {
                    assert_eq!(euler_phi(m * n), euler_phi(m) * euler_phi(n));
                }
            }
        }
    }

    #[test]
    fn mobius_sums_over_divisors() {
        let sieve = FactorSieve::new(10_000);
        for n in 1..=10_000u64 {
            let s: i64 = sieve
                .factorize(n)
                .unwrap()
                .divisors()
                .into_iter()
                .map(|d| sieve.factorize(d).unwrap().mobius() as i64)
                .sum();
            assert_eq!(s, if n == 1 { 1 } else { 0 });
        }
    }

    #[test]
    fn divisors_examples() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(97), vec![1, 97]);
        for n in 1..500u64 {
            let scan: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
            assert_eq!(divisors(n), scan);
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(7, 1), 1);
        assert_eq!(kronecker(16, 5), 1);
        assert_eq!(kronecker(2, 7), 1);
        assert_eq!(kronecker(16, 2), 0);
        assert_eq!(kronecker(3, 2), -1);
        assert_eq!(kronecker(7, 2), 1);
        assert_eq!(kronecker(-1, -1), -1);
        assert_eq!(kronecker(5, -1), 1);
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(2, 0), 0);
        assert_eq!(kronecker(-5, 3), 1);
    }

    /// Euler's criterion as an independent oracle for odd primes.
    #[test]
    fn kronecker_matches_euler_criterion() {
        let t = sieve_primes(200).unwrap();
        for &p in &t.primes()[1..] {
            for a in -300i64..300 {
                let r = pow_mod(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
                let expect = if r == 0 { 0 } else if r == 1 { 1 } else { -1 };
                assert_eq!(kronecker(a, p as i64), expect, "({a}/{p})");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn kronecker_multiplicative_in_top(a in -10_000i64..10_000, b in -10_000i64..10_000, n in -5000i64..5000) {
            // (0/-1) = 1 breaks multiplicativity in the top argument.
            prop_assume!(a != 0 && b != 0);
            prop_assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
        }

        #[test]
        fn kronecker_multiplicative_in_bottom(a in -10_000i64..10_000, m in -3000i64..3000, n in -3000i64..3000) {
            prop_assume!(m != 0 && n != 0);
            prop_assert_eq!(kronecker(a, m * n), kronecker(a, m) * kronecker(a, n));
        }
    }
}
