//! Dirichlet characters modulo q with exact root-of-unity values.
//!
//! `(ℤ/qℤ)^×` is decomposed by CRT into cyclic factors: one per odd prime
//! power (generated by its smallest primitive root) and, for the 2-part
//! `2^a`, the factors `⟨−1⟩` (a ≥ 2) and `⟨5⟩` (a ≥ 3). A character is an
//! exponent vector over these generators; its value at the `i`-th generator
//! is `e^{2πi·e_i/ord_i}`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use thiserror::Error;

use crate::arith::{self, euler_phi};
use crate::cyclotomic::{Cyclotomic, RootSum};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("residue {d} is not a unit modulo {q}")]
    NotAUnit { d: i64, q: u64 },
    #[error("exponent vector has {got} entries, modulus {q} has {expected} generators")]
    WrongArity { q: u64, expected: usize, got: usize },
    #[error("malformed character label {0:?}")]
    BadLabel(String),
}

/// `e^{2πi·exponent/order}`, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootOfUnity {
    order: u32,
    exponent: u32,
}

impl RootOfUnity {
    pub const ONE: RootOfUnity = RootOfUnity { order: 1, exponent: 0 };
    pub const MINUS_ONE: RootOfUnity = RootOfUnity { order: 2, exponent: 1 };

    /// `e^{2πi·j/m}` reduced to lowest terms.
    pub fn new(order: u32, exponent: i64) -> Self {
        assert!(order > 0, "root of unity needs a positive order");
        let j = exponent.rem_euclid(order as i64) as u32;
        let g = j.gcd(&order);
        let g = if j == 0 { order } else { g };
        RootOfUnity { order: order / g, exponent: j / g }
    }

    pub fn order(self) -> u32 {
        self.order
    }

    pub fn exponent(self) -> u32 {
        self.exponent
    }

    pub fn is_one(self) -> bool {
        self.order == 1
    }

    /// True for ±1.
    pub fn is_real(self) -> bool {
        self.order <= 2
    }

    pub fn mul(self, other: Self) -> Self {
        let m = self.order.lcm(&other.order);
        let e = self.exponent as u64 * (m / self.order) as u64 + other.exponent as u64 * (m / other.order) as u64;
        RootOfUnity::new(m, (e % m as u64) as i64)
    }

    pub fn conj(self) -> Self {
        RootOfUnity::new(self.order, -(self.exponent as i64))
    }

    pub fn pow(self, e: i64) -> Self {
        RootOfUnity::new(self.order, (self.exponent as i64 * e.rem_euclid(self.order as i64)) % self.order as i64)
    }

    /// Exponent `j` with `self = ζ_m^j`; requires `order | m`.
    pub fn exponent_in(self, m: u32) -> u32 {
        assert!(m % self.order == 0, "order {} does not divide {m}", self.order);
        self.exponent * (m / self.order)
    }

    /// ±1 as an integer, `None` for non-real roots.
    pub fn as_sign(self) -> Option<i8> {
        match (self.order, self.exponent) {
            (1, _) => Some(1),
            (2, _) => Some(-1),
            _ => None,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        let angle = std::f64::consts::TAU * self.exponent as f64 / self.order as f64;
        Complex64::from_polar(1.0, angle)
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.order, self.exponent) {
            (1, _) => write!(f, "1"),
            (2, _) => write!(f, "-1"),
            (m, j) => write!(f, "z{m}^{j}"),
        }
    }
}

/// One cyclic factor of `(ℤ/qℤ)^×`.
#[derive(Clone, Debug)]
struct Component {
    /// The prime-power modulus this factor lives on.
    modulus: u64,
    /// Generator lifted to ℤ/qℤ (≡ 1 on the other CRT factors).
    generator: u64,
    order: u32,
    /// `dlog[r]` for units `r` mod `modulus`; non-units hold `u32::MAX`.
    dlog: Vec<u32>,
}

#[derive(Debug)]
struct GroupData {
    q: u64,
    components: Vec<Component>,
    exponent: u32,
}

impl GroupData {
    fn new(q: u64) -> Result<Self, CharacterError> {
        if q == 0 {
            return Err(CharacterError::ZeroModulus);
        }
        let fact = arith::factorize(q).expect("q > 0");
        let mut components = Vec::new();
        for &(p, e) in fact.factors() {
            let pe = p.pow(e);
            if p == 2 {
                if e >= 2 {
                    // ⟨−1⟩ and, for e ≥ 3, ⟨5⟩ of order 2^{e−2}.
                    let five_order = if e >= 3 { 1u64 << (e - 2) } else { 1 };
                    let mut dlog_m1 = vec![u32::MAX; pe as usize];
                    let mut dlog_5 = vec![u32::MAX; pe as usize];
                    let mut x = 1u64;
                    for j in 0..five_order {
                        dlog_m1[x as usize] = 0;
                        dlog_m1[(pe - x) as usize] = 1;
                        dlog_5[x as usize] = j as u32;
                        dlog_5[(pe - x) as usize] = j as u32;
                        x = x * 5 % pe;
                    }
                    components.push(Component { modulus: pe, generator: pe - 1, order: 2, dlog: dlog_m1 });
                    if e >= 3 {
                        components.push(Component { modulus: pe, generator: 5, order: five_order as u32, dlog: dlog_5 });
                    }
                }
            } else {
                let order = (p - 1) * p.pow(e - 1);
                let g = smallest_primitive_root(p, e);
                let mut dlog = vec![u32::MAX; pe as usize];
                let mut x = 1u64;
                for j in 0..order {
                    dlog[x as usize] = j as u32;
                    x = x * g % pe;
                }
                components.push(Component { modulus: pe, generator: g, order: order as u32, dlog });
            }
        }
        for c in &mut components {
            c.generator = crt_lift(c.generator, c.modulus, q);
        }
        let exponent = components.iter().fold(1u32, |acc, c| acc.lcm(&c.order));
        Ok(GroupData { q, components, exponent })
    }

    /// Discrete logs of a unit `n` with respect to every generator.
    fn logs(&self, n: u64) -> Option<Vec<u32>> {
        if n.gcd(&self.q) != 1 {
            return None;
        }
        Some(
            self.components
                .iter()
                .map(|c| c.dlog[(n % c.modulus) as usize])
                .collect(),
        )
    }
}

/// Smallest `g` generating `(ℤ/p^eℤ)^×`, p odd.
fn smallest_primitive_root(p: u64, e: u32) -> u64 {
    let pe = p.pow(e);
    let order = (p - 1) * p.pow(e - 1);
    let prime_divisors: Vec<u64> = arith::factorize(order)
        .expect("order > 0")
        .factors()
        .iter()
        .map(|&(r, _)| r)
        .collect();
    let pow = |mut a: u64, mut k: u64| {
        let mut r = 1u64;
        a %= pe;
        while k > 0 {
            if k & 1 == 1 {
                r = (r as u128 * a as u128 % pe as u128) as u64;
            }
            a = (a as u128 * a as u128 % pe as u128) as u64;
            k >>= 1;
        }
        r
    };
    (2..pe)
        .find(|&g| g % p != 0 && prime_divisors.iter().all(|&r| pow(g, order / r) != 1))
        .expect("odd prime powers have primitive roots")
}

/// The residue mod `q` that is `g` mod `m` and 1 mod `q/m` (with `gcd(m, q/m) = 1`).
fn crt_lift(g: u64, m: u64, q: u64) -> u64 {
    let rest = q / m;
    if rest == 1 {
        return g % q;
    }
    (0..m)
        .map(|k| 1 + k * rest)
        .find(|x| x % m == g % m)
        .expect("CRT solution exists")
        % q
}

/// The full character group modulo q.
#[derive(Clone, Debug)]
pub struct CharacterGroup {
    data: Arc<GroupData>,
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Self, CharacterError> {
        Ok(CharacterGroup { data: Arc::new(GroupData::new(q)?) })
    }

    pub fn modulus(&self) -> u64 {
        self.data.q
    }

    /// Group exponent of `(ℤ/qℤ)^×`.
    pub fn exponent(&self) -> u32 {
        self.data.exponent
    }

    /// `(generator mod q, order)` for each cyclic factor.
    pub fn generators(&self) -> Vec<(u64, u32)> {
        self.data.components.iter().map(|c| (c.generator, c.order)).collect()
    }

    pub fn size(&self) -> usize {
        self.data.components.iter().map(|c| c.order as usize).product()
    }

    pub fn principal(&self) -> DirichletCharacter {
        DirichletCharacter {
            group: self.data.clone(),
            exponents: vec![0; self.data.components.len()],
        }
    }

    pub fn character(&self, exponents: &[u32]) -> Result<DirichletCharacter, CharacterError> {
        let comps = &self.data.components;
        if exponents.len() != comps.len() {
            return Err(CharacterError::WrongArity {
                q: self.data.q,
                expected: comps.len(),
                got: exponents.len(),
            });
        }
        Ok(DirichletCharacter {
            group: self.data.clone(),
            exponents: exponents.iter().zip(comps).map(|(e, c)| e % c.order).collect(),
        })
    }

    /// All φ(q) characters, in lexicographic order of exponent vectors.
    pub fn characters(&self) -> Vec<DirichletCharacter> {
        let orders: Vec<u32> = self.data.components.iter().map(|c| c.order).collect();
        let mut out = Vec::with_capacity(self.size());
        let mut cur = vec![0u32; orders.len()];
        loop {
            out.push(DirichletCharacter { group: self.data.clone(), exponents: cur.clone() });
            let mut i = orders.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < orders[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }
}

/// Builds the complete character group modulo `q`.
pub fn character_group(q: u64) -> Result<CharacterGroup, CharacterError> {
    CharacterGroup::new(q)
}

/// The principal character modulo `q`.
pub fn principal(q: u64) -> Result<DirichletCharacter, CharacterError> {
    Ok(CharacterGroup::new(q)?.principal())
}

#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<GroupData>,
    exponents: Vec<u32>,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirichletCharacter({})", self.label())
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.q == other.group.q && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

impl DirichletCharacter {
    pub fn modulus(&self) -> u64 {
        self.group.q
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn group(&self) -> CharacterGroup {
        CharacterGroup { data: self.group.clone() }
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// Multiplicative order; divides the group exponent.
    pub fn order(&self) -> u32 {
        self.exponents
            .iter()
            .zip(&self.group.components)
            .fold(1u32, |acc, (&e, c)| acc.lcm(&(c.order / e.gcd(&c.order))))
    }

    /// `χ(n)`: `None` when `gcd(n, q) > 1`.
    pub fn evaluate(&self, n: i64) -> Option<RootOfUnity> {
        let q = self.group.q;
        let r = n.rem_euclid(q as i64) as u64;
        let logs = self.group.logs(r)?;
        let m = self.group.exponent;
        let mut acc = 0u64;
        for ((&e, c), l) in self.exponents.iter().zip(&self.group.components).zip(logs) {
            acc = (acc + e as u64 * l as u64 % c.order as u64 * (m / c.order) as u64) % m as u64;
        }
        Some(RootOfUnity::new(m, acc as i64))
    }

    pub fn evaluate_complex(&self, n: i64) -> Complex64 {
        self.evaluate(n).map_or(Complex64::new(0.0, 0.0), RootOfUnity::to_complex)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.group.q, other.group.q, "characters of different moduli");
        let exponents = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .zip(&self.group.components)
            .map(|((a, b), c)| (a + b) % c.order)
            .collect();
        DirichletCharacter { group: self.group.clone(), exponents }
    }

    pub fn pow(&self, k: u32) -> Self {
        let exponents = self
            .exponents
            .iter()
            .zip(&self.group.components)
            .map(|(&e, c)| ((e as u64 * k as u64) % c.order as u64) as u32)
            .collect();
        DirichletCharacter { group: self.group.clone(), exponents }
    }

    pub fn conj(&self) -> Self {
        let exponents = self
            .exponents
            .iter()
            .zip(&self.group.components)
            .map(|(&e, c)| (c.order - e) % c.order)
            .collect();
        DirichletCharacter { group: self.group.clone(), exponents }
    }

    /// The `order`-many values attained on units.
    pub fn image(&self) -> BTreeSet<RootOfUnity> {
        let m = self.order();
        (0..m).map(|j| RootOfUnity::new(m, j as i64)).collect()
    }

    /// Serialized form `q:e1,e2,...,ek`.
    pub fn label(&self) -> String {
        let es: Vec<String> = self.exponents.iter().map(|e| e.to_string()).collect();
        format!("{}:{}", self.group.q, es.join(","))
    }

    /// True when every value on units is ±1.
    pub fn is_real(&self) -> bool {
        self.order() <= 2
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for DirichletCharacter {
    type Err = CharacterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CharacterError::BadLabel(s.to_string());
        let (q, es) = s.trim().split_once(':').ok_or_else(bad)?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        let exps: Vec<u32> = if es.trim().is_empty() {
            Vec::new()
        } else {
            es.split(',')
                .map(|e| e.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<_, _>>()?
        };
        let group = CharacterGroup::new(q)?;
        let orders: Vec<u32> = group.data.components.iter().map(|c| c.order).collect();
        if exps.len() == orders.len() && exps.iter().zip(&orders).any(|(e, o)| e >= o) {
            return Err(bad());
        }
        group.character(&exps)
    }
}

/// Indicator of `n ≡ d (mod q)` (with `n` a unit), computed through
/// `φ(q)⁻¹ Σ_ε ε(n)·conj(ε(d))` in exact root-of-unity arithmetic.
pub fn progression_indicator(d: i64, q: u64, n: i64) -> Result<Ratio<i64>, CharacterError> {
    let group = CharacterGroup::new(q)?;
    if group.data.logs(d.rem_euclid(q as i64) as u64).is_none() {
        return Err(CharacterError::NotAUnit { d, q });
    }
    let sum = orthogonality_sum(&group, n, d);
    let value = sum
        .to_rational()
        .expect("character sums over the full group are rational");
    let value = Ratio::new(
        i64::try_from(value.numer()).expect("small"),
        i64::try_from(value.denom()).expect("small"),
    );
    Ok(value / Ratio::from_integer(euler_phi(q) as i64))
}

/// `Σ_ε ε(n)·conj(ε(d))` as an exact element of `ℚ(ζ_e)`, `e` the group exponent.
pub fn orthogonality_sum(group: &CharacterGroup, n: i64, d: i64) -> Cyclotomic {
    let mut sum = RootSum::new(group.exponent());
    for chi in group.characters() {
        if let (Some(a), Some(b)) = (chi.evaluate(n), chi.evaluate(d)) {
            sum.add_root(a.mul(b.conj()), 1);
        }
    }
    sum.reduce()
}
