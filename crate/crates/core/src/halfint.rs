//! Half-integral weight cusp forms given by an exact coefficient table.
//!
//! A form of weight `k + 1/2` on `Γ₀(N)` with nebentypus `χ` is stored as the
//! map `n ↦ a(n)` of its nonzero coefficients up to a truncation `T`. Values
//! live in `ℚ(ζ_m)`, `m` the order of `χ`.
//!
//! # Form files
//!
//! ```text
//! # comments and blank lines are ignored
//! level 4
//! k 6
//! character 4:0
//! t 1
//! truncation 100
//! coefficients
//! 1 1
//! 4 -56
//! 9 9/2
//! 13 [0,1]
//! ```
//!
//! Header fields appear once each, in this order. Every line after
//! `coefficients` is `n value` with `1 ≤ n ≤ truncation`, strictly
//! increasing `n`, and `value` either a rational `p/q` or a coordinate
//! vector `[c_0,...,c_{φ(m)-1}]` over the power basis of `ℚ(ζ_m)`. Omitted
//! indices are zero. The writer emits only nonzero coefficients, rationals
//! in lowest terms, and one space between fields, so that
//! `write(read(write(f))) == write(f)` byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use thiserror::Error;

use crate::arith::{self, kronecker};
use crate::characters::DirichletCharacter;
use crate::cyclotomic::Cyclotomic;
use crate::exec::{self, Execution};

/// Exact coefficient values of a half-integral weight form.
pub type CyclotomicRational = Cyclotomic;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HalfIntError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("level {0} is not divisible by 4")]
    LevelNotDivisibleBy4(u64),
    #[error("k = {0} is below 2")]
    WeightTooSmall(u32),
    #[error("t = {0} is not squarefree")]
    TNotSquarefree(u64),
    #[error("a(t) = 0 for t = {0}")]
    ATZero(u64),
    #[error("character modulus {got} does not match level {level}")]
    CharacterModulus { level: u64, got: u64 },
    #[error("coefficient a({n}) does not lie in Q(zeta_{order})")]
    NotInField { n: u64, order: u32 },
    #[error("index {index} exceeds the truncation {truncation}")]
    OutOfRange { index: u64, truncation: u64 },
    #[error("{p} is not a prime coprime to the level {level}")]
    BadPrime { p: u64, level: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfIntegralForm {
    level: u64,
    k: u32,
    nebentypus: DirichletCharacter,
    t: u64,
    truncation: u64,
    field: u32,
    coeffs: BTreeMap<u64, Cyclotomic>,
}

impl HalfIntegralForm {
    /// Validates and assembles a form. Zero entries in `coeffs` are dropped.
    pub fn new(
        level: u64,
        k: u32,
        nebentypus: DirichletCharacter,
        t: u64,
        truncation: u64,
        coeffs: BTreeMap<u64, Cyclotomic>,
    ) -> Result<Self, HalfIntError> {
        if level == 0 || level % 4 != 0 {
            return Err(HalfIntError::LevelNotDivisibleBy4(level));
        }
        if k < 2 {
            return Err(HalfIntError::WeightTooSmall(k));
        }
        if nebentypus.modulus() != level {
            return Err(HalfIntError::CharacterModulus { level, got: nebentypus.modulus() });
        }
        if t == 0 || !arith::factorize(t).map(|f| f.is_squarefree()).unwrap_or(false) {
            return Err(HalfIntError::TNotSquarefree(t));
        }
        let field = nebentypus.order().max(1);
        let mut table = BTreeMap::new();
        for (n, v) in coeffs {
            if n == 0 || n > truncation {
                return Err(HalfIntError::OutOfRange { index: n, truncation });
            }
            if field % v.order() != 0 {
                return Err(HalfIntError::NotInField { n, order: field });
            }
            if !v.is_zero() {
                table.insert(n, v.lift(field));
            }
        }
        if t > truncation || !table.contains_key(&t) {
            return Err(HalfIntError::ATZero(t));
        }
        Ok(HalfIntegralForm { level, k, nebentypus, t, truncation, field, coeffs: table })
    }

    /// A form supported on the square class `t·□`, from the table
    /// `values[n] = a(t n²)` for `1 ≤ n < values.len()` (`values[0]` unused).
    pub fn from_square_class(
        level: u64,
        k: u32,
        nebentypus: DirichletCharacter,
        t: u64,
        values: &[Cyclotomic],
    ) -> Result<Self, HalfIntError> {
        let top = values.len().saturating_sub(1) as u64;
        let coeffs = values
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, v)| (t * (n as u64) * (n as u64), v.clone()))
            .collect();
        Self::new(level, k, nebentypus, t, t * top * top, coeffs)
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn nebentypus(&self) -> &DirichletCharacter {
        &self.nebentypus
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    /// Order of the cyclotomic field holding the coefficients.
    pub fn field_order(&self) -> u32 {
        self.field
    }

    /// Nonzero coefficients in increasing index order.
    pub fn nonzero(&self) -> impl Iterator<Item = (u64, &Cyclotomic)> {
        self.coeffs.iter().map(|(&n, v)| (n, v))
    }

    /// `a(n)`; zero for indices missing from the table.
    pub fn coefficient(&self, n: u64) -> Result<Cyclotomic, HalfIntError> {
        if n == 0 || n > self.truncation {
            return Err(HalfIntError::OutOfRange { index: n, truncation: self.truncation });
        }
        Ok(self.coeffs.get(&n).cloned().unwrap_or_else(|| Cyclotomic::zero(self.field)))
    }

    /// Replaces one coefficient; used to build perturbed test data.
    pub fn with_coefficient(&self, n: u64, value: Cyclotomic) -> Result<Self, HalfIntError> {
        let mut coeffs = self.coeffs.clone();
        coeffs.insert(n, value);
        Self::new(self.level, self.k, self.nebentypus.clone(), self.t, self.truncation, coeffs)
    }

    fn check_prime(&self, p: u64) -> Result<(), HalfIntError> {
        if !arith::is_prime(p) || self.level % p == 0 {
            return Err(HalfIntError::BadPrime { p, level: self.level });
        }
        Ok(())
    }

    /// The `n`-th coefficient of `f | T_{p²}`:
    /// `a(p²n) + χ(p)·((−1)^k n / p)·p^{k−1}·a(n) + χ(p²)·p^{2k−1}·a(n/p²)`.
    pub fn tpsq_coefficient(&self, p: u64, n: u64) -> Result<Cyclotomic, HalfIntError> {
        self.check_prime(p)?;
        let p2n = p.checked_mul(p).and_then(|q| q.checked_mul(n)).unwrap_or(u64::MAX);
        if n == 0 || p2n > self.truncation {
            return Err(HalfIntError::OutOfRange { index: p2n, truncation: self.truncation });
        }
        let chi_p = self.nebentypus.evaluate(p as i64).expect("p coprime to the level");
        let get = |m: u64| self.coeffs.get(&m);
        let mut out = get(p2n).cloned().unwrap_or_else(|| Cyclotomic::zero(self.field));
        if let Some(an) = get(n) {
            let signed_n = if self.k % 2 == 0 { n as i128 } else { -(n as i128) };
            let symbol = kronecker_i128(signed_n, p);
            if symbol != 0 {
                let scale = BigInt::from(symbol) * BigInt::from(p).pow(self.k - 1);
                out = out.add(&an.mul_root(chi_p).mul_int(&scale));
            }
        }
        if n % (p * p) == 0 {
            if let Some(a) = get(n / (p * p)) {
                let scale = BigInt::from(p).pow(2 * self.k - 1);
                out = out.add(&a.mul_root(chi_p.mul(chi_p)).mul_int(&scale));
            }
        }
        Ok(out)
    }

    /// Tests the `T_{p²}` eigen-relation for `n ≤ n_max`, independently for
    /// each prime. Primes run in parallel; the output follows `primes`.
    pub fn eigencheck(&self, primes: &[u64], n_max: u64) -> Result<Vec<(u64, EigenOutcome)>, HalfIntError> {
        self.eigencheck_with(primes, n_max, Execution::default())
    }

    pub fn eigencheck_with(
        &self,
        primes: &[u64],
        n_max: u64,
        exec: Execution,
    ) -> Result<Vec<(u64, EigenOutcome)>, HalfIntError> {
        for &p in primes {
            self.check_prime(p)?;
            let need = p * p * n_max;
            if need > self.truncation {
                return Err(HalfIntError::OutOfRange { index: need, truncation: self.truncation });
            }
        }
        let outcomes = exec::map_items(exec, primes, |&p| (p, self.eigencheck_prime(p, n_max)));
        Ok(outcomes)
    }

    fn eigencheck_prime(&self, p: u64, n_max: u64) -> EigenOutcome {
        let mut lambda: Option<Cyclotomic> = None;
        for n in 1..=n_max {
            let image = self.tpsq_coefficient(p, n).expect("range checked");
            match (self.coeffs.get(&n), &lambda) {
                (Some(an), None) => {
                    let l = image.div(an).expect("a(n) is nonzero");
                    lambda = Some(l);
                }
                (Some(an), Some(l)) => {
                    if image != l.mul(an) {
                        return EigenOutcome::Failure { n };
                    }
                }
                (None, _) => {
                    if !image.is_zero() {
                        return EigenOutcome::Failure { n };
                    }
                }
            }
        }
        match lambda {
            Some(l) => EigenOutcome::Eigenvalue(l),
            None => EigenOutcome::Inconclusive,
        }
    }

    /// Checks that `a(tn²)/χ(n)` is real for every `n ≤ √(T/t)` coprime to
    /// the level.
    pub fn reality_check(&self) -> RealityReport {
        let mut checked = 0;
        let mut violations = Vec::new();
        let mut n = 1u64;
        while self.t * n * n <= self.truncation {
            if let Some(chi_n) = self.nebentypus.evaluate(n as i64) {
                checked += 1;
                if let Some(a) = self.coeffs.get(&(self.t * n * n)) {
                    if !a.mul_root(chi_n.conj()).is_real() {
                        violations.push(n);
                    }
                }
            }
            n += 1;
        }
        RealityReport { checked, violations }
    }

    /// Serializes to the form-file text described in the module docs.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "level {}", self.level);
        let _ = writeln!(s, "k {}", self.k);
        let _ = writeln!(s, "character {}", self.nebentypus.label());
        let _ = writeln!(s, "t {}", self.t);
        let _ = writeln!(s, "truncation {}", self.truncation);
        s.push_str("coefficients\n");
        for (n, v) in &self.coeffs {
            let _ = writeln!(s, "{n} {}", v.to_text());
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, HalfIntError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut last_line = 0;
        let mut field = |name: &str| -> Result<(usize, String), HalfIntError> {
            let (line, l) = lines.next().ok_or(HalfIntError::Malformed {
                line: last_line,
                reason: format!("missing field `{name}`"),
            })?;
            last_line = line;
            let value = l
                .strip_prefix(name)
                .filter(|r| r.starts_with(char::is_whitespace) || r.is_empty())
                .map(str::trim)
                .ok_or(HalfIntError::Malformed { line, reason: format!("expected field `{name}`") })?;
            Ok((line, value.to_string()))
        };
        fn num<T: std::str::FromStr>(line: usize, v: &str, what: &str) -> Result<T, HalfIntError> {
            v.parse().map_err(|_| HalfIntError::Malformed { line, reason: format!("bad {what} `{v}`") })
        }
        let (l, v) = field("level")?;
        let level: u64 = num(l, &v, "level")?;
        let (l, v) = field("k")?;
        let k: u32 = num(l, &v, "k")?;
        let (l, v) = field("character")?;
        let nebentypus: DirichletCharacter = v
            .parse()
            .map_err(|e| HalfIntError::Malformed { line: l, reason: format!("bad character: {e}") })?;
        let (l, v) = field("t")?;
        let t: u64 = num(l, &v, "t")?;
        let (l, v) = field("truncation")?;
        let truncation: u64 = num(l, &v, "truncation")?;
        let (l, v) = field("coefficients")?;
        if !v.is_empty() {
            return Err(HalfIntError::Malformed { line: l, reason: "trailing text after `coefficients`".into() });
        }
        let field_order = nebentypus.order().max(1);
        let mut coeffs = BTreeMap::new();
        let mut prev = 0u64;
        for (line, l) in lines {
            let (n, value) = l
                .split_once(char::is_whitespace)
                .ok_or(HalfIntError::Malformed { line, reason: "expected `n value`".into() })?;
            let n: u64 = num(line, n, "index")?;
            if n <= prev {
                return Err(HalfIntError::Malformed { line, reason: "indices must increase".into() });
            }
            prev = n;
            let value = Cyclotomic::parse(value.trim(), field_order)
                .map_err(|e| HalfIntError::Malformed { line, reason: e.to_string() })?;
            coeffs.insert(n, value);
        }
        Self::new(level, k, nebentypus, t, truncation, coeffs)
    }
}

/// `((−1)^k n / p)` without overflowing `i64` for large `n`.
fn kronecker_i128(a: i128, p: u64) -> i8 {
    let r = a.rem_euclid(p as i128) as i64;
    kronecker(r, p as i64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EigenOutcome {
    Eigenvalue(Cyclotomic),
    /// First index at which the relation fails.
    Failure { n: u64 },
    /// Every `a(n)`, `n ≤ n_max`, vanished and every image was zero.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealityReport {
    pub checked: usize,
    /// Indices `n` where `a(tn²)/χ(n)` is not real.
    pub violations: Vec<u64>,
}

impl RealityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{character_group, principal, RootOfUnity};

    fn form(text: &str) -> Result<HalfIntegralForm, HalfIntError> {
        HalfIntegralForm::parse(text)
    }

    const MINIMAL: &str = "level 4\nk 6\ncharacter 4:0\nt 1\ntruncation 10\ncoefficients\n1 1\n";

    #[test]
    fn load_minimal() {
        let f = form(MINIMAL).unwrap();
        assert_eq!((f.level(), f.k(), f.t(), f.truncation()), (4, 6, 1, 10));
        assert_eq!(f.coefficient(1).unwrap(), Cyclotomic::one(1));
        assert!(f.coefficient(2).unwrap().is_zero());
        assert!(matches!(f.coefficient(11), Err(HalfIntError::OutOfRange { index: 11, .. })));
    }

    #[test]
    fn load_errors_are_distinct() {
        let bad_t = MINIMAL.replace("t 1", "t 12").replace("1 1", "12 1").replace("truncation 10", "truncation 20");
        assert_eq!(form(&bad_t), Err(HalfIntError::TNotSquarefree(12)));
        let bad_level = MINIMAL.replace("level 4", "level 6").replace("4:0", "6:0");
        assert_eq!(form(&bad_level), Err(HalfIntError::LevelNotDivisibleBy4(6)));
        assert_eq!(form(&MINIMAL.replace("k 6", "k 1")), Err(HalfIntError::WeightTooSmall(1)));
        assert_eq!(form(&MINIMAL.replace("1 1\n", "2 1\n")), Err(HalfIntError::ATZero(1)));
        assert_eq!(form(&MINIMAL.replace("1 1\n", "1 0\n")), Err(HalfIntError::ATZero(1)));
        assert!(matches!(form("level 4\nk 6\n"), Err(HalfIntError::Malformed { .. })));
        assert!(matches!(form(&MINIMAL.replace("1 1\n", "1 x\n")), Err(HalfIntError::Malformed { line: 7, .. })));
        assert!(matches!(form(&format!("{MINIMAL}1 2\n")), Err(HalfIntError::Malformed { line: 8, .. })));
        assert!(matches!(
            form(&MINIMAL.replace("4:0", "8:0,0")),
            Err(HalfIntError::CharacterModulus { level: 4, got: 8 })
        ));
    }

    #[test]
    fn text_roundtrip_is_bit_exact() {
        let text = "# sample\nlevel 20\nk 3\ncharacter 20:1,1\nt 1\ntruncation 30\ncoefficients\n\
                    1 1\n4 -3/7\n9 [0,2]\n16 [5/3,-1]\n25 0\n";
        let f = form(text).unwrap();
        assert_eq!(f.field_order(), 4);
        let written = f.to_text();
        let g = form(&written).unwrap();
        assert_eq!(f, g);
        assert_eq!(written, g.to_text());
        assert!(!written.contains("\n25 "));
        assert!(written.contains("\n9 [0,2]\n"));
    }

    #[test]
    fn single_relation_fixes_lambda() {
        let f = form("level 4\nk 2\ncharacter 4:0\nt 1\ntruncation 9\ncoefficients\n1 1\n9 5\n").unwrap();
        // n = 1, p = 3: a(9) + (1/3)·3·a(1) = 5 + 3.
        let out = f.eigencheck(&[3], 1).unwrap();
        assert_eq!(out, vec![(3, EigenOutcome::Eigenvalue(Cyclotomic::integer(1, 8)))]);
        assert_eq!(f.tpsq_coefficient(3, 1).unwrap(), Cyclotomic::integer(1, 8));
        assert!(f.eigencheck(&[2], 1).is_err());
        assert!(f.eigencheck(&[5], 1).is_err());
    }

    #[test]
    fn tpsq_terms_vanish_as_expected() {
        let text = "level 4\nk 2\ncharacter 4:0\nt 1\ntruncation 200\ncoefficients\n\
                    1 1\n2 3\n3 7\n9 2\n18 4\n27 -1\n81 6\n162 1\n";
        let f = form(text).unwrap();
        // p = 3, n = 2: a(18) + (2/3)·3·a(2) = 4 − 9.
        assert_eq!(f.tpsq_coefficient(3, 2).unwrap(), Cyclotomic::integer(1, -5));
        // p | n, p² ∤ n: the symbol kills the middle term. a(27) only.
        assert_eq!(f.tpsq_coefficient(3, 3).unwrap(), Cyclotomic::integer(1, -1));
        // p² | n: a(81) + 0 + 3³·a(1).
        assert_eq!(f.tpsq_coefficient(3, 9).unwrap(), Cyclotomic::integer(1, 6 + 27));
        // p = 3, n = 18: a(162) + 0 + 27·a(2).
        assert_eq!(f.tpsq_coefficient(3, 18).unwrap(), Cyclotomic::integer(1, 1 + 81));
        assert!(matches!(f.tpsq_coefficient(5, 9), Err(HalfIntError::OutOfRange { index: 225, .. })));
    }

    #[test]
    fn reality_with_order_four_character() {
        let g = character_group(20).unwrap();
        let chi = g.characters().into_iter().find(|c| c.order() == 4).unwrap();
        let mut values = vec![Cyclotomic::zero(4)];
        for n in 1..=6i64 {
            let v = match chi.evaluate(n) {
                Some(r) => Cyclotomic::root(4, r).mul_int(&BigInt::from(n * n - 3)),
                None => Cyclotomic::integer(4, 0),
            };
            values.push(v);
        }
        let f = HalfIntegralForm::from_square_class(20, 3, chi.clone(), 1, &values).unwrap();
        let report = f.reality_check();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.checked, 2);
        let i = Cyclotomic::root(4, RootOfUnity::new(4, 1));
        let bad = f.with_coefficient(9, values[3].mul(&i)).unwrap();
        assert_eq!(bad.reality_check().violations, vec![3]);

        let trivial = form(MINIMAL).unwrap();
        assert!(trivial.reality_check().passed());
        assert_eq!(principal(4).unwrap(), *trivial.nebentypus());
    }
}
