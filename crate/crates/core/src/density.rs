//! The sign function `f(n)` and density experiments over residue classes.
//!
//! `f(n) = sign(a(tn²)/χ(n))` when `gcd(n, N) = 1` and `0` otherwise. With
//! `a(t) > 0` it is multiplicative, and the main theorem predicts that its
//! positive and negative values split each residue class evenly.

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arith::gcd;
use crate::characters::DirichletCharacter;
use crate::coeff::Coefficient;
use crate::cyclotomic::RootSum;
use crate::exec::{self, Execution};
use crate::shimura::ShimuraParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("n = {n} is outside the table 1..={len}")]
    Range { n: u64, len: u64 },
    #[error("gcd({d}, {q}) != 1")]
    NotCoprime { d: u64, q: u64 },
    #[error("q = {q} is neither the level {level} nor coprime to it")]
    Hypothesis { q: u64, level: u64 },
    #[error("delta = {0} must be positive")]
    BadDelta(f64),
    #[error("a(tn^2)/chi(n) is not real at n = {0}")]
    NotReal(u64),
    #[error("f(1) = sign(a(t)) must be +1")]
    NonPositiveAT,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignFunction {
    level: u64,
    values: Vec<i8>,
}

impl SignFunction {
    /// `raw[n]` is the sign of `a(tn²)/χ(n)`; entries at `n` sharing a
    /// factor with the level are forced to zero. `raw[0]` is ignored.
    pub fn from_signs(level: u64, mut raw: Vec<i8>) -> Self {
        if !raw.is_empty() {
            raw[0] = 0;
        }
        for (n, v) in raw.iter_mut().enumerate().skip(1) {
            if gcd(n as u64, level) != 1 {
                *v = 0;
            } else {
                *v = v.signum();
            }
        }
        SignFunction { level, values: raw }
    }

    /// From `a_sq[n] = a(tn²)`, `1 ≤ n < a_sq.len()`.
    pub fn from_square_class<C: Coefficient>(params: &ShimuraParams, a_sq: &[C]) -> Result<Self, DensityError> {
        let mut raw = vec![0i8; a_sq.len()];
        for (n, slot) in raw.iter_mut().enumerate().skip(1) {
            let Some(chi_n) = params.chi().evaluate(n as i64) else { continue };
            let v = a_sq[n].mul_root(chi_n.conj()).ok_or(DensityError::NotReal(n as u64))?;
            *slot = v.real_sign().ok_or(DensityError::NotReal(n as u64))?;
        }
        Ok(Self::from_signs(params.level(), raw))
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// Largest `n` covered.
    pub fn len(&self) -> u64 {
        self.values.len().saturating_sub(1) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `values()[n] = f(n)`, `values()[0] = 0`.
    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// `f(n)`.
    pub fn sign_f(&self, n: u64) -> Result<i8, DensityError> {
        if n == 0 || n > self.len() {
            return Err(DensityError::Range { n, len: self.len() });
        }
        Ok(self.values[n as usize])
    }

    fn check_cover(&self, x: u64) -> Result<(), DensityError> {
        if x > self.len() {
            return Err(DensityError::Range { n: x, len: self.len() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativityReport {
    pub checked: usize,
    pub violations: Vec<(u64, u64)>,
}

/// Tests `f(mn) = f(m)f(n)` on `pair_count` random coprime pairs, `mn ≤ x`.
pub fn multiplicativity_check(f: &SignFunction, pair_count: usize, x: u64, seed: u64) -> Result<MultiplicativityReport, DensityError> {
    f.check_cover(x)?;
    if f.sign_f(1)? != 1 {
        return Err(DensityError::NonPositiveAT);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut violations = Vec::new();
    while checked < pair_count {
        let m = rng.random_range(1..=x);
        let n = rng.random_range(1..=x / m);
        if m.gcd(&n) != 1 {
            continue;
        }
        checked += 1;
        if f.values[(m * n) as usize] != f.values[m as usize] * f.values[n as usize] {
            violations.push((m, n));
        }
    }
    Ok(MultiplicativityReport { checked, violations })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Counts {
    positive: u64,
    negative: u64,
    zero: u64,
    out_of_class: u64,
    non_unit: u64,
}

impl Counts {
    fn merge(mut self, o: Counts) -> Counts {
        self.positive += o.positive;
        self.negative += o.negative;
        self.zero += o.zero;
        self.out_of_class += o.out_of_class;
        self.non_unit += o.non_unit;
        self
    }
}

const COUNT_CHUNK: usize = 1 << 15;

fn class_counts(f: &SignFunction, q: u64, d: u64, x: u64, exec: Execution) -> Counts {
    exec::map_chunks(exec, 1..x as usize + 1, COUNT_CHUNK, |r| {
        let mut c = Counts::default();
        for n in r {
            if gcd(n as u64, f.level) != 1 {
                if n as u64 % q == d % q {
                    c.non_unit += 1;
                }
                continue;
            }
            if n as u64 % q != d % q {
                c.out_of_class += 1;
                continue;
            }
            match f.values[n] {
                1 => c.positive += 1,
                -1 => c.negative += 1,
                _ => c.zero += 1,
            }
        }
        c
    })
    .into_iter()
    .fold(Counts::default(), Counts::merge)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub q: u64,
    pub d: u64,
    pub x: u64,
    pub positive: u64,
    pub negative: u64,
    /// Units in the class with `a(tn²) = 0`.
    pub zero: u64,
    pub nonzero: u64,
    /// Units `n ≤ x` outside the class.
    pub out_of_class: u64,
    /// `n ≤ x` in the class sharing a factor with the level.
    pub non_unit: u64,
    pub dirichlet: Vec<DirichletEstimate>,
}

impl DensityReport {
    pub fn in_class_units(&self) -> u64 {
        self.positive + self.negative + self.zero
    }

    pub fn positive_ratio(&self) -> f64 {
        self.positive as f64 / self.nonzero as f64
    }

    pub fn negative_ratio(&self) -> f64 {
        self.negative as f64 / self.nonzero as f64
    }

    /// `1/√(nonzero count)`.
    pub fn radius(&self) -> f64 {
        1.0 / (self.nonzero as f64).sqrt()
    }

    /// `(#{f>0} − #{f<0})/x`, which tends to 0.
    pub fn difference_quotient(&self) -> f64 {
        (self.positive as f64 - self.negative as f64) / self.x as f64
    }

    /// `(#{f>0} + #{f<0})/x`, which tends to a positive constant `b`.
    pub fn sum_quotient(&self) -> f64 {
        self.nonzero as f64 / self.x as f64
    }

    /// `(P − M)² + 4PM = (P + M)²` on the raw counts.
    pub fn count_identity_holds(&self) -> bool {
        let (p, m) = (self.positive as i128, self.negative as i128);
        (p - m) * (p - m) + 4 * p * m == (p + m) * (p + m)
    }
}

/// Counts `f` over `{n ≤ x : n ≡ d (mod q), gcd(n, N) = 1}`. A nonempty
/// `delta_grid` adds Dedekind–Dirichlet estimates of the nonzero set.
pub fn main_theorem_experiment(
    f: &SignFunction,
    q: u64,
    d: u64,
    x: u64,
    delta_grid: &[f64],
    exec: Execution,
) -> Result<DensityReport, DensityError> {
    if q == 0 || gcd(d, q) != 1 {
        return Err(DensityError::NotCoprime { d, q });
    }
    f.check_cover(x)?;
    let c = class_counts(f, q, d, x, exec);
    let dirichlet = if delta_grid.is_empty() {
        Vec::new()
    } else {
        let level = f.level;
        let values = &f.values;
        dedekind_dirichlet_estimate(
            |n| n % q == d % q && gcd(n, level) == 1 && values[n as usize] != 0,
            delta_grid,
            x,
            exec,
        )?
    };
    Ok(DensityReport {
        q,
        d,
        x,
        positive: c.positive,
        negative: c.negative,
        zero: c.zero,
        nonzero: c.positive + c.negative,
        out_of_class: c.out_of_class,
        non_unit: c.non_unit,
        dirichlet,
    })
}

/// `|Σ_{n≤x} f(n)ε(n)| / x` at each checkpoint. The sums are exact
/// cyclotomic integers; only the final modulus is a float.
pub fn delange_partial_sums(
    values: &[i8],
    eps: &DirichletCharacter,
    checkpoints: &[u64],
    exec: Execution,
) -> Result<Vec<(u64, f64)>, DensityError> {
    let top = checkpoints.iter().copied().max().unwrap_or(0);
    let len = values.len().saturating_sub(1) as u64;
    if top > len {
        return Err(DensityError::Range { n: top, len });
    }
    let order = eps.order().max(1);
    let accumulate = |sum: &mut RootSum, n: usize| {
        let v = values[n];
        if v != 0 {
            if let Some(r) = eps.evaluate(n as i64) {
                sum.add_root(r, v as i64);
            }
        }
    };
    let chunk_sums = exec::map_chunks(exec, 1..top as usize + 1, COUNT_CHUNK, |r| {
        let mut s = RootSum::new(order);
        for n in r {
            accumulate(&mut s, n);
        }
        s
    });
    let mut prefix = vec![RootSum::new(order)];
    for s in &chunk_sums {
        let mut next = prefix.last().expect("nonempty").clone();
        next.merge(s);
        prefix.push(next);
    }
    Ok(checkpoints
        .iter()
        .map(|&x| {
            let full = (x as usize) / COUNT_CHUNK;
            let mut s = prefix[full.min(chunk_sums.len())].clone();
            for n in (full * COUNT_CHUNK).max(1)..=x as usize {
                accumulate(&mut s, n);
            }
            (x, s.reduce().to_complex().norm() / x as f64)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirichletEstimate {
    pub delta: f64,
    /// `δ·Σ_{n≤X, n∈A} n^{−(1+δ)}`.
    pub estimate: f64,
    /// `δ∫_X^∞ u^{−1−δ} du = X^{−δ}`, a bound on the omitted tail.
    pub tail_bound: f64,
}

impl DirichletEstimate {
    pub fn within(&self, target: f64) -> bool {
        (self.estimate - target).abs() <= self.tail_bound
    }
}

const SUM_CHUNK: usize = 1 << 14;

fn dirichlet_sum(weight: impl Fn(u64) -> f64 + Sync + Send, s: f64, x: u64, exec: Execution) -> f64 {
    exec::map_chunks(exec, 1..x as usize + 1, SUM_CHUNK, |r| {
        r.map(|n| {
            let w = weight(n as u64);
            if w == 0.0 { 0.0 } else { w * (n as f64).powf(-s) }
        })
        .sum::<f64>()
    })
    .into_iter()
    .sum()
}

/// Truncated Dirichlet-series density estimates of `{n : member(n)}`.
pub fn dedekind_dirichlet_estimate(
    member: impl Fn(u64) -> bool + Sync + Send,
    delta_grid: &[f64],
    x: u64,
    exec: Execution,
) -> Result<Vec<DirichletEstimate>, DensityError> {
    if let Some(&bad) = delta_grid.iter().find(|&&d| !(d > 0.0)) {
        return Err(DensityError::BadDelta(bad));
    }
    Ok(delta_grid
        .iter()
        .map(|&delta| {
            let sum = dirichlet_sum(|n| if member(n) { 1.0 } else { 0.0 }, 1.0 + delta, x, exec);
            DirichletEstimate { delta, estimate: delta * sum, tail_bound: (x as f64).powf(-delta) }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub q: u64,
    pub d: u64,
    pub delta: f64,
    pub x: u64,
    pub value: f64,
    pub target: f64,
    pub deviation: f64,
    /// Bound on the omitted tail (weights are at most 2).
    pub tail_bound: f64,
}

/// `δ(2Σ_{f>0} + Σ_{f=0, unit} + Σ_{non-unit}) n^{−1−δ}` over `n ≡ d (mod q)`,
/// compared with `1/q`. Diagnostic only.
pub fn identity_1q_diagnostic(
    f: &SignFunction,
    q: u64,
    d: u64,
    delta: f64,
    x: u64,
    exec: Execution,
) -> Result<IdentityReport, DensityError> {
    if q == 0 || !(q == f.level || gcd(q, f.level) == 1) {
        return Err(DensityError::Hypothesis { q, level: f.level });
    }
    if !(delta > 0.0) {
        return Err(DensityError::BadDelta(delta));
    }
    f.check_cover(x)?;
    let level = f.level;
    let values = &f.values;
    let weight = |n: u64| {
        if n % q != d % q {
            0.0
        } else if gcd(n, level) != 1 {
            1.0
        } else {
            match values[n as usize] {
                1 => 2.0,
                0 => 1.0,
                _ => 0.0,
            }
        }
    };
    let value = delta * dirichlet_sum(weight, 1.0 + delta, x, exec);
    let target = 1.0 / q as f64;
    Ok(IdentityReport {
        q,
        d,
        delta,
        x,
        value,
        target,
        deviation: value - target,
        tail_bound: 2.0 * (x as f64).powf(-delta),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassDensity {
    pub d: u64,
    pub nonzero: u64,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DIndependenceReport {
    pub q: u64,
    pub x: u64,
    pub classes: Vec<ClassDensity>,
    pub max_deviation: f64,
    pub max_count_gap: u64,
}

/// Nonzero density `#{n ≤ x : n ≡ d, unit, f(n) ≠ 0}/x` for every unit
/// class `d` mod `q`.
pub fn d_independence_check(f: &SignFunction, q: u64, x: u64, exec: Execution) -> Result<DIndependenceReport, DensityError> {
    f.check_cover(x)?;
    let q = q.max(1);
    let classes: Vec<u64> = (0..q).filter(|&d| gcd(d, q) == 1).collect();
    let rows: Vec<ClassDensity> = classes
        .iter()
        .map(|&d| {
            let c = class_counts(f, q, d, x, exec);
            let nonzero = c.positive + c.negative;
            ClassDensity { d, nonzero, density: nonzero as f64 / x as f64 }
        })
        .collect();
    let max = rows.iter().map(|r| r.nonzero).max().unwrap_or(0);
    let min = rows.iter().map(|r| r.nonzero).min().unwrap_or(0);
    Ok(DIndependenceReport {
        q,
        x,
        max_deviation: (max - min) as f64 / x as f64,
        max_count_gap: max - min,
        classes: rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterRow {
    pub n: u64,
    /// `tn²`.
    pub index: u64,
    pub re: f64,
    pub im: f64,
    /// `χ(n)` as text, empty when `gcd(n, N) > 1`.
    pub chi: String,
}

/// The points `a(tn²)` in the complex plane with the value of `χ(n)`.
/// Points sharing a value of `χ(n)` lie on one line through the origin.
pub fn scatter_rows<C: Coefficient>(params: &ShimuraParams, a_sq: &[C], limit: u64) -> Vec<ScatterRow> {
    (1..a_sq.len().min(limit as usize + 1))
        .map(|n| {
            let z = a_sq[n].to_complex();
            ScatterRow {
                n: n as u64,
                index: params.t() * (n as u64) * (n as u64),
                re: z.re,
                im: z.im,
                chi: params.chi().evaluate(n as i64).map(|r| r.to_string()).unwrap_or_default(),
            }
        })
        .collect()
}
