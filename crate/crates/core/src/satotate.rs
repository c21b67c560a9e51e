//! The Sato–Tate measure and empirical statistics of normalized eigenvalues.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arith::{self, gcd};
use crate::characters::{DirichletCharacter, RootOfUnity};
use crate::exec::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SatoTateError {
    #[error("{0} lies outside [-1, 1]")]
    OutOfDomain(f64),
    #[error("interval [{0}, {1}] is empty or leaves [-1, 1]")]
    BadInterval(f64, f64),
    #[error("empty sample")]
    EmptySample,
    #[error("invalid restriction: {0}")]
    BadRestriction(String),
    #[error("no primes in the residue class {d} mod {q} up to {x}")]
    NoPrimesInClass { d: u64, q: u64, x: u64 },
    #[error("need at least 3 checkpoints with E(x) != 0, got {0}")]
    TooFewPoints(usize),
}

/// `(2/π)√(1 − t²)` on `[−1, 1]`, zero outside.
pub fn st_density(t: f64) -> f64 {
    if (-1.0..=1.0).contains(&t) {
        2.0 / PI * (1.0 - t * t).sqrt()
    } else {
        0.0
    }
}

/// `μ([−1, x]) = 1/2 + (x√(1−x²) + arcsin x)/π`.
pub fn st_cdf(x: f64) -> Result<f64, SatoTateError> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(SatoTateError::OutOfDomain(x));
    }
    Ok(0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI)
}

/// `μ([a, b])` for `−1 ≤ a ≤ b ≤ 1`.
pub fn st_measure(a: f64, b: f64) -> Result<f64, SatoTateError> {
    if !(-1.0..=1.0).contains(&a) || !(-1.0..=1.0).contains(&b) || a > b {
        return Err(SatoTateError::BadInterval(a, b));
    }
    // The difference of the two arcsine terms is taken before adding the
    // algebraic part so that short intervals keep their relative accuracy.
    let alg = b * (1.0 - b * b).sqrt() - a * (1.0 - a * a).sqrt();
    Ok(((alg + (b.asin() - a.asin())) / PI).max(0.0))
}

/// One draw from the Sato–Tate measure by rejection from the unit box.
pub fn draw_semicircle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.random_range(-1.0..=1.0);
        let y: f64 = rng.random();
        if y * y <= 1.0 - x * x {
            return x;
        }
    }
}

const SAMPLE_CHUNK: usize = 1 << 16;

/// `count` i.i.d. Sato–Tate draws. Chunk `i` of the output uses the ChaCha
/// stream `i` of `seed`, so the result does not depend on the policy.
pub fn st_sample(seed: u64, count: usize) -> Vec<f64> {
    st_sample_with(seed, count, Execution::default())
}

pub fn st_sample_with(seed: u64, count: usize, exec: Execution) -> Vec<f64> {
    exec::map_chunks(exec, 0..count, SAMPLE_CHUNK, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((r.start / SAMPLE_CHUNK) as u64);
        r.map(|_| draw_semicircle(&mut rng)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// One-sample Kolmogorov–Smirnov distance of a sorted sample from `cdf`.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, SatoTateError> {
    if sorted.is_empty() {
        return Err(SatoTateError::EmptySample);
    }
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

fn st_cdf_clamped(x: f64) -> f64 {
    st_cdf(x.clamp(-1.0, 1.0)).expect("clamped")
}

/// Which primes enter a sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Restriction {
    All,
    Progression { d: u64, q: u64 },
    CharacterValue { character: DirichletCharacter, value: RootOfUnity },
}

impl Restriction {
    pub fn validate(&self) -> Result<(), SatoTateError> {
        match self {
            Restriction::All => Ok(()),
            Restriction::Progression { d, q } => {
                if *q == 0 || gcd(*d, *q) != 1 {
                    return Err(SatoTateError::BadRestriction(format!("gcd({d}, {q}) != 1")));
                }
                Ok(())
            }
            Restriction::CharacterValue { character, value } => {
                if !character.image().contains(value) {
                    return Err(SatoTateError::BadRestriction(format!("{value} is not a value of {character}")));
                }
                Ok(())
            }
        }
    }

    pub fn contains(&self, p: u64) -> bool {
        match self {
            Restriction::All => true,
            Restriction::Progression { d, q } => p % q == d % q,
            Restriction::CharacterValue { character, value } => character.evaluate(p as i64) == Some(*value),
        }
    }

    /// Predicted share of all primes that meet the restriction.
    pub fn prime_share(&self) -> f64 {
        match self {
            Restriction::All => 1.0,
            Restriction::Progression { q, .. } => 1.0 / arith::euler_phi(*q) as f64,
            Restriction::CharacterValue { character, .. } => 1.0 / character.order() as f64,
        }
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restriction::All => write!(f, "all"),
            Restriction::Progression { d, q } => write!(f, "{d}mod{q}"),
            Restriction::CharacterValue { character, value } => write!(f, "chi[{character}]={value}"),
        }
    }
}

/// Intervals reported by default: halves, the central interval, and tails.
pub const DEFAULT_INTERVALS: [(f64, f64); 5] = [(-1.0, 0.0), (0.0, 1.0), (-0.5, 0.5), (-1.0, -0.5), (0.5, 1.0)];

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalRow {
    pub a: f64,
    pub b: f64,
    /// Share of the restricted sample in `[a, b]`.
    pub empirical: f64,
    /// `μ([a, b])`.
    pub predicted: f64,
    /// `#{p ∈ S, B ∈ [a,b]} / π(x)`.
    pub density_empirical: f64,
    /// `μ([a, b])` times the predicted share of the restriction.
    pub density_predicted: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bin {
    pub a: f64,
    pub b: f64,
    pub count: usize,
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StStats {
    pub restriction: Restriction,
    pub x_max: u64,
    /// Primes `≤ x_max` available before restricting.
    pub total_primes: usize,
    pub sample: Vec<f64>,
    pub ks_distance: f64,
    pub chi_square: f64,
    pub intervals: Vec<IntervalRow>,
    /// Twenty bins `[a, b)` partitioning `[−1, 1]`, the last one closed.
    pub bins: Vec<Bin>,
}

pub const BIN_COUNT: usize = 20;

fn bin_index(x: f64) -> usize {
    (((x + 1.0) * (BIN_COUNT as f64 / 2.0)).floor() as usize).min(BIN_COUNT - 1)
}

fn bin_edge(i: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / BIN_COUNT as f64
}

/// Empirical distribution of `B(p)` over primes `p ≤ x_max` meeting
/// `restriction`, compared with the Sato–Tate measure. Intervals are closed.
pub fn restricted_sample(
    values: &[(u64, f64)],
    restriction: &Restriction,
    x_max: u64,
    intervals: &[(f64, f64)],
) -> Result<StStats, SatoTateError> {
    restriction.validate()?;
    let mut total_primes = 0;
    let mut sample = Vec::new();
    for &(p, b) in values {
        if p > x_max {
            continue;
        }
        if !(-1.0..=1.0).contains(&b) {
            return Err(SatoTateError::OutOfDomain(b));
        }
        total_primes += 1;
        if restriction.contains(p) {
            sample.push(b);
        }
    }
    if sample.is_empty() {
        return Err(SatoTateError::EmptySample);
    }
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let ks_distance = ks_statistic(&sample, st_cdf_clamped)?;

    let mut counts = [0usize; BIN_COUNT];
    for &x in &sample {
        counts[bin_index(x)] += 1;
    }
    let bins: Vec<Bin> = (0..BIN_COUNT)
        .map(|i| {
            let (a, b) = (bin_edge(i), bin_edge(i + 1));
            Bin { a, b, count: counts[i], expected: n * st_measure(a, b.min(1.0)).expect("inside [-1,1]") }
        })
        .collect();
    let chi_square = bins.iter().map(|b| (b.count as f64 - b.expected).powi(2) / b.expected).sum();

    let share = restriction.prime_share();
    let intervals = intervals
        .iter()
        .map(|&(a, b)| -> Result<IntervalRow, SatoTateError> {
            let mu = st_measure(a, b)?;
            let lo = sample.partition_point(|&x| x < a);
            let hi = sample.partition_point(|&x| x <= b);
            let k = (hi - lo) as f64;
            Ok(IntervalRow {
                a,
                b,
                empirical: k / n,
                predicted: mu,
                density_empirical: k / total_primes as f64,
                density_predicted: mu * share,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StStats {
        restriction: restriction.clone(),
        x_max,
        total_primes,
        sample,
        ks_distance,
        chi_square,
        intervals,
        bins,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrimeSignReport {
    pub d: u64,
    pub q: u64,
    pub x: u64,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    /// `π_{d,q}(x)` over the primes present in the sign table.
    pub in_class: usize,
    /// `π(x)` over the primes present in the sign table.
    pub total: usize,
}

impl PrimeSignReport {
    /// `(>, <, =0)` as shares of the class.
    pub fn class_ratios(&self) -> (f64, f64, f64) {
        let n = self.in_class as f64;
        (self.positive as f64 / n, self.negative as f64 / n, self.zero as f64 / n)
    }

    /// `(>, <, =0)` as shares of all primes; compare with `1/(2φ(q))`.
    pub fn global_ratios(&self) -> (f64, f64, f64) {
        let n = self.total as f64;
        (self.positive as f64 / n, self.negative as f64 / n, self.zero as f64 / n)
    }

    pub fn predicted_global(&self) -> f64 {
        1.0 / (2.0 * arith::euler_phi(self.q) as f64)
    }
}

/// Counts the signs of `a(tp²)/χ(p)` over primes `p ≡ d (mod q)`, `p ≤ x`.
pub fn prime_sign_densities(signs: &[(u64, i8)], d: u64, q: u64, x: u64) -> Result<PrimeSignReport, SatoTateError> {
    Restriction::Progression { d, q }.validate()?;
    let mut r = PrimeSignReport { d, q, x, positive: 0, negative: 0, zero: 0, in_class: 0, total: 0 };
    for &(p, s) in signs.iter().filter(|(p, _)| *p <= x) {
        r.total += 1;
        if p % q != d % q {
            continue;
        }
        r.in_class += 1;
        match s {
            1 => r.positive += 1,
            -1 => r.negative += 1,
            _ => r.zero += 1,
        }
    }
    if r.in_class == 0 {
        return Err(SatoTateError::NoPrimesInClass { d, q, x });
    }
    Ok(r)
}

/// Compares `sign > 0` with `B(p) > χ₁(p)/(2√p)` (for `a(t) > 0`) on each
/// entry `(p, sign, B, χ₁(p))`. Returns the primes where they disagree.
pub fn sign_criterion_disagreements(entries: &[(u64, i8, f64, i8)]) -> Vec<u64> {
    entries
        .iter()
        .filter(|&&(p, s, b, chi1)| (s > 0) != (b > chi1 as f64 / (2.0 * (p as f64).sqrt())))
        .map(|e| e.0)
        .collect()
}

/// `x = 10³·2^j` for `j ≥ 0` while `x ≤ x_max`.
pub fn checkpoint_schedule(x_max: u64) -> Vec<u64> {
    let mut xs = Vec::new();
    let mut x = 1000u64;
    while x <= x_max {
        xs.push(x);
        x *= 2;
    }
    xs
}

/// `E(x) = π_S(x)/π(x) − d(S)` at each checkpoint, where `S` is the set of
/// primes in `values` meeting `restriction` with `B(p) ∈ [a, b]`.
pub fn error_checkpoints(
    values: &[(u64, f64)],
    restriction: &Restriction,
    interval: (f64, f64),
    checkpoints: &[u64],
) -> Result<Vec<(u64, f64)>, SatoTateError> {
    restriction.validate()?;
    let (a, b) = interval;
    let density = st_measure(a, b)? * restriction.prime_share();
    let mut sorted: Vec<(u64, f64)> = values.to_vec();
    sorted.sort_by_key(|e| e.0);
    let mut out = Vec::with_capacity(checkpoints.len());
    let (mut i, mut pi, mut pi_s) = (0usize, 0usize, 0usize);
    for &x in checkpoints {
        while i < sorted.len() && sorted[i].0 <= x {
            let (p, v) = sorted[i];
            pi += 1;
            if restriction.contains(p) && a <= v && v <= b {
                pi_s += 1;
            }
            i += 1;
        }
        if pi > 0 {
            out.push((x, pi_s as f64 / pi as f64 - density));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorFit {
    pub checkpoints: Vec<(u64, f64)>,
    /// Checkpoints with `E(x) ≠ 0` that entered the fit.
    pub used: usize,
    pub c: f64,
    pub alpha: f64,
    /// Root mean square of the residuals of `log|E|`.
    pub residual: f64,
}

/// Least-squares fit of `log|E(x)| = log C − α log x`.
pub fn error_term_fit(checkpoints: &[(u64, f64)]) -> Result<ErrorFit, SatoTateError> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &(x, e) in checkpoints {
        if e != 0.0 && e.is_finite() && x > 0 && !pts.iter().any(|p| p.0 == (x as f64).ln()) {
            pts.push(((x as f64).ln(), e.abs().ln()));
        }
    }
    if pts.len() < 3 {
        return Err(SatoTateError::TooFewPoints(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ErrorFit { checkpoints: checkpoints.to_vec(), used: pts.len(), c: intercept.exp(), alpha: -slope, residual })
}
