//! Binomial tail and Hoeffding-Azuma bounds, and the pair-count martingale.
//!
//! Fix a residue `r`. Adding the sample `x` (and its mirror `-x`) to a
//! multiset of `2(j-1)` atoms with counts `c` adds, to the quarter pair count
//! `P(r)/4 = N^2 (sigma*sigma)(r)`, the amount
//!
//! ```text
//! D_j = 1/4 ([2x = r] + [-2x = r]) + 1/2 [r = 0] + 1/2 (c[r - x] + c[r + x])
//! ```
//!
//! With `x` uniform on `{1, ..., n-1}` its conditional expectation is
//!
//! ```text
//! E_j = [r != 0] / (2(n-1)) + 1/2 [r = 0] + (2(j-1) - c[r]) / (n-1)
//! ```
//!
//! and the increments are `Y_j = D_j - E_j` while every residue carries fewer
//! than `M` atoms, `Y_j = 0` from the first step where that fails.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::construct::{choose_m, sample_points, CAP_FAILURE_BUDGET};
use crate::error::{Error, Result};
use crate::grid_measure::{pair_counts, GridSpec};
use crate::rational::Rational;
use crate::rng;

/// `2 (Np)^m / m!`, an upper bound for `P(Bin(N, p) >= m)` when `0 < Np < 1`.
pub fn binomial_tail_bound(trials: u64, p: f64, m: u64) -> Result<f64> {
    let mean = trials as f64 * p;
    if !(mean > 0.0 && mean < 1.0) {
        return Err(Error::OutOfHypothesis(format!("Np = {mean} is not in (0, 1)")));
    }
    if m < 2 {
        return Err(Error::OutOfHypothesis(format!("m = {m} < 2")));
    }
    let log_fact: f64 = (2..=m).map(|k| (k as f64).ln()).sum();
    Ok(2.0 * (m as f64 * mean.ln() - log_fact).exp())
}

/// Exact form of [`binomial_tail_bound`].
pub fn binomial_tail_bound_exact(trials: u64, p: &BigRational, m: u64) -> Result<BigRational> {
    let mean = p * BigRational::from_integer(BigInt::from(trials));
    if mean <= BigRational::zero() || mean >= BigRational::one() {
        return Err(Error::OutOfHypothesis(format!("Np = {mean} is not in (0, 1)")));
    }
    if m < 2 {
        return Err(Error::OutOfHypothesis(format!("m = {m} < 2")));
    }
    let fact: BigInt = (2..=m).map(BigInt::from).product();
    Ok(num::pow(mean, m as usize) * BigRational::from_integer(BigInt::from(2)) / BigRational::from_integer(fact))
}

/// `P(Bin(N, p) >= m)` by exact summation.
pub fn exact_binomial_tail(trials: u64, p: &BigRational, m: u64) -> BigRational {
    let q = BigRational::one() - p;
    let mut total = BigRational::zero();
    let mut binom = BigInt::one();
    for k in 0..=trials {
        if k >= m {
            let term = num::pow(p.clone(), k as usize) * num::pow(q.clone(), (trials - k) as usize);
            total += term * BigRational::from_integer(binom.clone());
        }
        binom = binom * BigInt::from(trials - k) / BigInt::from(k + 1);
    }
    total
}

/// Hoeffding-Azuma bound `exp(-x^2 / (2A))` on `P(|W_N - W_0| >= x)`.
pub fn azuma_bound(variance: f64, x: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::InvalidVariance(variance));
    }
    Ok((-x * x / (2.0 * variance)).exp())
}

/// `A = 8 (N^2 / n) (M^2 + 1)`.
pub fn variance_proxy(n: u64, points: u64, cap: u64) -> f64 {
    let nf = points as f64;
    8.0 * nf * nf / n as f64 * ((cap * cap) as f64 + 1.0)
}

/// Bound on `|Y_j|` for an untripped path: `D_j <= M` and `E_j <= 1/2 + 2N/(n-1)`.
pub fn increment_bound(n: u64, points: u64, cap: u64) -> f64 {
    cap as f64 + 0.5 + 2.0 * points as f64 / (n - 1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePath {
    pub increments: Vec<Rational>,
    /// `W_0 = 0, W_j = W_{j-1} + Y_j`.
    pub partial_sums: Vec<Rational>,
    pub cap_tripped: bool,
    /// First step (1-based) whose increment was forced to zero.
    pub tripped_at: Option<usize>,
    /// `sum_j E_j` over the untripped steps.
    pub compensator: Rational,
}

impl MartingalePath {
    pub fn last(&self) -> &Rational {
        self.partial_sums.last().expect("W_0 is always present")
    }
}

fn check_samples(grid: GridSpec, samples: &[u64], r: u64) -> Result<()> {
    if let Some(&bad) = samples.iter().find(|&&x| x == 0 || x >= grid.n()) {
        return Err(Error::InvalidAtom { residue: bad, n: grid.n() });
    }
    if r >= grid.n() {
        return Err(Error::InvalidParams(format!("residue r = {r} must be below n = {}", grid.n())));
    }
    Ok(())
}

/// Centered increments of the quarter pair count at residue `r`.
pub fn increment_sequence(n: u64, samples: &[u64], r: u64, cap: u64) -> Result<MartingalePath> {
    let grid = GridSpec::new(n)?;
    check_samples(grid, samples, r)?;
    let nm1 = n as i128 - 1;
    let r_zero = r == 0;
    let mut counts = vec![0u64; grid.len()];
    let mut max_count = 0u64;
    let mut increments = Vec::with_capacity(samples.len());
    let mut partial_sums = vec![Rational::zero()];
    let mut tripped_at = None;
    let mut compensator = Rational::zero();

    for (idx, &x) in samples.iter().enumerate() {
        let j = idx as i128 + 1;
        if tripped_at.is_none() && max_count >= cap {
            tripped_at = Some(idx + 1);
        }
        let y = if tripped_at.is_some() {
            Rational::zero()
        } else {
            let self_hits = [(2 * x) % n, grid.reflect((2 * x) % n)].iter().filter(|&&s| s == r).count() as i128;
            let cross = counts[((r + n - x) % n) as usize] + counts[((r + x) % n) as usize];
            let mut d = Rational::new(self_hits, 4) + Rational::new(cross as i128, 2);
            let mut e = Rational::new(2 * (j - 1) - counts[r as usize] as i128, nm1);
            if r_zero {
                d += Rational::new(1, 2);
                e += Rational::new(1, 2);
            } else {
                e += Rational::new(1, 2 * nm1);
            }
            compensator += &e;
            d - e
        };
        counts[x as usize] += 1;
        counts[grid.reflect(x) as usize] += 1;
        max_count = max_count.max(counts[x as usize]);
        let w = partial_sums.last().unwrap() + &y;
        partial_sums.push(w);
        increments.push(y);
    }
    Ok(MartingalePath { increments, partial_sums, cap_tripped: tripped_at.is_some(), tripped_at, compensator })
}

/// `E[P_N(r) / 4]` for `N` uniform draws on `{1, ..., n-1}`.
pub fn expected_quarter_pair_count(n: u64, points: u64, r: u64) -> Rational {
    let nm1 = n as i128 - 1;
    let big_n = points as i128;
    let cross = Rational::new(big_n * (big_n - 1), nm1);
    if r % n == 0 {
        Rational::new(big_n, 2) + cross
    } else {
        Rational::new(big_n, 2 * nm1) + cross - Rational::new(big_n * (big_n - 1), nm1 * nm1)
    }
}

/// Terms of the telescoping identity for one path.
#[derive(Debug, Clone, PartialEq)]
pub struct Telescoping {
    /// `W_N`.
    pub martingale_end: Rational,
    /// `P_N(r) / 4 = N^2 (sigma*sigma)(r)`, from the autoconvolution.
    pub quarter_pair_count: Rational,
    /// `sum_j E_j`.
    pub compensator: Rational,
    /// `E[P_N(r) / 4]`.
    pub expected: Rational,
}

impl Telescoping {
    /// `W_N = P_N(r)/4 - sum_j E_j`.
    pub fn holds(&self) -> bool {
        self.martingale_end == &self.quarter_pair_count - &self.compensator
    }

    /// `P_N(r)/4 - E[P_N(r)/4] - W_N = (c-history term) / (n-1)`; zero at `r = 0`.
    pub fn centering_gap(&self) -> Rational {
        &self.quarter_pair_count - &self.expected - &self.martingale_end
    }
}

pub fn telescoping(n: u64, samples: &[u64], r: u64, cap: u64) -> Result<Telescoping> {
    let path = increment_sequence(n, samples, r, cap)?;
    if let Some(step) = path.tripped_at {
        return Err(Error::CapTripped(step));
    }
    let grid = GridSpec::new(n)?;
    let quarter = if samples.is_empty() {
        Rational::zero()
    } else {
        let m = crate::grid_measure::SymmetricCounts::from_points(grid, samples)?;
        let v = crate::grid_measure::autoconvolve(&m);
        let big_n = samples.len() as i128;
        v.weight(r as usize) * Rational::from_integer(big_n * big_n)
    };
    Ok(Telescoping {
        martingale_end: path.last().clone(),
        quarter_pair_count: quarter,
        compensator: path.compensator,
        expected: expected_quarter_pair_count(n, samples.len() as u64, r),
    })
}

/// Checks `W_N = N^2 (sigma*sigma)(r) - sum_j E_j` exactly.
pub fn telescoping_identity_check(n: u64, samples: &[u64], r: u64, cap: u64) -> Result<bool> {
    Ok(telescoping(n, samples, r, cap)?.holds())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    pub n: u64,
    pub points: u64,
    pub trials: u64,
    pub seed: u64,
    /// Exponent used to pick the multiplicity cap.
    pub gamma: f64,
    pub x_points: usize,
}

impl TailConfig {
    pub fn new(n: u64, points: u64, trials: u64, seed: u64) -> Self {
        TailConfig { n, points, trials, seed, gamma: 0.6, x_points: 21 }
    }
}

/// Empirical tail of `max_r |P_N(r)/4 - E[P_N(r)/4]|` against the Azuma bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailExperiment {
    pub n: u64,
    #[serde(rename = "N")]
    pub points: u64,
    #[serde(rename = "M")]
    pub cap: u64,
    #[serde(rename = "A")]
    pub variance_proxy: f64,
    pub trials: u64,
    pub seed: u64,
    pub xs: Vec<f64>,
    pub empirical: Vec<f64>,
    pub bounds: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl TailExperiment {
    /// Build from raw per-trial statistics.
    pub fn from_samples(
        header: (u64, u64, u64, f64, u64),
        stats: &[f64],
        xs: Vec<f64>,
    ) -> Result<Self> {
        let (n, points, cap, variance, seed) = header;
        let trials = stats.len() as u64;
        let mut empirical = Vec::with_capacity(xs.len());
        let mut bounds = Vec::with_capacity(xs.len());
        let mut stderr = Vec::with_capacity(xs.len());
        for &x in &xs {
            let hits = stats.iter().filter(|&&s| s >= x).count();
            let b = azuma_bound(variance, x)?;
            empirical.push(hits as f64 / trials.max(1) as f64);
            stderr.push((b * (1.0 - b) / trials.max(1) as f64).sqrt());
            bounds.push(b);
        }
        Ok(TailExperiment { n, points, cap, variance_proxy: variance, trials, seed, xs, empirical, bounds, stderr })
    }

    /// `empirical <= bound + 3 stderr` at every x.
    pub fn dominated(&self) -> bool {
        self.empirical
            .iter()
            .zip(&self.bounds)
            .zip(&self.stderr)
            .all(|((e, b), s)| *e <= b + 3.0 * s)
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.xs.len()).map(|i| (self.xs[i], self.empirical[i], self.bounds[i], self.stderr[i]))
    }
}

fn x_grid(upper: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count).map(|i| upper * i as f64 / (count - 1) as f64).collect()
}

/// Simulates the sampling process and tabulates the tail of the largest
/// centered quarter pair count against `exp(-x^2/(2A))`, `A = 8 N^2 (M^2+1)/n`.
///
/// The x-grid runs from 0 to the smaller of `A / (2 max|Y_j|)` and 1.25 times
/// the largest observed statistic.
pub fn deviation_tail_experiment(cfg: &TailConfig) -> Result<TailExperiment> {
    let grid = GridSpec::new(cfg.n)?;
    let cap = choose_m(cfg.gamma, CAP_FAILURE_BUDGET)?;
    let variance = variance_proxy(cfg.n, cfg.points, cap);
    let expected: Vec<f64> = (0..cfg.n)
        .map(|r| expected_quarter_pair_count(cfg.n, cfg.points, r).to_f64().unwrap_or(f64::NAN))
        .collect();
    let mut stats = Vec::with_capacity(cfg.trials as usize);
    for trial in 0..cfg.trials {
        let mut stream = rng::sub_stream(cfg.seed, trial);
        let m = sample_points(grid, cfg.points, &mut stream)?;
        let worst = pair_counts(&m)
            .iter()
            .zip(&expected)
            .map(|(&p, e)| (p as f64 / 4.0 - e).abs())
            .fold(0.0, f64::max);
        stats.push(worst);
    }
    let regime = variance / (2.0 * increment_bound(cfg.n, cfg.points, cap));
    let observed = stats.iter().copied().fold(0.0, f64::max) * 1.25;
    let upper = if observed > 0.0 { regime.min(observed) } else { regime };
    TailExperiment::from_samples(
        (cfg.n, cfg.points, cap, variance, cfg.seed),
        &stats,
        x_grid(upper, cfg.x_points),
    )
}

/// Tail of `|W_N|` for a martingale with increments `c * s_j * h_j`, where
/// `s_j` is a fair sign and `h_j = 1` while `|W_{j-1}| < c sqrt(N)`, `1/2`
/// afterwards. Increments are bounded by `c`, so `A = N c^2`.
pub fn bounded_martingale_tails(steps: u64, step: f64, trials: u64, seed: u64, x_points: usize) -> Result<TailExperiment> {
    let threshold = step * (steps as f64).sqrt();
    let mut stats = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut stream = rng::sub_stream(seed, trial);
        let mut w = 0.0f64;
        for _ in 0..steps {
            let h = if w.abs() < threshold { 1.0 } else { 0.5 };
            let s = if stream.gen_bool(0.5) { 1.0 } else { -1.0 };
            w += step * s * h;
        }
        stats.push(w.abs());
    }
    let variance = steps as f64 * step * step;
    TailExperiment::from_samples(
        (0, steps, 0, variance, seed),
        &stats,
        x_grid(4.0 * variance.sqrt(), x_points),
    )
}
