//! Randomized construction of symmetric measures with flat autoconvolution.
//!
//! A trial draws `N = floor(n^gamma)` residues uniformly from `{1, ..., n-1}`,
//! symmetrizes them, and accepts when both
//!
//! * `max_{k != 0} |(sigma*sigma)_k - 1/n| <= 2 eps phi(n) sqrt(ln n) / (N sqrt n)`, and
//! * every grid point carries fewer than `M` atoms, `M = choose_m(gamma, 1/4)`.
//!
//! The factor 2 in the flatness bound accounts for the uniform target being
//! `1/n` on this grid. The origin is excluded from the flatness check since
//! `(sigma*sigma)_0 >= 1/(2N)` for every symmetric measure; the deviation over
//! all residues is still reported as `full_deviation`. [`construct`] repeats trials on independent
//! sub-streams (see [`crate::rng`]) and returns the lowest-index success.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_measure::{
    autoconvolve, max_flatness_deviation, max_flatness_deviation_off_origin, GridSpec, SymmetricCounts,
};
use crate::rational::{self, Rational};
use crate::rng;

/// Failure probability budget of the multiplicity cap used by trials.
pub const CAP_FAILURE_BUDGET: f64 = 0.25;

/// Slowly divergent sequence scaling the flatness bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phi {
    #[default]
    Log,
    LogLog,
    SqrtLog,
}

impl Phi {
    pub fn eval(self, n: u64) -> f64 {
        let ln = (n as f64).ln();
        match self {
            Phi::Log => ln,
            Phi::LogLog => ln.ln(),
            Phi::SqrtLog => ln.sqrt(),
        }
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phi::Log => "log",
            Phi::LogLog => "loglog",
            Phi::SqrtLog => "sqrtlog",
        })
    }
}

impl FromStr for Phi {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(Phi::Log),
            "loglog" => Ok(Phi::LogLog),
            "sqrtlog" => Ok(Phi::SqrtLog),
            other => Err(Error::InvalidParams(format!(
                "unknown phi {other:?}; expected log, loglog or sqrtlog"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub gamma: f64,
    pub epsilon: f64,
    pub phi: Phi,
    pub seed: u64,
    pub max_attempts: u32,
}

impl ConstructionParams {
    pub fn new(gamma: f64, epsilon: f64, phi: Phi, seed: u64, max_attempts: u32) -> Result<Self> {
        let p = ConstructionParams { gamma, epsilon, phi, seed, max_attempts };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParams(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidParams("max_attempts must be at least 1".into()));
        }
        Ok(())
    }

    /// `N = floor(n^gamma)`.
    pub fn points_for(&self, n: u64) -> u64 {
        points_for(n, self.gamma)
    }
}

pub fn points_for(n: u64, gamma: f64) -> u64 {
    let approx = (n as f64).powf(gamma).floor() as u64;
    // Guard against powf landing just below an exact integer power.
    if ((approx + 1) as f64).ln() <= gamma * (n as f64).ln() + 1e-12 {
        approx + 1
    } else {
        approx
    }
}

/// Outcome of one construction trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub n: u64,
    #[serde(rename = "N")]
    pub points: u64,
    #[serde(rename = "M")]
    pub cap: u64,
    /// `max_{k != 0} |(sigma*sigma)_k - 1/n|`.
    #[serde(with = "rational::serde_str")]
    pub max_deviation: Rational,
    /// `max_k |(sigma*sigma)_k - 1/n|`, origin included.
    #[serde(with = "rational::serde_str")]
    pub full_deviation: Rational,
    pub flatness_bound: f64,
    pub multiplicity_max: u64,
    pub flat_ok: bool,
    pub mult_ok: bool,
    pub attempts_used: u32,
    pub seed: u64,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.flat_ok && self.mult_ok
    }
}

/// `2 eps phi(n) sqrt(ln n) / (N sqrt n)`.
pub fn flatness_bound(n: u64, points: u64, epsilon: f64, phi: Phi) -> f64 {
    let nf = n as f64;
    2.0 * epsilon * phi.eval(n) * nf.ln().sqrt() / (points as f64 * nf.sqrt())
}

/// Draws `points` residues uniformly from `{1, ..., n-1}` and symmetrizes.
pub fn sample_points<R: Rng + ?Sized>(grid: GridSpec, points: u64, stream: &mut R) -> Result<SymmetricCounts> {
    if points == 0 {
        return Err(Error::EmptyMeasure);
    }
    if points >= grid.n() {
        return Err(Error::TooManyPoints { points, n: grid.n() });
    }
    let draws: Vec<u64> = (0..points).map(|_| stream.gen_range(1..grid.n())).collect();
    SymmetricCounts::from_points(grid, &draws)
}

/// Log of `2 n^2 (2 n^(gamma-1) n/(n-1))^m / m!`, the union bound over all
/// residues of the probability that some residue collects `m` or more atoms.
pub fn log_cap_envelope(gamma: f64, m: u64, n: f64) -> f64 {
    let mean = 2.0 * n.powf(gamma - 1.0) * n / (n - 1.0);
    let log_fact: f64 = (2..=m).map(|k| (k as f64).ln()).sum();
    2f64.ln() + 2.0 * n.ln() + m as f64 * mean.ln() - log_fact
}

/// Smallest cap `M >= 2` such that, for every `n >= 3` and `N <= n^gamma`,
/// all residues carry fewer than `M` atoms with probability at least
/// `1 - epsilon / n`.
///
/// The envelope is decreasing in `n` on `[3, inf)` exactly when
/// `(gamma - 1) m + 2 < 0`, so for those `m` it suffices to check `n = 3`.
pub fn choose_m(gamma: f64, epsilon: f64) -> Result<u64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParams(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let log_eps = epsilon.ln();
    let mut m = 2u64;
    loop {
        if (gamma - 1.0) * m as f64 + 2.0 < 0.0 && log_cap_envelope(gamma, m, 3.0) <= log_eps {
            return Ok(m);
        }
        m += 1;
    }
}

pub fn multiplicity_max(m: &SymmetricCounts) -> u64 {
    m.counts().iter().copied().max().unwrap_or(0)
}

/// Evaluates both acceptance checks on a candidate measure.
pub fn check_trial(m: &SymmetricCounts, p: &ConstructionParams) -> Result<TrialReport> {
    let n = m.n();
    let points = m.pair_count();
    let cap = choose_m(p.gamma, CAP_FAILURE_BUDGET)?;
    let conv = autoconvolve(m);
    let max_deviation = max_flatness_deviation_off_origin(&conv);
    let full_deviation = max_flatness_deviation(&conv);
    let bound = flatness_bound(n, points, p.epsilon, p.phi);
    let mult = multiplicity_max(m);
    Ok(TrialReport {
        n,
        points,
        cap,
        flat_ok: rational::to_f64(&max_deviation) <= bound,
        max_deviation,
        full_deviation,
        flatness_bound: bound,
        multiplicity_max: mult,
        mult_ok: mult < cap,
        attempts_used: 1,
        seed: p.seed,
    })
}

/// Runs the trial with the given attempt index (0-based) on its own
/// sub-stream `derive_seed(seed, attempt)`.
pub fn run_trial(p: &ConstructionParams, n: u64, attempt: u32) -> Result<(SymmetricCounts, TrialReport)> {
    let grid = GridSpec::new(n)?;
    let points = p.points_for(n);
    let mut stream = rng::sub_stream(p.seed, attempt as u64);
    let m = sample_points(grid, points, &mut stream)?;
    let mut report = check_trial(&m, p)?;
    report.attempts_used = attempt + 1;
    Ok((m, report))
}

/// Rejection sampling: returns the first trial passing both checks.
///
/// On failure the error carries the trial with the smallest max deviation
/// (lowest index on ties), with `attempts_used` set to the number of trials
/// run.
pub fn construct(p: &ConstructionParams, n: u64) -> Result<(SymmetricCounts, TrialReport)> {
    p.validate()?;
    GridSpec::new(n)?;
    if p.points_for(n) == 0 {
        return Err(Error::InvalidParams(format!("floor(n^gamma) = 0 for n = {n}")));
    }
    let mut best: Option<TrialReport> = None;
    for attempt in 0..p.max_attempts {
        let (m, report) = run_trial(p, n, attempt)?;
        if report.passed() {
            return Ok((m, report));
        }
        if best.as_ref().is_none_or(|b| report.max_deviation < b.max_deviation) {
            best = Some(report);
        }
    }
    let mut best = best.expect("max_attempts >= 1");
    best.attempts_used = p.max_attempts;
    Err(Error::ExhaustedAttempts(Box::new(best)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(seed: u64, max_attempts: u32) -> ConstructionParams {
        ConstructionParams::new(0.6, 1.0, Phi::Log, seed, max_attempts).unwrap()
    }

    #[test]
    fn phi_parse_and_eval() {
        assert_eq!("log".parse::<Phi>().unwrap(), Phi::Log);
        assert_eq!("sqrtlog".parse::<Phi>().unwrap(), Phi::SqrtLog);
        assert!("exp".parse::<Phi>().is_err());
        let n = 1001;
        assert!((Phi::Log.eval(n) - 1001f64.ln()).abs() < 1e-15);
        assert!((Phi::LogLog.eval(n) - 1001f64.ln().ln()).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(ConstructionParams::new(1.0, 1.0, Phi::Log, 0, 1).is_err());
        assert!(ConstructionParams::new(0.5, 0.0, Phi::Log, 0, 1).is_err());
        assert!(ConstructionParams::new(0.5, 1.0, Phi::Log, 0, 0).is_err());
    }

    #[test]
    fn points_for_exact_powers() {
        assert_eq!(points_for(1001, 0.6), 63);
        assert_eq!(points_for(3001, 0.6), 121);
        assert_eq!(points_for(101, 0.6), 15);
        // 243^0.6 = 27 exactly.
        assert_eq!(points_for(243, 0.6), 27);
    }

    #[test]
    fn multiplicity_examples() {
        let g5 = GridSpec::new(5).unwrap();
        let g7 = GridSpec::new(7).unwrap();
        assert_eq!(multiplicity_max(&SymmetricCounts::from_points(g5, &[1]).unwrap()), 1);
        assert_eq!(multiplicity_max(&SymmetricCounts::from_points(g5, &[1, 1]).unwrap()), 2);
        assert_eq!(multiplicity_max(&SymmetricCounts::from_points(g7, &[2, 5]).unwrap()), 2);
    }

    #[test]
    fn sample_points_limits_and_determinism() {
        let g = GridSpec::new(5).unwrap();
        assert!(matches!(
            sample_points(g, 5, &mut rng::stream(1)),
            Err(Error::TooManyPoints { .. })
        ));
        assert!(matches!(sample_points(g, 0, &mut rng::stream(1)), Err(Error::EmptyMeasure)));
        let a = sample_points(g, 3, &mut rng::stream(9)).unwrap();
        let b = sample_points(g, 3, &mut rng::stream(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_point_on_five_is_one_of_two_pairs() {
        let g = GridSpec::new(5).unwrap();
        let mut first = 0;
        for seed in 0..2000 {
            let m = sample_points(g, 1, &mut rng::stream(seed)).unwrap();
            match m.counts() {
                [0, 1, 0, 0, 1] => first += 1,
                [0, 0, 1, 1, 0] => {}
                other => panic!("unexpected counts {other:?}"),
            }
        }
        // Binomial(2000, 1/2): 3 standard errors is about 67.
        assert!((first as i64 - 1000).abs() < 67, "first = {first}");
    }

    #[test]
    fn choose_m_reference_values() {
        // n = 3 envelope is 18 * 3^(0.6 m) / m!; m = 7 gives 0.36, m = 8 gives 0.087.
        assert_eq!(choose_m(0.6, 0.25).unwrap(), 8);
        assert!(choose_m(0.1, 0.25).unwrap() <= 8);
        assert!(choose_m(0.0, 0.25).is_err());
        assert!(choose_m(0.5, 1.0).is_err());
    }

    #[test]
    fn choose_m_satisfies_its_inequality() {
        for &gamma in &[0.1, 0.3, 0.5, 0.6, 0.75, 0.9] {
            for &eps in &[0.01, 0.1, 0.25, 0.5, 0.9] {
                let m = choose_m(gamma, eps).unwrap();
                assert!((gamma - 1.0) * m as f64 + 2.0 < 0.0);
                for n in [3.0, 5.0, 11.0, 101.0, 1e4, 1e8] {
                    assert!(log_cap_envelope(gamma, m, n) <= eps.ln() + 1e-12, "{gamma} {eps} {n}");
                }
                if m > 2 && (gamma - 1.0) * (m - 1) as f64 + 2.0 < 0.0 {
                    assert!(log_cap_envelope(gamma, m - 1, 3.0) > eps.ln());
                }
            }
        }
    }

    #[test]
    fn check_trial_small_case() {
        let g = GridSpec::new(5).unwrap();
        let m = SymmetricCounts::from_points(g, &[1]).unwrap();
        let r = check_trial(&m, &params(0, 1)).unwrap();
        assert_eq!(r.full_deviation, Rational::new(3, 10));
        assert_eq!(r.max_deviation, Rational::new(1, 5));
        assert_eq!(r.multiplicity_max, 1);
        assert!(r.mult_ok);
        let strict = ConstructionParams::new(0.6, 0.01, Phi::Log, 0, 1).unwrap();
        assert!(!check_trial(&m, &strict).unwrap().flat_ok);
    }

    #[test]
    fn construct_exhausts_on_tiny_grid() {
        let strict = ConstructionParams::new(0.6, 0.01, Phi::Log, 3, 5).unwrap();
        match construct(&strict, 5) {
            Err(Error::ExhaustedAttempts(best)) => {
                assert_eq!(best.attempts_used, 5);
                assert!(!best.flat_ok);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn construct_is_deterministic_and_accepts() {
        let p = params(11, 8);
        let (m1, r1) = construct(&p, 1001).unwrap();
        let (m2, r2) = construct(&p, 1001).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(r1, r2);
        assert!(r1.passed());
        assert!(r1.multiplicity_max < r1.cap);
        assert!(rational::to_f64(&r1.max_deviation) <= r1.flatness_bound);
        // Independent re-check.
        let again = check_trial(&m1, &p).unwrap();
        assert_eq!(again.max_deviation, r1.max_deviation);
    }

    #[test]
    fn report_json_fields() {
        let p = params(11, 8);
        let (_, r) = construct(&p, 101).unwrap_or_else(|e| match e {
            Error::ExhaustedAttempts(b) => (SymmetricCounts::from_points(GridSpec::new(101).unwrap(), &[1]).unwrap(), *b),
            e => panic!("{e}"),
        });
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["n", "N", "M", "max_deviation", "full_deviation", "flatness_bound", "multiplicity_max", "flat_ok", "mult_ok", "attempts_used", "seed"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["max_deviation"].as_str().unwrap().contains('/'));
        let back: TrialReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
