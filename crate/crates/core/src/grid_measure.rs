//! Symmetric atomic probability measures on the grid `{k/n}` of the circle.
//!
//! A measure is stored as integer atom counts `c_k` with `c_k = c_{n-k}`,
//! `c_0 = 0` and `sum c_k = 2N`; the mass at `k/n` is `c_k / (2N)`. Its
//! autoconvolution is again a grid measure with weights
//! `sum_{i+j = k mod n} c_i c_j / (4N^2)`.

use std::f64::consts::TAU;

use num::Integer;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Order of the grid `{0, 1/n, ..., (n-1)/n}`. Always odd and at least 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct GridSpec {
    n: u64,
}

impl GridSpec {
    pub fn new(n: u64) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(GridSpec { n })
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n as usize
    }

    /// Residue of `-k`.
    #[inline]
    pub fn reflect(&self, k: u64) -> u64 {
        (self.n - k % self.n) % self.n
    }

    pub fn position(&self, k: u64) -> Rational {
        Rational::new(k as i128, self.n as i128)
    }
}

impl TryFrom<u64> for GridSpec {
    type Error = Error;
    fn try_from(n: u64) -> Result<Self> {
        GridSpec::new(n)
    }
}

impl From<GridSpec> for u64 {
    fn from(g: GridSpec) -> u64 {
        g.n
    }
}

/// Symmetric atom counts on a grid; the canonical form of
/// `sigma = (1/2N) sum_j (delta_{x_j} + delta_{-x_j})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CountsRepr", into = "CountsRepr")]
pub struct SymmetricCounts {
    grid: GridSpec,
    counts: Vec<u64>,
    pairs: u64,
}

#[derive(Serialize, Deserialize)]
struct CountsRepr {
    n: u64,
    #[serde(rename = "N")]
    pairs: u64,
    counts: Vec<u64>,
}

impl TryFrom<CountsRepr> for SymmetricCounts {
    type Error = Error;
    fn try_from(r: CountsRepr) -> Result<Self> {
        let m = SymmetricCounts::from_counts(GridSpec::new(r.n)?, r.counts)?;
        if m.pairs != r.pairs {
            return Err(Error::Malformed(format!(
                "N = {} but counts sum to {}",
                r.pairs,
                2 * m.pairs
            )));
        }
        Ok(m)
    }
}

impl From<SymmetricCounts> for CountsRepr {
    fn from(m: SymmetricCounts) -> Self {
        CountsRepr { n: m.grid.n, pairs: m.pairs, counts: m.counts }
    }
}

impl SymmetricCounts {
    /// Tallies each residue together with its reflection `n - k`.
    pub fn from_points(grid: GridSpec, points: &[u64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let mut counts = vec![0u64; grid.len()];
        for &p in points {
            if p == 0 || p >= grid.n {
                return Err(Error::InvalidAtom { residue: p, n: grid.n });
            }
            counts[p as usize] += 1;
            counts[grid.reflect(p) as usize] += 1;
        }
        Ok(SymmetricCounts { grid, counts, pairs: points.len() as u64 })
    }

    /// Validates a raw count vector.
    pub fn from_counts(grid: GridSpec, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != grid.len() {
            return Err(Error::Malformed(format!(
                "expected {} counts, got {}",
                grid.n,
                counts.len()
            )));
        }
        if counts[0] != 0 {
            return Err(Error::InvalidAtom { residue: 0, n: grid.n });
        }
        for k in 1..grid.n {
            if counts[k as usize] != counts[grid.reflect(k) as usize] {
                return Err(Error::Malformed(format!("counts not symmetric at residue {k}")));
            }
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyMeasure);
        }
        // n odd and c_0 = 0, so the total is automatically even.
        Ok(SymmetricCounts { grid, counts, pairs: total / 2 })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn n(&self) -> u64 {
        self.grid.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of sampled points `N`; the counts sum to `2N`.
    pub fn pair_count(&self) -> u64 {
        self.pairs
    }

    /// Residues carrying at least one atom, ascending.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, _)| k as u64)
    }

    pub fn mass(&self, k: u64) -> Rational {
        Rational::new(self.counts[(k % self.grid.n) as usize] as i128, 2 * self.pairs as i128)
    }
}

/// Exact rational weights on a grid, stored over a common denominator.
///
/// The representation is canonical: `gcd(denominator, numerators...) = 1`,
/// so equal vectors compare equal field by field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AtomRepr", into = "AtomRepr")]
pub struct AtomVector {
    grid: GridSpec,
    numerators: Vec<u64>,
    denominator: u64,
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    n: u64,
    num: Vec<u64>,
    den: Vec<u64>,
}

impl TryFrom<AtomRepr> for AtomVector {
    type Error = Error;
    fn try_from(r: AtomRepr) -> Result<Self> {
        let grid = GridSpec::new(r.n)?;
        if r.num.len() != grid.len() || r.den.len() != grid.len() {
            return Err(Error::Malformed("num/den length must equal n".into()));
        }
        let mut weights = Vec::with_capacity(grid.len());
        for (&a, &d) in r.num.iter().zip(&r.den) {
            if d == 0 {
                return Err(Error::Malformed("zero denominator".into()));
            }
            weights.push(Rational::new(a as i128, d as i128));
        }
        AtomVector::from_weights(grid, &weights)
    }
}

impl From<AtomVector> for AtomRepr {
    fn from(v: AtomVector) -> Self {
        let (num, den) = v
            .weights()
            .iter()
            .map(|w| (*w.numer() as u64, *w.denom() as u64))
            .unzip();
        AtomRepr { n: v.grid.n, num, den }
    }
}

impl AtomVector {
    /// Builds from explicit weights; they must be non-negative and sum to 1.
    pub fn from_weights(grid: GridSpec, weights: &[Rational]) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::Malformed("weight vector length must equal n".into()));
        }
        let (numerators, denominator) = rational::common_denominator(weights)
            .ok_or_else(|| Error::Malformed("weights must be non-negative and fit in 64 bits".into()))?;
        Self::from_parts(grid, numerators, denominator)
    }

    pub(crate) fn from_parts(grid: GridSpec, mut numerators: Vec<u64>, mut denominator: u64) -> Result<Self> {
        let total: u128 = numerators.iter().map(|&a| a as u128).sum();
        if total != denominator as u128 {
            return Err(Error::Malformed("weights do not sum to 1".into()));
        }
        rational::canonicalize(&mut numerators, &mut denominator);
        Ok(AtomVector { grid, numerators, denominator })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn weight(&self, k: usize) -> Rational {
        Rational::new(self.numerators[k] as i128, self.denominator as i128)
    }

    pub fn weights(&self) -> Vec<Rational> {
        (0..self.numerators.len()).map(|k| self.weight(k)).collect()
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn total(&self) -> Rational {
        let s: u128 = self.numerators.iter().map(|&a| a as u128).sum();
        Rational::new(s as i128, self.denominator as i128)
    }
}

/// Ordered pair counts `P_k = #{(a, b) : a + b = k mod n}` over the `2N`
/// atoms, computed by a double loop over the support.
pub(crate) fn pair_counts(m: &SymmetricCounts) -> Vec<u64> {
    let n = m.grid.n;
    let mut out = vec![0u64; m.grid.len()];
    let support: Vec<(u64, u64)> = m.support().map(|k| (k, m.counts[k as usize])).collect();
    for &(i, ci) in &support {
        for &(j, cj) in &support {
            let k = (i + j) % n;
            out[k as usize] += ci * cj;
        }
    }
    out
}

/// Exact autoconvolution `sigma * sigma`.
pub fn autoconvolve(m: &SymmetricCounts) -> AtomVector {
    let p = m.pairs;
    AtomVector::from_parts(m.grid, pair_counts(m), 4 * p * p)
        .expect("pair counts always sum to (2N)^2")
}

/// Autoconvolution through a floating-point cyclic FFT of length `n`, rounded
/// back to integer pair counts.
pub fn autoconvolve_fast(m: &SymmetricCounts) -> Result<AtomVector> {
    let n = m.grid.len();
    let mut buf: Vec<Complex<f64>> =
        m.counts.iter().map(|&c| Complex::new(c as f64, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    buf.iter_mut().for_each(|z| *z = *z * *z);
    planner.plan_fft_inverse(n).process(&mut buf);

    let scale = 1.0 / n as f64;
    let mut pairs = Vec::with_capacity(n);
    for (index, z) in buf.iter().enumerate() {
        let value = z.re * scale;
        let rounded = value.round();
        if (value - rounded).abs() > 0.01 || rounded < 0.0 {
            return Err(Error::RoundingUnsafe { index, value });
        }
        pairs.push(rounded as u64);
    }
    let p = m.pairs;
    AtomVector::from_parts(m.grid, pairs, 4 * p * p).map_err(|_| Error::RoundingUnsafe {
        index: 0,
        value: f64::NAN,
    })
}

/// `sigma^(r) = (1/2N) sum_k c_k cos(2 pi k r / n)`; real by symmetry and
/// `n`-periodic in `r`.
pub fn fourier_coefficient(m: &SymmetricCounts, r: i64) -> f64 {
    let n = m.grid.n;
    let r = r.rem_euclid(n as i64) as u64;
    let sum: f64 = m
        .support()
        .map(|k| {
            let j = ((k as u128 * r as u128) % n as u128) as u64;
            let phase = j.min(n - j) as f64 / n as f64;
            m.counts[k as usize] as f64 * (TAU * phase).cos()
        })
        .sum();
    sum / (2 * m.pairs) as f64
}

/// `max_k |w_k - 1/n|`, exact.
pub fn max_flatness_deviation(v: &AtomVector) -> Rational {
    let n = v.grid.n as i128;
    let d = v.denominator as i128;
    let worst = v
        .numerators
        .iter()
        .map(|&a| (a as i128 * n - d).abs())
        .max()
        .unwrap_or(0);
    Rational::new(worst, d * n)
}

/// `max_{k != 0} |w_k - 1/n|`, exact.
///
/// A symmetric measure always has `(sigma*sigma)_0 >= 1/(2N)` because every
/// atom pairs with its own mirror, so flatness can only be asked of the
/// nonzero residues.
pub fn max_flatness_deviation_off_origin(v: &AtomVector) -> Rational {
    let n = v.grid.n as i128;
    let d = v.denominator as i128;
    let worst = v.numerators[1..]
        .iter()
        .map(|&a| (a as i128 * n - d).abs())
        .max()
        .unwrap_or(0);
    Rational::new(worst, d * n)
}

/// Least common multiple of two grid orders.
pub fn common_order(a: GridSpec, b: GridSpec) -> u64 {
    a.n.lcm(&b.n)
}
