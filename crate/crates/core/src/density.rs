//! Step densities built from grid measures and their autoconvolutions.
//!
//! With `K = n * 1_[-1/(2n), 1/(2n)]`, the step density `g = sigma * K` has
//! value `n c_k / (2N)` on the cell of width `1/n` centered at `k/n`. Its
//! autoconvolution is `sigma*sigma * (K*K)` where `K*K` is the unit-mass hat
//! of half-width `1/n`; translates of that hat by `k/n` form a partition of
//! unity, so `g*g` is the linear interpolation of `n (sigma*sigma)_k`.

use num::{Integer, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_measure::{GridSpec, SymmetricCounts};
use crate::rational::{self, Rational};

/// Non-negative rationals indexed by grid residue, over a canonical common
/// denominator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ValuesRepr", into = "ValuesRepr")]
struct GridValues {
    grid: GridSpec,
    numerators: Vec<u64>,
    denominator: u64,
}

#[derive(Serialize, Deserialize)]
struct ValuesRepr {
    n: u64,
    num: Vec<u64>,
    den: Vec<u64>,
}

impl GridValues {
    fn new(grid: GridSpec, mut numerators: Vec<u64>, mut denominator: u64) -> Self {
        debug_assert_eq!(numerators.len(), grid.len());
        rational::canonicalize(&mut numerators, &mut denominator);
        GridValues { grid, numerators, denominator }
    }

    fn from_rationals(grid: GridSpec, values: &[Rational]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Malformed("value vector length must equal n".into()));
        }
        let (nums, den) = rational::common_denominator(values)
            .ok_or_else(|| Error::Malformed("values must be non-negative and fit in 64 bits".into()))?;
        Ok(Self::new(grid, nums, den))
    }

    fn get(&self, k: usize) -> Rational {
        Rational::new(self.numerators[k] as i128, self.denominator as i128)
    }

    fn values(&self) -> Vec<Rational> {
        (0..self.numerators.len()).map(|k| self.get(k)).collect()
    }

    /// `(1/n) sum_k values_k`.
    fn mean(&self) -> Rational {
        let s: u128 = self.numerators.iter().map(|&a| a as u128).sum();
        Rational::new(s as i128, self.denominator as i128 * self.grid.n() as i128)
    }

    fn is_symmetric(&self) -> bool {
        (1..self.grid.n()).all(|k| self.numerators[k as usize] == self.numerators[self.grid.reflect(k) as usize])
    }
}

impl TryFrom<ValuesRepr> for GridValues {
    type Error = Error;
    fn try_from(r: ValuesRepr) -> Result<Self> {
        let grid = GridSpec::new(r.n)?;
        if r.num.len() != grid.len() || r.den.len() != grid.len() || r.den.contains(&0) {
            return Err(Error::Malformed("num/den must have length n and nonzero denominators".into()));
        }
        let values: Vec<Rational> =
            r.num.iter().zip(&r.den).map(|(&a, &d)| Rational::new(a as i128, d as i128)).collect();
        GridValues::from_rationals(grid, &values)
    }
}

impl From<GridValues> for ValuesRepr {
    fn from(v: GridValues) -> Self {
        let (num, den) = v.values().iter().map(|q| (*q.numer() as u64, *q.denom() as u64)).unzip();
        ValuesRepr { n: v.grid.n(), num, den }
    }
}

/// Piecewise-constant density, constant on each cell `[k/n - 1/(2n), k/n + 1/(2n))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepDensity(GridValues);

impl StepDensity {
    /// Validates symmetry and unit mass.
    pub fn from_cell_values(grid: GridSpec, values: &[Rational]) -> Result<Self> {
        let v = GridValues::from_rationals(grid, values)?;
        if !v.is_symmetric() {
            return Err(Error::Malformed("step density is not symmetric".into()));
        }
        if v.mean() != Rational::from_integer(1) {
            return Err(Error::Malformed("step density does not have unit mass".into()));
        }
        Ok(StepDensity(v))
    }

    pub fn grid(&self) -> GridSpec {
        self.0.grid
    }

    pub fn cell_value(&self, k: usize) -> Rational {
        self.0.get(k)
    }

    pub fn cell_values(&self) -> Vec<Rational> {
        self.0.values()
    }

    /// `integral g = (1/n) sum_k v_k`.
    pub fn integral(&self) -> Rational {
        self.0.mean()
    }

    pub fn sup(&self) -> Rational {
        let top = self.0.numerators.iter().copied().max().unwrap_or(0);
        Rational::new(top as i128, self.0.denominator as i128)
    }

    /// Value at a point of the circle; cells are half-open on the right.
    pub fn evaluate(&self, t: &Rational) -> Rational {
        let n = self.0.grid.n() as i128;
        let shifted = rational::frac(&(t + Rational::new(1, 2 * n)));
        let k = (shifted * n).floor().to_integer() as usize % n as usize;
        self.cell_value(k)
    }
}

/// Continuous periodic function, linear between consecutive nodes `k/n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PiecewiseLinearPeriodic(GridValues);

impl PiecewiseLinearPeriodic {
    pub fn from_node_values(grid: GridSpec, values: &[Rational]) -> Result<Self> {
        Ok(PiecewiseLinearPeriodic(GridValues::from_rationals(grid, values)?))
    }

    /// The constant function 1.
    pub fn one(grid: GridSpec) -> Self {
        PiecewiseLinearPeriodic(GridValues::new(grid, vec![1; grid.len()], 1))
    }

    pub fn grid(&self) -> GridSpec {
        self.0.grid
    }

    pub fn node_value(&self, k: usize) -> Rational {
        self.0.get(k)
    }

    pub fn node_values(&self) -> Vec<Rational> {
        self.0.values()
    }

    /// Exact integral: the trapezoid rule is exact for piecewise-linear functions.
    pub fn integral(&self) -> Rational {
        self.0.mean()
    }

    pub fn is_symmetric(&self) -> bool {
        self.0.is_symmetric()
    }

    pub fn evaluate(&self, t: &Rational) -> Rational {
        let n = self.0.grid.n() as i128;
        let s = rational::frac(t) * n;
        let k = s.floor();
        let lambda = &s - &k;
        let k = k.to_integer() as usize;
        let next = (k + 1) % n as usize;
        self.node_value(k) * (Rational::from_integer(1) - &lambda) + self.node_value(next) * lambda
    }

    /// Value at the refined node `j / (s n)`, where `s` divides the refined order.
    fn refined_node(&self, j: u64, s: u64) -> Rational {
        let n = self.0.grid.n() as usize;
        let k = (j / s) as usize;
        let rem = j % s;
        let a = self.0.numerators[k % n] as i128;
        let b = self.0.numerators[(k + 1) % n] as i128;
        let num = a * (s - rem) as i128 + b * rem as i128;
        Rational::new(num, self.0.denominator as i128 * s as i128)
    }
}

/// `v_k = n c_k / (2N)`.
pub fn build_step_density(m: &SymmetricCounts) -> StepDensity {
    let n = m.n();
    let nums = m.counts().iter().map(|&c| n * c).collect();
    StepDensity(GridValues::new(m.grid(), nums, 2 * m.pair_count()))
}

/// Exact `g*g` as a piecewise-linear periodic function.
///
/// Writing `v_k = a_k / D`, the node values are
/// `u_r = sum_{i+j = r} a_i a_j / (n D^2)`.
pub fn autoconvolve_density(g: &StepDensity) -> PiecewiseLinearPeriodic {
    let grid = g.grid();
    let n = grid.n();
    let vals = &g.0;
    let support: Vec<(u64, u128)> = vals
        .numerators
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(k, &a)| (k as u64, a as u128))
        .collect();
    let mut acc = vec![0u128; grid.len()];
    for &(i, a) in &support {
        for &(j, b) in &support {
            acc[((i + j) % n) as usize] += a * b;
        }
    }
    let den = vals.denominator as u128 * vals.denominator as u128 * n as u128;
    let nums = acc
        .into_iter()
        .map(|x| u64::try_from(x).expect("autoconvolution numerator exceeds 64 bits"))
        .collect();
    let den = u64::try_from(den).expect("autoconvolution denominator exceeds 64 bits");
    PiecewiseLinearPeriodic(GridValues::new(grid, nums, den))
}

/// `||f - 1||_inf`, attained at a node.
pub fn sup_deviation_from_one(f: &PiecewiseLinearPeriodic) -> Rational {
    let d = f.0.denominator as i128;
    let worst = f.0.numerators.iter().map(|&a| (a as i128 - d).abs()).max().unwrap_or(0);
    Rational::new(worst, d)
}

/// `||f1 - f2||_inf` over the circle.
///
/// The difference is linear between nodes of the common refinement of
/// order `lcm(n1, n2)`, so the sup is a max over those nodes.
pub fn sup_norm_difference(f1: &PiecewiseLinearPeriodic, f2: &PiecewiseLinearPeriodic) -> Rational {
    let n1 = f1.grid().n();
    let n2 = f2.grid().n();
    let order = n1.lcm(&n2);
    let (s1, s2) = (order / n1, order / n2);
    let mut best = Rational::zero();
    for j in 0..order {
        let diff = (f1.refined_node(j, s1) - f2.refined_node(j, s2)).abs();
        if diff > best {
            best = diff;
        }
    }
    best
}
