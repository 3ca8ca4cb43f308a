//! Distances between finite-stage symmetric sets, measures and densities,
//! covering sums, and a single-scale dimension proxy.

use std::collections::BTreeSet;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::density::{autoconvolve_density, build_step_density, sup_norm_difference};
use crate::error::{Error, Result};
use crate::grid_measure::{common_order, fourier_coefficient, SymmetricCounts};
use crate::rational::{self, circle_distance, Rational};

/// Nonempty finite subset of the circle closed under `x -> -x`, stored as
/// sorted distinct representatives in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSymmetricSet {
    points: Vec<Rational>,
}

impl FiniteSymmetricSet {
    pub fn new(points: impl IntoIterator<Item = Rational>) -> Result<Self> {
        let mut pts: Vec<Rational> = points.into_iter().map(|p| rational::frac(&p)).collect();
        if pts.is_empty() {
            return Err(Error::EmptySet);
        }
        pts.sort();
        pts.dedup();
        for p in &pts {
            let mirror = rational::frac(&-p);
            if pts.binary_search(&mirror).is_err() {
                return Err(Error::NotSymmetric(rational::format(p)));
            }
        }
        Ok(FiniteSymmetricSet { points: pts })
    }

    /// Support of a grid measure.
    pub fn from_measure(m: &SymmetricCounts) -> Self {
        let grid = m.grid();
        FiniteSymmetricSet { points: m.support().map(|k| grid.position(k)).collect() }
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn negate(&self) -> Self {
        let mut pts: Vec<Rational> = self.points.iter().map(|p| rational::frac(&-p)).collect();
        pts.sort();
        FiniteSymmetricSet { points: pts }
    }

    /// Circle distance from `x` to the nearest point of the set.
    pub fn distance_to(&self, x: &Rational) -> Rational {
        let len = self.points.len();
        let idx = self.points.partition_point(|p| p < x);
        let after = &self.points[idx % len];
        let before = &self.points[(idx + len - 1) % len];
        let a = circle_distance(x, after);
        let b = circle_distance(x, before);
        if a < b {
            a
        } else {
            b
        }
    }
}

/// `sup_{e in from} d(e, to)`.
pub fn directed_distance(from: &FiniteSymmetricSet, to: &FiniteSymmetricSet) -> Rational {
    from.points
        .iter()
        .map(|e| to.distance_to(e))
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Hausdorff distance in sum form: `sup_e d(e, F) + sup_f d(E, f)`.
///
/// This is bi-Lipschitz equivalent to the usual max form (within a factor 2).
pub fn hausdorff_distance(e: &FiniteSymmetricSet, f: &FiniteSymmetricSet) -> Rational {
    directed_distance(e, f) + directed_distance(f, e)
}

/// `sup_{r in Z} |m1^(r) - m2^(r)|`, computed over one common period.
pub fn fourier_sup_distance(m1: &SymmetricCounts, m2: &SymmetricCounts) -> f64 {
    let period = common_order(m1.grid(), m2.grid()) as i64;
    (0..period)
        .map(|r| (fourier_coefficient(m1, r) - fourier_coefficient(m2, r)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDistance {
    #[serde(with = "rational::serde_str")]
    pub hausdorff: Rational,
    pub fourier_sup: f64,
    pub total: f64,
}

/// Hausdorff distance between supports plus the sup distance between
/// Fourier coefficients.
pub fn measure_distance(m1: &SymmetricCounts, m2: &SymmetricCounts) -> MeasureDistance {
    let hausdorff = hausdorff_distance(&FiniteSymmetricSet::from_measure(m1), &FiniteSymmetricSet::from_measure(m2));
    let fourier_sup = fourier_sup_distance(m1, m2);
    MeasureDistance { total: rational::to_f64(&hausdorff) + fourier_sup, hausdorff, fourier_sup }
}

/// Breakdown of the density metric into its three terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityDistance {
    #[serde(with = "rational::serde_str")]
    pub hausdorff: Rational,
    pub fourier_sup: f64,
    #[serde(with = "rational::serde_str")]
    pub density_sup: Rational,
    pub measure_distance: f64,
    pub total: f64,
}

/// Measure distance plus `||f1 - f2||_inf` for the autoconvolution densities
/// of the two step densities.
pub fn density_distance(m1: &SymmetricCounts, m2: &SymmetricCounts) -> DensityDistance {
    let md = measure_distance(m1, m2);
    let f1 = autoconvolve_density(&build_step_density(m1));
    let f2 = autoconvolve_density(&build_step_density(m2));
    let density_sup = sup_norm_difference(&f1, &f2);
    DensityDistance {
        total: md.total + rational::to_f64(&density_sup),
        hausdorff: md.hausdorff,
        fourier_sup: md.fourier_sup,
        density_sup,
        measure_distance: md.total,
    }
}

/// Closed arc `[center - width/2, center + width/2]` on the circle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    #[serde(with = "rational::serde_str")]
    pub center: Rational,
    #[serde(with = "rational::serde_str")]
    pub width: Rational,
}

impl Arc {
    pub fn contains(&self, x: &Rational) -> bool {
        self.width >= Rational::one() || circle_distance(x, &self.center) * 2 <= self.width
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCover {
    pub arcs: Vec<Arc>,
}

impl IntervalCover {
    pub fn contains(&self, x: &Rational) -> bool {
        self.arcs.iter().any(|a| a.contains(x))
    }

    pub fn covers(&self, e: &FiniteSymmetricSet) -> bool {
        e.points().iter().all(|p| self.contains(p))
    }

    /// Every arc has its mirror image in the cover.
    pub fn is_symmetric(&self) -> bool {
        let set: BTreeSet<(Rational, Rational)> =
            self.arcs.iter().map(|a| (rational::frac(&a.center), a.width)).collect();
        self.arcs
            .iter()
            .all(|a| set.contains(&(rational::frac(&-&a.center), a.width)))
    }

    /// `sum_I |I|^beta`.
    pub fn power_sum(&self, beta: f64) -> f64 {
        self.arcs.iter().map(|a| rational::to_f64(&a.width).powf(beta)).sum()
    }
}

/// Merges closed arcs of the given width centered at each point of `e`.
pub fn build_cover(e: &FiniteSymmetricSet, width: &Rational) -> IntervalCover {
    let half = width / Rational::from_integer(2);
    let one = Rational::one();
    // Points are sorted, so starts are sorted.
    let mut merged: Vec<(Rational, Rational)> = Vec::new();
    for p in e.points() {
        let (s, t) = (p - &half, p + &half);
        match merged.last_mut() {
            Some(last) if s <= last.1 => {
                if t > last.1 {
                    last.1 = t;
                }
            }
            _ => merged.push((s, t)),
        }
    }
    if merged.len() > 1 {
        let first = merged[0].clone();
        let last = merged.last_mut().unwrap();
        if &first.0 + &one <= last.1 {
            last.1 = std::cmp::max(last.1.clone(), first.1 + &one);
            merged.remove(0);
        }
    }
    let arcs = if merged.iter().any(|(s, t)| t - s >= one) {
        vec![Arc { center: Rational::zero(), width: one }]
    } else {
        merged
            .into_iter()
            .map(|(s, t)| Arc {
                center: rational::frac(&((&s + &t) / Rational::from_integer(2))),
                width: t - s,
            })
            .collect()
    };
    IntervalCover { arcs }
}

/// Builds the symmetric cover with one arc of `width` per point (merged
/// where arcs overlap) and tests `sum |I|^(alpha + 1/m) < 1/m`.
pub fn covering_check(
    e: &FiniteSymmetricSet,
    alpha: f64,
    m_index: u32,
    width: &Rational,
) -> Result<(IntervalCover, bool)> {
    if !(*width > Rational::zero() && *width < Rational::one()) {
        return Err(Error::InvalidParams(format!("cover width must lie in (0, 1), got {width}")));
    }
    if !(0.5..1.0).contains(&alpha) {
        return Err(Error::InvalidParams(format!("alpha must lie in [1/2, 1), got {alpha}")));
    }
    if m_index == 0 {
        return Err(Error::InvalidParams("m_index must be at least 1".into()));
    }
    let cover = build_cover(e, width);
    let beta = alpha + 1.0 / m_index as f64;
    let ok = cover.power_sum(beta) < 1.0 / m_index as f64;
    Ok((cover, ok))
}

/// `log(#occupied cells of width 1/n) / log(n)`, cells `[k/n, (k+1)/n)`.
///
/// A single-scale proxy: only meaningful at the scale the set was built on.
pub fn box_dimension_estimate(e: &FiniteSymmetricSet, n: u64) -> f64 {
    let scale = Rational::from_integer(n as i128);
    let cells: BTreeSet<i128> = e.points().iter().map(|p| (p * &scale).floor().to_integer()).collect();
    (cells.len() as f64).ln() / (n as f64).ln()
}
