//! Exact rational helpers shared by the measure, density and metric code.

use num::{rational::Ratio, Integer, One, Signed, ToPrimitive};

/// Exact rational number used throughout the crate.
pub type Rational = Ratio<i128>;

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Formats as `"num/den"`, always with an explicit denominator.
pub fn format(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().ok()?;
            let d: i128 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<i128>().ok().map(Rational::from_integer),
    }
}

/// Fractional part in `[0, 1)`.
pub fn frac(q: &Rational) -> Rational {
    q - q.floor()
}

/// Distance on the circle of circumference 1.
pub fn circle_distance(x: &Rational, y: &Rational) -> Rational {
    let d = frac(&(x - y));
    let other = Rational::one() - d;
    if d < other {
        d
    } else {
        other
    }
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// Common-denominator form of a list of non-negative rationals.
pub(crate) fn common_denominator(values: &[Rational]) -> Option<(Vec<u64>, u64)> {
    let mut den: i128 = 1;
    for v in values {
        if v.is_negative() {
            return None;
        }
        den = den.lcm(v.denom());
    }
    let den_u = u64::try_from(den).ok()?;
    let mut nums = Vec::with_capacity(values.len());
    for v in values {
        let a = v.numer() * (den / v.denom());
        nums.push(u64::try_from(a).ok()?);
    }
    Some((nums, den_u))
}

/// Divides numerators and denominator by their common gcd.
pub(crate) fn canonicalize(nums: &mut [u64], den: &mut u64) {
    let g = nums.iter().fold(*den, |g, &a| g.gcd(&a));
    if g > 1 {
        nums.iter_mut().for_each(|a| *a /= g);
        *den /= g;
    }
}

/// Serde adapter writing a rational as a `"num/den"` string.
pub mod serde_str {
    use super::Rational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}
