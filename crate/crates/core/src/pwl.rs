//! Continuous piecewise-linear functions on [0,1] with rational breakpoints
//! and values, closed under pointwise join, meet, and linear combinations.
//!
//! Every function is kept in a canonical form: breakpoint abscissae strictly
//! increase from 0 to 1 and no interior breakpoint is collinear with its
//! neighbours. Equality of canonical forms is therefore equality of
//! functions. Joins and meets insert exact crossing points, so the lattice
//! operations are closed and exact; no sampling is involved.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, int, parse_rational, rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, String)>", into = "Vec<(String, String)>")]
pub struct PwlFunc {
    /// Breakpoints (t, v), t strictly increasing, t0 = 0, t_last = 1,
    /// no interior collinear point.
    points: Vec<(Rational, Rational)>,
}

impl TryFrom<Vec<(String, String)>> for PwlFunc {
    type Error = Error;
    fn try_from(rows: Vec<(String, String)>) -> Result<Self> {
        let points = rows
            .into_iter()
            .map(|(t, v)| Ok((parse_rational(&t)?, parse_rational(&v)?)))
            .collect::<Result<Vec<_>>>()?;
        PwlFunc::new(points)
    }
}

impl From<PwlFunc> for Vec<(String, String)> {
    fn from(f: PwlFunc) -> Vec<(String, String)> {
        f.points
            .into_iter()
            .map(|(t, v)| (format_rational(&t), format_rational(&v)))
            .collect()
    }
}

impl PwlFunc {
    /// Builds a function from breakpoints and canonicalizes it. The
    /// abscissae must strictly increase from 0 to 1.
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidBreakpoints(format!(
                "need at least two breakpoints, got {}",
                points.len()
            )));
        }
        if !points[0].0.is_zero() {
            return Err(Error::InvalidBreakpoints(format!(
                "first abscissa must be 0, got {}",
                format_rational(&points[0].0)
            )));
        }
        if points[points.len() - 1].0 != int(1) {
            return Err(Error::InvalidBreakpoints(format!(
                "last abscissa must be 1, got {}",
                format_rational(&points[points.len() - 1].0)
            )));
        }
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidBreakpoints(format!(
                    "abscissae must strictly increase, found {} then {}",
                    format_rational(&w[0].0),
                    format_rational(&w[1].0)
                )));
            }
        }
        Ok(Self { points: canonicalize(points) })
    }

    /// Constant function c.
    pub fn constant(c: Rational) -> Self {
        Self { points: vec![(int(0), c.clone()), (int(1), c)] }
    }

    /// The affine function t ↦ a + (b − a) t.
    pub fn linear(a: Rational, b: Rational) -> Self {
        Self::new(vec![(int(0), a), (int(1), b)]).expect("two valid endpoints")
    }

    /// Tent of height 1 dropping to 0 at 1/k and staying there. For k = 1
    /// the descent occupies the whole interval.
    pub fn tent(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::FamilyPrecondition("tent index must be at least 1".into()));
        }
        if k == 1 {
            Self::new(vec![(int(0), int(1)), (int(1), int(0))])
        } else {
            Self::new(vec![
                (int(0), int(1)),
                (rat(1, k as i64), int(0)),
                (int(1), int(0)),
            ])
        }
    }

    /// Ramp rising from 0 to 1 on [0, 1/k], then flat at 1. For k = 1 the
    /// ascent occupies the whole interval.
    pub fn ramp(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::FamilyPrecondition("ramp index must be at least 1".into()));
        }
        if k == 1 {
            Self::new(vec![(int(0), int(0)), (int(1), int(1))])
        } else {
            Self::new(vec![
                (int(0), int(0)),
                (rat(1, k as i64), int(1)),
                (int(1), int(1)),
            ])
        }
    }

    /// Tent supported on [(i−1)/m, i/m] with peak 2m at the midpoint, so the
    /// integral of its absolute value is exactly 1. Indices run 1 ≤ i ≤ m.
    /// Distinct indices give functions with disjoint supports.
    pub fn unit_l1_bump(i: u32, m: u32) -> Result<Self> {
        if m == 0 || i == 0 || i > m {
            return Err(Error::FamilyPrecondition(format!(
                "bump index must satisfy 1 <= i <= m, got i={i}, m={m}"
            )));
        }
        let left = rat((i - 1) as i64, m as i64);
        let mid = rat(2 * i as i64 - 1, 2 * m as i64);
        let right = rat(i as i64, m as i64);
        let peak = int(2 * m as i64);
        let mut pts = Vec::new();
        if !left.is_zero() {
            pts.push((int(0), int(0)));
        }
        pts.push((left, int(0)));
        pts.push((mid, peak));
        pts.push((right.clone(), int(0)));
        if right != int(1) {
            pts.push((int(1), int(0)));
        }
        Self::new(pts)
    }

    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    /// Exact evaluation. Errors outside [0,1].
    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        if t.is_negative() || t > &int(1) {
            return Err(Error::OutOfDomain(format!(
                "argument {} lies outside [0,1]",
                format_rational(t)
            )));
        }
        // find the segment whose left endpoint is the last abscissa <= t
        let idx = match self.points.binary_search_by(|(ti, _)| ti.cmp(t)) {
            Ok(i) => return Ok(self.points[i].1.clone()),
            Err(i) => i - 1, // i >= 1 since t >= 0 = t_0
        };
        let (t0, v0) = &self.points[idx];
        let (t1, v1) = &self.points[idx + 1];
        Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }

    pub fn negate(&self) -> Self {
        Self { points: self.points.iter().map(|(t, v)| (t.clone(), -v)).collect() }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let points = self.points.iter().map(|(t, v)| (t.clone(), v * c)).collect();
        Self { points: canonicalize(points) }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    /// Pointwise maximum, with exact crossings inserted so the result is
    /// again piecewise linear.
    pub fn join(&self, other: &Self) -> Self {
        let grid = self.crossing_grid(other);
        let points = grid
            .into_iter()
            .map(|t| {
                let a = self.eval(&t).expect("grid point in domain");
                let b = other.eval(&t).expect("grid point in domain");
                (t, if a >= b { a } else { b })
            })
            .collect();
        Self { points: canonicalize(points) }
    }

    /// Pointwise minimum; dual of `join`.
    pub fn meet(&self, other: &Self) -> Self {
        self.negate().join(&other.negate()).negate()
    }

    pub fn abs(&self) -> Self {
        self.join(&self.negate())
    }

    pub fn pos_part(&self) -> Self {
        self.join(&Self::constant(int(0)))
    }

    pub fn neg_part(&self) -> Self {
        self.negate().join(&Self::constant(int(0)))
    }

    /// Pointwise order: f ≤ g everywhere on [0,1].
    pub fn leq(&self, other: &Self) -> bool {
        &self.join(other) == other
    }

    pub fn is_positive(&self) -> bool {
        self.points.iter().all(|(_, v)| !v.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        self.points.iter().all(|(_, v)| v.is_zero())
    }

    /// Uniform norm: max of |f| over [0,1]. Affine pieces attain extrema at
    /// breakpoints, so this is a finite exact maximum.
    pub fn sup_norm(&self) -> Rational {
        self.points.iter().map(|(_, v)| v.abs()).max().expect("nonempty")
    }

    /// Integral of |f| over [0,1], exact. Segments where the endpoint values
    /// have opposite strict signs are split at the zero crossing.
    pub fn l1_norm(&self) -> Rational {
        let two = int(2);
        let mut total = Rational::zero();
        for w in self.points.windows(2) {
            let (t0, v0) = &w[0];
            let (t1, v1) = &w[1];
            let dt = t1 - t0;
            if v0.is_negative() != v1.is_negative() && !v0.is_zero() && !v1.is_zero() {
                // |v| forms two triangles around the interior zero of the segment
                let split = v0.abs() / (v0.abs() + v1.abs()) * &dt;
                total += (v0.abs() * &split + v1.abs() * (&dt - &split)) / &two;
            } else {
                total += (v0.abs() + v1.abs()) * &dt / &two;
            }
        }
        total
    }

    /// Largest absolute slope over all segments. Witnesses unbounded-steepness
    /// behaviour in families whose norms stay bounded.
    pub fn max_abs_slope(&self) -> Rational {
        self.points
            .windows(2)
            .map(|w| ((&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Minimum value over the grid {j/den : 0 ≤ j ≤ den} together with the
    /// minimizing abscissa. Exact at each grid point.
    pub fn min_on_grid(&self, den: u32) -> Result<(Rational, Rational)> {
        if den == 0 {
            return Err(Error::FamilyPrecondition("grid denominator must be positive".into()));
        }
        let mut best: Option<(Rational, Rational)> = None;
        for j in 0..=den {
            let t = rat(j as i64, den as i64);
            let v = self.eval(&t)?;
            best = match best {
                None => Some((t, v)),
                Some((bt, bv)) => {
                    if v < bv {
                        Some((t, v))
                    } else {
                        Some((bt, bv))
                    }
                }
            };
        }
        Ok(best.expect("grid nonempty"))
    }

    fn combine(&self, other: &Self, op: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        let grid = merged_grid(&self.points, &other.points);
        let points = grid
            .into_iter()
            .map(|t| {
                let a = self.eval(&t).expect("grid point in domain");
                let b = other.eval(&t).expect("grid point in domain");
                (t, op(&a, &b))
            })
            .collect();
        Self { points: canonicalize(points) }
    }

    /// Union of both breakpoint grids plus the exact abscissae where f − g
    /// changes sign strictly inside a segment.
    fn crossing_grid(&self, other: &Self) -> Vec<Rational> {
        let base = merged_grid(&self.points, &other.points);
        let diff: Vec<Rational> = base
            .iter()
            .map(|t| self.eval(t).expect("in domain") - other.eval(t).expect("in domain"))
            .collect();
        let mut grid = Vec::with_capacity(base.len());
        for i in 0..base.len() {
            grid.push(base[i].clone());
            if i + 1 < base.len() {
                let (d0, d1) = (&diff[i], &diff[i + 1]);
                if d0.is_negative() != d1.is_negative() && !d0.is_zero() && !d1.is_zero() {
                    // d is affine on the segment, so the crossing is exact
                    let dt = &base[i + 1] - &base[i];
                    let t_star = &base[i] + d0 / (d0 - d1) * dt;
                    grid.push(t_star);
                }
            }
        }
        grid
    }
}

impl std::fmt::Display for PwlFunc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|(t, v)| format!("({}, {})", format_rational(t), format_rational(v)))
            .collect();
        write!(f, "pwl[{}]", pts.join(" "))
    }
}

/// Sorted union of the abscissae of two breakpoint lists.
fn merged_grid(
    a: &[(Rational, Rational)],
    b: &[(Rational, Rational)],
) -> Vec<Rational> {
    let mut grid: Vec<Rational> =
        a.iter().map(|(t, _)| t.clone()).chain(b.iter().map(|(t, _)| t.clone())).collect();
    grid.sort();
    grid.dedup();
    grid
}

/// Removes interior breakpoints that are collinear with their neighbours.
/// Comparison is by cross-multiplied slopes, so it is exact.
fn canonicalize(points: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(points.len());
    for p in points {
        while out.len() >= 2 {
            let (t0, v0) = &out[out.len() - 2];
            let (t1, v1) = &out[out.len() - 1];
            let lhs = (v1 - v0) * (&p.0 - t1);
            let rhs = (&p.1 - v1) * (t1 - t0);
            if lhs == rhs {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    out
}
