//! Exact-arithmetic kernel for coordinatewise-ordered finite-dimensional
//! vector lattices.
//!
//! Elements are vectors of exact rationals ordered coordinatewise. Joins and
//! meets are coordinatewise max and min, the partial order `leq` holds iff
//! every coordinate is dominated, and the finite-suprema (resp. infima)
//! closure of a set collects every join (resp. meet) of a nonempty subset.

use std::collections::BTreeSet;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rationals, int, parse_rationals, Rational};

/// A vector in a coordinatewise-ordered rational lattice. Dimension is
/// always at least one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LatticeElement {
    coords: Vec<Rational>,
}

impl TryFrom<Vec<String>> for LatticeElement {
    type Error = Error;
    fn try_from(items: Vec<String>) -> Result<Self> {
        LatticeElement::new(parse_rationals(&items)?)
    }
}

impl From<LatticeElement> for Vec<String> {
    fn from(x: LatticeElement) -> Vec<String> {
        format_rationals(&x.coords)
    }
}

impl LatticeElement {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { coords })
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Self { coords: coords.iter().map(|&c| int(c)).collect() }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![Rational::zero(); dim])
    }

    /// Unit vector e_i (zero-based index).
    pub fn basis(index: usize, dim: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch { left: index, right: dim });
        }
        let mut coords = vec![Rational::zero(); dim];
        coords[index] = int(1);
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Rational {
        &self.coords[i]
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    /// Coordinatewise maximum: the least upper bound of the pair.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| if a >= b { a.clone() } else { b.clone() })
            .collect();
        Ok(Self { coords })
    }

    /// Coordinatewise minimum; agrees exactly with `-((-x) ∨ (-y))`.
    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| if a <= b { a.clone() } else { b.clone() })
            .collect();
        Ok(Self { coords })
    }

    /// Lattice partial order: true iff every coordinate of `self` is ≤ the
    /// corresponding coordinate of `other`.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b))
    }

    pub fn is_positive(&self) -> bool {
        self.coords.iter().all(|c| !c.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn negate(&self) -> Self {
        Self { coords: self.coords.iter().map(|c| -c).collect() }
    }

    pub fn abs(&self) -> Self {
        Self { coords: self.coords.iter().map(|c| c.abs()).collect() }
    }

    /// `|x|`, `x⁺ = x ∨ 0`, `x⁻ = (−x) ∨ 0`, all at once. Satisfies
    /// `x = x⁺ − x⁻` and `|x| = x⁺ + x⁻` exactly.
    pub fn abs_pos_neg(&self) -> (Self, Self, Self) {
        let zero = Rational::zero();
        let pos = Self {
            coords: self.coords.iter().map(|c| if c > &zero { c.clone() } else { zero.clone() }).collect(),
        };
        let neg = Self {
            coords: self.coords.iter().map(|c| if c < &zero { -c } else { zero.clone() }).collect(),
        };
        (self.abs(), pos, neg)
    }

    pub fn pos_part(&self) -> Self {
        self.abs_pos_neg().1
    }

    pub fn neg_part(&self) -> Self {
        self.abs_pos_neg().2
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect() })
    }

    pub fn scale(&self, t: &Rational) -> Self {
        Self { coords: self.coords.iter().map(|c| c * t).collect() }
    }

    /// Total lexicographic comparison used for canonical set membership.
    /// This is unrelated to the lattice order.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.coords.cmp(&other.coords)
    }
}

impl std::fmt::Display for LatticeElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", format_rationals(&self.coords).join(", "))
    }
}

/// A nonempty finite set of equal-dimension elements, deduplicated and kept
/// in lexicographic order so membership and equality are canonical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<String>>", into = "Vec<Vec<String>>")]
pub struct FiniteSet {
    elements: Vec<LatticeElement>,
}

impl TryFrom<Vec<Vec<String>>> for FiniteSet {
    type Error = Error;
    fn try_from(rows: Vec<Vec<String>>) -> Result<Self> {
        let elements = rows
            .into_iter()
            .map(LatticeElement::try_from)
            .collect::<Result<Vec<_>>>()?;
        FiniteSet::new(elements)
    }
}

impl From<FiniteSet> for Vec<Vec<String>> {
    fn from(set: FiniteSet) -> Vec<Vec<String>> {
        set.elements.into_iter().map(Vec::<String>::from).collect()
    }
}

/// Default cap on materialized closure elements.
pub const DEFAULT_CLOSURE_CAP: usize = 4096;

impl FiniteSet {
    pub fn new(elements: Vec<LatticeElement>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::EmptySet);
        };
        let dim = first.dim();
        for e in &elements {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: e.dim() });
            }
        }
        let mut elements = elements;
        elements.sort_by(|a, b| a.lex_cmp(b));
        elements.dedup();
        Ok(Self { elements })
    }

    pub fn singleton(x: LatticeElement) -> Self {
        Self { elements: vec![x] }
    }

    pub fn elements(&self) -> &[LatticeElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor rejects empty sets
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn contains(&self, x: &LatticeElement) -> bool {
        self.elements.binary_search_by(|e| e.lex_cmp(x)).is_ok()
    }

    pub fn is_subset_of(&self, other: &FiniteSet) -> bool {
        self.elements.iter().all(|e| other.contains(e))
    }

    pub fn negated(&self) -> FiniteSet {
        // negation reverses lexicographic order, so re-sort
        FiniteSet::new(self.elements.iter().map(LatticeElement::negate).collect())
            .expect("negation preserves nonemptiness")
    }

    /// All distinct finite joins of members: the set of coordinatewise maxima
    /// over nonempty subsets. Materializes at most `cap` distinct elements;
    /// beyond that the error carries the partial closure.
    pub fn sup_closure(&self, cap: usize) -> Result<FiniteSet> {
        self.closure_with(cap, |a, b| a.join(b).expect("dims equal inside a set"))
    }

    /// Dual of `sup_closure`: all distinct finite meets.
    pub fn inf_closure(&self, cap: usize) -> Result<FiniteSet> {
        self.closure_with(cap, |a, b| a.meet(b).expect("dims equal inside a set"))
    }

    /// Enumerates the subset-combination closure incrementally: after the
    /// k-th element, the accumulator holds op-combinations of every nonempty
    /// subset of the first k elements. Early deduplication keeps the work
    /// proportional to the number of distinct closure elements, which `cap`
    /// bounds.
    fn closure_with(
        &self,
        cap: usize,
        op: impl Fn(&LatticeElement, &LatticeElement) -> LatticeElement,
    ) -> Result<FiniteSet> {
        let mut acc: BTreeSet<Vec<Rational>> = BTreeSet::new();
        for a in &self.elements {
            let mut fresh: Vec<LatticeElement> = vec![a.clone()];
            for c in &acc {
                let combined = op(&LatticeElement { coords: c.clone() }, a);
                fresh.push(combined);
            }
            for f in fresh {
                acc.insert(f.coords);
                if acc.len() > cap {
                    let partial = FiniteSet {
                        elements: acc
                            .into_iter()
                            .map(|coords| LatticeElement { coords })
                            .collect(),
                    };
                    return Err(Error::ClosureTruncated { partial, cap });
                }
            }
        }
        Ok(FiniteSet {
            elements: acc.into_iter().map(|coords| LatticeElement { coords }).collect(),
        })
    }

    /// Coordinatewise maximum over the whole set.
    pub fn finite_sup(&self) -> LatticeElement {
        let mut acc = self.elements[0].clone();
        for e in &self.elements[1..] {
            acc = acc.join(e).expect("dims equal inside a set");
        }
        acc
    }

    /// Coordinatewise minimum over the whole set.
    pub fn finite_inf(&self) -> LatticeElement {
        let mut acc = self.elements[0].clone();
        for e in &self.elements[1..] {
            acc = acc.meet(e).expect("dims equal inside a set");
        }
        acc
    }

    /// True iff `x` lies in the solid hull of the set: some member `b`
    /// satisfies `|x| ≤ |b|` coordinatewise.
    pub fn solid_hull_contains(&self, x: &LatticeElement) -> Result<bool> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: x.dim() });
        }
        let ax = x.abs();
        for b in &self.elements {
            if ax.leq(&b.abs())? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// True iff every pair of members has an upper bound inside the set.
    pub fn is_upward_directed(&self) -> bool {
        for a in &self.elements {
            for b in &self.elements {
                let found = self.elements.iter().any(|c| {
                    a.leq(c).expect("dims equal") && b.leq(c).expect("dims equal")
                });
                if !found {
                    return false;
                }
            }
        }
        true
    }
}
