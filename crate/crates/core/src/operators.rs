//! Order-bounded operators between finite-dimensional coordinate lattices:
//! matrices over the rationals with tagged domain and range, rank-one
//! operators f ⊗ y, the modulus in closed form and as a sign-pattern oracle,
//! domination, induced operator norms, basis projections, and boundedness
//! of images of neighborhoods.
//!
//! The keystone identity of this module: the entrywise absolute value of a
//! matrix, applied to any positive vector, equals the supremum of |T u| over
//! the order interval |u| ≤ x. The oracle enumerates the 2^n extreme sign
//! patterns and must agree with the closed form on every input.

use std::rc::Rc;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeElement;
use crate::rational::{abs, format_rational, int, max as rat_max, parse_rational, Rational};
use crate::spaces::{NeighborhoodSpec, SpaceTag};

/// Largest oracle dimension: 2^n sign patterns are enumerated.
pub const MODULUS_ORACLE_MAX_DIM: usize = 20;

/// A linear operator given by its matrix, with named domain and range.
/// Rows index the range, columns the domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixOpRepr", into = "MatrixOpRepr")]
pub struct MatrixOp {
    entries: Vec<Vec<Rational>>,
    domain: SpaceTag,
    range: SpaceTag,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixOpRepr {
    entries: Vec<Vec<String>>,
    domain: SpaceTag,
    range: SpaceTag,
}

impl TryFrom<MatrixOpRepr> for MatrixOp {
    type Error = Error;
    fn try_from(repr: MatrixOpRepr) -> Result<Self> {
        let entries = repr
            .entries
            .into_iter()
            .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        MatrixOp::new(entries, repr.domain, repr.range)
    }
}

impl From<MatrixOp> for MatrixOpRepr {
    fn from(op: MatrixOp) -> MatrixOpRepr {
        MatrixOpRepr {
            entries: op
                .entries
                .iter()
                .map(|row| row.iter().map(format_rational).collect())
                .collect(),
            domain: op.domain,
            range: op.range,
        }
    }
}

impl MatrixOp {
    pub fn new(entries: Vec<Vec<Rational>>, domain: SpaceTag, range: SpaceTag) -> Result<Self> {
        domain.validate()?;
        range.validate()?;
        let Some(cols) = domain.flat_dim() else {
            return Err(Error::InvalidTag(format!(
                "matrix domain must flatten to coordinates, got {}",
                domain.describe()
            )));
        };
        let Some(rows) = range.flat_dim() else {
            return Err(Error::InvalidTag(format!(
                "matrix range must flatten to coordinates, got {}",
                range.describe()
            )));
        };
        if entries.len() != rows {
            return Err(Error::ShapeMismatch(format!(
                "range {} expects {} rows, matrix has {}",
                range.describe(),
                rows,
                entries.len()
            )));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "domain {} expects {} columns, row {} has {}",
                    domain.describe(),
                    cols,
                    i,
                    row.len()
                )));
            }
        }
        Ok(Self { entries, domain, range })
    }

    pub fn from_ints(entries: &[&[i64]], domain: SpaceTag, range: SpaceTag) -> Result<Self> {
        Self::new(
            entries.iter().map(|row| row.iter().map(|&v| int(v)).collect()).collect(),
            domain,
            range,
        )
    }

    pub fn identity(dim: usize, tag: SpaceTag) -> Result<Self> {
        let entries = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { int(1) } else { int(0) }).collect())
            .collect();
        Self::new(entries, tag.clone(), tag)
    }

    /// Diagonal 0/1 projection keeping the first `n` of `dim` coordinates.
    pub fn basis_projection(n: usize, dim: usize, tag: SpaceTag) -> Result<Self> {
        if n < 1 || n > dim {
            return Err(Error::ProjectionOutOfRange { n, dim });
        }
        let entries = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j && i < n { int(1) } else { int(0) }).collect())
            .collect();
        Self::new(entries, tag.clone(), tag)
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn domain(&self) -> &SpaceTag {
        &self.domain
    }

    pub fn range(&self) -> &SpaceTag {
        &self.range
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries[0].len()
    }

    pub fn apply(&self, x: &LatticeElement) -> Result<LatticeElement> {
        if x.dim() != self.cols() {
            return Err(Error::DimensionMismatch { left: self.cols(), right: x.dim() });
        }
        let coords = self
            .entries
            .iter()
            .map(|row| row.iter().zip(x.coords()).map(|(t, c)| t * c).sum())
            .collect();
        LatticeElement::new(coords)
    }

    pub fn is_positive(&self) -> bool {
        self.entries.iter().all(|row| row.iter().all(|t| !t.is_negative()))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.domain != other.domain || self.range != other.range {
            return Err(Error::TagMismatch(format!(
                "operators act between different spaces: {} -> {} vs. {} -> {}",
                self.domain.describe(),
                self.range.describe(),
                other.domain.describe(),
                other.range.describe()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a + b).collect())
            .collect();
        Ok(Self { entries, domain: self.domain.clone(), range: self.range.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a - b).collect())
            .collect();
        Ok(Self { entries, domain: self.domain.clone(), range: self.range.clone() })
    }

    pub fn negate(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|r| r.iter().map(|t| -t).collect()).collect(),
            domain: self.domain.clone(),
            range: self.range.clone(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            entries: self.entries.iter().map(|r| r.iter().map(|t| t * c).collect()).collect(),
            domain: self.domain.clone(),
            range: self.range.clone(),
        }
    }

    /// The modulus in closed form: entrywise absolute value.
    pub fn modulus_matrix(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|r| r.iter().map(abs).collect()).collect(),
            domain: self.domain.clone(),
            range: self.range.clone(),
        }
    }

    /// The modulus evaluated at a positive vector by brute force: the
    /// coordinatewise supremum of |T u| over the extreme points u of the
    /// order interval [−x, x], namely the 2^n sign patterns u_j = ±x_j.
    /// Interior points never beat extreme ones for linear T.
    pub fn modulus_rk(&self, x: &LatticeElement) -> Result<LatticeElement> {
        if x.dim() != self.cols() {
            return Err(Error::DimensionMismatch { left: self.cols(), right: x.dim() });
        }
        if !x.is_positive() {
            return Err(Error::NotPositive);
        }
        let n = self.cols();
        if n > MODULUS_ORACLE_MAX_DIM {
            return Err(Error::OracleGuard { max: MODULUS_ORACLE_MAX_DIM, got: n });
        }
        let mut best: Option<LatticeElement> = None;
        for pattern in 0u64..(1u64 << n) {
            let u = LatticeElement::new(
                x.coords()
                    .iter()
                    .enumerate()
                    .map(|(j, c)| if pattern & (1 << j) != 0 { -c } else { c.clone() })
                    .collect(),
            )
            .expect("dim positive");
            let image = self.apply(&u)?.abs();
            best = Some(match best {
                None => image,
                Some(b) => b.join(&image)?,
            });
        }
        Ok(best.expect("at least one pattern"))
    }

    /// Domination order on operators: does `self` dominate `other`, in the
    /// sense that the modulus of `other` is dominated by the modulus of
    /// `self` on every positive vector? Decided exactly as entrywise
    /// comparison of the two modulus matrices.
    pub fn dominates(&self, other: &Self) -> Result<bool> {
        Ok(self.domination_witness(other)?.is_none())
    }

    /// The first entry violating domination, if any: (row, col, |other|entry,
    /// |self| entry).
    pub fn domination_witness(
        &self,
        other: &Self,
    ) -> Result<Option<(usize, usize, Rational, Rational)>> {
        self.same_shape(other)?;
        for (i, (r, s)) in self.entries.iter().zip(&other.entries).enumerate() {
            for (j, (a, b)) in r.iter().zip(s).enumerate() {
                if abs(b) > abs(a) {
                    return Ok(Some((i, j, abs(b), abs(a))));
                }
            }
        }
        Ok(None)
    }

    /// Exact induced operator norm for the two homogeneous tag pairs:
    /// summed norm to summed norm is the largest column sum of |T|, uniform
    /// norm to uniform norm the largest row sum.
    pub fn induced_norm(&self) -> Result<Rational> {
        match (&self.domain, &self.range) {
            (SpaceTag::SeqL1 { .. }, SpaceTag::SeqL1 { .. }) => {
                let mut best = Rational::zero();
                for j in 0..self.cols() {
                    let col_sum: Rational = self.entries.iter().map(|r| abs(&r[j])).sum();
                    best = rat_max(&best, &col_sum);
                }
                Ok(best)
            }
            (SpaceTag::SeqLInf { .. }, SpaceTag::SeqLInf { .. }) => {
                let mut best = Rational::zero();
                for row in &self.entries {
                    let row_sum: Rational = row.iter().map(abs).sum();
                    best = rat_max(&best, &row_sum);
                }
                Ok(best)
            }
            (d, r) => Err(Error::UnsupportedTagPair(format!(
                "induced norm is available for matching summed or uniform tags, got {} -> {}",
                d.describe(),
                r.describe()
            ))),
        }
    }

    /// The symmetric order bounds of the image of the interval [−u, u]:
    /// hi = |T| u and lo = −hi. Every x with |x| ≤ u lands between them,
    /// and no smaller symmetric pair works.
    pub fn order_bounded_image(
        &self,
        u: &LatticeElement,
    ) -> Result<(LatticeElement, LatticeElement)> {
        if !u.is_positive() {
            return Err(Error::NotPositive);
        }
        let hi = self.modulus_matrix().apply(u)?;
        Ok((hi.negate(), hi))
    }
}

/// Rank-one operator x ↦ f(x)·y with an explicit positive functional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneOp {
    pub functional: LatticeElement,
    pub target: LatticeElement,
}

impl RankOneOp {
    pub fn new(functional: LatticeElement, target: LatticeElement) -> Self {
        Self { functional, target }
    }

    /// The coordinate functional f = (1/x0_i) e_i on the first strictly
    /// positive coordinate of x0, so that f(x0) = 1.
    pub fn normalizing_functional(x0: &LatticeElement) -> Result<LatticeElement> {
        let i = x0
            .coords()
            .iter()
            .position(|c| c > &Rational::zero())
            .ok_or(Error::NoPositiveCoordinate)?;
        let mut coords = vec![Rational::zero(); x0.dim()];
        coords[i] = int(1) / x0.coord(i);
        LatticeElement::new(coords)
    }

    pub fn eval_functional(&self, x: &LatticeElement) -> Result<Rational> {
        if x.dim() != self.functional.dim() {
            return Err(Error::DimensionMismatch { left: self.functional.dim(), right: x.dim() });
        }
        Ok(self.functional.coords().iter().zip(x.coords()).map(|(f, c)| f * c).sum())
    }

    pub fn apply(&self, x: &LatticeElement) -> Result<LatticeElement> {
        let t = self.eval_functional(x)?;
        Ok(self.target.scale(&t))
    }

    /// Materializes f ⊗ y as a matrix: entries[i][j] = f_j y_i.
    pub fn to_matrix(&self, domain: SpaceTag, range: SpaceTag) -> Result<MatrixOp> {
        let entries = self
            .target
            .coords()
            .iter()
            .map(|yi| self.functional.coords().iter().map(|fj| fj * yi).collect())
            .collect();
        MatrixOp::new(entries, domain, range)
    }
}

/// Outcome of asking whether an operator maps a neighborhood to a bounded
/// set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NbVerdict {
    /// The image fits inside `scale` copies of the range unit ball. The
    /// note records when the scale is a safe upper bound rather than the
    /// exact induced norm.
    Bounded { scale: Rational, note: Option<String> },
    /// The image is unbounded along an unconstrained input direction.
    Unbounded {
        factor: usize,
        coord: usize,
        direction: LatticeElement,
        image: LatticeElement,
    },
}

/// Decides whether the image of a neighborhood under the operator is norm
/// bounded in the range.
///
/// A norm ball always maps to a bounded set in finite dimensions; the scale
/// is the induced norm times the radius when the tag pair supports the
/// exact induced norm, and the total-entry bound otherwise. A
/// product-topology neighborhood constrains only the factors it names, so
/// the image is bounded exactly when every column of the matrix belonging
/// to an unconstrained factor vanishes; the first nonzero such column is
/// returned as the witness direction. Constraints on product factors must
/// be balls over coordinate factors.
pub fn nb_bounded_check(op: &MatrixOp, nbhd: &NeighborhoodSpec) -> Result<NbVerdict> {
    nbhd.validate()?;
    match nbhd {
        NeighborhoodSpec::Ball { radius } => {
            if matches!(op.domain(), SpaceTag::Product { .. }) {
                return Err(Error::InvalidNeighborhood(
                    "a ball needs a normed domain, the domain is a product".into(),
                ));
            }
            match op.induced_norm() {
                Ok(norm) => Ok(NbVerdict::Bounded { scale: norm * radius, note: None }),
                Err(Error::UnsupportedTagPair(_)) => {
                    let bound = total_entry_bound(op) * radius;
                    Ok(NbVerdict::Bounded {
                        scale: bound,
                        note: Some(
                            "scale is the total-entry upper bound; the tag pair has no exact \
                             induced norm here"
                                .into(),
                        ),
                    })
                }
                Err(e) => Err(e),
            }
        }
        NeighborhoodSpec::ProductConstraints { constraints } => {
            let SpaceTag::Product { factors } = op.domain() else {
                return Err(Error::InvalidNeighborhood(
                    "factor constraints only apply to product domains".into(),
                ));
            };
            let spans = factor_spans(factors, op.cols())?;
            for j in constraints.keys() {
                if *j >= factors.len() {
                    return Err(Error::InvalidNeighborhood(format!(
                        "constraint names factor {} but the product has {}",
                        j,
                        factors.len()
                    )));
                }
            }
            // any nonzero column in an unconstrained factor is a free
            // direction whose image scales without bound
            for (j, (start, len)) in spans.iter().enumerate() {
                if constraints.contains_key(&j) {
                    continue;
                }
                for c in *start..start + len {
                    if op.entries().iter().any(|row| !row[c].is_zero()) {
                        let direction = LatticeElement::basis(c, op.cols())?;
                        let image = op.apply(&direction)?;
                        return Ok(NbVerdict::Unbounded { factor: j, coord: c, direction, image });
                    }
                }
            }
            // bounded: accumulate a safe scale from the constrained factors
            let mut scale = Rational::zero();
            for (j, sub) in constraints {
                let NeighborhoodSpec::Ball { radius } = sub else {
                    return Err(Error::InvalidNeighborhood(
                        "nested factor constraints are not supported; constrain factors with balls"
                            .into(),
                    ));
                };
                let (start, len) = spans[*j];
                let col_bound: Rational = op
                    .entries()
                    .iter()
                    .flat_map(|row| row[start..start + len].iter().map(abs))
                    .sum();
                scale += col_bound * radius * coordinate_reach(&factors[*j])?;
            }
            Ok(NbVerdict::Bounded {
                scale,
                note: Some("scale is a safe upper bound over the constrained factors".into()),
            })
        }
    }
}

/// Sum of all absolute entries: a norm bound valid for every combination of
/// summed, uniform, and weighted tags with weights at least considered via
/// `coordinate_reach`.
fn total_entry_bound(op: &MatrixOp) -> Rational {
    let raw: Rational = op.entries().iter().flat_map(|r| r.iter().map(abs)).sum();
    let dom_reach = coordinate_reach(op.domain()).unwrap_or_else(|_| int(1));
    let range_stretch = match op.range() {
        SpaceTag::WeightedL1 { weights } => {
            weights.iter().fold(Rational::zero(), |a, w| rat_max(&a, w))
        }
        _ => int(1),
    };
    raw * dom_reach * range_stretch
}

/// How large a single coordinate can be inside the unit ball of the tag.
fn coordinate_reach(tag: &SpaceTag) -> Result<Rational> {
    match tag {
        SpaceTag::SeqL1 { .. } | SpaceTag::SeqLInf { .. } => Ok(int(1)),
        SpaceTag::WeightedL1 { weights } => {
            let min_w = weights
                .iter()
                .fold(None::<&Rational>, |acc, w| match acc {
                    None => Some(w),
                    Some(m) => Some(if w < m { w } else { m }),
                })
                .expect("weights nonempty");
            Ok(int(1) / min_w)
        }
        other => Err(Error::InvalidTag(format!(
            "coordinate reach needs a coordinate tag, got {}",
            other.describe()
        ))),
    }
}

/// Column spans (offset, length) of the factors of a product domain.
fn factor_spans(factors: &[SpaceTag], total_cols: usize) -> Result<Vec<(usize, usize)>> {
    let mut spans = Vec::with_capacity(factors.len());
    let mut offset = 0;
    for f in factors {
        let Some(d) = f.coord_dim() else {
            return Err(Error::InvalidTag(format!(
                "product factors must be coordinate spaces for matrix analysis, got {}",
                f.describe()
            )));
        };
        spans.push((offset, d));
        offset += d;
    }
    if offset != total_cols {
        return Err(Error::ShapeMismatch(format!(
            "product flattens to {} coordinates but the matrix has {} columns",
            offset, total_cols
        )));
    }
    Ok(spans)
}

/// Monotonicity direction claimed for an operator sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneClaim {
    Increasing,
    Decreasing,
}

/// A named sequence of operators k ↦ T_k with a claimed direction.
#[derive(Clone)]
pub struct OperatorSeq {
    pub name: String,
    pub claim: MonotoneClaim,
    generator: Rc<dyn Fn(u32) -> MatrixOp>,
}

impl OperatorSeq {
    pub fn new(
        name: impl Into<String>,
        claim: MonotoneClaim,
        generator: impl Fn(u32) -> MatrixOp + 'static,
    ) -> Self {
        Self { name: name.into(), claim, generator: Rc::new(generator) }
    }

    pub fn term(&self, k: u32) -> MatrixOp {
        (self.generator)(k)
    }
}

impl std::fmt::Debug for OperatorSeq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorSeq")
            .field("name", &self.name)
            .field("claim", &self.claim)
            .finish_non_exhaustive()
    }
}

/// Outcome of a monotonicity check along a sequence of operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonotoneVerdict {
    Confirmed { upto: u32 },
    /// The step from `at − 1` to `at` moves entry (row, col) the wrong way.
    Violation { at: u32, row: usize, col: usize, step: Rational },
}

/// Verifies the claimed monotonicity for indices 1..=K by comparing
/// consecutive terms. The comparison is the signed entrywise one: for an
/// increasing claim every entry of T_{k+1} − T_k must be nonnegative. On
/// positive sequences this coincides with domination of each term by the
/// next; the signed form also catches sign-flipping sequences whose moduli
/// all agree.
pub fn operator_seq_monotone_check(seq: &OperatorSeq, upto: u32) -> Result<MonotoneVerdict> {
    if upto < 2 {
        return Err(Error::FamilyPrecondition(
            "monotonicity needs at least two terms to compare".into(),
        ));
    }
    let mut prev = seq.term(1);
    for k in 2..=upto {
        let cur = seq.term(k);
        let step = match seq.claim {
            MonotoneClaim::Increasing => cur.sub(&prev)?,
            MonotoneClaim::Decreasing => prev.sub(&cur)?,
        };
        for (i, row) in step.entries().iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_negative() {
                    return Ok(MonotoneVerdict::Violation { at: k, row: i, col: j, step: v.clone() });
                }
            }
        }
        prev = cur;
    }
    Ok(MonotoneVerdict::Confirmed { upto })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn l1(dim: usize) -> SpaceTag {
        SpaceTag::SeqL1 { dim }
    }

    fn linf(dim: usize) -> SpaceTag {
        SpaceTag::SeqLInf { dim }
    }

    fn sample_t() -> MatrixOp {
        MatrixOp::from_ints(&[&[1, -2], &[-3, 4]], linf(2), linf(2)).unwrap()
    }

    #[test]
    fn apply_is_matrix_vector_product() {
        let t = sample_t();
        let x = LatticeElement::from_ints(&[1, 1]);
        assert_eq!(t.apply(&x).unwrap(), LatticeElement::from_ints(&[-1, 1]));
        assert!(t.apply(&LatticeElement::from_ints(&[1])).is_err());
    }

    #[test]
    fn constructor_validates_shape_and_tags() {
        assert!(MatrixOp::from_ints(&[&[1, 2]], l1(2), l1(2)).is_err());
        assert!(MatrixOp::from_ints(&[&[1], &[2]], l1(1), l1(2)).is_ok());
        assert!(MatrixOp::from_ints(&[&[1]], SpaceTag::PwlSup, l1(1)).is_err());
        // products of coordinate spaces flatten and are accepted
        let product = SpaceTag::product(vec![l1(1), l1(1)]).unwrap();
        assert!(MatrixOp::from_ints(&[&[1, 0], &[0, 1]], product, l1(2)).is_ok());
        // a product with a function factor has no coordinate flattening
        let with_pwl = SpaceTag::product(vec![l1(1), SpaceTag::PwlSup]).unwrap();
        assert!(MatrixOp::from_ints(&[&[1]], with_pwl, l1(1)).is_err());
    }

    #[test]
    fn modulus_matrix_is_entrywise_abs() {
        let t = sample_t();
        let m = t.modulus_matrix();
        assert_eq!(m, MatrixOp::from_ints(&[&[1, 2], &[3, 4]], linf(2), linf(2)).unwrap());
        assert!(m.is_positive());
        assert_eq!(t.negate().modulus_matrix(), m);
        // |T| >= T and |T| >= -T entrywise
        assert!(m.dominates(&t).unwrap());
        assert!(m.dominates(&t.negate()).unwrap());
    }

    #[test]
    fn modulus_rk_frozen_example() {
        let t = sample_t();
        let x = LatticeElement::from_ints(&[1, 1]);
        let m = t.modulus_rk(&x).unwrap();
        assert_eq!(m, LatticeElement::from_ints(&[3, 7]));
        assert_eq!(t.modulus_matrix().apply(&x).unwrap(), m);
    }

    #[test]
    fn modulus_rk_rejects_bad_inputs() {
        let t = sample_t();
        assert!(matches!(
            t.modulus_rk(&LatticeElement::from_ints(&[1, -1])),
            Err(Error::NotPositive)
        ));
        assert!(t.modulus_rk(&LatticeElement::from_ints(&[1])).is_err());
        let wide = MatrixOp::new(
            vec![vec![int(1); 21]],
            linf(21),
            linf(1),
        )
        .unwrap();
        let ones = LatticeElement::new(vec![int(1); 21]).unwrap();
        assert!(matches!(
            wide.modulus_rk(&ones),
            Err(Error::OracleGuard { max: MODULUS_ORACLE_MAX_DIM, got: 21 })
        ));
    }

    #[test]
    fn modulus_closed_form_matches_oracle_on_grid() {
        // every 2x2 matrix with entries in {-2..2} against a few positive x
        let xs = [
            LatticeElement::from_ints(&[1, 1]),
            LatticeElement::from_ints(&[2, 1]),
            LatticeElement::new(vec![rat(1, 2), rat(3, 2)]).unwrap(),
            LatticeElement::from_ints(&[0, 1]),
        ];
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                for c in -2i64..=2 {
                    for d in -2i64..=2 {
                        let t =
                            MatrixOp::from_ints(&[&[a, b], &[c, d]], linf(2), linf(2)).unwrap();
                        let m = t.modulus_matrix();
                        for x in &xs {
                            assert_eq!(
                                m.apply(x).unwrap(),
                                t.modulus_rk(x).unwrap(),
                                "mismatch for [[{a},{b}],[{c},{d}]] at {x}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn modulus_is_minimal() {
        // shrinking any nonzero entry of |T| loses the bound at the matching
        // basis vector
        let t = sample_t();
        let m = t.modulus_matrix();
        for i in 0..2 {
            for j in 0..2 {
                let mut entries: Vec<Vec<Rational>> = m.entries().to_vec();
                entries[i][j] = &entries[i][j] / int(2);
                let shrunk = MatrixOp::new(entries, linf(2), linf(2)).unwrap();
                let witness = LatticeElement::basis(j, 2).unwrap();
                let claimed = shrunk.apply(&witness).unwrap();
                let actual = t.modulus_rk(&witness).unwrap();
                assert!(
                    !actual.leq(&claimed).unwrap(),
                    "entry ({i},{j}) was not necessary"
                );
            }
        }
    }

    #[test]
    fn rank_one_operator_evaluates_and_materializes() {
        let op = RankOneOp::new(
            LatticeElement::from_ints(&[1, 0]),
            LatticeElement::from_ints(&[2, 3]),
        );
        let x = LatticeElement::from_ints(&[5, 7]);
        assert_eq!(op.eval_functional(&x).unwrap(), int(5));
        assert_eq!(op.apply(&x).unwrap(), LatticeElement::from_ints(&[10, 15]));
        let m = op.to_matrix(linf(2), linf(2)).unwrap();
        assert_eq!(m.apply(&x).unwrap(), op.apply(&x).unwrap());
        assert_eq!(m, MatrixOp::from_ints(&[&[2, 0], &[3, 0]], linf(2), linf(2)).unwrap());
    }

    #[test]
    fn normalizing_functional_hits_one() {
        let x0 = LatticeElement::from_ints(&[0, 4, 1]);
        let f = RankOneOp::normalizing_functional(&x0).unwrap();
        assert_eq!(f, LatticeElement::new(vec![int(0), rat(1, 4), int(0)]).unwrap());
        let op = RankOneOp::new(f, LatticeElement::from_ints(&[1]));
        assert_eq!(op.eval_functional(&x0).unwrap(), int(1));
        assert!(matches!(
            RankOneOp::normalizing_functional(&LatticeElement::from_ints(&[0, -1])),
            Err(Error::NoPositiveCoordinate)
        ));
    }

    #[test]
    fn domination_examples() {
        let t = sample_t();
        assert!(t.modulus_matrix().dominates(&t).unwrap());
        assert!(t.dominates(&t).unwrap());
        let bigger = t.modulus_matrix().scale(&int(2));
        assert!(bigger.dominates(&t).unwrap());
        assert!(!t.dominates(&bigger).unwrap());
        let w = t.domination_witness(&bigger).unwrap().unwrap();
        assert_eq!((w.0, w.1), (0, 0));
        assert_eq!(w.2, int(2)); // |bigger| entry
        assert_eq!(w.3, int(1)); // |t| entry
        // shape mismatch is an error
        let other = MatrixOp::from_ints(&[&[1, -2], &[-3, 4]], l1(2), l1(2)).unwrap();
        assert!(t.dominates(&other).is_err());
    }

    #[test]
    fn induced_norm_formulas() {
        let t_inf = sample_t();
        assert_eq!(t_inf.induced_norm().unwrap(), int(7)); // max row sum
        let t_l1 = MatrixOp::from_ints(&[&[1, -2], &[-3, 4]], l1(2), l1(2)).unwrap();
        assert_eq!(t_l1.induced_norm().unwrap(), int(6)); // max column sum
        let mixed = MatrixOp::from_ints(&[&[1, -2], &[-3, 4]], l1(2), linf(2)).unwrap();
        assert!(matches!(mixed.induced_norm(), Err(Error::UnsupportedTagPair(_))));
        // induced norm is attained: for the uniform tag at a sign vector
        let x = LatticeElement::from_ints(&[-1, 1]);
        let image = t_inf.apply(&x).unwrap();
        assert_eq!(image.abs().coords().iter().max().unwrap(), &int(7));
    }

    #[test]
    fn order_bounded_image_frozen_example() {
        let t = sample_t();
        let u = LatticeElement::from_ints(&[1, 1]);
        let (lo, hi) = t.order_bounded_image(&u).unwrap();
        assert_eq!(hi, LatticeElement::from_ints(&[3, 7]));
        assert_eq!(lo, LatticeElement::from_ints(&[-3, -7]));
        // spot check containment on the four extreme points
        for sx in [-1i64, 1] {
            for sy in [-1i64, 1] {
                let x = LatticeElement::from_ints(&[sx, sy]);
                let y = t.apply(&x).unwrap();
                assert!(lo.leq(&y).unwrap() && y.leq(&hi).unwrap());
            }
        }
        assert!(t.order_bounded_image(&LatticeElement::from_ints(&[-1, 1])).is_err());
    }

    #[test]
    fn basis_projections_increase_to_identity() {
        let dim = 5;
        let tag = linf(dim);
        let id = MatrixOp::identity(dim, tag.clone()).unwrap();
        assert_eq!(MatrixOp::basis_projection(dim, dim, tag.clone()).unwrap(), id);
        assert_eq!(
            MatrixOp::basis_projection(1, 3, linf(3)).unwrap(),
            MatrixOp::from_ints(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]], linf(3), linf(3)).unwrap()
        );
        for n in 1..dim {
            let p = MatrixOp::basis_projection(n, dim, tag.clone()).unwrap();
            let q = MatrixOp::basis_projection(n + 1, dim, tag.clone()).unwrap();
            assert!(p.is_positive());
            assert!(q.dominates(&p).unwrap());
            assert!(id.dominates(&p).unwrap());
            // the gap to the identity never closes
            assert_eq!(id.sub(&p).unwrap().induced_norm().unwrap(), int(1));
        }
        assert!(matches!(
            MatrixOp::basis_projection(0, 3, linf(3)),
            Err(Error::ProjectionOutOfRange { n: 0, dim: 3 })
        ));
        assert!(MatrixOp::basis_projection(4, 3, linf(3)).is_err());
    }

    #[test]
    fn nb_bounded_on_balls() {
        let t = sample_t();
        let v = nb_bounded_check(&t, &NeighborhoodSpec::unit_ball()).unwrap();
        assert_eq!(v, NbVerdict::Bounded { scale: int(7), note: None });
        let v = nb_bounded_check(&t, &NeighborhoodSpec::Ball { radius: rat(1, 2) }).unwrap();
        assert_eq!(v, NbVerdict::Bounded { scale: rat(7, 2), note: None });
        // mixed tags fall back to the safe bound, with a note
        let mixed = MatrixOp::from_ints(&[&[1, -2], &[-3, 4]], l1(2), linf(2)).unwrap();
        match nb_bounded_check(&mixed, &NeighborhoodSpec::unit_ball()).unwrap() {
            NbVerdict::Bounded { scale, note } => {
                assert_eq!(scale, int(10));
                assert!(note.is_some());
            }
            other => panic!("expected bounded, got {other:?}"),
        }
    }

    #[test]
    fn identity_on_product_with_partial_constraints_is_unbounded() {
        let factors = vec![linf(1), linf(1), linf(1)];
        let product = SpaceTag::product(factors).unwrap();
        // the matrix lives on the flattened coordinates
        let id = MatrixOp::from_ints(
            &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]],
            product.clone(),
            linf(3),
        )
        .unwrap();
        let constraints = NeighborhoodSpec::ProductConstraints {
            constraints: [
                (0usize, NeighborhoodSpec::unit_ball()),
                (1usize, NeighborhoodSpec::unit_ball()),
            ]
            .into_iter()
            .collect(),
        };
        match nb_bounded_check(&id, &constraints).unwrap() {
            NbVerdict::Unbounded { factor, coord, direction, image } => {
                assert_eq!(factor, 2);
                assert_eq!(coord, 2);
                assert_eq!(direction, LatticeElement::from_ints(&[0, 0, 1]));
                assert_eq!(image, LatticeElement::from_ints(&[0, 0, 1]));
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
        // constraining every factor restores boundedness
        let full = NeighborhoodSpec::ProductConstraints {
            constraints: (0..3).map(|j| (j, NeighborhoodSpec::unit_ball())).collect(),
        };
        assert!(matches!(
            nb_bounded_check(&id, &full).unwrap(),
            NbVerdict::Bounded { .. }
        ));
        // projection onto factor 0 needs only that factor constrained
        let proj = MatrixOp::from_ints(
            &[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]],
            product,
            linf(3),
        )
        .unwrap();
        let first_only = NeighborhoodSpec::ProductConstraints {
            constraints: [(0usize, NeighborhoodSpec::unit_ball())].into_iter().collect(),
        };
        match nb_bounded_check(&proj, &first_only).unwrap() {
            NbVerdict::Bounded { scale, .. } => assert_eq!(scale, int(1)),
            other => panic!("expected bounded, got {other:?}"),
        }
    }

    #[test]
    fn monotone_check_confirms_projections() {
        let seq = OperatorSeq::new("basis-projections", MonotoneClaim::Increasing, |k| {
            let n = std::cmp::min(k as usize, 16);
            MatrixOp::basis_projection(n, 16, SpaceTag::SeqLInf { dim: 16 }).unwrap()
        });
        assert_eq!(
            operator_seq_monotone_check(&seq, 16).unwrap(),
            MonotoneVerdict::Confirmed { upto: 16 }
        );
    }

    #[test]
    fn monotone_check_accepts_constant_both_ways() {
        for claim in [MonotoneClaim::Increasing, MonotoneClaim::Decreasing] {
            let seq = OperatorSeq::new("constant", claim, |_| {
                MatrixOp::identity(2, SpaceTag::SeqLInf { dim: 2 }).unwrap()
            });
            assert_eq!(
                operator_seq_monotone_check(&seq, 8).unwrap(),
                MonotoneVerdict::Confirmed { upto: 8 }
            );
        }
    }

    #[test]
    fn monotone_check_catches_alternating_signs() {
        let seq = OperatorSeq::new("alternating", MonotoneClaim::Increasing, |k| {
            let id = MatrixOp::identity(2, SpaceTag::SeqLInf { dim: 2 }).unwrap();
            if k % 2 == 1 {
                id
            } else {
                id.negate()
            }
        });
        match operator_seq_monotone_check(&seq, 8).unwrap() {
            MonotoneVerdict::Violation { at, row, col, step } => {
                assert_eq!(at, 2);
                assert_eq!((row, col), (0, 0));
                assert_eq!(step, int(-2));
            }
            other => panic!("expected violation, got {other:?}"),
        }
        assert!(operator_seq_monotone_check(&seq, 1).is_err());
    }

    #[test]
    fn matrix_serde_round_trip() {
        let t = sample_t();
        let json = serde_json::to_string(&t).unwrap();
        let back: MatrixOp = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(json.contains(r#""entries":[["1","-2"],["-3","4"]]"#));
        // shape errors surface on deserialize
        let bad = r#"{"entries":[["1","2"]],"domain":{"kind":"seq_l1","dim":2},"range":{"kind":"seq_l1","dim":2}}"#;
        assert!(serde_json::from_str::<MatrixOp>(bad).is_err());
    }
}
