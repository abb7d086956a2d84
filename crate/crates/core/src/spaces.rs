//! Tagged norm structures over the two carriers (rational coordinate
//! vectors and piecewise-linear functions), finite products of them, and
//! boundedness analysis of sets against neighborhoods.
//!
//! A `SpaceTag` names a carrier together with a norm: summed, uniform, or
//! weighted absolute coordinates, or the uniform and integral norms on the
//! piecewise-linear sublattice. Products carry no norm of their own; their
//! neighborhoods constrain finitely many factors and leave the rest free,
//! which is exactly what makes some order-bounded maps fail to be bounded
//! on any neighborhood.

use std::collections::BTreeMap;
use std::rc::Rc;

use num::Zero;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeElement;
use crate::pwl::PwlFunc;
use crate::rational::{abs, format_rational, max as rat_max, parse_rational, rat, Rational};
use crate::sampling::{sample_dominated_pair, sample_element, sample_positive_pwl, sample_pwl, SampleSpec};

/// Names a normed vector lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceTagRepr", into = "SpaceTagRepr")]
pub enum SpaceTag {
    /// Q^dim with the summed-coordinate norm.
    SeqL1 { dim: usize },
    /// Q^dim with the max-coordinate norm.
    SeqLInf { dim: usize },
    /// Q^dim with strictly positive weights on the summed coordinates.
    WeightedL1 { weights: Vec<Rational> },
    /// Piecewise-linear functions on [0,1] under the uniform norm.
    PwlSup,
    /// Piecewise-linear functions on [0,1] under the integral norm.
    PwlL1,
    /// A finite product; no norm, neighborhoods constrain chosen factors.
    Product { factors: Vec<SpaceTag> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SpaceTagRepr {
    SeqL1 { dim: usize },
    SeqLInf { dim: usize },
    WeightedL1 { weights: Vec<String> },
    PwlSup,
    PwlL1,
    Product { factors: Vec<SpaceTagRepr> },
}

impl TryFrom<SpaceTagRepr> for SpaceTag {
    type Error = Error;
    fn try_from(repr: SpaceTagRepr) -> Result<Self> {
        let tag = match repr {
            SpaceTagRepr::SeqL1 { dim } => SpaceTag::SeqL1 { dim },
            SpaceTagRepr::SeqLInf { dim } => SpaceTag::SeqLInf { dim },
            SpaceTagRepr::WeightedL1 { weights } => SpaceTag::WeightedL1 {
                weights: weights
                    .iter()
                    .map(|w| parse_rational(w))
                    .collect::<Result<Vec<_>>>()?,
            },
            SpaceTagRepr::PwlSup => SpaceTag::PwlSup,
            SpaceTagRepr::PwlL1 => SpaceTag::PwlL1,
            SpaceTagRepr::Product { factors } => SpaceTag::Product {
                factors: factors
                    .into_iter()
                    .map(SpaceTag::try_from)
                    .collect::<Result<Vec<_>>>()?,
            },
        };
        tag.validate()?;
        Ok(tag)
    }
}

impl From<SpaceTag> for SpaceTagRepr {
    fn from(tag: SpaceTag) -> SpaceTagRepr {
        match tag {
            SpaceTag::SeqL1 { dim } => SpaceTagRepr::SeqL1 { dim },
            SpaceTag::SeqLInf { dim } => SpaceTagRepr::SeqLInf { dim },
            SpaceTag::WeightedL1 { weights } => SpaceTagRepr::WeightedL1 {
                weights: weights.iter().map(format_rational).collect(),
            },
            SpaceTag::PwlSup => SpaceTagRepr::PwlSup,
            SpaceTag::PwlL1 => SpaceTagRepr::PwlL1,
            SpaceTag::Product { factors } => SpaceTagRepr::Product {
                factors: factors.into_iter().map(SpaceTagRepr::from).collect(),
            },
        }
    }
}

impl SpaceTag {
    pub fn product(factors: Vec<SpaceTag>) -> Result<Self> {
        let tag = SpaceTag::Product { factors };
        tag.validate()?;
        Ok(tag)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceTag::SeqL1 { dim } | SpaceTag::SeqLInf { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidTag("coordinate dimension must be positive".into()));
                }
            }
            SpaceTag::WeightedL1 { weights } => {
                if weights.is_empty() {
                    return Err(Error::InvalidTag("weighted norm needs at least one weight".into()));
                }
                if let Some(w) = weights.iter().find(|w| **w <= Rational::zero()) {
                    return Err(Error::InvalidTag(format!(
                        "weights must be strictly positive, found {}",
                        format_rational(w)
                    )));
                }
            }
            SpaceTag::PwlSup | SpaceTag::PwlL1 => {}
            SpaceTag::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidTag("product needs at least one factor".into()));
                }
                for f in factors {
                    f.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Coordinate dimension for coordinate spaces.
    pub fn coord_dim(&self) -> Option<usize> {
        match self {
            SpaceTag::SeqL1 { dim } | SpaceTag::SeqLInf { dim } => Some(*dim),
            SpaceTag::WeightedL1 { weights } => Some(weights.len()),
            _ => None,
        }
    }

    /// Total coordinate dimension when every factor is a coordinate space.
    pub fn flat_dim(&self) -> Option<usize> {
        match self {
            SpaceTag::Product { factors } => {
                factors.iter().map(SpaceTag::flat_dim).sum::<Option<usize>>()
            }
            other => other.coord_dim(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SpaceTag::SeqL1 { dim } => format!("seq_l1(dim={dim})"),
            SpaceTag::SeqLInf { dim } => format!("seq_linf(dim={dim})"),
            SpaceTag::WeightedL1 { weights } => {
                let ws: Vec<String> = weights.iter().map(format_rational).collect();
                format!("weighted_l1[{}]", ws.join(","))
            }
            SpaceTag::PwlSup => "pwl_sup".into(),
            SpaceTag::PwlL1 => "pwl_l1".into(),
            SpaceTag::Product { factors } => {
                let fs: Vec<String> = factors.iter().map(SpaceTag::describe).collect();
                format!("product({})", fs.join(" x "))
            }
        }
    }
}

/// A point of one of the tagged spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Element {
    Coord(LatticeElement),
    Pwl(PwlFunc),
    Product(Vec<Element>),
}

impl Element {
    /// Applies a pair of binary operations through matching shapes.
    fn zip(
        &self,
        other: &Element,
        op_name: &str,
        coord: &dyn Fn(&LatticeElement, &LatticeElement) -> Result<LatticeElement>,
        pwl: &dyn Fn(&PwlFunc, &PwlFunc) -> PwlFunc,
    ) -> Result<Element> {
        match (self, other) {
            (Element::Coord(a), Element::Coord(b)) => coord(a, b).map(Element::Coord),
            (Element::Pwl(a), Element::Pwl(b)) => Ok(Element::Pwl(pwl(a, b))),
            (Element::Product(a), Element::Product(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(x, y)| x.zip(y, op_name, coord, pwl))
                .collect::<Result<Vec<_>>>()
                .map(Element::Product),
            _ => Err(Error::ShapeMismatch(format!(
                "{op_name} needs elements of the same shape"
            ))),
        }
    }

    pub fn join(&self, other: &Element) -> Result<Element> {
        self.zip(other, "join", &|a, b| a.join(b), &|a, b| a.join(b))
    }

    pub fn meet(&self, other: &Element) -> Result<Element> {
        self.zip(other, "meet", &|a, b| a.meet(b), &|a, b| a.meet(b))
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.zip(other, "add", &|a, b| a.add(b), &|a, b| a.add(b))
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.zip(other, "sub", &|a, b| a.sub(b), &|a, b| a.sub(b))
    }

    pub fn leq(&self, other: &Element) -> Result<bool> {
        match (self, other) {
            (Element::Coord(a), Element::Coord(b)) => a.leq(b),
            (Element::Pwl(a), Element::Pwl(b)) => Ok(a.leq(b)),
            (Element::Product(a), Element::Product(b)) if a.len() == b.len() => {
                for (x, y) in a.iter().zip(b) {
                    if !x.leq(y)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Err(Error::ShapeMismatch("order comparison needs elements of the same shape".into())),
        }
    }

    pub fn negate(&self) -> Element {
        match self {
            Element::Coord(a) => Element::Coord(a.negate()),
            Element::Pwl(a) => Element::Pwl(a.negate()),
            Element::Product(a) => Element::Product(a.iter().map(Element::negate).collect()),
        }
    }

    pub fn abs(&self) -> Element {
        match self {
            Element::Coord(a) => Element::Coord(a.abs()),
            Element::Pwl(a) => Element::Pwl(a.abs()),
            Element::Product(a) => Element::Product(a.iter().map(Element::abs).collect()),
        }
    }

    pub fn scale(&self, c: &Rational) -> Element {
        match self {
            Element::Coord(a) => Element::Coord(a.scale(c)),
            Element::Pwl(a) => Element::Pwl(a.scale(c)),
            Element::Product(a) => Element::Product(a.iter().map(|x| x.scale(c)).collect()),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Element::Coord(a) => a.is_positive(),
            Element::Pwl(a) => a.is_positive(),
            Element::Product(a) => a.iter().all(Element::is_positive),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Element::Coord(a) => a.is_zero(),
            Element::Pwl(a) => a.is_zero(),
            Element::Product(a) => a.iter().all(Element::is_zero),
        }
    }

    /// Projection onto factor `j` of a product element.
    pub fn project(&self, j: usize) -> Result<&Element> {
        match self {
            Element::Product(items) => items.get(j).ok_or(Error::ShapeMismatch(format!(
                "product has {} factors, no index {}",
                items.len(),
                j
            ))),
            _ => Err(Error::ShapeMismatch("projection applies to product elements".into())),
        }
    }

    /// True iff the element is a point of the tagged space.
    pub fn conforms_to(&self, tag: &SpaceTag) -> bool {
        match (self, tag) {
            (Element::Coord(x), _) => tag.coord_dim() == Some(x.dim()),
            (Element::Pwl(_), SpaceTag::PwlSup | SpaceTag::PwlL1) => true,
            (Element::Product(items), SpaceTag::Product { factors }) => {
                items.len() == factors.len()
                    && items.iter().zip(factors).all(|(x, f)| x.conforms_to(f))
            }
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Element::Coord(x) => x.to_string(),
            Element::Pwl(f) => f.to_string(),
            Element::Product(items) => {
                let parts: Vec<String> = items.iter().map(Element::describe).collect();
                format!("<{}>", parts.join(", "))
            }
        }
    }
}

/// The norm a tag assigns to a conforming element. Products have none.
pub fn norm(x: &Element, tag: &SpaceTag) -> Result<Rational> {
    if !x.conforms_to(tag) {
        return Err(Error::TagMismatch(format!(
            "element {} does not live in {}",
            x.describe(),
            tag.describe()
        )));
    }
    match (x, tag) {
        (Element::Coord(v), SpaceTag::SeqL1 { .. }) => {
            Ok(v.coords().iter().map(abs).sum())
        }
        (Element::Coord(v), SpaceTag::SeqLInf { .. }) => {
            Ok(v.coords().iter().map(abs).max().expect("dim positive"))
        }
        (Element::Coord(v), SpaceTag::WeightedL1 { weights }) => {
            Ok(v.coords().iter().zip(weights).map(|(c, w)| abs(c) * w).sum())
        }
        (Element::Pwl(f), SpaceTag::PwlSup) => Ok(f.sup_norm()),
        (Element::Pwl(f), SpaceTag::PwlL1) => Ok(f.l1_norm()),
        (_, SpaceTag::Product { .. }) => Err(Error::ProductHasNoNorm),
        _ => Err(Error::TagMismatch("carrier does not match tag".into())),
    }
}

/// Random element of a tagged space.
pub fn sample_in(tag: &SpaceTag, rng: &mut ChaCha8Rng) -> Element {
    match tag {
        SpaceTag::SeqL1 { dim } | SpaceTag::SeqLInf { dim } => {
            Element::Coord(sample_element(rng, *dim))
        }
        SpaceTag::WeightedL1 { weights } => Element::Coord(sample_element(rng, weights.len())),
        SpaceTag::PwlSup | SpaceTag::PwlL1 => Element::Pwl(sample_pwl(rng)),
        SpaceTag::Product { factors } => {
            Element::Product(factors.iter().map(|f| sample_in(f, rng)).collect())
        }
    }
}

/// Random pair (x, y) in the tagged space with |x| ≤ |y|.
pub fn sample_dominated_pair_in(tag: &SpaceTag, rng: &mut ChaCha8Rng) -> (Element, Element) {
    use rand::Rng;
    match tag {
        SpaceTag::SeqL1 { dim } | SpaceTag::SeqLInf { dim } => {
            let (x, y) = sample_dominated_pair(rng, *dim);
            (Element::Coord(x), Element::Coord(y))
        }
        SpaceTag::WeightedL1 { weights } => {
            let (x, y) = sample_dominated_pair(rng, weights.len());
            (Element::Coord(x), Element::Coord(y))
        }
        SpaceTag::PwlSup | SpaceTag::PwlL1 => {
            let y = sample_pwl(rng);
            let x = if rng.random_bool(0.5) {
                // damp by a constant of modulus at most one
                y.scale(&rat(rng.random_range(-8..=8), 8))
            } else {
                // pinch against an independent positive function
                let sign = if rng.random_bool(0.5) { 1 } else { -1 };
                y.abs().meet(&sample_positive_pwl(rng)).scale(&rat(sign, 1))
            };
            (Element::Pwl(x), Element::Pwl(y))
        }
        SpaceTag::Product { factors } => {
            let mut xs = Vec::with_capacity(factors.len());
            let mut ys = Vec::with_capacity(factors.len());
            for f in factors {
                let (x, y) = sample_dominated_pair_in(f, rng);
                xs.push(x);
                ys.push(y);
            }
            (Element::Product(xs), Element::Product(ys))
        }
    }
}

/// A neighborhood of zero. Balls live in normed tags; product constraints
/// restrict finitely many factors of a product and leave the rest free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NeighborhoodRepr", into = "NeighborhoodRepr")]
pub enum NeighborhoodSpec {
    Ball { radius: Rational },
    ProductConstraints { constraints: BTreeMap<usize, NeighborhoodSpec> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum NeighborhoodRepr {
    Ball { radius: String },
    ProductConstraints { constraints: BTreeMap<usize, NeighborhoodRepr> },
}

impl TryFrom<NeighborhoodRepr> for NeighborhoodSpec {
    type Error = Error;
    fn try_from(repr: NeighborhoodRepr) -> Result<Self> {
        let spec = match repr {
            NeighborhoodRepr::Ball { radius } => {
                NeighborhoodSpec::Ball { radius: parse_rational(&radius)? }
            }
            NeighborhoodRepr::ProductConstraints { constraints } => {
                NeighborhoodSpec::ProductConstraints {
                    constraints: constraints
                        .into_iter()
                        .map(|(k, v)| Ok((k, NeighborhoodSpec::try_from(v)?)))
                        .collect::<Result<BTreeMap<_, _>>>()?,
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<NeighborhoodSpec> for NeighborhoodRepr {
    fn from(spec: NeighborhoodSpec) -> NeighborhoodRepr {
        match spec {
            NeighborhoodSpec::Ball { radius } => {
                NeighborhoodRepr::Ball { radius: format_rational(&radius) }
            }
            NeighborhoodSpec::ProductConstraints { constraints } => {
                NeighborhoodRepr::ProductConstraints {
                    constraints: constraints
                        .into_iter()
                        .map(|(k, v)| (k, NeighborhoodRepr::from(v)))
                        .collect(),
                }
            }
        }
    }
}

impl NeighborhoodSpec {
    pub fn unit_ball() -> Self {
        NeighborhoodSpec::Ball { radius: rat(1, 1) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NeighborhoodSpec::Ball { radius } => {
                if *radius <= Rational::zero() {
                    return Err(Error::InvalidNeighborhood(format!(
                        "ball radius must be strictly positive, got {}",
                        format_rational(radius)
                    )));
                }
            }
            NeighborhoodSpec::ProductConstraints { constraints } => {
                for v in constraints.values() {
                    v.validate()?;
                }
            }
        }
        Ok(())
    }
}

/// A set whose boundedness is in question: either an explicit finite list or
/// a one-parameter family evaluated at growing indices.
#[derive(Clone)]
pub enum BoundedSet {
    Finite(Vec<Element>),
    Family(ParametricFamily),
}

/// A named one-parameter family k ↦ x_k, k ≥ 1.
#[derive(Clone)]
pub struct ParametricFamily {
    pub name: String,
    pub generator: Option<Rc<dyn Fn(u32) -> Element>>,
}

impl std::fmt::Debug for ParametricFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametricFamily")
            .field("name", &self.name)
            .field("generator", &self.generator.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl ParametricFamily {
    pub fn new(name: impl Into<String>, generator: impl Fn(u32) -> Element + 'static) -> Self {
        Self { name: name.into(), generator: Some(Rc::new(generator)) }
    }

    pub fn opaque(name: impl Into<String>) -> Self {
        Self { name: name.into(), generator: None }
    }
}

/// Indices at which families are inspected.
pub const FAMILY_CHECKPOINTS: [u32; 11] = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024];

/// Outcome of a boundedness question, with evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BoundednessVerdict {
    /// The set fits inside `scale` copies of the neighborhood.
    Bounded { scale: String },
    /// Norms along the family keep growing; the curve lists (index, norm).
    Unbounded { curve: Vec<(u32, String)>, witness_index: u32 },
}

/// Decides whether a set is absorbed by a neighborhood: is there a finite
/// `scale` with the set inside `scale` copies of it?
///
/// Finite sets in normed tags always are; the answer carries the least such
/// scale. Families are inspected at the fixed checkpoints and judged by
/// whether the running maximum has stabilized; a still-growing maximum at
/// the final checkpoint counts as unbounded, with the norm curve as the
/// certificate. Product neighborhoods only constrain the factors they name,
/// so only those projections matter; with no constrained factor at all the
/// whole space absorbs everything and scale zero is reported.
pub fn is_bounded_in(
    set: &BoundedSet,
    tag: &SpaceTag,
    nbhd: &NeighborhoodSpec,
) -> Result<BoundednessVerdict> {
    nbhd.validate()?;
    match (tag, nbhd) {
        (SpaceTag::Product { factors }, NeighborhoodSpec::ProductConstraints { constraints }) => {
            for j in constraints.keys() {
                if *j >= factors.len() {
                    return Err(Error::InvalidNeighborhood(format!(
                        "constraint names factor {} but the product has {}",
                        j,
                        factors.len()
                    )));
                }
            }
            let mut worst = Rational::zero();
            for (j, sub) in constraints {
                let projected = project_set(set, *j)?;
                match is_bounded_in(&projected, &factors[*j], sub)? {
                    BoundednessVerdict::Bounded { scale } => {
                        worst = rat_max(&worst, &parse_rational(&scale)?);
                    }
                    unbounded => return Ok(unbounded),
                }
            }
            Ok(BoundednessVerdict::Bounded { scale: format_rational(&worst) })
        }
        (SpaceTag::Product { .. }, NeighborhoodSpec::Ball { .. }) => Err(Error::ProductHasNoNorm),
        (_, NeighborhoodSpec::ProductConstraints { .. }) => Err(Error::InvalidNeighborhood(
            "factor constraints only apply to product spaces".into(),
        )),
        (_, NeighborhoodSpec::Ball { radius }) => bounded_in_ball(set, tag, radius),
    }
}

fn bounded_in_ball(
    set: &BoundedSet,
    tag: &SpaceTag,
    radius: &Rational,
) -> Result<BoundednessVerdict> {
    match set {
        BoundedSet::Finite(items) => {
            if items.is_empty() {
                return Err(Error::EmptySet);
            }
            let mut worst = Rational::zero();
            for x in items {
                worst = rat_max(&worst, &norm(x, tag)?);
            }
            Ok(BoundednessVerdict::Bounded { scale: format_rational(&(worst / radius)) })
        }
        BoundedSet::Family(family) => {
            let Some(generator) = &family.generator else {
                return Err(Error::FamilyNotComputable);
            };
            let mut curve = Vec::with_capacity(FAMILY_CHECKPOINTS.len());
            let mut running = Rational::zero();
            let mut peaks = Vec::with_capacity(FAMILY_CHECKPOINTS.len());
            let mut witness_index = FAMILY_CHECKPOINTS[0];
            for &k in FAMILY_CHECKPOINTS.iter() {
                let x = generator(k);
                let n = norm(&x, tag)?;
                if n > running {
                    running = n.clone();
                    witness_index = k;
                }
                curve.push((k, format_rational(&n)));
                peaks.push(running.clone());
            }
            let len = peaks.len();
            if peaks[len - 1] == peaks[len - 2] {
                Ok(BoundednessVerdict::Bounded {
                    scale: format_rational(&(peaks[len - 1].clone() / radius)),
                })
            } else {
                Ok(BoundednessVerdict::Unbounded { curve, witness_index })
            }
        }
    }
}

fn project_set(set: &BoundedSet, j: usize) -> Result<BoundedSet> {
    match set {
        BoundedSet::Finite(items) => {
            let projected = items
                .iter()
                .map(|x| x.project(j).cloned())
                .collect::<Result<Vec<_>>>()?;
            Ok(BoundedSet::Finite(projected))
        }
        BoundedSet::Family(family) => {
            let Some(generator) = &family.generator else {
                return Err(Error::FamilyNotComputable);
            };
            let generator = Rc::clone(generator);
            Ok(BoundedSet::Family(ParametricFamily::new(
                format!("{}[{}]", family.name, j),
                move |k| {
                    generator(k)
                        .project(j)
                        .expect("family elements conform to the product")
                        .clone()
                },
            )))
        }
    }
}

/// Outcome of a solidity check on a tagged norm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolidityOutcome {
    pub holds: bool,
    pub trials: u32,
    /// A dominated pair whose norms compare the wrong way, if one was found.
    pub witness: Option<SolidityWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolidityWitness {
    pub small: Element,
    pub big: Element,
    pub small_norm: String,
    pub big_norm: String,
}

/// Checks the norm of a tagged space for solidity by sampling dominated
/// pairs |x| ≤ |y| and verifying the norms compare the same way.
pub fn solidity_check(tag: &SpaceTag, spec: &SampleSpec) -> Result<SolidityOutcome> {
    solidity_check_with(tag, spec, |x| norm(x, tag))
}

/// Same sampling discipline, arbitrary functional. Lets tests demonstrate
/// that a non-solid functional is caught by the very same procedure.
pub fn solidity_check_with(
    tag: &SpaceTag,
    spec: &SampleSpec,
    functional: impl Fn(&Element) -> Result<Rational>,
) -> Result<SolidityOutcome> {
    if matches!(tag, SpaceTag::Product { .. }) {
        return Err(Error::ProductHasNoNorm);
    }
    let mut rng = spec.rng_for(&format!("solidity:{}", tag.describe()));
    for trial in 0..spec.trials {
        let (x, y) = sample_dominated_pair_in(tag, &mut rng);
        debug_assert!(x.abs().leq(&y.abs()).unwrap());
        let nx = functional(&x)?;
        let ny = functional(&y)?;
        if nx > ny {
            return Ok(SolidityOutcome {
                holds: false,
                trials: trial + 1,
                witness: Some(SolidityWitness {
                    small_norm: format_rational(&nx),
                    big_norm: format_rational(&ny),
                    small: x,
                    big: y,
                }),
            });
        }
    }
    Ok(SolidityOutcome { holds: true, trials: spec.trials, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn coord(v: &[i64]) -> Element {
        Element::Coord(LatticeElement::from_ints(v))
    }

    #[test]
    fn norms_on_coordinate_spaces() {
        let x = coord(&[3, -4]);
        assert_eq!(norm(&x, &SpaceTag::SeqL1 { dim: 2 }).unwrap(), int(7));
        assert_eq!(norm(&x, &SpaceTag::SeqLInf { dim: 2 }).unwrap(), int(4));
        let w = SpaceTag::WeightedL1 { weights: vec![rat(1, 2), int(2)] };
        assert_eq!(norm(&x, &w).unwrap(), rat(19, 2));
        assert!(norm(&x, &SpaceTag::SeqL1 { dim: 3 }).is_err());
    }

    #[test]
    fn norms_on_pwl_spaces() {
        let tent = Element::Pwl(PwlFunc::tent(4).unwrap());
        assert_eq!(norm(&tent, &SpaceTag::PwlSup).unwrap(), int(1));
        assert_eq!(norm(&tent, &SpaceTag::PwlL1).unwrap(), rat(1, 8));
        assert!(norm(&tent, &SpaceTag::SeqL1 { dim: 1 }).is_err());
    }

    #[test]
    fn product_has_no_norm() {
        let tag = SpaceTag::product(vec![
            SpaceTag::SeqL1 { dim: 1 },
            SpaceTag::SeqLInf { dim: 1 },
        ])
        .unwrap();
        let x = Element::Product(vec![coord(&[1]), coord(&[2])]);
        assert!(matches!(norm(&x, &tag), Err(Error::ProductHasNoNorm)));
    }

    #[test]
    fn tag_validation() {
        assert!(SpaceTag::SeqL1 { dim: 0 }.validate().is_err());
        assert!(SpaceTag::WeightedL1 { weights: vec![] }.validate().is_err());
        assert!(SpaceTag::WeightedL1 { weights: vec![int(0)] }.validate().is_err());
        assert!(SpaceTag::WeightedL1 { weights: vec![int(-1)] }.validate().is_err());
        assert!(SpaceTag::product(vec![]).is_err());
        assert!(SpaceTag::product(vec![SpaceTag::PwlSup]).is_ok());
    }

    #[test]
    fn tag_serde_round_trip() {
        let tag = SpaceTag::product(vec![
            SpaceTag::SeqL1 { dim: 2 },
            SpaceTag::WeightedL1 { weights: vec![rat(1, 2), int(3)] },
            SpaceTag::PwlSup,
        ])
        .unwrap();
        let json = serde_json::to_string(&tag).unwrap();
        let back: SpaceTag = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tag);
        assert!(json.contains(r#""kind":"product""#));
        assert!(json.contains(r#""weights":["1/2","3"]"#));
        // invalid tags are rejected on the way in
        assert!(serde_json::from_str::<SpaceTag>(r#"{"kind":"seq_l1","dim":0}"#).is_err());
        assert!(
            serde_json::from_str::<SpaceTag>(r#"{"kind":"weighted_l1","weights":["-1"]}"#)
                .is_err()
        );
    }

    #[test]
    fn element_ops_respect_shape() {
        let a = Element::Product(vec![coord(&[1, 2]), coord(&[3])]);
        let b = Element::Product(vec![coord(&[0, 5]), coord(&[-1])]);
        let j = a.join(&b).unwrap();
        assert_eq!(j, Element::Product(vec![coord(&[1, 5]), coord(&[3])]));
        assert!(a.leq(&j).unwrap());
        assert!(b.leq(&j).unwrap());
        let tent = Element::Pwl(PwlFunc::tent(2).unwrap());
        assert!(a.join(&tent).is_err());
        assert!(coord(&[1]).join(&coord(&[1, 2])).is_err());
    }

    #[test]
    fn conformance() {
        let tag = SpaceTag::product(vec![SpaceTag::SeqL1 { dim: 2 }, SpaceTag::PwlSup]).unwrap();
        let good = Element::Product(vec![coord(&[1, 2]), Element::Pwl(PwlFunc::tent(2).unwrap())]);
        let bad = Element::Product(vec![coord(&[1]), Element::Pwl(PwlFunc::tent(2).unwrap())]);
        assert!(good.conforms_to(&tag));
        assert!(!bad.conforms_to(&tag));
        assert!(!good.conforms_to(&SpaceTag::PwlSup));
        assert_eq!(tag.flat_dim(), None);
        let flat = SpaceTag::product(vec![
            SpaceTag::SeqL1 { dim: 2 },
            SpaceTag::SeqLInf { dim: 3 },
        ])
        .unwrap();
        assert_eq!(flat.flat_dim(), Some(5));
    }

    #[test]
    fn finite_sets_are_bounded_with_least_scale() {
        let tag = SpaceTag::SeqLInf { dim: 2 };
        let set = BoundedSet::Finite(vec![coord(&[1, -3]), coord(&[2, 2])]);
        let v = is_bounded_in(&set, &tag, &NeighborhoodSpec::unit_ball()).unwrap();
        assert_eq!(v, BoundednessVerdict::Bounded { scale: "3".into() });
        // doubling the radius halves the scale
        let v = is_bounded_in(&set, &tag, &NeighborhoodSpec::Ball { radius: int(2) }).unwrap();
        assert_eq!(v, BoundednessVerdict::Bounded { scale: "3/2".into() });
    }

    #[test]
    fn growing_family_is_flagged_unbounded() {
        let tag = SpaceTag::SeqLInf { dim: 1 };
        let family = ParametricFamily::new("linear-growth", |k| {
            Element::Coord(LatticeElement::new(vec![int(k as i64)]).unwrap())
        });
        let v = is_bounded_in(&BoundedSet::Family(family), &tag, &NeighborhoodSpec::unit_ball())
            .unwrap();
        match v {
            BoundednessVerdict::Unbounded { curve, witness_index } => {
                assert_eq!(witness_index, 1024);
                assert_eq!(curve.len(), FAMILY_CHECKPOINTS.len());
                assert_eq!(curve.last().unwrap(), &(1024u32, "1024".to_string()));
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn stabilized_family_is_bounded() {
        let tag = SpaceTag::SeqLInf { dim: 1 };
        let family = ParametricFamily::new("capped", |k| {
            let v = std::cmp::min(k, 3) as i64;
            Element::Coord(LatticeElement::new(vec![int(v)]).unwrap())
        });
        let v = is_bounded_in(&BoundedSet::Family(family), &tag, &NeighborhoodSpec::unit_ball())
            .unwrap();
        assert_eq!(v, BoundednessVerdict::Bounded { scale: "3".into() });
    }

    #[test]
    fn opaque_family_is_not_computable() {
        let tag = SpaceTag::SeqLInf { dim: 1 };
        let family = ParametricFamily::opaque("mystery");
        let err = is_bounded_in(&BoundedSet::Family(family), &tag, &NeighborhoodSpec::unit_ball())
            .unwrap_err();
        assert!(matches!(err, Error::FamilyNotComputable));
    }

    #[test]
    fn product_constraints_check_named_factors_only() {
        let tag = SpaceTag::product(vec![
            SpaceTag::SeqLInf { dim: 1 },
            SpaceTag::SeqLInf { dim: 1 },
        ])
        .unwrap();
        // second factor grows, first is capped
        let family = ParametricFamily::new("half-growth", |k| {
            Element::Product(vec![
                Element::Coord(LatticeElement::new(vec![int(1)]).unwrap()),
                Element::Coord(LatticeElement::new(vec![int(k as i64)]).unwrap()),
            ])
        });
        let constrain_first = NeighborhoodSpec::ProductConstraints {
            constraints: [(0usize, NeighborhoodSpec::unit_ball())].into_iter().collect(),
        };
        let v = is_bounded_in(&BoundedSet::Family(family.clone()), &tag, &constrain_first)
            .unwrap();
        assert_eq!(v, BoundednessVerdict::Bounded { scale: "1".into() });
        let constrain_second = NeighborhoodSpec::ProductConstraints {
            constraints: [(1usize, NeighborhoodSpec::unit_ball())].into_iter().collect(),
        };
        let v = is_bounded_in(&BoundedSet::Family(family), &tag, &constrain_second).unwrap();
        assert!(matches!(v, BoundednessVerdict::Unbounded { .. }));
        // out of range constraint index
        let bogus = NeighborhoodSpec::ProductConstraints {
            constraints: [(7usize, NeighborhoodSpec::unit_ball())].into_iter().collect(),
        };
        let set = BoundedSet::Finite(vec![Element::Product(vec![coord(&[0]), coord(&[0])])]);
        assert!(is_bounded_in(&set, &tag, &bogus).is_err());
    }

    #[test]
    fn ball_on_product_and_constraints_on_norm_space_are_errors() {
        let tag = SpaceTag::product(vec![SpaceTag::SeqL1 { dim: 1 }]).unwrap();
        let set = BoundedSet::Finite(vec![Element::Product(vec![coord(&[1])])]);
        assert!(matches!(
            is_bounded_in(&set, &tag, &NeighborhoodSpec::unit_ball()),
            Err(Error::ProductHasNoNorm)
        ));
        let flat = BoundedSet::Finite(vec![coord(&[1])]);
        let constraints = NeighborhoodSpec::ProductConstraints { constraints: BTreeMap::new() };
        assert!(is_bounded_in(&flat, &SpaceTag::SeqL1 { dim: 1 }, &constraints).is_err());
    }

    #[test]
    fn invalid_radius_rejected() {
        let set = BoundedSet::Finite(vec![coord(&[1])]);
        let err = is_bounded_in(
            &set,
            &SpaceTag::SeqL1 { dim: 1 },
            &NeighborhoodSpec::Ball { radius: int(0) },
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidNeighborhood(_)));
        assert!(
            serde_json::from_str::<NeighborhoodSpec>(r#"{"kind":"ball","radius":"-1"}"#).is_err()
        );
    }

    #[test]
    fn canonical_norms_are_solid() {
        let spec = SampleSpec::default();
        for tag in [
            SpaceTag::SeqL1 { dim: 4 },
            SpaceTag::SeqLInf { dim: 4 },
            SpaceTag::WeightedL1 { weights: vec![rat(1, 2), int(1), int(3)] },
            SpaceTag::PwlSup,
            SpaceTag::PwlL1,
        ] {
            let outcome = solidity_check(&tag, &spec).unwrap();
            assert!(outcome.holds, "norm on {} is solid", tag.describe());
            assert_eq!(outcome.trials, spec.trials);
        }
    }

    #[test]
    fn non_solid_functional_is_caught() {
        // |x_0 - x_1| is a norm-like functional that ignores domination
        let tag = SpaceTag::SeqLInf { dim: 2 };
        let outcome = solidity_check_with(&tag, &SampleSpec::default(), |x| match x {
            Element::Coord(v) => Ok(abs(&(v.coord(0) - v.coord(1)))),
            _ => Err(Error::ShapeMismatch("coordinate elements only".into())),
        })
        .unwrap();
        assert!(!outcome.holds);
        let w = outcome.witness.expect("failure carries a witness");
        // the recorded pair really is dominated yet flips the comparison
        assert!(w.small.abs().leq(&w.big.abs()).unwrap());
        assert!(parse_rational(&w.small_norm).unwrap() > parse_rational(&w.big_norm).unwrap());
    }

    #[test]
    fn element_serde_round_trip() {
        let x = Element::Product(vec![
            coord(&[1, -2]),
            Element::Pwl(PwlFunc::tent(2).unwrap()),
        ]);
        let json = serde_json::to_string(&x).unwrap();
        let back: Element = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
        assert!(json.contains("product"));
        assert!(json.contains("coord"));
        assert!(json.contains("pwl"));
    }
}
