//! Executable probes and certificates: property checks that end in a
//! verdict backed by exact witnesses and curves.
//!
//! Claims about infinite-dimensional behaviour are phrased as
//! parameter-indexed certificate curves (defect(n), slope(k), gap(n)) with
//! explicit witnesses; a verdict is always about the curve that was
//! computed, never about an infinite object. Every report records the seed
//! and a hash of the probe parameters, and identical configuration yields a
//! byte-identical report.

mod probes;

pub use probes::*;

use std::rc::Rc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::LatticeElement;
use crate::pwl::PwlFunc;
use crate::rational::{format_rational, int, pow2_neg, rat, Rational};
use crate::spaces::{Element, SpaceTag};

/// Outcome of a probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// The uniform result record every probe produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe_name: String,
    pub verdict: Verdict,
    /// Serialized elements, operators, or structured evidence.
    pub witnesses: Vec<serde_json::Value>,
    /// Exact certificate curve: (parameter, rational value).
    pub curve: Option<Vec<(u32, String)>>,
    /// Provenance and scale-limitation notes.
    pub notes: String,
    pub seed: u64,
    pub config_hash: String,
}

impl ProbeReport {
    /// Builds a report, enforcing the failure-needs-witness invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        probe_name: impl Into<String>,
        verdict: Verdict,
        witnesses: Vec<serde_json::Value>,
        curve: Option<Vec<(u32, Rational)>>,
        notes: impl Into<String>,
        seed: u64,
        config_hash: String,
    ) -> Self {
        let report = Self {
            probe_name: probe_name.into(),
            verdict,
            witnesses,
            curve: curve.map(|c| c.into_iter().map(|(k, v)| (k, format_rational(&v))).collect()),
            notes: notes.into(),
            seed,
            config_hash,
        };
        assert!(
            report.verdict != Verdict::Fails || !report.witnesses.is_empty(),
            "a failing report must carry a witness"
        );
        report
    }

    /// The curve with values parsed back to exact rationals.
    pub fn curve_values(&self) -> Result<Vec<(u32, Rational)>> {
        let Some(curve) = &self.curve else {
            return Ok(Vec::new());
        };
        curve
            .iter()
            .map(|(k, v)| Ok((*k, crate::rational::parse_rational(v)?)))
            .collect()
    }

    /// Markdown rendering: heading, verdict, notes, curve table, witnesses.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("## {}\n\n", self.probe_name));
        let verdict = match self.verdict {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        };
        out.push_str(&format!("- verdict: **{verdict}**\n"));
        out.push_str(&format!("- seed: `{:#x}`\n", self.seed));
        out.push_str(&format!("- config hash: `{}`\n\n", self.config_hash));
        if !self.notes.is_empty() {
            out.push_str(&self.notes);
            out.push_str("\n\n");
        }
        if let Some(curve) = &self.curve {
            out.push_str("| parameter | value |\n|---:|---:|\n");
            for (k, v) in curve {
                out.push_str(&format!("| {k} | {v} |\n"));
            }
            out.push('\n');
        }
        if !self.witnesses.is_empty() {
            out.push_str("Witnesses:\n\n");
            for w in &self.witnesses {
                out.push_str("```json\n");
                out.push_str(&canonical_json(w));
                out.push_str("\n```\n");
            }
            out.push('\n');
        }
        out
    }
}

/// Canonical JSON: object keys sorted recursively, no whitespace. The same
/// value always prints the same bytes, which makes hashes meaningful.
pub fn canonical_json(value: &serde_json::Value) -> String {
    fn canonicalize(value: &serde_json::Value) -> serde_json::Value {
        match value {
            serde_json::Value::Object(map) => {
                let sorted: std::collections::BTreeMap<String, serde_json::Value> =
                    map.iter().map(|(k, v)| (k.clone(), canonicalize(v))).collect();
                serde_json::to_value(sorted).expect("btreemap serializes")
            }
            serde_json::Value::Array(items) => {
                serde_json::Value::Array(items.iter().map(canonicalize).collect())
            }
            other => other.clone(),
        }
    }
    serde_json::to_string(&canonicalize(value)).expect("canonical value serializes")
}

/// Hash of a parameter blob: SHA-256 of its canonical JSON, hex encoded.
pub fn config_hash_of(value: &serde_json::Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_json(value).as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Claimed direction of a one-parameter family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderClaim {
    Increasing,
    Decreasing,
}

/// Built-in family shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Tents,
    Ramps,
    C0Tails,
    Custom,
}

/// A named one-parameter family k ↦ u_k with a claimed direction, a home
/// space, and an optional uniform norm bound. The probes verify the claim
/// lazily and treat its failure as reported evidence, not trust.
#[derive(Clone)]
pub struct SequenceFamily {
    pub kind: FamilyKind,
    pub space: SpaceTag,
    pub order_claim: OrderClaim,
    pub norm_bound: Option<Rational>,
    /// Human text identifying the symbolic limit when the finite stages
    /// never reach it.
    pub limit_note: Option<String>,
    generator: Rc<dyn Fn(u32) -> Element>,
}

impl std::fmt::Debug for SequenceFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SequenceFamily")
            .field("kind", &self.kind)
            .field("space", &self.space.describe())
            .field("order_claim", &self.order_claim)
            .field("norm_bound", &self.norm_bound.as_ref().map(format_rational))
            .finish_non_exhaustive()
    }
}

impl SequenceFamily {
    pub fn custom(
        space: SpaceTag,
        order_claim: OrderClaim,
        norm_bound: Option<Rational>,
        generator: impl Fn(u32) -> Element + 'static,
    ) -> Self {
        Self {
            kind: FamilyKind::Custom,
            space,
            order_claim,
            norm_bound,
            limit_note: None,
            generator: Rc::new(generator),
        }
    }

    /// Tents of height one hugging the left endpoint: unit uniform norm at
    /// every index, pointwise infimum zero away from the endpoint.
    pub fn tents() -> Self {
        Self {
            kind: FamilyKind::Tents,
            space: SpaceTag::PwlSup,
            order_claim: OrderClaim::Decreasing,
            norm_bound: Some(int(1)),
            limit_note: Some(
                "every continuous lower bound of the family is dominated by zero, \
                 so the order infimum is zero even though the value at the left \
                 endpoint stays one at every stage"
                    .into(),
            ),
            generator: Rc::new(|k| Element::Pwl(PwlFunc::tent(k.max(1)).expect("k >= 1"))),
        }
    }

    /// Ramps rising to one ever faster: unit norm, slope k at stage k.
    pub fn ramps() -> Self {
        Self {
            kind: FamilyKind::Ramps,
            space: SpaceTag::PwlSup,
            order_claim: OrderClaim::Increasing,
            norm_bound: Some(int(1)),
            limit_note: Some(
                "the pointwise limit jumps at the left endpoint, so no continuous \
                 function tops the family minimally"
                    .into(),
            ),
            generator: Rc::new(|k| Element::Pwl(PwlFunc::ramp(k.max(1)).expect("k >= 1"))),
        }
    }

    /// Tails of the summable sequence 2^{-i} inside a dim-dimensional
    /// truncation: u_k keeps coordinates k..=dim and zeroes the head.
    pub fn c0_tails(dim: usize) -> Self {
        Self {
            kind: FamilyKind::C0Tails,
            space: SpaceTag::SeqLInf { dim },
            order_claim: OrderClaim::Decreasing,
            norm_bound: Some(rat(1, 2)),
            limit_note: Some("the tails vanish coordinatewise; the infimum is zero".into()),
            generator: Rc::new(move |k| {
                let coords = (1..=dim)
                    .map(|i| if (i as u32) >= k { pow2_neg(i as u32) } else { Rational::from_integer(0.into()) })
                    .collect();
                Element::Coord(LatticeElement::new(coords).expect("dim positive"))
            }),
        }
    }

    /// Increasing coordinate family that stabilizes: u_k = min(k, at)/at
    /// times the ones vector.
    pub fn stabilizing(dim: usize, at: u32) -> Self {
        Self::custom(
            SpaceTag::SeqLInf { dim },
            OrderClaim::Increasing,
            Some(int(1)),
            move |k| {
                let t = rat(k.min(at) as i64, at as i64);
                Element::Coord(
                    LatticeElement::new(vec![t; dim]).expect("dim positive"),
                )
            },
        )
    }

    /// Increasing geometric family (1 − 2^{-k}) · ones: never stabilizes,
    /// supremum identified symbolically as the ones vector.
    pub fn geometric(dim: usize) -> Self {
        let mut fam = Self::custom(
            SpaceTag::SeqLInf { dim },
            OrderClaim::Increasing,
            Some(int(1)),
            move |k| {
                let t = int(1) - pow2_neg(k);
                Element::Coord(LatticeElement::new(vec![t; dim]).expect("dim positive"))
            },
        );
        fam.limit_note =
            Some("coordinates approach one; the symbolic limit is the ones vector".into());
        fam
    }

    pub fn term(&self, k: u32) -> Element {
        (self.generator)(k)
    }
}

/// Largest sampled-set size whose subset joins are enumerated exactly.
pub const CLOSURE_SET_MAX: usize = 10;

/// Maximum norm over all finite joins of nonempty subsets of `elements`,
/// i.e. over the suprema closure, without materializing it: subset joins
/// are folded over bitmasks with memoization. Set size is capped.
pub fn closure_norm_max(elements: &[Element], tag: &SpaceTag) -> Result<Rational> {
    if elements.is_empty() {
        return Err(Error::EmptySet);
    }
    if elements.len() > CLOSURE_SET_MAX {
        return Err(Error::OracleGuard { max: CLOSURE_SET_MAX, got: elements.len() });
    }
    let n = elements.len();
    let mut joins: Vec<Option<Element>> = vec![None; 1 << n];
    let mut best: Option<Rational> = None;
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let joined = if rest == 0 {
            elements[low].clone()
        } else {
            joins[rest].as_ref().expect("smaller masks filled").join(&elements[low])?
        };
        let value = crate::spaces::norm(&joined, tag)?;
        best = Some(match best {
            None => value,
            Some(b) => crate::rational::max(&b, &value),
        });
        joins[mask] = Some(joined);
    }
    Ok(best.expect("at least one subset"))
}
