//! The probe battery. Each probe validates its inputs, computes exact
//! evidence, and returns a `ProbeReport` whose verdict is a statement about
//! the computed curve or witnesses, never about an idealized object.

use serde_json::json;

use crate::error::{Error, Result};
use crate::lattice::LatticeElement;
use crate::operators::{
    nb_bounded_check, operator_seq_monotone_check, MatrixOp, MonotoneVerdict, NbVerdict,
    OperatorSeq, RankOneOp,
};
use crate::pwl::PwlFunc;
use crate::rational::{format_rational, int, max as rat_max, pow2_neg, Rational};
use crate::sampling::SampleSpec;
use crate::spaces::{
    norm, sample_in, solidity_check, Element, NeighborhoodSpec, SpaceTag,
};

use super::{
    closure_norm_max, config_hash_of, OrderClaim, ProbeReport, SequenceFamily, Verdict,
    CLOSURE_SET_MAX,
};

fn ones(dim: usize) -> LatticeElement {
    LatticeElement::new(vec![int(1); dim]).expect("dim positive")
}

fn element_json(x: &Element) -> serde_json::Value {
    serde_json::to_value(x).expect("elements serialize")
}

fn params_err(probe: &str, path: &str, detail: impl Into<String>) -> Error {
    Error::ProbeParams { probe: probe.into(), path: path.into(), detail: detail.into() }
}

/// The AM ratio of a positive pair: norm of the join over the larger of the
/// two norms. Solid norms keep it at least one; it equals one identically
/// exactly when the norm treats joins the way a uniform norm does.
pub fn am_ratio(x: &Element, y: &Element, tag: &SpaceTag) -> Result<Rational> {
    if !x.is_positive() || !y.is_positive() {
        return Err(Error::NotPositive);
    }
    if x.is_zero() && y.is_zero() {
        return Err(Error::BothZero);
    }
    let join_norm = norm(&x.join(y)?, tag)?;
    let denom = rat_max(&norm(x, tag)?, &norm(y, tag)?);
    Ok(join_norm / denom)
}

/// The canonical pair that separates uniform-style norms from summing ones:
/// two disjointly supported positive unit vectors.
fn canonical_am_pair(tag: &SpaceTag) -> Option<(Element, Element)> {
    match tag {
        SpaceTag::SeqL1 { dim } | SpaceTag::SeqLInf { dim } => {
            if *dim >= 2 {
                Some((
                    Element::Coord(LatticeElement::basis(0, *dim).expect("dim fits")),
                    Element::Coord(LatticeElement::basis(1, *dim).expect("dim fits")),
                ))
            } else {
                None
            }
        }
        SpaceTag::WeightedL1 { weights } => {
            let dim = weights.len();
            if dim >= 2 {
                Some((
                    Element::Coord(LatticeElement::basis(0, dim).expect("dim fits")),
                    Element::Coord(LatticeElement::basis(1, dim).expect("dim fits")),
                ))
            } else {
                None
            }
        }
        SpaceTag::PwlSup | SpaceTag::PwlL1 => Some((
            Element::Pwl(PwlFunc::unit_l1_bump(1, 2).expect("valid bump")),
            Element::Pwl(PwlFunc::unit_l1_bump(2, 2).expect("valid bump")),
        )),
        SpaceTag::Product { .. } => None,
    }
}

/// Samples positive pairs and checks the AM identity ratio == 1 on each.
/// The canonical disjoint pair is always tried first, so norms that sum
/// disjoint pieces fail deterministically.
pub fn am_identity_check(tag: &SpaceTag, spec: &SampleSpec) -> Result<ProbeReport> {
    if matches!(tag, SpaceTag::Product { .. }) {
        return Err(params_err("am_identity", "tag", "needs a norm tag, not a product"));
    }
    tag.validate()?;
    let probe_name = format!("am_identity[{}]", tag.describe());
    let config_hash = config_hash_of(&json!({
        "probe": "am_identity",
        "tag": tag,
        "trials": spec.trials,
    }));
    let mut rng = spec.rng_for(&probe_name);
    let mut pairs: Vec<(Element, Element)> = Vec::new();
    if let Some(canonical) = canonical_am_pair(tag) {
        pairs.push(canonical);
    }
    for _ in 0..spec.trials {
        let x = sample_in(tag, &mut rng).abs();
        let y = sample_in(tag, &mut rng).abs();
        if x.is_zero() && y.is_zero() {
            continue;
        }
        pairs.push((x, y));
    }
    let total = pairs.len();
    for (i, (x, y)) in pairs.into_iter().enumerate() {
        let ratio = am_ratio(&x, &y, tag)?;
        if ratio != int(1) {
            let witness = json!({
                "x": element_json(&x),
                "y": element_json(&y),
                "ratio": format_rational(&ratio),
                "pair_index": i,
            });
            return Ok(ProbeReport::new(
                probe_name,
                Verdict::Fails,
                vec![witness],
                None,
                format!(
                    "the join of the witness pair has norm {} times the larger \
                     of the two norms; a single inflated pair refutes the \
                     identity on this norm",
                    format_rational(&ratio)
                ),
                spec.seed,
                config_hash,
            ));
        }
    }
    Ok(ProbeReport::new(
        probe_name,
        Verdict::Holds,
        vec![],
        None,
        format!(
            "norm(x ∨ y) == max(norm(x), norm(y)) held exactly on {total} positive \
             pairs (the canonical disjoint pair first, then sampled ones)"
        ),
        spec.seed,
        config_hash,
    ))
}

/// Which one-parameter run of spaces the defect curve walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectFamily {
    /// Summed-norm coordinate spaces of growing dimension.
    SeqL1,
    /// Uniform-norm coordinate spaces of growing dimension.
    SeqLInf,
    /// The integral norm on piecewise-linear functions with n disjoint
    /// unit-integral tents as the canonical bounded set.
    PwlL1Bumps,
}

impl DefectFamily {
    fn tag(&self, n: usize) -> SpaceTag {
        match self {
            DefectFamily::SeqL1 => SpaceTag::SeqL1 { dim: n },
            DefectFamily::SeqLInf => SpaceTag::SeqLInf { dim: n },
            DefectFamily::PwlL1Bumps => SpaceTag::PwlL1,
        }
    }

    /// The canonical bounded set in the unit ball at parameter n, together
    /// with its full join. Positivity makes the closure maximum equal the
    /// norm of the full join: solid norms are monotone on positives, and
    /// every subset join is dominated by the join of everything.
    fn canonical_set(&self, n: usize) -> (Vec<Element>, Element) {
        match self {
            DefectFamily::SeqL1 | DefectFamily::SeqLInf => {
                let set: Vec<Element> = (0..n)
                    .map(|i| Element::Coord(LatticeElement::basis(i, n).expect("i < n")))
                    .collect();
                (set, Element::Coord(ones(n)))
            }
            DefectFamily::PwlL1Bumps => {
                let set: Vec<Element> = (1..=n)
                    .map(|i| {
                        Element::Pwl(
                            PwlFunc::unit_l1_bump(i as u32, n as u32).expect("1 <= i <= n"),
                        )
                    })
                    .collect();
                let top = set
                    .iter()
                    .skip(1)
                    .try_fold(set[0].clone(), |acc, b| acc.join(b))
                    .expect("same shape");
                (set, top)
            }
        }
    }
}

/// Walks growing parameters n, measuring how far joins escape the unit
/// ball: defect(n) is the largest norm reached by the suprema closure of a
/// bounded set sampled inside the unit ball, the canonical disjoint witness
/// set always included.
pub fn am_defect_curve(
    family: DefectFamily,
    n_range: &[usize],
    spec: &SampleSpec,
) -> Result<ProbeReport> {
    if n_range.is_empty() {
        return Err(params_err("am_defect_curve", "n_range", "needs at least one parameter"));
    }
    if n_range.windows(2).any(|w| w[0] >= w[1]) {
        return Err(params_err("am_defect_curve", "n_range", "parameters must strictly increase"));
    }
    if n_range[0] < 1 {
        return Err(params_err("am_defect_curve", "n_range", "parameters start at 1"));
    }
    let probe_name = format!("am_defect_curve[{:?}, n={:?}]", family, n_range);
    let config_hash = config_hash_of(&json!({
        "probe": "am_defect_curve",
        "family": family,
        "n_range": n_range,
        "trials": spec.trials,
    }));
    let mut rng = spec.rng_for(&probe_name);
    let sets_per_n = (spec.trials / 8).clamp(4, 32);
    let mut curve: Vec<(u32, Rational)> = Vec::new();
    let mut witness = json!(null);
    for &n in n_range {
        let tag = family.tag(n);
        let (canonical, top) = family.canonical_set(n);
        let mut defect = norm(&top, &tag)?;
        if witness.is_null() || defect > int(1) {
            witness = json!({
                "parameter": n,
                "canonical_set": canonical.iter().map(element_json).collect::<Vec<_>>(),
                "join": element_json(&top),
                "join_norm": format_rational(&defect),
            });
        }
        // sampled bounded sets: unit-ball elements, sizes small enough to
        // enumerate every subset join exactly
        for _ in 0..sets_per_n {
            let size = {
                use rand::Rng;
                rng.random_range(1..=n.min(CLOSURE_SET_MAX))
            };
            let mut set = Vec::with_capacity(size);
            for _ in 0..size {
                let raw = sample_in(&tag, &mut rng);
                let raw_norm = norm(&raw, &tag)?;
                let inside = if raw_norm > int(1) {
                    raw.scale(&(int(1) / &raw_norm))
                } else {
                    raw
                };
                set.push(inside);
            }
            let closure_max = closure_norm_max(&set, &tag)?;
            defect = rat_max(&defect, &closure_max);
        }
        curve.push((n as u32, defect));
    }
    let all_one = curve.iter().all(|(_, d)| *d == int(1));
    let grows = curve.last().expect("nonempty").1 > curve.first().expect("nonempty").1;
    let (verdict, notes) = if all_one {
        (
            Verdict::Holds,
            "every sampled bounded set, including the canonical disjoint one, keeps \
             its suprema closure inside the unit ball: the defect curve is constant 1"
                .to_string(),
        )
    } else if grows {
        (
            Verdict::Fails,
            "the defect grows along the parameter: the canonical disjoint witness \
             set alone pushes the join norm to the parameter value, so joins of \
             bounded sets escape every fixed ball"
                .to_string(),
        )
    } else {
        (
            Verdict::Inconclusive,
            "the defect exceeds 1 somewhere but does not grow across the sampled \
             parameters"
                .to_string(),
        )
    };
    let witnesses = if verdict == Verdict::Holds { vec![] } else { vec![witness] };
    Ok(ProbeReport::new(probe_name, verdict, witnesses, Some(curve), notes, spec.seed, config_hash))
}

/// Grid used for pointwise evidence on [0,1].
pub const PROBE_GRID_DENOMINATOR: u32 = 64;

fn family_norm(fam: &SequenceFamily, x: &Element) -> Result<Rational> {
    norm(x, &fam.space)
}

/// Checks a decreasing family for convergence in norm: the family must
/// decrease exactly; the verdict compares the final norm against the
/// threshold, a constant norm curve certifying the failure.
pub fn lebesgue_probe(
    fam: &SequenceFamily,
    upto: u32,
    threshold: &Rational,
    spec: &SampleSpec,
) -> Result<ProbeReport> {
    if fam.order_claim != OrderClaim::Decreasing {
        return Err(params_err("lebesgue", "family.order_claim", "needs a decreasing family"));
    }
    if upto < 2 {
        return Err(params_err("lebesgue", "upto", "needs at least two stages"));
    }
    if threshold <= &int(0) {
        return Err(params_err("lebesgue", "threshold", "must be strictly positive"));
    }
    let probe_name = format!("lebesgue[{:?}, {}]", fam.kind, fam.space.describe());
    let config_hash = config_hash_of(&json!({
        "probe": "lebesgue",
        "kind": format!("{:?}", fam.kind),
        "space": fam.space,
        "upto": upto,
        "threshold": format_rational(threshold),
    }));

    let terms: Vec<Element> = (1..=upto).map(|k| fam.term(k)).collect();
    for k in 1..terms.len() {
        if !terms[k].leq(&terms[k - 1])? {
            return Err(Error::OrderClaimViolated {
                index: (k + 1) as u32,
                detail: format!(
                    "stage {} is not below stage {}; the family is not decreasing",
                    k + 1,
                    k
                ),
            });
        }
    }

    let mut curve = Vec::with_capacity(terms.len());
    for (i, u) in terms.iter().enumerate() {
        curve.push(((i + 1) as u32, family_norm(fam, u)?));
    }

    // pointwise evidence from the running meet (== the last stage, the
    // family being decreasing)
    let bottom = &terms[terms.len() - 1];
    let pointwise = match bottom {
        Element::Pwl(f) => {
            let (at, min_v) = f.min_on_grid(PROBE_GRID_DENOMINATOR)?;
            let left = f.eval(&int(0))?;
            json!({
                "grid_denominator": PROBE_GRID_DENOMINATOR,
                "grid_minimum": format_rational(&min_v),
                "grid_minimum_at": format_rational(&at),
                "value_at_left_endpoint": format_rational(&left),
            })
        }
        Element::Coord(v) => {
            let zeros = v.coords().iter().filter(|c| *c == &int(0)).count();
            json!({
                "zero_coordinates": zeros,
                "dimension": v.dim(),
                "final_stage": element_json(bottom),
            })
        }
        Element::Product(_) => json!({ "final_stage": element_json(bottom) }),
    };

    let last_norm = &curve[curve.len() - 1].1;
    let constant = curve.iter().all(|(_, v)| v == last_norm);
    let mut notes = String::new();
    if let Some(ln) = &fam.limit_note {
        notes.push_str(ln);
        notes.push_str("\n\n");
    }
    let (verdict, witnesses) = if last_norm <= threshold {
        notes.push_str(&format!(
            "the final stage has norm {} within the threshold {}: order convergence \
             to zero is matched by norm convergence at this horizon",
            format_rational(last_norm),
            format_rational(threshold)
        ));
        (Verdict::Holds, vec![pointwise])
    } else if constant {
        notes.push_str(&format!(
            "the norm curve is constant at {} across all {} stages while the family \
             decreases with pointwise evidence of a zero infimum: a constant-norm \
             certificate that order convergence does not force norm convergence here",
            format_rational(last_norm),
            upto
        ));
        (
            Verdict::Fails,
            vec![json!({ "final_stage": element_json(bottom) }), pointwise],
        )
    } else {
        notes.push_str(
            "the norms decay but have not reached the threshold at this horizon; \
             no verdict either way",
        );
        (Verdict::Inconclusive, vec![pointwise])
    };
    Ok(ProbeReport::new(
        probe_name,
        verdict,
        witnesses,
        Some(curve),
        notes,
        spec.seed,
        config_hash,
    ))
}

/// Checks an increasing norm-bounded family for an exact supremum.
/// Coordinate families either stabilize (the supremum is reached and
/// reported) or stay short of it; piecewise-linear families may instead
/// certify failure through steepening running suprema: bounded norms with
/// slopes growing at least linearly mean no continuous function can top the
/// family minimally at this scale. The slope curve is that certificate.
pub fn levi_probe(fam: &SequenceFamily, upto: u32, spec: &SampleSpec) -> Result<ProbeReport> {
    if fam.order_claim != OrderClaim::Increasing {
        return Err(params_err("levi", "family.order_claim", "needs an increasing family"));
    }
    if upto < 2 {
        return Err(params_err("levi", "upto", "needs at least two stages"));
    }
    let probe_name = format!("levi[{:?}, {}]", fam.kind, fam.space.describe());
    let config_hash = config_hash_of(&json!({
        "probe": "levi",
        "kind": format!("{:?}", fam.kind),
        "space": fam.space,
        "upto": upto,
    }));

    let terms: Vec<Element> = (1..=upto).map(|k| fam.term(k)).collect();
    for k in 1..terms.len() {
        if !terms[k - 1].leq(&terms[k])? {
            return Err(Error::OrderClaimViolated {
                index: (k + 1) as u32,
                detail: format!(
                    "stage {} is not above stage {}; the family is not increasing",
                    k + 1,
                    k
                ),
            });
        }
    }

    // norm bound: escaping it voids the premise, which is a verdict, not an
    // error
    if let Some(bound) = &fam.norm_bound {
        for (i, u) in terms.iter().enumerate() {
            let n = family_norm(fam, u)?;
            if &n > bound {
                return Ok(ProbeReport::new(
                    probe_name,
                    Verdict::Inconclusive,
                    vec![json!({
                        "stage": i + 1,
                        "norm": format_rational(&n),
                        "bound": format_rational(bound),
                        "element": element_json(u),
                    })],
                    None,
                    "the family escapes its claimed norm bound, so the premise about \
                     bounded directed sets is vacuous here",
                    spec.seed,
                    config_hash,
                ));
            }
        }
    }

    // running suprema (exact joins)
    let mut sups = Vec::with_capacity(terms.len());
    let mut acc = terms[0].clone();
    sups.push(acc.clone());
    for u in &terms[1..] {
        acc = acc.join(u)?;
        sups.push(acc.clone());
    }
    let stabilized = sups[sups.len() - 1] == sups[sups.len() - 2];
    let top = &sups[sups.len() - 1];

    let mut notes = String::new();
    if let Some(ln) = &fam.limit_note {
        notes.push_str(ln);
        notes.push_str("\n\n");
    }

    match &fam.space {
        SpaceTag::PwlSup | SpaceTag::PwlL1 => {
            let mut slope_curve = Vec::with_capacity(sups.len());
            for (i, s) in sups.iter().enumerate() {
                let Element::Pwl(f) = s else {
                    return Err(params_err("levi", "family", "family does not match its space"));
                };
                slope_curve.push(((i + 1) as u32, f.max_abs_slope()));
            }
            let slopes_diverge =
                slope_curve.iter().all(|(k, s)| s >= &int(*k as i64));
            if stabilized {
                notes.push_str(
                    "the running suprema stabilized; the supremum is reached exactly \
                     and reported",
                );
                Ok(ProbeReport::new(
                    probe_name,
                    Verdict::Holds,
                    vec![json!({ "supremum": element_json(top) })],
                    Some(slope_curve),
                    notes,
                    spec.seed,
                    config_hash,
                ))
            } else if slopes_diverge {
                notes.push_str(
                    "norms stay within the bound while the steepest segment of the \
                     running supremum grows at least linearly with the stage: the \
                     slope curve is the certificate that no continuous supremum \
                     exists at this scale. Slope blowup under a uniform norm bound \
                     is the checkable shadow of the failure; non-existence itself is \
                     not decided mechanically",
                );
                Ok(ProbeReport::new(
                    probe_name,
                    Verdict::Fails,
                    vec![json!({ "final_running_supremum": element_json(top) })],
                    Some(slope_curve),
                    notes,
                    spec.seed,
                    config_hash,
                ))
            } else {
                notes.push_str(
                    "the running suprema neither stabilized nor steepened linearly; \
                     no verdict at this horizon",
                );
                Ok(ProbeReport::new(
                    probe_name,
                    Verdict::Inconclusive,
                    vec![json!({ "final_running_supremum": element_json(top) })],
                    Some(slope_curve),
                    notes,
                    spec.seed,
                    config_hash,
                ))
            }
        }
        _ => {
            let mut norm_curve = Vec::with_capacity(sups.len());
            for (i, s) in sups.iter().enumerate() {
                norm_curve.push(((i + 1) as u32, family_norm(fam, s)?));
            }
            if stabilized {
                notes.push_str(
                    "the running maxima stabilized: the coordinatewise supremum is \
                     exact and reported",
                );
                Ok(ProbeReport::new(
                    probe_name,
                    Verdict::Holds,
                    vec![json!({ "supremum": element_json(top) })],
                    Some(norm_curve),
                    notes,
                    spec.seed,
                    config_hash,
                ))
            } else {
                notes.push_str(
                    "the family is still rising at the horizon; the final running \
                     maximum is only a lower bound for the supremum",
                );
                Ok(ProbeReport::new(
                    probe_name,
                    Verdict::Inconclusive,
                    vec![json!({ "finite_stage_maximum": element_json(top) })],
                    Some(norm_curve),
                    notes,
                    spec.seed,
                    config_hash,
                ))
            }
        }
    }
}

/// Uniform gap between the identity and the basis projections, against the
/// pointwise decay on a fixed summable witness. The gap staying at one for
/// every truncation is the certificate that monotone convergence of the
/// projections is not uniform.
pub fn projection_gap(dim: usize, tag: &SpaceTag, spec: &SampleSpec) -> Result<ProbeReport> {
    if dim < 2 {
        return Err(params_err("projection_gap", "dim", "needs dimension at least 2"));
    }
    match tag {
        SpaceTag::SeqL1 { dim: d } | SpaceTag::SeqLInf { dim: d } if *d == dim => {}
        SpaceTag::SeqL1 { .. } | SpaceTag::SeqLInf { .. } => {
            return Err(params_err("projection_gap", "tag", "tag dimension must match dim"));
        }
        other => {
            return Err(Error::UnsupportedTagPair(format!(
                "projection gaps are defined for the summed and uniform coordinate \
                 tags, got {}",
                other.describe()
            )));
        }
    }
    let probe_name = format!("projection_gap[{}]", tag.describe());
    let config_hash = config_hash_of(&json!({
        "probe": "projection_gap",
        "dim": dim,
        "tag": tag,
    }));
    let identity = MatrixOp::identity(dim, tag.clone())?;
    // the fixed summable witness x_i = 2^{-i}
    let witness_x = LatticeElement::new((1..=dim).map(|i| pow2_neg(i as u32)).collect())?;
    let mut gap_curve = Vec::with_capacity(dim - 1);
    let mut contrast = Vec::with_capacity(dim - 1);
    for n in 1..dim {
        let p = MatrixOp::basis_projection(n, dim, tag.clone())?;
        let residual = identity.sub(&p)?;
        gap_curve.push((n as u32, residual.induced_norm()?));
        let tail = residual.apply(&witness_x)?;
        contrast.push((n as u32, format_rational(&norm(&Element::Coord(tail), tag)?)));
    }
    let gap_constant_one = gap_curve.iter().all(|(_, g)| *g == int(1));
    let witnesses = vec![json!({
        "escaping_direction_example": element_json(&Element::Coord(
            LatticeElement::basis(1.min(dim - 1), dim)?,
        )),
        "pointwise_witness": element_json(&Element::Coord(witness_x)),
        "pointwise_contrast": contrast,
    })];
    let (verdict, notes) = if gap_constant_one {
        (
            Verdict::Fails,
            "the projections increase to the identity, and on the fixed summable \
             witness the residual norms decay geometrically (see the contrast \
             table), yet the uniform gap stays exactly 1 at every truncation: \
             the basis direction just beyond the projection escapes in full. \
             Monotone convergence without uniform convergence, realized at \
             finite truncation",
        )
    } else {
        (
            Verdict::Inconclusive,
            "the uniform gap is not identically 1; this truncation does not \
             reproduce the expected escape",
        )
    };
    Ok(ProbeReport::new(
        probe_name,
        verdict,
        witnesses,
        Some(gap_curve),
        notes,
        spec.seed,
        config_hash,
    ))
}

/// Which factor-level probe a product-preservation check replays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductProbe {
    Am,
    Levi,
}

/// Runs a probe factorwise and on the product, and confirms the product
/// verdict is exactly the conjunction of the factor verdicts.
pub fn product_preservation_check(
    factors: &[SpaceTag],
    probe: ProductProbe,
    spec: &SampleSpec,
) -> Result<ProbeReport> {
    if factors.is_empty() {
        return Err(params_err("product_preservation", "factors", "needs at least one factor"));
    }
    for (i, f) in factors.iter().enumerate() {
        if matches!(f, SpaceTag::Product { .. }) {
            return Err(params_err(
                "product_preservation",
                &format!("factors[{i}]"),
                "nested products are not supported",
            ));
        }
        if probe == ProductProbe::Levi && f.coord_dim().is_none() {
            return Err(params_err(
                "product_preservation",
                &format!("factors[{i}]"),
                "the levi replay needs coordinate factors",
            ));
        }
    }
    let product = SpaceTag::product(factors.to_vec())?;
    let probe_name = format!("product_preservation[{:?}, {}]", probe, product.describe());
    let config_hash = config_hash_of(&json!({
        "probe": "product_preservation",
        "mode": probe,
        "factors": factors,
        "trials": spec.trials,
    }));

    match probe {
        ProductProbe::Am => {
            // factor level
            let mut factor_holds = Vec::with_capacity(factors.len());
            for f in factors {
                let r = am_identity_check(f, spec)?;
                factor_holds.push(r.verdict == Verdict::Holds);
            }
            // product level: joins are factorwise; the identity must hold in
            // every factor of every sampled pair
            let mut rng = spec.rng_for(&probe_name);
            let mut product_failure: Option<serde_json::Value> = None;
            // canonical embedded pairs: each factor's disjoint pair padded
            // with zeros elsewhere
            let zeros: Vec<Element> = factors
                .iter()
                .map(|f| {
                    let mut r = spec.rng_for("zero-shape");
                    sample_in(f, &mut r).scale(&int(0))
                })
                .collect();
            let mut pairs: Vec<(Vec<Element>, Vec<Element>, &'static str)> = Vec::new();
            for (j, f) in factors.iter().enumerate() {
                if let Some((a, b)) = canonical_am_pair(f) {
                    let mut xs = zeros.clone();
                    let mut ys = zeros.clone();
                    xs[j] = a;
                    ys[j] = b;
                    pairs.push((xs, ys, "canonical-embedded"));
                }
            }
            for _ in 0..spec.trials {
                let xs: Vec<Element> =
                    factors.iter().map(|f| sample_in(f, &mut rng).abs()).collect();
                let ys: Vec<Element> =
                    factors.iter().map(|f| sample_in(f, &mut rng).abs()).collect();
                pairs.push((xs, ys, "sampled"));
            }
            'outer: for (xs, ys, origin) in &pairs {
                for (j, f) in factors.iter().enumerate() {
                    let (x, y) = (&xs[j], &ys[j]);
                    if x.is_zero() && y.is_zero() {
                        continue;
                    }
                    let ratio = am_ratio(x, y, f)?;
                    if ratio != int(1) {
                        product_failure = Some(json!({
                            "pair_origin": origin,
                            "factor": j,
                            "x": element_json(&Element::Product(xs.clone())),
                            "y": element_json(&Element::Product(ys.clone())),
                            "factor_ratio": format_rational(&ratio),
                        }));
                        break 'outer;
                    }
                }
            }
            let product_holds = product_failure.is_none();
            let conjunction = factor_holds.iter().all(|h| *h);
            let preserved = product_holds == conjunction;
            let mut witnesses = Vec::new();
            if let Some(w) = product_failure {
                witnesses.push(w);
            }
            witnesses.push(json!({
                "factor_verdicts": factor_holds,
                "product_verdict": product_holds,
            }));
            let notes = format!(
                "factor identities: {:?}; product identity: {}; the product verdict \
                 {} the conjunction of the factor verdicts, as factorwise joins \
                 predict",
                factor_holds,
                product_holds,
                if preserved { "matches" } else { "CONTRADICTS" }
            );
            Ok(ProbeReport::new(
                probe_name,
                if preserved { Verdict::Holds } else { Verdict::Fails },
                witnesses,
                None,
                notes,
                spec.seed,
                config_hash,
            ))
        }
        ProductProbe::Levi => {
            let upto = 12u32;
            // factor level with the default stabilizing family
            let mut factor_sups = Vec::with_capacity(factors.len());
            let mut factor_holds = Vec::with_capacity(factors.len());
            for f in factors {
                let dim = f.coord_dim().expect("validated above");
                let mut fam = SequenceFamily::stabilizing(dim, 3);
                fam.space = f.clone();
                let r = levi_probe(&fam, upto, spec)?;
                factor_holds.push(r.verdict == Verdict::Holds);
                factor_sups.push(fam.term(upto));
            }
            // product level: the tuple family, supremum taken jointly
            let factors_owned = factors.to_vec();
            let product_fam = SequenceFamily::custom(
                product.clone(),
                OrderClaim::Increasing,
                None,
                move |k| {
                    Element::Product(
                        factors_owned
                            .iter()
                            .map(|f| {
                                let dim = f.coord_dim().expect("coordinate factors");
                                SequenceFamily::stabilizing(dim, 3).term(k)
                            })
                            .collect(),
                    )
                },
            );
            let mut acc = product_fam.term(1);
            for k in 2..=upto {
                acc = acc.join(&product_fam.term(k))?;
            }
            let stabilized = acc == product_fam.term(upto);
            let tuple_of_sups = Element::Product(factor_sups);
            let product_holds = stabilized && acc == tuple_of_sups;
            let conjunction = factor_holds.iter().all(|h| *h);
            let preserved = product_holds == conjunction;
            let notes = format!(
                "factor suprema computed exactly; the product supremum {} the tuple \
                 of factor suprema, mirroring pointwise boundedness of the tuple \
                 family",
                if product_holds { "equals" } else { "DIFFERS FROM" }
            );
            Ok(ProbeReport::new(
                probe_name,
                if preserved { Verdict::Holds } else { Verdict::Fails },
                vec![json!({
                    "product_supremum": element_json(&acc),
                    "factor_verdicts": factor_holds,
                })],
                None,
                notes,
                spec.seed,
                config_hash,
            ))
        }
    }
}

/// Rank-one transfer round trip: an increasing bounded coordinate family
/// lifts to an increasing operator family T_k = f ⊗ y_k through the
/// normalizing functional at x0, and evaluating the supremum operator at x0
/// returns the family supremum exactly.
pub fn operator_levi_demo(
    y_family: &SequenceFamily,
    x0: &LatticeElement,
    upto: u32,
    spec: &SampleSpec,
) -> Result<ProbeReport> {
    if y_family.order_claim != OrderClaim::Increasing {
        return Err(params_err("operator_levi_demo", "y_family", "needs an increasing family"));
    }
    if upto < 2 {
        return Err(params_err("operator_levi_demo", "upto", "needs at least two stages"));
    }
    let Some(_range_dim) = y_family.space.coord_dim() else {
        return Err(params_err(
            "operator_levi_demo",
            "y_family.space",
            "needs a coordinate family",
        ));
    };
    let probe_name = format!("operator_levi_demo[{}]", y_family.space.describe());
    let config_hash = config_hash_of(&json!({
        "probe": "operator_levi_demo",
        "kind": format!("{:?}", y_family.kind),
        "space": y_family.space,
        "x0": serde_json::to_value(x0).expect("elements serialize"),
        "upto": upto,
    }));

    let f = RankOneOp::normalizing_functional(x0)?;
    let domain = SpaceTag::SeqLInf { dim: x0.dim() };
    let range = y_family.space.clone();

    let ys: Vec<LatticeElement> = (1..=upto)
        .map(|k| match y_family.term(k) {
            Element::Coord(v) => Ok(v),
            _ => Err(params_err("operator_levi_demo", "y_family", "family must be coordinate")),
        })
        .collect::<Result<Vec<_>>>()?;
    if !ys[0].is_positive() {
        return Err(params_err(
            "operator_levi_demo",
            "y_family",
            "the family must start positive so the lifted operators are positive",
        ));
    }
    for k in 1..ys.len() {
        if !ys[k - 1].leq(&ys[k])? {
            return Err(Error::OrderClaimViolated {
                index: (k + 1) as u32,
                detail: "the lifted family is not increasing".into(),
            });
        }
    }
    if let Some(bound) = &y_family.norm_bound {
        for (i, y) in ys.iter().enumerate() {
            let n = norm(&Element::Coord(y.clone()), &range)?;
            if &n > bound {
                return Ok(ProbeReport::new(
                    probe_name,
                    Verdict::Inconclusive,
                    vec![json!({ "stage": i + 1, "norm": format_rational(&n) })],
                    None,
                    "the family escapes its claimed norm bound; the transfer premise \
                     is vacuous",
                    spec.seed,
                    config_hash,
                ));
            }
        }
    }

    // lifted operators, increasing under domination (all positive)
    let ops: Vec<MatrixOp> = ys
        .iter()
        .map(|y| RankOneOp::new(f.clone(), y.clone()).to_matrix(domain.clone(), range.clone()))
        .collect::<Result<Vec<_>>>()?;
    for k in 1..ops.len() {
        if !ops[k].dominates(&ops[k - 1])? {
            return Err(Error::OrderClaimViolated {
                index: (k + 1) as u32,
                detail: "the lifted operator family is not increasing under domination".into(),
            });
        }
    }

    // exact family supremum at this horizon
    let mut sup = ys[0].clone();
    for y in &ys[1..] {
        sup = sup.join(y)?;
    }
    let stabilized = sup == ys[ys.len() - 1] && ys.len() >= 2 && ys[ys.len() - 2] == sup;
    let top_op = RankOneOp::new(f.clone(), sup.clone()).to_matrix(domain, range.clone())?;
    let round_trip = top_op.apply(x0)?;
    let exact = round_trip == sup;

    let mut notes = String::new();
    if let Some(ln) = &y_family.limit_note {
        notes.push_str(ln);
        notes.push_str("\n\n");
    }
    notes.push_str(&format!(
        "the normalizing functional evaluates to one at the base point, so the \
         supremum operator returns the family supremum on the nose; round trip \
         {}. The family {} at this horizon",
        if exact { "confirmed exactly" } else { "FAILED" },
        if stabilized {
            "stabilized; the supremum is the true one"
        } else {
            "is still rising; the reported supremum is the finite-stage join"
        }
    ));
    let mut curve = Vec::with_capacity(ys.len());
    for (i, y) in ys.iter().enumerate() {
        curve.push(((i + 1) as u32, norm(&Element::Coord(y.clone()), &y_family.space)?));
    }
    Ok(ProbeReport::new(
        probe_name,
        if exact { Verdict::Holds } else { Verdict::Fails },
        vec![json!({
            "functional": serde_json::to_value(&f).expect("serializes"),
            "supremum": serde_json::to_value(&sup).expect("serializes"),
            "supremum_operator": serde_json::to_value(&top_op).expect("serializes"),
            "evaluation_at_base": serde_json::to_value(&round_trip).expect("serializes"),
        })],
        Some(curve),
        notes,
        spec.seed,
        config_hash,
    ))
}

/// Decreasing positive operator families under the uniform tag: the induced
/// norm equals evaluation of the modulus at the order unit, so uniform
/// convergence of the operators is read off a vector curve. Both sides of
/// that identity are reported per stage.
pub fn operator_lebesgue_demo(
    t_family: &OperatorSeq,
    upto: u32,
    threshold: &Rational,
    spec: &SampleSpec,
) -> Result<ProbeReport> {
    if upto < 2 {
        return Err(params_err("operator_lebesgue_demo", "upto", "needs at least two stages"));
    }
    if threshold <= &int(0) {
        return Err(params_err(
            "operator_lebesgue_demo",
            "threshold",
            "must be strictly positive",
        ));
    }
    let probe_name = format!("operator_lebesgue_demo[{}]", t_family.name);
    let config_hash = config_hash_of(&json!({
        "probe": "operator_lebesgue_demo",
        "family": t_family.name,
        "upto": upto,
        "threshold": format_rational(threshold),
    }));

    let first = t_family.term(1);
    match (first.domain(), first.range()) {
        (SpaceTag::SeqLInf { .. }, SpaceTag::SeqLInf { .. }) => {}
        (d, r) => {
            return Err(Error::UnsupportedTagPair(format!(
                "the order-unit identity needs the uniform tag on both sides, got {} -> {}",
                d.describe(),
                r.describe()
            )));
        }
    }
    // positivity and exact decrease
    for k in 1..=upto {
        if !t_family.term(k).is_positive() {
            return Err(Error::NotPositive);
        }
    }
    match operator_seq_monotone_check(t_family, upto)? {
        MonotoneVerdict::Confirmed { .. } => {}
        MonotoneVerdict::Violation { at, .. } => {
            return Err(Error::OrderClaimViolated {
                index: at,
                detail: "the operator family is not decreasing".into(),
            });
        }
    }
    // a decreasing family stabilized at a nonzero operator has a nonzero
    // infimum: the zero-infimum precondition fails
    let last = t_family.term(upto);
    let prev = t_family.term(upto - 1);
    let zero = last.scale(&int(0));
    if last == prev && last != zero {
        return Err(Error::FamilyPrecondition(
            "the family stabilized at a nonzero operator; its infimum is not zero".into(),
        ));
    }

    let unit = ones(first.cols());
    let mut curve = Vec::with_capacity(upto as usize);
    let mut identity_table = Vec::with_capacity(upto as usize);
    for k in 1..=upto {
        let t = t_family.term(k);
        let induced = t.induced_norm()?;
        let via_unit = norm(
            &Element::Coord(t.modulus_matrix().apply(&unit)?),
            t.range(),
        )?;
        identity_table.push(json!({
            "stage": k,
            "induced_norm": format_rational(&induced),
            "modulus_at_order_unit": format_rational(&via_unit),
        }));
        debug_assert_eq!(induced, via_unit);
        curve.push((k, induced));
    }
    let last_norm = curve[curve.len() - 1].1.clone();
    let constant = curve.iter().all(|(_, v)| *v == last_norm);
    let (verdict, notes, witnesses) = if last_norm <= *threshold {
        (
            Verdict::Holds,
            format!(
                "the induced norms decrease to {} within the threshold {}; both sides \
                 of the order-unit identity agree at every stage",
                format_rational(&last_norm),
                format_rational(threshold)
            ),
            vec![json!({ "identity_table": identity_table })],
        )
    } else if constant {
        (
            Verdict::Fails,
            "the induced norm curve is constant above the threshold".to_string(),
            vec![
                json!({ "final_operator": serde_json::to_value(&last).expect("serializes") }),
                json!({ "identity_table": identity_table }),
            ],
        )
    } else {
        (
            Verdict::Inconclusive,
            "the induced norms decay but have not reached the threshold at this \
             horizon"
                .to_string(),
            vec![json!({ "identity_table": identity_table })],
        )
    };
    Ok(ProbeReport::new(
        probe_name,
        verdict,
        witnesses,
        Some(curve),
        notes,
        spec.seed,
        config_hash,
    ))
}

/// The order-bounded-but-not-neighborhood-bounded certificate: the identity
/// on a finite product with only some factors constrained maps every basic
/// neighborhood onto an unbounded set, while its order boundedness is
/// witnessed by exact interval bounds.
pub fn nb_bounded_identity_probe(
    factors: &[SpaceTag],
    constrained: &[usize],
    spec: &SampleSpec,
) -> Result<ProbeReport> {
    if factors.len() < 2 {
        return Err(params_err("nb_bounded_identity", "factors", "needs at least two factors"));
    }
    for (i, f) in factors.iter().enumerate() {
        if f.coord_dim().is_none() {
            return Err(params_err(
                "nb_bounded_identity",
                &format!("factors[{i}]"),
                "factors must be coordinate spaces",
            ));
        }
    }
    for j in constrained {
        if *j >= factors.len() {
            return Err(params_err(
                "nb_bounded_identity",
                "constrained",
                format!("index {} out of range for {} factors", j, factors.len()),
            ));
        }
    }
    let product = SpaceTag::product(factors.to_vec())?;
    let flat = product.flat_dim().expect("coordinate factors flatten");
    let probe_name = format!(
        "nb_bounded_identity[{} factors, {} constrained]",
        factors.len(),
        constrained.len()
    );
    let config_hash = config_hash_of(&json!({
        "probe": "nb_bounded_identity",
        "factors": factors,
        "constrained": constrained,
    }));
    let identity = MatrixOp::new(
        (0..flat)
            .map(|i| (0..flat).map(|j| if i == j { int(1) } else { int(0) }).collect())
            .collect(),
        product,
        SpaceTag::SeqLInf { dim: flat },
    )?;
    let nbhd = NeighborhoodSpec::ProductConstraints {
        constraints: constrained
            .iter()
            .map(|j| (*j, NeighborhoodSpec::unit_ball()))
            .collect(),
    };
    // order boundedness contrast: the image of the interval [-1, 1]^flat
    let unit = ones(flat);
    let (lo, hi) = identity.order_bounded_image(&unit)?;
    let order_bounded = json!({
        "order_interval_image_low": serde_json::to_value(&lo).expect("serializes"),
        "order_interval_image_high": serde_json::to_value(&hi).expect("serializes"),
    });
    match nb_bounded_check(&identity, &nbhd)? {
        NbVerdict::Unbounded { factor, coord, direction, image } => Ok(ProbeReport::new(
            probe_name,
            Verdict::Fails,
            vec![
                json!({
                    "unconstrained_factor": factor,
                    "flat_coordinate": coord,
                    "direction": serde_json::to_value(&direction).expect("serializes"),
                    "image_of_direction": serde_json::to_value(&image).expect("serializes"),
                }),
                order_bounded,
            ],
            None,
            "the identity maps order intervals onto order intervals (see the \
             contrast witness), yet every basic neighborhood leaves the listed \
             factor free, and scaling the witness direction scales its image \
             without bound: order bounded, but not bounded on any neighborhood \
             of this topology",
            spec.seed,
            config_hash,
        )),
        NbVerdict::Bounded { scale, .. } => Ok(ProbeReport::new(
            probe_name,
            Verdict::Holds,
            vec![order_bounded],
            None,
            format!(
                "every factor is constrained, so the image of the neighborhood is \
                 bounded at scale {}",
                format_rational(&scale)
            ),
            spec.seed,
            config_hash,
        )),
    }
}

/// Solidity of a tagged norm as a report: dominated pairs must compare the
/// same way in norm.
pub fn solidity_probe(tag: &SpaceTag, spec: &SampleSpec) -> Result<ProbeReport> {
    let probe_name = format!("solidity[{}]", tag.describe());
    let config_hash = config_hash_of(&json!({
        "probe": "solidity",
        "tag": tag,
        "trials": spec.trials,
    }));
    let outcome = solidity_check(tag, spec)?;
    if outcome.holds {
        Ok(ProbeReport::new(
            probe_name,
            Verdict::Holds,
            vec![],
            None,
            format!(
                "norm monotonicity on dominated pairs held exactly on {} sampled \
                 pairs",
                outcome.trials
            ),
            spec.seed,
            config_hash,
        ))
    } else {
        let w = outcome.witness.expect("failing solidity carries a witness");
        Ok(ProbeReport::new(
            probe_name,
            Verdict::Fails,
            vec![serde_json::to_value(&w).expect("witness serializes")],
            None,
            "a dominated pair compares the wrong way in norm",
            spec.seed,
            config_hash,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::MonotoneClaim;
    use crate::rational::rat;

    fn spec() -> SampleSpec {
        SampleSpec::default()
    }

    #[test]
    fn am_ratio_examples() {
        let e1 = Element::Coord(LatticeElement::from_ints(&[1, 0]));
        let e2 = Element::Coord(LatticeElement::from_ints(&[0, 1]));
        assert_eq!(am_ratio(&e1, &e2, &SpaceTag::SeqLInf { dim: 2 }).unwrap(), int(1));
        assert_eq!(am_ratio(&e1, &e2, &SpaceTag::SeqL1 { dim: 2 }).unwrap(), int(2));
        assert_eq!(am_ratio(&e1, &e1, &SpaceTag::SeqL1 { dim: 2 }).unwrap(), int(1));
        let zero = Element::Coord(LatticeElement::from_ints(&[0, 0]));
        assert!(matches!(am_ratio(&zero, &zero, &SpaceTag::SeqL1 { dim: 2 }), Err(Error::BothZero)));
        let neg = Element::Coord(LatticeElement::from_ints(&[-1, 0]));
        assert!(matches!(
            am_ratio(&neg, &e1, &SpaceTag::SeqL1 { dim: 2 }),
            Err(Error::NotPositive)
        ));
    }

    #[test]
    fn am_identity_verdicts_by_tag() {
        let holds = am_identity_check(&SpaceTag::SeqLInf { dim: 8 }, &spec()).unwrap();
        assert_eq!(holds.verdict, Verdict::Holds);
        let holds = am_identity_check(&SpaceTag::PwlSup, &spec()).unwrap();
        assert_eq!(holds.verdict, Verdict::Holds);
        let fails = am_identity_check(&SpaceTag::SeqL1 { dim: 2 }, &spec()).unwrap();
        assert_eq!(fails.verdict, Verdict::Fails);
        assert!(!fails.witnesses.is_empty());
        assert_eq!(fails.witnesses[0]["ratio"], "2");
        let fails = am_identity_check(&SpaceTag::PwlL1, &spec()).unwrap();
        assert_eq!(fails.verdict, Verdict::Fails);
    }

    #[test]
    fn am_defect_curves() {
        let r = am_defect_curve(DefectFamily::SeqLInf, &[2, 4, 8], &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let values = r.curve_values().unwrap();
        assert!(values.iter().all(|(_, v)| *v == int(1)));

        let r = am_defect_curve(DefectFamily::SeqL1, &[2, 4, 8], &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        let values = r.curve_values().unwrap();
        assert_eq!(values, vec![(2, int(2)), (4, int(4)), (8, int(8))]);

        let r = am_defect_curve(DefectFamily::PwlL1Bumps, &[2, 3, 5], &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        let values = r.curve_values().unwrap();
        assert_eq!(values, vec![(2, int(2)), (3, int(3)), (5, int(5))]);

        assert!(am_defect_curve(DefectFamily::SeqL1, &[], &spec()).is_err());
        assert!(am_defect_curve(DefectFamily::SeqL1, &[4, 2], &spec()).is_err());
    }

    #[test]
    fn lebesgue_probe_tents_fail_and_tails_hold() {
        let tents = SequenceFamily::tents();
        let r = lebesgue_probe(&tents, 64, &pow2_neg(20), &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        let values = r.curve_values().unwrap();
        assert_eq!(values.len(), 64);
        assert!(values.iter().all(|(_, v)| *v == int(1)));
        assert!(!r.witnesses.is_empty());

        let tails = SequenceFamily::c0_tails(32);
        let r = lebesgue_probe(&tails, 32, &pow2_neg(20), &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let values = r.curve_values().unwrap();
        assert_eq!(values[31], (32, pow2_neg(32)));

        // constant zero family holds trivially
        let zero = SequenceFamily::custom(
            SpaceTag::SeqLInf { dim: 2 },
            OrderClaim::Decreasing,
            None,
            |_| Element::Coord(LatticeElement::from_ints(&[0, 0])),
        );
        let r = lebesgue_probe(&zero, 8, &pow2_neg(20), &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn lebesgue_probe_rejects_violated_claims() {
        let rising = SequenceFamily::custom(
            SpaceTag::SeqLInf { dim: 1 },
            OrderClaim::Decreasing,
            None,
            |k| Element::Coord(LatticeElement::from_ints(&[k as i64])),
        );
        let err = lebesgue_probe(&rising, 4, &int(1), &spec()).unwrap_err();
        assert!(matches!(err, Error::OrderClaimViolated { index: 2, .. }));
        let ramps = SequenceFamily::ramps();
        assert!(lebesgue_probe(&ramps, 4, &int(1), &spec()).is_err());
    }

    #[test]
    fn levi_probe_ramps_fail_with_slope_curve() {
        let ramps = SequenceFamily::ramps();
        let r = levi_probe(&ramps, 64, &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        let slopes = r.curve_values().unwrap();
        assert_eq!(slopes.len(), 64);
        for (k, s) in slopes {
            assert_eq!(s, int(k as i64));
        }
    }

    #[test]
    fn levi_probe_stabilizing_family_holds() {
        let fam = SequenceFamily::stabilizing(4, 3);
        let r = levi_probe(&fam, 12, &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let sup: Element =
            serde_json::from_value(r.witnesses[0]["supremum"].clone()).unwrap();
        assert_eq!(sup, Element::Coord(ones(4)));
        // constant family holds with the constant as supremum
        let constant = SequenceFamily::custom(
            SpaceTag::SeqLInf { dim: 2 },
            OrderClaim::Increasing,
            Some(int(5)),
            |_| Element::Coord(LatticeElement::from_ints(&[2, 3])),
        );
        let r = levi_probe(&constant, 8, &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn levi_probe_geometric_family_is_inconclusive() {
        let fam = SequenceFamily::geometric(2);
        let r = levi_probe(&fam, 16, &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.notes.contains("ones vector"));
    }

    #[test]
    fn levi_probe_norm_bound_escape_is_inconclusive() {
        let fam = SequenceFamily::custom(
            SpaceTag::SeqLInf { dim: 1 },
            OrderClaim::Increasing,
            Some(int(1)),
            |k| Element::Coord(LatticeElement::from_ints(&[k as i64])),
        );
        let r = levi_probe(&fam, 8, &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.notes.contains("vacuous"));
    }

    #[test]
    fn projection_gap_is_constant_one_with_decaying_contrast() {
        for tag in [SpaceTag::SeqL1 { dim: 16 }, SpaceTag::SeqLInf { dim: 16 }] {
            let r = projection_gap(16, &tag, &spec()).unwrap();
            assert_eq!(r.verdict, Verdict::Fails);
            let gaps = r.curve_values().unwrap();
            assert_eq!(gaps.len(), 15);
            assert!(gaps.iter().all(|(_, g)| *g == int(1)));
            let contrast = r.witnesses[0]["pointwise_contrast"].as_array().unwrap();
            let at10: Vec<String> = contrast[9]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.to_string())
                .collect();
            assert_eq!(at10[0], "10");
            let val = crate::rational::parse_rational(
                contrast[9].as_array().unwrap()[1].as_str().unwrap(),
            )
            .unwrap();
            assert!(val < pow2_neg(10));
        }
        assert!(projection_gap(16, &SpaceTag::PwlSup, &spec()).is_err());
        assert!(projection_gap(1, &SpaceTag::SeqL1 { dim: 1 }, &spec()).is_err());
        assert!(projection_gap(4, &SpaceTag::SeqL1 { dim: 8 }, &spec()).is_err());
    }

    #[test]
    fn product_preservation_am_cases() {
        let both_inf = [SpaceTag::SeqLInf { dim: 2 }, SpaceTag::SeqLInf { dim: 3 }];
        let r = product_preservation_check(&both_inf, ProductProbe::Am, &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.notes.contains("matches"));

        let mixed = [SpaceTag::SeqLInf { dim: 2 }, SpaceTag::SeqL1 { dim: 2 }];
        let r = product_preservation_check(&mixed, ProductProbe::Am, &spec()).unwrap();
        // the meta-claim still holds: the product fails exactly because a
        // factor fails
        assert_eq!(r.verdict, Verdict::Holds);
        let failure = &r.witnesses[0];
        assert_eq!(failure["factor"], 1);
        assert_eq!(failure["pair_origin"], "canonical-embedded");
    }

    #[test]
    fn product_preservation_levi_case() {
        let tags = [SpaceTag::SeqLInf { dim: 2 }, SpaceTag::SeqLInf { dim: 3 }];
        let r = product_preservation_check(&tags, ProductProbe::Levi, &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.notes.contains("equals"));
        let sup: Element =
            serde_json::from_value(r.witnesses[0]["product_supremum"].clone()).unwrap();
        assert_eq!(
            sup,
            Element::Product(vec![Element::Coord(ones(2)), Element::Coord(ones(3))])
        );
    }

    #[test]
    fn operator_levi_demo_round_trip() {
        // stabilizing at (1,2)
        let fam = SequenceFamily::custom(
            SpaceTag::SeqLInf { dim: 2 },
            OrderClaim::Increasing,
            Some(int(2)),
            |k| {
                let t = rat(k.min(2) as i64, 2);
                Element::Coord(
                    LatticeElement::new(vec![t.clone(), t * int(2)]).unwrap(),
                )
            },
        );
        let x0 = LatticeElement::from_ints(&[1, 0]);
        let r = operator_levi_demo(&fam, &x0, 8, &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let sup: LatticeElement =
            serde_json::from_value(r.witnesses[0]["supremum"].clone()).unwrap();
        assert_eq!(sup, LatticeElement::from_ints(&[1, 2]));
        let eval: LatticeElement =
            serde_json::from_value(r.witnesses[0]["evaluation_at_base"].clone()).unwrap();
        assert_eq!(eval, sup);

        // geometric family: round trip exact at the finite stage, note says so
        let geo = SequenceFamily::geometric(2);
        let r = operator_levi_demo(&geo, &x0, 20, &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.notes.contains("still rising"));
        let sup: LatticeElement =
            serde_json::from_value(r.witnesses[0]["supremum"].clone()).unwrap();
        let expected = int(1) - pow2_neg(20);
        assert_eq!(sup, LatticeElement::new(vec![expected.clone(), expected]).unwrap());

        // no strictly positive coordinate
        let bad_x0 = LatticeElement::from_ints(&[0, -1]);
        assert!(matches!(
            operator_levi_demo(&fam, &bad_x0, 8, &spec()),
            Err(Error::NoPositiveCoordinate)
        ));
    }

    #[test]
    fn operator_lebesgue_demo_scaling_family() {
        let fam = OperatorSeq::new("halving", MonotoneClaim::Decreasing, |k| {
            MatrixOp::identity(4, SpaceTag::SeqLInf { dim: 4 })
                .unwrap()
                .scale(&pow2_neg(k))
        });
        let r = operator_lebesgue_demo(&fam, 30, &pow2_neg(20), &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let values = r.curve_values().unwrap();
        assert_eq!(values[0], (1, rat(1, 2)));
        assert_eq!(values[29], (30, pow2_neg(30)));
        // both sides of the identity are printed
        let table = r.witnesses[0]["identity_table"].as_array().unwrap();
        assert_eq!(table.len(), 30);
        assert_eq!(table[0]["induced_norm"], table[0]["modulus_at_order_unit"]);
    }

    #[test]
    fn operator_lebesgue_demo_rejects_bad_families() {
        // constant nonzero family: infimum is not zero
        let constant = OperatorSeq::new("constant", MonotoneClaim::Decreasing, |_| {
            MatrixOp::identity(2, SpaceTag::SeqLInf { dim: 2 }).unwrap()
        });
        assert!(matches!(
            operator_lebesgue_demo(&constant, 8, &pow2_neg(20), &spec()),
            Err(Error::FamilyPrecondition(_))
        ));
        // increasing family violates the decrease
        let rising = OperatorSeq::new("rising", MonotoneClaim::Decreasing, |k| {
            MatrixOp::identity(2, SpaceTag::SeqLInf { dim: 2 })
                .unwrap()
                .scale(&int(k as i64))
        });
        assert!(matches!(
            operator_lebesgue_demo(&rising, 8, &pow2_neg(20), &spec()),
            Err(Error::OrderClaimViolated { .. })
        ));
        // sign-flipping family violates positivity
        let signed = OperatorSeq::new("signed", MonotoneClaim::Decreasing, |k| {
            MatrixOp::identity(2, SpaceTag::SeqLInf { dim: 2 })
                .unwrap()
                .scale(&rat(-(k as i64), 1))
        });
        assert!(matches!(
            operator_lebesgue_demo(&signed, 8, &pow2_neg(20), &spec()),
            Err(Error::NotPositive)
        ));
    }

    #[test]
    fn nb_bounded_identity_realizes_the_counterexample() {
        let factors = vec![
            SpaceTag::SeqLInf { dim: 1 },
            SpaceTag::SeqLInf { dim: 1 },
            SpaceTag::SeqLInf { dim: 1 },
        ];
        let r = nb_bounded_identity_probe(&factors, &[0, 1], &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.witnesses[0]["unconstrained_factor"], 2);
        // order-boundedness contrast is present
        assert!(r.witnesses[1]["order_interval_image_high"].is_array());
        // constraining everything flips the verdict
        let r = nb_bounded_identity_probe(&factors, &[0, 1, 2], &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(nb_bounded_identity_probe(&factors, &[7], &spec()).is_err());
    }

    #[test]
    fn solidity_probe_reports() {
        let r = solidity_probe(&SpaceTag::SeqL1 { dim: 4 }, &spec()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.config_hash.len() == 64);
    }

    #[test]
    fn reports_are_reproducible() {
        let a = am_identity_check(&SpaceTag::SeqL1 { dim: 3 }, &spec()).unwrap();
        let b = am_identity_check(&SpaceTag::SeqL1 { dim: 3 }, &spec()).unwrap();
        assert_eq!(a, b);
        let json_a = serde_json::to_string(&a).unwrap();
        let json_b = serde_json::to_string(&b).unwrap();
        assert_eq!(json_a, json_b);
        // a different seed changes the sampled pairs but not the verdict here
        let other = am_identity_check(
            &SpaceTag::SeqL1 { dim: 3 },
            &SampleSpec::with_seed(7),
        )
        .unwrap();
        assert_eq!(other.verdict, Verdict::Fails);
    }
}
