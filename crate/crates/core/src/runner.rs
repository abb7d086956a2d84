//! Experiment runner: a config names probes and parameters, validation
//! rejects every bad combination before anything runs, and the results land
//! in a manifest whose bytes depend only on the config.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    am_defect_curve, am_identity_check, lebesgue_probe, levi_probe, nb_bounded_identity_probe,
    operator_lebesgue_demo, operator_levi_demo, product_preservation_check, projection_gap,
    solidity_probe, DefectFamily, OrderClaim, ProbeReport, ProductProbe, SequenceFamily,
    canonical_json, config_hash_of,
};
use crate::error::{Error, Result};
use crate::lattice::LatticeElement;
use crate::operators::{MatrixOp, MonotoneClaim, OperatorSeq};
use crate::rational::{parse_rational, pow2_neg, Rational};
use crate::sampling::{SampleSpec, DEFAULT_SEED, DEFAULT_TRIALS};
use crate::spaces::SpaceTag;

/// Version string stamped into every manifest.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable that may override the config seed. Precedence:
/// command-line flag, then this variable, then the config field.
pub const SEED_ENV_VAR: &str = "RIESZ_LAB_SEED";

fn config_err(path: &str, detail: impl Into<String>) -> Error {
    Error::ProbeParams { probe: "config".into(), path: path.into(), detail: detail.into() }
}

/// One probe invocation: a registry name plus its parameter object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

/// Output format selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Md,
    Both,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Md),
            "both" => Ok(ReportFormat::Both),
            other => Err(config_err("format", format!("unknown format {other:?}"))),
        }
    }
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_output() -> String {
    "riesz-lab-run".into()
}

fn default_format() -> ReportFormat {
    ReportFormat::Both
}

/// A full experiment: which probes to run, over which declared spaces, with
/// which seed, and where the outputs go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub probes: Vec<ProbeSpec>,
    #[serde(default)]
    pub spaces: Vec<SpaceTag>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default = "default_format")]
    pub format: ReportFormat,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| config_err("$", format!("config does not parse: {e}")))?;
        Ok(config)
    }

    /// Hash of the canonicalized config. Everything that influences the run
    /// is inside, so equal hashes promise byte-identical manifests.
    pub fn hash(&self) -> String {
        config_hash_of(&serde_json::to_value(self).expect("config serializes"))
    }
}

/// The run record: the config itself, its hash, the tool version, and the
/// reports sorted by probe name. No timestamps anywhere; reruns of an
/// identical config must produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub reports: Vec<ProbeReport>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("# riesz-lab run\n\n");
        out.push_str(&format!("- tool version: {}\n", self.tool_version));
        out.push_str(&format!("- config hash: `{}`\n", self.config_hash));
        out.push_str(&format!("- seed: 0x{:X}\n", self.config.seed));
        out.push_str(&format!("- probes: {}\n", self.reports.len()));
        for r in &self.reports {
            out.push_str("\n---\n\n");
            out.push_str(&r.to_markdown());
        }
        out
    }
}

// named sequence families the config can reference

fn named_family(
    probe: &str,
    name: &str,
    dim: Option<usize>,
    stabilize_at: Option<u32>,
) -> Result<SequenceFamily> {
    match name {
        "tents" => Ok(SequenceFamily::tents()),
        "ramps" => Ok(SequenceFamily::ramps()),
        "c0_tails" => {
            let dim = dim.ok_or_else(|| {
                Error::ProbeParams {
                    probe: probe.into(),
                    path: "params.dim".into(),
                    detail: "c0_tails needs a dimension".into(),
                }
            })?;
            Ok(SequenceFamily::c0_tails(dim))
        }
        "stabilizing" => {
            let dim = dim.unwrap_or(4);
            let at = stabilize_at.unwrap_or(3);
            if dim == 0 || at == 0 {
                return Err(Error::ProbeParams {
                    probe: probe.into(),
                    path: "params.dim".into(),
                    detail: "stabilizing needs positive dim and stabilize_at".into(),
                });
            }
            Ok(SequenceFamily::stabilizing(dim, at))
        }
        "geometric" => Ok(SequenceFamily::geometric(dim.unwrap_or(2))),
        other => Err(Error::ProbeParams {
            probe: probe.into(),
            path: "params.family".into(),
            detail: format!(
                "unknown family {other:?}; known: tents, ramps, c0_tails, stabilizing, geometric"
            ),
        }),
    }
}

fn named_operator_family(probe: &str, name: &str, dim: usize) -> Result<OperatorSeq> {
    match name {
        "halving" => {
            if dim == 0 {
                return Err(Error::ProbeParams {
                    probe: probe.into(),
                    path: "params.dim".into(),
                    detail: "halving needs a positive dimension".into(),
                });
            }
            Ok(OperatorSeq::new("halving", MonotoneClaim::Decreasing, move |k| {
                MatrixOp::identity(dim, SpaceTag::SeqLInf { dim })
                    .expect("dim positive")
                    .scale(&pow2_neg(k))
            }))
        }
        other => Err(Error::ProbeParams {
            probe: probe.into(),
            path: "params.family".into(),
            detail: format!("unknown operator family {other:?}; known: halving"),
        }),
    }
}

// typed parameter schemas, one per registry entry

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AmIdentityParams {
    tag: SpaceTag,
    trials: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AmDefectParams {
    family: DefectFamily,
    n_range: Vec<usize>,
    trials: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LebesgueParams {
    family: String,
    dim: Option<usize>,
    upto: u32,
    threshold: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LeviParams {
    family: String,
    dim: Option<usize>,
    stabilize_at: Option<u32>,
    upto: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectionGapParams {
    dim: usize,
    tag: SpaceTag,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductPreservationParams {
    factors: Vec<SpaceTag>,
    mode: ProductProbe,
    trials: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorLeviParams {
    family: String,
    dim: Option<usize>,
    stabilize_at: Option<u32>,
    x0: Vec<String>,
    upto: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorLebesgueParams {
    family: String,
    dim: usize,
    upto: u32,
    threshold: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NbBoundedParams {
    factors: Vec<SpaceTag>,
    constrained: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolidityParams {
    tag: SpaceTag,
    trials: Option<u32>,
}

/// A probe whose parameters already validated. Running it can still hit
/// data-dependent errors, but never a parameter error.
#[derive(Debug)]
pub enum PreparedProbe {
    AmIdentity { tag: SpaceTag, spec: SampleSpec },
    AmDefect { family: DefectFamily, n_range: Vec<usize>, spec: SampleSpec },
    Lebesgue { family: SequenceFamily, upto: u32, threshold: Rational, spec: SampleSpec },
    Levi { family: SequenceFamily, upto: u32, spec: SampleSpec },
    ProjectionGap { dim: usize, tag: SpaceTag, spec: SampleSpec },
    ProductPreservation { factors: Vec<SpaceTag>, mode: ProductProbe, spec: SampleSpec },
    OperatorLevi { family: SequenceFamily, x0: LatticeElement, upto: u32, spec: SampleSpec },
    OperatorLebesgue { family: OperatorSeq, upto: u32, threshold: Rational, spec: SampleSpec },
    NbBounded { factors: Vec<SpaceTag>, constrained: Vec<usize>, spec: SampleSpec },
    Solidity { tag: SpaceTag, spec: SampleSpec },
}

impl PreparedProbe {
    /// Runs the probe. Parameter validation already happened.
    pub fn run(&self) -> Result<ProbeReport> {
        match self {
            PreparedProbe::AmIdentity { tag, spec } => am_identity_check(tag, spec),
            PreparedProbe::AmDefect { family, n_range, spec } => {
                am_defect_curve(*family, n_range, spec)
            }
            PreparedProbe::Lebesgue { family, upto, threshold, spec } => {
                lebesgue_probe(family, *upto, threshold, spec)
            }
            PreparedProbe::Levi { family, upto, spec } => levi_probe(family, *upto, spec),
            PreparedProbe::ProjectionGap { dim, tag, spec } => projection_gap(*dim, tag, spec),
            PreparedProbe::ProductPreservation { factors, mode, spec } => {
                product_preservation_check(factors, *mode, spec)
            }
            PreparedProbe::OperatorLevi { family, x0, upto, spec } => {
                operator_levi_demo(family, x0, *upto, spec)
            }
            PreparedProbe::OperatorLebesgue { family, upto, threshold, spec } => {
                operator_lebesgue_demo(family, *upto, threshold, spec)
            }
            PreparedProbe::NbBounded { factors, constrained, spec } => {
                nb_bounded_identity_probe(factors, constrained, spec)
            }
            PreparedProbe::Solidity { tag, spec } => solidity_probe(tag, spec),
        }
    }
}

fn parse_params<T: serde::de::DeserializeOwned>(probe: &str, params: &serde_json::Value) -> Result<T> {
    let value = if params.is_null() { serde_json::json!({}) } else { params.clone() };
    serde_json::from_value(value).map_err(|e| Error::ProbeParams {
        probe: probe.into(),
        path: "params".into(),
        detail: e.to_string(),
    })
}

fn parse_threshold(probe: &str, raw: &str) -> Result<Rational> {
    let t = parse_rational(raw).map_err(|e| Error::ProbeParams {
        probe: probe.into(),
        path: "params.threshold".into(),
        detail: e.to_string(),
    })?;
    if t <= Rational::from_integer(0.into()) {
        return Err(Error::ProbeParams {
            probe: probe.into(),
            path: "params.threshold".into(),
            detail: "must be strictly positive".into(),
        });
    }
    Ok(t)
}

fn spec_with(seed: u64, trials: Option<u32>) -> SampleSpec {
    SampleSpec { trials: trials.unwrap_or(DEFAULT_TRIALS), seed }
}

/// Validates one probe spec into a runnable probe. Every precondition a
/// probe would reject is rejected here, with the probe name and the
/// parameter path in the error.
pub fn prepare_probe(spec: &ProbeSpec, seed: u64) -> Result<PreparedProbe> {
    let name = spec.name.as_str();
    match name {
        "am_identity" => {
            let p: AmIdentityParams = parse_params(name, &spec.params)?;
            if matches!(p.tag, SpaceTag::Product { .. }) {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.tag".into(),
                    detail: "needs a norm tag, not a product".into(),
                });
            }
            p.tag.validate().map_err(|e| Error::ProbeParams {
                probe: name.into(),
                path: "params.tag".into(),
                detail: e.to_string(),
            })?;
            Ok(PreparedProbe::AmIdentity { tag: p.tag, spec: spec_with(seed, p.trials) })
        }
        "am_defect_curve" => {
            let p: AmDefectParams = parse_params(name, &spec.params)?;
            if p.n_range.is_empty() || p.n_range.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.n_range".into(),
                    detail: "needs a strictly increasing, nonempty list".into(),
                });
            }
            if p.n_range[0] < 1 {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.n_range".into(),
                    detail: "parameters start at 1".into(),
                });
            }
            Ok(PreparedProbe::AmDefect {
                family: p.family,
                n_range: p.n_range,
                spec: spec_with(seed, p.trials),
            })
        }
        "lebesgue" => {
            let p: LebesgueParams = parse_params(name, &spec.params)?;
            let family = named_family(name, &p.family, p.dim, None)?;
            if family.order_claim != OrderClaim::Decreasing {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.family".into(),
                    detail: format!("{:?} is not a decreasing family", p.family),
                });
            }
            if p.upto < 2 {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.upto".into(),
                    detail: "needs at least two stages".into(),
                });
            }
            let threshold = parse_threshold(name, &p.threshold)?;
            Ok(PreparedProbe::Lebesgue {
                family,
                upto: p.upto,
                threshold,
                spec: spec_with(seed, None),
            })
        }
        "levi" => {
            let p: LeviParams = parse_params(name, &spec.params)?;
            let family = named_family(name, &p.family, p.dim, p.stabilize_at)?;
            if family.order_claim != OrderClaim::Increasing {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.family".into(),
                    detail: format!("{:?} is not an increasing family", p.family),
                });
            }
            if p.upto < 2 {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.upto".into(),
                    detail: "needs at least two stages".into(),
                });
            }
            Ok(PreparedProbe::Levi { family, upto: p.upto, spec: spec_with(seed, None) })
        }
        "projection_gap" => {
            let p: ProjectionGapParams = parse_params(name, &spec.params)?;
            if p.dim < 2 {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.dim".into(),
                    detail: "needs dimension at least 2".into(),
                });
            }
            match &p.tag {
                SpaceTag::SeqL1 { dim } | SpaceTag::SeqLInf { dim } if *dim == p.dim => {}
                _ => {
                    return Err(Error::ProbeParams {
                        probe: name.into(),
                        path: "params.tag".into(),
                        detail: "needs seq_l1 or seq_l_inf with the same dimension".into(),
                    });
                }
            }
            Ok(PreparedProbe::ProjectionGap { dim: p.dim, tag: p.tag, spec: spec_with(seed, None) })
        }
        "product_preservation" => {
            let p: ProductPreservationParams = parse_params(name, &spec.params)?;
            if p.factors.is_empty() {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.factors".into(),
                    detail: "needs at least one factor".into(),
                });
            }
            for (i, f) in p.factors.iter().enumerate() {
                if matches!(f, SpaceTag::Product { .. }) {
                    return Err(Error::ProbeParams {
                        probe: name.into(),
                        path: format!("params.factors[{i}]"),
                        detail: "nested products are not supported".into(),
                    });
                }
                if p.mode == ProductProbe::Levi && f.coord_dim().is_none() {
                    return Err(Error::ProbeParams {
                        probe: name.into(),
                        path: format!("params.factors[{i}]"),
                        detail: "the levi replay needs coordinate factors".into(),
                    });
                }
                f.validate().map_err(|e| Error::ProbeParams {
                    probe: name.into(),
                    path: format!("params.factors[{i}]"),
                    detail: e.to_string(),
                })?;
            }
            Ok(PreparedProbe::ProductPreservation {
                factors: p.factors,
                mode: p.mode,
                spec: spec_with(seed, p.trials),
            })
        }
        "operator_levi_demo" => {
            let p: OperatorLeviParams = parse_params(name, &spec.params)?;
            let family = named_family(name, &p.family, p.dim, p.stabilize_at)?;
            if family.order_claim != OrderClaim::Increasing {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.family".into(),
                    detail: format!("{:?} is not an increasing family", p.family),
                });
            }
            if family.space.coord_dim().is_none() {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.family".into(),
                    detail: "needs a coordinate family".into(),
                });
            }
            if p.upto < 2 {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.upto".into(),
                    detail: "needs at least two stages".into(),
                });
            }
            if p.x0.is_empty() {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.x0".into(),
                    detail: "needs a nonempty base point".into(),
                });
            }
            let coords = p
                .x0
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::ProbeParams {
                    probe: name.into(),
                    path: "params.x0".into(),
                    detail: e.to_string(),
                })?;
            let x0 = LatticeElement::new(coords).map_err(|e| Error::ProbeParams {
                probe: name.into(),
                path: "params.x0".into(),
                detail: e.to_string(),
            })?;
            if !x0.coords().iter().any(|c| c > &Rational::from_integer(0.into())) {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.x0".into(),
                    detail: "needs a strictly positive coordinate to normalize against".into(),
                });
            }
            Ok(PreparedProbe::OperatorLevi {
                family,
                x0,
                upto: p.upto,
                spec: spec_with(seed, None),
            })
        }
        "operator_lebesgue_demo" => {
            let p: OperatorLebesgueParams = parse_params(name, &spec.params)?;
            let family = named_operator_family(name, &p.family, p.dim)?;
            if p.upto < 2 {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.upto".into(),
                    detail: "needs at least two stages".into(),
                });
            }
            let threshold = parse_threshold(name, &p.threshold)?;
            Ok(PreparedProbe::OperatorLebesgue {
                family,
                upto: p.upto,
                threshold,
                spec: spec_with(seed, None),
            })
        }
        "nb_bounded_identity" => {
            let p: NbBoundedParams = parse_params(name, &spec.params)?;
            if p.factors.len() < 2 {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.factors".into(),
                    detail: "needs at least two factors".into(),
                });
            }
            for (i, f) in p.factors.iter().enumerate() {
                if f.coord_dim().is_none() {
                    return Err(Error::ProbeParams {
                        probe: name.into(),
                        path: format!("params.factors[{i}]"),
                        detail: "factors must be coordinate spaces".into(),
                    });
                }
            }
            for j in &p.constrained {
                if *j >= p.factors.len() {
                    return Err(Error::ProbeParams {
                        probe: name.into(),
                        path: "params.constrained".into(),
                        detail: format!(
                            "index {} out of range for {} factors",
                            j,
                            p.factors.len()
                        ),
                    });
                }
            }
            Ok(PreparedProbe::NbBounded {
                factors: p.factors,
                constrained: p.constrained,
                spec: spec_with(seed, None),
            })
        }
        "solidity" => {
            let p: SolidityParams = parse_params(name, &spec.params)?;
            if matches!(p.tag, SpaceTag::Product { .. }) {
                return Err(Error::ProbeParams {
                    probe: name.into(),
                    path: "params.tag".into(),
                    detail: "needs a norm tag, not a product".into(),
                });
            }
            p.tag.validate().map_err(|e| Error::ProbeParams {
                probe: name.into(),
                path: "params.tag".into(),
                detail: e.to_string(),
            })?;
            Ok(PreparedProbe::Solidity { tag: p.tag, spec: spec_with(seed, p.trials) })
        }
        other => Err(Error::ProbeParams {
            probe: other.into(),
            path: "name".into(),
            detail: format!(
                "unknown probe {other:?}; known: am_identity, am_defect_curve, lebesgue, \
                 levi, projection_gap, product_preservation, operator_levi_demo, \
                 operator_lebesgue_demo, nb_bounded_identity, solidity"
            ),
        }),
    }
}

/// Validates the whole config. On success every probe is ready to run.
pub fn validate_config(config: &ExperimentConfig) -> Result<Vec<PreparedProbe>> {
    for (i, tag) in config.spaces.iter().enumerate() {
        tag.validate().map_err(|e| config_err(&format!("spaces[{i}]"), e.to_string()))?;
    }
    if config.output.is_empty() {
        return Err(config_err("output", "output prefix must be nonempty"));
    }
    config
        .probes
        .iter()
        .map(|p| prepare_probe(p, config.seed))
        .collect()
}

/// Runs every probe of a validated config and assembles the manifest,
/// reports sorted by probe name.
pub fn run_validated(config: &ExperimentConfig, prepared: &[PreparedProbe]) -> Result<RunManifest> {
    let mut reports = Vec::with_capacity(prepared.len());
    for (spec, probe) in config.probes.iter().zip(prepared) {
        let report = probe.run().map_err(|e| Error::ProbeParams {
            probe: spec.name.clone(),
            path: "runtime".into(),
            detail: e.to_string(),
        })?;
        reports.push(report);
    }
    reports.sort_by(|a, b| a.probe_name.cmp(&b.probe_name));
    Ok(RunManifest {
        config_hash: config.hash(),
        tool_version: TOOL_VERSION.into(),
        config: config.clone(),
        reports,
    })
}

/// Validate, run, and return the manifest without touching the filesystem.
pub fn run(config: &ExperimentConfig) -> Result<RunManifest> {
    let prepared = validate_config(config)?;
    run_validated(config, &prepared)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)
        .map_err(|e| config_err("output", format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| config_err("output", format!("cannot create temp file: {e}")))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| config_err("output", format!("cannot write: {e}")))?;
    tmp.persist(path)
        .map_err(|e| config_err("output", format!("cannot rename into place: {e}")))?;
    Ok(())
}

/// Writes the manifest according to the config's format. Returns the paths
/// written: (json, markdown). Each file is written atomically.
pub fn write_outputs(manifest: &RunManifest) -> Result<(Option<PathBuf>, Option<PathBuf>)> {
    let prefix = &manifest.config.output;
    let mut json_path = None;
    let mut md_path = None;
    if matches!(manifest.config.format, ReportFormat::Json | ReportFormat::Both) {
        let path = PathBuf::from(format!("{prefix}.manifest.json"));
        write_atomic(&path, &manifest.to_json())?;
        json_path = Some(path);
    }
    if matches!(manifest.config.format, ReportFormat::Md | ReportFormat::Both) {
        let path = PathBuf::from(format!("{prefix}.report.md"));
        write_atomic(&path, &manifest.to_markdown())?;
        md_path = Some(path);
    }
    Ok((json_path, md_path))
}

/// Seed precedence: the command-line flag wins, then the environment
/// variable, then the config field.
pub fn resolve_seed(flag: Option<u64>, env_value: Option<&str>, config_seed: u64) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(raw) = env_value {
        let parsed = raw.trim().parse::<u64>().map_err(|e| {
            config_err("seed", format!("{SEED_ENV_VAR} does not parse as u64: {e}"))
        })?;
        return Ok(parsed);
    }
    Ok(config_seed)
}

/// The battery run by `report` with no config file: every probe at its
/// canonical parameters.
pub fn default_config() -> ExperimentConfig {
    use serde_json::json;
    let threshold = "1/1048576"; // 2^-20
    let probes = vec![
        ProbeSpec {
            name: "am_identity".into(),
            params: json!({"tag": {"kind": "seq_l_inf", "dim": 8}, "trials": null}),
        },
        ProbeSpec {
            name: "am_identity".into(),
            params: json!({"tag": {"kind": "pwl_sup"}, "trials": null}),
        },
        ProbeSpec {
            name: "am_identity".into(),
            params: json!({"tag": {"kind": "seq_l1", "dim": 4}, "trials": null}),
        },
        ProbeSpec {
            name: "am_identity".into(),
            params: json!({"tag": {"kind": "pwl_l1"}, "trials": null}),
        },
        ProbeSpec {
            name: "am_defect_curve".into(),
            params: json!({"family": "seq_l1", "n_range": [2, 4, 8, 16], "trials": null}),
        },
        ProbeSpec {
            name: "am_defect_curve".into(),
            params: json!({"family": "seq_l_inf", "n_range": [2, 4, 8, 16], "trials": null}),
        },
        ProbeSpec {
            name: "am_defect_curve".into(),
            params: json!({"family": "pwl_l1_bumps", "n_range": [2, 3, 4, 6], "trials": null}),
        },
        ProbeSpec {
            name: "lebesgue".into(),
            params: json!({"family": "tents", "dim": null, "upto": 64, "threshold": threshold}),
        },
        ProbeSpec {
            name: "lebesgue".into(),
            params: json!({"family": "c0_tails", "dim": 32, "upto": 32, "threshold": threshold}),
        },
        ProbeSpec {
            name: "levi".into(),
            params: json!({"family": "ramps", "dim": null, "stabilize_at": null, "upto": 64}),
        },
        ProbeSpec {
            name: "levi".into(),
            params: json!({"family": "stabilizing", "dim": 4, "stabilize_at": 3, "upto": 12}),
        },
        ProbeSpec {
            name: "levi".into(),
            params: json!({"family": "geometric", "dim": 2, "stabilize_at": null, "upto": 16}),
        },
        ProbeSpec {
            name: "projection_gap".into(),
            params: json!({"dim": 16, "tag": {"kind": "seq_l1", "dim": 16}}),
        },
        ProbeSpec {
            name: "projection_gap".into(),
            params: json!({"dim": 16, "tag": {"kind": "seq_l_inf", "dim": 16}}),
        },
        ProbeSpec {
            name: "product_preservation".into(),
            params: json!({
                "factors": [{"kind": "seq_l_inf", "dim": 2}, {"kind": "seq_l_inf", "dim": 3}],
                "mode": "am",
                "trials": null
            }),
        },
        ProbeSpec {
            name: "product_preservation".into(),
            params: json!({
                "factors": [{"kind": "seq_l_inf", "dim": 2}, {"kind": "seq_l1", "dim": 2}],
                "mode": "am",
                "trials": null
            }),
        },
        ProbeSpec {
            name: "product_preservation".into(),
            params: json!({
                "factors": [{"kind": "seq_l_inf", "dim": 2}, {"kind": "seq_l_inf", "dim": 3}],
                "mode": "levi",
                "trials": null
            }),
        },
        ProbeSpec {
            name: "operator_levi_demo".into(),
            params: json!({
                "family": "stabilizing",
                "dim": 2,
                "stabilize_at": 2,
                "x0": ["1", "0"],
                "upto": 8
            }),
        },
        ProbeSpec {
            name: "operator_lebesgue_demo".into(),
            params: json!({"family": "halving", "dim": 4, "upto": 30, "threshold": threshold}),
        },
        ProbeSpec {
            name: "nb_bounded_identity".into(),
            params: json!({
                "factors": [
                    {"kind": "seq_l_inf", "dim": 1},
                    {"kind": "seq_l_inf", "dim": 1},
                    {"kind": "seq_l_inf", "dim": 1}
                ],
                "constrained": [0, 1]
            }),
        },
        ProbeSpec {
            name: "solidity".into(),
            params: json!({"tag": {"kind": "seq_l1", "dim": 4}, "trials": null}),
        },
        ProbeSpec {
            name: "solidity".into(),
            params: json!({"tag": {"kind": "pwl_sup"}, "trials": null}),
        },
        ProbeSpec {
            name: "solidity".into(),
            params: json!({
                "tag": {"kind": "weighted_l1", "weights": ["1", "1/2", "1/4"]},
                "trials": null
            }),
        },
    ];
    ExperimentConfig {
        probes,
        spaces: vec![],
        seed: DEFAULT_SEED,
        output: default_output(),
        format: ReportFormat::Both,
    }
}

/// Canonical form of a config value, for external hashing tools.
pub fn canonical_config_json(config: &ExperimentConfig) -> String {
    canonical_json(&serde_json::to_value(config).expect("config serializes"))
}

/// Quick registry map for help output: probe name to one-line description.
pub fn probe_registry() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("am_identity", "norm of a join of positives vs the max of norms, exact ratio"),
        ("am_defect_curve", "how far joins of unit-ball sets escape the ball as n grows"),
        ("lebesgue", "decreasing family: norm convergence vs a constant-norm certificate"),
        ("levi", "increasing bounded family: exact supremum or slope-blowup certificate"),
        ("projection_gap", "uniform distance from basis projections to the identity"),
        ("product_preservation", "does the product verdict equal the factor conjunction"),
        ("operator_levi_demo", "rank-one transfer of an increasing family, exact round trip"),
        ("operator_lebesgue_demo", "decreasing positive operators under the uniform tag"),
        ("nb_bounded_identity", "order bounded identity vs partially constrained product"),
        ("solidity", "norm monotonicity on dominated pairs"),
    ])
}
