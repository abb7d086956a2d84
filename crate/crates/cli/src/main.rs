//! Command-line front end: run probe suites from configs, inspect operator
//! moduli, and print the canonical counterexample certificates.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riesz_lab::diagnostics::{ProbeReport, Verdict};
use riesz_lab::lattice::LatticeElement;
use riesz_lab::operators::MatrixOp;
use riesz_lab::rational::{approx_decimal, format_rational, parse_rationals, pow2_neg};
use riesz_lab::runner::{
    self, default_config, prepare_probe, probe_registry, resolve_seed, ExperimentConfig,
    ProbeSpec, ReportFormat, SEED_ENV_VAR,
};
use riesz_lab::sampling::{sample_element, SampleSpec};
use riesz_lab::spaces::SpaceTag;
use riesz_lab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "riesz-lab",
    version,
    about = "exact experiments with order, norms, and operators on vector lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputOpts {
    /// Seed override (precedence: this flag, then RIESZ_LAB_SEED, then the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Output path prefix for <prefix>.manifest.json / <prefix>.report.md
    #[arg(long)]
    out: Option<String>,
    /// Output format
    #[arg(long, value_parser = ["json", "md", "both"])]
    format: Option<String>,
    /// Append decimal approximations (marked non-authoritative) to printed rationals
    #[arg(long)]
    approx: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the internal invariant battery and report pass/fail
    Verify {
        /// Dimension range for randomized checks, e.g. 1..6
        #[arg(long, default_value = "1..6")]
        dims: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a single probe by registry name with default parameters
    Probe {
        /// Probe name; try "list" to see the registry
        name: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Print the modulus of a matrix operator, optionally checked at a point
    Modulus {
        /// JSON file holding a MatrixOp
        #[arg(long)]
        matrix: PathBuf,
        /// Optional point, comma-separated rationals like "1,1" or "3/2,0"
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        approx: bool,
    },
    /// Check whether one operator dominates another
    Dominate {
        /// JSON file holding the candidate dominating MatrixOp
        s: PathBuf,
        /// JSON file holding the dominated MatrixOp
        t: PathBuf,
    },
    /// Print a canonical counterexample certificate by name
    Counterexample {
        /// One of: c0-projections, l1-projections, identity-product, tents, ramps, l1-am
        name: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run an experiment config (or the default battery) and write a manifest
    Report {
        /// JSON config file; omitted means the default battery
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        output: OutputOpts,
    },
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Die quietly when a downstream pipe closes, like any other line-oriented tool.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError { message, code }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct CliError {
    message: String,
    code: u8,
}

fn validation(err: impl std::fmt::Display) -> CliError {
    CliError { message: err.to_string(), code: EXIT_VALIDATION }
}

fn runtime(err: impl std::fmt::Display) -> CliError {
    CliError { message: err.to_string(), code: EXIT_RUNTIME }
}

fn dispatch(cli: Cli) -> std::result::Result<ExitCode, CliError> {
    match cli.command {
        Command::Verify { dims, seed } => cmd_verify(&dims, seed),
        Command::Probe { name, output } => cmd_probe(&name, &output),
        Command::Modulus { matrix, x, approx } => cmd_modulus(&matrix, x.as_deref(), approx),
        Command::Dominate { s, t } => cmd_dominate(&s, &t),
        Command::Counterexample { name, output } => cmd_counterexample(&name, &output),
        Command::Report { config, output } => cmd_report(config.as_deref(), &output),
    }
}

fn fmt_rat(value: &riesz_lab::Rational, approx: bool) -> String {
    if approx {
        format!(
            "{} (~{:.6}, non-authoritative)",
            format_rational(value),
            approx_decimal(value)
        )
    } else {
        format_rational(value)
    }
}

// verify: randomized invariant battery, exact, small dims

fn parse_dim_range(raw: &str) -> std::result::Result<(usize, usize), CliError> {
    let parts: Vec<&str> = raw.split("..").collect();
    let bad = || validation(format!("--dims wants LO..HI with 1 <= LO <= HI, got {raw:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: usize = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: usize = parts[1].trim().parse().map_err(|_| bad())?;
    if lo < 1 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn cmd_verify(dims: &str, seed: Option<u64>) -> std::result::Result<ExitCode, CliError> {
    let (lo, hi) = parse_dim_range(dims)?;
    let seed = resolve_seed(seed, std::env::var(SEED_ENV_VAR).ok().as_deref(), 0xA11CE)
        .map_err(validation)?;
    let spec = SampleSpec::with_seed(seed);
    let mut rng = spec.rng_for("cli:verify");
    let mut failures = 0usize;
    let mut check = |label: &str, ok: bool| {
        println!("{}  {}", if ok { "ok " } else { "FAIL" }, label);
        if !ok {
            failures += 1;
        }
    };

    let mut run_axioms = || -> Result<bool> {
        for i in 0..600 {
            let dim = lo + (i % (hi - lo + 1));
            let x = sample_element(&mut rng, dim);
            let y = sample_element(&mut rng, dim);
            let z = sample_element(&mut rng, dim);
            if x.join(&y)? != y.join(&x)? {
                return Ok(false);
            }
            if x.join(&y)?.join(&z)? != x.join(&y.join(&z)?)? {
                return Ok(false);
            }
            if x.meet(&x.join(&y)?)? != x {
                return Ok(false);
            }
            let (abs, pos, neg) = x.abs_pos_neg();
            if pos.sub(&neg)? != x || pos.add(&neg)? != abs || !pos.meet(&neg)?.is_zero() {
                return Ok(false);
            }
            if x.add(&y)? != x.join(&y)?.add(&x.meet(&y)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    check("lattice axioms (randomized, exact)", run_axioms().map_err(runtime)?);

    let mut rng2 = spec.rng_for("cli:verify:modulus");
    let mut run_modulus = || -> Result<bool> {
        for i in 0..60 {
            let dim = 2 + (i % 2);
            let tag = SpaceTag::SeqLInf { dim };
            let entries: Vec<Vec<riesz_lab::Rational>> = (0..dim)
                .map(|_| sample_element(&mut rng2, dim).coords().to_vec())
                .collect();
            let t = MatrixOp::new(entries, tag.clone(), tag)?;
            let x = sample_element(&mut rng2, dim).abs();
            if t.modulus_matrix().apply(&x)? != t.modulus_rk(&x)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    check("modulus closed form vs sign-pattern oracle", run_modulus().map_err(runtime)?);

    let run_solidity = || -> Result<bool> {
        for tag in [
            SpaceTag::SeqL1 { dim: 4 },
            SpaceTag::SeqLInf { dim: 4 },
            SpaceTag::PwlSup,
            SpaceTag::PwlL1,
        ] {
            let outcome = riesz_lab::spaces::solidity_check(&tag, &spec)?;
            if !outcome.holds {
                return Ok(false);
            }
        }
        Ok(true)
    };
    check("norm solidity on dominated pairs", run_solidity().map_err(runtime)?);

    let mut run_closure = || -> Result<bool> {
        use riesz_lab::lattice::FiniteSet;
        for i in 0..120 {
            let dim = lo + (i % (hi - lo + 1));
            let elements: Vec<LatticeElement> =
                (0..(1 + i % 4)).map(|_| sample_element(&mut rng, dim)).collect();
            let set = FiniteSet::new(elements)?;
            let closed = set.sup_closure(256)?;
            if set.finite_sup() != closed.finite_sup() {
                return Ok(false);
            }
        }
        Ok(true)
    };
    check("sup closure preserves suprema", run_closure().map_err(runtime)?);

    if failures == 0 {
        println!("verify: all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("verify: {failures} check(s) failed");
        Ok(ExitCode::from(EXIT_RUNTIME))
    }
}

// probe / counterexample / report plumbing

fn print_report(report: &ProbeReport, approx: bool) {
    println!("{}", report.to_markdown());
    if approx {
        if let Some(curve) = &report.curve {
            let rendered: Vec<String> = curve
                .iter()
                .filter_map(|(k, v)| {
                    riesz_lab::rational::parse_rational(v)
                        .ok()
                        .map(|r| format!("({k}, ~{:.6})", approx_decimal(&r)))
                })
                .collect();
            println!("approximate curve (non-authoritative): {}", rendered.join(" "));
        }
    }
}

fn write_if_requested(
    reports: Vec<ProbeReport>,
    probes: Vec<ProbeSpec>,
    seed: u64,
    output: &OutputOpts,
) -> std::result::Result<(), CliError> {
    let Some(prefix) = &output.out else { return Ok(()) };
    let format = match output.format.as_deref() {
        None => ReportFormat::Both,
        Some(raw) => raw.parse().map_err(validation)?,
    };
    let config = ExperimentConfig {
        probes,
        spaces: vec![],
        seed,
        output: prefix.clone(),
        format,
    };
    let mut manifest = runner::RunManifest {
        config_hash: config.hash(),
        tool_version: runner::TOOL_VERSION.into(),
        config,
        reports,
    };
    manifest.reports.sort_by(|a, b| a.probe_name.cmp(&b.probe_name));
    let (json_path, md_path) = runner::write_outputs(&manifest).map_err(runtime)?;
    for p in [json_path, md_path].into_iter().flatten() {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn default_params_for(name: &str) -> Option<serde_json::Value> {
    default_config()
        .probes
        .iter()
        .find(|p| p.name == name)
        .map(|p| p.params.clone())
}

fn cmd_probe(name: &str, output: &OutputOpts) -> std::result::Result<ExitCode, CliError> {
    if name == "list" {
        println!("available probes:");
        for (probe, blurb) in probe_registry() {
            println!("  {probe:24} {blurb}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let Some(params) = default_params_for(name) else {
        let known: Vec<&str> = probe_registry().keys().copied().collect();
        return Err(validation(format!(
            "unknown probe {name:?}; known: {}",
            known.join(", ")
        )));
    };
    let seed = resolve_seed(
        output.seed,
        std::env::var(SEED_ENV_VAR).ok().as_deref(),
        riesz_lab::sampling::DEFAULT_SEED,
    )
    .map_err(validation)?;
    let spec = ProbeSpec { name: name.into(), params };
    let prepared = prepare_probe(&spec, seed).map_err(validation)?;
    let report = prepared.run().map_err(runtime)?;
    print_report(&report, output.approx);
    write_if_requested(vec![report], vec![spec], seed, output)?;
    Ok(ExitCode::SUCCESS)
}

fn load_matrix(path: &std::path::Path) -> std::result::Result<MatrixOp, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
    let op: MatrixOp = serde_json::from_str(&text)
        .map_err(|e| validation(format!("{} does not parse as an operator: {e}", path.display())))?;
    Ok(op)
}

fn cmd_modulus(
    path: &std::path::Path,
    x: Option<&str>,
    approx: bool,
) -> std::result::Result<ExitCode, CliError> {
    let op = load_matrix(path)?;
    let modulus = op.modulus_matrix();
    println!("modulus entries:");
    for row in modulus.entries() {
        let cells: Vec<String> = row.iter().map(|v| fmt_rat(v, approx)).collect();
        println!("  [{}]", cells.join(", "));
    }
    if let Some(raw) = x {
        let items: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
        let coords = parse_rationals(&items).map_err(validation)?;
        let point = LatticeElement::new(coords).map_err(validation)?;
        let oracle = op.modulus_rk(&point).map_err(runtime)?;
        let direct = modulus.apply(&point).map_err(runtime)?;
        let cells: Vec<String> = oracle.coords().iter().map(|v| fmt_rat(v, approx)).collect();
        println!("modulus at x: ({})", cells.join(", "));
        if direct == oracle {
            println!("oracle agrees");
        } else {
            return Err(runtime("closed form and sign-pattern oracle disagree"));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_dominate(
    s_path: &std::path::Path,
    t_path: &std::path::Path,
) -> std::result::Result<ExitCode, CliError> {
    let s = load_matrix(s_path)?;
    let t = load_matrix(t_path)?;
    let dominates = s.dominates(&t).map_err(validation)?;
    if dominates {
        println!("dominates: yes");
    } else {
        println!("dominates: no");
        if let Some((i, j, need, have)) = s.domination_witness(&t).map_err(validation)? {
            println!(
                "witness: entry ({i}, {j}) needs |T| <= S there, |T| = {}, S = {}",
                format_rational(&need),
                format_rational(&have)
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn counterexample_registry() -> Vec<(&'static str, &'static str)> {
    vec![
        ("c0-projections", "basis projections increase to the identity, uniform gap stays 1"),
        ("l1-projections", "the same gap table under the summed norm"),
        ("identity-product", "order bounded identity, unbounded on a partial-constraint neighborhood"),
        ("tents", "decreasing tents with constant norm 1: order-to-zero without norm-to-zero"),
        ("ramps", "increasing bounded ramps whose running suprema steepen without bound"),
        ("l1-am", "summed norm inflates joins: defect(n) == n at the basis witness"),
    ]
}

fn cmd_counterexample(
    name: &str,
    output: &OutputOpts,
) -> std::result::Result<ExitCode, CliError> {
    let seed = resolve_seed(
        output.seed,
        std::env::var(SEED_ENV_VAR).ok().as_deref(),
        riesz_lab::sampling::DEFAULT_SEED,
    )
    .map_err(validation)?;
    let spec = SampleSpec::with_seed(seed);
    let threshold = pow2_neg(20);
    let report: std::result::Result<ProbeReport, Error> = match name {
        "c0-projections" => riesz_lab::diagnostics::projection_gap(
            16,
            &SpaceTag::SeqLInf { dim: 16 },
            &spec,
        ),
        "l1-projections" => riesz_lab::diagnostics::projection_gap(
            16,
            &SpaceTag::SeqL1 { dim: 16 },
            &spec,
        ),
        "identity-product" => riesz_lab::diagnostics::nb_bounded_identity_probe(
            &[
                SpaceTag::SeqLInf { dim: 1 },
                SpaceTag::SeqLInf { dim: 1 },
                SpaceTag::SeqLInf { dim: 1 },
            ],
            &[0, 1],
            &spec,
        ),
        "tents" => riesz_lab::diagnostics::lebesgue_probe(
            &riesz_lab::diagnostics::SequenceFamily::tents(),
            64,
            &threshold,
            &spec,
        ),
        "ramps" => riesz_lab::diagnostics::levi_probe(
            &riesz_lab::diagnostics::SequenceFamily::ramps(),
            64,
            &spec,
        ),
        "l1-am" => riesz_lab::diagnostics::am_defect_curve(
            riesz_lab::diagnostics::DefectFamily::SeqL1,
            &[2, 4, 8, 16],
            &spec,
        ),
        unknown => {
            eprintln!("unknown counterexample {unknown:?}; registry:");
            for (key, blurb) in counterexample_registry() {
                eprintln!("  {key:18} {blurb}");
            }
            return Ok(ExitCode::from(EXIT_VALIDATION));
        }
    };
    let report = report.map_err(runtime)?;
    print_report(&report, output.approx);
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(
    config_path: Option<&std::path::Path>,
    output: &OutputOpts,
) -> std::result::Result<ExitCode, CliError> {
    let mut config = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text).map_err(validation)?
        }
        None => default_config(),
    };
    config.seed = resolve_seed(
        output.seed,
        std::env::var(SEED_ENV_VAR).ok().as_deref(),
        config.seed,
    )
    .map_err(validation)?;
    if let Some(prefix) = &output.out {
        config.output = prefix.clone();
    }
    if let Some(raw) = output.format.as_deref() {
        config.format = raw.parse().map_err(validation)?;
    }
    let prepared = runner::validate_config(&config).map_err(validation)?;
    let manifest = runner::run_validated(&config, &prepared).map_err(runtime)?;
    let (json_path, md_path) = runner::write_outputs(&manifest).map_err(runtime)?;
    let mut holds = 0usize;
    let mut fails = 0usize;
    let mut open = 0usize;
    for r in &manifest.reports {
        match r.verdict {
            Verdict::Holds => holds += 1,
            Verdict::Fails => fails += 1,
            Verdict::Inconclusive => open += 1,
        }
    }
    println!(
        "ran {} probes: {holds} hold, {fails} fail (failure verdicts are results, not errors), {open} inconclusive",
        manifest.reports.len()
    );
    for p in [json_path, md_path].into_iter().flatten() {
        println!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}
