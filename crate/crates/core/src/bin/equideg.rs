use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use equideg::analysis::Analysis;
use equideg::config::RunConfig;
use equideg::degree::equivariant_degree;
use equideg::otopy::{scaling_otopy, straight_line_otopy, verify_additivity, verify_otopy_invariance};
use equideg::realize::{linearize, realize};
use equideg::report::{
    analyze_report, render_analyze, render_degree, render_realize, render_verify, DegreeOutput, RealizeOutput, VerifyItem,
};
use equideg::Error;

#[derive(Parser)]
#[command(name = "equideg", version, about = "Equivariant degree vectors of local maps under finite orthogonal groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Exit with code 4 when the classification hypothesis fails.
    #[arg(long, global = true)]
    strict: bool,
    /// Chart cell size.
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq)]
enum Command {
    /// Group, orbit types, quotient components and hypothesis status.
    Analyze,
    /// Degree vector of `[map]`.
    Degree,
    /// Map realizing the `[[target]]` vector, with a round-trip check.
    Realize,
    /// Additivity or otopy invariance for `[map]`, `[map2]` and `[otopy]`.
    Verify,
}

const EXIT_RUNTIME: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_HYPOTHESIS: u8 = 4;
const EXIT_PROPERTY: u8 = 5;

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DegenerateZero { .. } => EXIT_DEGENERATE,
            Error::Config(_)
            | Error::Parse(_)
            | Error::DimensionMismatch { .. }
            | Error::NotOrthogonal { .. }
            | Error::CapExceeded { .. }
            | Error::EmptyDomain
            | Error::AmbiguousIsotropy { .. }
            | Error::ResolutionTooCoarse { .. }
            | Error::InvalidKey { .. }
            | Error::Unrealizable { .. }
            | Error::Overlap { .. }
            | Error::NotInvariantSubspace { .. } => EXIT_INVALID,
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
    } else {
        print!("{}", text());
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let path = cli.config.as_ref().ok_or_else(|| fail(EXIT_INVALID, "--config PATH is required"))?;
    let mut config = RunConfig::load(path)?;
    if let Some(d) = cli.delta {
        config.options.delta = Some(d);
    }
    if let Some(s) = cli.seed {
        config.options.seed = s;
    }
    let analysis = config.analysis()?;
    if cli.command != Command::Analyze && cli.strict && !analysis.hypothesis.holds {
        return Err(fail(
            EXIT_HYPOTHESIS,
            format!(
                "hypothesis violated (0 in domain, dim V^G = {}) and --strict is set",
                analysis.hypothesis.fixed_dim
            ),
        ));
    }
    match cli.command {
        Command::Analyze => {
            let r = analyze_report(&analysis)?;
            emit(cli.json, &r, || render_analyze(&r));
            Ok(())
        }
        Command::Degree => degree(cli, &config, &analysis),
        Command::Realize => realize_cmd(cli, &config, &analysis),
        Command::Verify => verify(cli, &config, &analysis),
    }
}

fn degree(cli: &Cli, config: &RunConfig, analysis: &Analysis) -> Result<(), Failure> {
    let f = config
        .build_map(analysis)?
        .ok_or_else(|| fail(EXIT_INVALID, "degree needs a [map] section"))?;
    let validation = analysis.validate(&f);
    if !validation.pass() {
        let what = if validation.equivariance.pass { "locality" } else { "equivariance" };
        return Err(fail(
            EXIT_INVALID,
            format!("invalid map: {what} check failed: {}", serde_json::to_string(&validation).unwrap_or_default()),
        ));
    }
    let report = equivariant_degree(&f, analysis)?;
    let out = DegreeOutput {
        validation: &validation,
        report: &report,
        hypothesis: &analysis.hypothesis,
        warnings: &analysis.warnings,
    };
    emit(cli.json, &out, || format!("{}\n{}", render_degree(&out), report.vector.to_machine_block()));
    Ok(())
}

fn realize_cmd(cli: &Cli, config: &RunConfig, analysis: &Analysis) -> Result<(), Failure> {
    if config.target.is_empty() {
        eprintln!("note: no [[target]] entries; realizing the zero vector");
    }
    let target = config.target_vector();
    let f = realize(analysis, &target)?;
    let atoms = match f.body() {
        equideg::map::MapBody::Atoms(list) => list.atoms.iter().map(|a| a.to_record()).collect(),
        _ => Vec::new(),
    };
    let round_trip = equivariant_degree(&f, analysis)?.vector;
    let out = RealizeOutput {
        pass: round_trip == target,
        target,
        atoms,
        round_trip,
    };
    emit(cli.json, &out, || format!("{}\n{}", render_realize(&out), out.round_trip.to_machine_block()));
    if out.pass {
        Ok(())
    } else {
        Err(fail(EXIT_PROPERTY, "round-trip degree differs from the target"))
    }
}

fn otopy_item(label: &str, result: equideg::Result<equideg::otopy::Otopy>, analysis: &Analysis) -> Result<VerifyItem, Failure> {
    match result {
        Ok(h) => Ok(VerifyItem::Otopy {
            label: label.into(),
            report: verify_otopy_invariance(&h, analysis, analysis.options.t_samples),
        }),
        Err(Error::NotAnOtopy { t, point, norm }) => Ok(VerifyItem::NotAnOtopy {
            label: label.into(),
            t,
            point,
            norm,
        }),
        Err(e) => Err(e.into()),
    }
}

fn verify(cli: &Cli, config: &RunConfig, analysis: &Analysis) -> Result<(), Failure> {
    let f = config.build_map(analysis)?;
    let g = config.build_map2(analysis)?;
    let mut items = Vec::new();
    if config.otopy.is_some() {
        items.push(otopy_item("expression family", config.build_otopy(analysis).map(Option::unwrap), analysis)?);
    }
    match (&f, &g) {
        (Some(f), Some(g)) => {
            if f.domain().check_disjoint(&g.domain()).is_ok() {
                items.push(VerifyItem::Additivity(verify_additivity(f, g, analysis)?));
            } else {
                items.push(otopy_item("straight line map -> map2", straight_line_otopy(f, g, analysis), analysis)?);
            }
        }
        (Some(f), None) => {
            items.push(otopy_item("scaling (1+t)f", scaling_otopy(f, analysis), analysis)?);
            let report = equivariant_degree(f, analysis)?;
            for z in report.strata.iter().flat_map(|s| &s.zeros) {
                let (_, h) = linearize(f, z, analysis)?;
                let label = format!("linearization at {:?}", z.point);
                items.push(otopy_item(&label, Ok(h), analysis)?);
            }
        }
        (None, Some(_)) => return Err(fail(EXIT_INVALID, "[map2] needs a [map] section")),
        (None, None) if items.is_empty() => return Err(fail(EXIT_INVALID, "verify needs [map], [map2] or [otopy]")),
        (None, None) => {}
    }
    emit(cli.json, &items, || render_verify(&items));
    if items.iter().all(VerifyItem::pass) {
        Ok(())
    } else {
        Err(fail(EXIT_PROPERTY, "property check failed"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
