//! `perimkit` — exact experiments on sets of finite perimeter.
//!
//! Every command loads a model (builder string or file), runs one pipeline,
//! and emits a deterministic report: identical invocations produce
//! byte-identical output. Findings — models breaking theorem hypotheses —
//! exit zero; I/O errors, cap overruns, and contract failures exit nonzero.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use perimkit::config::Caps;
use perimkit::decomp::Algorithm;
use perimkit::{Error, Result};

mod cmds;
mod report;

use report::Format;

#[derive(Parser)]
#[command(
    name = "perimkit",
    version,
    about = "Exact finite-perimeter experiments: audits, decompositions, extreme points"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structure audits: isotropy, boundary cancellation, scale constants.
    Audit(AuditArgs),
    /// Indecomposable components of a set; value slices of a function.
    Decompose(DecomposeArgs),
    /// Vertices of the unit-variation ball on a given support.
    Extreme(ExtremeArgs),
    /// Strip-density trends across pre-fractal carpet levels.
    CarpetStudy(CommonArgs),
    /// Invariant suites of every module at the configured caps.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Model: grid:WxH[:side], star:D[:len[:res]], carpet:level:a0,a1,...,
    /// strip:LxH, or file:PATH. carpet-study builds its own family.
    #[arg(long)]
    model: Option<String>,
    /// Max cells for brute-force bipartition search.
    #[arg(long)]
    cap_brute: Option<usize>,
    /// Max cells for full split-family enumeration.
    #[arg(long)]
    cap_xi: Option<usize>,
    /// Max region count in simple-set enumeration.
    #[arg(long)]
    cap_regions: Option<usize>,
    /// Max free coordinates in a variation-ball instance.
    #[arg(long)]
    cap_free: Option<usize>,
    /// Max candidate count in vertex enumeration.
    #[arg(long)]
    cap_patterns: Option<u64>,
    /// Max cell count for exhaustive disjoint-pair audits.
    #[arg(long)]
    cap_pairs: Option<usize>,
    /// Seed for randomized sweeps.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report to this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also tabulate the boundary densities of this set (0,3,7 or @file).
    #[arg(long)]
    set: Option<String>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Set literal (0,3,7), function literal ({"0": "1/2"}), or @file.
    #[arg(long)]
    set: String,
    /// Component-finding strategy.
    #[arg(long, default_value = "fast", value_parser = parse_algorithm)]
    algorithm: Algorithm,
    /// Balancing exponent for the variational strategy (must exceed 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Also report holes and the saturation.
    #[arg(long)]
    saturate: bool,
}

#[derive(Args)]
struct ExtremeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Support cells of the ball (0,3,7 or @file).
    #[arg(long)]
    support: String,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    match s {
        "fast" => Ok(Algorithm::Fast),
        "brute" => Ok(Algorithm::Brute),
        "variational" => Ok(Algorithm::Variational),
        "xi-atoms" => Ok(Algorithm::XiAtoms),
        other => Err(format!(
            "unknown algorithm {other:?}; use fast, brute, variational, or xi-atoms"
        )),
    }
}

impl CommonArgs {
    fn caps(&self) -> Result<Caps> {
        let mut caps = Caps::from_env()?;
        if let Some(v) = self.cap_brute {
            caps.brute = v;
        }
        if let Some(v) = self.cap_xi {
            caps.xi = v;
        }
        if let Some(v) = self.cap_regions {
            caps.regions = v;
        }
        if let Some(v) = self.cap_free {
            caps.free = v;
        }
        if let Some(v) = self.cap_patterns {
            caps.patterns = v;
        }
        if let Some(v) = self.cap_pairs {
            caps.pairs = v;
        }
        Ok(caps)
    }

    fn model(&self) -> Result<&str> {
        self.model
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("--model is required".into()))
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Audit(args) => {
            let caps = args.common.caps()?;
            let report = cmds::cmd_audit(
                args.common.model()?,
                args.set.as_deref(),
                &caps,
                args.common.seed,
            )?;
            report.emit(args.common.format, args.common.out.as_deref())?;
            Ok(false)
        }
        Command::Decompose(args) => {
            let caps = args.common.caps()?;
            let report = cmds::cmd_decompose(
                args.common.model()?,
                &args.set,
                args.algorithm,
                args.alpha,
                args.saturate,
                &caps,
                args.common.seed,
            )?;
            report.emit(args.common.format, args.common.out.as_deref())?;
            Ok(false)
        }
        Command::Extreme(args) => {
            let caps = args.common.caps()?;
            let report = cmds::cmd_extreme(
                args.common.model()?,
                &args.support,
                &caps,
                args.common.seed,
            )?;
            report.emit(args.common.format, args.common.out.as_deref())?;
            Ok(false)
        }
        Command::CarpetStudy(common) => {
            if common.model.is_some() {
                return Err(Error::InvalidArgument(
                    "carpet-study builds its own model family; drop --model".into(),
                ));
            }
            let caps = common.caps()?;
            let report = cmds::cmd_carpet_study(&caps, common.seed)?;
            report.emit(common.format, common.out.as_deref())?;
            Ok(false)
        }
        Command::Verify(common) => {
            let caps = common.caps()?;
            let (report, failed) = cmds::cmd_verify(common.model()?, &caps, common.seed)?;
            report.emit(common.format, common.out.as_deref())?;
            Ok(failed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: invariant suites recorded contract failures");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
