use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bergman::harness::{self, Expectation, ExperimentConfig, ExperimentKind, OutputFormat, Sampling, Verdict};
use bergman::{Error, GroupSpec, KernelVariant};

#[derive(Parser)]
#[command(name = "bergman", version, about = "Bergman-kernel geometry experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ricci = −g for the Bergman metric of the configured kernel.
    EinsteinCheck(Opts),
    /// det(u_ij̄) = c·eᵘ for u = log K_Γ.
    MaCheck(Opts),
    /// B-invariant and det g along a ray towards the boundary.
    BLimit(Opts),
    /// Boundary order of J(uˢ) − 1 along the Fefferman recursion.
    Fefferman(Opts),
    /// J(k) = (−1)ⁿ C_n k^{n+2} for the kernel density.
    KernelIdentity(Opts),
    /// Identity, unitarity, closure and fixed-point-freeness of the group.
    GroupValidate(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kernel {
    Averaged,
    ClosedForm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    Identity,
    Violation,
}

#[derive(Args)]
struct Opts {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    /// `trivial`, `cyclic-diagonal:W1,…,Wn/K`, or a JSON group object.
    #[arg(long)]
    group: Option<String>,
    #[arg(long, value_enum)]
    kernel: Option<Kernel>,
    #[arg(long)]
    tol: Option<f64>,
    /// Jet order (must be at least the experiment's minimum).
    #[arg(long)]
    order: Option<usize>,
    /// Seed of random sampling.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    /// Append finite-difference oracle columns.
    #[arg(long)]
    cross_check: bool,
}

impl Command {
    fn split(self) -> (ExperimentKind, Opts) {
        match self {
            Command::EinsteinCheck(o) => (ExperimentKind::EinsteinCheck, o),
            Command::MaCheck(o) => (ExperimentKind::MaCheck, o),
            Command::BLimit(o) => (ExperimentKind::BLimit, o),
            Command::Fefferman(o) => (ExperimentKind::Fefferman, o),
            Command::KernelIdentity(o) => (ExperimentKind::KernelIdentity, o),
            Command::GroupValidate(o) => (ExperimentKind::GroupValidate, o),
        }
    }
}

fn build_config(kind: ExperimentKind, opts: Opts) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &opts.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.experiment != kind {
                return Err(Error::InvalidConfig {
                    field: "experiment".into(),
                    message: format!("config declares `{}` but `{kind}` was requested", cfg.experiment),
                });
            }
            cfg
        }
        None => ExperimentConfig::new(kind, opts.dim.unwrap_or(2)),
    };
    if let Some(n) = opts.dim {
        if n != cfg.dimension {
            cfg.dimension = n;
            if opts.config.is_none() || matches!(cfg.sampling, Sampling::Ray { .. }) {
                cfg.sampling = Sampling::default_for(kind, n.max(1));
            }
        }
    }
    if let Some(g) = &opts.group {
        cfg.group = g.parse::<GroupSpec>()?;
    }
    if let Some(k) = opts.kernel {
        cfg.kernel = match k {
            Kernel::Averaged => KernelVariant::Averaged,
            Kernel::ClosedForm => KernelVariant::ClosedForm,
        };
    }
    if let Some(t) = opts.tol {
        cfg.tolerance = Some(t);
    }
    if let Some(o) = opts.order {
        cfg.jet_order = Some(o);
    }
    if let Some(seed) = opts.seed {
        match &mut cfg.sampling {
            Sampling::Random { seed: s, .. } => *s = seed,
            _ => {
                return Err(Error::InvalidConfig {
                    field: "seed".into(),
                    message: "only random sampling takes a seed".into(),
                })
            }
        }
    }
    if let Some(e) = opts.expect {
        cfg.expect = match e {
            Expect::Identity => Expectation::Identity,
            Expect::Violation => Expectation::Violation,
        };
    }
    if let Some(path) = opts.output {
        cfg.output.path = Some(path);
    }
    if let Some(f) = &opts.format {
        cfg.output.format = f.parse::<OutputFormat>()?;
    }
    cfg.cross_check |= opts.cross_check;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, opts) = cli.command.split();
    let cfg = match build_config(kind, opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match harness::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_numeric() { 3 } else { 2 });
        }
    };
    if let Err(e) = harness::emit(&report, cfg.output.format, cfg.output.path.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    eprintln!(
        "{kind}: {} ({} rows, {} failed, {:.3} s)",
        report.verdict(),
        report.summary.rows,
        report.summary.failed_rows,
        report.wall_time.as_secs_f64()
    );
    if report.has_numeric_errors() {
        return ExitCode::from(3);
    }
    match report.verdict() {
        Verdict::Pass => ExitCode::SUCCESS,
        Verdict::Fail | Verdict::Indeterminate => ExitCode::from(1),
    }
}
