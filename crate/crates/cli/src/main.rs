use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use kgl_core::commands::{self, CheckKind, Command, Options};
use kgl_core::generate::{generate_instance, KernelMode};
use kgl_core::io;
use kgl_core::numlin::Tolerances;
use kgl_core::report::{list_checks, Report};
use kgl_core::sgpd::families::Family;
use kgl_core::Error;

/// Operator-valued kernels on finite *-semigroupoid actions.
#[derive(Debug, Parser)]
#[command(name = "kgl", version, about)]
struct Cli {
    /// Residual tolerance.
    #[arg(long, global = true, env = "KGL_ATOL")]
    atol: Option<f64>,

    /// Relative eigenvalue cutoff for ranks and signs.
    #[arg(long, global = true)]
    rank_rel: Option<f64>,

    /// Write the report (or, for `generate`, the instance directory) here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random probes per part for reproducing-property checks.
    #[arg(long, global = true, default_value_t = 4)]
    probes: usize,

    /// Print the check tags and what each certifies, then exit.
    #[arg(long)]
    list_checks: bool,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Debug, Args)]
struct Target {
    /// Instance directory or combined JSON file.
    instance: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("kind").required(true).args(["hilbert", "krein"])))]
struct Kind {
    #[arg(long)]
    hilbert: bool,
    #[arg(long)]
    krein: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check the semigroupoid, action and bundle axioms.
    Validate(Target),
    /// Unit, transitivity, inverse and groupoid properties.
    Classify(Target),
    /// One kernel property: hermitian, psd, invariant, bounded or orbit.
    Check {
        #[arg(value_parser = ["hermitian", "psd", "invariant", "bounded", "orbit"])]
        what: String,
        #[command(flatten)]
        target: Target,
    },
    /// Hilbert or Krein linearisation with reproducing-space checks.
    Linearize {
        #[command(flatten)]
        kind: Kind,
        #[command(flatten)]
        target: Target,
    },
    /// Jordan split K = K₊ − K₋ with the disjointness certificate.
    Split(Target),
    /// Representation induced by an invariant kernel.
    Represent {
        #[command(flatten)]
        kind: Kind,
        /// Dominating positive kernel for the Krein construction.
        #[arg(long, requires = "krein")]
        dominant: Option<PathBuf>,
        /// Check that the fundamental symmetries commute with the representation.
        #[arg(long, requires = "krein")]
        reducibility: bool,
        #[command(flatten)]
        target: Target,
    },
    /// Lift every shift to the induced Krein spaces.
    Lift(Target),
    /// Generate an instance of a named family.
    Generate {
        /// pair-groupoid:k, cyclic-rotation:n, dihedral-action:n, cyclic-group:n,
        /// dihedral-group:n or partial-bijections:a,b,...
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// psd_invariant, hermitian_invariant or arbitrary; omitted means no kernel.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
    },
    /// Every check that applies to the instance.
    Report(Target),
}

enum Failure {
    Input(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("kgl: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(report: &Report, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => io::save_json(report, p)?,
        None => print!("{}", report.to_json()),
    }
    for r in report.failures() {
        eprintln!(
            "FAIL {} [{}]: residual {:e} > {:e}{}",
            r.name,
            r.tag,
            r.residual,
            r.tolerance,
            r.witness
                .as_deref()
                .map(|w| format!(", witness {w}"))
                .unwrap_or_default()
        );
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.list_checks {
        print!("{}", list_checks());
        return Ok(());
    }
    let Some(cmd) = cli.command else {
        return Err(Failure::Input("no subcommand given; see --help".into()));
    };
    let defaults = Tolerances::default();
    let tol = Tolerances::new(
        cli.atol.unwrap_or(defaults.atol),
        cli.rank_rel.unwrap_or(defaults.rank_rel),
    )
    .map_err(|e| Failure::Input(e.to_string()))?;
    let opts = Options {
        tol,
        probes: cli.probes,
        seed: 0,
    };
    let out = cli.out.as_deref();
    let command = match cmd {
        Cmd::Validate(t) => {
            let doc = io::read_instance_doc(&t.instance)?;
            return emit(&commands::validate(&doc, &opts)?, out);
        }
        Cmd::Generate {
            family,
            seed,
            mode,
            max_dim,
        } => {
            let family = Family::parse(&family)?;
            let mode = mode.as_deref().map(KernelMode::parse).transpose()?;
            let (inst, dominant) = generate_instance(&family, seed, max_dim, mode)?;
            match out {
                Some(dir) => {
                    io::save_instance(&inst, dir)?;
                    if let Some(l) = dominant {
                        io::save_kernel(&l, &dir.join("dominant.json"))?;
                    }
                }
                None => print!("{}", io::to_json(&inst.to_doc())),
            }
            return Ok(());
        }
        Cmd::Classify(t) => (Command::Classify, t),
        Cmd::Check { what, target } => {
            let kind = CheckKind::parse(&what)
                .ok_or_else(|| Failure::Input(format!("unknown check `{what}`")))?;
            (Command::Check(kind), target)
        }
        Cmd::Linearize { kind, target } => {
            let c = if kind.hilbert {
                Command::LinearizeHilbert
            } else {
                Command::LinearizeKrein
            };
            (c, target)
        }
        Cmd::Split(t) => (Command::Split, t),
        Cmd::Represent {
            kind,
            dominant,
            reducibility,
            target,
        } => {
            if kind.hilbert {
                (Command::RepresentHilbert, target)
            } else {
                let inst = io::load(&target.instance)?;
                let dominant = dominant
                    .map(|p| io::load_kernel(&p, &inst.bundle))
                    .transpose()?;
                let report = commands::run(
                    &Command::RepresentKrein {
                        dominant,
                        reducibility,
                    },
                    &inst,
                    &opts,
                )?;
                return emit(&report, out);
            }
        }
        Cmd::Lift(t) => (Command::Lift, t),
        Cmd::Report(t) => (Command::Report, t),
    };
    let (command, target) = command;
    let inst = io::load(&target.instance)?;
    emit(&commands::run(&command, &inst, &opts)?, out)
}
