use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orbisymp::cocycle;
use orbisymp::corpus;
use orbisymp::flows::{self, FlowSpec};
use orbisymp::formats::{self, FormatError, SplittingFile};
use orbisymp::orbifold::{self, OrbifoldSignature};
use orbisymp::rep::{self, ConeSeed, GroupRep};
use orbisymp::symplectic::{self, PairingSummary};
use orbisymp::verify::{self, Options, Status, Suite};

#[derive(Parser)]
#[command(name = "orbisymp", version, about = "Symplectic pairing, splittings and twist flows for SL(3,R) orbifold representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Formula dimension of the deformation space, and the numeric one given a representation.
    Dims {
        signature: PathBuf,
        #[arg(long)]
        rep: Option<PathBuf>,
    },
    /// Write a Fuchsian (or, for a pants, generic hyperbolic) representation.
    Fuchsian {
        signature: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Seed for constructions that draw random data.
        #[arg(long, default_value_t = 13)]
        seed: u64,
    },
    /// Evaluate the pairing of two cocycles by both formulas.
    Pairing {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Apply a twist or bulge flow along one curve of a splitting.
    Flow {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        splitting: PathBuf,
        /// `{"curve": int, "flavor": "L"|"M", "t": real}`
        #[arg(long)]
        spec: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Cut an orbifold along the curves of a splitting file and write the pieces.
    Split {
        signature: PathBuf,
        splitting: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write the standard representations with two seeded cocycles each.
    Corpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a verification suite.
    Verify {
        /// fox, dims, pairing, decomposition, flows or all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Record wall time per check; reports are then no longer reproducible.
        #[arg(long)]
        timings: bool,
    },
}

/// Exit 1 for mathematical failures, 2 for unusable input.
enum CliError {
    Failed(String),
    Input(String),
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Rep(e) => CliError::Failed(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

fn failed<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Failed(e.to_string())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(value).map_err(failed)?);
    Ok(())
}

fn emit<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    match out {
        Some(p) => Ok(formats::write_json(p, value)?),
        None => print_json(value),
    }
}

fn fuchsian(sig: &OrbifoldSignature, seed: u64) -> Result<GroupRep, CliError> {
    let c = &sig.cone_orders;
    match (sig.genus, sig.boundary, c.len()) {
        (2, 0, 0) => Ok(corpus::genus2_fuchsian()),
        (0, 3, 0) => Ok(corpus::pants_generic(seed)),
        (0, 0, 3) => rep::fuchsian_triangle(c[0], c[1], c[2]).map_err(failed),
        (0, 0, n) if n >= 4 => rep::fuchsian_cone_sphere(c, &ConeSeed::symmetric(n, 0.5)).map_err(failed),
        _ => Err(CliError::Failed(format!(
            "no built-in construction for genus {}, {} boundary components, cones {:?}",
            sig.genus, sig.boundary, c
        ))),
    }
}

fn run(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Dims { signature, rep } => {
            let sig = formats::read_signature(&signature)?;
            let formula = sig.dimension_closed().ok();
            let numeric = match rep {
                Some(p) => {
                    let rep = formats::read_rep(&p)?;
                    if rep.signature() != &sig {
                        return Err(CliError::Input("representation and signature files disagree".into()));
                    }
                    let z = symplectic::tangent_space(&rep).map_err(failed)?;
                    Some(cocycle::h1_complement(&rep, &z).map_err(failed)?.dim())
                }
                None => None,
            };
            print_json(&serde_json::json!({ "formula": formula, "numeric": numeric }))?;
            Ok(true)
        }
        Command::Fuchsian { signature, out, seed } => {
            let sig = formats::read_signature(&signature)?;
            formats::write_rep(&out, &fuchsian(&sig, seed)?)?;
            Ok(true)
        }
        Command::Pairing { rep, u, v, report } => {
            let rep = formats::read_rep(&rep)?;
            let (u, v) = (formats::read_cocycle(&u)?, formats::read_cocycle(&v)?);
            for (name, c) in [("u", &u), ("v", &v)] {
                if let Some(g) = rep.generators().into_iter().find(|g| !c.values().contains_key(g)) {
                    return Err(CliError::Input(format!("cocycle {name} has no value at {g}")));
                }
            }
            let r = symplectic::pairing_report(&rep, &u, &v).map_err(failed)?;
            emit(report.as_deref(), &PairingSummary::from(&r))?;
            Ok(true)
        }
        Command::Flow { rep, splitting, spec, out } => {
            let rep = formats::read_rep(&rep)?;
            let curves = formats::read_splitting(&splitting)?;
            let spec: FlowSpec = formats::read_json(&spec)?;
            let sp = orbifold::split(rep.signature(), &curves).map_err(failed)?;
            let graph = flows::build_graph(rep.signature(), &sp).map_err(failed)?;
            formats::write_rep(&out, &flows::twist_flow(&rep, &graph, &spec).map_err(failed)?)?;
            Ok(true)
        }
        Command::Split { signature, splitting, out } => {
            let sig = formats::read_signature(&signature)?;
            let f: SplittingFile = formats::read_json(&splitting)?;
            let sp = orbifold::split(&sig, &f.curves).map_err(failed)?;
            emit(out.as_deref(), &sp)?;
            Ok(true)
        }
        Command::Corpus { dir, seed } => {
            std::fs::create_dir_all(&dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for entry in corpus::standard().map_err(failed)? {
                let z = symplectic::tangent_space(&entry.rep).map_err(failed)?;
                formats::write_json(&dir.join(format!("{}.signature.json", entry.name)), entry.rep.signature())?;
                formats::write_rep(&dir.join(format!("{}.rep.json", entry.name)), &entry.rep)?;
                for tag in ["u", "v"] {
                    let c = corpus::random_combination(&z, &mut rng);
                    formats::write_cocycle(&dir.join(format!("{}.{tag}.json", entry.name)), &c)?;
                }
            }
            Ok(true)
        }
        Command::Verify { suite, seed, report, timings } => {
            let suite: Suite = suite.parse().map_err(CliError::Input)?;
            let r = verify::run(suite, seed, &Options { timings, threads: None });
            for c in &r.checks {
                let tag = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Skip => "skip",
                };
                println!("{tag} {} max_error={:e} tolerance={:e}", c.name, c.max_error, c.tolerance);
            }
            if let Some(p) = report {
                formats::write_json(&p, &r)?;
            }
            Ok(r.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
