//! The `jetphase` command line: JSON files in, one JSON document out.
//!
//! Exit codes: `0` success, `1` a check ran with `--assert` and its verdict
//! was false, `2` bad input or a library error (reported as
//! `{"error": {"kind", "detail"}}` on stderr).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::filtered::{factorize, op_exp, op_log, FiltrationSpec, SplitSpec};
use crate::foi::{self, PhaseDensityPair, VectorField};
use crate::grading::{GradingContext, TruncationSpec};
use crate::jet::Jet;
use crate::json::{self, JsonFormat};
use crate::operator::FormalOperator;
use crate::oscillatory::{self, PointDistribution};
use crate::star::{self, PoissonMatrix};

/// Environment variable capping every requested truncation order.
pub const MAX_DEGREE_VAR: &str = "JETPHASE_MAX_DEGREE";
pub const DEFAULT_MAX_DEGREE: i64 = 64;

#[derive(Parser, Debug)]
#[command(name = "jetphase", version, about = "Exact formal oscillatory integrals, oscillatory distributions and star products")]
struct Cli {
    /// Truncation order N.
    #[arg(short = 'N', long, global = true, default_value_t = 3)]
    order: i64,
    /// Exit with status 1 when a check's verdict is false.
    #[arg(long, global = true)]
    assert: bool,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Formal differential operators.
    #[command(subcommand)]
    Op(OpCommand),
    /// Factor exp(γ) = a·b along a pair of complementary subalgebras.
    Factor {
        #[arg(long)]
        op: String,
        /// ab: multiplication ⊕ annihilators, bc: δ-kernel ⊕ constant
        /// coefficients, ef: divergence ⊕ multiplication.
        #[arg(long)]
        split: String,
        #[arg(long, default_value = "nu")]
        grading: String,
    },
    /// Point-supported distributions.
    #[command(subcommand)]
    Osc(OscCommand),
    /// Formal oscillatory integrals.
    #[command(subcommand)]
    Foi(FoiCommand),
    /// Star products.
    #[command(subcommand)]
    Star(StarCommand),
}

#[derive(Args, Debug)]
struct Graded {
    /// Truncation grading: nu, standard or aux.
    #[arg(long, default_value = "nu")]
    grading: String,
}

#[derive(Subcommand, Debug)]
enum OpCommand {
    Compose {
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        #[command(flatten)]
        g: Graded,
    },
    Exp {
        #[arg(long)]
        op: String,
        #[command(flatten)]
        g: Graded,
    },
    Log {
        #[arg(long)]
        op: String,
        #[command(flatten)]
        g: Graded,
    },
    /// Full symbol as a jet in x and xi.
    Symbol {
        #[arg(long)]
        op: String,
    },
    /// Naturalness and membership in the ν-Lie algebra.
    Natural {
        #[arg(long)]
        op: String,
    },
}

#[derive(Subcommand, Debug)]
enum OscCommand {
    Check {
        #[arg(long)]
        distribution: String,
    },
    /// The bilinear form b^{ij} = Λ₁(xⁱxʲ).
    Beta {
        #[arg(long)]
        distribution: String,
    },
    /// Pushforward by a diffeomorphism jet (array of component jets).
    Push {
        #[arg(long)]
        distribution: String,
        #[arg(long)]
        phi: String,
    },
}

#[derive(Subcommand, Debug)]
enum FoiCommand {
    /// Λ(f) for the pair's oscillatory integral.
    Eval {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        amplitude: String,
    },
    Distribution {
        #[arg(long)]
        pair: String,
    },
    Recover {
        #[arg(long)]
        distribution: String,
    },
    CheckAxiom {
        #[arg(long)]
        pair: String,
        /// Defaults to the pair's own distribution.
        #[arg(long)]
        distribution: Option<String>,
        /// Vector field: array of component jets.
        #[arg(long)]
        field: String,
        #[arg(long)]
        amplitude: String,
    },
    CheckStrong {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        distribution: Option<String>,
        #[arg(long)]
        amplitude: String,
    },
}

#[derive(Subcommand, Debug)]
enum StarCommand {
    Moyal {
        #[arg(long)]
        pi: String,
    },
    Mul {
        #[arg(long)]
        star: String,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
    },
    Natural {
        #[arg(long)]
        star: String,
    },
    TwoPoint {
        #[arg(long)]
        star: String,
    },
    Exp {
        #[arg(long)]
        star: String,
        #[arg(long)]
        jet: String,
        #[arg(long, default_value = "aux")]
        grading: String,
    },
    /// Full symbol of left star multiplication by the jet.
    Symbol {
        #[arg(long)]
        star: String,
        #[arg(long)]
        jet: String,
    },
}

/// A command result: the document and, for checks, the verdict.
struct Outcome {
    doc: Value,
    verdict: Option<bool>,
}

impl Outcome {
    fn data(doc: Value) -> Self {
        Outcome { doc, verdict: None }
    }

    fn check(doc: Value, verdict: bool) -> Self {
        Outcome { doc, verdict: Some(verdict) }
    }
}

/// Reads a JSON argument: a file path, or inline JSON when it starts with
/// `{` or `[`.
fn load(arg: &str) -> Result<Value> {
    let text = if arg.trim_start().starts_with(['{', '[']) {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::Parse(format!("cannot read {arg}: {e}")))?
    };
    json::parse_value(&text)
}

fn load_as<T: JsonFormat>(arg: &str) -> Result<T> {
    T::from_json(&load(arg)?)
}

fn grading(name: &str) -> Result<GradingContext> {
    GradingContext::by_name(name).ok_or_else(|| Error::Parse(format!("unknown grading {name:?}")))
}

fn max_degree() -> Result<i64> {
    match std::env::var(MAX_DEGREE_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Parse(format!("{MAX_DEGREE_VAR}={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_MAX_DEGREE),
    }
}

fn distribution_or_own(arg: &Option<String>, pair: &PhaseDensityPair, n: i64) -> Result<PointDistribution> {
    match arg {
        Some(a) => load_as(a),
        None => foi::foi_distribution(pair, n),
    }
}

fn defect_doc(d: &foi::Defect) -> Outcome {
    let vanishes = d.vanishes();
    Outcome::check(json!({"defect": d.series.to_json(), "exact_order": d.exact_order, "vanishes": vanishes}), vanishes)
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let n = cli.order;
    if n < 0 {
        return Err(Error::Precondition(format!("order must be nonnegative, got {n}")));
    }
    let limit = max_degree()?;
    if n > limit {
        return Err(Error::LimitExceeded { requested: n, limit });
    }
    Ok(match &cli.command {
        Command::Op(cmd) => match cmd {
            OpCommand::Compose { lhs, rhs, g } => {
                let trunc = TruncationSpec::new(grading(&g.grading)?, n);
                let a: FormalOperator = load_as(lhs)?;
                Outcome::data(a.compose(&load_as(rhs)?, &trunc)?.to_json())
            }
            OpCommand::Exp { op, g } => {
                let gr = grading(&g.grading)?;
                let a: FormalOperator = load_as(op)?;
                Outcome::data(op_exp(&a, &FiltrationSpec::new(gr.clone()), &TruncationSpec::new(gr, n))?.to_json())
            }
            OpCommand::Log { op, g } => {
                let gr = grading(&g.grading)?;
                let a: FormalOperator = load_as(op)?;
                Outcome::data(op_log(&a, &FiltrationSpec::new(gr.clone()), &TruncationSpec::new(gr, n))?.to_json())
            }
            OpCommand::Symbol { op } => Outcome::data(load_as::<FormalOperator>(op)?.full_symbol().to_json()),
            OpCommand::Natural { op } => {
                let r = load_as::<FormalOperator>(op)?.classify();
                Outcome::check(
                    json!({"is_natural": r.is_natural, "in_g_nu": r.in_g_nu, "standard_degree": r.standard_degree}),
                    r.is_natural,
                )
            }
        },
        Command::Factor { op, split, grading: g } => {
            let split = SplitSpec::by_name(split)
                .ok_or_else(|| Error::Parse(format!("unknown split {split:?}; expected ab, bc or ef")))?;
            let gr = grading(g)?;
            let a: FormalOperator = load_as(op)?;
            let f = factorize(&a, split, &FiltrationSpec::new(gr.clone()), &TruncationSpec::new(gr, n))?;
            Outcome::data(json!({"a": f.a.to_json(), "b": f.b.to_json(), "residual_degrees": f.residual_degrees}))
        }
        Command::Osc(cmd) => match cmd {
            OscCommand::Check { distribution } => {
                let v = oscillatory::is_oscillatory(&load_as(distribution)?, n)?;
                let x = v.x.as_ref().map_or(Value::Null, FormalOperator::to_json);
                Outcome::check(json!({"oscillatory": v.oscillatory, "x": x}), v.oscillatory)
            }
            OscCommand::Beta { distribution } => {
                let b = oscillatory::beta_form(&load_as(distribution)?)?;
                let nondegenerate = b.is_nondegenerate();
                Outcome::check(
                    json!({
                        "matrix": json::matrix_to_json(&b.matrix),
                        "determinant": json::scalar_to_json(&b.determinant()),
                        "nondegenerate": nondegenerate,
                    }),
                    nondegenerate,
                )
            }
            OscCommand::Push { distribution, phi } => {
                let phi = json::jets_from_json(&load(phi)?)?;
                let l: PointDistribution = load_as(distribution)?;
                Outcome::data(oscillatory::pushforward_diffeo(&l, &phi, &TruncationSpec::nu(n))?.to_json())
            }
        },
        Command::Foi(cmd) => match cmd {
            FoiCommand::Eval { pair, amplitude } => {
                let f: Jet = load_as(amplitude)?;
                Outcome::data(foi::foi_eval(&load_as(pair)?, &f, n)?.to_json())
            }
            FoiCommand::Distribution { pair } => Outcome::data(foi::foi_distribution(&load_as(pair)?, n)?.to_json()),
            FoiCommand::Recover { distribution } => {
                Outcome::data(foi::recover_phase(&load_as(distribution)?, n)?.to_json())
            }
            FoiCommand::CheckAxiom { pair, distribution, field, amplitude } => {
                let pair: PhaseDensityPair = load_as(pair)?;
                let l = distribution_or_own(distribution, &pair, n)?;
                let v = VectorField::new(json::jets_from_json(&load(field)?)?)?;
                defect_doc(&foi::check_foi_axiom(&l, &pair, &v, &load_as(amplitude)?, n)?)
            }
            FoiCommand::CheckStrong { pair, distribution, amplitude } => {
                let pair: PhaseDensityPair = load_as(pair)?;
                let l = distribution_or_own(distribution, &pair, n)?;
                defect_doc(&foi::check_strong(&l, &pair, &load_as(amplitude)?, n)?)
            }
        },
        Command::Star(cmd) => match cmd {
            StarCommand::Moyal { pi } => Outcome::data(star::moyal_star(&load_as::<PoissonMatrix>(pi)?, n).to_json()),
            StarCommand::Mul { star: s, lhs, rhs } => {
                let s = json::star_from_json(&load(s)?, n)?;
                let f: Jet = load_as(lhs)?;
                Outcome::data(star::star_multiply(&s, &f, &load_as(rhs)?, n)?.to_json())
            }
            StarCommand::Natural { star: s } => {
                let natural = star::is_natural_star(&json::star_from_json(&load(s)?, n)?, n);
                Outcome::check(json!({ "natural": natural }), natural)
            }
            StarCommand::TwoPoint { star: s } => {
                Outcome::data(star::two_point_distribution(&json::star_from_json(&load(s)?, n)?, n)?.to_json())
            }
            StarCommand::Exp { star: s, jet, grading: g } => {
                let s = json::star_from_json(&load(s)?, n)?;
                let trunc = TruncationSpec::new(grading(g)?, n);
                Outcome::data(star::star_exponential(&s, &load_as(jet)?, &trunc)?.to_json())
            }
            StarCommand::Symbol { star: s, jet } => {
                let s = json::star_from_json(&load(s)?, n)?;
                Outcome::data(star::left_mult_symbol(&s, &load_as(jet)?, n)?.to_json())
            }
        },
    })
}

fn report(stderr: &mut dyn Write, kind: &str, detail: &str) -> i32 {
    let doc = json!({"error": {"kind": kind, "detail": detail}});
    let _ = writeln!(stderr, "{doc}");
    2
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            return report(stderr, "UsageError", e.to_string().trim());
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => return report(stderr, e.kind(), &e.to_string()),
    };
    let text = format!("{}\n", outcome.doc);
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(detail) = written {
        return report(stderr, "IoError", &detail);
    }
    match outcome.verdict {
        Some(false) if cli.assert => 1,
        _ => 0,
    }
}
