//! Command-line front end for the `robex` binary.
//!
//! Exit codes: 0 success or property holds, 1 property fails or verification
//! rejected, 2 undecided within the search budget, 64 usage error, 65
//! malformed input, 74 output could not be written.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{classify, WciBudget, WeakConvexIndependence};
use crate::beliefs::{validate_instance, ExtractionInstance, Instance};
use crate::geometry::Point;
use crate::lab::{
    ci_epsilon_threshold, construct_generic_witnesses, grid, monte_carlo_frequencies, scan_epsilon, Family, LabError,
    WitnessKind,
};
use crate::rational::{parse_rational, Rational};
use crate::synthesis::{pooled_menu, synthesize_full_extraction, synthesize_weak_extraction, Menu, SynthesisError};
use crate::verification::{
    all_types, designer_report, pooling_check, verify_extraction, verify_ic_ir, ExtractionKind, VerificationError,
};

/// Environment variable consulted for the default seed.
pub const SEED_ENV: &str = "EXTRACTION_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum Exit {
    Success = 0,
    Fails = 1,
    Unknown = 2,
    Usage = 64,
    DataErr = 65,
    IoErr = 74,
}

impl Exit {
    fn from_bool(holds: bool) -> Self {
        if holds {
            Exit::Success
        } else {
            Exit::Fails
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "robex", version, about = "Robust surplus extraction with set-valued beliefs")]
struct Cli {
    /// Seed for randomized searches and sampling [default: $EXTRACTION_SEED or 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Total sample budget of the weak convex independence search.
    #[arg(long, global = true)]
    wci_budget: Option<usize>,
    /// Write the main output here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the belief sets of an instance.
    Classify { instance: PathBuf },
    /// Build a menu with its certificate.
    Synthesize {
        #[arg(long, value_enum, default_value_t = Mode::Full)]
        mode: Mode,
        /// Additive slack on each scale factor.
        #[arg(long, default_value = "1", value_parser = rational_arg)]
        margin: Rational,
        /// JSON array of selected beliefs, one per type (weak mode).
        #[arg(long)]
        selection: Option<PathBuf>,
        /// Comma-separated pooled types (pooled mode) [default: all].
        #[arg(long, value_delimiter = ',')]
        pool: Option<Vec<String>>,
        instance: PathBuf,
    },
    /// Check a menu against an instance.
    Verify {
        #[arg(long)]
        menu: PathBuf,
        #[arg(long, value_enum)]
        check: Check,
        /// Comma-separated types for ic, ir and designer checks [default: all].
        #[arg(long, value_delimiter = ',')]
        pool: Option<Vec<String>>,
        instance: PathBuf,
    },
    /// Classify ε-contaminations of the instance's belief centers over a grid.
    ScanEpsilon {
        /// start:end:step, e.g. 0:1:1/8
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        instance: PathBuf,
    },
    /// Bracket the largest ε keeping contaminations convex independent.
    Threshold {
        #[arg(long, value_parser = rational_arg)]
        tol: Rational,
        instance: PathBuf,
    },
    /// Monte Carlo frequencies of the belief conditions.
    Sample {
        #[arg(long)]
        family: String,
        #[arg(long, value_parser = rational_arg)]
        eps: Option<Rational>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[arg(long, default_value_t = 3)]
        types: usize,
        /// Also write per-sample rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build a robust witness collection and spot-check it.
    Witness {
        #[arg(long, value_parser = witness_kind)]
        kind: WitnessKind,
        #[arg(long, default_value_t = 2)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        types: usize,
        /// Number of perturbation checks.
        #[arg(long, default_value_t = 20)]
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Weak,
    Pooled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Check {
    Ic,
    Ir,
    Full,
    Weak,
    Optimal,
    Maximal,
    Pooling,
    Designer,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn witness_kind(s: &str) -> Result<WitnessKind, String> {
    s.parse()
}

struct Failure {
    code: Exit,
    message: String,
}

impl Failure {
    fn new(code: Exit, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<Exit, Failure>;

struct Ctx<'a> {
    seed: u64,
    budget: WciBudget,
    output: Option<PathBuf>,
    stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, text: &str) -> Result<(), Failure> {
        match &self.output {
            Some(path) => write_atomic(path, text.as_bytes()),
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::new(Exit::IoErr, format!("cannot write output: {e}"))),
        }
    }

    fn emit_json<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.emit(&text)
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::new(Exit::IoErr, format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(Exit::DataErr, format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let raw = ExtractionInstance::from_json(&read(path)?)
        .map_err(|e| Failure::new(Exit::DataErr, format!("{}: {e}", path.display())))?;
    validate_instance(&raw).map_err(|violations| {
        let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        Failure::new(Exit::DataErr, format!("{}: invalid instance\n{}", path.display(), lines.join("\n")))
    })
}

fn load_menu(path: &Path) -> Result<Menu, Failure> {
    Menu::from_json(&read(path)?).map_err(|e| Failure::new(Exit::DataErr, format!("{}: {e}", path.display())))
}

fn centers(inst: &Instance) -> Result<Vec<Point>, Failure> {
    inst.spec()
        .types
        .iter()
        .map(|t| {
            t.belief.center().cloned().ok_or_else(|| {
                Failure::new(Exit::DataErr, format!("type {} has a vertex belief without a center", t.name))
            })
        })
        .collect()
}

fn verification_failure(e: VerificationError) -> Failure {
    Failure::new(Exit::DataErr, e.to_string())
}

fn lab_failure(e: LabError) -> Failure {
    let code = match e {
        LabError::CentersNotConvexIndependent | LabError::MonotonicityViolated { .. } | LabError::Analysis(_) => {
            Exit::Fails
        }
        LabError::Infeasible(_)
        | LabError::NonPositiveTolerance
        | LabError::InvalidGrid
        | LabError::InvalidEpsilon
        | LabError::NoSamples => Exit::Usage,
        LabError::TooFewCenters | LabError::InvalidCenters(_) => Exit::DataErr,
    };
    Failure::new(code, e.to_string())
}

#[derive(Serialize)]
struct CheckReport<T: Serialize> {
    check: &'static str,
    holds: bool,
    #[serde(flatten)]
    details: T,
}

fn dispatch(cli: Cli, ctx: &mut Ctx<'_>) -> Outcome {
    match cli.command {
        Command::Classify { instance } => {
            let inst = load_instance(&instance)?;
            let report = classify(&inst, ctx.budget, ctx.seed).map_err(|e| Failure::new(Exit::DataErr, e.to_string()))?;
            ctx.emit_json(&report)?;
            Ok(match report.weak_convex_independence {
                WeakConvexIndependence::Unknown { .. } => Exit::Unknown,
                _ => Exit::Success,
            })
        }
        Command::Synthesize {
            mode,
            margin,
            selection,
            pool,
            instance,
        } => {
            let inst = load_instance(&instance)?;
            let result = match mode {
                Mode::Full => synthesize_full_extraction(&inst, &margin),
                Mode::Weak => {
                    let selection = match selection {
                        Some(p) => Some(
                            serde_json::from_str::<Vec<Point>>(&read(&p)?)
                                .map_err(|e| Failure::new(Exit::DataErr, format!("{}: {e}", p.display())))?,
                        ),
                        None => None,
                    };
                    synthesize_weak_extraction(&inst, selection, ctx.budget, ctx.seed, &margin)
                }
                Mode::Pooled => pooled_menu(&inst, &pool.unwrap_or_else(|| all_types(&inst))),
            };
            match result {
                Ok(menu) => {
                    ctx.emit(&(menu.to_json() + "\n"))?;
                    Ok(Exit::Success)
                }
                Err(e) => {
                    let code = match e {
                        SynthesisError::WeakCIUnknown => Exit::Unknown,
                        SynthesisError::ConvexIndependenceFails { .. }
                        | SynthesisError::SelectionNotConvexIndependent
                        | SynthesisError::BrokenCertificate { .. } => Exit::Fails,
                        SynthesisError::SelectionOutsideBelief { .. }
                        | SynthesisError::SelectionLength { .. }
                        | SynthesisError::UnknownType(_)
                        | SynthesisError::EmptyPool => Exit::DataErr,
                    };
                    Err(Failure::new(code, e.to_string()))
                }
            }
        }
        Command::Verify {
            menu,
            check,
            pool,
            instance,
        } => {
            let inst = load_instance(&instance)?;
            let menu = load_menu(&menu)?;
            let pool = pool.unwrap_or_else(|| all_types(&inst));
            let holds = match check {
                Check::Ic | Check::Ir => {
                    let r = verify_ic_ir(&menu, &inst, &pool).map_err(verification_failure)?;
                    let (name, holds) = match check {
                        Check::Ic => ("ic", r.ic),
                        _ => ("ir", r.ir),
                    };
                    ctx.emit_json(&CheckReport {
                        check: name,
                        holds,
                        details: r,
                    })?;
                    holds
                }
                Check::Full | Check::Weak | Check::Optimal | Check::Maximal => {
                    let kind = match check {
                        Check::Full => ExtractionKind::Full,
                        Check::Weak => ExtractionKind::Weak,
                        Check::Optimal => ExtractionKind::Optimal,
                        _ => ExtractionKind::Maximal,
                    };
                    let r = verify_extraction(&menu, &inst, kind).map_err(verification_failure)?;
                    let holds = r.holds;
                    ctx.emit_json(&r)?;
                    holds
                }
                Check::Pooling => {
                    let r = pooling_check(&menu, &inst).map_err(verification_failure)?;
                    let holds = r.consistent;
                    ctx.emit_json(&CheckReport {
                        check: "pooling",
                        holds,
                        details: r,
                    })?;
                    holds
                }
                Check::Designer => {
                    let r = designer_report(&menu, &inst, &pool).map_err(verification_failure)?;
                    let holds = r.consistent();
                    ctx.emit_json(&CheckReport {
                        check: "designer",
                        holds,
                        details: r,
                    })?;
                    holds
                }
            };
            Ok(Exit::from_bool(holds))
        }
        Command::ScanEpsilon {
            grid: spec,
            format,
            instance,
        } => {
            let inst = load_instance(&instance)?;
            let parts: Vec<&str> = spec.split(':').collect();
            let [a, b, step] = parts.as_slice() else {
                return Err(Failure::new(Exit::Usage, format!("grid {spec:?} is not start:end:step")));
            };
            let parse = |s: &str| parse_rational(s).map_err(|e| Failure::new(Exit::Usage, e.to_string()));
            let points = grid(&parse(a)?, &parse(b)?, &parse(step)?).map_err(lab_failure)?;
            let scan = scan_epsilon(&centers(&inst)?, &points, ctx.budget, ctx.seed).map_err(lab_failure)?;
            match format {
                Format::Csv => ctx.emit(&scan.to_csv())?,
                Format::Json => ctx.emit_json(&scan)?,
            }
            Ok(Exit::Success)
        }
        Command::Threshold { tol, instance } => {
            let inst = load_instance(&instance)?;
            let bracket = ci_epsilon_threshold(&centers(&inst)?, &tol).map_err(lab_failure)?;
            ctx.emit_json(&bracket)?;
            Ok(Exit::Success)
        }
        Command::Sample {
            family,
            eps,
            n,
            states,
            types,
            csv,
        } => {
            let family = Family::parse(&family, eps).map_err(|m| Failure::new(Exit::Usage, m))?;
            let report =
                monte_carlo_frequencies(states, types, &family, n, ctx.seed, ctx.budget).map_err(lab_failure)?;
            if let Some(path) = csv {
                write_atomic(&path, report.to_csv().as_bytes())?;
            }
            ctx.emit_json(&report)?;
            Ok(Exit::Success)
        }
        Command::Witness { kind, states, types, k } => {
            let w = construct_generic_witnesses(kind, states, types, k, ctx.seed).map_err(lab_failure)?;
            ctx.emit_json(&w)?;
            Ok(Exit::from_bool(w.all_checks_pass()))
        }
    }
}

/// Runs the CLI on `args` (program name first), writing reports to `stdout`
/// and diagnostics to `stderr`; returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => Exit::Usage as i32,
            };
        }
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => match v.trim().parse() {
                Ok(s) => s,
                Err(_) => {
                    let _ = writeln!(stderr, "error: {SEED_ENV}={v:?} is not a 64-bit unsigned integer");
                    return Exit::Usage as i32;
                }
            },
            Err(_) => 0,
        },
    };
    let budget = cli.wci_budget.map(WciBudget::from_total).unwrap_or_default();
    let mut ctx = Ctx {
        seed,
        budget,
        output: cli.output.clone(),
        stdout,
    };
    match dispatch(cli, &mut ctx) {
        Ok(code) => code as i32,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code as i32
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(std::iter::once("robex").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run_capture(&["frobnicate"]).0, 64);
        assert_eq!(run_capture(&["verify", "x.json"]).0, 64);
        assert_eq!(run_capture(&["threshold", "--tol", "abc", "x.json"]).0, 64);
    }

    #[test]
    fn missing_instance_is_a_data_error() {
        let (code, _, err) = run_capture(&["classify", "/nonexistent/instance.json"]);
        assert_eq!(code, 65);
        assert!(err.contains("cannot read"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("scan-epsilon"));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        std::fs::write(&path, "old").unwrap();
        assert!(write_atomic(&path, b"new").is_ok());
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "new");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
